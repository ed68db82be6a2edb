#pragma once

#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace crsim {

// One-dimensional complex FFT of a fixed length, backed by FFTW. Plan
// creation is serialized (FFTW planning is not thread-safe); execution uses
// the object's private buffer, so each worker owns its own Fft instances.
class Fft {
public:
    explicit Fft(int n) : n_(n), buf_(static_cast<std::size_t>(n)) {
        std::lock_guard<std::mutex> lock(plan_mutex());
        auto* p = reinterpret_cast<fftw_complex*>(buf_.data());
        fwd_ = fftw_plan_dft_1d(n_, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(n_, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    ~Fft() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }

    int size() const { return n_; }

    // Unnormalized, operating on the caller's data (copied through the
    // planned buffer).
    void forward(std::complex<double>* data) { run(fwd_, data); }
    void backward(std::complex<double>* data) { run(bwd_, data); }

    // Backward transform scaled by 1/n (true inverse of forward()).
    void inverse(std::complex<double>* data) {
        run(bwd_, data);
        const double s = 1.0 / n_;
        for (int i = 0; i < n_; ++i) data[i] *= s;
    }

private:
    void run(fftw_plan plan, std::complex<double>* data) {
        std::copy(data, data + n_, buf_.begin());
        fftw_execute(plan);
        std::copy(buf_.begin(), buf_.end(), data);
    }

    static std::mutex& plan_mutex() {
        static std::mutex m;
        return m;
    }

    int n_;
    std::vector<std::complex<double>> buf_;
    fftw_plan fwd_;
    fftw_plan bwd_;
};

} // namespace crsim
