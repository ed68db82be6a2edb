#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "crsim/environment.hpp"
#include "crsim/fft.hpp"
#include "crsim/spectrum.hpp"

// Pulse-level CPI synthesis and range-Doppler processing. Complex analytic
// baseband throughout; each pulse is matched-filtered against itself, which
// is what turns intra-CPI waveform agility into Doppler-domain distortion.

namespace crsim {

constexpr double kSpeedOfLight = 299792458.0;

struct Target {
    double range_m = 0.0;
    double velocity_ms = 0.0;
    double snr_db = 15.0; // per pulse, at the matched-filter output
};

struct CpiConfig {
    int pulses = 400;        // M_CPI
    double pri_s = 1.024e-4;
    double fs_hz = 100e6;    // complex baseband rate; must cover the channel
    double fc_rf_hz = 3e9;   // carrier, sets the Doppler scale
    double noise_dbm = -94.0;

    int fast_samples() const { return static_cast<int>(std::llround(pri_s * fs_hz)); }
    double range_bin_m() const { return kSpeedOfLight / (2.0 * fs_hz); }
    double doppler_bin_hz() const { return 1.0 / (pulses * pri_s); }
};

struct CMat {
    int rows = 0, cols = 0;
    std::vector<std::complex<double>> a;

    CMat() = default;
    CMat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}

    std::complex<double>& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    const std::complex<double>& at(int r, int c) const {
        return a[static_cast<std::size_t>(r) * cols + c];
    }
    std::complex<double>* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
    const std::complex<double>* row(int r) const {
        return a.data() + static_cast<std::size_t>(r) * cols;
    }
};

struct RangeDopplerMap {
    CMat cplx;                 // Doppler bins x range bins, zero Doppler centered
    std::vector<double> power; // |cplx|^2, same layout
    double range_bin_m = 0.0;
    double doppler_bin_hz = 0.0;

    int rows() const { return cplx.rows; }
    int cols() const { return cplx.cols; }
};

inline double target_doppler_hz(const Target& t, const CpiConfig& cfg) {
    return 2.0 * t.velocity_ms * cfg.fc_rf_hz / kSpeedOfLight;
}

// Map cell a target lands in: (Doppler row in the shifted map, range column).
inline std::pair<int, int> target_cell(const Target& t, const CpiConfig& cfg) {
    const int m = cfg.pulses;
    const int col = static_cast<int>(std::llround(2.0 * t.range_m / kSpeedOfLight * cfg.fs_hz));
    long long k = std::llround(target_doppler_hz(t, cfg) / cfg.doppler_bin_hz());
    k = ((k % m) + m) % m; // Doppler aliases fold into one CPI
    const int row = static_cast<int>((k + m / 2) % m);
    return {row, col};
}

// Complex-baseband LFM chirp, t' in [-T/2, T/2) sampled at fs:
// A*exp(j*2*pi*(fc*t' + slope/2 * t'^2)).
inline std::vector<std::complex<double>> synth_pulse(const Waveform& w, double fs_hz) {
    if (std::abs(w.fc_hz) + 0.5 * w.bw_hz > 0.5 * fs_hz * (1.0 + 1e-12))
        throw std::invalid_argument("synth_pulse: pulse band exceeds the sample rate");
    const int n = static_cast<int>(std::llround(w.duration_s * fs_hz));
    if (n < 1) throw std::invalid_argument("synth_pulse: pulse shorter than one sample");
    std::vector<std::complex<double>> p(n);
    const double alpha = w.slope();
    for (int k = 0; k < n; ++k) {
        const double t = -0.5 * w.duration_s + k / fs_hz;
        const double phase = 2.0 * M_PI * (w.fc_hz * t + 0.5 * alpha * t * t);
        p[k] = std::polar(w.amplitude, phase);
    }
    return p;
}

namespace detail {

// Per-CPI cache of pulse spectra (zero-padded to the fast-time length).
class PulseBank {
public:
    PulseBank(int n_fast, double fs_hz) : n_(n_fast), fs_(fs_hz), fft_(n_fast) {}

    const std::vector<std::complex<double>>& spectrum(const Waveform& w) {
        auto it = spectra_.find(w.id);
        if (it != spectra_.end()) return it->second;
        const auto pulse = synth_pulse(w, fs_);
        if (static_cast<int>(pulse.size()) > n_)
            throw std::invalid_argument("PulseBank: pulse longer than the PRI window");
        std::vector<std::complex<double>> padded(n_);
        std::copy(pulse.begin(), pulse.end(), padded.begin());
        fft_.forward(padded.data());
        auto [pos, ok] = spectra_.emplace(w.id, std::move(padded));
        energies_.emplace(w.id, pulse.size() * w.amplitude * w.amplitude);
        lengths_.emplace(w.id, static_cast<int>(pulse.size()));
        return pos->second;
    }

    double energy(const Waveform& w) {
        spectrum(w);
        return energies_.at(w.id);
    }
    int length(const Waveform& w) {
        spectrum(w);
        return lengths_.at(w.id);
    }

private:
    int n_;
    double fs_;
    Fft fft_;
    std::map<int, std::vector<std::complex<double>>> spectra_;
    std::map<int, double> energies_;
    std::map<int, int> lengths_;
};

inline double signed_bin_freq(int i, int n, double fs) {
    return (i < n / 2 ? i : i - n) * (fs / n);
}

} // namespace detail

// Raw slow-time x fast-time data: per pulse, the sum of delayed and
// Doppler-rotated target returns plus band-limited interference in the
// occupied sub-channels plus circular white noise. Target delays are applied
// in the frequency domain, so fractional-sample ranges are exact.
inline CMat simulate_cpi(const std::vector<Waveform>& sequence,
                         const std::vector<Target>& targets,
                         const std::vector<InterferenceSnapshot>& interference,
                         const ChannelGrid& grid, const CpiConfig& cfg,
                         std::mt19937_64& rng) {
    const int m_cpi = static_cast<int>(sequence.size());
    if (m_cpi != cfg.pulses)
        throw std::invalid_argument("simulate_cpi: sequence length must equal pulses per CPI");
    if (static_cast<int>(interference.size()) != m_cpi)
        throw std::invalid_argument("simulate_cpi: interference trace length mismatch");
    const int n = cfg.fast_samples();

    detail::PulseBank bank(n, cfg.fs_hz);
    const double noise_mw = dbm_to_mw(cfg.noise_dbm);
    const double ref_mw = noise_mw > 0.0 ? noise_mw : 1.0;

    // Per-target constants: gain from post-compression SNR, fractional
    // delay spectrum, Doppler rate.
    const int n_tar = static_cast<int>(targets.size());
    std::vector<double> gain(n_tar), fd(n_tar), tau(n_tar);
    std::vector<std::vector<std::complex<double>>> delay_spec(n_tar);
    for (int k = 0; k < n_tar; ++k) {
        const Target& t = targets[k];
        tau[k] = 2.0 * t.range_m / kSpeedOfLight;
        fd[k] = target_doppler_hz(t, cfg);
        double e_p = 0.0;
        for (const auto& w : sequence) e_p = std::max(e_p, bank.energy(w));
        gain[k] = std::sqrt(std::pow(10.0, t.snr_db / 10.0) * ref_mw / e_p);
        const int max_len = bank.length(sequence.front());
        if (tau[k] * cfg.fs_hz + max_len > n)
            throw std::invalid_argument("simulate_cpi: target beyond the unambiguous window");
        delay_spec[k].resize(n);
        for (int i = 0; i < n; ++i) {
            const double f = detail::signed_bin_freq(i, n, cfg.fs_hz);
            delay_spec[k][i] = std::polar(1.0, -2.0 * M_PI * f * tau[k]);
        }
    }

    // Sub-channel -> frequency bin ranges for interference shaping.
    std::vector<std::vector<int>> sub_bins(grid.subchannels);
    for (int i = 0; i < n; ++i) {
        const double f = detail::signed_bin_freq(i, n, cfg.fs_hz);
        for (int c = 0; c < grid.subchannels; ++c)
            if (f >= grid.sub_lo(c) && f < grid.sub_hi(c)) {
                sub_bins[c].push_back(i);
                break;
            }
    }

    Fft fft(n);
    std::normal_distribution<double> n01;
    CMat raw(m_cpi, n);
    std::vector<std::complex<double>> spec(n);

    for (int m = 0; m < m_cpi; ++m) {
        std::fill(spec.begin(), spec.end(), std::complex<double>{0.0, 0.0});
        const auto& pulse_spec = bank.spectrum(sequence[m]);

        for (int k = 0; k < n_tar; ++k) {
            // Round-trip carrier phase plus per-pulse Doppler progression.
            const double phase =
                2.0 * M_PI * (fd[k] * m * cfg.pri_s - cfg.fc_rf_hz * tau[k]);
            const std::complex<double> c = std::polar(gain[k], phase);
            const auto& d = delay_spec[k];
            for (int i = 0; i < n; ++i) spec[i] += c * d[i];
        }
        for (int i = 0; i < n; ++i) spec[i] *= pulse_spec[i];

        const InterferenceSnapshot& snap = interference[m];
        for (int c = 0; c < grid.subchannels; ++c) {
            if (!snap.bits.test(c) || sub_bins[c].empty()) continue;
            const double p_mw = dbm_to_mw(snap.power_dbm[c]);
            // Bin variance chosen so the unnormalized inverse FFT lands at
            // p_mw per time sample.
            const double sigma =
                std::sqrt(0.5 * p_mw * static_cast<double>(n) * n / sub_bins[c].size());
            for (int i : sub_bins[c])
                spec[i] += std::complex<double>(sigma * n01(rng), sigma * n01(rng));
        }

        fft.inverse(spec.data());
        std::complex<double>* out = raw.row(m);
        if (noise_mw > 0.0) {
            const double s = std::sqrt(0.5 * noise_mw);
            for (int i = 0; i < n; ++i)
                out[i] = spec[i] + std::complex<double>(s * n01(rng), s * n01(rng));
        } else {
            std::copy(spec.begin(), spec.end(), out);
        }
    }
    return raw;
}

// Correlates each slow-time row against its own pulse (conjugate
// time-reverse), trimmed to the valid delay span.
inline CMat matched_filter(const CMat& raw, const std::vector<Waveform>& sequence,
                           const CpiConfig& cfg) {
    if (static_cast<int>(sequence.size()) != raw.rows)
        throw std::invalid_argument("matched_filter: sequence length mismatch");
    const int n = raw.cols;
    detail::PulseBank bank(n, cfg.fs_hz);
    int n_p = 0;
    for (const auto& w : sequence) n_p = std::max(n_p, bank.length(w));
    const int n_range = n - n_p + 1;

    Fft fft(n);
    CMat out(raw.rows, n_range);
    std::vector<std::complex<double>> work(n);
    for (int m = 0; m < raw.rows; ++m) {
        std::copy(raw.row(m), raw.row(m) + n, work.begin());
        fft.forward(work.data());
        const auto& ws = bank.spectrum(sequence[m]);
        for (int i = 0; i < n; ++i) work[i] *= std::conj(ws[i]);
        fft.inverse(work.data());
        std::copy(work.begin(), work.begin() + n_range, out.row(m));
    }
    return out;
}

// Unitary slow-time FFT per range bin, zero Doppler shifted to the center
// row. Keeps the complex map and the power map.
inline RangeDopplerMap range_doppler(const CMat& profiles, const CpiConfig& cfg) {
    const int m = profiles.rows;
    const int n_range = profiles.cols;
    RangeDopplerMap map;
    map.cplx = CMat(m, n_range);
    map.power.assign(static_cast<std::size_t>(m) * n_range, 0.0);
    map.range_bin_m = cfg.range_bin_m();
    map.doppler_bin_hz = cfg.doppler_bin_hz();

    Fft fft(m);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    std::vector<std::complex<double>> col(m);
    for (int c = 0; c < n_range; ++c) {
        for (int r = 0; r < m; ++r) col[r] = profiles.at(r, c);
        fft.forward(col.data());
        for (int k = 0; k < m; ++k) {
            const int row = (k + m / 2) % m;
            const std::complex<double> v = col[k] * scale;
            map.cplx.at(row, c) = v;
            map.power[static_cast<std::size_t>(row) * n_range + c] = std::norm(v);
        }
    }
    return map;
}

} // namespace crsim
