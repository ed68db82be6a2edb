#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "crsim/signal.hpp"

using namespace crsim;

namespace {

ChannelGrid default_grid() { return {100e6, 10, -90.0}; }

std::vector<Waveform> default_catalog(const ChannelGrid& grid) {
    return build_catalog(grid, 10e6, 100e6, 10e6, 10.24e-6, 1.0);
}

CpiConfig small_cfg(int pulses) {
    CpiConfig cfg;
    cfg.pulses = pulses;
    cfg.pri_s = 2.56e-5; // 2560 fast-time samples
    cfg.fs_hz = 100e6;
    cfg.fc_rf_hz = 3e9;
    cfg.noise_dbm = -std::numeric_limits<double>::infinity();
    return cfg;
}

std::vector<InterferenceSnapshot> quiet_trace(int pulses, int subchannels) {
    return std::vector<InterferenceSnapshot>(pulses, InterferenceSnapshot(subchannels));
}

double total_power(const CMat& m) {
    double e = 0.0;
    for (const auto& v : m.a) e += std::norm(v);
    return e;
}

} // namespace

TEST_CASE("chirp synthesis") {
    Waveform w{0, 10e6, 40e6, 10.24e-6, 2.0};
    const double fs = 100e6;
    const auto pulse = synth_pulse(w, fs);
    REQUIRE(pulse.size() == 1024);

    SECTION("constant modulus") {
        for (const auto& s : pulse) REQUIRE(std::abs(s) == Catch::Approx(2.0).margin(1e-12));
    }
    SECTION("instantaneous frequency sweeps the band linearly") {
        const int n = static_cast<int>(pulse.size());
        for (int k = 0; k + 1 < n; k += 16) {
            const double dphi = std::arg(pulse[k + 1] * std::conj(pulse[k]));
            const double f_inst = dphi * fs / (2.0 * M_PI);
            const double t_mid = -0.5 * w.duration_s + (k + 0.5) / fs;
            const double f_expect = w.fc_hz + w.slope() * t_mid;
            REQUIRE(f_inst == Catch::Approx(f_expect).margin(2.0 * fs / n));
        }
    }
    SECTION("spectral energy concentrates in the swept band") {
        const int n = 4096;
        std::vector<std::complex<double>> padded(n);
        std::copy(pulse.begin(), pulse.end(), padded.begin());
        Fft fft(n);
        fft.forward(padded.data());
        const double delta = 2.0 / w.duration_s;
        double in_band = 0.0, total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double f = (i < n / 2 ? i : i - n) * (fs / n);
            const double p = std::norm(padded[i]);
            total += p;
            if (f >= w.lo_hz() - delta && f <= w.hi_hz() + delta) in_band += p;
        }
        REQUIRE(total > 0.0);
        REQUIRE((total - in_band) / total < 0.05);
    }
    SECTION("aliasing is rejected") {
        Waveform bad{0, 40e6, 40e6, 1e-5, 1.0};
        CHECK_THROWS_AS(synth_pulse(bad, 100e6), std::invalid_argument);
    }
}

TEST_CASE("cpi synthesis basics") {
    const auto grid = default_grid();
    const auto catalog = default_catalog(grid);
    auto cfg = small_cfg(4);
    std::mt19937_64 rng(3);

    SECTION("empty scene with zero noise is identically zero") {
        const std::vector<Waveform> seq(4, catalog[20]);
        const auto raw = simulate_cpi(seq, {}, quiet_trace(4, 10), grid, cfg, rng);
        CHECK(total_power(raw) == 0.0);
    }
    SECTION("static target with identical pulses repeats exactly") {
        const std::vector<Waveform> seq(4, catalog[20]);
        const std::vector<Target> tgt{{1500.3, 0.0, 12.0}};
        const auto raw = simulate_cpi(seq, tgt, quiet_trace(4, 10), grid, cfg, rng);
        for (int m = 1; m < 4; ++m)
            for (int i = 0; i < raw.cols; ++i)
                REQUIRE(std::abs(raw.at(m, i) - raw.at(0, i)) < 1e-12);
    }
    SECTION("superposition is linear in the target set") {
        const std::vector<Waveform> seq(4, catalog[32]);
        const std::vector<Target> a{{1200.7, 10.0, 10.0}};
        const std::vector<Target> b{{1900.2, -15.0, 14.0}};
        std::vector<Target> both = a;
        both.insert(both.end(), b.begin(), b.end());
        std::mt19937_64 r1(5), r2(5), r3(5);
        const auto ra = simulate_cpi(seq, a, quiet_trace(4, 10), grid, cfg, r1);
        const auto rb = simulate_cpi(seq, b, quiet_trace(4, 10), grid, cfg, r2);
        const auto rab = simulate_cpi(seq, both, quiet_trace(4, 10), grid, cfg, r3);
        for (std::size_t i = 0; i < rab.a.size(); ++i)
            REQUIRE(std::abs(rab.a[i] - (ra.a[i] + rb.a[i])) < 1e-12);
    }
    SECTION("doppler progression follows the round-trip model") {
        auto cfg8 = small_cfg(8);
        const std::vector<Waveform> seq(8, catalog[20]);
        const std::vector<Target> tgt{{1500.3, 30.0, 12.0}};
        const auto raw = simulate_cpi(seq, tgt, quiet_trace(8, 10), grid, cfg8, rng);
        const auto profiles = matched_filter(raw, seq, cfg8);
        const auto [row, col] = target_cell(tgt[0], cfg8);
        const double f_d = target_doppler_hz(tgt[0], cfg8);
        CHECK(f_d == Catch::Approx(2.0 * 30.0 * 3e9 / kSpeedOfLight));
        const double expect = 2.0 * M_PI * f_d * cfg8.pri_s;
        for (int m = 0; m + 1 < 8; ++m) {
            const double dphi =
                std::arg(profiles.at(m + 1, col) * std::conj(profiles.at(m, col)));
            REQUIRE(dphi == Catch::Approx(expect).margin(1e-9));
        }
    }
    SECTION("targets beyond the window are rejected") {
        const std::vector<Waveform> seq(4, catalog[20]);
        const std::vector<Target> tgt{{4000.0, 0.0, 10.0}}; // delay + pulse > PRI window
        CHECK_THROWS_AS(simulate_cpi(seq, tgt, quiet_trace(4, 10), grid, cfg, rng),
                        std::invalid_argument);
    }
    SECTION("interference power lands where the bits are") {
        const std::vector<Waveform> seq(16, catalog[20]);
        auto cfg16 = small_cfg(16);
        std::vector<InterferenceSnapshot> trace(16, InterferenceSnapshot(10));
        for (auto& snap : trace) {
            snap.bits.set(0);
            snap.power_dbm[0] = -80.0;
        }
        std::mt19937_64 r(9);
        const auto raw = simulate_cpi(seq, {}, trace, grid, cfg16, r);
        // mean per-sample power should sit near the configured -80 dBm
        const double mean_mw = total_power(raw) / (raw.rows * raw.cols);
        CHECK(mean_mw == Catch::Approx(dbm_to_mw(-80.0)).epsilon(0.1));
    }
}

TEST_CASE("matched filter") {
    const auto grid = default_grid();
    const auto catalog = default_catalog(grid);
    auto cfg = small_cfg(1);
    std::mt19937_64 rng(4);

    SECTION("peak sits at the true delay bin for every catalog waveform") {
        const Target tgt{1501.5, 0.0, 10.0}; // integer-ish bin offset irrelevant here
        for (const auto& w : catalog) {
            const std::vector<Waveform> seq{w};
            const auto raw =
                simulate_cpi(seq, {tgt}, quiet_trace(1, 10), grid, cfg, rng);
            const auto profiles = matched_filter(raw, seq, cfg);
            int best = 0;
            double best_p = 0.0;
            for (int i = 0; i < profiles.cols; ++i) {
                const double p = std::norm(profiles.at(0, i));
                if (p > best_p) {
                    best_p = p;
                    best = i;
                }
            }
            const auto [row, col] = target_cell(tgt, cfg);
            REQUIRE(std::abs(best - col) <= 1);
        }
    }
    SECTION("noise-free peak value is the pulse energy times the gain") {
        // exact-bin target: range = 1000 bins
        const double r = 1000.0 * cfg.range_bin_m();
        const Target tgt{r, 0.0, 10.0};
        const std::vector<Waveform> seq{catalog[20]};
        const auto raw = simulate_cpi(seq, {tgt}, quiet_trace(1, 10), grid, cfg, rng);
        const auto profiles = matched_filter(raw, seq, cfg);
        const double e_p = 1024.0; // unit amplitude, 1024 samples
        const double g = std::sqrt(std::pow(10.0, tgt.snr_db / 10.0) / e_p);
        CHECK(std::abs(profiles.at(0, 1000)) == Catch::Approx(g * e_p).epsilon(1e-9));
    }
    SECTION("different pulses produce different sidelobe patterns") {
        auto cfg2 = small_cfg(2);
        const double r = 1000.0 * cfg2.range_bin_m();
        const std::vector<Waveform> seq{catalog[0], catalog[54]};
        const auto raw =
            simulate_cpi(seq, {{r, 0.0, 10.0}}, quiet_trace(2, 10), grid, cfg2, rng);
        const auto profiles = matched_filter(raw, seq, cfg2);
        double diff = 0.0;
        for (int i = 0; i < profiles.cols; ++i) {
            if (std::abs(i - 1000) <= 2) continue;
            diff += std::norm(profiles.at(0, i) - profiles.at(1, i));
        }
        CHECK(diff > 0.0);
    }
    SECTION("zero input stays zero") {
        const std::vector<Waveform> seq(1, catalog[10]);
        CMat raw(1, cfg.fast_samples());
        const auto profiles = matched_filter(raw, seq, cfg);
        CHECK(total_power(profiles) == 0.0);
    }
}

TEST_CASE("range-doppler map") {
    const auto grid = default_grid();
    const auto catalog = default_catalog(grid);
    std::mt19937_64 rng(6);

    SECTION("slow-time FFT is unitary (Parseval)") {
        auto cfg = small_cfg(64);
        cfg.noise_dbm = -90.0;
        const std::vector<Waveform> seq(64, catalog[20]);
        const std::vector<Target> tgt{{1500.3, 20.0, 12.0}};
        const auto raw = simulate_cpi(seq, tgt, quiet_trace(64, 10), grid, cfg, rng);
        const auto profiles = matched_filter(raw, seq, cfg);
        const auto map = range_doppler(profiles, cfg);
        const double before = total_power(profiles);
        double after = 0.0;
        for (double p : map.power) after += p;
        REQUIRE(std::abs(after - before) / before < 1e-6);
    }
    SECTION("identical pulses put a static target's column energy in the zero-Doppler row") {
        auto cfg = small_cfg(64);
        const std::vector<Waveform> seq(64, catalog[20]);
        const std::vector<Target> tgt{{1500.3, 0.0, 12.0}};
        const auto raw = simulate_cpi(seq, tgt, quiet_trace(64, 10), grid, cfg, rng);
        const auto map = range_doppler(matched_filter(raw, seq, cfg), cfg);
        const auto [row, col] = target_cell(tgt[0], cfg);
        REQUIRE(row == 32);
        double col_total = 0.0;
        for (int r = 0; r < map.rows(); ++r) col_total += map.power[r * map.cols() + col];
        const double at_zero = map.power[row * map.cols() + col];
        REQUIRE(at_zero / col_total >= 0.95);
    }
    SECTION("pulse agility spreads energy off the target Doppler") {
        auto cfg = small_cfg(64);
        cfg.noise_dbm = -100.0;
        const std::vector<Target> tgt{{1500.45, 10.0, 12.0}};
        std::uniform_int_distribution<int> upick(0, static_cast<int>(catalog.size()) - 1);

        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            std::mt19937_64 pick_rng(seed);
            std::vector<Waveform> agile;
            for (int m = 0; m < 64; ++m) agile.push_back(catalog[upick(pick_rng)]);
            const std::vector<Waveform> constant(64, catalog[20]);

            auto off_target_energy = [&](const std::vector<Waveform>& seq,
                                         std::uint64_t noise_seed) {
                std::mt19937_64 r(noise_seed);
                const auto raw = simulate_cpi(seq, tgt, quiet_trace(64, 10), grid, cfg, r);
                const auto map = range_doppler(matched_filter(raw, seq, cfg), cfg);
                const auto [trow, tcol] = target_cell(tgt[0], cfg);
                double e = 0.0;
                for (int r2 = 0; r2 < map.rows(); ++r2) {
                    if (std::abs(r2 - trow) <= 2) continue;
                    for (int c2 = std::max(0, tcol - 1);
                         c2 <= std::min(map.cols() - 1, tcol + 1); ++c2)
                        e += map.power[r2 * map.cols() + c2];
                }
                return e;
            };
            const double agile_energy = off_target_energy(agile, 100 + seed);
            const double const_energy = off_target_energy(constant, 100 + seed);
            REQUIRE(agile_energy > const_energy);
        }
    }
}
