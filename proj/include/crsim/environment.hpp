#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include "crsim/spectrum.hpp"

// Interference generators. Each environment instance is stepped in strict
// PRI order by exactly one episode; instances own their generator state.

namespace crsim {

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) {
    return mw > 0.0 ? 10.0 * std::log10(mw) : -std::numeric_limits<double>::infinity();
}

// Occupancy bits plus the per-sub-channel interference power behind them.
struct InterferenceSnapshot {
    InterferenceVector bits;
    std::vector<double> power_dbm; // -inf where no interference is present

    InterferenceSnapshot() = default;
    explicit InterferenceSnapshot(int s)
        : bits(s), power_dbm(s, -std::numeric_limits<double>::infinity()) {}
};

// sense() reports the occupancy visible at the start of a PRI; advance()
// moves the scenario past one PRI and returns the occupancy the transmitted
// pulse is actually costed against. The two differ exactly when the
// environment evolves between sensing and transmission.
class Environment {
public:
    virtual ~Environment() = default;
    virtual InterferenceSnapshot sense() const = 0;
    virtual InterferenceSnapshot advance(const Waveform* w_t, const Waveform* w_prev) = 0;
};

// --- radar/communications coexistence ----------------------------------------

struct CoexistenceParams {
    int n_bs = 5;               // base stations sharing the channel
    int coherence_pri = 7;      // T_c, PRIs per interference block
    double pathloss_exp = 3.5;
    double rx_gain_db = 0.0;
    double power_min_dbm = 40.0;
    double power_max_dbm = 46.5;
    double dist_min_m = 5000.0;
    double dist_max_m = 6000.0;
    double shadow_mu = 0.0;
    double shadow_sigma = 2.0;  // natural-log shadowing
    double shadow_corr = 0.0;   // common-component correlation across BSs
    double cell_bw_hz = 20e6;   // per-BS cellular band
};

// Block-fading cellular interference: per block the active subset, band
// placements and shadowing draws are redrawn; within a block the occupancy
// is frozen. Received power per BS follows
// P_rx = P_tx + G_r - 10*alpha*log10(d) + X*10/ln10, X ~ N(mu, sigma^2).
class CoexistenceEnv : public Environment {
public:
    CoexistenceEnv(const ChannelGrid& grid, const CoexistenceParams& p, std::mt19937_64 rng)
        : grid_(grid), p_(p), rng_(std::move(rng)), current_(grid.subchannels) {
        if (p_.n_bs < 1) throw std::invalid_argument("CoexistenceEnv: need at least one BS");
        if (p_.coherence_pri < 1)
            throw std::invalid_argument("CoexistenceEnv: coherence time must be >= 1 PRI");
        std::uniform_real_distribution<double> upow(p_.power_min_dbm, p_.power_max_dbm);
        std::uniform_real_distribution<double> udist(p_.dist_min_m, p_.dist_max_m);
        const int cell_subs = std::max(
            1, static_cast<int>(std::ceil(p_.cell_bw_hz / grid_.sub_width() - 1e-9)));
        const int max_start = std::max(0, grid_.subchannels - cell_subs);
        std::uniform_int_distribution<int> ustart(0, max_start);
        for (int j = 0; j < p_.n_bs; ++j) {
            Bs bs;
            bs.power_dbm = upow(rng_);
            bs.dist_m = udist(rng_);
            bs.band_start = ustart(rng_);
            bs.band_subs = cell_subs;
            bs_.push_back(bs);
        }
        redraw_block();
        remaining_ = p_.coherence_pri;
    }

    InterferenceSnapshot sense() const override { return current_; }

    InterferenceSnapshot advance(const Waveform*, const Waveform*) override {
        if (remaining_ == 0) {
            redraw_block();
            remaining_ = p_.coherence_pri;
        }
        --remaining_;
        return current_;
    }

    // PRIs the current block will still be returned by advance().
    int remaining_pris() const { return remaining_; }

    // Occupancy for a given set of per-BS received powers; exposed so the
    // power arithmetic can be checked directly.
    InterferenceSnapshot occupancy(const std::vector<int>& active,
                                   const std::vector<double>& shadow) const {
        InterferenceSnapshot snap(grid_.subchannels);
        std::vector<double> mw(grid_.subchannels, 0.0);
        for (std::size_t i = 0; i < active.size(); ++i) {
            const Bs& bs = bs_[active[i]];
            const double rx_dbm = bs.power_dbm + p_.rx_gain_db -
                                  10.0 * p_.pathloss_exp * std::log10(bs.dist_m) +
                                  shadow[i] * 10.0 / std::log(10.0);
            const double rx_mw = dbm_to_mw(rx_dbm);
            for (int c = bs.band_start; c < bs.band_start + bs.band_subs; ++c)
                if (c < grid_.subchannels) mw[c] += rx_mw;
        }
        for (int c = 0; c < grid_.subchannels; ++c) {
            snap.power_dbm[c] = mw_to_dbm(mw[c]);
            if (snap.power_dbm[c] > grid_.harmful_dbm) snap.bits.set(c);
        }
        return snap;
    }

private:
    struct Bs {
        double power_dbm = 0.0;
        double dist_m = 0.0;
        int band_start = 0;
        int band_subs = 2;
    };

    void redraw_block() {
        std::uniform_int_distribution<int> un(1, p_.n_bs);
        const int n_act = un(rng_);
        std::vector<int> idx(p_.n_bs);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng_);
        idx.resize(n_act);

        const int cell_subs = bs_.empty() ? 2 : bs_.front().band_subs;
        const int max_start = std::max(0, grid_.subchannels - cell_subs);
        std::uniform_int_distribution<int> ustart(0, max_start);
        for (auto& bs : bs_) bs.band_start = ustart(rng_);

        std::normal_distribution<double> nshadow(0.0, 1.0);
        const double common = nshadow(rng_);
        std::vector<double> shadow(n_act);
        for (int i = 0; i < n_act; ++i) {
            const double own = nshadow(rng_);
            shadow[i] = p_.shadow_mu + p_.shadow_sigma *
                            (std::sqrt(1.0 - p_.shadow_corr) * own +
                             std::sqrt(p_.shadow_corr) * common);
        }
        current_ = occupancy(idx, shadow);
    }

    ChannelGrid grid_;
    CoexistenceParams p_;
    std::mt19937_64 rng_;
    std::vector<Bs> bs_;
    InterferenceSnapshot current_;
    int remaining_ = 0;
};

// --- adaptive jammer ----------------------------------------------------------

// Repeats are punished: transmitting the same waveform on consecutive PRIs
// moves the jam band onto that waveform's sub-channels for the next PRI;
// any change leaves the jammer where it was. The band starts empty.
class JammerEnv : public Environment {
public:
    JammerEnv(const ChannelGrid& grid, double jnr_db, double noise_dbm)
        : grid_(grid), jam_dbm_(noise_dbm + jnr_db), current_(grid.subchannels) {}

    InterferenceSnapshot sense() const override { return current_; }

    InterferenceSnapshot advance(const Waveform* w_t, const Waveform* w_prev) override {
        const InterferenceSnapshot seen = current_;
        if (w_t && w_prev && w_t->id == w_prev->id) {
            InterferenceSnapshot next(grid_.subchannels);
            next.bits = band_occupancy(grid_, w_t->lo_hz(), w_t->hi_hz());
            for (int c = 0; c < grid_.subchannels; ++c)
                if (next.bits.test(c)) next.power_dbm[c] = jam_dbm_;
            current_ = next;
        }
        return seen;
    }

private:
    ChannelGrid grid_;
    double jam_dbm_;
    InterferenceSnapshot current_;
};

// Frozen interference; sensing and costing always agree.
class StaticEnv : public Environment {
public:
    explicit StaticEnv(InterferenceSnapshot snap) : snap_(std::move(snap)) {}
    StaticEnv(const ChannelGrid& grid, const InterferenceVector& bits, double power_dbm)
        : snap_(grid.subchannels) {
        snap_.bits = bits;
        for (int c = 0; c < grid.subchannels; ++c)
            if (bits.test(c)) snap_.power_dbm[c] = power_dbm;
    }

    InterferenceSnapshot sense() const override { return snap_; }
    InterferenceSnapshot advance(const Waveform*, const Waveform*) override { return snap_; }

private:
    InterferenceSnapshot snap_;
};

} // namespace crsim
