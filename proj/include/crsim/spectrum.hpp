#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

// Waveform catalog, shared-channel grid and the three-term transmission
// cost (collision bandwidth, missed bandwidth, distortion). All functions
// here are pure; concurrent callers need no synchronization.

namespace crsim {

struct Waveform {
    int id = -1;
    double fc_hz = 0.0;      // baseband center frequency, signed
    double bw_hz = 0.0;      // swept bandwidth
    double duration_s = 0.0; // pulse time
    double amplitude = 1.0;  // linear

    double slope() const { return bw_hz / duration_s; } // up-chirp rate
    double lo_hz() const { return fc_hz - 0.5 * bw_hz; }
    double hi_hz() const { return fc_hz + 0.5 * bw_hz; }
};

struct ChannelGrid {
    double bandwidth_hz = 100e6; // total shared channel, centered on 0
    int subchannels = 10;
    double harmful_dbm = -90.0;  // occupancy threshold

    double sub_width() const { return bandwidth_hz / subchannels; }
    double sub_lo(int j) const { return -0.5 * bandwidth_hz + j * sub_width(); }
    double sub_hi(int j) const { return sub_lo(j) + sub_width(); }
};

class InterferenceVector {
public:
    InterferenceVector() = default;
    explicit InterferenceVector(int s) : bits_(s, 0) {}

    static InterferenceVector zeros(int s) { return InterferenceVector(s); }
    static InterferenceVector ones(int s) {
        InterferenceVector v(s);
        std::fill(v.bits_.begin(), v.bits_.end(), std::uint8_t{1});
        return v;
    }
    // String form: character 0 is the lowest-frequency sub-channel.
    static InterferenceVector from_string(const std::string& s) {
        InterferenceVector v(static_cast<int>(s.size()));
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] != '0' && s[i] != '1')
                throw std::invalid_argument("InterferenceVector: bits must be 0 or 1");
            v.bits_[i] = static_cast<std::uint8_t>(s[i] - '0');
        }
        return v;
    }

    int size() const { return static_cast<int>(bits_.size()); }
    bool test(int i) const { return bits_[i] != 0; }
    void set(int i, bool on = true) { bits_[i] = on ? 1 : 0; }
    int count() const {
        int n = 0;
        for (auto b : bits_) n += b;
        return n;
    }

    std::string to_string() const {
        std::string s(bits_.size(), '0');
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i]) s[i] = '1';
        return s;
    }

    // Packed key for per-(waveform, vector) bookkeeping; bit i is sub-channel i.
    std::uint64_t pack() const {
        if (bits_.size() > 64)
            throw std::length_error("InterferenceVector::pack: more than 64 sub-channels");
        std::uint64_t k = 0;
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i]) k |= (std::uint64_t{1} << i);
        return k;
    }

    bool operator==(const InterferenceVector& o) const { return bits_ == o.bits_; }
    bool operator!=(const InterferenceVector& o) const { return !(*this == o); }

private:
    std::vector<std::uint8_t> bits_;
};

struct CostWeights {
    double beta1 = 1.0 / 3.0; // collision
    double beta2 = 1.0 / 3.0; // missed bandwidth
    double beta3 = 1.0 / 3.0; // distortion
    double gamma1 = 0.0;      // Hz^-2, center-frequency jumps
    double gamma2 = 0.0;      // Hz^-2, bandwidth jumps
    double dhat = 0.2;        // distortion tolerance

    // Calibrates gamma1/gamma2 so the catalog-wide maximum distortion is
    // exactly 1: start from 1/(2*max_jump^2) per term, then rescale both by
    // the realized pairwise maximum.
    static CostWeights normalized(const std::vector<Waveform>& catalog,
                                  double b1 = 1.0 / 3.0, double b2 = 1.0 / 3.0,
                                  double b3 = 1.0 / 3.0, double dhat = 0.2);
};

// --- catalog ---------------------------------------------------------------

// Enumerates every chirp on the (bandwidth, center-frequency) grid that fits
// inside the shared channel. Ordered by (bw ascending, fc ascending);
// ids run 0..W-1.
inline std::vector<Waveform> build_catalog(const ChannelGrid& grid, double bw_min_hz,
                                           double bw_max_hz, double step_hz,
                                           double duration_s, double amplitude) {
    if (step_hz <= 0.0)
        throw std::invalid_argument("build_catalog: step must be positive");
    if (bw_min_hz > bw_max_hz)
        throw std::invalid_argument("build_catalog: bw_min exceeds bw_max");
    if (bw_min_hz <= 0.0)
        throw std::invalid_argument("build_catalog: bandwidth must be positive");
    if (bw_max_hz > grid.bandwidth_hz)
        throw std::invalid_argument("build_catalog: bandwidth exceeds the shared channel");
    if (duration_s <= 0.0 || amplitude <= 0.0)
        throw std::invalid_argument("build_catalog: duration and amplitude must be positive");

    const double span = bw_max_hz - bw_min_hz;
    const int n_bw = static_cast<int>(std::llround(span / step_hz));
    if (std::abs(bw_min_hz + n_bw * step_hz - bw_max_hz) > 1e-6 * step_hz)
        throw std::invalid_argument("build_catalog: step does not divide the bandwidth range");

    std::vector<Waveform> catalog;
    for (int b = 0; b <= n_bw; ++b) {
        const double bw = bw_min_hz + b * step_hz;
        const double slack = grid.bandwidth_hz - bw;
        const int n_fc = static_cast<int>(std::floor(slack / step_hz + 1e-9)) + 1;
        const double fc0 = -0.5 * slack;
        for (int k = 0; k < n_fc; ++k) {
            Waveform w;
            w.id = static_cast<int>(catalog.size());
            w.fc_hz = fc0 + k * step_hz;
            w.bw_hz = bw;
            w.duration_s = duration_s;
            w.amplitude = amplitude;
            catalog.push_back(w);
        }
    }
    return catalog;
}

// Sub-channels overlapping [lo_hz, hi_hz] with nonzero measure.
inline InterferenceVector band_occupancy(const ChannelGrid& grid, double lo_hz, double hi_hz) {
    InterferenceVector v(grid.subchannels);
    const double tol = 1e-9 * grid.sub_width();
    for (int j = 0; j < grid.subchannels; ++j) {
        const double overlap =
            std::min(hi_hz, grid.sub_hi(j)) - std::max(lo_hz, grid.sub_lo(j));
        if (overlap > tol) v.set(j);
    }
    return v;
}

// --- cost terms ------------------------------------------------------------

// Fraction of sub-channels that are both interference-occupied and touched
// by the waveform's band.
inline double collision_bw(const Waveform& w, const InterferenceVector& s,
                           const ChannelGrid& grid) {
    const double tol = 1e-9 * grid.sub_width();
    int hits = 0;
    for (int j = 0; j < s.size(); ++j) {
        if (!s.test(j)) continue;
        const double overlap =
            std::min(w.hi_hz(), grid.sub_hi(j)) - std::max(w.lo_hz(), grid.sub_lo(j));
        if (overlap > tol) ++hits;
    }
    return static_cast<double>(hits) / s.size();
}

// Bandwidth of the widest catalog waveform with zero collision against s,
// ties broken toward the lowest id. Returns nullptr when every waveform
// collides.
inline const Waveform* widest_clean(const std::vector<Waveform>& catalog,
                                    const InterferenceVector& s, const ChannelGrid& grid) {
    const Waveform* best = nullptr;
    for (const auto& w : catalog) {
        if (collision_bw(w, s, grid) != 0.0) continue;
        if (!best || w.bw_hz > best->bw_hz) best = &w;
    }
    return best;
}

inline double missed_bw(const Waveform& w, const InterferenceVector& s,
                        const std::vector<Waveform>& catalog, const ChannelGrid& grid) {
    const Waveform* clean = widest_clean(catalog, s, grid);
    if (!clean) return 0.0;
    return std::max(0.0, (clean->bw_hz - w.bw_hz) / grid.bandwidth_hz);
}

// Squared parameter jump from the previous transmission; zero on the first
// pulse (no predecessor).
inline double distortion(const Waveform& w, const Waveform* prev, const CostWeights& cw) {
    if (!prev) return 0.0;
    const double dfc = w.fc_hz - prev->fc_hz;
    const double dbw = w.bw_hz - prev->bw_hz;
    return cw.gamma1 * dfc * dfc + cw.gamma2 * dbw * dbw;
}

// Variant taking a precomputed widest-clean bandwidth (pass a negative value
// when no clean waveform exists); used by hot loops that evaluate the whole
// catalog against one interference vector.
inline double cost_with_clean_bw(const Waveform& w, const InterferenceVector& s_true,
                                 const Waveform* prev, double clean_bw_hz,
                                 const ChannelGrid& grid, const CostWeights& cw) {
    const double c = collision_bw(w, s_true, grid);
    const double m =
        clean_bw_hz < 0.0 ? 0.0
                          : std::max(0.0, (clean_bw_hz - w.bw_hz) / grid.bandwidth_hz);
    return cw.beta1 * c + cw.beta2 * m + cw.beta3 * distortion(w, prev, cw);
}

// The cost is evaluated against the true (post-transmission) interference
// vector, not the sensed estimate.
inline double cost(const Waveform& w, const InterferenceVector& s_true, const Waveform* prev,
                   const std::vector<Waveform>& catalog, const ChannelGrid& grid,
                   const CostWeights& cw) {
    const Waveform* clean = widest_clean(catalog, s_true, grid);
    return cost_with_clean_bw(w, s_true, prev, clean ? clean->bw_hz : -1.0, grid, cw);
}

inline double lipschitz_metric(const Waveform& a, const Waveform& b, double l1, double l2) {
    if (l1 <= 0.0 || l2 <= 0.0)
        throw std::invalid_argument("lipschitz_metric: constants must be positive");
    return l1 * std::abs(a.fc_hz - b.fc_hz) + l2 * std::abs(a.bw_hz - b.bw_hz);
}

// Hindsight-optimal cost over the full catalog for one PRI.
inline double min_cost(const std::vector<Waveform>& catalog, const InterferenceVector& s_true,
                       const Waveform* prev, const ChannelGrid& grid, const CostWeights& cw) {
    const Waveform* clean = widest_clean(catalog, s_true, grid);
    const double clean_bw = clean ? clean->bw_hz : -1.0;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : catalog)
        best = std::min(best, cost_with_clean_bw(w, s_true, prev, clean_bw, grid, cw));
    return best;
}

inline CostWeights CostWeights::normalized(const std::vector<Waveform>& catalog, double b1,
                                           double b2, double b3, double dhat) {
    if (b1 < 0 || b1 > 1 || b2 < 0 || b2 > 1 || b3 < 0 || b3 > 1)
        throw std::invalid_argument("CostWeights: betas must lie in [0,1]");
    if (std::abs(b1 + b2 + b3 - 1.0) > 1e-12)
        throw std::invalid_argument("CostWeights: betas must sum to 1");
    if (dhat < 0 || dhat > 1)
        throw std::invalid_argument("CostWeights: dhat must lie in [0,1]");

    CostWeights cw;
    cw.beta1 = b1;
    cw.beta2 = b2;
    cw.beta3 = b3;
    cw.dhat = dhat;

    double dfc_max = 0.0, dbw_max = 0.0;
    for (const auto& a : catalog)
        for (const auto& b : catalog) {
            dfc_max = std::max(dfc_max, std::abs(a.fc_hz - b.fc_hz));
            dbw_max = std::max(dbw_max, std::abs(a.bw_hz - b.bw_hz));
        }
    cw.gamma1 = dfc_max > 0.0 ? 1.0 / (2.0 * dfc_max * dfc_max) : 0.0;
    cw.gamma2 = dbw_max > 0.0 ? 1.0 / (2.0 * dbw_max * dbw_max) : 0.0;

    double peak = 0.0;
    for (const auto& a : catalog)
        for (const auto& b : catalog) {
            const double dfc = a.fc_hz - b.fc_hz;
            const double dbw = a.bw_hz - b.bw_hz;
            peak = std::max(peak, cw.gamma1 * dfc * dfc + cw.gamma2 * dbw * dbw);
        }
    if (peak > 0.0) {
        cw.gamma1 /= peak;
        cw.gamma2 /= peak;
    }
    return cw;
}

inline void write_catalog_csv(const std::vector<Waveform>& catalog, std::ostream& os) {
    os << "id,fc_hz,bw_hz,duration_s,amplitude\n";
    char buf[160];
    for (const auto& w : catalog) {
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g\n", w.id, w.fc_hz,
                      w.bw_hz, w.duration_s, w.amplitude);
        os << buf;
    }
}

} // namespace crsim
