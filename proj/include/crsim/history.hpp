#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "crsim/linalg.hpp"
#include "crsim/rng.hpp"
#include "crsim/spectrum.hpp"

namespace crsim {

// Running statistics for one (waveform, sensed-vector) pair. Welford update,
// so mean/variance stay consistent with a brute-force pass over the log.
struct PairStats {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0; // sum of squared deviations
    double last = 0.0;

    double variance() const { return count > 1 ? m2 / (count - 1) : 0.0; }
};

struct Observation {
    std::int64_t t = 0;
    InterferenceVector s_hat;
    InterferenceVector s_true;
    int waveform_id = -1;
    double cost = 0.0;
};

// The per-PRI record the learners condition on: an append-only episode log
// plus per-pair running statistics keyed on (waveform id, sensed vector).
class ObservationHistory {
public:
    void observe(std::int64_t t, const InterferenceVector& s_hat,
                 const InterferenceVector& s_true, int waveform_id, double cost) {
        log_.push_back({t, s_hat, s_true, waveform_id, cost});
        PairStats& st = stats_[key(waveform_id, s_hat)];
        st.count += 1;
        const double delta = cost - st.mean;
        st.mean += delta / st.count;
        st.m2 += delta * (cost - st.mean);
        st.last = cost;
    }

    const PairStats* stats(int waveform_id, const InterferenceVector& s_hat) const {
        auto it = stats_.find(key(waveform_id, s_hat));
        return it == stats_.end() ? nullptr : &it->second;
    }

    const std::vector<Observation>& log() const { return log_; }
    std::size_t size() const { return log_.size(); }

private:
    static std::uint64_t key(int waveform_id, const InterferenceVector& s) {
        return splitmix64(s.pack() ^ (static_cast<std::uint64_t>(waveform_id) << 48));
    }

    std::unordered_map<std::uint64_t, PairStats> stats_;
    std::vector<Observation> log_;
};

// Context features for one (waveform, sensed vector) pair: sample mean,
// sample variance (denominator N-1) and the most recent cost. Unseen pairs
// map to the zero vector.
struct ContextVector {
    double mean = 0.0;
    double variance = 0.0;
    double last = 0.0;

    Vec3 vec() const { return {mean, variance, last}; }
};

inline ContextVector build_context(int waveform_id, const InterferenceVector& s_hat,
                                   const ObservationHistory& hist) {
    const PairStats* st = hist.stats(waveform_id, s_hat);
    if (!st || st->count == 0) return {};
    return {st->mean, st->variance(), st->last};
}

} // namespace crsim
