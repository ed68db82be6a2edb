#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "crsim/history.hpp"
#include "crsim/linalg.hpp"
#include "crsim/spectrum.hpp"

// Constrained linear contextual learners. Both policies act on the
// distortion-constrained action set W' and on 3-feature contexts built from
// the observation history; selection minimizes predicted cost.

namespace crsim {

// Contexts for the current action set, ascending by waveform id.
using ContextSet = std::vector<std::pair<int, Vec3>>;

// Waveforms whose distortion relative to the previous transmission stays
// below the tolerance. No predecessor means the full catalog.
inline std::vector<int> constrain_actions(const std::vector<Waveform>& catalog,
                                          const Waveform* prev, const CostWeights& cw) {
    std::vector<int> ids;
    ids.reserve(catalog.size());
    for (const auto& w : catalog)
        if (!prev || distortion(w, prev, cw) < cw.dhat) ids.push_back(w.id);
    return ids;
}

// --- Thompson sampling -------------------------------------------------------

// Gaussian posterior state: B accumulates context outer products starting
// from the identity, f the cost-weighted contexts, theta_hat = B^-1 f.
struct TsState {
    Mat3 B = Mat3::identity();
    Vec3 f;
    Vec3 theta_hat;
    double cov_scale = 1.0; // optional variance inflation; 1 reproduces N(theta_hat, B^-1)

    void update(const Vec3& x, double cost) {
        B += Mat3::outer(x, x);
        f += x * cost;
        theta_hat = B.solve(f);
    }
};

// One posterior draw theta ~ N(theta_hat, cov_scale * B^-1).
inline Vec3 ts_sample(const TsState& st, std::mt19937_64& rng) {
    const Mat3 cov = st.B.inverse() * st.cov_scale;
    const Mat3 L = cov.cholesky();
    std::normal_distribution<double> n01;
    const Vec3 z{n01(rng), n01(rng), n01(rng)};
    return st.theta_hat + L * z;
}

// Draws theta and returns the id minimizing <x_w, theta>; ties go to the
// lowest waveform id.
inline int ts_select(const ContextSet& contexts, const TsState& st, std::mt19937_64& rng) {
    if (contexts.empty())
        throw std::invalid_argument("ts_select: empty action set");
    const Vec3 theta = ts_sample(st, rng);
    int best_id = contexts.front().first;
    double best = contexts.front().second.dot(theta);
    for (std::size_t i = 1; i < contexts.size(); ++i) {
        const double v = contexts[i].second.dot(theta);
        if (v < best) {
            best = v;
            best_id = contexts[i].first;
        }
    }
    return best_id;
}

// --- EXP3 --------------------------------------------------------------------

struct Exp3State {
    double epsilon = 0.1; // learning rate
    double gamma = 0.05;  // exploration mixing factor
    double ridge = 1e-6;  // regularizer for the least-squares cost estimate
    std::vector<double> cum_cost_est; // per catalog waveform id

    explicit Exp3State(std::size_t catalog_size = 0, double eps = 0.1, double gam = 0.05)
        : epsilon(eps), gamma(gam), cum_cost_est(catalog_size, 0.0) {
        if (eps <= 0.0 || eps >= 1.0)
            throw std::invalid_argument("Exp3State: epsilon must lie in (0,1)");
        if (gam < 0.0 || gam > 1.0)
            throw std::invalid_argument("Exp3State: gamma must lie in [0,1]");
    }
};

// Exponential-weights distribution over the current action set mixed with an
// exploration pmf pi: P = gamma*pi + (1-gamma)*softmax(-epsilon*cum).
// The softmax subtracts the minimum cumulative estimate before
// exponentiating.
inline std::vector<double> exp3_distribution(const std::vector<int>& ids,
                                             const std::vector<double>& cum_cost_est,
                                             double epsilon, double gamma,
                                             const std::vector<double>& pi) {
    if (ids.empty()) throw std::invalid_argument("exp3_distribution: empty action set");
    if (pi.size() != ids.size())
        throw std::invalid_argument("exp3_distribution: pi size mismatch");

    double cmin = cum_cost_est[ids.front()];
    for (int id : ids) cmin = std::min(cmin, cum_cost_est[id]);

    std::vector<double> p(ids.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        p[i] = std::exp(-epsilon * (cum_cost_est[ids[i]] - cmin));
        denom += p[i];
    }
    for (std::size_t i = 0; i < ids.size(); ++i)
        p[i] = gamma * pi[i] + (1.0 - gamma) * p[i] / denom;
    return p;
}

inline int sample_pmf(const std::vector<double>& p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double r = u(rng);
    for (std::size_t i = 0; i < p.size(); ++i) {
        r -= p[i];
        if (r <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(p.size()) - 1;
}

// Least-squares cost estimation after observing the chosen action's cost:
// theta = (Q + ridge*I)^-1 * x_chosen * cost with Q the pmf-weighted context
// covariance; every action in the set receives estimate <x, theta>, which
// accumulates into cum_cost_est. Actions outside the set are untouched.
inline Vec3 exp3_estimate(const ContextSet& contexts, const std::vector<double>& p,
                          std::size_t chosen_index, double cost, double ridge,
                          std::vector<double>& cum_cost_est) {
    if (chosen_index >= contexts.size())
        throw std::invalid_argument("exp3_estimate: chosen index out of range");
    Mat3 q;
    for (std::size_t i = 0; i < contexts.size(); ++i)
        q += Mat3::outer(contexts[i].second, contexts[i].second) * p[i];
    for (int d = 0; d < 3; ++d) q(d, d) += ridge;
    const Vec3 theta = q.solve(contexts[chosen_index].second * cost);
    for (const auto& [id, x] : contexts) cum_cost_est[id] += x.dot(theta);
    return theta;
}

// --- regret ------------------------------------------------------------------

// Strong regret: realized cost minus the hindsight-optimal catalog cost,
// accumulated per PRI. Always nonnegative per step since the optimum scans
// the full catalog.
class RegretLedger {
public:
    void add(double realized, double optimal) {
        realized_.push_back(realized);
        optimal_.push_back(optimal);
        cumulative_ += realized - optimal;
        trajectory_.push_back(cumulative_);
    }

    double cumulative() const { return cumulative_; }
    std::size_t steps() const { return realized_.size(); }
    const std::vector<double>& realized() const { return realized_; }
    const std::vector<double>& optimal() const { return optimal_; }
    const std::vector<double>& trajectory() const { return trajectory_; }

private:
    std::vector<double> realized_, optimal_, trajectory_;
    double cumulative_ = 0.0;
};

} // namespace crsim
