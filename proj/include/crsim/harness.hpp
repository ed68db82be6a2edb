#pragma once

#include <cstdint>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crsim/bandit.hpp"
#include "crsim/cfar.hpp"
#include "crsim/config.hpp"
#include "crsim/environment.hpp"
#include "crsim/history.hpp"
#include "crsim/rng.hpp"
#include "crsim/signal.hpp"

// Per-PRI experiment loop: sense, constrain, build contexts, select,
// advance the environment, observe the cost, update the learner, account
// regret; every M_CPI pulses the logged waveform sequence and interference
// trace feed the signal chain for detection scoring.

namespace crsim {

struct EpisodeRow {
    std::int64_t t = 0;
    std::string s_hat_bits;
    std::string s_true_bits;
    int waveform_id = -1;
    double cost = 0.0;
    double distortion = 0.0;
    double regret_cum = 0.0;             // against the unconstrained catalog optimum
    double optimal_cost = 0.0;           // hindsight optimum, full catalog
    double optimal_constrained_cost = 0.0;
    double regret_constrained_cum = 0.0;
};

struct CpiScore {
    int cpi = 0; // 0-based CPI index within the episode
    ScoreResult score;
};

struct EpisodeResult {
    int run_index = 0;
    std::vector<EpisodeRow> rows;
    std::vector<CpiScore> detections; // one entry per (CPI, desired pfa)
    double total_distortion = 0.0;
    double final_regret = 0.0;
};

namespace detail {

// Stream ids for per-run generator derivation.
enum : std::uint64_t { kEnvStream = 0, kPolicyStream = 1, kSignalStream = 2 };

inline std::unique_ptr<Environment> make_environment(const ExperimentConfig& cfg,
                                                     std::mt19937_64 rng) {
    if (cfg.scenario == Scenario::kCoexistence)
        return std::make_unique<CoexistenceEnv>(cfg.grid(), cfg.coex, std::move(rng));
    return std::make_unique<JammerEnv>(cfg.grid(), cfg.jammer_jnr_db, cfg.noise_dbm);
}

inline int fullband_waveform(const std::vector<Waveform>& catalog) {
    int best = 0;
    for (const auto& w : catalog)
        if (w.bw_hz > catalog[best].bw_hz) best = w.id;
    return best;
}

} // namespace detail

// Analysis window and tolerances for detection scoring; the auto window
// hugs the configured scene with the configured margins.
inline ScoreConfig make_score_config(const ExperimentConfig& cfg) {
    ScoreConfig sc;
    sc.tol_range = cfg.tol_range;
    sc.tol_doppler = cfg.tol_doppler;
    if (!cfg.window_auto) {
        sc.window = cfg.window;
        return sc;
    }
    if (cfg.targets.empty()) return sc; // full map
    const CpiConfig cpi = cfg.cpi();
    const int n_range = cpi.fast_samples() -
                        static_cast<int>(std::llround(cfg.pulse_s * cfg.fs_hz)) + 1;
    int row_lo = cfg.pulses, row_hi = 0, col_lo = n_range, col_hi = 0;
    for (const auto& t : cfg.targets) {
        const auto [row, col] = target_cell(t, cpi);
        row_lo = std::min(row_lo, row);
        row_hi = std::max(row_hi, row);
        col_lo = std::min(col_lo, col);
        col_hi = std::max(col_hi, col);
    }
    sc.window.row_lo = std::max(0, row_lo - cfg.window_doppler_margin);
    sc.window.row_hi = std::min(cfg.pulses - 1, row_hi + cfg.window_doppler_margin);
    sc.window.col_lo = std::max(0, col_lo - cfg.window_range_margin);
    sc.window.col_hi = std::min(n_range - 1, col_hi + cfg.window_range_margin);
    return sc;
}

// Runs one seeded episode. phase_trace, when set, receives one tag per loop
// phase in execution order. map_out/map_cpi capture a single CPI's
// range-Doppler map for export.
inline EpisodeResult run_episode(const ExperimentConfig& cfg, int run_index,
                                 std::vector<std::string>* phase_trace = nullptr,
                                 RangeDopplerMap* map_out = nullptr, int map_cpi = -1) {
    cfg.validate();

    const ChannelGrid grid = cfg.grid();
    const auto catalog = cfg.catalog();
    const CostWeights weights = cfg.weights();
    const CpiConfig cpi_cfg = cfg.cpi();
    const ScoreConfig score_cfg = make_score_config(cfg);

    auto env = detail::make_environment(
        cfg, make_rng(cfg.base_seed, run_index * 16 + detail::kEnvStream));
    auto policy_rng = make_rng(cfg.base_seed, run_index * 16 + detail::kPolicyStream);
    auto signal_rng = make_rng(cfg.base_seed, run_index * 16 + detail::kSignalStream);

    TsState ts;
    ts.cov_scale = cfg.ts_cov_scale;
    Exp3State exp3(catalog.size(), cfg.exp3_epsilon, cfg.exp3_gamma);
    exp3.ridge = cfg.exp3_ridge;
    ObservationHistory hist;
    RegretLedger ledger;
    const int fullband = detail::fullband_waveform(catalog);

    std::vector<int> all_ids(catalog.size());
    for (std::size_t i = 0; i < catalog.size(); ++i) all_ids[i] = catalog[i].id;

    EpisodeResult result;
    result.run_index = run_index;
    const std::int64_t horizon = static_cast<std::int64_t>(cfg.cpis) * cfg.pulses;
    result.rows.reserve(horizon);

    auto tag = [&](const char* phase) {
        if (phase_trace) phase_trace->emplace_back(phase);
    };

    const Waveform* prev = nullptr;
    double regret_con_cum = 0.0;
    std::vector<Waveform> cpi_seq;
    std::vector<InterferenceSnapshot> cpi_trace;
    cpi_seq.reserve(cfg.pulses);
    cpi_trace.reserve(cfg.pulses);

    for (std::int64_t t = 1; t <= horizon; ++t) {
        const InterferenceSnapshot sensed = env->sense();
        tag("sense");

        const std::vector<int> action_ids =
            cfg.constrained ? constrain_actions(catalog, prev, weights) : all_ids;
        if (action_ids.empty())
            throw std::runtime_error("run_episode: constrained action set is empty at t=" +
                                     std::to_string(t));
        tag("constrain");

        ContextSet contexts;
        contexts.reserve(action_ids.size());
        for (int id : action_ids)
            contexts.emplace_back(id, build_context(id, sensed.bits, hist).vec());
        tag("context");

        int chosen = -1;
        std::size_t chosen_pos = 0;
        std::vector<double> pmf;
        if (t == 1) {
            // PRI 1 seeds the predecessor and the history; the learners
            // start at t = 2.
            if (cfg.algorithm == Algorithm::kFixedFullband) {
                chosen = fullband;
            } else {
                std::uniform_int_distribution<std::size_t> pick(0, action_ids.size() - 1);
                chosen_pos = pick(policy_rng);
                chosen = action_ids[chosen_pos];
            }
        } else {
            switch (cfg.algorithm) {
                case Algorithm::kFixedFullband:
                    chosen = fullband;
                    break;
                case Algorithm::kTs:
                    chosen = ts_select(contexts, ts, policy_rng);
                    break;
                case Algorithm::kExp3: {
                    const std::vector<double> pi(action_ids.size(),
                                                 1.0 / action_ids.size());
                    pmf = exp3_distribution(action_ids, exp3.cum_cost_est, exp3.epsilon,
                                            exp3.gamma, pi);
                    chosen_pos = static_cast<std::size_t>(sample_pmf(pmf, policy_rng));
                    chosen = action_ids[chosen_pos];
                    break;
                }
            }
        }
        if (chosen != action_ids[chosen_pos]) {
            // ts_select / fixed return ids; recover the position for updates
            for (std::size_t i = 0; i < action_ids.size(); ++i)
                if (action_ids[i] == chosen) {
                    chosen_pos = i;
                    break;
                }
        }
        const Waveform& w_t = catalog[chosen];
        tag("select");

        const InterferenceSnapshot truth = env->advance(&w_t, prev);
        tag("advance");

        const Waveform* clean = widest_clean(catalog, truth.bits, grid);
        const double clean_bw = clean ? clean->bw_hz : -1.0;
        const double c_t =
            cost_with_clean_bw(w_t, truth.bits, prev, clean_bw, grid, weights);
        tag("cost");

        if (t > 1) {
            if (cfg.algorithm == Algorithm::kTs) {
                ts.update(contexts[chosen_pos].second, c_t);
            } else if (cfg.algorithm == Algorithm::kExp3) {
                exp3_estimate(contexts, pmf, chosen_pos, c_t, exp3.ridge,
                              exp3.cum_cost_est);
            }
        }
        hist.observe(t, sensed.bits, truth.bits, chosen, c_t);
        tag("update");

        double opt = std::numeric_limits<double>::infinity();
        for (const auto& w : catalog)
            opt = std::min(opt,
                           cost_with_clean_bw(w, truth.bits, prev, clean_bw, grid, weights));
        double opt_con = std::numeric_limits<double>::infinity();
        for (int id : action_ids)
            opt_con = std::min(opt_con, cost_with_clean_bw(catalog[id], truth.bits, prev,
                                                           clean_bw, grid, weights));
        ledger.add(c_t, opt);
        regret_con_cum += c_t - opt_con;
        tag("regret");

        const double d_t = distortion(w_t, prev, weights);
        result.total_distortion += d_t;
        result.rows.push_back({t, sensed.bits.to_string(), truth.bits.to_string(), chosen,
                               c_t, d_t, ledger.cumulative(), opt, opt_con,
                               regret_con_cum});

        cpi_seq.push_back(w_t);
        cpi_trace.push_back(truth);
        prev = &catalog[chosen];

        if (static_cast<int>(cpi_seq.size()) == cfg.pulses) {
            const int cpi_index = static_cast<int>((t - 1) / cfg.pulses);
            if (cfg.detection) {
                const CMat raw = simulate_cpi(cpi_seq, cfg.targets, cpi_trace, grid,
                                              cpi_cfg, signal_rng);
                const CMat profiles = matched_filter(raw, cpi_seq, cpi_cfg);
                const RangeDopplerMap map = range_doppler(profiles, cpi_cfg);
                if (map_out && cpi_index == map_cpi) *map_out = map;
                for (double pfa : cfg.pfa_sweep) {
                    const DetectionReport rep = cfar_2d(map, pfa, cfg.cfar);
                    result.detections.push_back(
                        {cpi_index, score_detections(rep, cfg.targets, cpi_cfg, score_cfg)});
                }
            }
            cpi_seq.clear();
            cpi_trace.clear();
        }
    }
    result.final_regret = ledger.cumulative();
    return result;
}

// Seed-parallel ensemble; per-run generators are derived from
// (base_seed, run index) so the schedule does not affect the results.
inline std::vector<EpisodeResult> run_ensemble(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<EpisodeResult> results(cfg.runs);
    const int workers = std::max(1, cfg.workers);
    for (int begin = 0; begin < cfg.runs; begin += workers) {
        const int end = std::min(cfg.runs, begin + workers);
        std::vector<std::future<EpisodeResult>> batch;
        for (int r = begin; r < end; ++r)
            batch.push_back(std::async(std::launch::async,
                                       [&cfg, r] { return run_episode(cfg, r); }));
        for (int r = begin; r < end; ++r) results[r] = batch[r - begin].get();
    }
    return results;
}

// Scores from every run with the burn-in CPIs dropped.
inline std::vector<ScoreResult> collect_scores(const std::vector<EpisodeResult>& results,
                                               int burn_in_cpis) {
    std::vector<ScoreResult> out;
    for (const auto& res : results)
        for (const auto& d : res.detections)
            if (d.cpi >= burn_in_cpis) out.push_back(d.score);
    return out;
}

// Mean detection probability per run at one desired pfa (for seed-paired
// comparisons across policies).
inline std::vector<double> per_run_pd(const std::vector<EpisodeResult>& results, double pfa,
                                      int burn_in_cpis) {
    std::vector<double> out;
    out.reserve(results.size());
    for (const auto& res : results) {
        double sum = 0.0;
        int n = 0;
        for (const auto& d : res.detections) {
            if (d.cpi < burn_in_cpis) continue;
            if (d.score.pfa_desired == pfa) {
                sum += d.score.pd;
                ++n;
            }
        }
        out.push_back(n > 0 ? sum / n : 0.0);
    }
    return out;
}

// One-sided sign test: p-value for "A > B" wins under a fair coin, ties
// dropped.
inline double sign_test_p(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("sign_test_p: length mismatch");
    int wins = 0, n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == b[i]) continue;
        ++n;
        if (a[i] > b[i]) ++wins;
    }
    if (n == 0) return 1.0;
    // P(Bin(n, 1/2) >= wins)
    double p = 0.0;
    for (int k = wins; k <= n; ++k) {
        double logc = 0.0;
        for (int j = 1; j <= k; ++j) logc += std::log((n - k + j) / static_cast<double>(j));
        p += std::exp(logc - n * std::log(2.0));
    }
    return std::min(1.0, p);
}

} // namespace crsim
