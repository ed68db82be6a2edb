#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "crsim/signal.hpp"

// Two-dimensional cell-averaging CFAR and detection scoring against ground
// truth. The threshold factor tau = N*(Pfa^(-1/N) - 1) makes the false-alarm
// rate exact for exponentially distributed cells, for any training count N,
// so clipped edge windows stay calibrated.

namespace crsim {

struct CfarConfig {
    int guard_range = 2;
    int guard_doppler = 2;
    int train_range = 8;
    int train_doppler = 8;
};

struct DetectionReport {
    double pfa_desired = 0.0;
    int rows = 0, cols = 0;
    std::vector<std::uint8_t> mask; // 1 where the cell exceeded its threshold
    std::vector<std::pair<int, int>> detections; // (row, col) of flagged cells

    bool flagged(int r, int c) const {
        return mask[static_cast<std::size_t>(r) * cols + c] != 0;
    }
};

inline DetectionReport cfar_2d(const std::vector<double>& power, int rows, int cols,
                               double pfa, const CfarConfig& cfg) {
    if (!(pfa > 0.0 && pfa < 1.0))
        throw std::invalid_argument("cfar_2d: Pfa must lie in (0,1)");
    if (cfg.train_range < 1 || cfg.train_doppler < 1)
        throw std::invalid_argument("cfar_2d: training window must extend past the guard");
    if (cfg.guard_range < 0 || cfg.guard_doppler < 0)
        throw std::invalid_argument("cfar_2d: guard cells must be nonnegative");
    if (static_cast<std::size_t>(rows) * cols != power.size())
        throw std::invalid_argument("cfar_2d: power size mismatch");

    // Inclusive prefix sums, one pad row/column.
    std::vector<double> integral(static_cast<std::size_t>(rows + 1) * (cols + 1), 0.0);
    for (int r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (int c = 0; c < cols; ++c) {
            acc += power[static_cast<std::size_t>(r) * cols + c];
            integral[static_cast<std::size_t>(r + 1) * (cols + 1) + (c + 1)] =
                integral[static_cast<std::size_t>(r) * (cols + 1) + (c + 1)] + acc;
        }
    }
    auto box = [&](int r0, int r1, int c0, int c1) -> double { // inclusive, clipped
        r0 = std::max(r0, 0);
        c0 = std::max(c0, 0);
        r1 = std::min(r1, rows - 1);
        c1 = std::min(c1, cols - 1);
        if (r0 > r1 || c0 > c1) return 0.0;
        const std::size_t w = cols + 1;
        return integral[(r1 + 1) * w + (c1 + 1)] - integral[r0 * w + (c1 + 1)] -
               integral[(r1 + 1) * w + c0] + integral[r0 * w + c0];
    };
    auto count = [&](int r0, int r1, int c0, int c1) -> long long {
        r0 = std::max(r0, 0);
        c0 = std::max(c0, 0);
        r1 = std::min(r1, rows - 1);
        c1 = std::min(c1, cols - 1);
        if (r0 > r1 || c0 > c1) return 0;
        return static_cast<long long>(r1 - r0 + 1) * (c1 - c0 + 1);
    };

    const int er = cfg.guard_doppler + cfg.train_doppler; // row extent
    const int ec = cfg.guard_range + cfg.train_range;     // column extent
    std::unordered_map<long long, double> tau_cache;
    auto tau_for = [&](long long n_train) {
        auto it = tau_cache.find(n_train);
        if (it != tau_cache.end()) return it->second;
        const double nd = static_cast<double>(n_train);
        const double tau = nd * (std::pow(pfa, -1.0 / nd) - 1.0);
        tau_cache.emplace(n_train, tau);
        return tau;
    };

    DetectionReport rep;
    rep.pfa_desired = pfa;
    rep.rows = rows;
    rep.cols = cols;
    rep.mask.assign(static_cast<std::size_t>(rows) * cols, 0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double ring = box(r - er, r + er, c - ec, c + ec) -
                                box(r - cfg.guard_doppler, r + cfg.guard_doppler,
                                    c - cfg.guard_range, c + cfg.guard_range);
            const long long n_train =
                count(r - er, r + er, c - ec, c + ec) -
                count(r - cfg.guard_doppler, r + cfg.guard_doppler, c - cfg.guard_range,
                      c + cfg.guard_range);
            if (n_train <= 0) continue;
            const double threshold = tau_for(n_train) * (ring / n_train);
            if (power[static_cast<std::size_t>(r) * cols + c] > threshold) {
                rep.mask[static_cast<std::size_t>(r) * cols + c] = 1;
                rep.detections.emplace_back(r, c);
            }
        }
    }
    return rep;
}

inline DetectionReport cfar_2d(const RangeDopplerMap& map, double pfa, const CfarConfig& cfg) {
    return cfar_2d(map.power, map.rows(), map.cols(), pfa, cfg);
}

// --- scoring -----------------------------------------------------------------

// Cells examined for detections/false alarms; -1 bounds mean the full map.
struct AnalysisWindow {
    int row_lo = 0, row_hi = -1;
    int col_lo = 0, col_hi = -1;
};

struct ScoreConfig {
    int tol_range = 1;   // range-bin tolerance around each target
    int tol_doppler = 2; // Doppler-bin tolerance
    AnalysisWindow window;
};

struct ScoreResult {
    double pfa_desired = 0.0;
    int n_targets = 0;
    int detected = 0;
    long long false_alarms = 0;
    long long cells = 0;
    double pd = 0.0;
    double pfa_empirical = 0.0;
};

// A flagged cell within the tolerance box of a target detects it (once);
// every other flagged cell inside the window is a false alarm.
inline ScoreResult score_detections(const DetectionReport& rep,
                                    const std::vector<Target>& targets,
                                    const CpiConfig& cfg, const ScoreConfig& sc) {
    const int row_lo = sc.window.row_lo;
    const int row_hi = sc.window.row_hi < 0 ? rep.rows - 1 : sc.window.row_hi;
    const int col_lo = sc.window.col_lo;
    const int col_hi = sc.window.col_hi < 0 ? rep.cols - 1 : sc.window.col_hi;
    if (row_lo < 0 || col_lo < 0 || row_hi >= rep.rows || col_hi >= rep.cols ||
        row_lo > row_hi || col_lo > col_hi)
        throw std::invalid_argument("score_detections: analysis window out of range");

    std::vector<std::pair<int, int>> cells;
    cells.reserve(targets.size());
    for (const auto& t : targets) cells.push_back(target_cell(t, cfg));

    ScoreResult res;
    res.pfa_desired = rep.pfa_desired;
    res.n_targets = static_cast<int>(targets.size());
    res.cells = static_cast<long long>(row_hi - row_lo + 1) * (col_hi - col_lo + 1);

    std::vector<bool> hit(targets.size(), false);
    for (const auto& [r, c] : rep.detections) {
        if (r < row_lo || r > row_hi || c < col_lo || c > col_hi) continue;
        bool matched = false;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (std::abs(r - cells[k].first) <= sc.tol_doppler &&
                std::abs(c - cells[k].second) <= sc.tol_range) {
                hit[k] = true;
                matched = true;
            }
        }
        if (!matched) ++res.false_alarms;
    }
    for (bool h : hit) res.detected += h ? 1 : 0;
    res.pd = targets.empty() ? 0.0 : static_cast<double>(res.detected) / targets.size();
    res.pfa_empirical = static_cast<double>(res.false_alarms) / res.cells;
    return res;
}

// --- ROC ----------------------------------------------------------------------

struct RocPoint {
    double pfa_desired = 0.0;
    double pd_mean = 0.0;
    double pfa_empirical = 0.0;
    long long samples = 0;
};

// Averages scored CPIs per desired Pfa; points come out in ascending Pfa.
inline std::vector<RocPoint> roc_curve(const std::vector<ScoreResult>& scored) {
    if (scored.empty()) throw std::invalid_argument("roc_curve: no scored CPIs");
    std::map<double, RocPoint> acc;
    for (const auto& s : scored) {
        RocPoint& p = acc[s.pfa_desired];
        p.pfa_desired = s.pfa_desired;
        p.pd_mean += s.pd;
        p.pfa_empirical += s.pfa_empirical;
        p.samples += 1;
    }
    std::vector<RocPoint> out;
    out.reserve(acc.size());
    for (auto& [pfa, p] : acc) {
        p.pd_mean /= p.samples;
        p.pfa_empirical /= p.samples;
        out.push_back(p);
    }
    return out;
}

} // namespace crsim
