#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "crsim/config.hpp"
#include "crsim/harness.hpp"

// File artifacts: per-run CSV logs, aggregated ROC/summary tables and the
// binary range-Doppler dump (float32 magnitudes plus a text header).

namespace crsim {

inline void write_episode_csv(const EpisodeResult& res, std::ostream& os) {
    os << "t,s_hat_bits,s_true_bits,waveform_id,cost,distortion,regret_cum\n";
    char buf[256];
    for (const auto& r : res.rows) {
        std::snprintf(buf, sizeof(buf), "%lld,%s,%s,%d,%.10g,%.10g,%.10g\n",
                      static_cast<long long>(r.t), r.s_hat_bits.c_str(),
                      r.s_true_bits.c_str(), r.waveform_id, r.cost, r.distortion,
                      r.regret_cum);
        os << buf;
    }
}

inline void write_regret_csv(const EpisodeResult& res, std::ostream& os) {
    os << "t,cost,optimal_cost,optimal_constrained_cost,regret_cum,regret_constrained_cum\n";
    char buf[256];
    for (const auto& r : res.rows) {
        std::snprintf(buf, sizeof(buf), "%lld,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                      static_cast<long long>(r.t), r.cost, r.optimal_cost,
                      r.optimal_constrained_cost, r.regret_cum, r.regret_constrained_cum);
        os << buf;
    }
}

inline void write_detections_csv(const EpisodeResult& res, std::ostream& os) {
    os << "cpi,pfa_desired,n_targets,detected,false_alarms,cells,pd,pfa_empirical\n";
    char buf[256];
    for (const auto& d : res.detections) {
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%d,%d,%lld,%lld,%.10g,%.10g\n", d.cpi,
                      d.score.pfa_desired, d.score.n_targets, d.score.detected,
                      static_cast<long long>(d.score.false_alarms),
                      static_cast<long long>(d.score.cells), d.score.pd,
                      d.score.pfa_empirical);
        os << buf;
    }
}

inline std::vector<CpiScore> read_detections_csv(std::istream& is) {
    std::vector<CpiScore> out;
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("detections csv: missing header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        CpiScore d;
        long long fa = 0, cells = 0;
        if (std::sscanf(line.c_str(), "%d,%lg,%d,%d,%lld,%lld,%lg,%lg", &d.cpi,
                        &d.score.pfa_desired, &d.score.n_targets, &d.score.detected, &fa,
                        &cells, &d.score.pd, &d.score.pfa_empirical) != 8)
            throw std::invalid_argument("detections csv: malformed row: " + line);
        d.score.false_alarms = fa;
        d.score.cells = cells;
        out.push_back(d);
    }
    return out;
}

inline void write_roc_csv(const std::vector<RocPoint>& roc, const ExperimentConfig& cfg,
                          std::ostream& os) {
    os << "pfa_desired,pd_mean,pfa_empirical,algo,scenario,constrained\n";
    char buf[256];
    for (const auto& p : roc) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%s,%s,%s\n", p.pfa_desired,
                      p.pd_mean, p.pfa_empirical, to_string(cfg.algorithm).c_str(),
                      to_string(cfg.scenario).c_str(), cfg.constrained ? "true" : "false");
        os << buf;
    }
}

// Mean and standard error of per-run P_d per desired pfa.
inline void write_summary_csv(const std::vector<EpisodeResult>& results,
                              const ExperimentConfig& cfg, std::ostream& os) {
    os << "pfa_desired,pd_mean,pd_stderr,runs,algo,scenario,constrained\n";
    char buf[256];
    for (double pfa : cfg.pfa_sweep) {
        const auto pd = per_run_pd(results, pfa, cfg.burn_in_cpis);
        double mean = 0.0;
        for (double v : pd) mean += v;
        mean /= pd.size();
        double var = 0.0;
        if (pd.size() > 1) {
            for (double v : pd) var += (v - mean) * (v - mean);
            var /= (pd.size() - 1);
        }
        const double se = std::sqrt(var / pd.size());
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%zu,%s,%s,%s\n", pfa, mean, se,
                      pd.size(), to_string(cfg.algorithm).c_str(),
                      to_string(cfg.scenario).c_str(), cfg.constrained ? "true" : "false");
        os << buf;
    }
}

inline void write_regret_mean_csv(const std::vector<EpisodeResult>& results,
                                  std::ostream& os) {
    if (results.empty()) throw std::invalid_argument("write_regret_mean_csv: no runs");
    const std::size_t horizon = results.front().rows.size();
    os << "t,regret_mean,regret_constrained_mean\n";
    char buf[128];
    for (std::size_t i = 0; i < horizon; ++i) {
        double sum = 0.0, sum_con = 0.0;
        for (const auto& r : results) {
            sum += r.rows[i].regret_cum;
            sum_con += r.rows[i].regret_constrained_cum;
        }
        std::snprintf(buf, sizeof(buf), "%lld,%.10g,%.10g\n",
                      static_cast<long long>(i + 1), sum / results.size(),
                      sum_con / results.size());
        os << buf;
    }
}

// Row-major little-endian float32 magnitudes plus a sidecar text header.
inline void dump_range_doppler(const RangeDopplerMap& map, const std::string& scenario_id,
                               const std::string& path_prefix) {
    std::ofstream bin(path_prefix + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("dump_range_doppler: cannot open " + path_prefix + ".bin");
    for (double p : map.power) {
        const float v = static_cast<float>(std::sqrt(p)); // magnitude, not power
        bin.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    std::ofstream hdr(path_prefix + ".hdr");
    hdr << "format = float32_le_row_major_magnitude\n";
    hdr << "doppler_bins = " << map.rows() << "\n";
    hdr << "range_bins = " << map.cols() << "\n";
    hdr << "meters_per_range_bin = " << detail::fmt_double(map.range_bin_m) << "\n";
    hdr << "hz_per_doppler_bin = " << detail::fmt_double(map.doppler_bin_hz) << "\n";
    hdr << "zero_doppler_row = " << map.rows() / 2 << "\n";
    hdr << "scenario = " << scenario_id << "\n";
}

struct RunArtifacts {
    std::string out_dir;
    std::string config_path;
    std::string roc_path;
    std::string summary_path;
    std::string regret_path;
    std::vector<std::string> run_dirs;
};

// Runs the configured ensemble and writes every artifact under cfg.out_dir.
inline RunArtifacts run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    cfg.validate();
    const auto results = run_ensemble(cfg);

    RunArtifacts art;
    art.out_dir = cfg.out_dir;
    fs::create_directories(cfg.out_dir);

    art.config_path = cfg.out_dir + "/config.ini";
    {
        std::ofstream os(art.config_path);
        write_config(cfg, os);
    }
    for (const auto& res : results) {
        const std::string dir = cfg.out_dir + "/run_" + std::to_string(res.run_index);
        fs::create_directories(dir);
        art.run_dirs.push_back(dir);
        {
            std::ofstream os(dir + "/episode.csv");
            write_episode_csv(res, os);
        }
        {
            std::ofstream os(dir + "/regret.csv");
            write_regret_csv(res, os);
        }
        if (cfg.detection) {
            std::ofstream os(dir + "/detections.csv");
            write_detections_csv(res, os);
        }
    }
    if (cfg.detection) {
        const auto roc = roc_curve(collect_scores(results, cfg.burn_in_cpis));
        art.roc_path = cfg.out_dir + "/roc.csv";
        std::ofstream os(art.roc_path);
        write_roc_csv(roc, cfg, os);
        art.summary_path = cfg.out_dir + "/summary.csv";
        std::ofstream sos(art.summary_path);
        write_summary_csv(results, cfg, sos);
    }
    art.regret_path = cfg.out_dir + "/regret_mean.csv";
    {
        std::ofstream os(art.regret_path);
        write_regret_mean_csv(results, os);
    }
    return art;
}

} // namespace crsim
