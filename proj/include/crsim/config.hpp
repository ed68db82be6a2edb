#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "crsim/cfar.hpp"
#include "crsim/environment.hpp"
#include "crsim/signal.hpp"
#include "crsim/spectrum.hpp"

// Experiment configuration: a flat struct covering every module knob, an
// INI-style reader/writer (sections of key = value pairs) and dotted-path
// overrides for the CLI. write_config followed by parse_config reproduces
// the configuration exactly.

namespace crsim {

enum class Scenario { kCoexistence, kJammer };
enum class Algorithm { kTs, kExp3, kFixedFullband };

inline std::string to_string(Scenario s) {
    return s == Scenario::kCoexistence ? "coexistence" : "jammer";
}
inline std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::kTs: return "ts";
        case Algorithm::kExp3: return "exp3";
        default: return "fixed-fullband";
    }
}
inline Scenario scenario_from_string(const std::string& s) {
    if (s == "coexistence") return Scenario::kCoexistence;
    if (s == "jammer") return Scenario::kJammer;
    throw std::invalid_argument("unknown scenario: " + s);
}
inline Algorithm algorithm_from_string(const std::string& s) {
    if (s == "ts") return Algorithm::kTs;
    if (s == "exp3") return Algorithm::kExp3;
    if (s == "fixed-fullband") return Algorithm::kFixedFullband;
    throw std::invalid_argument("unknown algorithm: " + s);
}

struct ExperimentConfig {
    // [experiment]
    Scenario scenario = Scenario::kCoexistence;
    Algorithm algorithm = Algorithm::kTs;
    bool constrained = true;
    int runs = 30;
    int cpis = 25;
    int pulses = 400;
    std::uint64_t base_seed = 1;
    int burn_in_cpis = 0;
    int workers = 2;
    bool detection = true;
    std::vector<double> pfa_sweep{1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
    std::string out_dir = "out";

    // [channel]
    double channel_bw_hz = 100e6;
    int subchannels = 10;
    double harmful_dbm = -90.0;

    // [catalog]
    double bw_min_hz = 10e6;
    double bw_max_hz = 100e6;
    double bw_step_hz = 10e6;
    double pulse_s = 10.24e-6;
    double amplitude = 1.0;

    // [cost]
    double beta1 = 1.0 / 3.0;
    double beta2 = 1.0 / 3.0;
    double beta3 = 1.0 / 3.0;
    double dhat = 0.2;

    // [bandit]
    double ts_cov_scale = 1.0;
    double exp3_epsilon = 0.1;
    double exp3_gamma = 0.05;
    double exp3_ridge = 1e-6;

    // [coexistence]
    CoexistenceParams coex;

    // [jammer]
    double jammer_jnr_db = 20.0;

    // [cpi]
    double pri_s = 1.024e-4;
    double fs_hz = 100e6;
    double fc_rf_hz = 3e9;
    double noise_dbm = -94.0;

    // [cfar]
    CfarConfig cfar;

    // [detect]
    int tol_range = 1;
    int tol_doppler = 2;
    bool window_auto = true; // auto: scene extent plus the margins below
    int window_range_margin = 32;
    int window_doppler_margin = 40;
    AnalysisWindow window; // used verbatim when window_auto is false

    // [targets]
    std::vector<Target> targets{{1520.4, -28.0, 15.0},
                                {1601.1, -9.5, 15.0},
                                {1688.8, 7.25, 15.0},
                                {1755.2, 24.5, 15.0}};

    ChannelGrid grid() const { return {channel_bw_hz, subchannels, harmful_dbm}; }
    CpiConfig cpi() const { return {pulses, pri_s, fs_hz, fc_rf_hz, noise_dbm}; }
    std::vector<Waveform> catalog() const {
        return build_catalog(grid(), bw_min_hz, bw_max_hz, bw_step_hz, pulse_s, amplitude);
    }
    CostWeights weights() const {
        auto cw = CostWeights::normalized(catalog(), beta1, beta2, beta3, dhat);
        return cw;
    }

    void validate() const {
        if (runs < 1 || cpis < 1 || pulses < 1)
            throw std::invalid_argument("config: runs, cpis and pulses must be positive");
        if (burn_in_cpis < 0 || burn_in_cpis >= cpis)
            throw std::invalid_argument("config: burn_in_cpis must lie in [0, cpis)");
        if (workers < 1) throw std::invalid_argument("config: workers must be positive");
        if (subchannels < 1) throw std::invalid_argument("config: need at least one sub-channel");
        if (pfa_sweep.empty())
            throw std::invalid_argument("config: pfa_sweep must not be empty");
        for (double p : pfa_sweep)
            if (!(p > 0.0 && p < 1.0))
                throw std::invalid_argument("config: pfa values must lie in (0,1)");
        if (fs_hz < bw_max_hz)
            throw std::invalid_argument("config: sample rate must cover the widest waveform");
        if (exp3_epsilon <= 0.0 || exp3_epsilon >= 1.0)
            throw std::invalid_argument("config: exp3 epsilon must lie in (0,1)");
        if (exp3_gamma < 0.0 || exp3_gamma > 1.0)
            throw std::invalid_argument("config: exp3 gamma must lie in [0,1]");
        if (coex.n_bs < 1 || coex.coherence_pri < 1)
            throw std::invalid_argument("config: coexistence parameters out of range");
        weights(); // throws on invalid betas/dhat
        (void)catalog();
    }
};

// --- serialization helpers ----------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: expected a boolean, got '" + v + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

inline std::string fmt_targets(const std::vector<Target>& ts) {
    std::string out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i) out += "; ";
        out += fmt_double(ts[i].range_m) + ":" + fmt_double(ts[i].velocity_ms) + ":" +
               fmt_double(ts[i].snr_db);
    }
    return out;
}

inline std::vector<Target> parse_targets(const std::string& v) {
    std::vector<Target> out;
    for (const auto& item : split(v, ';')) {
        const auto parts = split(item, ':');
        if (parts.size() != 3)
            throw std::invalid_argument("config: target entries are range:velocity:snr");
        out.push_back({std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])});
    }
    return out;
}

inline std::string fmt_pfas(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt_double(v[i]);
    }
    return out;
}

} // namespace detail

// Applies one "section.key" assignment.
inline void set_config_value(ExperimentConfig& cfg, const std::string& section,
                             const std::string& key, const std::string& value) {
    using detail::parse_bool;
    const std::string where = section + "." + key;
    auto d = [&] { return std::stod(value); };
    auto i = [&] { return std::stoi(value); };

    if (section == "experiment") {
        if (key == "scenario") cfg.scenario = scenario_from_string(value);
        else if (key == "algorithm") cfg.algorithm = algorithm_from_string(value);
        else if (key == "constrained") cfg.constrained = parse_bool(value);
        else if (key == "runs") cfg.runs = i();
        else if (key == "cpis") cfg.cpis = i();
        else if (key == "pulses") cfg.pulses = i();
        else if (key == "base_seed") cfg.base_seed = std::stoull(value);
        else if (key == "burn_in_cpis") cfg.burn_in_cpis = i();
        else if (key == "workers") cfg.workers = i();
        else if (key == "detection") cfg.detection = parse_bool(value);
        else if (key == "pfa_sweep") {
            cfg.pfa_sweep.clear();
            for (const auto& p : detail::split(value, ',')) cfg.pfa_sweep.push_back(std::stod(p));
        } else if (key == "out_dir") cfg.out_dir = value;
        else throw std::invalid_argument("config: unknown key " + where);
    } else if (section == "channel") {
        if (key == "bandwidth_hz") cfg.channel_bw_hz = d();
        else if (key == "subchannels") cfg.subchannels = i();
        else if (key == "harmful_dbm") cfg.harmful_dbm = d();
        else throw std::invalid_argument("config: unknown key " + where);
    } else if (section == "catalog") {
        if (key == "bw_min_hz") cfg.bw_min_hz = d();
        else if (key == "bw_max_hz") cfg.bw_max_hz = d();
        else if (key == "bw_step_hz") cfg.bw_step_hz = d();
        else if (key == "pulse_s") cfg.pulse_s = d();
        else if (key == "amplitude") cfg.amplitude = d();
        else throw std::invalid_argument("config: unknown key " + where);
    } else if (section == "cost") {
        if (key == "beta1") cfg.beta1 = d();
        else if (key == "beta2") cfg.beta2 = d();
        else if (key == "beta3") cfg.beta3 = d();
        else if (key == "dhat") cfg.dhat = d();
        else throw std::invalid_argument("config: unknown key " + where);
    } else if (section == "bandit") {
        if (key == "ts_cov_scale") cfg.ts_cov_scale = d();
        else if (key == "exp3_epsilon") cfg.exp3_epsilon = d();
        else if (key == "exp3_gamma") cfg.exp3_gamma = d();
        else if (key == "exp3_ridge") cfg.exp3_ridge = d();
        else throw std::invalid_argument("config: unknown key " + where);
    } else if (section == "coexistence") {
        if (key == "n_bs") cfg.coex.n_bs = i();
        else if (key == "coherence_pri") cfg.coex.coherence_pri = i();
        else if (key == "pathloss_exp") cfg.coex.pathloss_exp = d();
        else if (key == "rx_gain_db") cfg.coex.rx_gain_db = d();
        else if (key == "power_min_dbm") cfg.coex.power_min_dbm = d();
        else if (key == "power_max_dbm") cfg.coex.power_max_dbm = d();
        else if (key == "dist_min_m") cfg.coex.dist_min_m = d();
        else if (key == "dist_max_m") cfg.coex.dist_max_m = d();
        else if (key == "shadow_mu") cfg.coex.shadow_mu = d();
        else if (key == "shadow_sigma") cfg.coex.shadow_sigma = d();
        else if (key == "shadow_corr") cfg.coex.shadow_corr = d();
        else if (key == "cell_bw_hz") cfg.coex.cell_bw_hz = d();
        else throw std::invalid_argument("config: unknown key " + where);
    } else if (section == "jammer") {
        if (key == "jnr_db") cfg.jammer_jnr_db = d();
        else throw std::invalid_argument("config: unknown key " + where);
    } else if (section == "cpi") {
        if (key == "pri_s") cfg.pri_s = d();
        else if (key == "fs_hz") cfg.fs_hz = d();
        else if (key == "fc_rf_hz") cfg.fc_rf_hz = d();
        else if (key == "noise_dbm") cfg.noise_dbm = d();
        else throw std::invalid_argument("config: unknown key " + where);
    } else if (section == "cfar") {
        if (key == "guard_range") cfg.cfar.guard_range = i();
        else if (key == "guard_doppler") cfg.cfar.guard_doppler = i();
        else if (key == "train_range") cfg.cfar.train_range = i();
        else if (key == "train_doppler") cfg.cfar.train_doppler = i();
        else throw std::invalid_argument("config: unknown key " + where);
    } else if (section == "detect") {
        if (key == "tol_range") cfg.tol_range = i();
        else if (key == "tol_doppler") cfg.tol_doppler = i();
        else if (key == "window_auto") cfg.window_auto = parse_bool(value);
        else if (key == "window_range_margin") cfg.window_range_margin = i();
        else if (key == "window_doppler_margin") cfg.window_doppler_margin = i();
        else if (key == "window_row_lo") cfg.window.row_lo = i();
        else if (key == "window_row_hi") cfg.window.row_hi = i();
        else if (key == "window_col_lo") cfg.window.col_lo = i();
        else if (key == "window_col_hi") cfg.window.col_hi = i();
        else throw std::invalid_argument("config: unknown key " + where);
    } else if (section == "targets") {
        if (key == "list") cfg.targets = detail::parse_targets(value);
        else throw std::invalid_argument("config: unknown key " + where);
    } else {
        throw std::invalid_argument("config: unknown section [" + section + "]");
    }
}

// Accepts "section.key=value" (CLI override form).
inline void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must look like section.key=value");
    const std::string path = detail::trim(assignment.substr(0, eq));
    const std::string value = detail::trim(assignment.substr(eq + 1));
    const auto dot = path.find('.');
    if (dot == std::string::npos)
        throw std::invalid_argument("override key must be section.key");
    set_config_value(cfg, path.substr(0, dot), path.substr(dot + 1), value);
}

inline ExperimentConfig parse_config(std::istream& is) {
    ExperimentConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: bad section header at line " +
                                            std::to_string(lineno));
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " +
                                        std::to_string(lineno));
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (section.empty())
            throw std::invalid_argument("config: key outside any section at line " +
                                        std::to_string(lineno));
        set_config_value(cfg, section, key, value);
    }
    return cfg;
}

inline void write_config(const ExperimentConfig& c, std::ostream& os) {
    using detail::fmt_double;
    os << "[experiment]\n";
    os << "scenario = " << to_string(c.scenario) << "\n";
    os << "algorithm = " << to_string(c.algorithm) << "\n";
    os << "constrained = " << (c.constrained ? "true" : "false") << "\n";
    os << "runs = " << c.runs << "\n";
    os << "cpis = " << c.cpis << "\n";
    os << "pulses = " << c.pulses << "\n";
    os << "base_seed = " << c.base_seed << "\n";
    os << "burn_in_cpis = " << c.burn_in_cpis << "\n";
    os << "workers = " << c.workers << "\n";
    os << "detection = " << (c.detection ? "true" : "false") << "\n";
    os << "pfa_sweep = " << detail::fmt_pfas(c.pfa_sweep) << "\n";
    os << "out_dir = " << c.out_dir << "\n\n";

    os << "[channel]\n";
    os << "bandwidth_hz = " << fmt_double(c.channel_bw_hz) << "\n";
    os << "subchannels = " << c.subchannels << "\n";
    os << "harmful_dbm = " << fmt_double(c.harmful_dbm) << "\n\n";

    os << "[catalog]\n";
    os << "bw_min_hz = " << fmt_double(c.bw_min_hz) << "\n";
    os << "bw_max_hz = " << fmt_double(c.bw_max_hz) << "\n";
    os << "bw_step_hz = " << fmt_double(c.bw_step_hz) << "\n";
    os << "pulse_s = " << fmt_double(c.pulse_s) << "\n";
    os << "amplitude = " << fmt_double(c.amplitude) << "\n\n";

    os << "[cost]\n";
    os << "beta1 = " << fmt_double(c.beta1) << "\n";
    os << "beta2 = " << fmt_double(c.beta2) << "\n";
    os << "beta3 = " << fmt_double(c.beta3) << "\n";
    os << "dhat = " << fmt_double(c.dhat) << "\n\n";

    os << "[bandit]\n";
    os << "ts_cov_scale = " << fmt_double(c.ts_cov_scale) << "\n";
    os << "exp3_epsilon = " << fmt_double(c.exp3_epsilon) << "\n";
    os << "exp3_gamma = " << fmt_double(c.exp3_gamma) << "\n";
    os << "exp3_ridge = " << fmt_double(c.exp3_ridge) << "\n\n";

    os << "[coexistence]\n";
    os << "n_bs = " << c.coex.n_bs << "\n";
    os << "coherence_pri = " << c.coex.coherence_pri << "\n";
    os << "pathloss_exp = " << fmt_double(c.coex.pathloss_exp) << "\n";
    os << "rx_gain_db = " << fmt_double(c.coex.rx_gain_db) << "\n";
    os << "power_min_dbm = " << fmt_double(c.coex.power_min_dbm) << "\n";
    os << "power_max_dbm = " << fmt_double(c.coex.power_max_dbm) << "\n";
    os << "dist_min_m = " << fmt_double(c.coex.dist_min_m) << "\n";
    os << "dist_max_m = " << fmt_double(c.coex.dist_max_m) << "\n";
    os << "shadow_mu = " << fmt_double(c.coex.shadow_mu) << "\n";
    os << "shadow_sigma = " << fmt_double(c.coex.shadow_sigma) << "\n";
    os << "shadow_corr = " << fmt_double(c.coex.shadow_corr) << "\n";
    os << "cell_bw_hz = " << fmt_double(c.coex.cell_bw_hz) << "\n\n";

    os << "[jammer]\n";
    os << "jnr_db = " << fmt_double(c.jammer_jnr_db) << "\n\n";

    os << "[cpi]\n";
    os << "pri_s = " << fmt_double(c.pri_s) << "\n";
    os << "fs_hz = " << fmt_double(c.fs_hz) << "\n";
    os << "fc_rf_hz = " << fmt_double(c.fc_rf_hz) << "\n";
    os << "noise_dbm = " << fmt_double(c.noise_dbm) << "\n\n";

    os << "[cfar]\n";
    os << "guard_range = " << c.cfar.guard_range << "\n";
    os << "guard_doppler = " << c.cfar.guard_doppler << "\n";
    os << "train_range = " << c.cfar.train_range << "\n";
    os << "train_doppler = " << c.cfar.train_doppler << "\n\n";

    os << "[detect]\n";
    os << "tol_range = " << c.tol_range << "\n";
    os << "tol_doppler = " << c.tol_doppler << "\n";
    os << "window_auto = " << (c.window_auto ? "true" : "false") << "\n";
    os << "window_range_margin = " << c.window_range_margin << "\n";
    os << "window_doppler_margin = " << c.window_doppler_margin << "\n";
    os << "window_row_lo = " << c.window.row_lo << "\n";
    os << "window_row_hi = " << c.window.row_hi << "\n";
    os << "window_col_lo = " << c.window.col_lo << "\n";
    os << "window_col_hi = " << c.window.col_hi << "\n\n";

    os << "[targets]\n";
    os << "list = " << detail::fmt_targets(c.targets) << "\n";
}

inline bool operator==(const Target& a, const Target& b) {
    return a.range_m == b.range_m && a.velocity_ms == b.velocity_ms && a.snr_db == b.snr_db;
}

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.scenario == b.scenario && a.algorithm == b.algorithm &&
           a.constrained == b.constrained && a.runs == b.runs && a.cpis == b.cpis &&
           a.pulses == b.pulses && a.base_seed == b.base_seed &&
           a.burn_in_cpis == b.burn_in_cpis && a.workers == b.workers &&
           a.detection == b.detection && a.pfa_sweep == b.pfa_sweep &&
           a.out_dir == b.out_dir && a.channel_bw_hz == b.channel_bw_hz &&
           a.subchannels == b.subchannels && a.harmful_dbm == b.harmful_dbm &&
           a.bw_min_hz == b.bw_min_hz && a.bw_max_hz == b.bw_max_hz &&
           a.bw_step_hz == b.bw_step_hz && a.pulse_s == b.pulse_s &&
           a.amplitude == b.amplitude && a.beta1 == b.beta1 && a.beta2 == b.beta2 &&
           a.beta3 == b.beta3 && a.dhat == b.dhat && a.ts_cov_scale == b.ts_cov_scale &&
           a.exp3_epsilon == b.exp3_epsilon && a.exp3_gamma == b.exp3_gamma &&
           a.exp3_ridge == b.exp3_ridge && a.coex.n_bs == b.coex.n_bs &&
           a.coex.coherence_pri == b.coex.coherence_pri &&
           a.coex.pathloss_exp == b.coex.pathloss_exp &&
           a.coex.rx_gain_db == b.coex.rx_gain_db &&
           a.coex.power_min_dbm == b.coex.power_min_dbm &&
           a.coex.power_max_dbm == b.coex.power_max_dbm &&
           a.coex.dist_min_m == b.coex.dist_min_m && a.coex.dist_max_m == b.coex.dist_max_m &&
           a.coex.shadow_mu == b.coex.shadow_mu && a.coex.shadow_sigma == b.coex.shadow_sigma &&
           a.coex.shadow_corr == b.coex.shadow_corr && a.coex.cell_bw_hz == b.coex.cell_bw_hz &&
           a.jammer_jnr_db == b.jammer_jnr_db && a.pri_s == b.pri_s && a.fs_hz == b.fs_hz &&
           a.fc_rf_hz == b.fc_rf_hz && a.noise_dbm == b.noise_dbm &&
           a.cfar.guard_range == b.cfar.guard_range &&
           a.cfar.guard_doppler == b.cfar.guard_doppler &&
           a.cfar.train_range == b.cfar.train_range &&
           a.cfar.train_doppler == b.cfar.train_doppler && a.tol_range == b.tol_range &&
           a.tol_doppler == b.tol_doppler && a.window_auto == b.window_auto &&
           a.window_range_margin == b.window_range_margin &&
           a.window_doppler_margin == b.window_doppler_margin &&
           a.window.row_lo == b.window.row_lo && a.window.row_hi == b.window.row_hi &&
           a.window.col_lo == b.window.col_lo && a.window.col_hi == b.window.col_hi &&
           a.targets == b.targets;
}

} // namespace crsim
