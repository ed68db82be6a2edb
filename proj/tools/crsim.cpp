// Command-line front end: run seeded experiments, aggregate ROC tables,
// export the waveform catalog and dump range-Doppler maps.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crsim/config.hpp"
#include "crsim/harness.hpp"
#include "crsim/io.hpp"

namespace {

crsim::ExperimentConfig load_config(const std::string& path,
                                    const std::vector<std::string>& overrides) {
    crsim::ExperimentConfig cfg;
    if (!path.empty()) {
        std::ifstream is(path);
        if (!is) throw std::runtime_error("cannot open config file: " + path);
        cfg = crsim::parse_config(is);
    }
    for (const auto& o : overrides) crsim::apply_override(cfg, o);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pulse-agile cognitive radar simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string scenario, algo, out_dir;
    bool constrained = false, unconstrained = false;
    int runs = -1, cpis = -1;
    long long seed = -1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "configuration file (INI)");
        cmd->add_option("--set", overrides, "override: section.key=value")->allow_extra_args(false);
        cmd->add_option("--scenario", scenario, "coexistence or jammer");
        cmd->add_option("--algo", algo, "ts, exp3 or fixed-fullband");
        cmd->add_flag("--constrained", constrained, "enable the distortion constraint");
        cmd->add_flag("--unconstrained", unconstrained, "disable the distortion constraint");
        cmd->add_option("--runs", runs, "number of seeded runs");
        cmd->add_option("--cpis", cpis, "CPIs per run");
        cmd->add_option("--seed", seed, "base seed");
        cmd->add_option("--out", out_dir, "output directory");
    };

    auto* cmd_run = app.add_subcommand("run", "run one experiment and write artifacts");
    add_common(cmd_run);

    auto* cmd_roc = app.add_subcommand("roc", "aggregate detections.csv files into a ROC table");
    std::vector<std::string> roc_inputs;
    std::string roc_out = "roc.csv";
    cmd_roc->add_option("--in", roc_inputs, "run directories or detections.csv files")
        ->required();
    cmd_roc->add_option("-o,--output", roc_out, "output CSV path");
    add_common(cmd_roc);

    auto* cmd_catalog = app.add_subcommand("catalog", "export the waveform catalog as CSV");
    std::string catalog_out;
    cmd_catalog->add_option("-o,--output", catalog_out, "output path (default stdout)");
    add_common(cmd_catalog);

    auto* cmd_dump = app.add_subcommand("dump-map", "emit one CPI's range-Doppler map");
    int dump_run = 0, dump_cpi = 0;
    std::string dump_prefix = "map";
    cmd_dump->add_option("--run", dump_run, "run index");
    cmd_dump->add_option("--cpi", dump_cpi, "CPI index within the run");
    cmd_dump->add_option("-o,--output", dump_prefix, "output path prefix (.bin/.hdr)");
    add_common(cmd_dump);

    CLI11_PARSE(app, argc, argv);

    try {
        crsim::ExperimentConfig cfg = load_config(config_path, overrides);
        if (!scenario.empty()) cfg.scenario = crsim::scenario_from_string(scenario);
        if (!algo.empty()) cfg.algorithm = crsim::algorithm_from_string(algo);
        if (constrained && unconstrained)
            throw std::runtime_error("--constrained and --unconstrained are exclusive");
        if (constrained) cfg.constrained = true;
        if (unconstrained) cfg.constrained = false;
        if (runs > 0) cfg.runs = runs;
        if (cpis > 0) cfg.cpis = cpis;
        if (seed >= 0) cfg.base_seed = static_cast<std::uint64_t>(seed);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (const char* env_out = std::getenv("CRSIM_OUT_DIR"); env_out && out_dir.empty())
            cfg.out_dir = env_out;

        if (cmd_run->parsed()) {
            cfg.validate();
            const auto art = crsim::run_experiment(cfg);
            std::cout << "wrote " << art.run_dirs.size() << " runs under " << art.out_dir
                      << "\n";
            if (!art.roc_path.empty()) std::cout << "roc: " << art.roc_path << "\n";
            return 0;
        }
        if (cmd_catalog->parsed()) {
            const auto catalog = cfg.catalog();
            if (catalog_out.empty()) {
                crsim::write_catalog_csv(catalog, std::cout);
            } else {
                std::ofstream os(catalog_out);
                if (!os) throw std::runtime_error("cannot open " + catalog_out);
                crsim::write_catalog_csv(catalog, os);
            }
            return 0;
        }
        if (cmd_roc->parsed()) {
            std::vector<crsim::ScoreResult> scored;
            for (const auto& in : roc_inputs) {
                namespace fs = std::filesystem;
                std::vector<std::string> files;
                if (fs::is_directory(in)) {
                    for (const auto& e : fs::recursive_directory_iterator(in))
                        if (e.path().filename() == "detections.csv")
                            files.push_back(e.path().string());
                } else {
                    files.push_back(in);
                }
                if (files.empty())
                    throw std::runtime_error("no detections.csv under " + in);
                for (const auto& f : files) {
                    std::ifstream is(f);
                    if (!is) throw std::runtime_error("cannot open " + f);
                    for (const auto& d : crsim::read_detections_csv(is))
                        if (d.cpi >= cfg.burn_in_cpis) scored.push_back(d.score);
                }
            }
            const auto roc = crsim::roc_curve(scored);
            std::ofstream os(roc_out);
            if (!os) throw std::runtime_error("cannot open " + roc_out);
            crsim::write_roc_csv(roc, cfg, os);
            std::cout << "wrote " << roc_out << " (" << roc.size() << " points)\n";
            return 0;
        }
        if (cmd_dump->parsed()) {
            cfg.validate();
            if (dump_cpi < 0 || dump_cpi >= cfg.cpis)
                throw std::runtime_error("dump-map: cpi index out of range");
            crsim::RangeDopplerMap map;
            crsim::run_episode(cfg, dump_run, nullptr, &map, dump_cpi);
            if (map.power.empty())
                throw std::runtime_error("dump-map: no map captured (detection disabled?)");
            const std::string scenario_id = crsim::to_string(cfg.scenario) + "/" +
                                            crsim::to_string(cfg.algorithm) +
                                            (cfg.constrained ? "/constrained" : "/unconstrained");
            crsim::dump_range_doppler(map, scenario_id, dump_prefix);
            std::cout << "wrote " << dump_prefix << ".bin and " << dump_prefix << ".hdr\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
