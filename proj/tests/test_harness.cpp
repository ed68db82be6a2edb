#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "crsim/harness.hpp"
#include "crsim/io.hpp"

using namespace crsim;

namespace {

// Small, fast episode: bandit loop only.
ExperimentConfig bandit_only_config() {
    ExperimentConfig cfg;
    cfg.runs = 1;
    cfg.cpis = 4;
    cfg.pulses = 50;
    cfg.detection = false;
    cfg.workers = 2;
    return cfg;
}

} // namespace

TEST_CASE("config snapshot round-trips to an identical configuration") {
    SECTION("defaults") {
        ExperimentConfig cfg;
        std::ostringstream os;
        write_config(cfg, os);
        std::istringstream is(os.str());
        const ExperimentConfig back = parse_config(is);
        REQUIRE(back == cfg);
    }
    SECTION("non-default values survive the trip") {
        ExperimentConfig cfg;
        cfg.scenario = Scenario::kJammer;
        cfg.algorithm = Algorithm::kExp3;
        cfg.constrained = false;
        cfg.runs = 7;
        cfg.base_seed = 123456789ULL;
        cfg.pfa_sweep = {3.5e-7, 1e-4};
        cfg.beta1 = 0.5;
        cfg.beta2 = 0.25;
        cfg.beta3 = 0.25;
        cfg.coex.shadow_corr = 0.375;
        cfg.targets = {{1234.5678, -17.25, 9.5}};
        cfg.window_auto = false;
        cfg.window = {10, 390, 800, 1600};
        std::ostringstream os;
        write_config(cfg, os);
        std::istringstream is(os.str());
        REQUIRE(parse_config(is) == cfg);
    }
    SECTION("overrides and bad keys") {
        ExperimentConfig cfg;
        apply_override(cfg, "bandit.exp3_epsilon=0.25");
        CHECK(cfg.exp3_epsilon == 0.25);
        apply_override(cfg, "experiment.scenario=jammer");
        CHECK(cfg.scenario == Scenario::kJammer);
        CHECK_THROWS_AS(apply_override(cfg, "bandit.nope=1"), std::invalid_argument);
        CHECK_THROWS_AS(apply_override(cfg, "no_dot"), std::invalid_argument);
        CHECK_THROWS_AS(apply_override(cfg, "experiment.algorithm=bogus"),
                        std::invalid_argument);
    }
    SECTION("validation rejects broken configs") {
        ExperimentConfig cfg;
        cfg.runs = 0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = ExperimentConfig{};
        cfg.beta1 = 0.9; // betas no longer sum to one
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = ExperimentConfig{};
        cfg.pfa_sweep = {0.5, 1.5};
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
}

TEST_CASE("episodes are reproducible and seed-sensitive") {
    auto cfg = bandit_only_config();
    const auto a = run_episode(cfg, 0);
    const auto b = run_episode(cfg, 0);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        REQUIRE(a.rows[i].waveform_id == b.rows[i].waveform_id);
        REQUIRE(a.rows[i].cost == b.rows[i].cost);
        REQUIRE(a.rows[i].s_hat_bits == b.rows[i].s_hat_bits);
        REQUIRE(a.rows[i].s_true_bits == b.rows[i].s_true_bits);
        REQUIRE(a.rows[i].regret_cum == b.rows[i].regret_cum);
    }
    const auto c = run_episode(cfg, 1);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        if (a.rows[i].waveform_id != c.rows[i].waveform_id) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("episode CSV is byte-identical across invocations") {
    auto cfg = bandit_only_config();
    std::ostringstream s1, s2;
    write_episode_csv(run_episode(cfg, 3), s1);
    write_episode_csv(run_episode(cfg, 3), s2);
    REQUIRE(s1.str() == s2.str());
    REQUIRE(s1.str().rfind("t,s_hat_bits,s_true_bits,waveform_id,cost,distortion,regret_cum",
                           0) == 0);
}

TEST_CASE("per-PRI loop phases run in algorithm order") {
    auto cfg = bandit_only_config();
    cfg.cpis = 1;
    cfg.pulses = 12;
    std::vector<std::string> trace;
    run_episode(cfg, 0, &trace);
    const std::vector<std::string> phases{"sense",   "constrain", "context", "select",
                                          "advance", "cost",      "update",  "regret"};
    REQUIRE(trace.size() == 12 * phases.size());
    for (std::size_t i = 0; i < trace.size(); ++i)
        REQUIRE(trace[i] == phases[i % phases.size()]);
}

TEST_CASE("constrained episodes never exceed the distortion tolerance") {
    auto cfg = bandit_only_config();
    cfg.cpis = 8;
    cfg.constrained = true;
    const auto catalog = cfg.catalog();
    const auto weights = cfg.weights();

    for (auto algo : {Algorithm::kTs, Algorithm::kExp3}) {
        cfg.algorithm = algo;
        const auto res = run_episode(cfg, 5);
        for (std::size_t i = 0; i < res.rows.size(); ++i) {
            if (i == 0) {
                REQUIRE(res.rows[i].distortion == 0.0);
                continue;
            }
            const auto& w = catalog[res.rows[i].waveform_id];
            const auto& prev = catalog[res.rows[i - 1].waveform_id];
            const double d = distortion(w, &prev, weights);
            REQUIRE(res.rows[i].distortion == Catch::Approx(d));
            REQUIRE(d < weights.dhat);
            // the predecessor is a member of the constrained set
            const auto ids = constrain_actions(catalog, &prev, weights);
            REQUIRE(std::find(ids.begin(), ids.end(), prev.id) != ids.end());
        }
    }
}

TEST_CASE("fixed-fullband transmits one waveform forever") {
    auto cfg = bandit_only_config();
    cfg.algorithm = Algorithm::kFixedFullband;
    const auto res = run_episode(cfg, 2);
    const int first = res.rows.front().waveform_id;
    const auto catalog = cfg.catalog();
    CHECK(catalog[first].bw_hz == Catch::Approx(cfg.channel_bw_hz));
    for (const auto& row : res.rows) {
        CHECK(row.waveform_id == first);
        CHECK(row.distortion == 0.0);
    }
}

TEST_CASE("regret ledger matches an independent hindsight scan of the log") {
    auto cfg = bandit_only_config();
    cfg.cpis = 2;
    cfg.scenario = Scenario::kJammer;
    const auto catalog = cfg.catalog();
    const auto weights = cfg.weights();
    const auto grid = cfg.grid();
    const auto res = run_episode(cfg, 9);

    double cum = 0.0;
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        const auto s_true = InterferenceVector::from_string(res.rows[i].s_true_bits);
        const Waveform* prev = i == 0 ? nullptr : &catalog[res.rows[i - 1].waveform_id];
        const double realized = cost(catalog[res.rows[i].waveform_id], s_true, prev,
                                     catalog, grid, weights);
        REQUIRE(realized == Catch::Approx(res.rows[i].cost).margin(1e-12));
        double opt = 1e300;
        for (const auto& w : catalog)
            opt = std::min(opt, cost(w, s_true, prev, catalog, grid, weights));
        REQUIRE(opt == Catch::Approx(res.rows[i].optimal_cost).margin(1e-12));
        cum += realized - opt;
        REQUIRE(cum == Catch::Approx(res.rows[i].regret_cum).margin(1e-9));
    }
    CHECK(cum == Catch::Approx(res.final_regret).margin(1e-9));
}

TEST_CASE("constraining reduces total episode distortion on paired seeds") {
    auto cfg = bandit_only_config();
    cfg.cpis = 6;
    cfg.algorithm = Algorithm::kTs;
    int wins = 0;
    const int pairs = 30;
    for (int seed = 0; seed < pairs; ++seed) {
        cfg.base_seed = 1000 + seed;
        cfg.constrained = true;
        const double con = run_episode(cfg, 0).total_distortion;
        cfg.constrained = false;
        const double uncon = run_episode(cfg, 0).total_distortion;
        if (con <= uncon) ++wins;
    }
    REQUIRE(wins >= static_cast<int>(0.95 * pairs));
}

TEST_CASE("ensemble execution is schedule-independent") {
    auto cfg = bandit_only_config();
    cfg.runs = 4;
    cfg.cpis = 2;
    cfg.workers = 1;
    const auto serial = run_ensemble(cfg);
    cfg.workers = 4;
    const auto parallel = run_ensemble(cfg);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t r = 0; r < serial.size(); ++r) {
        REQUIRE(serial[r].rows.size() == parallel[r].rows.size());
        for (std::size_t i = 0; i < serial[r].rows.size(); ++i) {
            REQUIRE(serial[r].rows[i].waveform_id == parallel[r].rows[i].waveform_id);
            REQUIRE(serial[r].rows[i].cost == parallel[r].rows[i].cost);
        }
    }
}

TEST_CASE("detection scores are deterministic and land in artifacts") {
    namespace fs = std::filesystem;
    ExperimentConfig cfg;
    cfg.runs = 1;
    cfg.cpis = 1;
    cfg.pulses = 64;
    cfg.pri_s = 2.56e-5;
    cfg.pfa_sweep = {1e-4, 1e-2};
    cfg.targets = {{1500.3, -20.0, 15.0}, {1601.1, 12.0, 15.0}};
    cfg.out_dir = (fs::temp_directory_path() / "crsim_harness_test").string();

    const auto r1 = run_episode(cfg, 0);
    const auto r2 = run_episode(cfg, 0);
    REQUIRE(r1.detections.size() == 2);
    for (std::size_t i = 0; i < r1.detections.size(); ++i) {
        REQUIRE(r1.detections[i].score.pd == r2.detections[i].score.pd);
        REQUIRE(r1.detections[i].score.false_alarms == r2.detections[i].score.false_alarms);
    }

    const auto art = run_experiment(cfg);
    CHECK(fs::exists(art.config_path));
    CHECK(fs::exists(art.roc_path));
    CHECK(fs::exists(art.summary_path));
    CHECK(fs::exists(art.regret_path));
    REQUIRE(art.run_dirs.size() == 1);
    CHECK(fs::exists(art.run_dirs[0] + "/episode.csv"));

    // snapshot parses back to the exact configuration that ran
    std::ifstream is(art.config_path);
    REQUIRE(parse_config(is) == cfg);

    // detections round-trip through the CSV
    std::ifstream ds(art.run_dirs[0] + "/detections.csv");
    const auto back = read_detections_csv(ds);
    REQUIRE(back.size() == r1.detections.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].cpi == r1.detections[i].cpi);
        CHECK(back[i].score.pd == Catch::Approx(r1.detections[i].score.pd));
    }
    fs::remove_all(cfg.out_dir);
}

TEST_CASE("sign test behaves at the edges") {
    CHECK(sign_test_p({1, 1, 1}, {0, 0, 0}) == Catch::Approx(0.125));
    CHECK(sign_test_p({1, 1, 1, 1, 1, 1, 1, 1, 1, 1}, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0}) ==
          Catch::Approx(1.0 / 1024.0));
    CHECK(sign_test_p({1, 1}, {1, 1}) == 1.0); // all ties
    CHECK(sign_test_p({0, 0, 0}, {1, 1, 1}) == Catch::Approx(1.0));
}
