#include "support.hpp"

#include <hierfcst/config.hpp>
#include <hierfcst/error.hpp>
#include <hierfcst/pipeline.hpp>

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace hierfcst;
using config::RunConfig;
namespace fs = std::filesystem;

namespace {

const char* kSpecs = R"([spec.ridge_df]
family = ridge
feeding = df_one_by_one
lambda = 0.5

[spec.arx]
family = arx
order = 1
)";

RunConfig small_run(const fs::path& out) {
    RunConfig cfg;
    std::istringstream in(kSpecs);
    cfg.merge(in);
    cfg.set("run.out", out.string());
    cfg.set("synth.items", "10");
    cfg.set("select.subset", "8");
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream(path) << text;
}

} // namespace

TEST_CASE("config defaults, overrides and unknown keys") {
    RunConfig cfg;
    CHECK(cfg.get_int("backtest.train_periods") == 37);
    CHECK(cfg.get_double("select.overlap") == 0.3);
    CHECK(cfg.get_list("select.features").size() == 7);
    CHECK(cfg.get("run.version") == config::kVersion);

    std::istringstream file("[backtest]\ntest_periods = 5\n[run]\nseed = 9\n");
    cfg.merge(file);
    CHECK(cfg.get_int("backtest.test_periods") == 5);
    cfg.set("run.seed", "4");
    CHECK(cfg.get_int("run.seed") == 4);
    CHECK(cfg.stage_seed("synth") != cfg.stage_seed("train"));

    std::istringstream bad("[backtest]\ntest_period = 5\n");
    CHECK_THROWS_AS(cfg.merge(bad), ConfigError);
    CHECK_THROWS_AS(cfg.set("nope.key", "1"), ConfigError);
    CHECK_THROWS_AS(cfg.get_bool("run.seed"), ConfigError);
    cfg.set("run.jobs", "two");
    CHECK_THROWS_AS(cfg.get_int("run.jobs"), ConfigError);
}

TEST_CASE("spec files") {
    std::istringstream in("[a]\nfamily = ridge\nlambda = 2\n\n[b]\nfamily = adaboost\nfeeding = df_one_by_one\n"
                          "transform = log\nrounds = 7\n");
    const auto specs = config::parse_specs(in);
    REQUIRE(specs.size() == 2);
    CHECK(specs[0].param("lambda") == 2.0);
    CHECK(specs[1].int_param("rounds") == 7);
    CHECK(specs[1].feeding() == models::FeedingMode::df_one_by_one);

    std::ostringstream out;
    config::write_specs(out, specs);
    RunConfig cfg;
    std::istringstream back(out.str());
    cfg.merge(back);
    CHECK(cfg.specs() == specs);

    std::istringstream scope("[x]\nfamily = bsts\n");
    try {
        config::parse_specs(scope);
        FAIL("expected an out-of-scope error");
    } catch (const OutOfScopeError& e) {
        const std::string what = e.what();
        CHECK(what.find("Models") != std::string::npos);
        CHECK(what.find("out of scope") != std::string::npos);
        CHECK(what.find("BSTS") != std::string::npos);
    }
    std::istringstream nofamily("[x]\nlambda = 1\n");
    CHECK_THROWS_AS(config::parse_specs(nofamily), ConfigError);
}

TEST_CASE("inline specs keep their order") {
    RunConfig cfg;
    std::istringstream in("[spec.zeta]\nfamily = arx\n[spec.alpha]\nfamily = ridge\n");
    cfg.merge(in);
    const auto specs = cfg.specs();
    REQUIRE(specs.size() == 2);
    CHECK(specs[0].name() == "zeta");
    CHECK(specs[1].name() == "alpha");
}

TEST_CASE("missing seeds are derived from the run seed") {
    RunConfig a;
    std::istringstream in("[spec.ada]\nfamily = adaboost\n");
    a.merge(in);
    RunConfig b = a;
    b.set("run.seed", "1");
    CHECK(a.specs()[0].param("seed") != b.specs()[0].param("seed"));
    CHECK(a.specs() == a.specs());
}

TEST_CASE("write_artifact marks failures incomplete") {
    const auto dir = testsupport::temp_dir("artifact");
    pipeline::write_artifact(dir / "ok.txt", [](std::ostream& o) { o << "done"; });
    CHECK(testsupport::slurp(dir / "ok.txt") == "done");
    CHECK_FALSE(fs::exists(dir / "ok.txt.incomplete"));
    CHECK_THROWS(pipeline::write_artifact(dir / "bad.txt", [](std::ostream& o) {
        o << "half";
        throw Error("boom");
    }));
    CHECK_FALSE(fs::exists(dir / "bad.txt"));
    CHECK(fs::exists(dir / "bad.txt.incomplete"));
}

TEST_CASE("execute maps failures to stage exit codes") {
    std::ostringstream err;
    CHECK(pipeline::execute(pipeline::Stage::train, [] {}, err) == 0);
    CHECK(pipeline::execute(pipeline::Stage::train, [] { throw DomainError("x"); }, err) == 13);
    CHECK(pipeline::execute(pipeline::Stage::backtest, [] { throw OutOfScopeError("x"); }, err) == 2);
    CHECK(pipeline::execute(pipeline::Stage::config,
                            [] { throw pipeline::StageError(pipeline::Stage::select, "x"); }, err) == 16);
}

TEST_CASE("full pipeline produces every artifact and reproduces bit-exactly") {
    const auto dir = testsupport::temp_dir("pipeline");
    std::ostringstream log;
    const auto first = small_run(dir / "a");
    pipeline::run_all(first, log);
    for (const char* name : {"tensor.bin", "supervised.bin", "models", "leaderboard.csv",
                             "leaderboard_assignments.csv", "leaderboard_forecasts.csv",
                             "selector.bin", "graph.json", "graph.dot", "reports",
                             "resolved_config.ini"}) {
        CHECK_MESSAGE(fs::exists(dir / "a" / name), name);
    }
    const auto board = testsupport::slurp(dir / "a" / "leaderboard.csv");
    std::size_t lines = 0;
    for (char c : board) {
        lines += c == '\n';
    }
    CHECK(lines == 3);

    pipeline::run_all(small_run(dir / "b"), log);
    for (const char* name : {"leaderboard.csv", "leaderboard_forecasts.csv", "graph.json",
                             "selector_clusters.csv", "tensor.bin", "selector.bin"}) {
        CHECK_MESSAGE(testsupport::slurp(dir / "a" / name) == testsupport::slurp(dir / "b" / name),
                      name);
    }

    // Re-running from the recorded config reproduces the outputs.
    RunConfig replay;
    replay.merge_file(dir / "a" / "resolved_config.ini");
    replay.set("run.out", (dir / "c").string());
    pipeline::run_all(replay, log);
    CHECK(testsupport::slurp(dir / "a" / "leaderboard.csv") ==
          testsupport::slurp(dir / "c" / "leaderboard.csv"));
    CHECK(testsupport::slurp(dir / "a" / "graph.json") == testsupport::slurp(dir / "c" / "graph.json"));
}

TEST_CASE("stages chain through their files") {
    const auto dir = testsupport::temp_dir("stages");
    std::ostringstream log;
    RunConfig cfg = small_run(dir);
    cfg.set("data.cache", (dir / "cache.bin").string());
    pipeline::synth(cfg, log);
    CHECK(fs::exists(dir / "cache.bin"));

    pipeline::transform(cfg, log);
    CHECK(fs::exists(dir / "supervised.bin"));

    cfg.set("backtest.out", (dir / "lb.csv").string());
    pipeline::backtest(cfg, log);
    CHECK(fs::exists(dir / "lb_assignments.csv"));

    cfg.set("trmf.rank", "2");
    cfg.set("trmf.sweeps", "20");
    pipeline::trmf(cfg, log);
    CHECK(fs::exists(dir / "trmf" / "forecast.csv"));

    cfg.set("report.forecasts", (dir / "lb_forecasts.csv").string());
    cfg.set("report.item", "no_such_item");
    std::ostringstream report;
    CHECK_THROWS_AS(pipeline::report(cfg, report, log), Error);
    const auto tensor = dataset::load_cache(dir / "cache.bin");
    cfg.set("report.item", tensor.items()[0]);
    pipeline::report(cfg, report, log);
    CHECK(report.str().rfind("period,actual,forecast\n", 0) == 0);
}

TEST_CASE("csv ingestion") {
    const auto dir = testsupport::temp_dir("ingest");
    write_text(dir / "in.csv", "item_id,delivery_period,lead_time,quantity\nA,0,0,1\nA,1,1,2\n");
    RunConfig cfg;
    cfg.set("run.out", dir.string());
    cfg.set("data.input", (dir / "in.csv").string());
    std::ostringstream log;
    pipeline::ingest(cfg, log);
    const auto t = dataset::load_cache(dir / "tensor.bin");
    CHECK(t.value(0, 1, 1) == 2.0);

    write_text(dir / "dup.csv", "item_id,delivery_period,lead_time,quantity\nA,0,0,1\nA,0,0,2\n");
    cfg.set("data.input", (dir / "dup.csv").string());
    cfg.set("data.cache", (dir / "dup.bin").string());
    std::ostringstream err;
    CHECK(pipeline::execute(pipeline::Stage::ingest, [&] { pipeline::ingest(cfg, log); }, err) == 10);
    CHECK_FALSE(fs::exists(dir / "dup.bin"));
}
