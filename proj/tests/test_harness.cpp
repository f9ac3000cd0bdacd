#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "levylab/harness.hpp"
#include "levylab/measure.hpp"
#include "levylab/toml.hpp"

using namespace levylab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("levylab-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string demo_measure_json() {
    ModelSpace sp = ModelSpace::sequence(2, 2.0);
    DiscreteMeasure m(sp, {{{0.5, 0.0}, 1.0}, {{0.0, -0.25}, 2.0}});
    return m.to_json();
}

} // namespace

TEST_CASE("toml subset parsing") {
    const std::string text = R"(
# leading comment
experiment = "demo"   # trailing comment
p = 2.5
reps = 120
use_sup = true
note = "has # inside and \"quotes\""
schedule = [0.5, 0.25, 0.125]
dims = [16, 32]

[solver]
tol = 1e-9
step_rule = "coordinate"
)";
    const TomlDoc doc = parse_toml(text);
    CHECK(doc.get_string("", "experiment", "") == "demo");
    CHECK(doc.get_double("", "p", 0.0) == doctest::Approx(2.5));
    CHECK(doc.get_int("", "reps", 0) == 120);
    CHECK(doc.get_bool("", "use_sup", false));
    CHECK(doc.get_string("", "note", "") == "has # inside and \"quotes\"");
    const auto arr = doc.at("", "schedule").as_double_array();
    REQUIRE(arr.size() == 3);
    CHECK(arr[1] == doctest::Approx(0.25));
    CHECK(doc.get_double("solver", "tol", 0.0) == doctest::Approx(1e-9));
    CHECK(doc.get_string("solver", "step_rule", "") == "coordinate");
    CHECK(doc.get_int("", "missing", 7) == 7);
    CHECK_FALSE(doc.has("", "missing"));
}

TEST_CASE("toml parse errors") {
    CHECK_THROWS(parse_toml("key"));
    CHECK_THROWS(parse_toml("= 3"));
    CHECK_THROWS(parse_toml("[unclosed\nkey = 1"));
}

TEST_CASE("canonical form ignores formatting noise") {
    const std::string a = "x = 1\ny = 2.0\n[s]\nz = \"v\"\n";
    const std::string b = "  y   =  2.0   # c\nx = 1\n\n[s]\n  z = \"v\"\n";
    CHECK(parse_toml(a).canonical() == parse_toml(b).canonical());
    const std::string c = "x = 2\ny = 2.0\n[s]\nz = \"v\"\n";
    CHECK(parse_toml(a).canonical() != parse_toml(c).canonical());
}

TEST_CASE("experiment config validation") {
    TempDir tmp;
    spit(tmp.path / "m.json", demo_measure_json());

    // seed is mandatory unless overridden
    spit(tmp.path / "noseed.toml",
         "experiment = \"x\"\nmeasure = \"m.json\"\n");
    CHECK_THROWS((void)ExperimentConfig::load((tmp.path / "noseed.toml").string(),
                                              std::nullopt, ""));
    const ExperimentConfig over = ExperimentConfig::load(
        (tmp.path / "noseed.toml").string(), std::uint64_t{5}, "");
    CHECK(over.seed == 5);

    // schedule must decrease strictly
    spit(tmp.path / "bad.toml",
         "experiment = \"x\"\nseed = 1\nmeasure = \"m.json\"\n"
         "schedule = [0.5, 0.5]\n");
    CHECK_THROWS(
        (void)ExperimentConfig::load((tmp.path / "bad.toml").string(), std::nullopt, ""));

    // p must exceed one
    spit(tmp.path / "badp.toml",
         "experiment = \"x\"\nseed = 1\nmeasure = \"m.json\"\np = 1.0\n");
    CHECK_THROWS((void)ExperimentConfig::load((tmp.path / "badp.toml").string(),
                                              std::nullopt, ""));

    // the measure path resolves relative to the config file
    spit(tmp.path / "ok.toml",
         "experiment = \"x\"\nseed = 9\nmeasure = \"m.json\"\nt = 2.0\n");
    const ExperimentConfig cfg =
        ExperimentConfig::load((tmp.path / "ok.toml").string(), std::nullopt, "");
    CHECK(cfg.seed == 9);
    CHECK(cfg.horizon == doctest::Approx(2.0));
    CHECK(fs::path(cfg.measure_path).is_absolute());
    CHECK(cfg.finite_measure().size() == 2);

    spit(tmp.path / "gone.toml",
         "experiment = \"x\"\nseed = 1\nmeasure = \"absent.json\"\n");
    CHECK_THROWS((void)ExperimentConfig::load((tmp.path / "gone.toml").string(),
                                              std::nullopt, ""));
}

TEST_CASE("config hash tracks semantic content only") {
    TempDir tmp;
    spit(tmp.path / "m.json", demo_measure_json());
    spit(tmp.path / "a.toml",
         "experiment = \"x\"\nseed = 1\nmeasure = \"m.json\"\nreps = 10\n");
    spit(tmp.path / "b.toml",
         "# reordered and commented\nreps = 10   # same\nmeasure = \"m.json\"\n"
         "seed = 1\nexperiment = \"x\"\n");
    spit(tmp.path / "c.toml",
         "experiment = \"x\"\nseed = 1\nmeasure = \"m.json\"\nreps = 20\n");
    const auto ha =
        ExperimentConfig::load((tmp.path / "a.toml").string(), std::nullopt, "").config_hash;
    const auto hb =
        ExperimentConfig::load((tmp.path / "b.toml").string(), std::nullopt, "").config_hash;
    const auto hc =
        ExperimentConfig::load((tmp.path / "c.toml").string(), std::nullopt, "").config_hash;
    CHECK(ha == hb);
    CHECK(ha != hc);
    // a seed override changes the effective hash
    const auto hs = ExperimentConfig::load((tmp.path / "a.toml").string(),
                                           std::uint64_t{2}, "")
                        .config_hash;
    CHECK(hs != ha);
    // the out directory is plumbing, not semantics
    const auto ho = ExperimentConfig::load((tmp.path / "a.toml").string(),
                                           std::nullopt, "/tmp/elsewhere")
                        .config_hash;
    CHECK(ho == ha);
}

TEST_CASE("check command round trip with outputs") {
    TempDir tmp;
    spit(tmp.path / "m.json", demo_measure_json());
    spit(tmp.path / "cfg.toml",
         "experiment = \"demo-check\"\nseed = 3\nmeasure = \"m.json\"\n");
    ExperimentConfig cfg = ExperimentConfig::load((tmp.path / "cfg.toml").string(),
                                                  std::nullopt,
                                                  (tmp.path / "out").string());
    const int code = run_command("check", cfg);
    CHECK(code == 0);
    CHECK(fs::exists(tmp.path / "out" / "demo-check.csv"));
    CHECK(fs::exists(tmp.path / "out" / "demo-check.json"));

    const std::string csv = slurp(tmp.path / "out" / "demo-check.csv");
    CHECK(csv.rfind("experiment,config_hash,metric,level,estimate,stderr\n", 0) == 0);
    CHECK(csv.find("demo-check," + cfg.config_hash) != std::string::npos);

    const auto j = nlohmann::json::parse(slurp(tmp.path / "out" / "demo-check.json"));
    CHECK(j["experiment"] == "demo-check");
    CHECK(j["verdicts"]["overall"] == "Levy");
    CHECK(j["verdicts"]["hilbert"] == "Levy");
    CHECK(j["wall_ms"].get<double>() >= 0.0);
}

TEST_CASE("simulate output is byte identical across reruns of one seed") {
    TempDir tmp;
    spit(tmp.path / "m.json", demo_measure_json());
    spit(tmp.path / "cfg.toml",
         "experiment = \"sim\"\nseed = 11\nmeasure = \"m.json\"\nreps = 50\n");
    for (const char* out : {"o1", "o2"}) {
        ExperimentConfig cfg = ExperimentConfig::load(
            (tmp.path / "cfg.toml").string(), std::nullopt, (tmp.path / out).string());
        CHECK(run_command("simulate", cfg) == 0);
    }
    CHECK(slurp(tmp.path / "o1" / "sim.csv") == slurp(tmp.path / "o2" / "sim.csv"));

    // a different seed must actually change the samples
    ExperimentConfig other = ExperimentConfig::load(
        (tmp.path / "cfg.toml").string(), std::uint64_t{12}, (tmp.path / "o3").string());
    CHECK(run_command("simulate", other) == 0);
    CHECK(slurp(tmp.path / "o1" / "sim.csv") != slurp(tmp.path / "o3" / "sim.csv"));
}

TEST_CASE("converge on the series family with small dimensions") {
    TempDir tmp;
    spit(tmp.path / "cfg.toml",
         "experiment = \"series\"\nseed = 21\nfamily = \"series\"\np = 3.0\n"
         "reps = 400\nseries_dims = [8, 16, 32, 64]\n");
    ExperimentConfig cfg = ExperimentConfig::load(
        (tmp.path / "cfg.toml").string(), std::nullopt, (tmp.path / "out").string());
    const int code = run_command("converge", cfg);
    const auto j = nlohmann::json::parse(slurp(tmp.path / "out" / "series.json"));
    const std::string trend = j["verdicts"]["trend"];
    // the statistic is flat to growing for this family, never converging
    CHECK(trend != "Converging");
    CHECK(trend != "FlatConverged");
    CHECK((code == 0 || code == 2));
    bool has_adjacent = false;
    for (const auto& row : j["metrics"])
        if (row["metric"] == "cauchy.0-1") has_adjacent = true;
    CHECK(has_adjacent);
}

TEST_CASE("converge on a radial family classifies as converging") {
    TempDir tmp;
    RadialFamily fam(ModelSpace::sequence(2, 2.0), 1.0,
                     {{{1.0, 0.0}, 1.0}}, 1.0);
    spit(tmp.path / "fam.json", fam.to_json());
    spit(tmp.path / "cfg.toml",
         "experiment = \"rad\"\nseed = 31\nmeasure = \"fam.json\"\nreps = 600\n"
         "radial_cells = 8\nschedule = [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625]\n");
    ExperimentConfig cfg = ExperimentConfig::load(
        (tmp.path / "cfg.toml").string(), std::nullopt, (tmp.path / "out").string());
    CHECK(run_command("converge", cfg) == 0);
    const auto j = nlohmann::json::parse(slurp(tmp.path / "out" / "rad.json"));
    CHECK(j["verdicts"]["trend"] == "Converging");
}

TEST_CASE("criteria matrix aggregates verdicts") {
    TempDir tmp;
    spit(tmp.path / "m.json", demo_measure_json());
    spit(tmp.path / "cfg.toml",
         "experiment = \"matrix\"\nseed = 41\nmeasure = \"m.json\"\nn_duals = 3\n");
    ExperimentConfig cfg = ExperimentConfig::load(
        (tmp.path / "cfg.toml").string(), std::nullopt, (tmp.path / "out").string());
    CHECK(run_command("criteria-matrix", cfg) == 0);
    const auto j = nlohmann::json::parse(slurp(tmp.path / "out" / "matrix.json"));
    CHECK(j["verdicts"]["overall"] == "Levy");
    CHECK(j["verdicts"]["projections"] == "Levy");
    int projections = 0;
    for (const auto& row : j["metrics"])
        if (row["metric"] == "projection.criterion") ++projections;
    CHECK(projections == 3);
}

TEST_CASE("unknown command raises") {
    ExperimentConfig cfg;
    cfg.experiment = "x";
    CHECK_THROWS((void)run_command("bogus", cfg));
}
