#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "levyhom/config.hpp"
#include "levyhom/io.hpp"
#include "levyhom/pipeline.hpp"

using namespace levyhom;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
}

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("levyhom_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("config parsing, hashing and validation") {
    ExperimentConfig ref = ExperimentConfig::reference();
    const std::string text = ref.canonical_json();
    ExperimentConfig back = ExperimentConfig::from_json_text(text);
    CHECK(back.hash() == ref.hash());

    ExperimentConfig tweaked = ref;
    tweaked.seed += 1;
    CHECK(tweaked.hash() != ref.hash());

    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{ not json"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                        R"({"kernel": {"alpha": 2.5}})"),
                    ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                        R"({"stages": ["nonsense"]})"),
                    ConfigError);
}

TEST_CASE("field binary snapshots round trip bit for bit") {
    GridPtr grid = TorusGrid::make(2, 8, 2.0);
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.25 * i - 3.0;
    fs::path dir = temp_dir("fld");
    const std::string path = (dir / "f.fld").string();
    write_field_binary(path, f);
    Field g = read_field_binary(path);
    CHECK(g.grid()->n() == 8);
    CHECK(g.grid()->period() == 2.0);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == g[i]);
    fs::remove_all(dir);
}

TEST_CASE("stream and effective-matrix CSV round trips") {
    fs::path dir = temp_dir("csv");
    StreamSpec spec;
    spec.dim = 2;
    spec.mode_count = 9;
    StreamField s = synthesize(spec, 77);
    const std::string spath = (dir / "env.csv").string();
    write_stream_csv(spath, s, "deadbeef");
    StreamField back = read_stream_csv(spath, 2, s.period());
    REQUIRE(back.modes().size() == s.modes().size());
    for (std::size_t i = 0; i < s.modes().size(); ++i) {
        CHECK(back.modes()[i].m == s.modes()[i].m);
        CHECK(back.modes()[i].amp[0] == s.modes()[i].amp[0]);
        CHECK(back.modes()[i].phase == s.modes()[i].phase);
    }

    EffectiveMatrix a;
    a.d = 2;
    a.a = {5.0, 0.125, 0.125, 4.0};
    a.m2_part = {5.0, 0.0, 0.0, 4.0};
    a.cross_part = {0.0, 0.0, 0.0, 0.0};
    a.dirichlet_part = {0.0, 0.125, 0.125, 0.0};
    a.eigenvalues = symmetric_eigenvalues(a.a, 2);
    const std::string apath = (dir / "abar.csv").string();
    write_effective_csv(apath, a, "deadbeef");
    EffectiveMatrix b = read_effective_csv(apath);
    CHECK(b.d == 2);
    for (int i = 0; i < 4; ++i) CHECK(b.a[i] == a.a[i]);
    CHECK(b.positive_ok);
    fs::remove_all(dir);
}

TEST_CASE("pipeline: stage subset, manifest, byte-identical reruns") {
    ExperimentConfig c = ExperimentConfig::reference();
    c.stages = {"kernel-check", "env-gen"};

    fs::path d1 = temp_dir("run1");
    fs::path d2 = temp_dir("run2");
    RunManifest m1 = run(c, d1.string());
    RunManifest m2 = run(c, d2.string());
    CHECK(m1.pass);
    CHECK(m1.stages.size() == 2);
    CHECK(fs::exists(d1 / "manifest.json"));
    CHECK(slurp(d1 / "kernel_check.csv") == slurp(d2 / "kernel_check.csv"));
    CHECK(slurp(d1 / "environment.csv") == slurp(d2 / "environment.csv"));
    CHECK(m1.config_hash == m2.config_hash);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("stage isolation: simulate requires a saved effective matrix") {
    ExperimentConfig c = ExperimentConfig::reference();
    c.montecarlo.particles = 200;
    c.stages = {"simulate"};
    fs::path d = temp_dir("iso");
    RunManifest m = run(c, d.string());
    CHECK_FALSE(m.pass);
    CHECK(m.stages[0].note.find("effective") != std::string::npos);

    // hand it a saved matrix and it runs standalone
    EffectiveMatrix a;
    a.d = 2;
    const double mval = 5.235987755982989;
    a.a = {mval + 1.2, 0.0, 0.0, mval};
    a.m2_part = {mval, 0.0, 0.0, mval};
    a.cross_part = {0.0, 0.0, 0.0, 0.0};
    a.dirichlet_part = {1.2, 0.0, 0.0, 0.0};
    a.eigenvalues = symmetric_eigenvalues(a.a, 2);
    write_effective_csv((d / "abar.csv").string(), a, "x");
    RunManifest m2 = run(c, d.string());
    CHECK(m2.stages[0].ran);
    CHECK(m2.stages[0].note.find("requires") == std::string::npos);
    fs::remove_all(d);
}

TEST_CASE("validation suite passes clean and fails when sabotaged") {
    auto checks = validate({});
    bool all = true;
    for (const auto& c : checks) all = all && c.pass;
    CHECK(all);

    ValidationOptions bad;
    bad.corrupt_symbol_table = true;
    auto checks2 = validate(bad);
    bool nonneg_failed = false;
    for (const auto& c : checks2)
        if (c.name == "symbol_nonnegative") nonneg_failed = !c.pass;
    CHECK(nonneg_failed);
}
