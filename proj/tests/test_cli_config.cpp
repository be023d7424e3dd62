#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "bihar/cli.hpp"

using namespace bihar;
using namespace bihar::cli;

namespace {

std::string scratch_dir() {
    auto p = std::filesystem::temp_directory_path() / "bihar-cli-test";
    std::filesystem::create_directories(p);
    return p.string();
}

struct Run {
    int code;
    std::string out, err;
};

Run run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "bihar-cli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = run(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("every command has defaults with the common keys") {
    for (const auto& c : commands()) {
        json d = default_config(c);
        for (const char* k : {"command", "grid", "potential", "seed", "output", "params", "tolerances"})
            CHECK(d.contains(k));
        CHECK(d["command"] == c);
        CHECK_NOTHROW(validate_config(d));
        CHECK(grid_from_config(d).n == d["grid"]["n"].get<int>());
    }
    CHECK_THROWS_AS(default_config("nope"), ConfigError);
    CHECK_THROWS_AS(default_potential("nope"), ConfigError);
}

TEST_CASE("file merge and overrides") {
    json file = {{"grid", {{"n", 256}}}, {"potential", {{"kind", "resonance"}, {"c", 1.0}}}};
    json cfg = resolve_config("classify", file, {"potential.d=2", "params.expect=FirstKind"});
    CHECK(cfg["grid"]["n"] == 256);
    CHECK(cfg["grid"]["L"] == 10.0);
    CHECK(cfg["potential"]["kind"] == "resonance");
    CHECK(cfg["potential"]["c"] == 1.0);
    CHECK(cfg["potential"]["d"] == 2);
    CHECK(cfg["potential"]["sampling"] == "comb");
    CHECK(cfg["params"]["expect"] == "FirstKind");
    json kind = resolve_config("classify", nullptr, {"potential.kind=\"zero_eigen\""});
    CHECK(kind["potential"] == default_potential("zero_eigen"));

    json j = json::object();
    apply_set(j, "a.b.c=[1,2]");
    apply_set(j, "a.s=hello");
    CHECK(j["a"]["b"]["c"] == json::array({1, 2}));
    CHECK(j["a"]["s"] == "hello");
    CHECK_THROWS_AS(apply_set(j, "novalue"), ConfigError);
    CHECK_THROWS_AS(apply_set(j, "a..b=1"), ConfigError);
}

TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_AS(resolve_config("classify", json{{"gird", {{"n", 64}}}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("classify", nullptr, {"params.bogus=1"}), ConfigError);
    CHECK_THROWS_AS(resolve_config("classify", nullptr, {"potential.bogus=1"}), ConfigError);
    CHECK_THROWS_AS(resolve_config("classify", json{{"command", "decay"}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("classify", json::array()), ConfigError);
}

TEST_CASE("potential construction from config") {
    Grid g = make_grid(10, 256);
    CHECK(potential_from_config(default_potential("free"), g).values.cwiseAbs().maxCoeff() == 0);
    CHECK(potential_from_config(default_potential("bump"), g).values.cwiseAbs().maxCoeff() > 0);
    for (const char* m : {"comb", "pointwise", "stencil"}) {
        json p = default_potential("resonance");
        p["sampling"] = m;
        CHECK_NOTHROW(potential_from_config(p, g));
    }
    json bad = default_potential("resonance");
    bad["sampling"] = "nearest";
    CHECK_THROWS_AS(potential_from_config(bad, g), ConfigError);
}

TEST_CASE("config hash is deterministic") {
    json cfg = resolve_config("classify", nullptr, {"grid.n=256", "potential.kind=\"free\"", "output=" + json(scratch_dir()).dump()});
    Report a = run_command("classify", cfg);
    Report b = run_command("classify", cfg);
    CHECK(a.doc["config_hash"] == b.doc["config_hash"]);
    json other = cfg;
    other["seed"] = 2;
    CHECK(run_command("classify", other).doc["config_hash"] != a.doc["config_hash"]);
}

TEST_CASE("exit codes") {
    const std::string out = scratch_dir();
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({"classify", "--set", "params.bogus=1", "--out", out}).code == 2);
    CHECK(run_cli({"classify", "--n", "257", "--out", out}).code == 2);
    CHECK(run_cli({"classify", "--potential", "nope", "--out", out}).code == 2);
    CHECK(run_cli({"decay", "--pq", "1.5,0", "--n", "256", "--L", "20", "--out", out}).code == 2);

    Run free = run_cli({"classify", "--potential", "free", "--n", "256", "--out", out});
    CHECK(free.code == 0);
    json doc = json::parse(free.out);
    CHECK(doc["result"].dump().find("SecondKind") != std::string::npos);
    CHECK(run_cli({"classify", "--potential", "free", "--n", "256", "--expect", "Regular", "--out", out}).code == 1);
    CHECK(run_cli({"classify", "--potential", "resonance", "--set", "potential.sampling=\"stencil\"", "--n", "256",
                   "--out", out})
              .code == 0);

    CHECK(run_cli({"counterexample", "--model", "g1plus", "--R", "10", "--out", out}).code == 0);
    Run fault = run_cli({"selftest", "--inject-fault", "--only", "1", "--out", out});
    CHECK(fault.code == 1);
    CHECK(fault.out.find("selftest FAILED") != std::string::npos);
    Run ok = run_cli({"selftest", "--only", "1", "--out", out});
    CHECK(ok.code == 0);
    CHECK(run_cli({"--help"}).code == 0);
}
