#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "doctest.h"

using namespace phi4::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
    int status;
    std::string out, err;
};

Outcome cli(const std::vector<std::string>& args) {
    std::ostringstream o, e;
    const int st = run_cli(args, o, e);
    return {st, o.str(), e.str()};
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("phi4_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("canonical serialization") {
    json j = {{"b", 0.1}, {"a", {{"z", 1}, {"c", -2.5}}}, {"n", 3}, {"s", "x"}, {"v", {1.0 / 3.0, true}}};
    CHECK(canonical_dump(j) ==
          R"({"a":{"c":-2.5,"z":1},"b":0.10000000000000001,"n":3,"s":"x","v":[0.33333333333333331,true]})");
    CHECK(canonical_dump(json{{"x", std::nan("")}}) == R"({"x":null})");
    // round trip is exact
    const double x = 0.7 * std::numbers::pi;
    CHECK(json::parse(canonical_dump(json{{"x", x}}))["x"].get<double>() == x);
}

TEST_CASE("config parsing and errors") {
    auto c = parse_config(R"({"seed": 9, "beta": 2.5, "samples": 300, "dt": 0.05, "out": "res",
                              "tolerances": {"measurement": 1e-7}})",
                          "c.json");
    CHECK(c.params.seed == 9);
    CHECK(c.params.beta == 2.5);
    CHECK(c.params.samples == 300);
    CHECK(c.params.dt == 0.05);
    CHECK(c.out == "res");
    CHECK(c.tolerances.at("measurement") == 1e-7);

    auto message = [](const std::string& text) {
        try {
            parse_config(text, "c.json");
        } catch (const UsageError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("{\"seed\": 1,\n  \"beta\": ,}") == "c.json:2:11: malformed JSON");
    CHECK(message(R"({"beta": "x"})") == "c.json: field 'beta': expected a number");
    CHECK(message(R"({"samples": 2.5})") == "c.json: field 'samples': expected an integer");
    CHECK(message(R"({"colour": 1})") == "c.json: field 'colour': unknown field");
    CHECK(message(R"({"tolerances": {"measurement": -1}})") == "c.json: field 'tolerances.measurement': must be positive");
    CHECK(message(R"({"beta": 0})") == "c.json: field 'beta': must be positive");
    CHECK(message("[1]") == "c.json:1:1: top level must be an object");
}

TEST_CASE("flags override env override file") {
    auto dir = scratch("prec");
    write(dir / "c.json", R"({"seed": 3, "out": "from_file"})");
    ::unsetenv("PHI4_SEED");
    ::unsetenv("PHI4_OUT");
    ::unsetenv("PHI4_CONFIG");
    Overrides ov;
    ov.config = (dir / "c.json").string();
    CHECK(resolve(ov).params.seed == 3);
    ::setenv("PHI4_SEED", "5", 1);
    CHECK(resolve(ov).params.seed == 5);
    ov.seed = 7;
    CHECK(resolve(ov).params.seed == 7);
    CHECK(resolve(ov).out == "from_file");
    ::setenv("PHI4_OUT", "from_env", 1);
    CHECK(resolve(ov).out == "from_env");
    ::setenv("PHI4_SEED", "abc", 1);
    CHECK_THROWS_AS(resolve(ov), UsageError);
    ::unsetenv("PHI4_SEED");
    ::unsetenv("PHI4_OUT");
    // config path from the environment
    ::setenv("PHI4_CONFIG", (dir / "c.json").string().c_str(), 1);
    CHECK(resolve(Overrides{}).params.seed == 3);
    ::unsetenv("PHI4_CONFIG");
}

TEST_CASE("diagrams subcommand") {
    auto dir = scratch("diag");
    auto r = cli({"diagrams", "--n", "4", "--k", "1", "--out", dir.string()});
    CHECK(r.status == 0);
    CHECK(r.out.find("topologies 1") != std::string::npos);
    CHECK(r.out.find("PASS counting_laws") != std::string::npos);
    auto j = json::parse(slurp(dir / "diagrams.json"));
    REQUIRE(j["result"]["diagrams"].size() == 1);
    CHECK(j["result"]["diagrams"][0]["lines"] == 4);
    CHECK(j["result"]["diagrams"][0]["weight"] == json{{"num", 1}, {"den", 1}});
    CHECK(fs::exists(dir / "diagrams.meta.json"));

    auto b = cli({"diagrams", "--check", "beta_matching", "--out", dir.string()});
    CHECK(b.status == 0);
    CHECK(b.out.rfind("PASS beta_matching ", 0) == 0);
}

TEST_CASE("lemmarep and measure subcommands") {
    auto dir = scratch("lm");
    auto r = cli({"lemmarep", "--r", "1", "--p", "1", "--out", dir.string()});
    CHECK(r.status == 0);
    auto j = json::parse(slurp(dir / "lemmarep.json"))["result"];
    const double pi = std::numbers::pi;
    CHECK(std::abs(j["lhs"][0].get<double>()) < 1e-3 * pi);
    CHECK(std::abs(j["lhs"][1].get<double>() + pi) < 1e-3 * pi);
    CHECK(std::abs(j["rhs"][1].get<double>() + pi) < 1e-3 * pi);
    CHECK(j["rel_err"].get<double>() < 1e-3);

    auto m = cli({"measure", "--lambda", "0", "--out", dir.string()});
    CHECK(m.status == 0);
    auto e = json::parse(slurp(dir / "measure.json"))["result"];
    CHECK(e["delta_E"].get<double>() == 0.0);
    CHECK(e["delta_E_vee"].get<double>() == 0.0);
}

TEST_CASE("same config and seed give identical bytes for any thread count") {
    auto dir = scratch("det");
    write(dir / "c.json", R"({"samples": 64, "beta": 1.0})");
    auto a = cli({"mc-delta-e", "--config", (dir / "c.json").string(), "--threads", "1", "--out", (dir / "a").string()});
    auto b = cli({"mc-delta-e", "--config", (dir / "c.json").string(), "--threads", "2", "--out", (dir / "b").string()});
    CHECK(a.status == b.status);
    const auto ja = slurp(dir / "a" / "mc-delta-e.json"), jb = slurp(dir / "b" / "mc-delta-e.json");
    CHECK(!ja.empty());
    CHECK(ja == jb);
    auto c = cli({"mc-delta-e", "--config", (dir / "c.json").string(), "--seed", "11", "--out", (dir / "c").string()});
    CHECK(slurp(dir / "c" / "mc-delta-e.json") != ja);
}

TEST_CASE("exit status") {
    auto dir = scratch("exit");
    CHECK(cli({}).status == 2);
    CHECK(cli({"bogus"}).status == 2);
    CHECK(cli({"measure", "--check", "lemmarep", "--out", dir.string()}).status == 2);
    write(dir / "bad.json", "{\n\"seed\": }");
    auto bad = cli({"sample", "--config", (dir / "bad.json").string()});
    CHECK(bad.status == 2);
    CHECK(bad.err.find("bad.json:2:") != std::string::npos);
    CHECK(cli({"sample", "--config", (dir / "missing.json").string()}).status == 2);
    // no admissible momentum set: numerical failure with a diagnostic record
    auto f = cli({"lemmarep", "--r", "1", "--p", "0.1", "--out", dir.string()});
    CHECK(f.status == 3);
    CHECK(fs::exists(dir / "lemmarep.error.json"));
}
