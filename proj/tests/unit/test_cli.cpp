#include <doctest.h>

#include <sbsim/units.hpp>
#include <sbsim_cli/app.hpp>
#include <sbsim_cli/commands.hpp>
#include <sbsim_cli/config.hpp>
#include <sbsim_cli/csv.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <locale>
#include <numbers>
#include <sstream>

using namespace sbsim;
using namespace sbsim::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("sbsim_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const json& j) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json small_simulate() {
    return json::parse(R"({
        "spin": {"delta_hz": 1e5},
        "modes": [{"omega_m_hz": 1e5, "lambda_hz": 5e4, "kappa_hz": 1.25e3, "nbar": 0.025, "n_max": 4}],
        "time": {"t_end_natural": 5, "steps": 10}
    })");
}

json small_sd() {
    return json::parse(R"({
        "components": [{"lambda_hz": 1e5, "kappa_hz": 1.25e3, "omega_m_hz": 1e5}],
        "temperature": {"hbar_beta_s": 5.91e-6},
        "grid": {"omega_max_hz": 2e5, "points": 21}
    })");
}

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(const std::string& sub, const fs::path& cfg, const RunOptions& opts) {
    std::ostringstream out, err;
    const int code = run(sub, cfg, opts, out, err);
    return {code, out.str(), err.str()};
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

struct CommaDecimal : std::numpunct<char> {
    char do_decimal_point() const override { return ','; }
    char do_thousands_sep() const override { return '.'; }
    std::string do_grouping() const override { return "\3"; }
};

}  // namespace

TEST_CASE("minimal simulate config gets its defaults") {
    json j = json::parse(R"({
        "spin": {"delta_hz": 1e5},
        "modes": [{"omega_m_hz": 1e5, "lambda_hz": 1e5}],
        "time": {"t_end_natural": 20, "steps": 10}
    })");
    ParseLog log;
    const auto c = std::get<SimulateConfig>(parse_config("simulate", j, log));
    CHECK(c.system.modes.at(0).n_max == 15);
    CHECK(c.system.modes[0].kappa == 0.0);
    CHECK(c.system.modes[0].nbar == 0.0);
    CHECK(c.system.spin.epsilon_over_hbar == 0.0);
    CHECK(c.system.dimension_cap == 1024);
    CHECK(c.spin0.isApprox(lindblad::spin_projector(lindblad::SpinStateTag::up)));
    CHECK(c.grid.steps == 10);
    CHECK(c.grid.t_end == doctest::Approx(20.0 / hz(1e5)).epsilon(1e-15));
    const auto n_max = std::find_if(log.resolved.begin(), log.resolved.end(),
                                    [](const auto& kv) { return kv.first == "modes.0.n_max"; });
    REQUIRE(n_max != log.resolved.end());
    CHECK(n_max->second == "15 (default)");
}

TEST_CASE("frequencies are given in Hz and stored in rad/s") {
    const auto c = std::get<SimulateConfig>(parse_config("simulate", small_simulate()));
    CHECK(c.system.modes[0].omega_m == 2.0 * std::numbers::pi * 1e5);
    CHECK(c.system.spin.delta_rabi == 2.0 * std::numbers::pi * 1e5);
}

TEST_CASE("unknown and missing keys are reported with their paths") {
    json j = small_simulate();
    j["modes"][0]["lamda_hz"] = 1.0;
    j["time"].erase("steps");
    try {
        parse_config("simulate", j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const auto& issues = e.issues();
        CHECK(std::count(issues.begin(), issues.end(), "modes.0.lamda_hz: unknown key") == 1);
        CHECK(std::count(issues.begin(), issues.end(), "time.steps: missing required key") == 1);
    }
}

TEST_CASE("natural time units need a Rabi frequency") {
    json j = small_simulate();
    j["spin"]["delta_hz"] = 0.0;
    CHECK_THROWS_AS(parse_config("simulate", j), ConfigError);
    j["time"] = {{"t_end_s", 1e-4}, {"steps", 4}};
    CHECK_NOTHROW(parse_config("simulate", j));
}

TEST_CASE("bad values are config errors") {
    json j = small_sd();
    j["components"][0]["kappa_hz"] = 2e5;  // kappa above omega_m
    CHECK_THROWS_AS(parse_config("sd", j), ConfigError);
    j = small_simulate();
    j["modes"][0]["nbar"] = -1.0;
    CHECK_THROWS_AS(parse_config("simulate", j), ConfigError);
    j = small_simulate();
    j["initial_state"] = "sideways";
    CHECK_THROWS_AS(parse_config("simulate", j), ConfigError);
    j["initial_state"] = {{"bloch", {1.0, 1.0, 0.0}}};
    CHECK_THROWS_AS(parse_config("simulate", j), ConfigError);
    j["initial_state"] = {{"bloch", {0.6, 0.0, 0.8}}};
    CHECK_NOTHROW(parse_config("simulate", j));
    CHECK_THROWS_AS(parse_config("no-such-command", j), ConfigError);
}

TEST_CASE("strict regime rejects kappa >= omega_m and names the rule") {
    const auto dir = scratch("strict");
    json j = small_simulate();
    j["modes"][0]["kappa_hz"] = 1.5e5;
    const auto cfg = write_config(dir, j);

    RunOptions strict;
    strict.out_dir = dir / "out";
    strict.strict_regime = true;
    const auto r = invoke("simulate", cfg, strict);
    CHECK(r.code == exit_config);
    CHECK(contains(r.err, "kappa/omega_m"));
    CHECK_FALSE(fs::exists(dir / "out" / "simulate.csv"));

    RunOptions lenient = strict;
    lenient.strict_regime = false;
    const auto w = invoke("simulate", cfg, lenient);
    CHECK(w.code == exit_ok);
    CHECK(contains(w.err, "warning"));
    CHECK(contains(w.err, "kappa/omega_m"));
    CHECK(fs::exists(dir / "out" / "simulate.csv"));
}

TEST_CASE("empty series writes a header-only file") {
    Series s;
    s.add("t_s", {});
    s.add("g", {});
    std::ostringstream os;
    write_csv(os, s);
    CHECK(os.str() == "t_s,g\n");
    Series ragged;
    ragged.add("a", {1.0});
    ragged.add("b", {});
    CHECK_THROWS_AS(ragged.rows(), std::invalid_argument);
}

TEST_CASE("numbers round-trip and ignore the global locale") {
    const std::locale old = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1234567.25) == "1234567.25");
    const double x = 0.1 + 0.2;
    CHECK(std::stod(format_number(x)) == x);
    Series s;
    s.add("x", {0.25, 1e-300});
    std::ostringstream os;
    os.imbue(std::locale());
    write_csv(os, s);
    CHECK(os.str() == "x\n0.25\n1e-300\n");

    const auto dir = scratch("locale");
    RunOptions opts;
    opts.out_dir = dir / "out";
    CHECK(invoke("sd", write_config(dir, small_sd()), opts).code == exit_ok);
    std::locale::global(old);
    const std::string text = slurp(dir / "out" / "sd.csv");
    std::istringstream lines(text);
    std::size_t rows = 0;
    for (std::string line; std::getline(lines, line);) {
        if (line.starts_with("#")) continue;
        CHECK(std::count(line.begin(), line.end(), ',') == 3);
        ++rows;
    }
    CHECK(rows == 22);
    CHECK(contains(text, "omega_hz,j_eff,j_tilde,epsilon_j\n"));
}

TEST_CASE("resonant trajectory reruns are byte-identical") {
    const auto dir = scratch("rerun");
    json j = small_simulate();
    j["modes"][0]["lambda_hz"] = 1e5;
    j["modes"][0]["n_max"] = 15;
    j["time"] = {{"t_end_natural", 20}, {"steps", 200}};
    const auto cfg = write_config(dir, j);
    RunOptions a;
    a.out_dir = dir / "a";
    RunOptions b;
    b.out_dir = dir / "b";
    REQUIRE(invoke("simulate", cfg, a).code == exit_ok);
    REQUIRE(invoke("simulate", cfg, b).code == exit_ok);
    const std::string first = slurp(dir / "a" / "simulate.csv");
    CHECK(first == slurp(dir / "b" / "simulate.csv"));
    CHECK(contains(first, "# config_fnv1a="));
    CHECK(contains(first, "t_s,t_natural,sigma_z,trace_err,min_eig\n"));
}

TEST_CASE("dry run prints the resolved table and writes nothing") {
    const auto dir = scratch("dry");
    const auto cfg = write_config(dir, small_simulate());
    RunOptions opts;
    opts.out_dir = dir / "out";
    opts.dry_run = true;
    const auto r = invoke("simulate", cfg, opts);
    CHECK(r.code == exit_ok);
    CHECK(contains(r.out, "modes.0.omega_m_hz = 100000"));
    CHECK(contains(r.out, "dimension_cap = 1024 (default)"));
    CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("exit codes") {
    const auto dir = scratch("codes");
    RunOptions opts;
    opts.out_dir = dir / "out";

    SUBCASE("2: schema problem") {
        json j = small_simulate();
        j["bogus"] = 1;
        const auto r = invoke("simulate", write_config(dir, j), opts);
        CHECK(r.code == exit_config);
        CHECK(contains(r.err, "bogus: unknown key"));
    }
    SUBCASE("2: unreadable config") {
        CHECK(invoke("simulate", dir / "missing.json", opts).code == exit_config);
        std::ofstream(dir / "broken.json") << "{ not json";
        CHECK(invoke("simulate", dir / "broken.json", opts).code == exit_config);
    }
    SUBCASE("3: fit that cannot converge") {
        json j = json::parse(R"({
            "target": {"type": "flat_band", "level": 1e9, "lo_hz": 1e4, "hi_hz": 2e5},
            "n_components": 1, "max_iterations": 1, "restarts": 1
        })");
        const auto r = invoke("sd-fit", write_config(dir, j), opts);
        CHECK(r.code == exit_numerical);
        CHECK(fs::exists(dir / "out" / "sd_fit.json"));
    }
    SUBCASE("4: dimension above the cap") {
        json j = small_simulate();
        j["dimension_cap"] = 8;
        const auto r = invoke("simulate", write_config(dir, j), opts);
        CHECK(r.code == exit_cap);
        CHECK(contains(r.err, "exceeds cap 8"));
    }
    SUBCASE("4: chain-evolve without acknowledgement") {
        json j = json::parse(R"({
            "components": [{"lambda_hz": 1e5, "kappa_hz": 1.25e3, "omega_m_hz": 1e5}],
            "omega_max_hz": 4e5, "n_nodes": 200, "n_chain": 4,
            "spin": {"delta_hz": 1e5}, "time": {"t_end_natural": 1, "steps": 2},
            "n_sites": 2, "d_max": 2
        })");
        const auto cfg = write_config(dir, j);
        const auto r = invoke("chain-evolve", cfg, opts);
        CHECK(r.code == exit_cap);
        CHECK(contains(r.err, "--acknowledge-cap"));
        opts.acknowledge_cap = true;
        CHECK(invoke("chain-evolve", cfg, opts).code == exit_ok);
        CHECK(fs::exists(dir / "out" / "chain_evolve.csv"));
    }
    SUBCASE("1: output directory is a file") {
        std::ofstream(dir / "occupied") << "x";
        opts.out_dir = dir / "occupied";
        CHECK(invoke("sd", write_config(dir, small_sd()), opts).code == exit_io);
    }
}

TEST_CASE("sweeps fan out into numbered directories") {
    const auto dir = scratch("sweep");
    RunOptions opts;
    opts.out_dir = dir / "out";
    opts.threads = 2;
    opts.sweeps.push_back(parse_sweep("modes.0.kappa_hz=2e3,1e3"));
    opts.sweeps.push_back(parse_sweep("modes.0.nbar=0,0.1"));
    const auto r = invoke("simulate", write_config(dir, small_simulate()), opts);
    REQUIRE(r.code == exit_ok);
    for (int k = 0; k < 4; ++k) CHECK(fs::exists(dir / "out" / ("sweep_" + std::to_string(k)) / "simulate.csv"));
    const std::string index = slurp(dir / "out" / "sweep_index.csv");
    CHECK(contains(index, "sweep,modes.0.kappa_hz,modes.0.nbar\n0,1000,0\n1,1000,0.10000000000000001\n2,2000,0\n"));
    CHECK(r.out.find("[sweep_0]") < r.out.find("[sweep_3]"));

    CHECK_THROWS_AS(parse_sweep("modes.0.kappa_hz"), ConfigError);
    CHECK_THROWS_AS(parse_sweep("modes.0.kappa_hz=1,x"), ConfigError);
}

TEST_CASE("every subcommand runs on a small config") {
    const auto dir = scratch("all");
    RunOptions opts;
    opts.out_dir = dir / "out";
    const std::vector<std::pair<std::string, std::string>> cases{
        {"sd", small_sd().dump()},
        {"sd-fit", R"({"target": {"type": "lorentzian_sum", "components": [{"lambda_hz": 1e5, "kappa_hz": 5e3, "omega_m_hz": 1e5}]},
                       "n_components": 1, "grid_points": 400})"},
        {"corr", R"({"bath": {"omega_m_hz": 1e5, "kappa_hz": 1.25e3, "lambda_hz": 1e5, "hbar_beta_s": 5.91e-6, "n_matsubara": 2000},
                     "time": {"t_end_s": 1e-4, "steps": 5}})"},
        {"corr-dist", R"({"omega_m_hz": 1e5, "kappa_hz": [1.25e3], "nbar": [0.025, 1.0], "n_matsubara": 2000})"},
        {"nonmarkov", R"({"spin": {"delta_hz": 1e5}, "modes": [{"omega_m_hz": 1e5, "lambda_hz": 5e4, "kappa_hz": 1.25e3, "nbar": 0.025, "n_max": 4}],
                          "rhp": {"t_end_natural": 4, "steps": 8}, "blp": {"t_end_natural": 4, "steps": 8}})"},
        {"ion-params", R"({"crystal": {"omega_com_ref_hz": 2e6}, "lasers": {"omega_odf_hz": 1e6, "detuning_delta_m_hz": 1e5},
                           "bath": {"kappa_hz": 1.25e3, "nbar": 0.025}})"},
        {"chain", R"({"components": [{"lambda_hz": 1e5, "kappa_hz": 1.25e3, "omega_m_hz": 1e5}], "omega_max_hz": 4e5, "n_chain": 6})"},
    };
    for (const auto& [sub, text] : cases) {
        CAPTURE(sub);
        const auto r = invoke(sub, write_config(dir, json::parse(text)), opts);
        CHECK(r.code == exit_ok);
        CHECK(r.err.find("error") == std::string::npos);
    }
    CHECK(fs::exists(dir / "out" / "nonmarkov_summary.txt"));
    CHECK(contains(slurp(dir / "out" / "nonmarkov_summary.txt"), "N_RHP="));
    CHECK(contains(slurp(dir / "out" / "nonmarkov_blp.csv"), "t_s,D_up_down,"));
    CHECK(contains(slurp(dir / "out" / "chain.csv"), "# system_coupling_hz="));
    CHECK(fs::exists(dir / "out" / "ion_params.csv"));
    CHECK(fs::exists(dir / "out" / "sd_fit.csv"));
}

TEST_CASE("set_path edits nested values") {
    json j = small_simulate();
    set_path(j, "modes.0.nbar", 0.5);
    set_path(j, "spin.epsilon_hz", 1.0);
    CHECK(j["modes"][0]["nbar"] == 0.5);
    CHECK(j["spin"]["epsilon_hz"] == 1.0);
    CHECK_THROWS_AS(set_path(j, "modes.3.nbar", 1.0), ConfigError);
    CHECK_THROWS_AS(set_path(j, "time.steps.x", 1.0), ConfigError);
}
