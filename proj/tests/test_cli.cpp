#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "oracles.hpp"
#include "ppto/analytic.hpp"
#include "ppto/format.hpp"
#include "ppto/optimize.hpp"

using namespace ppto;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;

    std::map<std::string, std::string> record() const {
        std::map<std::string, std::string> kv;
        std::istringstream in(out);
        std::string line;
        while (std::getline(in, line)) {
            const auto eq = line.find('=');
            if (eq != std::string::npos && line[0] != '#')
                kv[line.substr(0, eq)] = line.substr(eq + 1);
        }
        return kv;
    }
    double num(const std::string& key) const { return std::stod(record().at(key)); }
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "ppto");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("ppto_cli_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("eval prints the closed-form record") {
    const Result r = run({"eval", "--alpha", "4", "--r0", "1", "--lambda", "0.1", "--beta", "1", "--m", "0"});
    REQUIRE(r.code == 0);
    CHECK(r.num("p_out") == doctest::Approx(oracle::kPout_l01_b1).epsilon(1e-13));
    const ChannelParams p{4, 1, 0.1, LogBase::natural};
    CHECK(r.record().at("k") == format_number(geometry_constant(p)));
    CHECK(r.record().at("throughput") == format_number(throughput(p, LinkPolicy{1.0, 0})));
    CHECK(r.record().at("mean_attempts") == "1");
}

TEST_CASE("eval numbers equal the library to 12 significant digits") {
    const Result r = run({"eval", "--lambda", "0.07", "--beta", "3.3", "--m", "4", "--epsilon", "0.05"});
    REQUIRE(r.code == 0);
    const ChannelParams p{4, 1, 0.07, LogBase::natural};
    const LinkPolicy pol{3.3, 4};
    const double p_out = outage_probability(p, 3.3);
    CHECK(r.num("p_out") == doctest::Approx(p_out).epsilon(1e-12));
    CHECK(r.num("mean_attempts") == doctest::Approx(mean_attempts(p_out, 4)).epsilon(1e-12));
    CHECK(r.num("throughput") == doctest::Approx(throughput(p, pol)).epsilon(1e-12));
    CHECK(r.num("drop_rate") == doctest::Approx(drop_rate(p, pol)).epsilon(1e-12));
    CHECK(r.record().at("feasible") == (drop_rate(p, pol) <= 0.05 ? "1" : "0"));
}

TEST_CASE("eval in base 2 without interference") {
    const Result r = run({"eval", "--lambda", "0", "--beta", "1", "--m", "0", "--log-base", "2"});
    REQUIRE(r.code == 0);
    CHECK(r.num("throughput") == doctest::Approx(1.0));
}

TEST_CASE("argument errors exit with 2 and name the flag") {
    Result r = run({"eval", "--lambda", "0.1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("beta") != std::string::npos);
    r = run({"eval", "--alpha", "2", "--beta", "1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("alpha") != std::string::npos);
    r = run({"eval", "--beta", "abc"});
    CHECK(r.code == 2);
    CHECK(r.err.find("beta") != std::string::npos);
    CHECK(run({"eval", "--beta", "1", "--log-base", "10"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({"optimize", "--lambda", "0.1"}).code == 2);
    CHECK(run({"optimize", "--lambda", "0.1", "--epsilon", "1.5"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("optimize, constrained") {
    const Result r = run({"optimize", "--lambda", "0.05", "--epsilon", "0.02"});
    REQUIRE(r.code == 0);
    const double beta = r.num("beta_star");
    CHECK(beta >= 6.1);
    CHECK(beta <= 9.0);
    const int attempts = std::stoi(r.record().at("attempts_star"));
    CHECK((attempts == 5 || attempts == 6));
    CHECK(r.record().at("constraint_satisfied") == "1");
    CHECK(r.num("drop_rate") == doctest::Approx(0.02).epsilon(1e-9));
}

TEST_CASE("optimize, unconstrained and capped") {
    Result r = run({"optimize", "--lambda", "0.05", "--unconstrained"});
    REQUIRE(r.code == 0);
    CHECK(r.num("beta_star") == doctest::Approx(9.65).epsilon(0.01));
    CHECK(r.num("p_out") == doctest::Approx(0.5).epsilon(0.1));
    CHECK(r.record().count("m_star") == 0);

    r = run({"optimize", "--lambda", "0.1", "--epsilon", "0.01", "--m-cap", "5"});
    REQUIRE(r.code == 0);
    CHECK(r.record().at("m_star") == "5");

    r = run({"optimize", "--lambda", "0.2", "--epsilon", "0.02", "--m-max", "3"});
    REQUIRE(r.code == 0);
    CHECK(r.record().at("ceiling_binding") == "1");
    CHECK(r.err.find("warning") != std::string::npos);
}

TEST_CASE("optimize reports solver failures with exit 3") {
    const Result r = run({"optimize", "--lambda", "1e-6", "--unconstrained", "--bracket-hi", "1e-9",
                          "--max-expansions", "1"});
    CHECK(r.code == 3);
    CHECK(r.err.find("sign change") != std::string::npos);
}

TEST_CASE("simulate") {
    const auto dir = scratch("simulate");
    const std::vector<std::string> base = {"simulate", "--lambda", "0.05", "--beta", "6.14", "--m", "4",
                                           "--n", "20000", "--seed", "7"};
    std::vector<std::string> a1 = base, a2 = base;
    a1.insert(a1.end(), {"--csv", (dir / "a.csv").string(), "--streams", "1"});
    a2.insert(a2.end(), {"--csv", (dir / "b.csv").string(), "--streams", "3"});
    const Result r1 = run(a1);
    const Result r2 = run(a2);
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    CHECK(std::abs(r1.num("drop_rate_mc") - 0.02) < 3 * r1.num("drop_rate_se"));
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.csv").rfind("quantity,estimate,std_error,n,analytic\r\n", 0) == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("simulate argument contract") {
    CHECK(run({"simulate", "--lambda", "0.05", "--beta", "6", "--n", "2000"}).code == 2);  // no seed
    const Result r = run({"simulate", "--lambda", "0.2", "--beta", "1", "--seed", "1", "--window-factor", "2"});
    CHECK(r.code == 2);
    CHECK(r.err.find("window_radius_factor") != std::string::npos);
}

TEST_CASE("config file precedence: flags > file > defaults") {
    const auto dir = scratch("config");
    const auto ini = dir / "run.ini";
    std::ofstream(ini) << "lambda=0.2\nbeta=2\nalpha=3\n";
    // file overrides defaults
    Result r = run({"eval", "--config", ini.string()});
    REQUIRE(r.code == 0);
    CHECK(r.num("lambda") == 0.2);
    CHECK(r.num("alpha") == 3.0);
    CHECK(r.num("r0") == 1.0);  // default
    // flags override the file
    r = run({"eval", "--config", ini.string(), "--lambda", "0.05", "--alpha", "4"});
    REQUIRE(r.code == 0);
    CHECK(r.num("lambda") == 0.05);
    CHECK(r.num("alpha") == 4.0);
    CHECK(r.num("beta") == 2.0);
    // defaults when neither is given
    r = run({"eval", "--beta", "2"});
    CHECK(r.num("lambda") == 0.0);
    CHECK(r.num("alpha") == 4.0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("reproduce writes figures and headline values") {
    const auto dir = scratch("reproduce");
    const Result r = run({"reproduce", "--figure", "fig6", "--output-dir", dir.string()});
    REQUIRE(r.code == 0);
    const std::filesystem::path csv = r.record().at("fig6.csv");
    REQUIRE(std::filesystem::exists(csv));
    const std::string text = slurp(csv);
    CHECK(text.rfind("lambda,m[eps=0.1],m[eps=0.01],m[eps=0.001]\r\n", 0) == 0);
    CHECK(r.out.find("lambda,epsilon,beta_star,m_star,T_star,T_un") != std::string::npos);

    // env var fallback for the output directory
    const auto env_dir = dir / "from_env";
    setenv("PPTO_OUTPUT_DIR", env_dir.string().c_str(), 1);
    const Result e = run({"reproduce", "--figure", "fig4"});
    unsetenv("PPTO_OUTPUT_DIR");
    REQUIRE(e.code == 0);
    CHECK(std::filesystem::path(e.record().at("fig4.csv")).parent_path() == env_dir);

    CHECK(run({"reproduce", "--figure", "fig6", "--mc-overlay"}).code == 2);  // overlay needs a seed
    std::ofstream(dir / "file") << "x";
    CHECK(run({"reproduce", "--figure", "fig6", "--output-dir", (dir / "file" / "sub").string()}).code == 4);
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
