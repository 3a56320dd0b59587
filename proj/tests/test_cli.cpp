#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chenhopf/cli.hpp"

using nlohmann::json;
namespace cli = chenhopf::cli;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
    [[nodiscard]] json doc() const { return json::parse(out); }
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "chenhopf");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

const std::vector<std::string> kCanonical{"--a", "-1", "--b", "1", "--d", "2", "--r", "1"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
}

std::filesystem::path temp_dir() {
    if (const char* d = std::getenv("CHENHOPF_TMPDIR")) return d;
    return std::filesystem::temp_directory_path();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

std::vector<double> fields(const std::string& line) {
    std::vector<double> v;
    std::istringstream is(line);
    for (std::string f; std::getline(is, f, ',');) v.push_back(std::stod(f));
    return v;
}

}  // namespace

TEST_CASE("shortest round-trip formatting") {
    CHECK(cli::format_double(0.1) == "0.1");
    CHECK(cli::format_double(-0.625) == "-0.625");
    CHECK(cli::format_double(1e-300) == "1e-300");
    for (double v : {1.0 / 3.0, 2.718281828459045, 6.283185307179586, -1e-17})
        CHECK(std::stod(cli::format_double(v)) == v);
}

TEST_CASE("usage errors exit 3") {
    CHECK(run({}).code == cli::kInput);
    CHECK(run({"nonsense"}).code == cli::kInput);
    const Result bad = run({"check", "--a", "abc"});
    CHECK(bad.code == cli::kInput);
    CHECK(bad.err.find("check") != std::string::npos);
    CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("check") {
    const Result canon = run(with({"check", "--json"}, kCanonical));
    // b(a+d)r = 1 > 0: the nontrivial averaged zeros are not real
    CHECK(canon.code == cli::kHypothesis);
    const json c = canon.doc();
    CHECK(c["conditions"]["holds_negative"] == true);
    CHECK(c["conditions"]["holds_b_ad_r_negative"] == false);
    CHECK(c["conditions"]["overall"] == false);
    CHECK(c["manifest"]["command"] == "check");

    const Result def = run({"check", "--json"});
    CHECK(def.code == cli::kOk);
    CHECK(def.doc()["conditions"]["overall"] == true);

    const Result pos = run({"check", "--a", "1", "--b", "1", "--d", "1", "--r", "1", "--json"});
    CHECK(pos.code == cli::kHypothesis);
    CHECK(pos.doc()["conditions"]["holds_negative"] == false);

    const Result cne = run({"check", "--c", "0", "--json"});
    CHECK(cne.code == cli::kHypothesis);
    CHECK(cne.doc()["conditions"]["holds_c_equals_a"] == false);
}

TEST_CASE("spectrum") {
    const Result r = run(with({"spectrum", "--json"}, kCanonical));
    CHECK(r.code == cli::kOk);
    const json j = r.doc();
    CHECK(j["max_deviation"].get<double>() < 1e-8);
    CHECK(j["lambda1_r"] == 1.0);
    CHECK(j["lambda2_minus_b"] == -1.0);
    CHECK(j["char_poly_ascending"].size() == 5);
    CHECK(j["eig4"].size() == 4);

    const Result general = run({"spectrum", "--a", "2", "--b", "3", "--c", "1", "--d", "1", "--r", "5", "--json"});
    CHECK(general.code == cli::kOk);
    CHECK(general.doc()["char_poly_ascending"][0] == 60.0);

    const Result text = run(with({"spectrum"}, kCanonical));
    CHECK(text.code == cli::kOk);
    CHECK(text.out.find("max_deviation: ") != std::string::npos);
    CHECK(text.out.find("manifest.parameters.b: 1") != std::string::npos);
    CHECK(run({"spectrum", "--r", "x"}).code == cli::kInput);
}

TEST_CASE("favg") {
    const Result both = run(with({"favg", "--point", "0,0,1,0", "--method", "both", "--json"}, kCanonical));
    CHECK(both.code == cli::kOk);
    const json j = both.doc();
    CHECK(j["closed"] == json::array({0.0, 0.0, -1.0, 0.0}));
    CHECK(std::abs(j["quadrature"][2].get<double>() + 1.0) < 1e-12);
    CHECK(j["discrepancy"].get<double>() < 1e-10);

    const Result zero = run({"favg", "--point", "0,0,0,0", "--method", "closed", "--json"});
    CHECK(zero.doc()["closed"] == json::array({0.0, 0.0, 0.0, 0.0}));
    CHECK_FALSE(zero.doc().contains("quadrature"));

    CHECK(run({"favg", "--point", "1,2,3"}).code == cli::kInput);
    CHECK(run({"favg", "--point", "1,2,x,4"}).code == cli::kInput);
    CHECK(run({"favg", "--method", "simpson"}).code == cli::kInput);
    CHECK(run({"favg", "--nodes", "4"}).code == cli::kInput);
    const Result hyp = run({"favg", "--a", "1", "--d", "1"});
    CHECK(hyp.code == cli::kHypothesis);
    CHECK(hyp.err.find("a(a+d) < 0") != std::string::npos);
}

TEST_CASE("zeros") {
    const Result r = run({"zeros", "--json"});
    REQUIRE(r.code == cli::kOk);
    const json j = r.doc();
    const json p1 = j["zeros"][0]["closed_form"]["point"];
    const json p2 = j["zeros"][1]["closed_form"]["point"];
    CHECK(p1 == json::array({-0.5, -1.0, -0.5, -0.5}));
    CHECK(p2[0] == -p1[0].get<double>());
    CHECK(p2[2] == p1[2]);
    CHECK(j["det_jacobian_closed"] == -0.625);
    CHECK(j["verdict"]["theorem_applicable"] == false);
    for (int i = 0; i < 2; ++i) {
        CHECK(j["zeros"][i]["closed_form"]["residual"].get<double>() < 1e-12);
        CHECK(j["zeros"][i]["newton"]["residual"].get<double>() < 1e-12);
        CHECK(j["zeros"][i]["newton_distance"].get<double>() < 1e-10);
    }

    const Result canon = run(with({"zeros"}, kCanonical));
    CHECK(canon.code == cli::kHypothesis);
    CHECK(canon.err.find("b(a+d)r") != std::string::npos);
}

TEST_CASE("verify") {
    const Result zero = run({"verify", "--epsilon", "0", "--json"});
    REQUIRE(zero.code == cli::kOk);
    const json j = zero.doc();
    CHECK(j["status"] == "accepted");
    REQUIRE(j["orbits"].size() == 2);
    CHECK(j["orbits"][0]["scaled"]["initial_state"] == json::array({-0.5, -1.0, -0.5, -0.5}));
    CHECK(j["orbits"][0]["original"]["frame"] == "original");
    CHECK(j["orbits"][1]["recurrence_scaled"].get<double>() < 1e-7);

    // the averaged zeros continue as equilibria, so nothing certifies at eps > 0
    const Result pos = run({"verify", "--epsilon", "0.01", "--json"});
    CHECK(pos.code == cli::kNumerical);
    CHECK(pos.doc()["status"] == "failed");
    CHECK(pos.doc()["failed_branch"] == 1);
    CHECK(pos.err.find("branch 1") != std::string::npos);

    CHECK(run(with({"verify", "--epsilon", "0.01"}, kCanonical)).code == cli::kHypothesis);
    CHECK(run({"verify", "--epsilon", "-0.1"}).code == cli::kInput);
}

TEST_CASE("sweep") {
    const Result single = run({"sweep", "--epsilons", "0.01", "--json"});
    // rows are written even when no orbit certifies
    CHECK(single.code == cli::kNumerical);
    const std::vector<std::string> rows = lines(single.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "epsilon,branch,distance_to_p,period_error,residual,max_multiplier_modulus,converged");
    CHECK(rows[1] == "0.01,1,,,,,false");
    CHECK(rows[2] == "0.01,2,,,,,false");
    const json summary = json::parse(single.err);
    CHECK(summary["slopes"][0].is_null());
    CHECK(summary["slopes"][1].is_null());
    CHECK(summary["manifest"]["epsilons"] == "0.01");

    const auto path = temp_dir() / "chenhopf_sweep_test.csv";
    const Result file = run({"sweep", "--epsilons", "0.01", "--out", path.string(), "--json"});
    CHECK(file.code == cli::kNumerical);
    CHECK(json::parse(file.out)["all_converged"] == false);
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(lines(buf.str()).size() == 3);
    std::filesystem::remove(path);

    CHECK(run({"sweep", "--epsilons", "0.01", "--out", "/nonexistent-dir/x.csv"}).code == cli::kInput);
    CHECK(run({"sweep", "--epsilons", "0.02,0.01"}).code == cli::kInput);
    CHECK(run({"sweep", "--epsilons", "0.01,,0.02"}).code == cli::kInput);
    CHECK(run(with({"sweep", "--epsilons", "0.01"}, kCanonical)).code == cli::kHypothesis);
}

TEST_CASE("orbit") {
    const Result r = run({"orbit", "--epsilon", "0", "--branch", "2", "--samples", "50"});
    REQUIRE(r.code == cli::kOk);
    const std::vector<std::string> rows = lines(r.out);
    REQUIRE(rows.size() == 51);
    CHECK(rows[0] == "t,x,y,z,w");
    const std::vector<double> first = fields(rows[1]);
    const std::vector<double> last = fields(rows[50]);
    CHECK(first[0] == 0.0);
    CHECK(last[0] == doctest::Approx(6.283185307179586));
    for (int k = 1; k <= 4; ++k) CHECK(std::abs(first[k] - last[k]) < 1e-6);
    CHECK(first[1] == 0.5);

    const Result orig = run({"orbit", "--epsilon", "0", "--branch", "2", "--samples", "50", "--frame", "original"});
    REQUIRE(orig.code == cli::kOk);
    const std::vector<std::string> orows = lines(orig.out);
    for (std::size_t k = 1; k < orows.size(); ++k) {
        const std::vector<double> o = fields(orows[k]);
        for (int c = 1; c <= 4; ++c) CHECK(o[c] == 0.0);
    }

    CHECK(run({"orbit", "--branch", "3"}).code == cli::kInput);
    CHECK(run({"orbit", "--frame", "polar"}).code == cli::kInput);
    CHECK(run({"orbit", "--samples", "1", "--epsilon", "0"}).code == cli::kInput);
    CHECK(run({"orbit", "--epsilon", "0.01"}).code == cli::kNumerical);
}

TEST_CASE("selftest") {
    const Result r = run({"selftest", "--json"});
    CHECK(r.code == cli::kOk);
    const json j = r.doc();
    CHECK(j["all_pass"] == true);
    CHECK(j["checks"].size() == 24);
    CHECK(j["parameter_sets"].size() == 6);

    const Result again = run({"selftest", "--json", "--seed", "42"});
    CHECK(again.doc()["parameter_sets"] == j["parameter_sets"]);
    CHECK(again.doc()["checks"] == j["checks"]);
    const Result other = run({"selftest", "--json", "--seed", "7"});
    CHECK(other.doc()["parameter_sets"] != j["parameter_sets"]);

    const Result table = run({"selftest"});
    CHECK(table.out.find("PASS default f_closed_vs_quadrature") != std::string::npos);

    const Result forced = run({"selftest", "--force-fail"});
    CHECK(forced.code == cli::kNumerical);
    CHECK(forced.err.find("forced_failure") != std::string::npos);
    CHECK(run({"selftest", "--help"}).out.find("force-fail") == std::string::npos);
}

TEST_CASE("manifest echo reproduces the numbers") {
    const json first = run({"zeros", "--json"}).doc();
    const json m = first["manifest"]["parameters"];
    const Result again = run({"zeros", "--json", "--a", cli::format_double(m["a"].get<double>()), "--b",
                              cli::format_double(m["b"].get<double>()), "--d", cli::format_double(m["d"].get<double>()),
                              "--r", cli::format_double(m["r"].get<double>())});
    json a = first, b = again.doc();
    a.erase("manifest");
    b.erase("manifest");
    CHECK(a.dump() == b.dump());
    CHECK(first["manifest"]["version"] == cli::kToolVersion);
    CHECK(first["manifest"].contains("timestamp"));
}
