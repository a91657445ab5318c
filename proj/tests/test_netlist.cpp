#include "helpers.hpp"

#include "scred/error.hpp"

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

using namespace scred;
using units::Dimension;

TEST_CASE("quantities and units") {
    CHECK(units::parse_quantity("2.5nH").value == doctest::Approx(2500.0));
    CHECK(units::parse_quantity("2.5nH").dimension == Dimension::inductance);
    CHECK(units::parse_quantity("5 fF").value == doctest::Approx(5.0));
    CHECK(units::parse_quantity("-3 nA").value == doctest::Approx(-3.0));
    CHECK(units::parse_quantity("0.5 Phi0").dimension == Dimension::flux);
    CHECK(units::parse_quantity("12").dimension == Dimension::dimensionless);
    CHECK(units::parse_quantity("1 MHz").value == doctest::Approx(1e-3));
    CHECK_THROWS_AS(units::parse_quantity("3 furlongs"), std::invalid_argument);
    CHECK_THROWS(units::parse_as("5 fF", Dimension::inductance));
}

TEST_CASE("energy constants") {
    // (2e)^2 / (2 * 1 fF) / h and (Phi0 / 2 pi)^2 / (2 * 1 pH) / h, in GHz
    CHECK(0.5 * units::charging_energy == doctest::Approx(77.48).epsilon(1e-3));
    CHECK(0.5 * units::inductive_energy == doctest::Approx(81734.0).epsilon(1e-3));
}

TEST_CASE("expressions") {
    std::map<std::string, units::Quantity> p{{"a", {0.43, Dimension::dimensionless}},
                                             {"EJ", {45.0, Dimension::energy}},
                                             {"L", {100.0, Dimension::inductance}}};
    CHECK(evaluate_expression("$EJ / $a", p).value == doctest::Approx(45.0 / 0.43));
    CHECK(evaluate_expression("$EJ / $a", p).dimension == Dimension::energy);
    CHECK(evaluate_expression("2*(1 nH)", p).value == doctest::Approx(2000.0));
    CHECK(evaluate_expression("-$L + 50 pH", p).value == doctest::Approx(-50.0));
    CHECK(evaluate_expression("$L / (2 nH)", p).dimension == Dimension::dimensionless);
    CHECK_THROWS(evaluate_expression("$L + 1 fF", p));
    CHECK_THROWS(evaluate_expression("$missing", p));
    CHECK_THROWS(evaluate_expression("(1 + 2", p));
}

TEST_CASE("overrides propagate to dependent parameters") {
    auto src = NetlistSource::from_file(std::string(SCRED_NETLIST_DIR) + "/cshunt.json");
    Netlist a = src.instantiate();
    Netlist b = src.instantiate({{"alpha", 0.5}});
    CHECK(a.parameters.at("EJ").value == doctest::Approx(45.0 / 0.43));
    CHECK(b.parameters.at("EJ").value == doctest::Approx(90.0));
    CHECK(b.system.circuits[0].spec.branches[1].value == doctest::Approx(90.0));
    CHECK_THROWS(src.instantiate({{"nope", 1.0}}));
}

TEST_CASE("schema errors are collected") {
    std::string text = R"({"circuits": [{"name": "x", "nodes": [1], "colour": "red", "branches": [
        {"name": "L", "nodes": [1, 0], "type": "Q", "value": "1 pH"}],
        "basis": [{"node": 1, "kind": "ho", "cutoff": 5}]}], "extra": 1})";
    try {
        testing::parse(text);
        FAIL("expected NetlistError");
    } catch (const NetlistError& e) {
        CHECK(e.problems().size() >= 3);
    }
    CHECK_THROWS_AS(testing::parse("{not json"), NetlistError);
}

TEST_CASE("document hash is FNV-1a 64") {
    std::string text = testing::lc_netlist(100.0, 50.0);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    CHECK(NetlistSource::from_text(text).hash() == buf);
}

namespace {

int run(const std::string& args) {
    std::string cmd = std::string(SCRED_CLI) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string capture(const std::string& args) {
    std::string path = (std::filesystem::temp_directory_path() / "scred_cli_capture.csv").string();
    std::string cmd = std::string(SCRED_CLI) + " " + args + " --out " + path + " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) == -1) return {};
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const std::string rf = "--netlist " + std::string(SCRED_NETLIST_DIR) + "/rf_squid.json";

}  // namespace

TEST_CASE("cli exit codes") {
    CHECK(run("") == 2);
    CHECK(run("--netlist /nonexistent.json spectrum") == 2);
    CHECK(run(rf + " spectrum -k 3") == 0);
    CHECK(run(rf + " reduce --method lr --sweep fz=0.49:0.51:3") == 0);
    CHECK(run(rf + " reduce --method lr --sweep fz=0.45:0.45:1") == 4);
    CHECK(run(rf + " reduce --method swt") == 2);
    CHECK(run(rf + " reduce --method lr --sweep nope=0:1:2") == 2);
    CHECK(run(rf + " --set EJ=-5 spectrum") == 2);
    CHECK(run(rf + " bogus") == 2);
}

TEST_CASE("cli output format") {
    std::string out = capture(rf + " reduce --method lr --sweep fz=0.49:0.51:3");
    CHECK(out.rfind("# scred 0.1.0 netlist=", 0) == 0);
    CHECK(out.find("fnv1a=") != std::string::npos);
    CHECK(out.find("fz,method,valid,h_I,h_x,h_y,h_z,E0,E1") != std::string::npos);
    CHECK(out.find("4.900000000000e-01,lr,1,") != std::string::npos);
}

TEST_CASE("cli compare reports divergence lines") {
    std::string out = capture(rf + " compare --methods lr,pr --sweep fz=0.495:0.505:5 --expand fz=0.5");
    CHECK(out.find("# max_relative_deviation") != std::string::npos);
    CHECK(out.find("# slope h_z lr") != std::string::npos);
}
