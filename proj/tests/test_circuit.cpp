#include "helpers.hpp"

#include "scred/error.hpp"

#include <doctest.h>

using namespace scred;

namespace {

CircuitSpec two_node() {
    CircuitSpec s;
    s.name = "t";
    s.nodes = {1, 2};
    s.branches = {
        {"C1", 1, 0, ElementKind::capacitor, 10.0, 0.0, {}},
        {"C2", 2, 0, ElementKind::capacitor, 20.0, 0.0, {}},
        {"C12", 1, 2, ElementKind::capacitor, 5.0, 0.0, {}},
        {"L1", 1, 0, ElementKind::inductor, 100.0, 0.0, {}},
        {"L12", 1, 2, ElementKind::inductor, 50.0, 0.0, {}},
        {"J", 2, 0, ElementKind::junction, 30.0, 2.0, {}},
    };
    return s;
}

}  // namespace

TEST_CASE("capacitance matrix from branch capacitances") {
    Eigen::MatrixXd c = build_capacitance_matrix(two_node());
    // junction capacitance adds to node 2
    Eigen::Matrix2d expected;
    expected << 15.0, -5.0, -5.0, 27.0;
    CHECK((c - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("inverse inductance matrix") {
    Eigen::MatrixXd l = build_inverse_inductance_matrix(two_node());
    Eigen::Matrix2d expected;
    expected << 1.0 / 100 + 1.0 / 50, -1.0 / 50, -1.0 / 50, 1.0 / 50;
    CHECK((l - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("automatic spanning tree prefers inductors") {
    auto tree = resolve_spanning_tree(two_node());
    REQUIRE(tree.size() == 2);
    for (auto b : tree) CHECK(two_node().branches[b].kind == ElementKind::inductor);
}

TEST_CASE("validation collects every problem") {
    CircuitSpec s = two_node();
    s.branches.push_back({"loop", 1, 1, ElementKind::capacitor, 1.0, 0.0, {}});
    s.branches.push_back({"far", 1, 9, ElementKind::capacitor, 1.0, 0.0, {}});
    try {
        validate(s);
        FAIL("expected NetlistError");
    } catch (const NetlistError& e) {
        CHECK(e.problems().size() >= 2);
    }
}

TEST_CASE("inductor in the closure set is rejected") {
    CircuitSpec s = two_node();
    s.spanning_tree = {s.branch_index("C1"), s.branch_index("C2")};
    CHECK_THROWS_AS(validate(s), NetlistError);
    CHECK_THROWS_AS(assemble_symbolic_hamiltonian(s), NetlistError);
}

TEST_CASE("closure flux enters the cosine offset") {
    CircuitSpec s;
    s.name = "rf";
    s.nodes = {1};
    s.branches = {{"L", 1, 0, ElementKind::inductor, 2500.0, 0.0, {}}, {"J", 1, 0, ElementKind::junction, 125.0, 5.0, {}}};
    s.closure_flux = {{"J", 0.3}};
    auto h = assemble_symbolic_hamiltonian(s);
    REQUIRE(h.cosines.size() == 1);
    CHECK(std::abs(h.cosines[0].offset) == doctest::Approx(0.3));
    CHECK(h.constant == doctest::Approx(125.0));
}

TEST_CASE("compound junction energy") {
    Branch b{"J", 1, 0, ElementKind::junction, 100.0, 1.0, 1.0 / 3.0};
    CHECK(b.josephson_energy() == doctest::Approx(50.0));
}

TEST_CASE("capacitive loading closed form") {
    auto net = testing::parse(R"({
      "circuits": [
        {"name": "a", "nodes": [1], "branches": [
          {"name": "L", "nodes": [1, 0], "type": "L", "value": "231.9 pH"},
          {"name": "C", "nodes": [1, 0], "type": "C", "value": "119.5 fF"}],
         "basis": [{"node": 1, "kind": "ho", "cutoff": 10}], "keep": 3},
        {"name": "b", "nodes": [1], "branches": [
          {"name": "L", "nodes": [1, 0], "type": "L", "value": "239 pH"},
          {"name": "C", "nodes": [1, 0], "type": "C", "value": "116.4 fF"}],
         "basis": [{"node": 1, "kind": "ho", "cutoff": 10}], "keep": 3}],
      "couplings": [
        {"name": "M", "type": "mutual", "a": "a.L", "b": "b.L", "value": "20 pH"},
        {"name": "C12", "type": "capacitor", "a": "a.1", "b": "b.1", "value": "132 fF"}]})");
    LoadedSystem loaded = apply_coupling_loading(net.system);
    // series combination of C12 and the other island
    double c1 = 119.5 + 116.4 * 132.0 / (116.4 + 132.0);
    CHECK(1.0 / loaded.inverse_capacitance[0](0, 0) == doctest::Approx(c1).epsilon(1e-12));
    CHECK(c1 == doctest::Approx(181.35).epsilon(1e-3));
    double l1 = 231.9 - 20.0 * 20.0 / 239.0;
    CHECK(1.0 / loaded.branch_inverse_inductance[0](0, 0) == doctest::Approx(l1).epsilon(1e-12));
    REQUIRE(loaded.interactions.size() == 2);
}

TEST_CASE("mutual inductance beyond sqrt(L1 L2) is rejected") {
    std::string text = R"({
      "circuits": [
        {"name": "a", "nodes": [1], "branches": [
          {"name": "L", "nodes": [1, 0], "type": "L", "value": "100 pH"},
          {"name": "C", "nodes": [1, 0], "type": "C", "value": "50 fF"}],
         "basis": [{"node": 1, "kind": "ho", "cutoff": 5}], "keep": 3},
        {"name": "b", "nodes": [1], "branches": [
          {"name": "L", "nodes": [1, 0], "type": "L", "value": "100 pH"},
          {"name": "C", "nodes": [1, 0], "type": "C", "value": "50 fF"}],
         "basis": [{"node": 1, "kind": "ho", "cutoff": 5}], "keep": 3}],
      "couplings": [{"name": "M", "type": "mutual", "a": "a.L", "b": "b.L", "value": "150 pH"}]})";
    CHECK_THROWS_AS(testing::parse(text), NetlistError);
}
