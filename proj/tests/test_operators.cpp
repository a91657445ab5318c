#include "helpers.hpp"

#include "scred/error.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace scred;

TEST_CASE("LC oscillator levels") {
    const double l = 1000.0, c = 100.0;
    auto net = testing::parse(testing::lc_netlist(l, c));
    CircuitModel m = build_circuit_model(net);
    EigenSolution eig = lowest_eigenpairs(m.hamiltonian, 5);
    // f = 1 / (2 pi sqrt(L C)) in SI units
    double f = 1.0 / (2.0 * std::numbers::pi * std::sqrt(l * 1e-12 * c * 1e-15)) / 1e9;
    CHECK(eig.values(0) == doctest::Approx(0.5 * f).epsilon(1e-10));
    for (int n = 1; n < 5; ++n) CHECK(eig.values(n) - eig.values(0) == doctest::Approx(n * f).epsilon(1e-10));
}

TEST_CASE("oscillator canonical commutator away from the cutoff") {
    ModeBasis b = ModeBasis::harmonic_for(20, 3.0, 7.0);
    Eigen::MatrixXcd phi = mode_operator(b, ModeOperator::phase()).dense();
    Eigen::MatrixXcd n = mode_operator(b, ModeOperator::charge()).dense();
    Eigen::MatrixXcd comm = phi * n - n * phi;
    Eigen::MatrixXcd block = comm.topLeftCorner(20, 20) - Complex(0, 1) * Eigen::MatrixXcd::Identity(20, 20);
    CHECK(block.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("charge basis operators") {
    ModeBasis b = ModeBasis::charge(3, 0.25);
    CHECK(b.dimension() == 7);
    Eigen::MatrixXcd n = mode_operator(b, ModeOperator::charge()).dense();
    Eigen::MatrixXcd c = mode_operator(b, ModeOperator::cos_phase()).dense();
    for (int k = 0; k < 7; ++k) CHECK(n(k, k).real() == doctest::Approx(k - 3 + 0.25));
    for (int k = 0; k + 1 < 7; ++k) {
        CHECK(std::abs(c(k, k + 1)) == doctest::Approx(0.5));
        CHECK(std::abs(c(k + 1, k)) == doctest::Approx(0.5));
    }
    CHECK(std::abs(c(0, 0)) == doctest::Approx(0.0));
}

TEST_CASE("Cooper pair box against a directly built tridiagonal matrix") {
    const double ej = 10.0, cap = 20.0, ng = 0.2;
    auto net = testing::parse(R"({"circuits": [{"name": "cpb", "nodes": [1], "branches": [
        {"name": "J", "nodes": [1, 0], "type": "JJ", "EJ": "10 GHz", "C": "20 fF"}],
        "observable": {"kind": "charge", "node": 1},
        "basis": [{"node": 1, "kind": "charge", "cutoff": 12, "offset": 0.2}]}]})");
    CircuitModel m = build_circuit_model(net);
    EigenSolution eig = lowest_eigenpairs(m.hamiltonian, 4);

    const double a = units::charging_energy / cap;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(25, 25);
    for (int k = 0; k < 25; ++k) {
        double q = k - 12 - ng;
        h(k, k) = 0.5 * a * q * q + ej;
        if (k + 1 < 25) h(k, k + 1) = h(k + 1, k) = -0.5 * ej;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    for (int i = 0; i < 4; ++i) CHECK(eig.values(i) == doctest::Approx(es.eigenvalues()(i)).epsilon(1e-10));
}

TEST_CASE("tensor embedding order") {
    std::vector<BasisFactor> basis{{"a", 2}, {"b", 3}};
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Random(3, 3);
    SparseMatrix sm = m.sparseView();
    Eigen::MatrixXcd full = Eigen::MatrixXcd(embed_product({{1, &sm}}, basis));
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(6, 6);
    expected.topLeftCorner(3, 3) = m;
    expected.bottomRightCorner(3, 3) = m;
    CHECK((full - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(embed_product({{0, &sm}}, basis), UnsupportedError);
}

TEST_CASE("assembled Hamiltonians are Hermitian") {
    for (const char* f : {"rf_squid.json", "cshunt.json", "two_qubit.json"}) {
        Netlist net = NetlistSource::from_file(std::string(SCRED_NETLIST_DIR) + "/" + f).instantiate();
        for (std::size_t c = 0; c < net.system.circuits.size(); ++c) {
            std::vector<int> t;
            if (std::string(f) == "cshunt.json") t = {4, 5, 5};
            CircuitModel m = build_circuit_model(net, c, t);
            CHECK(m.hamiltonian.hermiticity_error() < 1e-12);
            CHECK(m.observable.hermiticity_error() < 1e-12);
        }
    }
}

TEST_CASE("oscillator basis without an inductive term is refused") {
    auto text = R"({"circuits": [{"name": "x", "nodes": [1], "branches": [
        {"name": "J", "nodes": [1, 0], "type": "JJ", "EJ": "10 GHz", "C": "20 fF"}],
        "observable": {"kind": "charge", "node": 1},
        "basis": [{"node": 1, "kind": "ho", "cutoff": 12}]}]})";
    CHECK_THROWS_AS(build_circuit_model(testing::parse(text)), NetlistError);
}
