#include "helpers.hpp"

#include "scred/error.hpp"

#include <doctest.h>

#include <random>
#include <stdexcept>

using namespace scred;

namespace {

SparseMatrix random_banded(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<Eigen::Triplet<Complex>> t;
    for (int i = 0; i < n; ++i) {
        t.emplace_back(i, i, Complex(0.05 * i + g(rng), 0.0));
        for (int d = 1; d <= 3 && i + d < n; ++d) {
            Complex z(g(rng), g(rng));
            t.emplace_back(i, i + d, z);
            t.emplace_back(i + d, i, std::conj(z));
        }
    }
    SparseMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

}  // namespace

TEST_CASE("block Lanczos agrees with the dense solver") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        SparseMatrix h = random_banded(900, seed);
        EigenSolution it = lowest_eigenpairs(h, 6);
        CHECK_FALSE(it.dense);
        EigenSolution d = dense_eigenpairs(Eigen::MatrixXcd(h), 6);
        for (int i = 0; i < 6; ++i) CHECK(it.values(i) == doctest::Approx(d.values(i)).epsilon(1e-9));
        CHECK(it.residuals.maxCoeff() <= 1e-8 * it.norm_estimate);
    }
}

TEST_CASE("exactly degenerate levels are all found") {
    const int n = 700;
    std::vector<Eigen::Triplet<Complex>> t;
    for (int i = 0; i < n; ++i) t.emplace_back(i, i, Complex(i < 3 ? -1.0 : double(i / 2), 0.0));
    SparseMatrix h(n, n);
    h.setFromTriplets(t.begin(), t.end());
    EigenSolution e = lowest_eigenpairs(h, 4);
    CHECK(e.values(0) == doctest::Approx(-1.0));
    CHECK(e.values(2) == doctest::Approx(-1.0));
    CHECK(e.values(3) == doctest::Approx(1.0));
    CHECK(e.any_degenerate());
}

TEST_CASE("eigenvector phase convention") {
    SparseMatrix h = random_banded(40, 9);
    EigenSolution e = lowest_eigenpairs(h, 3);
    for (int k = 0; k < 3; ++k) {
        Eigen::Index arg;
        e.vectors.col(k).cwiseAbs().maxCoeff(&arg);
        CHECK(std::abs(e.vectors(arg, k).imag()) < 1e-14);
        CHECK(e.vectors(arg, k).real() > 0);
    }
}

TEST_CASE("seeded runs are reproducible") {
    SparseMatrix h = random_banded(800, 5);
    EigenSolution a = lowest_eigenpairs(h, 4), b = lowest_eigenpairs(h, 4);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("convergence study marks converged rows") {
    auto net = testing::parse(testing::lc_netlist(1000.0, 100.0));
    auto table = convergence_study([&](const std::vector<int>& t) { return build_circuit_model(net, 0, t).hamiltonian; },
                                   {{4}, {8}, {16}, {24}}, 3, 1e-9, {}, 2);
    REQUIRE(table.rows.size() == 4);
    for (const auto& r : table.rows) CHECK(r.ok);
    CHECK(table.rows[1].dimension == 9);
    double f = table.rows.back().eigenvalues(1) - table.rows.back().eigenvalues(0);
    CHECK(table.rows.back().eigenvalues(2) - table.rows.back().eigenvalues(0) == doctest::Approx(2 * f).epsilon(1e-10));
    for (int c : table.converged_at) {
        CHECK(c >= 0);
        CHECK(c <= 2);
    }
}

TEST_CASE("parallel_for rethrows") {
    CHECK_THROWS_AS(parallel_for(8, 4,
                                 [](std::size_t i) {
                                     if (i == 5) throw std::runtime_error("x");
                                 }),
                    std::runtime_error);
    std::vector<int> hit(16, 0);
    parallel_for(16, 3, [&](std::size_t i) { hit[i] = 1; });
    CHECK(std::count(hit.begin(), hit.end(), 1) == 16);
}
