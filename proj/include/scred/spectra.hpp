#pragma once

#include "scred/operators.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace scred {

struct SolverOptions {
    double tolerance = 1e-10;     // residual bound relative to ||H||
    int dense_threshold = 512;    // dense solve at or below this dimension
    int max_restarts = 2000;
    int block_size = 0;           // 0: min(k, 8)
    std::uint64_t seed = 20240917;
};

struct EigenSolution {
    Eigen::VectorXd values;      // ascending, GHz
    Eigen::MatrixXcd vectors;    // columns, unit norm, largest component real-positive
    Eigen::VectorXd residuals;   // ||H v - lambda v||
    std::vector<bool> degenerate;  // within 1e-10 ||H|| of a neighbour
    double norm_estimate = 0.0;  // Gershgorin bound on ||H||
    double tolerance = 0.0;
    int iterations = 0;          // restarts (0 for dense)
    bool dense = false;

    bool any_degenerate() const;
};

/// Upper bound on the operator norm (max absolute row sum).
double gershgorin_norm(const SparseMatrix& m);

EigenSolution lowest_eigenpairs(const OperatorMatrix& h, int k, const SolverOptions& opts = {});
EigenSolution lowest_eigenpairs(const SparseMatrix& h, int k, const SolverOptions& opts = {});
EigenSolution dense_eigenpairs(const Eigen::MatrixXcd& h, int k);

/// Phase convention shared by all solvers.
void normalize_phases(Eigen::MatrixXcd& vectors);

struct ConvergenceRow {
    std::vector<int> truncations;
    Eigen::Index dimension = 0;
    Eigen::VectorXd eigenvalues;
    double seconds = 0.0;
    bool ok = false;
    std::string error;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    /// First row from which each eigenvalue stays within tolerance of the final row; -1 if never.
    std::vector<int> converged_at;
    double tolerance = 0.0;
};

/// build(truncations) yields the Hamiltonian for one schedule row. Rows run in a pool of `workers`.
ConvergenceTable convergence_study(const std::function<OperatorMatrix(const std::vector<int>&)>& build,
                                   const std::vector<std::vector<int>>& schedule, int k, double tolerance,
                                   const SolverOptions& opts = {}, int workers = 1);

/// Runs f(i) for i in [0, n) on `workers` threads; exceptions are rethrown after all finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f);

}  // namespace scred
