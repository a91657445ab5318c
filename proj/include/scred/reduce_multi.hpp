#pragma once

#include "scred/operators.hpp"
#include "scred/pauli.hpp"
#include "scred/reduce_single.hpp"
#include "scred/spectra.hpp"

#include <string>
#include <vector>

namespace scred {

/// Qubit subspace of a projected composite space (circuit 0 is the most significant factor).
struct QubitRegister {
    std::vector<CircuitRole> roles;
    std::vector<int> dims;
    std::vector<std::size_t> qubits;    // circuit indices
    std::vector<std::size_t> couplers;  // circuit indices
    std::vector<LocalReduction> local;  // per qubit, unperturbed reduction
    std::vector<Eigen::Index> subspace;  // composite index of each P0 energy-product state, qubit 1 most significant
    Eigen::MatrixXcd computational;      // column a: computational state |a> on the P0 energy-product basis

    int qubit_count() const { return static_cast<int>(qubits.size()); }
    Eigen::Index dimension() const;
    /// Columns are the computational states embedded in the composite space.
    Eigen::MatrixXcd computational_states() const;
    OperatorMatrix projector() const;
    /// sigma_which (x, y, z) on qubit q, acting on the qubit subspace only.
    OperatorMatrix sigma(int qubit, char which) const;
};

/// energies: per circuit, unperturbed ascending; observables: per circuit, in the kept eigenbasis.
QubitRegister build_register(const std::vector<CircuitRole>& roles, const std::vector<Eigen::VectorXd>& energies,
                             const std::vector<Eigen::MatrixXcd>& observables,
                             const std::vector<ObservableKind>& kinds, const LocalOptions& opts = {});

struct GapLine {
    std::string label;
    double value = 0.0;
    bool pass = false;
};

struct GapCheck {
    std::vector<GapLine> lines;
    double implied_gap = 0.0;
    bool pass = false;
};

/// |dE_{i,2} - sum_j dE_{j,1}| and |dE_{ci,1} - sum_j dE_{j,1}| against `threshold`.
GapCheck gap_check(const std::vector<Eigen::VectorXd>& qubit_spectra, const std::vector<Eigen::VectorXd>& coupler_spectra,
                   double threshold);

struct ReductionDiagnostics {
    double gap = 0.0;                 // H0 gap between the qubit subspace and the rest
    double interaction_norm = 0.0;    // ||H_int||_op, power iteration
    double projector_distance = 0.0;  // ||P - P0||_op
    bool interaction_condition = false;  // ||H_int|| < gap / 2
    bool projector_condition = false;    // ||P - P0|| < 1
    double unitarity_error = -1.0;       // ||U^dag U - I||, full route only
    double conjugation_error = -1.0;     // ||U P U^dag - P0||, full route only
    GapCheck gap_lines;
};

struct MultiReduction {
    std::string method;
    PauliHamiltonian coefficients;
    Eigen::MatrixXcd hamiltonian;  // computational basis
    Eigen::VectorXd circuit_energies;  // lowest 2^N of the composite Hamiltonian
    ReductionDiagnostics diagnostics;
    std::vector<std::string> warnings;
};

/// ||A||_op by power iteration on A^dag A.
double operator_norm(const SparseMatrix& a, int steps = 20, double tolerance = 1e-6, std::uint64_t seed = 7);

/// Principal square root of a diagonalizable matrix with spectrum off the negative real axis.
Eigen::MatrixXcd principal_sqrt(const Eigen::MatrixXcd& m);

struct SwtOptions {
    enum class Route { automatic, polar, square_root };
    Route route = Route::automatic;
    Eigen::Index square_root_limit = 400;  // automatic: full square root up to this dimension
    bool require_interaction_condition = false;
};

/// low: lowest 2^N eigenpairs of h_full.
MultiReduction schrieffer_wolff_reduction(const EigenSolution& low, const OperatorMatrix& h_full,
                                          const OperatorMatrix& h0, const QubitRegister& reg,
                                          const SwtOptions& opts = {});

struct RotationOptions {
    double normality_threshold = 0.5;  // minimum sum_i (R1)_ij^2 per column
    bool strict = false;               // throw instead of warning
};

MultiReduction approximate_rotation_reduction(const EigenSolution& low, const OperatorMatrix& h_full,
                                              const OperatorMatrix& h0, const QubitRegister& reg,
                                              const RotationOptions& opts = {});

/// observables: per qubit, embedded in the composite space. reference: per qubit |o0|.
MultiReduction diagonal_reduction(const EigenSolution& low, const std::vector<SparseMatrix>& observables,
                                  const std::vector<double>& reference, double threshold = 0.1);

/// Per-qubit phase rotation nulling one-local y terms, then a pi rotation making one-local x <= 0.
Eigen::MatrixXcd gauge_fix(const Eigen::MatrixXcd& hq, int qubits);

struct NonstoquasticCheck {
    bool nonstoquastic = false;
    std::string failed_clause;  // empty when nonstoquastic
    std::string witness;
};

/// Two-qubit criterion: one-local x and z nonzero and |h_yy| > |h_xx|, |h_zz|.
NonstoquasticCheck nonstoquastic_check(const PauliHamiltonian& h, double negligible = 0.05);

struct MixedRemoval {
    PauliHamiltonian coefficients;
    double angle1 = 0.0, angle2 = 0.0;  // y-rotation angles
    int iterations = 0;
};

MixedRemoval remove_mixed_two_local(const PauliHamiltonian& h, double tolerance = 1e-12);

/// Probabilities of the 2^N current-sign patterns (bit 0 = |0> side) for a composite state.
/// observables: per qubit circuit in its kept eigenbasis.
std::vector<double> computational_state_probabilities(const Eigen::VectorXcd& state, const QubitRegister& reg,
                                                      const std::vector<Eigen::MatrixXcd>& observables);

/// Sign-continuity pass: per-qubit pi z-rotations minimizing the distance to `previous`.
PauliHamiltonian align_signs(const PauliHamiltonian& h, const PauliHamiltonian& previous);

}  // namespace scred
