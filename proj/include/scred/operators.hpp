#pragma once

#include "scred/circuit.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace scred {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

/// Truncated single-mode basis: oscillator number states or charge states.
struct ModeBasis {
    enum class Kind { harmonic, charge };

    Kind kind = Kind::harmonic;
    int cutoff = 2;          // n_max (harmonic) or max |n| (charge)
    double frequency = 0.0;  // GHz, harmonic only
    double impedance = 0.0;  // Ohm, harmonic only
    double offset = 0.0;     // offset charge (2e), charge only

    static ModeBasis harmonic(int max_occupation, double frequency, double impedance);
    /// Oscillator matched to 1/2 a n^2 + 1/2 b phi^2 (a, b in GHz).
    static ModeBasis harmonic_for(int max_occupation, double a, double b);
    static ModeBasis charge(int max_charge, double offset = 0.0);

    int dimension() const;
    /// (a/b)^(1/4): phi = scale (c + c^dag)/sqrt2, n = i (c^dag - c)/(sqrt2 scale).
    double phase_scale() const;
    std::string label() const;
};

/// Throws NetlistError if the basis is malformed.
void validate(const ModeBasis& basis);

struct BasisFactor {
    std::string label;
    int dimension = 1;
};

/// Sparse complex matrix plus the tensor factors it acts on.
class OperatorMatrix {
public:
    OperatorMatrix() = default;
    OperatorMatrix(SparseMatrix m, std::vector<BasisFactor> basis);

    const SparseMatrix& matrix() const { return matrix_; }
    const std::vector<BasisFactor>& basis() const { return basis_; }
    Eigen::Index dimension() const { return matrix_.rows(); }
    Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(matrix_); }
    /// max |A - A^dag|
    double hermiticity_error() const;
    /// max |Im A_ij|
    double max_imaginary() const;
    /// "dim\n" then "row col re im" per stored entry, column-major.
    void dump(std::ostream& os) const;

private:
    SparseMatrix matrix_;
    std::vector<BasisFactor> basis_;
};

struct ModeOperator {
    enum class Kind { phase, charge, cos_phase, exp_phase };
    Kind kind = Kind::phase;
    double prefactor = 1.0;  // cos(prefactor phi + 2 pi offset), exp(i prefactor phi)
    double offset = 0.0;     // Phi0

    static ModeOperator phase() { return {Kind::phase, 1.0, 0.0}; }
    static ModeOperator charge() { return {Kind::charge, 1.0, 0.0}; }
    static ModeOperator cos_phase(double prefactor = 1.0, double offset = 0.0) {
        return {Kind::cos_phase, prefactor, offset};
    }
    static ModeOperator exp_phase(double prefactor = 1.0) { return {Kind::exp_phase, prefactor, 0.0}; }
};

/// Phase is dimensionless (2 pi Phi / Phi0), charge in units of 2e.
OperatorMatrix mode_operator(const ModeBasis& basis, ModeOperator which);

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix sparse_identity(Eigen::Index n);

/// Kronecker embedding of op on factor `mode` of full_basis.
OperatorMatrix tensor_embed(const OperatorMatrix& op, std::size_t mode, const std::vector<BasisFactor>& full_basis);

/// Embeds a product of single-factor operators (distinct factors) with identities elsewhere.
SparseMatrix embed_product(const std::vector<std::pair<std::size_t, const SparseMatrix*>>& factors,
                           const std::vector<BasisFactor>& full_basis);

std::vector<BasisFactor> basis_factors(const std::vector<ModeBasis>& bases);

/// Oscillator bases for nodes with inductance from the local quadratic part (user values win).
ModeBasis matched_basis(const SymbolicHamiltonian& sym, int mode, ModeBasis requested, bool has_frequency);

OperatorMatrix assemble_hamiltonian(const SymbolicHamiltonian& sym, const std::vector<ModeBasis>& bases);

/// sum_k weights_k q_k on one circuit's space.
OperatorMatrix quadrature_operator(const std::vector<ModeBasis>& bases, Quadrature q, const Eigen::VectorXd& weights);

/// Full tensor-product Hamiltonian of several circuits including interaction terms.
OperatorMatrix assemble_composite(const std::vector<SymbolicHamiltonian>& circuits,
                                  const std::vector<std::vector<ModeBasis>>& bases,
                                  const std::vector<InteractionTerm>& interactions);

struct CircuitEigenbasis {
    std::string name;
    std::vector<ModeBasis> bases;
    Eigen::VectorXd energies;   // ascending, at least keep
    Eigen::MatrixXcd vectors;   // columns
};

struct ProjectedSystem {
    std::vector<int> dims;  // kept states per circuit, circuit 0 most significant
    OperatorMatrix unperturbed;  // diagonal, summed energies
    OperatorMatrix interaction;
    OperatorMatrix hamiltonian;
};

ProjectedSystem project_low_energy(const std::vector<CircuitEigenbasis>& circuits, const std::vector<int>& keep,
                                   const std::vector<InteractionTerm>& interactions);

/// V^dag O V for an operator on a circuit's full space, V its first `keep` eigenvectors.
Eigen::MatrixXcd project_operator(const OperatorMatrix& op, const Eigen::MatrixXcd& vectors, int keep);

/// Embeds small dense per-circuit blocks into the composite projected space.
SparseMatrix embed_dense(const std::vector<std::pair<std::size_t, const Eigen::MatrixXcd*>>& factors,
                         const std::vector<int>& dims, double drop = 0.0);

}  // namespace scred
