#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scred {

enum class ElementKind { capacitor, inductor, junction };

struct Branch {
    std::string name;
    int from = 0;  // node id, 0 is ground
    int to = 0;
    ElementKind kind = ElementKind::capacitor;
    double value = 0.0;        // fF, pH, or E_J in GHz
    double capacitance = 0.0;  // junction parallel capacitance, fF
    std::optional<double> squid_flux;  // compound junction loop flux, Phi0

    /// E_J cos(pi f) for a compound junction, E_J otherwise.
    double josephson_energy() const;
};

struct CurrentBias {
    int node = 0;
    double inductance = 0.0;  // pH
    double current = 0.0;     // nA
};

struct VoltageBias {
    int node = 0;
    double gate_capacitance = 0.0;  // fF
    double voltage = 0.0;           // V
};

struct CircuitSpec {
    std::string name;
    std::vector<int> nodes;  // non-ground node ids, order fixes mode order
    std::vector<Branch> branches;
    std::vector<std::size_t> spanning_tree;  // empty: automatic
    std::map<std::string, double> closure_flux;  // branch name -> Phi0
    std::optional<CurrentBias> current_bias;
    std::optional<VoltageBias> voltage_bias;

    int mode_count() const { return static_cast<int>(nodes.size()); }
    /// Mode index of a node id, -1 for ground. Throws for unknown ids.
    int mode_of(int node) const;
    std::size_t branch_index(const std::string& name) const;
};

/// Throws NetlistError listing every structural problem.
void validate(const CircuitSpec& spec);

/// User tree if given, else Kruskal over branches preferring L, then JJ, then C.
std::vector<std::size_t> resolve_spanning_tree(const CircuitSpec& spec);

Eigen::MatrixXd build_capacitance_matrix(const CircuitSpec& spec);
Eigen::MatrixXd build_inverse_inductance_matrix(const CircuitSpec& spec);

struct BranchFlux {
    Eigen::VectorXd coefficients;  // over modes
    double offset = 0.0;           // Phi0
    bool closure = false;
};

std::vector<BranchFlux> branch_flux_map(const CircuitSpec& spec);

enum class Quadrature { charge, phase };

struct CosineTerm {
    std::string branch;
    int mode_i = -1;  // -1 is ground
    int mode_j = -1;
    double josephson_energy = 0.0;
    double offset = 0.0;  // Phi0
};

/// coefficient * q_mode with q the charge (2e) or phase (rad) operator.
struct LinearTerm {
    Quadrature quadrature = Quadrature::charge;
    int mode = 0;
    double coefficient = 0.0;  // GHz
};

/// coefficient * (weights_a . q_a) (weights_b . q_b) across two circuits.
struct InteractionTerm {
    Quadrature quadrature = Quadrature::charge;
    std::size_t circuit_a = 0, circuit_b = 0;
    Eigen::VectorXd weights_a, weights_b;
    double coefficient = 0.0;  // GHz
};

/// H = 1/2 E_C n^T Cinv n + 1/2 E_L phi^T Linv phi + sum E_J (1 - cos(phi_i - phi_j + 2 pi offset))
///     + linear + constant
struct SymbolicHamiltonian {
    Eigen::MatrixXd inverse_capacitance;  // 1/fF
    Eigen::MatrixXd inverse_inductance;   // 1/pH
    std::vector<CosineTerm> cosines;
    std::vector<LinearTerm> linear;
    double constant = 0.0;  // GHz
    std::vector<InteractionTerm> interactions;

    int mode_count() const { return static_cast<int>(inverse_capacitance.rows()); }
};

SymbolicHamiltonian assemble_symbolic_hamiltonian(const CircuitSpec& spec);
SymbolicHamiltonian assemble_symbolic_hamiltonian(const CircuitSpec& spec, const Eigen::MatrixXd& inverse_capacitance,
                                                  const Eigen::MatrixXd& inverse_inductance);

/// Cholesky inverse; throws SingularMatrixError with a condition estimate.
Eigen::MatrixXd invert_symmetric(const Eigen::MatrixXd& m, const std::string& what);

// ---- coupled systems

enum class CircuitRole { qubit, coupler };
enum class ObservableKind { flux_current, island_charge };

struct Observable {
    ObservableKind kind = ObservableKind::flux_current;
    std::string branch;  // inductive branch for current
    int node = 0;        // node for charge
};

struct Subcircuit {
    CircuitSpec spec;
    CircuitRole role = CircuitRole::qubit;
    Observable observable;
};

struct BranchRef {
    std::size_t circuit = 0;
    std::string branch;
};

struct NodeRef {
    std::size_t circuit = 0;
    int node = 0;
};

struct MutualInductance {
    BranchRef a, b;
    double value = 0.0;  // pH
};

struct CouplingCapacitance {
    NodeRef a, b;
    double value = 0.0;  // fF
};

struct CoupledSystemSpec {
    std::vector<Subcircuit> circuits;
    std::vector<MutualInductance> mutual_inductances;
    std::vector<CouplingCapacitance> coupling_capacitances;
};

void validate(const CoupledSystemSpec& sys);

struct LoadedSystem {
    std::vector<Eigen::MatrixXd> inverse_capacitance;  // per circuit, 1/fF
    std::vector<Eigen::MatrixXd> inverse_inductance;   // per circuit, 1/pH (node space)
    std::vector<std::vector<std::size_t>> inductive_branches;  // per circuit, branch indices
    std::vector<Eigen::MatrixXd> branch_inverse_inductance;    // per circuit, over inductive_branches
    std::vector<InteractionTerm> interactions;
};

LoadedSystem apply_coupling_loading(const CoupledSystemSpec& sys);

/// Per-circuit symbolic Hamiltonians built from the loaded matrices.
std::vector<SymbolicHamiltonian> assemble_symbolic_hamiltonians(const CoupledSystemSpec& sys,
                                                                const LoadedSystem& loaded);

}  // namespace scred
