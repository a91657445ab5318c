#pragma once

#include "scred/circuit.hpp"
#include "scred/operators.hpp"
#include "scred/spectra.hpp"

#include <Eigen/Dense>

#include <string>

namespace scred {

struct PauliCoefficients1Q {
    double identity = 0.0, x = 0.0, y = 0.0, z = 0.0;  // GHz

    Eigen::Matrix2cd matrix() const;
    /// h_I -/+ sqrt(h_x^2 + h_y^2 + h_z^2), ascending.
    Eigen::Vector2d eigenvalues() const;
};

PauliCoefficients1Q decompose_1q(const Eigen::Matrix2cd& h);

struct ComputationalBasis1Q {
    Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();  // columns u0, u1 in the {E0, E1} basis
    double o0 = 0.0, o1 = 0.0;  // observable eigenvalues of |0>, |1> (nA or 2e)
    ObservableKind kind = ObservableKind::flux_current;
    bool valid = false;
    std::string reason;
    double theta = 0.0, phi1 = 0.0, phi2 = 0.0;
    bool degenerate = false;
};

struct LocalOptions {
    double charge_tolerance = 0.01;  // on |o1 - o0| - 1, in units of 2e
};

struct LocalReduction {
    PauliCoefficients1Q coefficients;
    ComputationalBasis1Q basis;
    Eigen::Vector2d energies;
    Eigen::Matrix2cd observable;  // O_p in the energy basis
    Eigen::Matrix2cd hamiltonian;  // H_q in the computational basis
};

/// Local-basis reduction from the lowest two energies and O_p = P0 O P0 in the energy basis.
/// Throws ReductionValidityError when the observable does not define the qubit states.
LocalReduction reduce_two_level(const Eigen::Vector2d& energies, const Eigen::Matrix2cd& observable,
                                ObservableKind kind, const LocalOptions& opts = {}, bool degenerate = false);

LocalReduction local_reduction(const EigenSolution& eig, const OperatorMatrix& observable, ObservableKind kind,
                               const LocalOptions& opts = {});
LocalReduction local_reduction(const OperatorMatrix& h, const OperatorMatrix& observable, ObservableKind kind,
                               const SolverOptions& solver = {}, const LocalOptions& opts = {});

/// Fixes |0>, |1> = (|E0> +/- |E1>)/sqrt2 at the expansion point with <E0|O|E1> real positive.
class PerturbativeReducer {
public:
    PerturbativeReducer(const EigenSolution& expansion_point, const OperatorMatrix& observable);

    /// h_i = Tr(H_q sigma_i)/2 with H_q the full H projected on the fixed states.
    PauliCoefficients1Q evaluate(const OperatorMatrix& h) const;
    /// <E0|O|E1> at the expansion point (I_p for a current observable).
    double persistent_current() const { return persistent_current_; }
    const Eigen::MatrixXcd& states() const { return states_; }

private:
    Eigen::MatrixXcd states_;
    double persistent_current_ = 0.0;
};

struct InstantonParams {
    double inductive_energy = 0.0;  // U_L = E_L / L, GHz
    double screening = 0.0;         // beta_L = E_J / U_L
    double capacitance = 0.0;       // fF
    double external_phase = 0.0;    // 2 pi f

    static InstantonParams rf_squid(double josephson_energy, double inductance_pH, double capacitance_fF,
                                    double flux);
};

struct InstantonResult {
    PauliCoefficients1Q coefficients;
    double phi_left = 0.0, phi_middle = 0.0, phi_right = 0.0;
    double frequency_left = 0.0, frequency_right = 0.0;  // GHz
    double energy_left = 0.0, energy_right = 0.0, barrier = 0.0;
    double action_left = 0.0, action_right = 0.0;  // units of hbar
    double delta_left = 0.0, delta_right = 0.0;
    double asymmetry = 1.0;
};

double instanton_potential(const InstantonParams& p, double phi);
InstantonResult instanton_reduction(const InstantonParams& p);

/// <e_i|O_p|e_j> with e_i the eigenvectors of H_q (both 2x2 in the computational basis).
Eigen::Matrix2cd reduced_expectations(const Eigen::Matrix2cd& hq, const Eigen::Matrix2cd& observable);
/// Same for a local reduction: O_p is taken to the computational basis first.
Eigen::Matrix2cd reduced_expectations(const LocalReduction& r);

}  // namespace scred
