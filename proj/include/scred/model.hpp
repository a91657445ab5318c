#pragma once

#include "scred/netlist.hpp"
#include "scred/reduce_multi.hpp"
#include "scred/reduce_single.hpp"
#include "scred/spectra.hpp"

#include <optional>
#include <vector>

namespace scred {

/// One circuit quantized in its truncated node basis.
struct CircuitModel {
    std::string name;
    SymbolicHamiltonian symbolic;
    std::vector<ModeBasis> bases;
    OperatorMatrix hamiltonian;
    OperatorMatrix observable;  // loop current (nA) or island charge (2e)
    ObservableKind kind = ObservableKind::flux_current;
    CircuitRole role = CircuitRole::qubit;
};

/// Loop current in nA for an inductive branch with (loaded) inverse inductance `inverse_inductance` 1/pH.
OperatorMatrix current_operator(const CircuitSpec& spec, const std::vector<ModeBasis>& bases,
                                const std::string& branch, double inverse_inductance);

/// truncations: optional per-mode cutoff override.
CircuitModel build_circuit_model(const Netlist& net, std::size_t circuit = 0,
                                 const std::vector<int>& truncations = {});

/// Several circuits projected onto their low-energy eigenstates.
struct CompositeModel {
    std::vector<CircuitModel> circuits;  // loaded
    std::vector<EigenSolution> spectra;  // per circuit, at least keep pairs
    std::vector<int> keep;
    std::vector<InteractionTerm> interactions;
    ProjectedSystem projected;
    std::vector<Eigen::MatrixXcd> observables;  // per circuit, in the kept eigenbasis
    QubitRegister reg;
    std::vector<SparseMatrix> qubit_observables;  // per qubit, composite space

    std::vector<double> reference_observables() const;  // per qubit |o0|
};

CompositeModel build_composite_model(const Netlist& net, const SolverOptions& solver = {}, int workers = 1,
                                     const LocalOptions& local = {});

/// Instanton parameters of a single-node rf-SQUID netlist.
InstantonParams instanton_parameters(const CircuitModel& model);

}  // namespace scred
