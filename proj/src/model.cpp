#include "scred/model.hpp"

#include "scred/error.hpp"

#include <cmath>

namespace scred {

OperatorMatrix current_operator(const CircuitSpec& spec, const std::vector<ModeBasis>& bases,
                                const std::string& branch, double inverse_inductance) {
    auto flux = branch_flux_map(spec);
    const BranchFlux& bf = flux.at(spec.branch_index(branch));
    double scale = units::two_pi * units::inductive_energy * inverse_inductance / units::flux_current_energy;
    OperatorMatrix phi = quadrature_operator(bases, Quadrature::phase, bf.coefficients);
    return OperatorMatrix(SparseMatrix(scale * phi.matrix()), phi.basis());
}

namespace {

std::vector<ModeBasis> resolve_bases(const SymbolicHamiltonian& sym, const CircuitSetup& setup,
                                     const std::vector<int>& truncations) {
    if (!truncations.empty() && truncations.size() != setup.bases.size())
        throw UnsupportedError("expected " + std::to_string(setup.bases.size()) + " truncations, got " +
                               std::to_string(truncations.size()));
    std::vector<ModeBasis> bases;
    for (std::size_t m = 0; m < setup.bases.size(); ++m) {
        ModeBasis b = setup.bases[m];
        if (!truncations.empty()) b.cutoff = truncations[m];
        b = matched_basis(sym, static_cast<int>(m), b, setup.explicit_oscillator[m]);
        validate(b);
        bases.push_back(b);
    }
    return bases;
}

CircuitModel make_model(const Netlist& net, std::size_t c, const SymbolicHamiltonian& sym,
                        double branch_inverse_inductance, const std::vector<int>& truncations) {
    const Subcircuit& sc = net.system.circuits.at(c);
    CircuitModel m;
    m.name = sc.spec.name;
    m.symbolic = sym;
    m.symbolic.interactions.clear();
    m.bases = resolve_bases(m.symbolic, net.setups.at(c), truncations);
    m.hamiltonian = assemble_hamiltonian(m.symbolic, m.bases);
    m.kind = sc.observable.kind;
    m.role = sc.role;
    if (m.kind == ObservableKind::flux_current) {
        if (sc.observable.branch.empty())
            throw NetlistError({sc.spec.name + ": a current observable needs an inductive branch"});
        m.observable = current_operator(sc.spec, m.bases, sc.observable.branch, branch_inverse_inductance);
    } else {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(sc.spec.mode_count());
        w(sc.spec.mode_of(sc.observable.node)) = 1.0;
        m.observable = quadrature_operator(m.bases, Quadrature::charge, w);
    }
    return m;
}

double branch_inverse(const LoadedSystem& loaded, const CoupledSystemSpec& sys, std::size_t c) {
    const Subcircuit& sc = sys.circuits[c];
    if (sc.observable.kind != ObservableKind::flux_current || sc.observable.branch.empty()) return 0.0;
    std::size_t b = sc.spec.branch_index(sc.observable.branch);
    const auto& list = loaded.inductive_branches[c];
    for (std::size_t k = 0; k < list.size(); ++k)
        if (list[k] == b) return loaded.branch_inverse_inductance[c](static_cast<Eigen::Index>(k),
                                                                    static_cast<Eigen::Index>(k));
    throw NetlistError({sc.spec.name + ": observable branch '" + sc.observable.branch + "' is not an inductor"});
}

}  // namespace

CircuitModel build_circuit_model(const Netlist& net, std::size_t circuit, const std::vector<int>& truncations) {
    if (net.system.circuits.size() == 1) {
        const Subcircuit& sc = net.system.circuits[0];
        double inv = 0.0;
        if (sc.observable.kind == ObservableKind::flux_current && !sc.observable.branch.empty()) {
            const Branch& b = sc.spec.branches.at(sc.spec.branch_index(sc.observable.branch));
            if (b.kind != ElementKind::inductor)
                throw NetlistError({sc.spec.name + ": observable branch '" + b.name + "' is not an inductor"});
            inv = 1.0 / b.value;
        }
        return make_model(net, 0, assemble_symbolic_hamiltonian(sc.spec), inv, truncations);
    }
    LoadedSystem loaded = apply_coupling_loading(net.system);
    auto syms = assemble_symbolic_hamiltonians(net.system, loaded);
    return make_model(net, circuit, syms.at(circuit), branch_inverse(loaded, net.system, circuit), truncations);
}

std::vector<double> CompositeModel::reference_observables() const {
    std::vector<double> out;
    for (const auto& l : reg.local) out.push_back(std::abs(l.basis.o0));
    return out;
}

CompositeModel build_composite_model(const Netlist& net, const SolverOptions& solver, int workers,
                                     const LocalOptions& local) {
    const auto& sys = net.system;
    const std::size_t n = sys.circuits.size();
    LoadedSystem loaded = apply_coupling_loading(sys);
    auto syms = assemble_symbolic_hamiltonians(sys, loaded);

    CompositeModel out;
    out.circuits.resize(n);
    out.spectra.resize(n);
    out.keep.resize(n);
    out.interactions = loaded.interactions;
    for (std::size_t c = 0; c < n; ++c) {
        out.keep[c] = net.setups[c].keep;
        out.circuits[c] = make_model(net, c, syms[c], branch_inverse(loaded, sys, c), {});
        if (out.keep[c] >= out.circuits[c].hamiltonian.dimension())
            throw UnsupportedError(out.circuits[c].name + ": keep must be below the basis dimension");
    }
    parallel_for(n, workers, [&](std::size_t c) {
        out.spectra[c] = lowest_eigenpairs(out.circuits[c].hamiltonian, out.keep[c], solver);
    });

    std::vector<CircuitEigenbasis> eig(n);
    std::vector<CircuitRole> roles;
    std::vector<Eigen::VectorXd> energies;
    std::vector<ObservableKind> kinds;
    for (std::size_t c = 0; c < n; ++c) {
        eig[c] = {out.circuits[c].name, out.circuits[c].bases, out.spectra[c].values, out.spectra[c].vectors};
        out.observables.push_back(project_operator(out.circuits[c].observable, out.spectra[c].vectors, out.keep[c]));
        roles.push_back(out.circuits[c].role);
        energies.push_back(out.spectra[c].values);
        kinds.push_back(out.circuits[c].kind);
    }
    out.projected = project_low_energy(eig, out.keep, out.interactions);
    out.reg = build_register(roles, energies, out.observables, kinds, local);
    for (std::size_t q : out.reg.qubits)
        out.qubit_observables.push_back(embed_dense({{q, &out.observables[q]}}, out.keep));
    return out;
}

InstantonParams instanton_parameters(const CircuitModel& model) {
    const auto& sym = model.symbolic;
    if (sym.mode_count() != 1 || sym.cosines.size() != 1 || !sym.linear.empty())
        throw UnsupportedError("the instanton method needs a single-node rf-SQUID with one junction and no bias source");
    double linv = sym.inverse_inductance(0, 0);
    if (!(linv > 0)) throw UnsupportedError("the instanton method needs an inductive loop");
    const CosineTerm& cos = sym.cosines[0];
    double sign = cos.mode_i == 0 ? 1.0 : -1.0;
    InstantonParams p;
    p.inductive_energy = units::inductive_energy * linv;
    p.screening = cos.josephson_energy / p.inductive_energy;
    p.capacitance = 1.0 / sym.inverse_capacitance(0, 0);
    p.external_phase = sign * units::two_pi * cos.offset;
    return p;
}

}  // namespace scred
