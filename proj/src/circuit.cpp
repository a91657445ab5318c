#include "scred/circuit.hpp"

#include "scred/error.hpp"
#include "scred/units.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace scred {

NetlistError::NetlistError(std::vector<std::string> problems)
    : Error([&] {
          std::string msg = "invalid netlist:";
          for (const auto& p : problems) msg += "\n  - " + p;
          return msg;
      }()),
      problems_(std::move(problems)) {}

double Branch::josephson_energy() const {
    if (kind != ElementKind::junction) return 0.0;
    if (squid_flux) return value * std::cos(std::numbers::pi * *squid_flux);
    return value;
}

int CircuitSpec::mode_of(int node) const {
    if (node == 0) return -1;
    auto it = std::find(nodes.begin(), nodes.end(), node);
    if (it == nodes.end()) throw NetlistError({name + ": unknown node " + std::to_string(node)});
    return static_cast<int>(it - nodes.begin());
}

std::size_t CircuitSpec::branch_index(const std::string& branch) const {
    for (std::size_t b = 0; b < branches.size(); ++b)
        if (branches[b].name == branch) return b;
    throw NetlistError({name + ": unknown branch '" + branch + "'"});
}

namespace {

struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

int rank_of(ElementKind k) {
    switch (k) {
        case ElementKind::inductor: return 0;
        case ElementKind::junction: return 1;
        case ElementKind::capacitor: return 2;
    }
    return 3;
}

// vertex index: mode index, ground = N
int vertex(const CircuitSpec& s, int node) {
    return node == 0 ? s.mode_count() : s.mode_of(node);
}

std::string kind_name(ElementKind k) {
    switch (k) {
        case ElementKind::capacitor: return "capacitor";
        case ElementKind::inductor: return "inductor";
        case ElementKind::junction: return "junction";
    }
    return "?";
}

}  // namespace

std::vector<std::size_t> resolve_spanning_tree(const CircuitSpec& spec) {
    if (!spec.spanning_tree.empty()) return spec.spanning_tree;
    std::vector<std::size_t> order(spec.branches.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rank_of(spec.branches[a].kind) < rank_of(spec.branches[b].kind);
    });
    DisjointSet ds(spec.mode_count() + 1);
    std::vector<std::size_t> tree;
    for (auto b : order) {
        const auto& br = spec.branches[b];
        if (ds.unite(vertex(spec, br.from), vertex(spec, br.to))) tree.push_back(b);
    }
    std::sort(tree.begin(), tree.end());
    return tree;
}

void validate(const CircuitSpec& spec) {
    std::vector<std::string> problems;
    auto bad = [&](const std::string& msg) { problems.push_back(spec.name + ": " + msg); };

    std::set<int> ids;
    for (int n : spec.nodes) {
        if (n <= 0) bad("node id " + std::to_string(n) + " must be positive (0 is ground)");
        if (!ids.insert(n).second) bad("duplicate node " + std::to_string(n));
    }
    if (spec.nodes.empty()) bad("no nodes");
    auto known = [&](int n) { return n == 0 || ids.count(n) > 0; };

    std::set<std::string> names;
    for (const auto& br : spec.branches) {
        if (br.name.empty()) bad("branch without a name");
        if (!names.insert(br.name).second) bad("duplicate branch name '" + br.name + "'");
        if (!known(br.from) || !known(br.to))
            bad("branch '" + br.name + "' references an unknown node");
        if (br.from == br.to) bad("branch '" + br.name + "' is a self loop");
        if (br.kind == ElementKind::junction) {
            if (br.value <= 0) bad("junction '" + br.name + "' needs E_J > 0");
            if (br.capacitance < 0) bad("junction '" + br.name + "' has negative capacitance");
        } else if (!(br.value > 0)) {
            bad(kind_name(br.kind) + " '" + br.name + "' needs a positive value");
        }
    }
    if (!problems.empty()) throw NetlistError(problems);

    const int n = spec.mode_count();
    std::vector<std::size_t> tree;
    if (!spec.spanning_tree.empty()) {
        tree = spec.spanning_tree;
        std::set<std::size_t> seen;
        DisjointSet ds(n + 1);
        for (auto b : tree) {
            if (b >= spec.branches.size()) {
                bad("tree references branch index " + std::to_string(b));
                continue;
            }
            if (!seen.insert(b).second) bad("tree lists branch '" + spec.branches[b].name + "' twice");
            const auto& br = spec.branches[b];
            if (!ds.unite(vertex(spec, br.from), vertex(spec, br.to)))
                bad("tree contains a loop through branch '" + br.name + "'");
        }
        if (static_cast<int>(tree.size()) != n) bad("tree must have exactly one branch per non-ground node");
    } else {
        tree = resolve_spanning_tree(spec);
    }
    {
        DisjointSet ds(n + 1);
        for (const auto& br : spec.branches) ds.unite(vertex(spec, br.from), vertex(spec, br.to));
        for (int i = 0; i < n; ++i)
            if (ds.find(i) != ds.find(n)) bad("node " + std::to_string(spec.nodes[i]) + " is not connected to ground");
    }
    std::set<std::size_t> in_tree(tree.begin(), tree.end());
    for (std::size_t b = 0; b < spec.branches.size(); ++b)
        if (!in_tree.count(b) && spec.branches[b].kind == ElementKind::inductor)
            bad("inductive branch '" + spec.branches[b].name + "' lies in the closure set");
    for (const auto& [branch, flux] : spec.closure_flux) {
        auto it = std::find_if(spec.branches.begin(), spec.branches.end(),
                               [&](const Branch& b) { return b.name == branch; });
        if (it == spec.branches.end()) {
            bad("flux given for unknown branch '" + branch + "'");
            continue;
        }
        if (in_tree.count(static_cast<std::size_t>(it - spec.branches.begin())))
            bad("flux given for tree branch '" + branch + "'; only closure branches carry loop flux");
        if (!std::isfinite(flux)) bad("flux of '" + branch + "' is not finite");
    }
    std::vector<double> cap(static_cast<std::size_t>(n), 0.0);
    for (const auto& br : spec.branches) {
        double c = br.kind == ElementKind::capacitor ? br.value : br.kind == ElementKind::junction ? br.capacitance : 0.0;
        if (c <= 0) continue;
        if (br.from != 0) cap[spec.mode_of(br.from)] += c;
        if (br.to != 0) cap[spec.mode_of(br.to)] += c;
    }
    if (spec.current_bias) {
        if (!known(spec.current_bias->node) || spec.current_bias->node == 0) bad("current bias on unknown node");
        if (!(spec.current_bias->inductance > 0)) bad("current bias needs a positive inductance");
    }
    if (spec.voltage_bias) {
        if (!known(spec.voltage_bias->node) || spec.voltage_bias->node == 0) bad("voltage bias on unknown node");
        else if (spec.voltage_bias->gate_capacitance > 0) cap[spec.mode_of(spec.voltage_bias->node)] += 1;
        if (!(spec.voltage_bias->gate_capacitance > 0)) bad("voltage bias needs a positive gate capacitance");
    }
    for (int i = 0; i < n; ++i)
        if (cap[i] <= 0) bad("node " + std::to_string(spec.nodes[i]) + " has no capacitance");
    if (!problems.empty()) throw NetlistError(problems);
}

Eigen::MatrixXd build_capacitance_matrix(const CircuitSpec& spec) {
    const int n = spec.mode_count();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    auto add = [&](int a, int b, double value) {
        int i = spec.mode_of(a), j = spec.mode_of(b);
        if (i >= 0) c(i, i) += value;
        if (j >= 0) c(j, j) += value;
        if (i >= 0 && j >= 0) {
            c(i, j) -= value;
            c(j, i) -= value;
        }
    };
    for (const auto& br : spec.branches) {
        if (br.kind == ElementKind::capacitor) add(br.from, br.to, br.value);
        else if (br.kind == ElementKind::junction && br.capacitance > 0) add(br.from, br.to, br.capacitance);
    }
    if (spec.voltage_bias) add(spec.voltage_bias->node, 0, spec.voltage_bias->gate_capacitance);
    return c;
}

Eigen::MatrixXd build_inverse_inductance_matrix(const CircuitSpec& spec) {
    const int n = spec.mode_count();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    auto add = [&](int a, int b, double value) {
        int i = spec.mode_of(a), j = spec.mode_of(b);
        if (i >= 0) l(i, i) += value;
        if (j >= 0) l(j, j) += value;
        if (i >= 0 && j >= 0) {
            l(i, j) -= value;
            l(j, i) -= value;
        }
    };
    for (const auto& br : spec.branches)
        if (br.kind == ElementKind::inductor) add(br.from, br.to, 1.0 / br.value);
    if (spec.current_bias) add(spec.current_bias->node, 0, 1.0 / spec.current_bias->inductance);
    return l;
}

std::vector<BranchFlux> branch_flux_map(const CircuitSpec& spec) {
    auto tree = resolve_spanning_tree(spec);
    std::set<std::size_t> in_tree(tree.begin(), tree.end());
    DisjointSet ds(spec.mode_count() + 1);
    for (auto b : tree) ds.unite(vertex(spec, spec.branches[b].from), vertex(spec, spec.branches[b].to));
    std::vector<BranchFlux> out;
    out.reserve(spec.branches.size());
    for (std::size_t b = 0; b < spec.branches.size(); ++b) {
        const auto& br = spec.branches[b];
        if (ds.find(vertex(spec, br.from)) != ds.find(vertex(spec, br.to)))
            throw NetlistError({spec.name + ": branch '" + br.name + "' is not reachable in the spanning tree"});
        BranchFlux f;
        f.coefficients = Eigen::VectorXd::Zero(spec.mode_count());
        int i = spec.mode_of(br.from), j = spec.mode_of(br.to);
        if (i >= 0) f.coefficients(i) += 1.0;
        if (j >= 0) f.coefficients(j) -= 1.0;
        f.closure = !in_tree.count(b);
        if (f.closure) {
            auto it = spec.closure_flux.find(br.name);
            f.offset = it == spec.closure_flux.end() ? 0.0 : it->second;
        }
        out.push_back(std::move(f));
    }
    return out;
}

Eigen::MatrixXd invert_symmetric(const Eigen::MatrixXd& m, const std::string& what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    double hi = ev.cwiseAbs().maxCoeff(), lo = ev.minCoeff();
    double cond = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success || !(cond < 1e14)) {
        std::ostringstream os;
        os << what << " is not invertible (condition number " << cond << ")";
        throw SingularMatrixError(os.str(), cond);
    }
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
    return 0.5 * (inv + inv.transpose());
}

namespace {

Eigen::MatrixXd checked_capacitance_inverse(const CircuitSpec& spec) {
    Eigen::MatrixXd c = build_capacitance_matrix(spec);
    for (int i = 0; i < c.rows(); ++i)
        if (c(i, i) <= 0)
            throw SingularMatrixError(spec.name + ": node " + std::to_string(spec.nodes[i]) + " has no capacitance",
                                      std::numeric_limits<double>::infinity());
    return invert_symmetric(c, spec.name + " capacitance matrix");
}

}  // namespace

SymbolicHamiltonian assemble_symbolic_hamiltonian(const CircuitSpec& spec) {
    validate(spec);
    return assemble_symbolic_hamiltonian(spec, checked_capacitance_inverse(spec), build_inverse_inductance_matrix(spec));
}

SymbolicHamiltonian assemble_symbolic_hamiltonian(const CircuitSpec& spec, const Eigen::MatrixXd& inverse_capacitance,
                                                  const Eigen::MatrixXd& inverse_inductance) {
    SymbolicHamiltonian h;
    h.inverse_capacitance = inverse_capacitance;
    h.inverse_inductance = inverse_inductance;
    auto fluxes = branch_flux_map(spec);
    for (std::size_t b = 0; b < spec.branches.size(); ++b) {
        const auto& br = spec.branches[b];
        if (br.kind != ElementKind::junction) continue;
        CosineTerm t;
        t.branch = br.name;
        t.mode_i = spec.mode_of(br.from);
        t.mode_j = spec.mode_of(br.to);
        t.josephson_energy = br.josephson_energy();
        t.offset = fluxes[b].offset;
        h.cosines.push_back(t);
        h.constant += t.josephson_energy;
    }
    if (spec.current_bias) {
        const auto& cb = *spec.current_bias;
        // -Phi_a I = -(Phi0 I) phi_a / 2pi
        h.linear.push_back({Quadrature::phase, spec.mode_of(cb.node),
                            -units::flux_current_energy * cb.current / units::two_pi});
        h.constant += 0.5 * cb.inductance * 1e-12 * (cb.current * 1e-9) * (cb.current * 1e-9) / units::planck / 1e9;
    }
    if (spec.voltage_bias) {
        const auto& vb = *spec.voltage_bias;
        int a = spec.mode_of(vb.node);
        double ng = vb.gate_capacitance * 1e-15 * vb.voltage / (2.0 * units::elementary_charge);
        for (int i = 0; i < h.mode_count(); ++i) {
            double c = units::charging_energy * ng * inverse_capacitance(a, i);
            if (c != 0.0) h.linear.push_back({Quadrature::charge, i, c});
        }
        h.constant += 0.5 * units::charging_energy * inverse_capacitance(a, a) * ng * ng;
    }
    return h;
}

// ---- coupled systems

void validate(const CoupledSystemSpec& sys) {
    std::vector<std::string> problems;
    for (const auto& c : sys.circuits) {
        try {
            validate(c.spec);
        } catch (const NetlistError& e) {
            problems.insert(problems.end(), e.problems().begin(), e.problems().end());
            continue;
        }
        const auto& obs = c.observable;
        if (obs.kind == ObservableKind::flux_current) {
            auto it = std::find_if(c.spec.branches.begin(), c.spec.branches.end(),
                                   [&](const Branch& b) { return b.name == obs.branch; });
            if (it == c.spec.branches.end() || it->kind != ElementKind::inductor)
                problems.push_back(c.spec.name + ": current observable needs an inductive branch, got '" + obs.branch + "'");
        } else if (std::find(c.spec.nodes.begin(), c.spec.nodes.end(), obs.node) == c.spec.nodes.end()) {
            problems.push_back(c.spec.name + ": charge observable on unknown node " + std::to_string(obs.node));
        }
    }
    if (!problems.empty()) throw NetlistError(problems);
    auto branch_of = [&](const BranchRef& r) -> const Branch* {
        if (r.circuit >= sys.circuits.size()) return nullptr;
        for (const auto& b : sys.circuits[r.circuit].spec.branches)
            if (b.name == r.branch) return &b;
        return nullptr;
    };
    for (const auto& m : sys.mutual_inductances) {
        const Branch* a = branch_of(m.a);
        const Branch* b = branch_of(m.b);
        if (!a || !b) {
            problems.push_back("mutual inductance references an unknown branch");
            continue;
        }
        if (a->kind != ElementKind::inductor || b->kind != ElementKind::inductor) {
            problems.push_back("mutual inductance between '" + a->name + "' and '" + b->name +
                               "' must join inductive branches");
            continue;
        }
        if (m.a.circuit == m.b.circuit) problems.push_back("mutual inductance inside one circuit is not supported");
        if (!(std::abs(m.value) < std::sqrt(a->value * b->value)))
            problems.push_back("mutual inductance between '" + a->name + "' and '" + b->name + "' exceeds sqrt(L1 L2)");
    }
    for (const auto& c : sys.coupling_capacitances) {
        for (const NodeRef* r : {&c.a, &c.b}) {
            if (r->circuit >= sys.circuits.size()) {
                problems.push_back("coupling capacitor references circuit " + std::to_string(r->circuit));
                continue;
            }
            const auto& nodes = sys.circuits[r->circuit].spec.nodes;
            if (std::find(nodes.begin(), nodes.end(), r->node) == nodes.end())
                problems.push_back("coupling capacitor references unknown node " + std::to_string(r->node) + " of " +
                                   sys.circuits[r->circuit].spec.name);
        }
        if (c.a.circuit == c.b.circuit) problems.push_back("coupling capacitor inside one circuit; put it in the circuit");
        if (!(c.value >= 0)) problems.push_back("coupling capacitance must be non-negative");
    }
    if (!problems.empty()) throw NetlistError(problems);
}

namespace {

// Connected components of the coupling graph restricted to nonzero couplings of one kind.
std::vector<std::vector<std::size_t>> components(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    DisjointSet ds(static_cast<int>(n));
    for (auto [a, b] : edges) ds.unite(static_cast<int>(a), static_cast<int>(b));
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[ds.find(static_cast<int>(i))].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [root, members] : groups) out.push_back(std::move(members));
    std::sort(out.begin(), out.end());
    return out;
}

Eigen::VectorXd unit(int n, int i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v(i) = 1.0;
    return v;
}

}  // namespace

LoadedSystem apply_coupling_loading(const CoupledSystemSpec& sys) {
    validate(sys);
    const std::size_t nc = sys.circuits.size();
    LoadedSystem out;
    out.inverse_capacitance.resize(nc);
    out.inverse_inductance.resize(nc);
    out.inductive_branches.resize(nc);
    out.branch_inverse_inductance.resize(nc);

    // capacitive side
    std::vector<std::pair<std::size_t, std::size_t>> cap_edges;
    for (const auto& c : sys.coupling_capacitances)
        if (c.value != 0.0) cap_edges.emplace_back(c.a.circuit, c.b.circuit);
    std::vector<int> mode_offset(nc + 1, 0);
    for (const auto& group : components(nc, cap_edges)) {
        if (group.size() == 1) {
            const auto& spec = sys.circuits[group[0]].spec;
            out.inverse_capacitance[group[0]] = checked_capacitance_inverse(spec);
            continue;
        }
        std::vector<int> offset;
        int total = 0;
        for (auto ci : group) {
            offset.push_back(total);
            total += sys.circuits[ci].spec.mode_count();
        }
        auto pos = [&](std::size_t ci) {
            return offset[static_cast<std::size_t>(std::find(group.begin(), group.end(), ci) - group.begin())];
        };
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(total, total);
        for (auto ci : group) {
            auto m = build_capacitance_matrix(sys.circuits[ci].spec);
            c.block(pos(ci), pos(ci), m.rows(), m.cols()) = m;
        }
        for (const auto& cc : sys.coupling_capacitances) {
            if (cc.value == 0.0 || std::find(group.begin(), group.end(), cc.a.circuit) == group.end()) continue;
            int i = pos(cc.a.circuit) + sys.circuits[cc.a.circuit].spec.mode_of(cc.a.node);
            int j = pos(cc.b.circuit) + sys.circuits[cc.b.circuit].spec.mode_of(cc.b.node);
            c(i, i) += cc.value;
            c(j, j) += cc.value;
            c(i, j) -= cc.value;
            c(j, i) -= cc.value;
        }
        Eigen::MatrixXd inv = invert_symmetric(c, "coupled capacitance matrix");
        for (std::size_t a = 0; a < group.size(); ++a) {
            const int na = sys.circuits[group[a]].spec.mode_count();
            out.inverse_capacitance[group[a]] = inv.block(offset[a], offset[a], na, na);
            for (std::size_t b = a + 1; b < group.size(); ++b) {
                const int nb = sys.circuits[group[b]].spec.mode_count();
                for (int k = 0; k < na; ++k)
                    for (int l = 0; l < nb; ++l) {
                        double v = inv(offset[a] + k, offset[b] + l);
                        if (v == 0.0) continue;
                        out.interactions.push_back({Quadrature::charge, group[a], group[b], unit(na, k), unit(nb, l),
                                                    units::charging_energy * v});
                    }
            }
        }
    }

    // inductive side
    std::vector<std::vector<BranchFlux>> fluxes(nc);
    for (std::size_t ci = 0; ci < nc; ++ci) {
        const auto& spec = sys.circuits[ci].spec;
        fluxes[ci] = branch_flux_map(spec);
        for (std::size_t b = 0; b < spec.branches.size(); ++b)
            if (spec.branches[b].kind == ElementKind::inductor) out.inductive_branches[ci].push_back(b);
    }
    std::vector<std::pair<std::size_t, std::size_t>> ind_edges;
    for (const auto& m : sys.mutual_inductances)
        if (m.value != 0.0) ind_edges.emplace_back(m.a.circuit, m.b.circuit);
    for (const auto& group : components(nc, ind_edges)) {
        if (group.size() == 1) {
            const std::size_t ci = group[0];
            const auto& spec = sys.circuits[ci].spec;
            out.inverse_inductance[ci] = build_inverse_inductance_matrix(spec);
            const auto& ib = out.inductive_branches[ci];
            Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<int>(ib.size()), static_cast<int>(ib.size()));
            for (std::size_t k = 0; k < ib.size(); ++k) d(k, k) = 1.0 / spec.branches[ib[k]].value;
            out.branch_inverse_inductance[ci] = d;
            continue;
        }
        std::vector<int> offset;
        int total = 0;
        for (auto ci : group) {
            offset.push_back(total);
            total += static_cast<int>(out.inductive_branches[ci].size());
        }
        auto slot = [&](const BranchRef& r) {
            auto gi = static_cast<std::size_t>(std::find(group.begin(), group.end(), r.circuit) - group.begin());
            const auto& ib = out.inductive_branches[r.circuit];
            auto b = sys.circuits[r.circuit].spec.branch_index(r.branch);
            return offset[gi] + static_cast<int>(std::find(ib.begin(), ib.end(), b) - ib.begin());
        };
        Eigen::MatrixXd lb = Eigen::MatrixXd::Zero(total, total);
        for (std::size_t gi = 0; gi < group.size(); ++gi) {
            const auto& ib = out.inductive_branches[group[gi]];
            for (std::size_t k = 0; k < ib.size(); ++k)
                lb(offset[gi] + static_cast<int>(k), offset[gi] + static_cast<int>(k)) =
                    sys.circuits[group[gi]].spec.branches[ib[k]].value;
        }
        for (const auto& m : sys.mutual_inductances) {
            if (m.value == 0.0 || std::find(group.begin(), group.end(), m.a.circuit) == group.end()) continue;
            int i = slot(m.a), j = slot(m.b);
            lb(i, j) -= m.value;
            lb(j, i) -= m.value;
        }
        Eigen::MatrixXd inv = invert_symmetric(lb, "coupled branch inductance matrix");
        for (std::size_t a = 0; a < group.size(); ++a) {
            const std::size_t ci = group[a];
            const auto& spec = sys.circuits[ci].spec;
            const auto& ib = out.inductive_branches[ci];
            const int nb = static_cast<int>(ib.size());
            Eigen::MatrixXd block = inv.block(offset[a], offset[a], nb, nb);
            out.branch_inverse_inductance[ci] = block;
            Eigen::MatrixXd inc(nb, spec.mode_count());
            for (int k = 0; k < nb; ++k) inc.row(k) = fluxes[ci][ib[k]].coefficients.transpose();
            Eigen::MatrixXd node = inc.transpose() * block * inc;
            if (spec.current_bias) {
                int m = spec.mode_of(spec.current_bias->node);
                node(m, m) += 1.0 / spec.current_bias->inductance;
            }
            out.inverse_inductance[ci] = 0.5 * (node + node.transpose());
            for (std::size_t b = a + 1; b < group.size(); ++b) {
                const std::size_t cj = group[b];
                const auto& ibj = out.inductive_branches[cj];
                for (int k = 0; k < nb; ++k)
                    for (int l = 0; l < static_cast<int>(ibj.size()); ++l) {
                        double v = inv(offset[a] + k, offset[b] + l);
                        if (v == 0.0) continue;
                        out.interactions.push_back({Quadrature::phase, ci, cj, fluxes[ci][ib[k]].coefficients,
                                                    fluxes[cj][ibj[l]].coefficients, units::inductive_energy * v});
                    }
            }
        }
    }
    return out;
}

std::vector<SymbolicHamiltonian> assemble_symbolic_hamiltonians(const CoupledSystemSpec& sys,
                                                                const LoadedSystem& loaded) {
    std::vector<SymbolicHamiltonian> out;
    for (std::size_t ci = 0; ci < sys.circuits.size(); ++ci)
        out.push_back(assemble_symbolic_hamiltonian(sys.circuits[ci].spec, loaded.inverse_capacitance[ci],
                                                    loaded.inverse_inductance[ci]));
    return out;
}

}  // namespace scred
