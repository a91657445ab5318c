#include "scred/operators.hpp"

#include "scred/error.hpp"
#include "scred/units.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace scred {

// ---- ModeBasis

ModeBasis ModeBasis::harmonic(int max_occupation, double frequency, double impedance) {
    ModeBasis b;
    b.kind = Kind::harmonic;
    b.cutoff = max_occupation;
    b.frequency = frequency;
    b.impedance = impedance;
    return b;
}

ModeBasis ModeBasis::harmonic_for(int max_occupation, double a, double b) {
    // L/C in pH/fF = Z^2 / 1e3 and a/b = (E_C / E_L) (L/C)
    double ratio = a / b;
    double impedance = std::sqrt(1e3 * ratio * units::inductive_energy / units::charging_energy);
    return harmonic(max_occupation, std::sqrt(a * b), impedance);
}

ModeBasis ModeBasis::charge(int max_charge, double offset) {
    ModeBasis b;
    b.kind = Kind::charge;
    b.cutoff = max_charge;
    b.offset = offset;
    return b;
}

int ModeBasis::dimension() const { return kind == Kind::harmonic ? cutoff + 1 : 2 * cutoff + 1; }

double ModeBasis::phase_scale() const {
    double ratio = impedance * impedance * 1e-3 * units::charging_energy / units::inductive_energy;
    return std::pow(ratio, 0.25);
}

std::string ModeBasis::label() const {
    std::ostringstream os;
    if (kind == Kind::harmonic) os << "ho(" << cutoff << ", " << frequency << " GHz, " << impedance << " Ohm)";
    else os << "charge(" << cutoff << ", offset " << offset << ")";
    return os.str();
}

void validate(const ModeBasis& basis) {
    std::vector<std::string> problems;
    if (basis.cutoff < 2) problems.push_back("basis cutoff must be at least 2, got " + std::to_string(basis.cutoff));
    if (basis.kind == ModeBasis::Kind::harmonic) {
        if (!(basis.frequency > 0)) problems.push_back("oscillator frequency must be positive");
        if (!(basis.impedance > 0)) problems.push_back("oscillator impedance must be positive");
    }
    if (!problems.empty()) throw NetlistError(problems);
}

// ---- OperatorMatrix

OperatorMatrix::OperatorMatrix(SparseMatrix m, std::vector<BasisFactor> basis)
    : matrix_(std::move(m)), basis_(std::move(basis)) {
    matrix_.makeCompressed();
    Eigen::Index product = 1;
    for (const auto& f : basis_) product *= f.dimension;
    if (matrix_.rows() != matrix_.cols() || product != matrix_.rows())
        throw UnsupportedError("operator dimension " + std::to_string(matrix_.rows()) +
                               " does not match its basis descriptor (" + std::to_string(product) + ")");
}

double OperatorMatrix::hermiticity_error() const {
    SparseMatrix d = matrix_ - SparseMatrix(matrix_.adjoint());
    double err = 0.0;
    for (int k = 0; k < d.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(d, k); it; ++it) err = std::max(err, std::abs(it.value()));
    return err;
}

double OperatorMatrix::max_imaginary() const {
    double err = 0.0;
    for (int k = 0; k < matrix_.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) err = std::max(err, std::abs(it.value().imag()));
    return err;
}

void OperatorMatrix::dump(std::ostream& os) const {
    char buf[128];
    os << matrix_.rows() << '\n';
    for (int k = 0; k < matrix_.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) {
            std::snprintf(buf, sizeof buf, "%lld %lld %.12e %.12e\n", static_cast<long long>(it.row()),
                          static_cast<long long>(it.col()), it.value().real(), it.value().imag());
            os << buf;
        }
}

// ---- single-mode operators

namespace {

SparseMatrix to_sparse(const Eigen::MatrixXcd& m, double drop) {
    std::vector<Eigen::Triplet<Complex>> t;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (std::abs(m(i, j)) > drop) t.emplace_back(static_cast<int>(i), static_cast<int>(j), m(i, j));
    SparseMatrix s(m.rows(), m.cols());
    s.setFromTriplets(t.begin(), t.end());
    return s;
}

std::vector<BasisFactor> single(const ModeBasis& b) { return {{b.label(), b.dimension()}}; }

Eigen::MatrixXd ho_phase(const ModeBasis& b) {
    const int d = b.dimension();
    const double s = b.phase_scale() / std::sqrt(2.0);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k + 1 < d; ++k) x(k, k + 1) = x(k + 1, k) = s * std::sqrt(static_cast<double>(k + 1));
    return x;
}

Eigen::MatrixXcd ho_charge(const ModeBasis& b) {
    const int d = b.dimension();
    const double s = 1.0 / (b.phase_scale() * std::sqrt(2.0));
    Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(d, d);
    // n = i s (c^dag - c)
    for (int k = 0; k + 1 < d; ++k) {
        double v = s * std::sqrt(static_cast<double>(k + 1));
        n(k + 1, k) = Complex(0.0, v);
        n(k, k + 1) = Complex(0.0, -v);
    }
    return n;
}

Eigen::MatrixXcd ho_exp_phase(const ModeBasis& b, double prefactor) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ho_phase(b));
    Eigen::VectorXcd phases(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < phases.size(); ++k)
        phases(k) = std::polar(1.0, prefactor * es.eigenvalues()(k));
    Eigen::MatrixXcd v = es.eigenvectors().cast<Complex>();
    return v * phases.asDiagonal() * v.transpose();
}

Eigen::MatrixXcd charge_shift(const ModeBasis& b, double prefactor) {
    if (prefactor != 1.0 && prefactor != -1.0)
        throw UnsupportedError("cosine with flux prefactor " + std::to_string(prefactor) + " in a charge basis");
    const int d = b.dimension();
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(d, d);
    // e^{i phi}|n> = |n+1>
    for (int k = 0; k + 1 < d; ++k) s(k + 1, k) = 1.0;
    return prefactor > 0 ? s : Eigen::MatrixXcd(s.adjoint());
}

Eigen::MatrixXcd dense_mode_operator(const ModeBasis& b, ModeOperator which) {
    const bool ho = b.kind == ModeBasis::Kind::harmonic;
    switch (which.kind) {
        case ModeOperator::Kind::phase:
            if (!ho) throw UnsupportedError("phase operator is not available in a charge basis");
            return which.prefactor * ho_phase(b).cast<Complex>();
        case ModeOperator::Kind::charge: {
            if (ho) return which.prefactor * ho_charge(b);
            Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(b.dimension(), b.dimension());
            for (int k = 0; k < b.dimension(); ++k) n(k, k) = which.prefactor * (k - b.cutoff + b.offset);
            return n;
        }
        case ModeOperator::Kind::exp_phase:
            return ho ? ho_exp_phase(b, which.prefactor) : charge_shift(b, which.prefactor);
        case ModeOperator::Kind::cos_phase: {
            Eigen::MatrixXcd e = ho ? ho_exp_phase(b, which.prefactor) : charge_shift(b, which.prefactor);
            Eigen::MatrixXcd t = std::polar(1.0, units::two_pi * which.offset) * e;
            return 0.5 * (t + t.adjoint());
        }
    }
    return {};
}

double drop_for(const Eigen::MatrixXcd& m) { return 1e-14 * std::max(1.0, m.cwiseAbs().maxCoeff()); }

}  // namespace

OperatorMatrix mode_operator(const ModeBasis& basis, ModeOperator which) {
    validate(basis);
    Eigen::MatrixXcd m = dense_mode_operator(basis, which);
    return {to_sparse(m, drop_for(m)), single(basis)};
}

SparseMatrix sparse_identity(Eigen::Index n) {
    SparseMatrix id(n, n);
    id.setIdentity();
    return id;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
    SparseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    std::vector<Eigen::Triplet<Complex>> t;
    t.reserve(static_cast<std::size_t>(a.nonZeros()) * static_cast<std::size_t>(b.nonZeros()));
    for (int ka = 0; ka < a.outerSize(); ++ka)
        for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia)
            for (int kb = 0; kb < b.outerSize(); ++kb)
                for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib)
                    t.emplace_back(static_cast<int>(ia.row() * b.rows() + ib.row()),
                                   static_cast<int>(ia.col() * b.cols() + ib.col()), ia.value() * ib.value());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

SparseMatrix embed_product(const std::vector<std::pair<std::size_t, const SparseMatrix*>>& factors,
                           const std::vector<BasisFactor>& full_basis) {
    std::vector<const SparseMatrix*> slot(full_basis.size(), nullptr);
    for (auto [idx, m] : factors) {
        if (idx >= full_basis.size()) throw UnsupportedError("mode index " + std::to_string(idx) + " out of range");
        if (m->rows() != full_basis[idx].dimension)
            throw UnsupportedError("operator dimension does not match mode " + std::to_string(idx));
        if (slot[idx]) throw UnsupportedError("two operators on mode " + std::to_string(idx));
        slot[idx] = m;
    }
    // identities between factors are merged so each kron is with one block
    SparseMatrix out;
    Eigen::Index pending = 1;
    bool started = false;
    for (std::size_t k = 0; k < full_basis.size(); ++k) {
        if (!slot[k]) {
            pending *= full_basis[k].dimension;
            continue;
        }
        SparseMatrix left = started ? kron(out, sparse_identity(pending)) : sparse_identity(pending);
        out = kron(left, *slot[k]);
        started = true;
        pending = 1;
    }
    if (!started) return sparse_identity(pending);
    if (pending > 1) out = kron(out, sparse_identity(pending));
    return out;
}

OperatorMatrix tensor_embed(const OperatorMatrix& op, std::size_t mode, const std::vector<BasisFactor>& full_basis) {
    return {embed_product({{mode, &op.matrix()}}, full_basis), full_basis};
}

std::vector<BasisFactor> basis_factors(const std::vector<ModeBasis>& bases) {
    std::vector<BasisFactor> out;
    for (const auto& b : bases) out.push_back({b.label(), b.dimension()});
    return out;
}

ModeBasis matched_basis(const SymbolicHamiltonian& sym, int mode, ModeBasis requested, bool has_frequency) {
    if (requested.kind == ModeBasis::Kind::charge || has_frequency) return requested;
    double a = units::charging_energy * sym.inverse_capacitance(mode, mode);
    double b = units::inductive_energy * sym.inverse_inductance(mode, mode);
    if (!(b > 0))
        throw NetlistError({"mode " + std::to_string(mode) +
                            " has no inductive term; give an oscillator frequency and impedance or use a charge basis"});
    return ModeBasis::harmonic_for(requested.cutoff, a, b);
}

// ---- assembly

namespace {

struct ModeCache {
    const ModeBasis* basis;
    std::map<int, SparseMatrix> cache;  // keyed by operator id

    const SparseMatrix& get(int id) {
        auto it = cache.find(id);
        if (it != cache.end()) return it->second;
        Eigen::MatrixXcd m;
        switch (id) {
            case 0: m = dense_mode_operator(*basis, ModeOperator::charge()); break;
            case 1: m = dense_mode_operator(*basis, ModeOperator::phase()); break;
            case 2: {
                Eigen::MatrixXcd n = dense_mode_operator(*basis, ModeOperator::charge());
                m = n * n;
                break;
            }
            case 3: {
                Eigen::MatrixXcd p = dense_mode_operator(*basis, ModeOperator::phase());
                m = p * p;
                break;
            }
            case 4: m = dense_mode_operator(*basis, ModeOperator::exp_phase(1.0)); break;
            case 5: m = dense_mode_operator(*basis, ModeOperator::exp_phase(-1.0)); break;
        }
        return cache.emplace(id, to_sparse(m, drop_for(m))).first->second;
    }
};

constexpr int op_charge = 0, op_phase = 1, op_charge2 = 2, op_phase2 = 3, op_exp = 4, op_expm = 5;

void check_quadratic(const SymbolicHamiltonian& sym, const std::vector<ModeBasis>& bases) {
    if (static_cast<int>(bases.size()) != sym.mode_count())
        throw UnsupportedError("got " + std::to_string(bases.size()) + " bases for " +
                               std::to_string(sym.mode_count()) + " modes");
    for (const auto& b : bases) validate(b);
    for (int i = 0; i < sym.mode_count(); ++i)
        if (bases[i].kind == ModeBasis::Kind::charge && sym.inverse_inductance.row(i).cwiseAbs().maxCoeff() > 0)
            throw UnsupportedError("mode " + std::to_string(i) + " has an inductive term but a charge basis");
}

// Adds one circuit's terms into acc; modes of the circuit start at factor `first`.
void add_circuit_terms(SparseMatrix& acc, const SymbolicHamiltonian& sym, std::vector<ModeCache>& cache,
                       std::size_t first, const std::vector<BasisFactor>& full) {
    const int n = sym.mode_count();
    auto mode = [&](int i) { return first + static_cast<std::size_t>(i); };
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double c = sym.inverse_capacitance(i, j);
            if (c != 0.0) {
                double w = units::charging_energy * c * (i == j ? 0.5 : 1.0);
                if (i == j) acc += w * embed_product({{mode(i), &cache[i].get(op_charge2)}}, full);
                else acc += w * embed_product({{mode(i), &cache[i].get(op_charge)}, {mode(j), &cache[j].get(op_charge)}}, full);
            }
            double l = sym.inverse_inductance(i, j);
            if (l != 0.0) {
                double w = units::inductive_energy * l * (i == j ? 0.5 : 1.0);
                if (i == j) acc += w * embed_product({{mode(i), &cache[i].get(op_phase2)}}, full);
                else acc += w * embed_product({{mode(i), &cache[i].get(op_phase)}, {mode(j), &cache[j].get(op_phase)}}, full);
            }
        }
    }
    for (const auto& t : sym.cosines) {
        std::vector<std::pair<std::size_t, const SparseMatrix*>> f;
        if (t.mode_i >= 0) f.emplace_back(mode(t.mode_i), &cache[t.mode_i].get(op_exp));
        if (t.mode_j >= 0) f.emplace_back(mode(t.mode_j), &cache[t.mode_j].get(op_expm));
        SparseMatrix e = std::polar(1.0, units::two_pi * t.offset) * embed_product(f, full);
        acc -= 0.5 * t.josephson_energy * (e + SparseMatrix(e.adjoint()));
    }
    for (const auto& t : sym.linear) {
        int id = t.quadrature == Quadrature::charge ? op_charge : op_phase;
        acc += t.coefficient * embed_product({{mode(t.mode), &cache[t.mode].get(id)}}, full);
    }
}

SparseMatrix hermitian_part(const SparseMatrix& m) {
    SparseMatrix h = 0.5 * (m + SparseMatrix(m.adjoint()));
    double ref = 0.0;
    for (int k = 0; k < h.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(h, k); it; ++it) ref = std::max(ref, std::abs(it.value()));
    h.prune([&](Eigen::Index, Eigen::Index, const Complex& v) { return std::abs(v) > 1e-15 * ref; });
    return h;
}

}  // namespace

OperatorMatrix assemble_hamiltonian(const SymbolicHamiltonian& sym, const std::vector<ModeBasis>& bases) {
    return assemble_composite({sym}, {bases}, {});
}

OperatorMatrix quadrature_operator(const std::vector<ModeBasis>& bases, Quadrature q, const Eigen::VectorXd& weights) {
    if (static_cast<std::size_t>(weights.size()) != bases.size())
        throw UnsupportedError("quadrature weights do not match the mode count");
    auto full = basis_factors(bases);
    Eigen::Index dim = 1;
    for (const auto& f : full) dim *= f.dimension;
    SparseMatrix acc(dim, dim);
    for (std::size_t i = 0; i < bases.size(); ++i) {
        if (weights(static_cast<Eigen::Index>(i)) == 0.0) continue;
        auto which = q == Quadrature::charge ? ModeOperator::charge() : ModeOperator::phase();
        Eigen::MatrixXcd m = dense_mode_operator(bases[i], which);
        SparseMatrix s = to_sparse(m, drop_for(m));
        acc += weights(static_cast<Eigen::Index>(i)) * embed_product({{i, &s}}, full);
    }
    return {acc, full};
}

OperatorMatrix assemble_composite(const std::vector<SymbolicHamiltonian>& circuits,
                                  const std::vector<std::vector<ModeBasis>>& bases,
                                  const std::vector<InteractionTerm>& interactions) {
    if (circuits.size() != bases.size()) throw UnsupportedError("one basis list per circuit is required");
    std::vector<BasisFactor> full;
    std::vector<std::size_t> first;
    std::vector<std::vector<ModeCache>> caches(circuits.size());
    for (std::size_t c = 0; c < circuits.size(); ++c) {
        check_quadratic(circuits[c], bases[c]);
        first.push_back(full.size());
        for (const auto& b : bases[c]) {
            full.push_back({b.label(), b.dimension()});
            caches[c].push_back({&b, {}});
        }
    }
    Eigen::Index dim = 1;
    for (const auto& f : full) dim *= f.dimension;
    SparseMatrix acc(dim, dim);
    double constant = 0.0;
    for (std::size_t c = 0; c < circuits.size(); ++c) {
        add_circuit_terms(acc, circuits[c], caches[c], first[c], full);
        constant += circuits[c].constant;
    }
    for (const auto& t : interactions) {
        int id = t.quadrature == Quadrature::charge ? op_charge : op_phase;
        for (Eigen::Index k = 0; k < t.weights_a.size(); ++k)
            for (Eigen::Index l = 0; l < t.weights_b.size(); ++l) {
                double w = t.coefficient * t.weights_a(k) * t.weights_b(l);
                if (w == 0.0) continue;
                std::size_t mk = first[t.circuit_a] + static_cast<std::size_t>(k);
                std::size_t ml = first[t.circuit_b] + static_cast<std::size_t>(l);
                acc += w * embed_product({{mk, &caches[t.circuit_a][k].get(id)}, {ml, &caches[t.circuit_b][l].get(id)}}, full);
            }
    }
    if (constant != 0.0) acc += constant * sparse_identity(dim);
    return {hermitian_part(acc), full};
}

// ---- projection

Eigen::MatrixXcd project_operator(const OperatorMatrix& op, const Eigen::MatrixXcd& vectors, int keep) {
    Eigen::MatrixXcd v = vectors.leftCols(keep);
    Eigen::MatrixXcd ov = op.matrix() * v;
    Eigen::MatrixXcd p = v.adjoint() * ov;
    return 0.5 * (p + p.adjoint());
}

SparseMatrix embed_dense(const std::vector<std::pair<std::size_t, const Eigen::MatrixXcd*>>& factors,
                         const std::vector<int>& dims, double drop) {
    std::vector<BasisFactor> full;
    for (int d : dims) full.push_back({"", d});
    std::vector<SparseMatrix> sparse;
    sparse.reserve(factors.size());
    for (auto [idx, m] : factors) sparse.push_back(to_sparse(*m, drop));
    std::vector<std::pair<std::size_t, const SparseMatrix*>> f;
    for (std::size_t k = 0; k < factors.size(); ++k) f.emplace_back(factors[k].first, &sparse[k]);
    return embed_product(f, full);
}

ProjectedSystem project_low_energy(const std::vector<CircuitEigenbasis>& circuits, const std::vector<int>& keep,
                                   const std::vector<InteractionTerm>& interactions) {
    if (keep.size() != circuits.size()) throw UnsupportedError("one keep count per circuit is required");
    ProjectedSystem out;
    std::vector<BasisFactor> labels;
    for (std::size_t c = 0; c < circuits.size(); ++c) {
        if (keep[c] < 1 || keep[c] > circuits[c].vectors.cols() || keep[c] > circuits[c].energies.size())
            throw UnsupportedError("circuit " + circuits[c].name + ": keep count " + std::to_string(keep[c]) +
                                   " exceeds the " + std::to_string(circuits[c].vectors.cols()) + " available eigenpairs");
        out.dims.push_back(keep[c]);
        labels.push_back({circuits[c].name + " eigenstates", keep[c]});
    }
    Eigen::Index dim = 1;
    for (int d : out.dims) dim *= d;

    Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index s = 0; s < dim; ++s) {
        Eigen::Index rest = s;
        for (std::size_t c = circuits.size(); c-- > 0;) {
            diag(s) += circuits[c].energies(rest % out.dims[c]);
            rest /= out.dims[c];
        }
    }
    SparseMatrix h0(dim, dim);
    {
        std::vector<Eigen::Triplet<Complex>> t;
        for (Eigen::Index s = 0; s < dim; ++s) t.emplace_back(static_cast<int>(s), static_cast<int>(s), diag(s));
        h0.setFromTriplets(t.begin(), t.end());
    }

    SparseMatrix hint(dim, dim);
    for (const auto& term : interactions) {
        Eigen::MatrixXcd a = project_operator(
            quadrature_operator(circuits[term.circuit_a].bases, term.quadrature, term.weights_a),
            circuits[term.circuit_a].vectors, keep[term.circuit_a]);
        Eigen::MatrixXcd b = project_operator(
            quadrature_operator(circuits[term.circuit_b].bases, term.quadrature, term.weights_b),
            circuits[term.circuit_b].vectors, keep[term.circuit_b]);
        double drop = 1e-15 * std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
        hint += term.coefficient * embed_dense({{term.circuit_a, &a}, {term.circuit_b, &b}}, out.dims, drop);
    }
    hint = hermitian_part(hint);
    out.unperturbed = OperatorMatrix(h0, labels);
    out.interaction = OperatorMatrix(hint, labels);
    out.hamiltonian = OperatorMatrix(SparseMatrix(h0 + hint), labels);
    return out;
}

}  // namespace scred
