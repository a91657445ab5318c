#include "scred/reduce_multi.hpp"

#include "scred/error.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace scred {

namespace {

Eigen::Index product(const std::vector<int>& dims) {
    Eigen::Index p = 1;
    for (int d : dims) p *= d;
    return p;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace

// ---- register

Eigen::Index QubitRegister::dimension() const { return product(dims); }

QubitRegister build_register(const std::vector<CircuitRole>& roles, const std::vector<Eigen::VectorXd>& energies,
                             const std::vector<Eigen::MatrixXcd>& observables,
                             const std::vector<ObservableKind>& kinds, const LocalOptions& opts) {
    if (roles.size() != energies.size() || roles.size() != observables.size() || roles.size() != kinds.size())
        throw UnsupportedError("register inputs must have one entry per circuit");
    QubitRegister reg;
    reg.roles = roles;
    for (std::size_t c = 0; c < roles.size(); ++c) {
        reg.dims.push_back(static_cast<int>(observables[c].rows()));
        if (roles[c] == CircuitRole::qubit) {
            if (observables[c].rows() < 2) throw UnsupportedError("a qubit circuit needs at least two kept states");
            reg.qubits.push_back(c);
            reg.local.push_back(reduce_two_level(energies[c].head(2), observables[c].topLeftCorner(2, 2), kinds[c], opts));
        } else {
            reg.couplers.push_back(c);
        }
    }
    const int n = reg.qubit_count();
    if (n == 0) throw UnsupportedError("the register has no qubits");
    const Eigen::Index r = Eigen::Index{1} << n;
    reg.subspace.resize(static_cast<std::size_t>(r));
    for (Eigen::Index a = 0; a < r; ++a) {
        std::vector<int> level(roles.size(), 0);
        for (int q = 0; q < n; ++q) level[reg.qubits[q]] = static_cast<int>((a >> (n - 1 - q)) & 1);
        Eigen::Index idx = 0;
        for (std::size_t c = 0; c < roles.size(); ++c) idx = idx * reg.dims[c] + level[c];
        reg.subspace[static_cast<std::size_t>(a)] = idx;
    }
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Ones(1, 1);
    for (int q = 0; q < n; ++q) {
        const Eigen::Matrix2cd& u = reg.local[q].basis.u;
        Eigen::MatrixXcd next(c.rows() * 2, c.cols() * 2);
        for (Eigen::Index i = 0; i < c.rows(); ++i)
            for (Eigen::Index j = 0; j < c.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = c(i, j) * u;
        c = next;
    }
    reg.computational = c;
    return reg;
}

Eigen::MatrixXcd QubitRegister::computational_states() const {
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(dimension(), computational.cols());
    for (std::size_t k = 0; k < subspace.size(); ++k) s.row(subspace[k]) = computational.row(static_cast<Eigen::Index>(k));
    return s;
}

namespace {

SparseMatrix place_block(const Eigen::MatrixXcd& block, const std::vector<Eigen::Index>& index, Eigen::Index dim) {
    std::vector<Eigen::Triplet<Complex>> t;
    for (Eigen::Index i = 0; i < block.rows(); ++i)
        for (Eigen::Index j = 0; j < block.cols(); ++j)
            if (block(i, j) != Complex(0.0))
                t.emplace_back(static_cast<int>(index[static_cast<std::size_t>(i)]),
                               static_cast<int>(index[static_cast<std::size_t>(j)]), block(i, j));
    SparseMatrix s(dim, dim);
    s.setFromTriplets(t.begin(), t.end());
    return s;
}

std::vector<BasisFactor> labels(const QubitRegister& reg) {
    std::vector<BasisFactor> out;
    for (std::size_t c = 0; c < reg.dims.size(); ++c) out.push_back({"circuit " + std::to_string(c), reg.dims[c]});
    return out;
}

}  // namespace

OperatorMatrix QubitRegister::projector() const {
    const Eigen::Index r = static_cast<Eigen::Index>(subspace.size());
    return {place_block(Eigen::MatrixXcd::Identity(r, r), subspace, dimension()), labels(*this)};
}

OperatorMatrix QubitRegister::sigma(int qubit, char which) const {
    const int n = qubit_count();
    if (qubit < 0 || qubit >= n) throw UnsupportedError("qubit index out of range");
    std::string label(static_cast<std::size_t>(n), 'I');
    label[static_cast<std::size_t>(qubit)] = which;
    Eigen::MatrixXcd s = pauli_string(n, PauliHamiltonian::index(label));
    Eigen::MatrixXcd block = computational * s * computational.adjoint();
    return {place_block(block, subspace, dimension()), labels(*this)};
}

// ---- gap check

GapCheck gap_check(const std::vector<Eigen::VectorXd>& qubit_spectra, const std::vector<Eigen::VectorXd>& coupler_spectra,
                   double threshold) {
    GapCheck g;
    double sum1 = 0.0;
    for (const auto& s : qubit_spectra) {
        if (s.size() < 3) throw UnsupportedError("gap check needs three levels per qubit");
        sum1 += s(1) - s(0);
    }
    for (std::size_t i = 0; i < qubit_spectra.size(); ++i) {
        const auto& s = qubit_spectra[i];
        double v = std::abs((s(2) - s(0)) - sum1);
        g.lines.push_back({"qubit " + std::to_string(i + 1) + ": |dE_2 - sum dE_1|", v, v >= threshold});
    }
    for (std::size_t i = 0; i < coupler_spectra.size(); ++i) {
        const auto& s = coupler_spectra[i];
        if (s.size() < 2) throw UnsupportedError("gap check needs two levels per coupler");
        double v = std::abs((s(1) - s(0)) - sum1);
        g.lines.push_back({"coupler " + std::to_string(i + 1) + ": |dE_1 - sum dE_1|", v, v >= threshold});
    }
    g.implied_gap = std::numeric_limits<double>::infinity();
    g.pass = true;
    for (const auto& l : g.lines) {
        g.implied_gap = std::min(g.implied_gap, l.value);
        g.pass = g.pass && l.pass;
    }
    return g;
}

// ---- linear algebra helpers

double operator_norm(const SparseMatrix& a, int steps, double tolerance, std::uint64_t seed) {
    if (a.rows() == 0) return 0.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(a.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = g(rng);
    v.normalize();
    double est = 0.0;
    SparseMatrix ah = a.adjoint();
    for (int s = 0; s < steps; ++s) {
        Eigen::VectorXcd w = ah * (a * v);
        double nw = w.norm();
        if (nw == 0.0) return 0.0;
        double next = std::sqrt(nw);
        v = w / nw;
        bool done = std::abs(next - est) <= tolerance * next;
        est = next;
        if (done) break;
    }
    return est;
}

Eigen::MatrixXcd principal_sqrt(const Eigen::MatrixXcd& m) { return m.sqrt(); }

Eigen::MatrixXcd gauge_fix(const Eigen::MatrixXcd& hq, int qubits) {
    PauliHamiltonian h = pauli_decompose(hq);
    double scale = 0.0;
    for (double c : h.coefficients) scale = std::max(scale, std::abs(c));
    Eigen::VectorXcd d = Eigen::VectorXcd::Ones(hq.rows());
    for (int q = 0; q < qubits; ++q) {
        std::string lx(static_cast<std::size_t>(qubits), 'I'), ly = lx;
        lx[static_cast<std::size_t>(q)] = 'x';
        ly[static_cast<std::size_t>(q)] = 'y';
        double x = h[lx], y = h[ly];
        double alpha = std::hypot(x, y) > 1e-13 * scale ? std::numbers::pi + std::atan2(y, x) : 0.0;
        Complex ph = std::polar(1.0, alpha);
        for (Eigen::Index a = 0; a < d.size(); ++a)
            if ((a >> (qubits - 1 - q)) & 1) d(a) *= ph;
    }
    Eigen::MatrixXcd out = d.asDiagonal().inverse() * hq * d.asDiagonal();
    return 0.5 * (out + out.adjoint());
}

// ---- Schrieffer-Wolff

namespace {

void check_low(const EigenSolution& low, const QubitRegister& reg, const OperatorMatrix& h_full) {
    const Eigen::Index r = Eigen::Index{1} << reg.qubit_count();
    if (low.values.size() < r) throw NumericError("need " + std::to_string(r) + " eigenpairs of the composite Hamiltonian");
    if (h_full.dimension() != reg.dimension() || low.vectors.rows() != reg.dimension())
        throw UnsupportedError("composite Hamiltonian and register dimensions differ");
}

ReductionDiagnostics diagnose(const Eigen::MatrixXcd& v, const OperatorMatrix& h_full, const OperatorMatrix& h0,
                              const QubitRegister& reg, Eigen::JacobiSVD<Eigen::MatrixXcd>* svd_out) {
    ReductionDiagnostics d;
    const auto& sub = reg.subspace;
    Eigen::VectorXd diag = Eigen::VectorXd(h0.matrix().diagonal().real());
    std::vector<bool> in(static_cast<std::size_t>(diag.size()), false);
    double max_in = -std::numeric_limits<double>::infinity(), min_out = std::numeric_limits<double>::infinity();
    for (auto i : sub) {
        in[static_cast<std::size_t>(i)] = true;
        max_in = std::max(max_in, diag(i));
    }
    for (Eigen::Index i = 0; i < diag.size(); ++i)
        if (!in[static_cast<std::size_t>(i)]) min_out = std::min(min_out, diag(i));
    d.gap = min_out - max_in;
    SparseMatrix hint = h_full.matrix() - h0.matrix();
    d.interaction_norm = operator_norm(hint);
    d.interaction_condition = d.interaction_norm < 0.5 * d.gap;

    Eigen::MatrixXcd o(static_cast<Eigen::Index>(sub.size()), v.cols());
    for (std::size_t k = 0; k < sub.size(); ++k) o.row(static_cast<Eigen::Index>(k)) = v.row(sub[k]);
    *svd_out = Eigen::JacobiSVD<Eigen::MatrixXcd>(o, Eigen::ComputeFullU | Eigen::ComputeFullV);
    double smin = svd_out->singularValues().minCoeff();
    d.projector_distance = std::sqrt(std::max(0.0, 1.0 - std::min(1.0, smin * smin)));
    d.projector_condition = d.projector_distance < 1.0 - 1e-12;
    return d;
}

}  // namespace

MultiReduction schrieffer_wolff_reduction(const EigenSolution& low, const OperatorMatrix& h_full,
                                          const OperatorMatrix& h0, const QubitRegister& reg, const SwtOptions& opts) {
    check_low(low, reg, h_full);
    const int n = reg.qubit_count();
    const Eigen::Index r = Eigen::Index{1} << n;
    Eigen::MatrixXcd v = low.vectors.leftCols(r);
    Eigen::VectorXd e = low.values.head(r);

    MultiReduction out;
    out.method = "swt";
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd;
    out.diagnostics = diagnose(v, h_full, h0, reg, &svd);
    auto& d = out.diagnostics;
    if (!(d.gap > 0)) throw ValidityError("qubit subspace is not the low-energy subspace of H0");
    if (!d.projector_condition)
        throw ValidityError("||P - P0|| = " + fmt(d.projector_distance) + " >= 1: direct rotation undefined");
    if (!d.interaction_condition) {
        std::string msg = "||H_int|| = " + fmt(d.interaction_norm) + " exceeds half the gap " + fmt(0.5 * d.gap);
        if (opts.require_interaction_condition) throw ValidityError(msg);
        out.warnings.push_back(msg);
    }

    // T = W^dag U V restricted to the two subspaces
    Eigen::MatrixXcd t = svd.matrixU() * svd.matrixV().adjoint();
    bool full = opts.route == SwtOptions::Route::square_root ||
                (opts.route == SwtOptions::Route::automatic && reg.dimension() <= opts.square_root_limit);
    if (full) {
        const Eigen::Index dim = reg.dimension();
        Eigen::MatrixXcd p = v * v.adjoint();
        Eigen::MatrixXcd p0 = reg.projector().dense();
        Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
        Eigen::MatrixXcd u = principal_sqrt((2.0 * p0 - id) * (2.0 * p - id));
        d.unitarity_error = (u.adjoint() * u - id).operatorNorm();
        d.conjugation_error = (u * p * u.adjoint() - p0).operatorNorm();
        Eigen::MatrixXcd uv = u * v;
        for (std::size_t k = 0; k < reg.subspace.size(); ++k) t.row(static_cast<Eigen::Index>(k)) = uv.row(reg.subspace[k]);
    }
    Eigen::MatrixXcd energy_basis = t * e.cast<Complex>().asDiagonal() * t.adjoint();
    Eigen::MatrixXcd comp = reg.computational.adjoint() * energy_basis * reg.computational;
    out.hamiltonian = gauge_fix(comp, n);
    out.coefficients = pauli_decompose(out.hamiltonian);
    out.circuit_energies = e;
    return out;
}

// ---- approximate rotation

MultiReduction approximate_rotation_reduction(const EigenSolution& low, const OperatorMatrix& h_full,
                                              const OperatorMatrix& h0, const QubitRegister& reg,
                                              const RotationOptions& opts) {
    check_low(low, reg, h_full);
    const double scale = std::max(1.0, max_abs(Eigen::MatrixXcd(h_full.matrix().diagonal())));
    if (h_full.max_imaginary() > 1e-12 * scale)
        throw UnsupportedError("approximate rotation needs a real circuit Hamiltonian");
    const int n = reg.qubit_count();
    const Eigen::Index r = Eigen::Index{1} << n;
    MultiReduction out;
    out.method = "rot";
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd;
    out.diagnostics = diagnose(low.vectors.leftCols(r), h_full, h0, reg, &svd);

    Eigen::VectorXd diag = Eigen::VectorXd(h0.matrix().diagonal().real());
    std::vector<Eigen::Index> order = reg.subspace;
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return diag(a) < diag(b); });

    Eigen::MatrixXd r1(r, r);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < r; ++j) {
            Complex z = std::conj(low.vectors(order[static_cast<std::size_t>(j)], i));
            if (std::abs(z.imag()) > 1e-8) throw UnsupportedError("complex eigenvector overlaps in approximate rotation");
            r1(i, j) = z.real();
        }
    for (Eigen::Index j = 0; j < r; ++j) {
        double norm2 = r1.col(j).squaredNorm();
        if (norm2 < opts.normality_threshold) {
            std::string msg = "R1 column " + std::to_string(j) + " has squared norm " + fmt(norm2);
            if (opts.strict) throw ValidityError(msg);
            out.warnings.push_back(msg);
        }
    }
    // eigenvector signs: largest overlap of each row positive
    for (Eigen::Index i = 0; i < r; ++i) {
        Eigen::Index arg;
        r1.row(i).cwiseAbs().maxCoeff(&arg);
        if (r1(i, arg) < 0) r1.row(i) = -r1.row(i);
    }
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index k = 0; k < j; ++k) r1.col(j) -= r1.col(k).dot(r1.col(j)) * r1.col(k);
        double nrm = r1.col(j).norm();
        if (nrm < 1e-12) throw NumericError("R1 columns are linearly dependent");
        r1.col(j) /= nrm;
    }
    Eigen::MatrixXcd r2(r, r);
    for (Eigen::Index j = 0; j < r; ++j) {
        auto it = std::find(reg.subspace.begin(), reg.subspace.end(), order[static_cast<std::size_t>(j)]);
        Eigen::Index p = it - reg.subspace.begin();
        for (Eigen::Index a = 0; a < r; ++a) r2(a, j) = std::conj(reg.computational(p, a));
    }
    Eigen::MatrixXcd mid = (r1.transpose() * low.values.head(r).asDiagonal() * r1).cast<Complex>();
    Eigen::MatrixXcd comp = r2 * mid * r2.adjoint();
    out.hamiltonian = gauge_fix(comp, n);
    out.coefficients = pauli_decompose(out.hamiltonian);
    out.circuit_energies = low.values.head(r);
    return out;
}

// ---- diagonal method

MultiReduction diagonal_reduction(const EigenSolution& low, const std::vector<SparseMatrix>& observables,
                                  const std::vector<double>& reference, double threshold) {
    const int n = static_cast<int>(observables.size());
    if (n == 0 || reference.size() != observables.size()) throw UnsupportedError("one observable and reference per qubit");
    const Eigen::Index r = Eigen::Index{1} << n;
    if (low.values.size() < r) throw NumericError("need " + std::to_string(r) + " eigenpairs");
    // degenerate levels: rotate onto eigenvectors of a weighted sum of observables
    Eigen::MatrixXcd vecs = low.vectors.leftCols(r);
    const double spread = std::max(low.values(r - 1) - low.values(0), 1e-300);
    for (Eigen::Index b = 0; b < r;) {
        Eigen::Index e = b + 1;
        while (e < r && low.values(e) - low.values(e - 1) <= 1e-6 * spread) ++e;
        if (e - b > 1) {
            Eigen::MatrixXcd block = vecs.middleCols(b, e - b);
            Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Zero(e - b, e - b);
            for (int q = 0; q < n; ++q)
                mixed += std::ldexp(1.0, n - 1 - q) / std::abs(reference[q]) * (block.adjoint() * (observables[q] * block));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mixed);
            vecs.middleCols(b, e - b) = block * es.eigenvectors();
        }
        b = e;
    }
    std::vector<Eigen::Index> state_of(static_cast<std::size_t>(r), -1);
    for (Eigen::Index k = 0; k < r; ++k) {
        Eigen::Index pattern = 0;
        for (int q = 0; q < n; ++q) {
            double e = vecs.col(k).dot(observables[q] * vecs.col(k)).real();
            if (std::abs(e) <= threshold * std::abs(reference[q]))
                throw ValidityError("Hamiltonian not diagonal in computational basis: level " + std::to_string(k) +
                                    " has no definite sign on qubit " + std::to_string(q + 1));
            pattern = 2 * pattern + (e > 0 ? 0 : 1);
        }
        if (state_of[static_cast<std::size_t>(pattern)] >= 0)
            throw ValidityError("Hamiltonian not diagonal in computational basis: duplicate sign pattern");
        state_of[static_cast<std::size_t>(pattern)] = k;
    }
    MultiReduction out;
    out.method = "diag";
    out.hamiltonian = Eigen::MatrixXcd::Zero(r, r);
    for (Eigen::Index a = 0; a < r; ++a) out.hamiltonian(a, a) = low.values(state_of[static_cast<std::size_t>(a)]);
    out.coefficients = pauli_decompose(out.hamiltonian);
    out.circuit_energies = low.values.head(r);
    return out;
}

// ---- two-qubit utilities

NonstoquasticCheck nonstoquastic_check(const PauliHamiltonian& h, double negligible) {
    if (h.qubits != 2) throw UnsupportedError("the non-stoquasticity criterion is for two qubits");
    const std::set<std::string> listed{"xI", "Ix", "zI", "Iz", "xx", "yy", "zz"};
    double scale = 0.0;
    for (std::size_t i = 1; i < h.size(); ++i) scale = std::max(scale, std::abs(h.coefficients[i]));
    for (std::size_t i = 1; i < h.size(); ++i)
        if (!listed.count(h.label(i)) && std::abs(h.coefficients[i]) > negligible * scale)
            throw UnsupportedError("condition not applicable: h_" + h.label(i) + " = " + fmt(h.coefficients[i]));
    NonstoquasticCheck c;
    const double zero = 1e-9 * std::max(scale, 1e-300);
    for (const char* l : {"xI", "Ix", "zI", "Iz"})
        if (std::abs(h[l]) <= zero) {
            c.failed_clause = "one-local fields nonzero";
            c.witness = std::string("h_") + l + " = " + fmt(h[l]);
            return c;
        }
    double yy = std::abs(h["yy"]), xx = std::abs(h["xx"]), zz = std::abs(h["zz"]);
    if (!(yy > xx && yy > zz)) {
        c.failed_clause = "|h_yy| > |h_xx|, |h_zz|";
        c.witness = "|h_yy| = " + fmt(yy) + ", |h_xx| = " + fmt(xx) + ", |h_zz| = " + fmt(zz);
        return c;
    }
    c.nonstoquastic = true;
    c.witness = "|h_yy| = " + fmt(yy) + " dominates";
    return c;
}

namespace {

Eigen::Matrix2cd ry(double a) {
    Eigen::Matrix2cd m;
    m << std::cos(a / 2), -std::sin(a / 2), std::sin(a / 2), std::cos(a / 2);
    return m;
}

PauliHamiltonian rotate_y(const Eigen::MatrixXcd& h, double a1, double a2) {
    Eigen::Matrix2cd u1 = ry(a1), u2 = ry(a2);
    Eigen::Matrix4cd u;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) u.block(2 * i, 2 * j, 2, 2) = u1(i, j) * u2;
    Eigen::MatrixXcd r = u * h * u.adjoint();
    return pauli_decompose(0.5 * (r + r.adjoint()));
}

}  // namespace

MixedRemoval remove_mixed_two_local(const PauliHamiltonian& h, double tolerance) {
    if (h.qubits != 2) throw UnsupportedError("mixed-term removal is for two qubits");
    Eigen::MatrixXcd m = h.matrix();
    double scale = 0.0;
    for (double c : h.coefficients) scale = std::max(scale, std::abs(c));
    auto residual = [&](double a1, double a2) {
        auto p = rotate_y(m, a1, a2);
        return Eigen::Vector2d(p["xz"], p["zx"]);
    };
    MixedRemoval out;
    Eigen::Vector2d a(0.0, 0.0);
    Eigen::Vector2d f = residual(a(0), a(1));
    const double target = tolerance * std::max(scale, 1e-300);
    const double step = 1e-6;
    for (; f.cwiseAbs().maxCoeff() > target; ++out.iterations) {
        if (out.iterations >= 100)
            throw ConvergenceError("mixed-term removal did not converge", {f(0), f(1)});
        Eigen::Matrix2d j;
        for (int k = 0; k < 2; ++k) {
            Eigen::Vector2d dp = a, dm = a;
            dp(k) += step;
            dm(k) -= step;
            j.col(k) = (residual(dp(0), dp(1)) - residual(dm(0), dm(1))) / (2 * step);
        }
        Eigen::Vector2d delta = j.fullPivLu().solve(-f);
        if (!delta.allFinite()) throw ConvergenceError("singular Jacobian in mixed-term removal", {f(0), f(1)});
        Eigen::Vector2d next = a + delta;
        Eigen::Vector2d fn = residual(next(0), next(1));
        // backtrack if the full step does not reduce the residual
        for (int bt = 0; bt < 30 && fn.norm() > f.norm(); ++bt) {
            delta *= 0.5;
            next = a + delta;
            fn = residual(next(0), next(1));
        }
        if (fn.norm() >= f.norm() && fn.cwiseAbs().maxCoeff() > target)
            throw ConvergenceError("mixed-term removal stalled", {fn(0), fn(1)});
        a = next;
        f = fn;
    }
    out.angle1 = a(0);
    out.angle2 = a(1);
    out.coefficients = rotate_y(m, a(0), a(1));
    return out;
}

std::vector<double> computational_state_probabilities(const Eigen::VectorXcd& state, const QubitRegister& reg,
                                                      const std::vector<Eigen::MatrixXcd>& observables) {
    const int n = reg.qubit_count();
    if (static_cast<int>(observables.size()) != n) throw UnsupportedError("one observable per qubit");
    if (state.size() != reg.dimension()) throw UnsupportedError("state dimension differs from the register");
    std::vector<std::array<Eigen::MatrixXcd, 2>> proj(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (observables[q] + observables[q].adjoint()));
        const auto& lr = reg.local[q];
        double mid = lr.basis.kind == ObservableKind::flux_current ? 0.0 : 0.5 * (lr.basis.o0 + lr.basis.o1);
        bool zero_above = lr.basis.o0 > lr.basis.o1;
        const Eigen::Index d = observables[q].rows();
        proj[q][0] = proj[q][1] = Eigen::MatrixXcd::Zero(d, d);
        for (Eigen::Index k = 0; k < d; ++k) {
            double lam = es.eigenvalues()(k);
            if (lam == mid) continue;
            int side = ((lam > mid) == zero_above) ? 0 : 1;
            proj[q][side] += es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
        }
    }
    const Eigen::Index r = Eigen::Index{1} << n;
    std::vector<double> p(static_cast<std::size_t>(r));
    for (Eigen::Index a = 0; a < r; ++a) {
        std::vector<std::pair<std::size_t, const Eigen::MatrixXcd*>> f;
        for (int q = 0; q < n; ++q) f.emplace_back(reg.qubits[q], &proj[q][(a >> (n - 1 - q)) & 1]);
        SparseMatrix pr = embed_dense(f, reg.dims, 1e-15);
        p[static_cast<std::size_t>(a)] = state.dot(pr * state).real();
    }
    return p;
}

PauliHamiltonian align_signs(const PauliHamiltonian& h, const PauliHamiltonian& previous) {
    if (h.qubits != previous.qubits) throw UnsupportedError("sign alignment across different register sizes");
    const int n = h.qubits;
    PauliHamiltonian best = h;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < (1 << n); ++mask) {
        PauliHamiltonian cand(n);
        double dist = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            double sign = 1.0;
            for (int q = 0; q < n; ++q) {
                int dgt = static_cast<int>((i >> (2 * (n - 1 - q))) & 3u);
                if (((mask >> (n - 1 - q)) & 1) && (dgt == 1 || dgt == 2)) sign = -sign;
            }
            cand.coefficients[i] = sign * h.coefficients[i];
            double dd = cand.coefficients[i] - previous.coefficients[i];
            dist += dd * dd;
        }
        if (dist < best_dist - 1e-15) {
            best_dist = dist;
            best = cand;
        }
    }
    return best;
}

}  // namespace scred
