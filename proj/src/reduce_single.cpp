#include "scred/reduce_single.hpp"

#include "scred/error.hpp"
#include "scred/units.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>

namespace scred {

namespace {

const Eigen::Matrix2cd sigma_x = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
const Eigen::Matrix2cd sigma_y = (Eigen::Matrix2cd() << 0, Complex(0, -1), Complex(0, 1), 0).finished();
const Eigen::Matrix2cd sigma_z = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();

double clamp_acos(double x) { return std::acos(std::clamp(x, -1.0, 1.0)); }

void fix_column_phase(Eigen::Matrix2cd& u, int k) {
    int ref = std::abs(u(0, k)) > 1e-14 ? 0 : 1;
    u.col(k) *= std::abs(u(ref, k)) / u(ref, k);
}

}  // namespace

Eigen::Matrix2cd PauliCoefficients1Q::matrix() const {
    return identity * Eigen::Matrix2cd::Identity() + x * sigma_x + y * sigma_y + z * sigma_z;
}

Eigen::Vector2d PauliCoefficients1Q::eigenvalues() const {
    double r = std::sqrt(x * x + y * y + z * z);
    return {identity - r, identity + r};
}

PauliCoefficients1Q decompose_1q(const Eigen::Matrix2cd& h) {
    PauliCoefficients1Q c;
    c.identity = 0.5 * h.trace().real();
    c.x = 0.5 * (h * sigma_x).trace().real();
    c.y = 0.5 * (h * sigma_y).trace().real();
    c.z = 0.5 * (h * sigma_z).trace().real();
    return c;
}

LocalReduction reduce_two_level(const Eigen::Vector2d& energies, const Eigen::Matrix2cd& observable,
                                ObservableKind kind, const LocalOptions& opts, bool degenerate) {
    Eigen::Matrix2cd op = 0.5 * (observable + observable.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(op);
    ComputationalBasis1Q b;
    b.kind = kind;
    b.degenerate = degenerate;
    if (kind == ObservableKind::flux_current) {
        b.o0 = es.eigenvalues()(1);
        b.o1 = es.eigenvalues()(0);
        b.u.col(0) = es.eigenvectors().col(1);
        b.u.col(1) = es.eigenvectors().col(0);
        if (!(b.o1 < 0.0 && 0.0 < b.o0))
            throw ReductionValidityError("no opposite-sign current eigenstates at this bias", b.o0, b.o1);
    } else {
        b.o0 = es.eigenvalues()(0);
        b.o1 = es.eigenvalues()(1);
        b.u = es.eigenvectors();
        if (!(std::abs(b.o1 - b.o0 - 1.0) < opts.charge_tolerance))
            throw ReductionValidityError("charge difference between the qubit states is not 2e", b.o0, b.o1);
    }
    b.valid = true;
    fix_column_phase(b.u, 0);
    fix_column_phase(b.u, 1);

    LocalReduction r;
    r.energies = energies;
    r.observable = op;
    Eigen::Matrix2cd e = energies.cast<Complex>().asDiagonal();
    r.hamiltonian = b.u.adjoint() * e * b.u;
    r.coefficients = decompose_1q(r.hamiltonian);
    if (r.coefficients.x > 0.0) {
        b.u.col(1) = -b.u.col(1);
        r.hamiltonian = b.u.adjoint() * e * b.u;
        r.coefficients = decompose_1q(r.hamiltonian);
    }
    b.theta = std::acos(std::clamp(std::abs(b.u(0, 0)), 0.0, 1.0));
    double c2 = std::cos(b.theta) * std::cos(b.theta), s2 = std::sin(b.theta) * std::sin(b.theta);
    if (c2 > 1e-14) b.phi1 = 0.5 * clamp_acos((b.u(0, 0) * std::conj(b.u(1, 1))).real() / c2);
    if (s2 > 1e-14) b.phi2 = 0.5 * (std::numbers::pi - clamp_acos((b.u(1, 0) * std::conj(b.u(0, 1))).real() / s2));
    r.basis = b;
    return r;
}

LocalReduction local_reduction(const EigenSolution& eig, const OperatorMatrix& observable, ObservableKind kind,
                               const LocalOptions& opts) {
    if (eig.values.size() < 2) throw UnsupportedError("local reduction needs two eigenpairs");
    Eigen::Matrix2cd op = project_operator(observable, eig.vectors, 2);
    bool degenerate = eig.degenerate.size() >= 1 && eig.degenerate[0];
    return reduce_two_level(eig.values.head(2), op, kind, opts, degenerate);
}

LocalReduction local_reduction(const OperatorMatrix& h, const OperatorMatrix& observable, ObservableKind kind,
                               const SolverOptions& solver, const LocalOptions& opts) {
    return local_reduction(lowest_eigenpairs(h, 2, solver), observable, kind, opts);
}

// ---- perturbative

PerturbativeReducer::PerturbativeReducer(const EigenSolution& eig, const OperatorMatrix& observable) {
    if (eig.values.size() < 2) throw UnsupportedError("perturbative reduction needs two eigenpairs");
    if (!eig.degenerate.empty() && eig.degenerate[0])
        throw ValidityError("degenerate unperturbed doublet at the expansion point");
    Eigen::VectorXcd e0 = eig.vectors.col(0), e1 = eig.vectors.col(1);
    Complex m = e0.dot(observable.matrix() * e1);
    if (std::abs(m) == 0.0) throw ValidityError("observable does not connect the unperturbed doublet");
    e1 *= std::conj(m) / std::abs(m);
    persistent_current_ = std::abs(m);
    states_.resize(e0.size(), 2);
    states_.col(0) = (e0 + e1) / std::sqrt(2.0);
    states_.col(1) = (e0 - e1) / std::sqrt(2.0);
}

PauliCoefficients1Q PerturbativeReducer::evaluate(const OperatorMatrix& h) const {
    if (h.dimension() != states_.rows()) throw UnsupportedError("Hamiltonian dimension changed between bias points");
    Eigen::Matrix2cd hq = states_.adjoint() * (h.matrix() * states_);
    return decompose_1q(0.5 * (hq + hq.adjoint()));
}

// ---- instanton

InstantonParams InstantonParams::rf_squid(double josephson_energy, double inductance_pH, double capacitance_fF,
                                          double flux) {
    InstantonParams p;
    p.inductive_energy = units::inductive_energy / inductance_pH;
    p.screening = josephson_energy / p.inductive_energy;
    p.capacitance = capacitance_fF;
    p.external_phase = units::two_pi * flux;
    return p;
}

double instanton_potential(const InstantonParams& p, double phi) {
    double d = phi - p.external_phase;
    return p.inductive_energy * (0.5 * d * d + p.screening * (1.0 - std::cos(phi)));
}

namespace {

double bisect(const std::function<double(double)>& f, double a, double b, double tol) {
    double fa = f(a);
    for (int it = 0; it < 200 && b - a > tol; ++it) {
        double m = 0.5 * (a + b), fm = f(m);
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

InstantonResult instanton_reduction(const InstantonParams& p) {
    if (!(p.inductive_energy > 0 && p.capacitance > 0))
        throw UnsupportedError("instanton parameters need positive U_L and capacitance");
    auto dv = [&](double phi) { return (phi - p.external_phase) + p.screening * std::sin(phi); };
    const double lo = p.external_phase - std::abs(p.screening) - 1.0;
    const double hi = p.external_phase + std::abs(p.screening) + 1.0;
    const int grid = 20000;
    std::vector<double> roots;
    double prev = dv(lo);
    for (int i = 1; i <= grid; ++i) {
        double x0 = lo + (hi - lo) * (i - 1) / grid, x1 = lo + (hi - lo) * i / grid;
        double cur = dv(x1);
        if (cur == 0.0 || (cur < 0) != (prev < 0)) roots.push_back(bisect(dv, x0, x1, 1e-14));
        prev = cur;
    }
    if (roots.size() != 3)
        throw ValidityError("no double well: potential has " + std::to_string(roots.size()) + " stationary points");

    InstantonResult r;
    r.phi_left = roots[0];
    r.phi_middle = roots[1];
    r.phi_right = roots[2];
    const double a = units::charging_energy / p.capacitance;
    auto v = [&](double phi) { return instanton_potential(p, phi); };
    auto freq = [&](double phi) {
        double curv = p.inductive_energy * (1.0 + p.screening * std::cos(phi));
        if (!(curv > 0)) throw ValidityError("well without positive curvature");
        return std::sqrt(a * curv);
    };
    r.frequency_left = freq(r.phi_left);
    r.frequency_right = freq(r.phi_right);
    r.energy_left = v(r.phi_left) + 0.5 * r.frequency_left;
    r.energy_right = v(r.phi_right) + 0.5 * r.frequency_right;
    r.barrier = v(r.phi_middle);
    if (r.energy_left >= r.barrier || r.energy_right >= r.barrier)
        throw ValidityError("no bound tunneling regime: a well level lies above the barrier");

    using boost::math::quadrature::gauss_kronrod;
    auto action = [&](double energy, double from, double to) {
        auto g = [&](double phi) { return std::sqrt(std::max(0.0, 2.0 * (v(phi) - energy) / a)); };
        return 2.0 * gauss_kronrod<double, 15>::integrate(g, from, to, 20, 1e-10);
    };
    // the reflected wells share phi_middle as their symmetry point
    double turn_left = bisect([&](double phi) { return v(phi) - r.energy_left; }, r.phi_left, r.phi_middle, 1e-12);
    double turn_right = bisect([&](double phi) { return v(phi) - r.energy_right; }, r.phi_middle, r.phi_right, 1e-12);
    r.action_left = action(r.energy_left, turn_left, r.phi_middle);
    r.action_right = action(r.energy_right, r.phi_middle, turn_right);
    r.delta_left = r.frequency_left / units::two_pi * std::exp(-r.action_left);
    r.delta_right = r.frequency_right / units::two_pi * std::exp(-r.action_right);
    double ratio = std::pow((r.barrier - r.energy_left) / (r.barrier - r.energy_right), 0.25);
    r.asymmetry = 0.5 * (ratio + 1.0 / ratio);
    r.coefficients.x = -r.asymmetry * std::sqrt(r.delta_left * r.delta_right);
    r.coefficients.z = 0.5 * (r.energy_right - r.energy_left);
    r.coefficients.identity = 0.5 * (r.energy_right + r.energy_left);
    return r;
}

// ---- expectations

Eigen::Matrix2cd reduced_expectations(const Eigen::Matrix2cd& hq, const Eigen::Matrix2cd& observable) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(0.5 * (hq + hq.adjoint()));
    Eigen::MatrixXcd e = es.eigenvectors();
    normalize_phases(e);
    return e.adjoint() * observable * e;
}

Eigen::Matrix2cd reduced_expectations(const LocalReduction& r) {
    Eigen::Matrix2cd op = r.basis.u.adjoint() * r.observable * r.basis.u;
    return reduced_expectations(r.hamiltonian, op);
}

}  // namespace scred
