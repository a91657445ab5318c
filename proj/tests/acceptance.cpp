// Acceptance suite: one pass/fail line per criterion.

#include "scred/error.hpp"
#include "scred/model.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#ifndef SCRED_NETLIST_DIR
#define SCRED_NETLIST_DIR "netlists"
#endif

using namespace scred;

namespace {

std::string dir = SCRED_NETLIST_DIR;
int workers = 1;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v, int digits = 4) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

NetlistSource source(const std::string& name) { return NetlistSource::from_file(dir + "/" + name); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
    return v;
}

// ---- single qubit

struct LrPoint {
    double f = 0.0;
    bool valid = false;
    LocalReduction red;
    EigenSolution eig;
};

LrPoint lr_at(const NetlistSource& src, const std::string& param, double f, const std::map<std::string, double>& extra = {}) {
    auto o = extra;
    o[param] = f;
    CircuitModel m = build_circuit_model(src.instantiate(o));
    LrPoint p;
    p.f = f;
    p.eig = lowest_eigenpairs(m.hamiltonian, 2);
    try {
        p.red = local_reduction(p.eig, m.observable, m.kind);
        p.valid = true;
    } catch (const ReductionValidityError&) {
    }
    return p;
}

Outcome criterion1() {
    auto src = source("rf_squid.json");
    double worst_spec = 0.0, worst_y = 0.0;
    int valid = 0;
    for (double f : linspace(0.49, 0.51, 21)) {
        LrPoint p = lr_at(src, "fz", f);
        if (!p.valid) continue;
        ++valid;
        const auto& c = p.red.coefficients;
        Eigen::Vector2d e = c.eigenvalues();
        double scale = std::max({std::abs(c.identity), std::abs(c.x), std::abs(c.z)});
        for (int i = 0; i < 2; ++i) worst_spec = std::max(worst_spec, rel(e(i), p.eig.values(i)));
        worst_y = std::max(worst_y, std::abs(c.y) / scale);
    }
    return {valid == 21 && worst_spec < 1e-10 && worst_y < 1e-12,
            std::to_string(valid) + "/21 valid, spectrum rel err " + num(worst_spec) + ", |h_y|/scale " + num(worst_y)};
}

Outcome criterion2() {
    auto src = source("rf_squid.json");
    auto boundary = [&](double sign) {
        double lo = 0.0, hi = 0.08;
        if (lr_at(src, "fz", 0.5 + sign * hi).valid) return hi;
        while (hi - lo > 2e-4) {
            double mid = 0.5 * (lo + hi);
            (lr_at(src, "fz", 0.5 + sign * mid).valid ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    double up = boundary(1.0), down = boundary(-1.0);
    bool pass = std::abs(up - 0.035) <= 0.005 && std::abs(down - 0.035) <= 0.005;
    return {pass, "breakdown at |f_z-0.5| = " + num(down) + " (below), " + num(up) + " (above); target 0.035 +/- 0.005"};
}

Outcome criterion3() {
    auto src = source("rf_squid.json");
    CircuitModel m0 = build_circuit_model(src.instantiate({{"fz", 0.5}}));
    PerturbativeReducer pr(lowest_eigenpairs(m0.hamiltonian, 2), m0.observable);
    std::vector<LrPoint> lr;
    std::vector<PauliCoefficients1Q> prc;
    double zscale = 0.0;
    for (double f : linspace(0.49, 0.51, 21)) {
        lr.push_back(lr_at(src, "fz", f));
        prc.push_back(pr.evaluate(build_circuit_model(src.instantiate({{"fz", f}})).hamiltonian));
        zscale = std::max(zscale, std::abs(lr.back().red.coefficients.z));
    }
    double dz = 0.0, di = 0.0;
    for (std::size_t i = 0; i < lr.size(); ++i) {
        dz = std::max(dz, std::abs(lr[i].red.coefficients.z - prc[i].z) / zscale);
        di = std::max(di, rel(prc[i].identity, lr[i].red.coefficients.identity));
    }
    double rise = std::abs(lr.front().red.coefficients.x) / std::abs(lr[10].red.coefficients.x) - 1.0;
    bool pass = dz < 0.01 && di < 0.01 && std::abs(rise - 0.10) <= 0.03;
    return {pass, "max |dh_z|/max|h_z| " + num(dz) + ", max rel dh_I " + num(di) + ", |h_x| rise at 0.49 " +
                      num(100 * rise) + "%"};
}

Outcome criterion4() {
    auto src = source("rf_squid.json");
    std::vector<double> errors;
    std::string detail = "rel err";
    for (double l : {2500.0, 3000.0, 3500.0, 4000.0, 4500.0}) {
        std::map<std::string, double> o{{"fz", 0.5}, {"L", l}};
        CircuitModel m = build_circuit_model(src.instantiate(o));
        LocalReduction exact = local_reduction(m.hamiltonian, m.observable, m.kind);
        InstantonResult inst = instanton_reduction(instanton_parameters(m));
        errors.push_back(rel(inst.coefficients.x, exact.coefficients.x));
        detail += " " + num(errors.back(), 3);
    }
    bool pass = true;
    for (std::size_t i = 1; i < errors.size(); ++i) pass = pass && errors[i] < errors[i - 1];
    return {pass, detail + " for L = 2.5..4.5 nH"};
}

Outcome criterion5() {
    auto src = source("cshunt.json");
    Netlist net = src.instantiate();
    std::vector<std::vector<int>> schedule{{3, 5, 5}, {9, 10, 10}, {10, 11, 11}};
    auto table = convergence_study([&](const std::vector<int>& t) { return build_circuit_model(net, 0, t).hamiltonian; },
                                   schedule, 20, 1e-6, {}, workers);
    for (const auto& r : table.rows)
        if (!r.ok) return {false, "row failed: " + r.error};
    const auto& a = table.rows[0].eigenvalues;
    const auto& b = table.rows[1].eigenvalues;
    const auto& c = table.rows[2].eigenvalues;
    double low3 = 0.0, all20 = 0.0;
    for (int i = 0; i < 3; ++i) low3 = std::max(low3, rel(a(i), b(i)));
    for (int i = 0; i < 20; ++i) all20 = std::max(all20, rel(b(i), c(i)));
    bool pass = low3 < 1e-6 && all20 < 1e-6;
    return {pass, "N = " + std::to_string(table.rows[0].dimension) + "/" + std::to_string(table.rows[1].dimension) + "/" +
                      std::to_string(table.rows[2].dimension) + ", lowest 3 rel diff " + num(low3) +
                      ", lowest 20 vs check row " + num(all20) + " (target 1e-6)"};
}

Outcome criterion6() {
    auto src = source("cshunt.json");
    CircuitModel m0 = build_circuit_model(src.instantiate({{"fz", 0.5}}));
    PerturbativeReducer pr(lowest_eigenpairs(m0.hamiltonian, 2), m0.observable);
    const double step = 0.005;
    std::vector<double> fs{0.5 - 2 * step, 0.5 - step, 0.5, 0.5 + step, 0.5 + 2 * step};
    std::vector<PauliCoefficients1Q> lr(fs.size()), prc(fs.size());
    std::vector<char> ok(fs.size(), 0);
    parallel_for(fs.size(), workers, [&](std::size_t i) {
        CircuitModel m = build_circuit_model(src.instantiate({{"fz", fs[i]}}));
        EigenSolution eig = lowest_eigenpairs(m.hamiltonian, 2);
        prc[i] = pr.evaluate(m.hamiltonian);
        try {
            lr[i] = local_reduction(eig, m.observable, m.kind).coefficients;
            ok[i] = true;
        } catch (const ReductionValidityError&) {
        }
    });
    if (std::count(ok.begin(), ok.end(), 1) != static_cast<long>(fs.size())) return {false, "LR invalid inside sweep"};
    double slope_lr = (lr[3].z - lr[1].z) / (2 * step), slope_pr = (prc[3].z - prc[1].z) / (2 * step);
    double slope_dev = rel(slope_lr, slope_pr);
    double curv = (lr[3].x - 2 * lr[2].x + lr[1].x) / (step * step);
    double pr_flat = 0.0;
    for (const auto& c : prc) pr_flat = std::max(pr_flat, rel(c.x, prc[2].x));
    bool pass = slope_dev > 0.05 && curv < 0.0 && pr_flat < 0.01;
    return {pass, "h_z slope LR " + num(slope_lr) + " vs PR " + num(slope_pr) + " (" + num(100 * slope_dev, 3) +
                      "%), LR h_x'' " + num(curv) + ", PR h_x spread " + num(100 * pr_flat, 3) + "%"};
}

// ---- two qubits

struct TwoQubitPoint {
    CompositeModel model;
    EigenSolution low;
    MultiReduction swt, rot;
};

TwoQubitPoint two_qubit(double m12, bool rotation = false) {
    TwoQubitPoint p;
    p.model = build_composite_model(source("two_qubit.json").instantiate({{"M12", m12}}), {}, workers);
    const auto& h = p.model.projected.hamiltonian;
    p.low = lowest_eigenpairs(h, 4);
    p.swt = schrieffer_wolff_reduction(p.low, h, p.model.projected.unperturbed, p.model.reg);
    if (rotation) p.rot = approximate_rotation_reduction(p.low, h, p.model.projected.unperturbed, p.model.reg);
    return p;
}

double spectrum_error(const Eigen::MatrixXcd& hq, const Eigen::VectorXd& reference) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hq);
    double e = 0.0;
    for (Eigen::Index i = 0; i < reference.size(); ++i) e = std::max(e, rel(es.eigenvalues()(i), reference(i)));
    return e;
}

Outcome criterion7() {
    TwoQubitPoint p = two_qubit(2.0);
    const std::vector<std::pair<const char*, double>> target{{"zI", -0.125}, {"Iz", -0.121}, {"xI", -0.516}, {"Ix", -0.509},
                                                             {"xx", -0.459}, {"yy", 0.500},  {"zz", 1.079}};
    double worst = 0.0;
    std::string detail;
    for (auto [l, v] : target) {
        worst = std::max(worst, rel(p.swt.coefficients[l], v));
        detail += std::string(l) + "=" + num(p.swt.coefficients[l]) + " ";
    }
    double spec = spectrum_error(p.swt.hamiltonian, p.low.values);
    return {worst < 0.05 && spec < 1e-8, detail + "max dev " + num(100 * worst, 3) + "%, spectrum rel err " + num(spec)};
}

Outcome criterion8() {
    TwoQubitPoint p = two_qubit(2.0);
    auto circuit = computational_state_probabilities(p.low.vectors.col(1), p.model.reg, p.model.observables);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p.swt.hamiltonian);
    std::vector<double> reduced(4);
    for (int a = 0; a < 4; ++a) reduced[a] = std::norm(es.eigenvectors()(a, 1));
    const double target_c[] = {0.06, 0.44, 0.45, 0.05}, target_r[] = {0.0, 0.5, 0.5, 0.0};
    bool pass = true;
    std::string dc = "circuit", dr = "reduced";
    for (int a = 0; a < 4; ++a) {
        pass = pass && std::abs(circuit[a] - target_c[a]) <= 0.02 && std::abs(reduced[a] - target_r[a]) <= 0.01;
        dc += " " + num(circuit[a], 3);
        dr += " " + num(reduced[a], 3);
    }
    return {pass, dc + "; " + dr};
}

Outcome criterion9() {
    const char* labels[] = {"zI", "Iz", "xI", "Ix", "xx", "yy", "zz"};
    std::vector<double> ms = linspace(-2.0, 2.0, 9);
    double spec = 0.0, sweep_dev = 0.0, end_dev = 0.0;
    for (double m : ms) {
        TwoQubitPoint p = two_qubit(m, true);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> a(p.swt.hamiltonian), b(p.rot.hamiltonian);
        for (int i = 0; i < 4; ++i) spec = std::max(spec, rel(b.eigenvalues()(i), a.eigenvalues()(i)));
        PauliHamiltonian s = remove_mixed_two_local(p.swt.coefficients).coefficients;
        PauliHamiltonian r = remove_mixed_two_local(p.rot.coefficients).coefficients;
        double scale = 0.0;
        for (auto l : labels) scale = std::max(scale, std::abs(s[l]));
        for (auto l : labels) {
            sweep_dev = std::max(sweep_dev, std::abs(r[l] - s[l]) / scale);
            if (m == 2.0) end_dev = std::max(end_dev, rel(r[l], s[l]));
        }
    }
    bool pass = spec < 1e-8 && sweep_dev < 0.05 && end_dev < 0.05;
    return {pass, "spectrum rel diff " + num(spec) + ", coefficient dev at 2 pH " + num(100 * end_dev, 3) +
                      "%, over sweep " + num(100 * sweep_dev, 3) + "% of max |h|"};
}

Outcome criterion10() {
    std::vector<double> ms = linspace(0.0, 1.5, 31);
    std::vector<double> gap(ms.size());
    parallel_for(ms.size(), workers, [&](std::size_t i) {
        CompositeModel cm = build_composite_model(source("two_qubit.json").instantiate({{"M12", ms[i]}}));
        EigenSolution low = lowest_eigenpairs(cm.projected.hamiltonian, 4);
        gap[i] = low.values(3) - low.values(2);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i + 1 < ms.size(); ++i)
        if (gap[i] < gap[i - 1] && gap[i] < gap[i + 1] && (best == 0 || gap[i] < gap[best])) best = i;
    double at = best ? ms[best] : -1.0;
    return {best && std::abs(at - 0.7) <= 0.15,
            "minimum gap " + num(best ? gap[best] : 0.0) + " GHz at M12 = " + num(at) + " pH"};
}

// ---- three qubits

Outcome criterion11() {
    auto src = source("zzz_two_coupler.json");
    std::vector<double> fx{0.5, 0.45, 0.4, 0.35, 0.3, 0.27, 0.25, 0.23};
    double worst_off = 0.0, worst_split = 0.0, worst_diag = 0.0, zzz_end = 0.0;
    std::string error;
    for (double f : fx) {
        try {
            CompositeModel cm = build_composite_model(src.instantiate({{"fx", f}}), {}, workers);
            const auto& h = cm.projected.hamiltonian;
            EigenSolution low = lowest_eigenpairs(h, 8);
            MultiReduction swt = schrieffer_wolff_reduction(low, h, cm.projected.unperturbed, cm.reg);
            MultiReduction diag = diagonal_reduction(low, cm.qubit_observables, cm.reference_observables());
            double zzz = swt.coefficients["zzz"];
            for (std::size_t i = 1; i < swt.coefficients.size(); ++i)
                if (swt.coefficients.label(i) != "zzz")
                    worst_off = std::max(worst_off, std::abs(swt.coefficients.coefficients[i]) / std::abs(zzz));
            double lower = low.values.head(4).mean(), upper = low.values.tail(4).mean();
            double spread = std::max(low.values(3) - low.values(0), low.values(7) - low.values(4));
            worst_split = std::max({worst_split, rel(upper - lower, 2 * std::abs(zzz)), spread / (upper - lower)});
            for (std::size_t i = 1; i < swt.coefficients.size(); ++i) {
                std::string l = swt.coefficients.label(i);
                if (l.find_first_of("xy") != std::string::npos) continue;
                double d = std::abs(diag.coefficients.coefficients[i] - swt.coefficients.coefficients[i]);
                worst_diag = std::max(worst_diag, d / std::max(std::abs(swt.coefficients.coefficients[i]), std::abs(zzz)));
            }
            zzz_end = zzz;
        } catch (const Error& e) {
            error = "f_x = " + num(f) + ": " + e.what();
            break;
        }
    }
    if (!error.empty()) return {false, error};
    bool pass = worst_off < 0.05 && std::abs(std::abs(zzz_end) - 0.7) <= 0.15 * 0.7 && worst_split < 0.05 &&
                worst_diag < 0.01;
    return {pass, "|h_zzz| at f_x = 0.23: " + num(std::abs(zzz_end)) + " GHz, other strings <= " + num(100 * worst_off, 3) +
                      "% of |h_zzz|, manifold split dev " + num(100 * worst_split, 3) + "%, diag vs SWT " +
                      num(100 * worst_diag, 3) + "%"};
}

// ---- properties

Outcome criterion12() {
    std::vector<std::string> notes;
    bool pass = true;
    auto check = [&](bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back(what + (ok ? " ok" : " FAILED"));
    };

    std::mt19937_64 rng(20240917);
    std::normal_distribution<double> g;
    double roundtrip = 0.0;
    for (int n = 1; n <= 3; ++n) {
        Eigen::Index d = Eigen::Index{1} << n;
        Eigen::MatrixXcd a(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) a(i, j) = {g(rng), g(rng)};
        Eigen::MatrixXcd h = (a + a.adjoint()) / 2;
        roundtrip = std::max(roundtrip, (pauli_reconstruct(pauli_decompose(h)) - h).cwiseAbs().maxCoeff());
    }
    check(roundtrip < 1e-12, "pauli round-trip " + num(roundtrip));

    TwoQubitPoint p;
    p.model = build_composite_model(source("two_qubit.json").instantiate({{"M12", 2.0}}), {}, workers);
    p.low = lowest_eigenpairs(p.model.projected.hamiltonian, 4);
    SwtOptions full;
    full.route = SwtOptions::Route::square_root;
    auto swt = schrieffer_wolff_reduction(p.low, p.model.projected.hamiltonian, p.model.projected.unperturbed, p.model.reg, full);
    check(swt.diagnostics.unitarity_error < 1e-10 && swt.diagnostics.conjugation_error < 1e-10,
          "swt unitarity " + num(swt.diagnostics.unitarity_error) + " conjugation " + num(swt.diagnostics.conjugation_error));

    auto cs = source("cshunt.json").instantiate({{"fz", 0.48}});
    auto cs_b = cs;
    auto& spec = cs_b.system.circuits[0].spec;
    spec.spanning_tree = {spec.branch_index("L"), spec.branch_index("JL"), spec.branch_index("JT")};
    spec.closure_flux = {{"JR", cs.system.circuits[0].spec.closure_flux.at("JT")}};
    std::vector<int> small{4, 6, 6};
    auto ec = lowest_eigenpairs(build_circuit_model(cs, 0, small).hamiltonian, 6).values;
    auto ed = lowest_eigenpairs(build_circuit_model(cs_b, 0, small).hamiltonian, 6).values;
    double tree_err = ((ec - ed).array().abs() / ec.array().abs().max(1e-300)).maxCoeff();
    check(tree_err < 1e-8, "spanning-tree independence " + num(tree_err));

    auto zero = source("two_qubit.json").instantiate({{"M12", 0.0}, {"C12", 0.0}});
    CompositeModel z = build_composite_model(zero, {}, workers);
    double offdiag = (z.projected.hamiltonian.dense() - z.projected.unperturbed.dense()).cwiseAbs().maxCoeff();
    auto zl = lowest_eigenpairs(z.projected.hamiltonian, 4);
    auto zs = schrieffer_wolff_reduction(zl, z.projected.hamiltonian, z.projected.unperturbed, z.reg);
    double two_local = 0.0;
    for (auto l : {"xx", "xy", "xz", "yx", "yy", "yz", "zx", "zy", "zz"}) two_local = std::max(two_local, std::abs(zs.coefficients[l]));
    bool identical = true;
    for (std::size_t q = 0; q < 2; ++q) {
        CircuitModel alone = build_circuit_model(zero, q);
        identical = identical && alone.hamiltonian.dense() == z.circuits[q].hamiltonian.dense();
    }
    check(offdiag == 0.0 && two_local < 1e-10 && identical,
          "zero coupling (H - H0 " + num(offdiag) + ", two-local " + num(two_local) + ")");

    double herm = 0.0;
    for (const char* f : {"rf_squid.json", "cshunt.json", "two_qubit.json", "zzz_one_coupler.json"}) {
        Netlist net = source(f).instantiate();
        for (std::size_t c = 0; c < net.system.circuits.size(); ++c) {
            std::vector<int> t;
            if (std::string(f) == "cshunt.json") t = small;
            CircuitModel m = build_circuit_model(net, c, t);
            herm = std::max({herm, m.hamiltonian.hermiticity_error(), m.observable.hermiticity_error()});
        }
    }
    herm = std::max(herm, p.model.projected.hamiltonian.hermiticity_error());
    check(herm < 1e-12, "hermiticity " + num(herm));

    std::string detail;
    for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
    return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scred acceptance suite"};
    bool extended = false;
    std::vector<int> only;
    workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    app.add_flag("--extended", extended, "Include the long-running three-qubit criterion");
    app.add_option("--only", only, "Run only these criteria");
    app.add_option("--netlists", dir, "Directory with the bundled netlists");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<int, std::function<Outcome()>>> all{
        {1, criterion1}, {2, criterion2}, {3, criterion3},   {4, criterion4},   {5, criterion5},  {6, criterion6},
        {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}, {11, criterion11}, {12, criterion12}};
    int failed = 0;
    for (const auto& [id, run] : all) {
        bool selected = only.empty() ? (id != 11 || extended) : std::count(only.begin(), only.end(), id) > 0;
        if (!selected) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d: %s  %s  [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), s);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
