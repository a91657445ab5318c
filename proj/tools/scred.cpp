// scred command-line front end: spectrum, reduce, converge, compare.

#include "scred/error.hpp"
#include "scred/model.hpp"
#include "scred/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

using namespace scred;

namespace {

enum Exit { ok = 0, usage = 2, numeric = 3, validity = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

struct Sweep {
    std::string name;
    std::vector<double> values;
};

Sweep parse_sweep(const std::string& text, const NetlistSource& src) {
    Sweep s;
    auto eq = text.find('=');
    if (eq == std::string::npos) throw UsageError("sweep must look like name=start:stop:points");
    s.name = text.substr(0, eq);
    if (!src.has_parameter(s.name)) throw UsageError("sweep parameter '" + s.name + "' is not in the netlist");
    std::vector<std::string> parts;
    std::stringstream ss(text.substr(eq + 1));
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    try {
        if (parts.size() == 1) {
            s.values = {std::stod(parts[0])};
        } else if (parts.size() == 3) {
            double a = std::stod(parts[0]), b = std::stod(parts[1]);
            int n = std::stoi(parts[2]);
            if (n < 1) throw UsageError("sweep needs at least one point");
            for (int i = 0; i < n; ++i) s.values.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
        } else {
            throw UsageError("sweep must look like name=start:stop:points");
        }
    } catch (const std::invalid_argument&) {
        throw UsageError("sweep values must be numbers in the parameter's internal units");
    }
    return s;
}

std::pair<std::string, double> parse_assignment(const std::string& text) {
    auto eq = text.find('=');
    if (eq == std::string::npos) throw UsageError("expected name=value, got '" + text + "'");
    try {
        return {text.substr(0, eq), std::stod(text.substr(eq + 1))};
    } catch (const std::invalid_argument&) {
        throw UsageError("expected a number in '" + text + "'");
    }
}

std::vector<int> parse_ints(const std::string& text) {
    std::vector<int> out;
    std::string t = text;
    std::replace(t.begin(), t.end(), ',', ' ');
    std::replace(t.begin(), t.end(), 'x', ' ');
    std::stringstream ss(t);
    for (int v; ss >> v;) out.push_back(v);
    if (!ss.eof()) throw UsageError("cannot read truncations from '" + text + "'");
    return out;
}

struct Globals {
    std::string netlist;
    std::string out;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    double tol = 1e-10;
    std::uint64_t seed = 20240917;
    std::vector<std::string> sets;
    std::string flags;

    SolverOptions solver() const {
        SolverOptions o;
        o.tolerance = tol;
        o.seed = seed;
        return o;
    }
};

class Output {
public:
    explicit Output(const Globals& g) {
        if (!g.out.empty() && g.out != "-") {
            file_.open(g.out);
            if (!file_) throw UsageError("cannot write '" + g.out + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void provenance(std::ostream& os, const Globals& g, const NetlistSource& src) {
    os << "# scred " << version << " netlist=" << g.netlist << " fnv1a=" << src.hash() << " flags:" << g.flags << "\n";
}

std::map<std::string, double> base_overrides(const Globals& g) {
    std::map<std::string, double> o;
    for (const auto& s : g.sets) o.insert(parse_assignment(s));
    return o;
}

/// Loads the netlist and instantiates it once so structural errors surface before any output.
NetlistSource load_source(const Globals& g) {
    auto src = NetlistSource::from_file(g.netlist);
    src.instantiate(base_overrides(g));
    return src;
}

// ---- per-point evaluation

struct PointResult {
    double param = std::numeric_limits<double>::quiet_NaN();
    std::string method;
    bool valid = false;
    std::string error;
    int code = ok;
    std::vector<double> coefficients;  // 4^N, Pauli order
    int qubits = 1;
    Eigen::VectorXd energies;
    std::map<std::string, double> extras;
    std::vector<std::string> warnings;
};

constexpr const char* single_methods[] = {"lr", "pr", "instanton"};
constexpr const char* multi_methods[] = {"swt", "rot", "diag"};

bool is_single(const std::string& m) {
    return std::find(std::begin(single_methods), std::end(single_methods), m) != std::end(single_methods);
}
bool is_multi(const std::string& m) {
    return std::find(std::begin(multi_methods), std::end(multi_methods), m) != std::end(multi_methods);
}

void from_1q(PointResult& r, const PauliCoefficients1Q& c) {
    r.coefficients = {c.identity, c.x, c.y, c.z};
}

template <class F>
void guarded(PointResult& r, F&& f) {
    try {
        f();
    } catch (const ValidityError& e) {
        r.error = e.what();
        r.code = validity;
    } catch (const NumericError& e) {
        r.error = e.what();
        r.code = numeric;
    } catch (const NetlistError& e) {
        r.error = e.what();
        r.code = usage;
    } catch (const UnsupportedError& e) {
        r.error = e.what();
        r.code = usage;
    }
    r.valid = r.code == ok;
}

class Evaluator {
public:
    Evaluator(const NetlistSource& src, const Globals& g, std::map<std::string, double> base)
        : src_(src), g_(g), base_(std::move(base)) {}

    Netlist at(const std::string& name, double value) const {
        auto o = base_;
        if (!name.empty()) o[name] = value;
        return src_.instantiate(o);
    }

    void prepare_pr(const std::string& name, std::optional<double> expand) {
        double v = expand ? *expand : (name.empty() ? 0.0 : src_.instantiate(base_).parameters.at(name).value);
        Netlist net = at(expand || !name.empty() ? name : "", v);
        CircuitModel m = build_circuit_model(net);
        EigenSolution eig = lowest_eigenpairs(m.hamiltonian, 2, g_.solver());
        pr_.emplace(eig, m.observable);
    }

    PointResult single(const std::string& method, const std::string& name, double value, const LocalOptions& lo) const {
        PointResult r;
        r.param = value;
        r.method = method;
        guarded(r, [&] {
            Netlist net = at(name, value);
            if (!net.single_circuit()) throw UnsupportedError("method " + method + " needs a single-circuit netlist");
            CircuitModel m = build_circuit_model(net);
            if (method == "instanton") {
                InstantonResult ir = instanton_reduction(instanton_parameters(m));
                from_1q(r, ir.coefficients);
                r.extras = {{"phi_left", ir.phi_left},         {"phi_middle", ir.phi_middle},
                            {"phi_right", ir.phi_right},       {"action_left", ir.action_left},
                            {"action_right", ir.action_right}, {"asymmetry", ir.asymmetry}};
                return;
            }
            EigenSolution eig = lowest_eigenpairs(m.hamiltonian, 2, g_.solver());
            r.energies = eig.values;
            if (method == "lr") {
                LocalReduction lr = local_reduction(eig, m.observable, m.kind, lo);
                from_1q(r, lr.coefficients);
                r.extras = {{"o0", lr.basis.o0}, {"o1", lr.basis.o1}};
                if (lr.basis.degenerate) r.warnings.push_back("degenerate doublet");
            } else {
                from_1q(r, pr_->evaluate(m.hamiltonian));
                r.extras = {{"persistent_current", pr_->persistent_current()}};
            }
        });
        return r;
    }

    PointResult multi(const std::string& method, const std::string& name, double value, const LocalOptions& lo) const {
        PointResult r;
        r.param = value;
        r.method = method;
        guarded(r, [&] {
            Netlist net = at(name, value);
            if (net.single_circuit()) throw UnsupportedError("method " + method + " needs a coupled netlist");
            CompositeModel cm = build_composite_model(net, g_.solver(), 1, lo);
            int n = cm.reg.qubit_count();
            EigenSolution low = lowest_eigenpairs(cm.projected.hamiltonian, 1 << n, g_.solver());
            MultiReduction red;
            if (method == "swt")
                red = schrieffer_wolff_reduction(low, cm.projected.hamiltonian, cm.projected.unperturbed, cm.reg);
            else if (method == "rot")
                red = approximate_rotation_reduction(low, cm.projected.hamiltonian, cm.projected.unperturbed, cm.reg);
            else
                red = diagonal_reduction(low, cm.qubit_observables, cm.reference_observables());
            r.qubits = n;
            r.coefficients = red.coefficients.coefficients;
            r.energies = red.circuit_energies;
            r.warnings = red.warnings;
            if (method != "diag") {
                const auto& d = red.diagnostics;
                r.extras = {{"gap", d.gap},
                            {"interaction_norm", d.interaction_norm},
                            {"projector_distance", d.projector_distance}};
            }
        });
        return r;
    }

private:
    const NetlistSource& src_;
    const Globals& g_;
    std::map<std::string, double> base_;
    std::optional<PerturbativeReducer> pr_;
};

int qubit_count_of(const NetlistSource& src, const std::map<std::string, double>& base) {
    Netlist net = src.instantiate(base);
    int n = 0;
    for (const auto& c : net.system.circuits) n += c.role == CircuitRole::qubit;
    return n;
}

void sign_continuity(std::vector<PointResult>& rows) {
    const PointResult* prev = nullptr;
    for (auto& r : rows) {
        if (!r.valid || r.qubits < 1) continue;
        if (prev && prev->qubits == r.qubits && r.method != "diag") {
            PauliHamiltonian h(r.qubits), p(r.qubits);
            h.coefficients = r.coefficients;
            p.coefficients = prev->coefficients;
            r.coefficients = align_signs(h, p).coefficients;
        }
        prev = &r;
    }
}

nlohmann::ordered_json report_entry(const PointResult& r, const std::string& param) {
    nlohmann::ordered_json j;
    j["parameter"] = param;
    j["value"] = r.param;
    j["method"] = r.method;
    j["valid"] = r.valid;
    if (!r.valid) j["error"] = r.error;
    nlohmann::ordered_json c = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < r.coefficients.size(); ++i)
        c[PauliHamiltonian::label(r.qubits, i)] = r.coefficients[i];
    j["coefficients"] = c;
    std::vector<double> e(r.energies.data(), r.energies.data() + r.energies.size());
    j["circuit_spectrum"] = e;
    if (r.valid && !r.coefficients.empty()) {
        PauliHamiltonian h(r.qubits);
        h.coefficients = r.coefficients;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.matrix(), Eigen::EigenvaluesOnly);
        std::vector<double> q(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
        j["reduced_spectrum"] = q;
    }
    j["diagnostics"] = r.extras;
    j["warnings"] = r.warnings;
    return j;
}

int worst(const std::vector<PointResult>& rows) {
    int code = ok;
    for (const auto& r : rows) {
        if (r.code == usage) return usage;
        code = std::max(code, r.code);
    }
    return code;
}

void report_errors(const std::vector<PointResult>& rows, const std::string& param) {
    for (const auto& r : rows)
        if (!r.valid)
            std::cerr << "scred: " << r.method << (param.empty() ? "" : " at " + param + "=" + fmt(r.param)) << ": "
                      << r.error << "\n";
}

// ---- commands

int cmd_spectrum(const Globals& g, int k, const std::string& sweep_text, bool full) {
    auto src = load_source(g);
    auto base = base_overrides(g);
    Sweep sw = sweep_text.empty() ? Sweep{} : parse_sweep(sweep_text, src);
    if (sw.values.empty()) sw.values = {std::numeric_limits<double>::quiet_NaN()};
    Evaluator ev(src, g, base);
    std::vector<Eigen::VectorXd> values(sw.values.size());
    std::vector<PointResult> status(sw.values.size());
    parallel_for(sw.values.size(), g.workers, [&](std::size_t i) {
        status[i].method = "spectrum";
        status[i].param = sw.values[i];
        guarded(status[i], [&] {
            Netlist net = ev.at(sw.name, sw.values[i]);
            if (net.single_circuit() || full) {
                if (!net.single_circuit()) {
                    LoadedSystem loaded = apply_coupling_loading(net.system);
                    auto syms = assemble_symbolic_hamiltonians(net.system, loaded);
                    std::vector<std::vector<ModeBasis>> bases;
                    for (std::size_t c = 0; c < syms.size(); ++c) bases.push_back(build_circuit_model(net, c).bases);
                    values[i] = lowest_eigenpairs(assemble_composite(syms, bases, loaded.interactions), k, g.solver()).values;
                } else {
                    values[i] = lowest_eigenpairs(build_circuit_model(net).hamiltonian, k, g.solver()).values;
                }
            } else {
                CompositeModel cm = build_composite_model(net, g.solver());
                values[i] = lowest_eigenpairs(cm.projected.hamiltonian, k, g.solver()).values;
            }
        });
    });
    Output out(g);
    auto& os = out.stream();
    provenance(os, g, src);
    os << (sw.name.empty() ? "point" : sw.name);
    for (int i = 0; i < k; ++i) os << ",E" << i;
    for (int i = 1; i < k; ++i) os << ",E" << i << "-E0";
    os << "\n";
    for (std::size_t p = 0; p < sw.values.size(); ++p) {
        os << (sw.name.empty() ? "0" : fmt(sw.values[p]));
        for (int i = 0; i < k; ++i) os << "," << (status[p].valid ? fmt(values[p](i)) : "nan");
        for (int i = 1; i < k; ++i) os << "," << (status[p].valid ? fmt(values[p](i) - values[p](0)) : "nan");
        os << "\n";
    }
    report_errors(status, sw.name);
    return worst(status);
}

std::vector<PointResult> run_method(const Globals& g, const NetlistSource& src, const std::map<std::string, double>& base,
                                    const std::string& method, const Sweep& sw, std::optional<double> expand,
                                    const LocalOptions& lo) {
    Evaluator ev(src, g, base);
    std::vector<PointResult> rows(sw.values.size());
    if (method == "pr") {
        try {
            ev.prepare_pr(sw.name, expand);
        } catch (const NumericError& e) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                rows[i].param = sw.values[i];
                rows[i].method = method;
                rows[i].error = e.what();
                rows[i].code = numeric;
            }
            return rows;
        }
    }
    parallel_for(sw.values.size(), g.workers, [&](std::size_t i) {
        rows[i] = is_single(method) ? ev.single(method, sw.name, sw.values[i], lo)
                                    : ev.multi(method, sw.name, sw.values[i], lo);
    });
    if (is_multi(method)) sign_continuity(rows);
    return rows;
}

void write_report(const std::string& path, const std::vector<PointResult>& rows, const std::string& param,
                  const Globals& g, const NetlistSource& src) {
    if (path.empty()) return;
    nlohmann::ordered_json j;
    j["tool"] = std::string("scred ") + version;
    j["netlist"] = g.netlist;
    j["fnv1a"] = src.hash();
    j["flags"] = g.flags;
    j["points"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) j["points"].push_back(report_entry(r, param));
    std::ofstream f(path);
    if (!f) throw UsageError("cannot write '" + path + "'");
    f << j.dump(2) << "\n";
}

Sweep sweep_or_point(const std::string& text, const NetlistSource& src) {
    if (!text.empty()) return parse_sweep(text, src);
    return Sweep{"", {std::numeric_limits<double>::quiet_NaN()}};
}

void check_method(const std::string& m, int qubits) {
    if (!is_single(m) && !is_multi(m)) throw UsageError("unknown method '" + m + "'");
    if (is_single(m) && qubits > 1) throw UsageError("method " + m + " applies to a single circuit");
    if (is_multi(m) && qubits == 1) throw UsageError("method " + m + " applies to coupled circuits");
}

int cmd_reduce(const Globals& g, const std::string& method, const std::string& sweep_text,
               const std::string& expand_text, const std::string& report, const LocalOptions& lo) {
    auto src = load_source(g);
    auto base = base_overrides(g);
    Netlist probe = src.instantiate(base);
    int nq = probe.single_circuit() ? 1 : qubit_count_of(src, base);
    if (probe.single_circuit() && is_multi(method)) nq = 1;
    check_method(method, probe.single_circuit() ? 1 : std::max(nq, 2));
    Sweep sw = sweep_or_point(sweep_text, src);
    std::optional<double> expand;
    if (!expand_text.empty()) {
        auto [name, v] = parse_assignment(expand_text);
        if (name != sw.name) throw UsageError("--expand must name the swept parameter");
        expand = v;
    }
    auto rows = run_method(g, src, base, method, sw, expand, lo);
    for (const auto& w : probe.warnings) std::cerr << "scred: warning: " << w << "\n";

    Output out(g);
    auto& os = out.stream();
    provenance(os, g, src);
    int n = is_single(method) ? 1 : nq;
    std::size_t ncoef = std::size_t{1} << (2 * n);
    std::size_t ne = std::size_t{1} << n;
    std::vector<std::string> extras;
    for (const auto& r : rows)
        for (const auto& [k, v] : r.extras)
            if (std::find(extras.begin(), extras.end(), k) == extras.end()) extras.push_back(k);
    os << (sw.name.empty() ? "point" : sw.name) << ",method,valid";
    for (std::size_t i = 0; i < ncoef; ++i) os << ",h_" << PauliHamiltonian::label(n, i);
    for (std::size_t i = 0; i < ne; ++i) os << ",E" << i;
    for (const auto& e : extras) os << "," << e;
    os << "\n";
    for (const auto& r : rows) {
        os << (sw.name.empty() ? "0" : fmt(r.param)) << "," << method << "," << (r.valid ? 1 : 0);
        for (std::size_t i = 0; i < ncoef; ++i)
            os << "," << (r.valid && i < r.coefficients.size() ? fmt(r.coefficients[i]) : "nan");
        for (std::size_t i = 0; i < ne; ++i)
            os << "," << (static_cast<Eigen::Index>(i) < r.energies.size() ? fmt(r.energies(static_cast<Eigen::Index>(i))) : "nan");
        for (const auto& e : extras) {
            auto it = r.extras.find(e);
            os << "," << (it == r.extras.end() ? "nan" : fmt(it->second));
        }
        os << "\n";
    }
    for (const auto& r : rows)
        for (const auto& w : r.warnings) std::cerr << "scred: warning: " << w << "\n";
    report_errors(rows, sw.name);
    write_report(report, rows, sw.name, g, src);
    return worst(rows);
}

int cmd_converge(const Globals& g, const std::string& schedule_path, int k, double conv_tol) {
    auto src = load_source(g);
    auto base = base_overrides(g);
    Netlist net = src.instantiate(base);
    if (!net.single_circuit()) throw UsageError("converge applies to a single circuit");
    std::ifstream in(schedule_path);
    if (!in) throw UsageError("cannot open schedule '" + schedule_path + "'");
    std::vector<std::vector<int>> schedule;
    for (std::string line; std::getline(in, line);) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        schedule.push_back(parse_ints(line));
    }
    if (schedule.empty()) throw UsageError("schedule is empty");
    for (std::size_t r = 1; r < schedule.size(); ++r)
        for (std::size_t m = 0; m < schedule[r].size() && m < schedule[r - 1].size(); ++m)
            if (schedule[r][m] < schedule[r - 1][m]) throw UsageError("schedule must be monotone in every mode");
    auto table = convergence_study([&](const std::vector<int>& t) { return build_circuit_model(net, 0, t).hamiltonian; },
                                   schedule, k, conv_tol, g.solver(), g.workers);
    Output out(g);
    auto& os = out.stream();
    provenance(os, g, src);
    os << "truncations,N";
    for (int i = 0; i < k; ++i) os << ",E" << i;
    os << ",seconds,ok,converged\n";
    int code = ok;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        std::string t;
        for (std::size_t m = 0; m < row.truncations.size(); ++m) t += (m ? "x" : "") + std::to_string(row.truncations[m]);
        os << t << "," << row.dimension;
        for (int i = 0; i < k; ++i) os << "," << (row.ok ? fmt(row.eigenvalues(i)) : "nan");
        int converged = 0;
        for (int c : table.converged_at) converged += c >= 0 && c <= static_cast<int>(r);
        os << "," << fmt(row.seconds) << "," << (row.ok ? 1 : 0) << "," << converged << "\n";
        if (!row.ok) {
            std::cerr << "scred: row " << t << ": " << row.error << "\n";
            code = numeric;
        }
    }
    os << "# converged_at";
    for (int c : table.converged_at) os << "," << c;
    os << "\n";
    return code;
}

int cmd_compare(const Globals& g, const std::vector<std::string>& methods, const std::string& sweep_text,
                const std::string& expand_text, const LocalOptions& lo) {
    if (methods.size() < 2) throw UsageError("compare needs at least two methods");
    auto src = load_source(g);
    auto base = base_overrides(g);
    Netlist probe = src.instantiate(base);
    int nq = probe.single_circuit() ? 1 : qubit_count_of(src, base);
    for (const auto& m : methods) check_method(m, probe.single_circuit() ? 1 : std::max(nq, 2));
    Sweep sw = sweep_or_point(sweep_text, src);
    std::optional<double> expand;
    if (!expand_text.empty()) expand = parse_assignment(expand_text).second;
    std::vector<std::vector<PointResult>> all;
    for (const auto& m : methods) all.push_back(run_method(g, src, base, m, sw, expand, lo));
    std::size_t ncoef = std::size_t{1} << (2 * nq);

    Output out(g);
    auto& os = out.stream();
    provenance(os, g, src);
    os << (sw.name.empty() ? "point" : sw.name);
    for (const auto& m : methods)
        for (std::size_t i = 0; i < ncoef; ++i) os << "," << m << "_h_" << PauliHamiltonian::label(nq, i);
    os << "\n";
    for (std::size_t p = 0; p < sw.values.size(); ++p) {
        os << (sw.name.empty() ? "0" : fmt(sw.values[p]));
        for (const auto& rows : all)
            for (std::size_t i = 0; i < ncoef; ++i)
                os << "," << (rows[p].valid ? fmt(rows[p].coefficients[i]) : "nan");
        os << "\n";
    }
    // divergence summary against the first method
    std::vector<double> scales(ncoef, 0.0);
    for (const auto& rows : all)
        for (const auto& r : rows)
            if (r.valid)
                for (std::size_t i = 0; i < ncoef; ++i) scales[i] = std::max(scales[i], std::abs(r.coefficients[i]));
    double overall = *std::max_element(scales.begin(), scales.end());
    for (std::size_t i = 0; i < ncoef; ++i) {
        double scale = scales[i];
        if (scale <= 1e-9 * overall) continue;
        for (std::size_t m = 1; m < methods.size(); ++m) {
            double dev = 0.0;
            int shared = 0;
            for (std::size_t p = 0; p < sw.values.size(); ++p) {
                const auto &a = all[0][p], &b = all[m][p];
                if (!a.valid || !b.valid) continue;
                ++shared;
                double ref = std::max(std::abs(a.coefficients[i]), 1e-3 * scale);
                dev = std::max(dev, std::abs(a.coefficients[i] - b.coefficients[i]) / ref);
            }
            os << "# max_relative_deviation h_" << PauliHamiltonian::label(nq, i) << " " << methods[0] << " vs "
               << methods[m] << " " << (shared ? fmt(dev) : "nan") << "\n";
        }
    }
    if (sw.values.size() >= 3) {
        for (std::size_t m = 0; m < methods.size(); ++m) {
            const auto& rows = all[m];
            for (std::size_t i = 0; i < ncoef; ++i) {
                std::string label = PauliHamiltonian::label(nq, i);
                if (PauliHamiltonian::weight(nq, i) == 0 || scales[i] <= 1e-9 * overall) continue;
                // least-squares slope and mean second difference
                double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0, curv = 0;
                int nc = 0;
                for (std::size_t p = 0; p < rows.size(); ++p) {
                    if (!rows[p].valid) continue;
                    double x = sw.values[p], y = rows[p].coefficients[i];
                    sx += x, sy += y, sxx += x * x, sxy += x * y, n += 1;
                    if (p >= 1 && p + 1 < rows.size() && rows[p - 1].valid && rows[p + 1].valid) {
                        double h = sw.values[p + 1] - sw.values[p];
                        curv += (rows[p + 1].coefficients[i] - 2 * y + rows[p - 1].coefficients[i]) / (h * h);
                        ++nc;
                    }
                }
                if (n < 2) continue;
                double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
                os << "# slope h_" << label << " " << methods[m] << " " << fmt(slope) << "\n";
                if (nc) os << "# curvature h_" << label << " " << methods[m] << " " << fmt(curv / nc) << "\n";
            }
        }
    }
    int code = ok;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        report_errors(all[m], sw.name);
        code = std::max(code, worst(all[m]));
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Superconducting circuit spectra and qubit Hamiltonian reduction"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    for (int i = 1; i < argc; ++i) g.flags += std::string(" ") + argv[i];
    app.add_option("--netlist", g.netlist, "Netlist JSON file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "Output CSV (default stdout)");
    app.add_option("--workers", g.workers, "Worker threads for sweeps")->check(CLI::PositiveNumber);
    app.add_option("--tol", g.tol, "Eigensolver residual tolerance relative to ||H||")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "Eigensolver start-block seed");
    app.add_option("--set", g.sets, "Override a netlist parameter, name=value in internal units");

    int k = 5;
    std::string sweep, expand, report, schedule, method;
    std::vector<std::string> methods;
    bool full = false;
    double conv_tol = 1e-6;
    LocalOptions lo;

    auto* spectrum = app.add_subcommand("spectrum", "Lowest eigenvalues, optionally swept");
    spectrum->add_option("-k", k, "Number of eigenvalues")->check(CLI::PositiveNumber);
    spectrum->add_option("--sweep", sweep, "name=start:stop:points");
    spectrum->add_flag("--full", full, "Coupled netlists: unprojected tensor-product space");

    auto* reduce = app.add_subcommand("reduce", "Effective qubit Hamiltonian");
    reduce->add_option("--method", method, "lr, pr, instanton, swt, rot or diag")->required();
    reduce->add_option("--sweep", sweep, "name=start:stop:points");
    reduce->add_option("--expand", expand, "Perturbative expansion point, name=value");
    reduce->add_option("--report", report, "Write a JSON reduction report");
    reduce->add_option("--charge-tol", lo.charge_tolerance, "Charge-qubit tolerance on |o1-o0|, units of 2e");

    auto* converge = app.add_subcommand("converge", "Truncation convergence study");
    converge->add_option("--schedule", schedule, "File with one truncation set per line, e.g. 3,5,5")
        ->required()
        ->check(CLI::ExistingFile);
    converge->add_option("-k", k, "Number of eigenvalues")->check(CLI::PositiveNumber);
    converge->add_option("--conv-tol", conv_tol, "Relative convergence tolerance against the final row");

    auto* compare = app.add_subcommand("compare", "Side-by-side coefficients of several methods");
    compare->add_option("--methods", methods, "Methods to compare")->delimiter(',')->required();
    compare->add_option("--sweep", sweep, "name=start:stop:points");
    compare->add_option("--expand", expand, "Perturbative expansion point, name=value");
    compare->add_option("--charge-tol", lo.charge_tolerance, "Charge-qubit tolerance on |o1-o0|, units of 2e");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? ok : usage;
    }
    try {
        if (*spectrum) return cmd_spectrum(g, k, sweep, full);
        if (*reduce) return cmd_reduce(g, method, sweep, expand, report, lo);
        if (*converge) return cmd_converge(g, schedule, k, conv_tol);
        if (*compare) return cmd_compare(g, methods, sweep, expand, lo);
    } catch (const UsageError& e) {
        std::cerr << "scred: " << e.what() << "\n";
        return usage;
    } catch (const NetlistError& e) {
        std::cerr << "scred: " << e.what() << "\n";
        return usage;
    } catch (const UnsupportedError& e) {
        std::cerr << "scred: " << e.what() << "\n";
        return usage;
    } catch (const ValidityError& e) {
        std::cerr << "scred: " << e.what() << "\n";
        return validity;
    } catch (const NumericError& e) {
        std::cerr << "scred: " << e.what() << "\n";
        return numeric;
    }
    return usage;
}
