#include "scred/netlist.hpp"

#include "scred/error.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace scred {

using json = nlohmann::ordered_json;
using units::Dimension;
using units::Quantity;

// ---- expressions

namespace {

class Parser {
public:
    Parser(const std::string& s, const std::map<std::string, Quantity>& p) : s_(s), params_(p) {}

    Quantity parse() {
        Quantity q = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + s_.substr(pos_) + "'");
        return q;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("in expression '" + s_ + "': " + msg);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    Quantity add(Quantity a, Quantity b, double sign) const {
        if (a.dimension != b.dimension) {
            if (a.value == 0.0 && a.dimension == Dimension::dimensionless) a.dimension = b.dimension;
            else if (b.value == 0.0 && b.dimension == Dimension::dimensionless) b.dimension = a.dimension;
            else
                fail("cannot add " + std::string(units::dimension_name(a.dimension)) + " and " +
                     std::string(units::dimension_name(b.dimension)));
        }
        return {a.value + sign * b.value, a.dimension};
    }
    Quantity expr() {
        Quantity q = term();
        for (;;) {
            if (eat('+')) q = add(q, term(), 1.0);
            else if (eat('-')) q = add(q, term(), -1.0);
            else return q;
        }
    }
    Quantity term() {
        Quantity q = factor();
        for (;;) {
            if (eat('*')) {
                Quantity r = factor();
                if (q.dimension != Dimension::dimensionless && r.dimension != Dimension::dimensionless)
                    fail("product of two dimensioned quantities");
                q = {q.value * r.value, q.dimension == Dimension::dimensionless ? r.dimension : q.dimension};
            } else if (eat('/')) {
                Quantity r = factor();
                if (r.dimension != Dimension::dimensionless) {
                    if (r.dimension != q.dimension) fail("unsupported division of dimensioned quantities");
                    q = {q.value / r.value, Dimension::dimensionless};
                } else {
                    q = {q.value / r.value, q.dimension};
                }
            } else {
                return q;
            }
        }
    }
    Quantity factor() {
        skip();
        if (eat('-')) {
            Quantity q = factor();
            return {-q.value, q.dimension};
        }
        if (eat('+')) return factor();
        if (eat('(')) {
            Quantity q = expr();
            if (!eat(')')) fail("missing ')'");
            return q;
        }
        if (eat('$')) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string name = s_.substr(start, pos_ - start);
            auto it = params_.find(name);
            if (it == params_.end()) fail("unknown parameter $" + name);
            return it->second;
        }
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                    ((s_[pos_] == 'e' || s_[pos_] == 'E') && pos_ > start &&
                                     pos_ + 1 < s_.size() &&
                                     (std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) || s_[pos_ + 1] == '-' ||
                                      s_[pos_ + 1] == '+')) ||
                                    ((s_[pos_] == '-' || s_[pos_] == '+') && pos_ > start &&
                                     (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
            ++pos_;
        if (start == pos_) fail("expected a number, parameter or '('");
        std::string number = s_.substr(start, pos_ - start);
        skip();
        std::size_t ustart = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])))) ++pos_;
        std::string unit = s_.substr(ustart, pos_ - ustart);
        try {
            return units::parse_quantity(number + (unit.empty() ? "" : " " + unit));
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }

    const std::string& s_;
    const std::map<std::string, Quantity>& params_;
    std::size_t pos_ = 0;
};

}  // namespace

Quantity evaluate_expression(const std::string& text, const std::map<std::string, Quantity>& params) {
    return Parser(text, params).parse();
}

// ---- document access

namespace {

struct Context {
    std::vector<std::string> problems;
    const std::map<std::string, Quantity>* params = nullptr;

    void bad(const std::string& where, const std::string& msg) { problems.push_back(where + ": " + msg); }

    void keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
        if (!j.is_object()) {
            bad(where, "expected an object");
            return;
        }
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!ok.count(it.key())) bad(where, "unknown key '" + it.key() + "'");
    }

    double value(const json& j, const std::string& where, Dimension expected, double fallback = 0.0) {
        try {
            Quantity q;
            if (j.is_number()) q = {j.get<double>(), Dimension::dimensionless};
            else if (j.is_string()) q = evaluate_expression(j.get<std::string>(), *params);
            else {
                bad(where, "expected a number or a quantity string");
                return fallback;
            }
            if (q.dimension != Dimension::dimensionless && q.dimension != expected) {
                bad(where, "expected " + std::string(units::dimension_name(expected)) + ", got " +
                               std::string(units::dimension_name(q.dimension)));
                return fallback;
            }
            return q.value;
        } catch (const std::exception& e) {
            bad(where, e.what());
            return fallback;
        }
    }

    int integer(const json& j, const std::string& where) {
        if (!j.is_number_integer()) {
            bad(where, "expected an integer");
            return 0;
        }
        return j.get<int>();
    }

    std::string string(const json& j, const std::string& where) {
        if (!j.is_string()) {
            bad(where, "expected a string");
            return {};
        }
        return j.get<std::string>();
    }
};

Branch parse_branch(Context& cx, const json& j, const std::string& where) {
    cx.keys(j, where, {"name", "nodes", "type", "value", "EJ", "C", "squid_flux"});
    Branch b;
    if (j.contains("name")) b.name = cx.string(j["name"], where + ".name");
    const std::string w = where + (b.name.empty() ? "" : "(" + b.name + ")");
    if (!j.contains("nodes") || !j["nodes"].is_array() || j["nodes"].size() != 2) {
        cx.bad(w, "nodes must be a pair [from, to]");
    } else {
        b.from = cx.integer(j["nodes"][0], w + ".nodes");
        b.to = cx.integer(j["nodes"][1], w + ".nodes");
    }
    std::string type = j.contains("type") ? cx.string(j["type"], w + ".type") : "";
    if (type == "C") {
        b.kind = ElementKind::capacitor;
        b.value = j.contains("value") ? cx.value(j["value"], w + ".value", Dimension::capacitance) : 0.0;
    } else if (type == "L") {
        b.kind = ElementKind::inductor;
        b.value = j.contains("value") ? cx.value(j["value"], w + ".value", Dimension::inductance) : 0.0;
    } else if (type == "JJ") {
        b.kind = ElementKind::junction;
        if (!j.contains("EJ")) cx.bad(w, "junction needs EJ");
        else b.value = cx.value(j["EJ"], w + ".EJ", Dimension::energy);
        if (j.contains("C")) b.capacitance = cx.value(j["C"], w + ".C", Dimension::capacitance);
        if (j.contains("squid_flux")) b.squid_flux = cx.value(j["squid_flux"], w + ".squid_flux", Dimension::flux);
    } else {
        cx.bad(w, "type must be C, L or JJ");
    }
    if (type != "JJ" && (j.contains("EJ") || j.contains("C") || j.contains("squid_flux")))
        cx.bad(w, "EJ, C and squid_flux apply to junctions only");
    if (type == "JJ" && j.contains("value")) cx.bad(w, "junctions take EJ, not value");
    return b;
}

}  // namespace

NetlistSource NetlistSource::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NetlistError({"cannot open netlist '" + path + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

NetlistSource NetlistSource::from_text(std::string text) {
    NetlistSource s;
    s.text_ = std::move(text);
    try {
        s.doc_ = json::parse(s.text_);
    } catch (const json::parse_error& e) {
        throw NetlistError({std::string("netlist is not valid JSON: ") + e.what()});
    }
    if (!s.doc_.is_object()) throw NetlistError({"netlist must be a JSON object"});
    return s;
}

std::string NetlistSource::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text_) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

bool NetlistSource::has_parameter(const std::string& name) const {
    return doc_.contains("parameters") && doc_["parameters"].is_object() && doc_["parameters"].contains(name);
}

units::Dimension NetlistSource::parameter_dimension(const std::string& name) const {
    return instantiate().parameters.at(name).dimension;
}

Netlist NetlistSource::instantiate(const std::map<std::string, double>& overrides) const {
    Context cx;
    const json& d = doc_;
    cx.keys(d, "netlist", {"name", "description", "parameters", "circuits", "couplings"});
    Netlist out;
    if (d.contains("name")) out.name = cx.string(d["name"], "name");

    // parameters may refer to earlier ones
    std::map<std::string, Quantity> params;
    cx.params = &params;
    if (d.contains("parameters")) {
        const json& p = d["parameters"];
        if (!p.is_object()) cx.bad("parameters", "expected an object");
        else
            for (auto it = p.begin(); it != p.end(); ++it) {
                try {
                    Quantity q = it.value().is_number()
                                     ? Quantity{it.value().get<double>(), Dimension::dimensionless}
                                     : evaluate_expression(cx.string(it.value(), "parameters." + it.key()), params);
                    params[it.key()] = q;
                } catch (const std::exception& e) {
                    cx.bad("parameters." + it.key(), e.what());
                }
            }
    }
    for (const auto& [name, value] : overrides) {
        auto it = params.find(name);
        if (it == params.end()) cx.bad("override", "unknown parameter '" + name + "'");
        else it->second.value = value;
    }
    // overrides propagate to parameters defined in terms of them
    if (!overrides.empty() && d.contains("parameters") && d["parameters"].is_object()) {
        std::map<std::string, Quantity> again;
        for (auto it = d["parameters"].begin(); it != d["parameters"].end(); ++it) {
            if (overrides.count(it.key())) {
                again[it.key()] = params[it.key()];
                continue;
            }
            try {
                again[it.key()] = it.value().is_number()
                                      ? Quantity{it.value().get<double>(), Dimension::dimensionless}
                                      : evaluate_expression(it.value().get<std::string>(), again);
            } catch (const std::exception&) {
                again[it.key()] = params[it.key()];
            }
        }
        params = again;
    }
    out.parameters = params;

    if (!d.contains("circuits") || !d["circuits"].is_array() || d["circuits"].empty())
        throw NetlistError({"netlist needs a non-empty 'circuits' array"});
    std::map<std::string, std::size_t> circuit_index;
    for (std::size_t ci = 0; ci < d["circuits"].size(); ++ci) {
        const json& c = d["circuits"][ci];
        std::string where = "circuits[" + std::to_string(ci) + "]";
        cx.keys(c, where, {"name", "role", "nodes", "branches", "tree", "fluxes", "biases", "observable", "basis", "keep"});
        if (!c.is_object()) continue;
        Subcircuit sc;
        CircuitSetup setup;
        sc.spec.name = c.contains("name") ? cx.string(c["name"], where + ".name") : "c" + std::to_string(ci + 1);
        where = sc.spec.name;
        if (circuit_index.count(sc.spec.name)) cx.bad(where, "duplicate circuit name");
        circuit_index[sc.spec.name] = ci;
        std::string role = c.contains("role") ? cx.string(c["role"], where + ".role") : "qubit";
        if (role == "qubit") sc.role = CircuitRole::qubit;
        else if (role == "coupler") sc.role = CircuitRole::coupler;
        else cx.bad(where, "role must be qubit or coupler");
        if (!c.contains("nodes") || !c["nodes"].is_array()) cx.bad(where, "nodes must be an array");
        else
            for (const auto& n : c["nodes"]) sc.spec.nodes.push_back(cx.integer(n, where + ".nodes"));
        if (!c.contains("branches") || !c["branches"].is_array()) cx.bad(where, "branches must be an array");
        else
            for (std::size_t b = 0; b < c["branches"].size(); ++b)
                sc.spec.branches.push_back(parse_branch(cx, c["branches"][b], where + ".branches[" + std::to_string(b) + "]"));
        auto branch_pos = [&](const std::string& name) -> long {
            for (std::size_t b = 0; b < sc.spec.branches.size(); ++b)
                if (sc.spec.branches[b].name == name) return static_cast<long>(b);
            return -1;
        };
        if (c.contains("tree")) {
            if (!c["tree"].is_array()) cx.bad(where, "tree must be an array of branch names");
            else
                for (const auto& t : c["tree"]) {
                    long b = branch_pos(cx.string(t, where + ".tree"));
                    if (b < 0) cx.bad(where + ".tree", "unknown branch " + t.dump());
                    else sc.spec.spanning_tree.push_back(static_cast<std::size_t>(b));
                }
        }
        if (c.contains("fluxes")) {
            if (!c["fluxes"].is_object()) cx.bad(where, "fluxes must map closure branches to flux");
            else
                for (auto it = c["fluxes"].begin(); it != c["fluxes"].end(); ++it)
                    sc.spec.closure_flux[it.key()] = cx.value(it.value(), where + ".fluxes." + it.key(), Dimension::flux);
        }
        if (c.contains("biases")) {
            const json& b = c["biases"];
            cx.keys(b, where + ".biases", {"current", "voltage"});
            if (b.contains("current")) {
                const json& cb = b["current"];
                cx.keys(cb, where + ".biases.current", {"node", "L", "I"});
                CurrentBias bias;
                bias.node = cb.contains("node") ? cx.integer(cb["node"], where + ".biases.current.node") : 0;
                bias.inductance = cb.contains("L") ? cx.value(cb["L"], where + ".biases.current.L", Dimension::inductance) : 0;
                bias.current = cb.contains("I") ? cx.value(cb["I"], where + ".biases.current.I", Dimension::current) : 0;
                sc.spec.current_bias = bias;
            }
            if (b.contains("voltage")) {
                const json& vb = b["voltage"];
                cx.keys(vb, where + ".biases.voltage", {"node", "Cg", "V"});
                VoltageBias bias;
                bias.node = vb.contains("node") ? cx.integer(vb["node"], where + ".biases.voltage.node") : 0;
                bias.gate_capacitance =
                    vb.contains("Cg") ? cx.value(vb["Cg"], where + ".biases.voltage.Cg", Dimension::capacitance) : 0;
                bias.voltage = vb.contains("V") ? cx.value(vb["V"], where + ".biases.voltage.V", Dimension::voltage) : 0;
                sc.spec.voltage_bias = bias;
            }
        }
        if (c.contains("observable")) {
            const json& o = c["observable"];
            cx.keys(o, where + ".observable", {"kind", "branch", "node"});
            std::string kind = o.contains("kind") ? cx.string(o["kind"], where + ".observable.kind") : "current";
            if (kind == "current") {
                sc.observable.kind = ObservableKind::flux_current;
                sc.observable.branch = o.contains("branch") ? cx.string(o["branch"], where + ".observable.branch") : "";
            } else if (kind == "charge") {
                sc.observable.kind = ObservableKind::island_charge;
                sc.observable.node = o.contains("node") ? cx.integer(o["node"], where + ".observable.node") : 0;
            } else {
                cx.bad(where, "observable kind must be current or charge");
            }
        } else {
            auto ind = std::find_if(sc.spec.branches.begin(), sc.spec.branches.end(),
                                    [](const Branch& b) { return b.kind == ElementKind::inductor; });
            if (ind != sc.spec.branches.end()) sc.observable.branch = ind->name;
        }
        setup.bases.assign(sc.spec.nodes.size(), ModeBasis::harmonic(2, 0, 0));
        setup.explicit_oscillator.assign(sc.spec.nodes.size(), false);
        std::vector<bool> seen(sc.spec.nodes.size(), false);
        if (!c.contains("basis") || !c["basis"].is_array()) {
            cx.bad(where, "basis must list one entry per node");
        } else {
            for (std::size_t k = 0; k < c["basis"].size(); ++k) {
                const json& b = c["basis"][k];
                std::string bw = where + ".basis[" + std::to_string(k) + "]";
                cx.keys(b, bw, {"node", "kind", "cutoff", "frequency", "impedance", "offset"});
                int node = b.contains("node") ? cx.integer(b["node"], bw + ".node") : 0;
                auto pos = std::find(sc.spec.nodes.begin(), sc.spec.nodes.end(), node);
                if (pos == sc.spec.nodes.end()) {
                    cx.bad(bw, "unknown node " + std::to_string(node));
                    continue;
                }
                auto m = static_cast<std::size_t>(pos - sc.spec.nodes.begin());
                if (seen[m]) cx.bad(bw, "node " + std::to_string(node) + " has two bases");
                seen[m] = true;
                int cutoff = b.contains("cutoff") ? cx.integer(b["cutoff"], bw + ".cutoff") : 0;
                std::string kind = b.contains("kind") ? cx.string(b["kind"], bw + ".kind") : "ho";
                if (kind == "ho") {
                    bool f = b.contains("frequency"), z = b.contains("impedance");
                    if (f != z) cx.bad(bw, "give both frequency and impedance or neither");
                    double freq = f ? cx.value(b["frequency"], bw + ".frequency", Dimension::energy) : 0.0;
                    double imp = z ? cx.value(b["impedance"], bw + ".impedance", Dimension::dimensionless) : 0.0;
                    setup.bases[m] = ModeBasis::harmonic(cutoff, freq, imp);
                    setup.explicit_oscillator[m] = f && z;
                    if (b.contains("offset")) cx.bad(bw, "offset applies to charge bases");
                } else if (kind == "charge") {
                    double off = b.contains("offset") ? cx.value(b["offset"], bw + ".offset", Dimension::charge) : 0.0;
                    setup.bases[m] = ModeBasis::charge(cutoff, off);
                    if (b.contains("frequency") || b.contains("impedance"))
                        cx.bad(bw, "frequency and impedance apply to oscillator bases");
                } else {
                    cx.bad(bw, "kind must be ho or charge");
                }
                if (cutoff < 2) cx.bad(bw, "cutoff must be at least 2");
            }
            for (std::size_t m = 0; m < seen.size(); ++m)
                if (!seen[m]) cx.bad(where, "node " + std::to_string(sc.spec.nodes[m]) + " has no basis");
        }
        setup.keep = c.contains("keep") ? cx.integer(c["keep"], where + ".keep") : 0;
        out.system.circuits.push_back(std::move(sc));
        out.setups.push_back(std::move(setup));
    }
    if (d.contains("couplings")) {
        if (!d["couplings"].is_array()) cx.bad("couplings", "expected an array");
        else
            for (std::size_t k = 0; k < d["couplings"].size(); ++k) {
                const json& c = d["couplings"][k];
                std::string where = "couplings[" + std::to_string(k) + "]";
                cx.keys(c, where, {"name", "type", "a", "b", "value"});
                auto split = [&](const json& j, std::string& circuit, std::string& local) {
                    std::string s = cx.string(j, where);
                    auto dot = s.find('.');
                    if (dot == std::string::npos) {
                        cx.bad(where, "endpoint '" + s + "' must look like circuit.branch or circuit.node");
                        return false;
                    }
                    circuit = s.substr(0, dot);
                    local = s.substr(dot + 1);
                    if (!circuit_index.count(circuit)) {
                        cx.bad(where, "unknown circuit '" + circuit + "'");
                        return false;
                    }
                    return true;
                };
                if (!c.contains("a") || !c.contains("b") || !c.contains("value")) {
                    cx.bad(where, "coupling needs a, b and value");
                    continue;
                }
                std::string type = c.contains("type") ? cx.string(c["type"], where + ".type") : "";
                std::string ca, la, cb, lb;
                if (!split(c["a"], ca, la) || !split(c["b"], cb, lb)) continue;
                if (type == "mutual") {
                    MutualInductance m;
                    m.a = {circuit_index[ca], la};
                    m.b = {circuit_index[cb], lb};
                    m.value = cx.value(c["value"], where + ".value", Dimension::inductance);
                    out.system.mutual_inductances.push_back(m);
                } else if (type == "capacitor") {
                    CouplingCapacitance cc;
                    try {
                        cc.a = {circuit_index[ca], std::stoi(la)};
                        cc.b = {circuit_index[cb], std::stoi(lb)};
                    } catch (const std::exception&) {
                        cx.bad(where, "capacitor endpoints must name nodes, e.g. q1.1");
                        continue;
                    }
                    cc.value = cx.value(c["value"], where + ".value", Dimension::capacitance);
                    out.system.coupling_capacitances.push_back(cc);
                } else {
                    cx.bad(where, "type must be mutual or capacitor");
                }
            }
    }
    if (!cx.problems.empty()) throw NetlistError(cx.problems);
    validate(out.system);
    if (out.system.circuits.size() > 1)
        for (std::size_t ci = 0; ci < out.setups.size(); ++ci)
            if (out.setups[ci].keep < 2)
                cx.bad(out.system.circuits[ci].spec.name, "coupled circuits need keep >= 2");
    if (!cx.problems.empty()) throw NetlistError(cx.problems);

    // advisory heuristics
    for (std::size_t ci = 0; ci < out.system.circuits.size(); ++ci) {
        const auto& spec = out.system.circuits[ci].spec;
        Eigen::MatrixXd linv = build_inverse_inductance_matrix(spec);
        for (int m = 0; m < spec.mode_count(); ++m) {
            bool inductive = linv.row(m).cwiseAbs().maxCoeff() > 0;
            const auto& b = out.setups[ci].bases[m];
            if (b.kind == ModeBasis::Kind::harmonic && !inductive)
                out.warnings.push_back(spec.name + ": node " + std::to_string(spec.nodes[m]) +
                                       " has no inductive shunt; a charge basis is usually better");
        }
    }
    return out;
}

}  // namespace scred
