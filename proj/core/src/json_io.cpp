#include "xbs/json_io.hpp"

namespace xbs {

json to_json(const Forest &f) {
    json nodes = json::array();
    for (int v = 0; v < f.size(); ++v) {
        json n;
        n["id"] = v;
        switch (f.nodes[v].kind) {
        case NodeKind::root:
            n["kind"] = "root";
            break;
        case NodeKind::plain:
            n["kind"] = "plain";
            break;
        case NodeKind::white:
            n["kind"] = "white";
            break;
        case NodeKind::square:
            n["kind"] = "square";
            break;
        case NodeKind::grafted:
            n["kind"] = json{{"grafted", f.nodes[v].channel}};
            break;
        }
        nodes.push_back(n);
    }
    json edges = json::array(), lianas = json::array();
    for (const auto &e : f.edges)
        edges.push_back({e[0], e[1]});
    for (const auto &l : f.lianas)
        lianas.push_back({l[0], l[1]});
    return json{{"nodes", nodes}, {"edges", edges}, {"lianas", lianas}};
}

Forest forest_from_json(const json &j) {
    Forest f;
    std::map<int, Node> by_id;
    for (const auto &n : j.at("nodes")) {
        Node nd;
        const auto &k = n.at("kind");
        if (k.is_string()) {
            std::string s = k.get<std::string>();
            if (s == "root")
                nd.kind = NodeKind::root;
            else if (s == "plain")
                nd.kind = NodeKind::plain;
            else if (s == "white")
                nd.kind = NodeKind::white;
            else if (s == "square")
                nd.kind = NodeKind::square;
            else
                throw ParseError("unknown node kind '" + s + "'");
        } else if (k.is_object() && k.contains("grafted")) {
            nd.kind = NodeKind::grafted;
            nd.channel = k.at("grafted").get<int>();
        } else
            throw ParseError("bad node kind");
        by_id[n.at("id").get<int>()] = nd;
    }
    int expect = 0;
    for (const auto &[id, nd] : by_id) {
        if (id != expect++)
            throw ParseError("node ids must be 0..n-1");
        f.add(nd);
    }
    for (const auto &e : j.value("edges", json::array()))
        f.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
    for (const auto &l : j.value("lianas", json::array()))
        f.add_liana(l.at(0).get<int>(), l.at(1).get<int>());
    return f;
}

json to_json(const Series &s) {
    json terms = json::array();
    for (const auto &[f, c] : s.terms())
        terms.push_back(json{{"forest", to_json(f)}, {"coeff", c.str()}});
    json out{{"terms", terms}};
    if (s.cutoff2() != Series::unbounded)
        out["cutoff2"] = s.cutoff2();
    return out;
}

Series series_from_json(const json &j) {
    Series s(j.contains("cutoff2") ? j.at("cutoff2").get<int>() : Series::unbounded);
    for (const auto &t : j.at("terms"))
        s.add(forest_from_json(t.at("forest")), Coefficient::parse(t.at("coeff").get<std::string>()));
    return s;
}

// -- schemes ------------------------------------------------------------------------

namespace {

Coefficient entry_from_json(const json &v) {
    if (v.is_number())
        return Coefficient(Number::inexact(v.get<double>()));
    std::string s = v.get<std::string>();
    return Coefficient::parse(s);
}

std::vector<Coefficient> vec_from_json(const json &j) {
    std::vector<Coefficient> out;
    for (const auto &v : j)
        out.push_back(entry_from_json(v));
    return out;
}

std::vector<std::vector<Coefficient>> mat_from_json(const json &j) {
    std::vector<std::vector<Coefficient>> out;
    for (const auto &row : j)
        out.push_back(vec_from_json(row));
    return out;
}

json vec_to_json(const std::vector<Coefficient> &v) {
    json out = json::array();
    for (const auto &c : v)
        out.push_back(c.str());
    return out;
}

json mat_to_json(const std::vector<std::vector<Coefficient>> &m) {
    json out = json::array();
    for (const auto &row : m)
        out.push_back(vec_to_json(row));
    return out;
}

Tableau tableau_from_json(const json &j) {
    Tableau t;
    t.s = j.at("s").get<int>();
    t.A = j.contains("A") ? mat_from_json(j.at("A"))
                          : std::vector<std::vector<Coefficient>>(
                                t.s, std::vector<Coefficient>(t.s, Coefficient(0)));
    t.b = j.contains("b") ? vec_from_json(j.at("b")) : std::vector<Coefficient>{};
    t.d = j.contains("d") ? mat_from_json(j.at("d")) : std::vector<std::vector<Coefficient>>{};
    if (j.contains("update_noise"))
        t.update_noise = vec_from_json(j.at("update_noise"));
    else if (j.contains("d0"))
        t.update_noise = {entry_from_json(j.at("d0"))};
    else {
        int L = t.d.empty() ? 1 : static_cast<int>(t.d[0].size());
        t.update_noise.assign(L, Coefficient(0));
        t.update_noise[0] = Coefficient(1);
    }
    if (t.d.empty())
        t.d.assign(t.s, std::vector<Coefficient>(t.update_noise.size(), Coefficient(0)));
    return t;
}

json tableau_to_json(const Tableau &t) {
    return json{{"s", t.s},
                {"A", mat_to_json(t.A)},
                {"b", vec_to_json(t.b)},
                {"d", mat_to_json(t.d)},
                {"update_noise", vec_to_json(t.update_noise)}};
}

StageSet stage_set_from_json(const json &j) {
    StageSet st;
    st.tableau = tableau_from_json(j);
    if (j.contains("partition")) {
        Partition p;
        p.A = mat_from_json(j.at("partition").at("A"));
        p.b = vec_from_json(j.at("partition").at("b"));
        st.partition = std::move(p);
    }
    return st;
}

} // namespace

Scheme scheme_from_json(const json &j) {
    Scheme s;
    s.main = stage_set_from_json(j);
    if (j.contains("postprocessor"))
        s.postprocessor = stage_set_from_json(j.at("postprocessor"));
    s.id = j.value("id", "");
    s.check_shape();
    return s;
}

json to_json(const Scheme &s) {
    json j = tableau_to_json(s.main.tableau);
    if (s.main.partition)
        j["partition"] = json{{"A", mat_to_json(s.main.partition->A)},
                              {"b", vec_to_json(s.main.partition->b)}};
    if (s.postprocessor) {
        json p = tableau_to_json(s.postprocessor->tableau);
        if (s.postprocessor->partition)
            p["partition"] = json{{"A", mat_to_json(s.postprocessor->partition->A)},
                                  {"b", vec_to_json(s.postprocessor->partition->b)}};
        j["postprocessor"] = p;
    }
    if (!s.id.empty())
        j["id"] = s.id;
    return j;
}

// -- polynomial data -------------------------------------------------------------------

PolySpec polyspec_from_json(const json &j) {
    PolySpec p;
    p.dim = j.at("dim").get<int>();
    if (j.contains("potential"))
        p.potential = Polynomial::parse(j.at("potential").get<std::string>(), p.dim);
    if (j.contains("f"))
        for (const auto &c : j.at("f"))
            p.f.push_back(Polynomial::parse(c.get<std::string>(), p.dim));
    if (j.contains("phi"))
        p.phi = Polynomial::parse(j.at("phi").get<std::string>(), p.dim);
    else
        p.phi = Polynomial(p.dim);
    if (j.contains("f2"))
        for (const auto &c : j.at("f2"))
            p.f2.push_back(Polynomial::parse(c.get<std::string>(), p.dim));
    if (j.contains("f2_skew")) {
        std::vector<std::vector<Rational>> J;
        for (const auto &row : j.at("f2_skew")) {
            std::vector<Rational> r;
            for (const auto &v : row)
                r.push_back(v.is_number() ? Rational(v.get<long long>())
                                          : rational_from_string(v.get<std::string>()));
            J.push_back(std::move(r));
        }
        p.f2_skew = std::move(J);
    }
    return p;
}

json to_json(const PolySpec &p) {
    json j{{"dim", p.dim}};
    if (p.potential)
        j["potential"] = p.potential->str();
    if (!p.f.empty()) {
        json f = json::array();
        for (const auto &c : p.f)
            f.push_back(c.str());
        j["f"] = f;
    }
    j["phi"] = p.phi.str();
    if (!p.f2.empty()) {
        json f = json::array();
        for (const auto &c : p.f2)
            f.push_back(c.str());
        j["f2"] = f;
    }
    if (p.f2_skew) {
        json m = json::array();
        for (const auto &row : *p.f2_skew) {
            json r = json::array();
            for (const auto &v : row) {
                std::ostringstream os;
                os << v;
                r.push_back(os.str());
            }
            m.push_back(r);
        }
        j["f2_skew"] = m;
    }
    return j;
}

MCSpec mcspec_from_json(const json &j) {
    MCSpec m;
    m.scheme = scheme_from_json(j.at("scheme"));
    m.data = polyspec_from_json(j.at("polyspec"));
    if (j.contains("sigma2"))
        m.sigma2 = rational_from_string(j.at("sigma2").is_string()
                                            ? j.at("sigma2").get<std::string>()
                                            : std::to_string(j.at("sigma2").get<long long>()));
    else if (j.contains("sigma")) {
        Rational s0 = rational_from_string(j.at("sigma").is_string()
                                               ? j.at("sigma").get<std::string>()
                                               : std::to_string(j.at("sigma").get<long long>()));
        m.sigma2 = s0 * s0;
    }
    m.step_sizes = j.at("h").get<std::vector<double>>();
    m.steps = j.value("steps", static_cast<long long>(100000));
    m.burn_in = j.value("burn_in", 0.1);
    m.chains = j.value("chains", 8);
    m.seed = j.value("seed", static_cast<std::uint64_t>(12345));
    if (j.contains("start"))
        m.start = j.at("start").get<std::vector<double>>();
    return m;
}

// -- reports ---------------------------------------------------------------------------

json to_json(const Equation &e) {
    return json{{"lhs", e.lhs.str()},
                {"rhs", "0"},
                {"forest", to_json(e.provenance)},
                {"pretty", e.pretty()},
                {"order", e.order},
                {"label", e.label}};
}

json to_json(const ConditionSet &cs) {
    json eqs = json::array();
    for (const auto &e : cs.equations)
        eqs.push_back(to_json(e));
    json out{{"assumption", to_string(cs.assumption)},
             {"order", cs.order},
             {"weak", cs.weak},
             {"equations", eqs}};
    if (cs.inconsistent) {
        out["inconsistent"] = true;
        out["note"] = cs.inconsistency_note;
    }
    return out;
}

json to_json(const OrderReport &r) {
    return json{{"scheme", r.scheme_id},
                {"invariant_measure_order", r.invariant_measure_order},
                {"weak_order", r.weak_order},
                {"arithmetic", r.exact_arithmetic ? "exact" : "double"},
                {"tolerance", r.tolerance},
                {"assuming_ergodicity", r.assuming_ergodicity},
                {"failing_invariant_measure", r.failing_invariant_measure},
                {"failing_weak", r.failing_weak}};
}

json to_json(const SlopeReport &r) {
    json pts = json::array();
    for (size_t i = 0; i < r.estimates.size(); ++i)
        pts.push_back(json{{"h", r.estimates[i].h},
                           {"mean", r.estimates[i].mean},
                           {"stderr", r.estimates[i].stderr_mean},
                           {"bias", r.bias[i]},
                           {"usable", static_cast<bool>(r.usable[i])}});
    return json{{"points", pts},
                {"reference", r.reference},
                {"slope", r.slope},
                {"slope_stderr", r.slope_stderr}};
}

json residual_report(const Series &s) {
    json out = json::array();
    for (const auto &[f, c] : s.terms())
        out.push_back(json{{"forest", to_json(f)},
                           {"coefficient", c.str()},
                           {"rendered", render_differential(f)}});
    return out;
}

} // namespace xbs
