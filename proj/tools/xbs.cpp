// xbs - exotic B-series workbench for ergodic SDE integrators.
//
// Subcommands cover the full pipeline: scheme expansion, Gaussian
// expectation, operator composition, integration by parts against the
// invariant density, order-condition derivation and checking, exact and
// quadrature oracles, and a Monte Carlo order-study harness.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "xbs/calculus.hpp"
#include "xbs/json_io.hpp"
#include "xbs/paper_tables.hpp"

using namespace xbs;

namespace {

json load(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open '" + path + "'");
    json j;
    in >> j;
    return j;
}

struct Common {
    std::string format = "json";
    std::string assumption = "gradient";
    int threads = 0;
    std::uint64_t seed = 12345;
    double tolerance = 1e-12;
};

void add_common(CLI::App *cmd, Common &c) {
    cmd->add_option("--format", c.format, "json | text | latex")
        ->check(CLI::IsMember({"json", "text", "latex"}));
    cmd->add_option("--assumption", c.assumption,
                    "general | gradient | partitioned | nonrev | nonrev-j");
    cmd->add_option("--threads", c.threads, "worker threads (0: hardware)");
    cmd->add_option("--seed", c.seed, "base seed for sampling");
    cmd->add_option("--tolerance", c.tolerance, "tolerance for double-mode checks");
}

void emit_series(const Series &s, const Common &c) {
    if (c.format == "json")
        std::cout << to_json(s).dump(2) << "\n";
    else
        std::cout << s.str() << "\n";
}

void emit_conditions(const ConditionSet &cs, const Common &c) {
    if (c.format == "json") {
        std::cout << to_json(cs).dump(2) << "\n";
        return;
    }
    bool latex = c.format == "latex";
    for (const auto &e : cs.equations) {
        if (latex)
            std::cout << "% " << e.label << "\n" << e.lhs.pretty(true) << " = 0 \\\\\n";
        else
            std::cout << "[" << e.label << "]  " << render_differential(e.provenance) << ":  "
                      << e.pretty() << "\n";
    }
    if (cs.inconsistent)
        std::cout << (latex ? "% " : "") << "INCONSISTENT: " << cs.inconsistency_note << "\n";
}

std::vector<Forest> load_protected(const std::string &path) {
    if (path.empty())
        return {};
    json j = load(path);
    std::vector<Forest> out;
    for (const auto &f : j)
        out.push_back(forest_from_json(f));
    return out;
}

Series series_from_file(const std::string &path) {
    json j = load(path);
    if (j.contains("terms"))
        return series_from_json(j);
    return Series::term(forest_from_json(j));
}

std::vector<Rational> parse_point(const std::string &s, int dim) {
    std::vector<Rational> out;
    size_t p = 0;
    while (p < s.size()) {
        size_t q = s.find(',', p);
        if (q == std::string::npos)
            q = s.size();
        out.push_back(rational_from_string(s.substr(p, q - p)));
        p = q + 1;
    }
    if (static_cast<int>(out.size()) != dim)
        throw DimensionMismatch("point has wrong dimension");
    return out;
}

SchemeClass class_for(const Scheme &s) {
    SchemeClass cls;
    cls.channels = s.main.tableau.channels();
    cls.kind = s.main.partition
                   ? SchemeClassKind::partitioned_postprocessed
                   : (s.postprocessor ? SchemeClassKind::rk_postprocessed : SchemeClassKind::rk);
    return cls;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"exotic aromatic B-series workbench for SDE integrators"};
    app.require_subcommand(0, 1);
    bool version = false;
    app.add_flag("--version", version, "print version and table fingerprint");

    Common c;

    // expand
    auto *cmd_expand = app.add_subcommand("expand", "grafted Taylor series of a scheme");
    std::string expand_scheme;
    int expand_order = 2;
    bool expand_symbolic = false;
    cmd_expand->add_option("scheme", expand_scheme, "scheme JSON file")->required();
    cmd_expand->add_option("--order", expand_order, "grade cutoff (h power)");
    cmd_expand->add_flag("--symbolic", expand_symbolic, "elementary weights as symbols");
    add_common(cmd_expand, c);

    // expect
    auto *cmd_expect = app.add_subcommand("expect", "Gaussian expectation of a grafted series");
    std::string expect_in;
    cmd_expect->add_option("input", expect_in, "forest or series JSON")->required();
    add_common(cmd_expect, c);

    // compose
    auto *cmd_compose = app.add_subcommand("compose", "composition outer(inner(phi))");
    std::string compose_outer, compose_inner;
    cmd_compose->add_option("outer", compose_outer)->required();
    cmd_compose->add_option("inner", compose_inner)->required();
    add_common(cmd_compose, c);

    // ibp
    auto *cmd_ibp = app.add_subcommand("ibp", "one integration-by-parts step at the root");
    std::string ibp_in, ibp_conn;
    cmd_ibp->add_option("forest", ibp_in)->required();
    cmd_ibp->add_option("--connection", ibp_conn,
                        "edge:<idx> or liana:<idx>[:<end>]; default: reduction order");
    add_common(cmd_ibp, c);

    // reduce
    auto *cmd_reduce = app.add_subcommand("reduce", "normal form modulo integration by parts");
    std::string reduce_in, reduce_protected;
    cmd_reduce->add_option("input", reduce_in, "forest or series JSON")->required();
    cmd_reduce->add_option("--protected", reduce_protected, "JSON list of protected forests");
    add_common(cmd_reduce, c);

    // conditions
    auto *cmd_cond = app.add_subcommand("conditions", "derive order conditions for a class");
    std::string cond_class = "rk";
    int cond_order = 2;
    bool cond_weak = false;
    int cond_channels = 1;
    cmd_cond->add_option("--class", cond_class,
                         "rk | rk-post | partitioned | generic | generic-post");
    cmd_cond->add_option("--order", cond_order, "target order p");
    cmd_cond->add_flag("--weak", cond_weak, "standard weak conditions");
    cmd_cond->add_option("--channels", cond_channels, "noise channels");
    add_common(cmd_cond, c);

    // check-tableau
    auto *cmd_check = app.add_subcommand("check-tableau", "classify a numeric scheme");
    std::string check_scheme;
    int check_pmax = 3, check_expect = -1;
    cmd_check->add_option("scheme", check_scheme)->required();
    cmd_check->add_option("--max-order", check_pmax);
    cmd_check->add_option("--expect-order", check_expect,
                          "exit 1 unless the invariant-measure order reaches this");
    add_common(cmd_check, c);

    // tables
    auto *cmd_tables = app.add_subcommand("tables", "reproduce a published condition table");
    std::string table_id = "RK_IM";
    cmd_tables->add_option("--id", table_id,
                           "RK_IM RK_WEAK_L2 POSTPROCESSED_GENERAL_2 POSTPROCESSED_GENERAL_3 "
                           "RK_POSTPROCESSED PARTITIONED NONREVERSIBLE GAMMA0 GAMMA1 GAMMA2");
    add_common(cmd_tables, c);

    // eval
    auto *cmd_eval = app.add_subcommand("eval", "exact elementary-differential value");
    std::string eval_forest_path, eval_data, eval_point, eval_xi, eval_sigma = "1";
    cmd_eval->add_option("forest", eval_forest_path)->required();
    cmd_eval->add_option("--data", eval_data, "polyspec JSON")->required();
    cmd_eval->add_option("--point", eval_point, "comma-separated rationals")->required();
    cmd_eval->add_option("--xi", eval_xi, "channel noise values ch:v1,v2;ch:...");
    cmd_eval->add_option("--sigma", eval_sigma);
    add_common(cmd_eval, c);

    // quadrature-check
    auto *cmd_quad = app.add_subcommand("quadrature-check",
                                        "integral of a forest against the invariant density, "
                                        "compared with its integration-by-parts image");
    std::string quad_forest, quad_data, quad_sigma2 = "1";
    int quad_nodes = 128;
    double quad_halfwidth = 6.0;
    cmd_quad->add_option("forest", quad_forest)->required();
    cmd_quad->add_option("--data", quad_data)->required();
    cmd_quad->add_option("--sigma2", quad_sigma2, "exact sigma^2");
    cmd_quad->add_option("--nodes", quad_nodes);
    cmd_quad->add_option("--half-width", quad_halfwidth);
    add_common(cmd_quad, c);

    // equivariance-check
    auto *cmd_equi = app.add_subcommand("equivariance-check",
                                        "exact residual under an isometric coordinate change");
    std::string equi_forest, equi_data, equi_point, equi_skew, equi_shift;
    cmd_equi->add_option("forest", equi_forest)->required();
    cmd_equi->add_option("--data", equi_data)->required();
    cmd_equi->add_option("--point", equi_point)->required();
    cmd_equi->add_option("--skew", equi_skew, "rational skew matrix rows 'a,b;c,d'");
    cmd_equi->add_option("--shift", equi_shift, "translation vector");
    add_common(cmd_equi, c);

    // mc-order
    auto *cmd_mc = app.add_subcommand("mc-order", "Monte Carlo invariant-measure order study");
    std::string mc_study, mc_csv;
    cmd_mc->add_option("study", mc_study, "study JSON (scheme, polyspec, h, steps, ...)")
        ->required();
    cmd_mc->add_option("--csv", mc_csv, "write (h, bias, stderr) rows to a file");
    add_common(cmd_mc, c);

    CLI11_PARSE(app, argc, argv);

    try {
        if (version) {
            char buf[32];
            snprintf(buf, sizeof buf, "%016llx",
                     static_cast<unsigned long long>(paper_tables::fingerprint()));
            std::cout << "xbs 0.1.0 (table fingerprint " << buf << ")\n";
            return 0;
        }

        if (*cmd_expand) {
            Scheme s = scheme_from_json(load(expand_scheme));
            emit_series(expand_grafted(s, 2 * expand_order, expand_symbolic), c);
        } else if (*cmd_expect) {
            emit_series(expectation(series_from_file(expect_in)), c);
        } else if (*cmd_compose) {
            emit_series(compose(series_from_file(compose_outer), series_from_file(compose_inner)),
                        c);
        } else if (*cmd_ibp) {
            Forest f = forest_from_json(load(ibp_in));
            Connection conn = ibp_conn.empty() ? first_connection(canonicalize(f)) : [&] {
                Connection cc;
                auto p1 = ibp_conn.find(':');
                std::string kind = ibp_conn.substr(0, p1);
                std::string rest = ibp_conn.substr(p1 + 1);
                auto p2 = rest.find(':');
                cc.is_liana = kind == "liana";
                cc.index = std::stoi(rest.substr(0, p2));
                if (p2 != std::string::npos)
                    cc.endpoint = std::stoi(rest.substr(p2 + 1));
                return cc;
            }();
            Forest base = ibp_conn.empty() ? canonicalize(f) : f;
            emit_series(ibp_step(base, conn), c);
        } else if (*cmd_reduce) {
            Series s = series_from_file(reduce_in);
            Series red = reduce(s, assumption_from_string(c.assumption),
                                load_protected(reduce_protected));
            if (c.format == "json")
                std::cout << residual_report(red).dump(2) << "\n";
            else
                std::cout << red.str() << "\n";
        } else if (*cmd_cond) {
            SchemeClass cls;
            cls.channels = cond_channels;
            if (cond_class == "rk")
                cls.kind = SchemeClassKind::rk;
            else if (cond_class == "rk-post")
                cls.kind = SchemeClassKind::rk_postprocessed;
            else if (cond_class == "partitioned")
                cls.kind = SchemeClassKind::partitioned_postprocessed;
            else if (cond_class == "generic")
                cls.kind = SchemeClassKind::generic;
            else if (cond_class == "generic-post")
                cls.kind = SchemeClassKind::generic_postprocessed;
            else
                throw ParseError("unknown class '" + cond_class + "'");
            Assumption a = assumption_from_string(c.assumption);
            ConditionSet cs = cond_weak ? weak_order_conditions(cls, cond_order, a)
                                        : invariant_measure_conditions(cls, cond_order, a);
            emit_conditions(cs, c);
            if (cs.inconsistent)
                return 1;
        } else if (*cmd_check) {
            Scheme s = scheme_from_json(load(check_scheme));
            OrderReport r = check_tableau(s, assumption_from_string(c.assumption), check_pmax);
            if (c.format == "json")
                std::cout << to_json(r).dump(2) << "\n";
            else {
                std::cout << "scheme: " << (r.scheme_id.empty() ? "(unnamed)" : r.scheme_id)
                          << "\ninvariant-measure order " << r.invariant_measure_order
                          << " (assuming ergodicity), weak order " << r.weak_order << " ["
                          << (r.exact_arithmetic ? "exact" : "double, tol 1e-12") << "]\n";
                for (const auto &m : r.failing_invariant_measure)
                    std::cout << "  next order fails: " << m << "\n";
            }
            if (check_expect >= 0 && r.invariant_measure_order < check_expect)
                return 1;
        } else if (*cmd_tables) {
            TableResult tr = reproduce_table(table_id_from_string(table_id));
            if (tr.conditions)
                emit_conditions(*tr.conditions, c);
            else
                emit_series(*tr.series, c);
        } else if (*cmd_eval) {
            Forest f = forest_from_json(load(eval_forest_path));
            PolySpec data = polyspec_from_json(load(eval_data));
            std::map<int, std::vector<Rational>> xi;
            if (!eval_xi.empty()) {
                size_t p = 0;
                while (p < eval_xi.size()) {
                    size_t q = eval_xi.find(';', p);
                    if (q == std::string::npos)
                        q = eval_xi.size();
                    std::string part = eval_xi.substr(p, q - p);
                    auto colon = part.find(':');
                    int ch = std::stoi(part.substr(0, colon));
                    xi[ch] = parse_point(part.substr(colon + 1), data.dim);
                    p = q + 1;
                }
            }
            Rational v = eval_forest(f, data, rational_from_string(eval_sigma),
                                     parse_point(eval_point, data.dim), xi);
            if (c.format == "json")
                std::cout << json{{"value", (std::ostringstream() << v).str()}}.dump() << "\n";
            else
                std::cout << v << "\n";
        } else if (*cmd_quad) {
            Forest f = canonicalize(forest_from_json(load(quad_forest)));
            PolySpec data = polyspec_from_json(load(quad_data));
            Rational sigma2 = rational_from_string(quad_sigma2);
            QuadratureSpec q{data.dim, quad_halfwidth, quad_nodes};
            double lhs = ibp_integral(f, data, sigma2, q);
            Series img = ibp_step(f, first_connection(f));
            double rhs = series_integral(img, data, sigma2, q);
            json out{{"integral", lhs}, {"ibp_image_integral", rhs}, {"difference", lhs - rhs}};
            if (c.format == "json")
                std::cout << out.dump(2) << "\n";
            else
                std::cout << "integral " << lhs << ", image " << rhs << ", difference "
                          << lhs - rhs << "\n";
        } else if (*cmd_equi) {
            Forest f = forest_from_json(load(equi_forest));
            PolySpec data = polyspec_from_json(load(equi_data));
            auto parse_rows = [&](const std::string &s) {
                std::vector<std::vector<Rational>> rows;
                size_t p = 0;
                while (p < s.size()) {
                    size_t q = s.find(';', p);
                    if (q == std::string::npos)
                        q = s.size();
                    rows.push_back(parse_point(s.substr(p, q - p), data.dim));
                    p = q + 1;
                }
                return rows;
            };
            std::vector<std::vector<Rational>> A;
            if (equi_skew.empty()) {
                A.assign(data.dim, std::vector<Rational>(data.dim, Rational(0)));
                for (int i = 0; i < data.dim; ++i)
                    A[i][i] = 1;
            } else
                A = cayley_orthogonal(parse_rows(equi_skew));
            std::vector<Rational> shift(data.dim, Rational(0));
            if (!equi_shift.empty())
                shift = parse_point(equi_shift, data.dim);
            auto res = equivariance_residual(f, data.drift(), A, shift,
                                             parse_point(equi_point, data.dim));
            bool zero = true;
            json vals = json::array();
            for (const auto &r : res) {
                zero &= r.is_zero();
                vals.push_back((std::ostringstream() << r).str());
            }
            if (c.format == "json")
                std::cout << json{{"residual", vals}, {"zero", zero}}.dump() << "\n";
            else
                std::cout << (zero ? "residual 0" : "nonzero residual") << "\n";
        } else if (*cmd_mc) {
            MCSpec m = mcspec_from_json(load(mc_study));
            m.seed = c.seed;
            m.threads = c.threads;
            QuadratureSpec q{m.data.dim, 6.0, 128};
            SlopeReport r = order_study(m, q);
            if (!mc_csv.empty()) {
                std::ofstream out(mc_csv);
                out << "h,bias,stderr\n";
                for (size_t i = 0; i < r.estimates.size(); ++i)
                    out << r.estimates[i].h << "," << r.bias[i] << ","
                        << r.estimates[i].stderr_mean << "\n";
            }
            std::cout << to_json(r).dump(2) << "\n";
        } else {
            std::cout << app.help() << "\n";
        }
    } catch (const ParseError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
