// Command-line front end: fixture generation, current calculus, slicing,
// classification, the two reconstruction pipelines, scenario runs and plot
// data emission. Exit codes: 0 = all declared checks passed, 2 = a numeric
// check failed, 1 = usage or input errors.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "currents/scenario.hpp"

namespace {

using currents::Complex;
using currents::Json;

Json parse_kv_params(const std::vector<std::string>& kvs) {
    Json p = Json::object();
    for (const auto& kv : kvs) {
        auto pos = kv.find('=');
        if (pos == std::string::npos)
            throw currents::ScenarioError("parameter '" + kv + "' is not of the form key=value");
        std::string key = kv.substr(0, pos);
        std::string val = kv.substr(pos + 1);
        try {
            std::size_t used = 0;
            double d = std::stod(val, &used);
            if (used == val.size()) {
                p[key] = d;
                continue;
            }
        } catch (...) {
        }
        p[key] = val;
    }
    return p;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw currents::ScenarioError("cannot open '" + path + "' for writing");
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw currents::ScenarioError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<int> parse_indices(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stoi(item) - 1);
    return out;
}

std::vector<Complex> parse_point(const std::string& csv) {
    std::vector<double> flat;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) flat.push_back(std::stod(item));
    std::vector<Complex> out;
    for (std::size_t i = 0; i + 1 < flat.size(); i += 2) out.emplace_back(flat[i], flat[i + 1]);
    if (flat.size() % 2 == 1) out.emplace_back(flat.back(), 0.0);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale calculus for rectifiable currents in truncated Hilbert spaces"};
    app.require_subcommand(1);

    // fixtures
    auto* fixtures_cmd = app.add_subcommand("fixtures", "fixture currents");
    auto* gen = fixtures_cmd->add_subcommand("gen", "generate a fixture current file");
    std::string fixture_name, gen_out = "-";
    std::vector<std::string> gen_params;
    gen->add_option("name", fixture_name, "fixture name")->required();
    gen->add_option("-p,--param", gen_params, "fixture parameters key=value");
    gen->add_option("-o,--output", gen_out, "output file (default stdout)");
    auto* list = fixtures_cmd->add_subcommand("list", "list fixture names");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a current against a metric form");
    std::string eval_in, eval_f = "1";
    std::vector<std::string> eval_pis;
    int eval_order = 16;
    eval_cmd->add_option("-i,--input", eval_in)->required();
    eval_cmd->add_option("--f", eval_f, "leading function (s-expression over u1..u2N)");
    eval_cmd->add_option("--pi", eval_pis, "differential entries (s-expressions)");
    eval_cmd->add_option("--order", eval_order);

    // mass
    auto* mass_cmd = app.add_subcommand("mass", "quadrature mass of a current");
    std::string mass_in;
    int mass_order = 16;
    double mass_expect = std::nan(""), mass_tol = 1e-8;
    mass_cmd->add_option("-i,--input", mass_in)->required();
    mass_cmd->add_option("--order", mass_order);
    mass_cmd->add_option("--expect", mass_expect);
    mass_cmd->add_option("--tol", mass_tol);

    // boundary
    auto* bd_cmd = app.add_subcommand("boundary", "materialize the boundary current");
    std::string bd_in, bd_out = "-";
    bd_cmd->add_option("-i,--input", bd_in)->required();
    bd_cmd->add_option("-o,--output", bd_out);

    // pushforward
    auto* pf_cmd = app.add_subcommand("pushforward", "push a current through a map");
    std::string pf_in, pf_out = "-";
    std::vector<std::string> pf_map;
    bool pf_holo = false;
    pf_cmd->add_option("-i,--input", pf_in)->required();
    pf_cmd->add_option("--map", pf_map, "output expressions of the map (s-expressions)")
        ->required();
    pf_cmd->add_flag("--holomorphic", pf_holo);
    pf_cmd->add_option("-o,--output", pf_out);

    // slice
    auto* slice_cmd = app.add_subcommand("slice", "point slice through coordinate projections");
    std::string slice_in, slice_idx, slice_at;
    std::uint64_t slice_seed = 7;
    slice_cmd->add_option("-i,--input", slice_in)->required();
    slice_cmd->add_option("--indices", slice_idx, "complex coordinate indices, comma separated")
        ->required();
    slice_cmd->add_option("--at", slice_at, "base point re,im[,re,im..]")->required();
    slice_cmd->add_option("--seed", slice_seed);

    // classify
    auto* cls_cmd = app.add_subcommand("classify", "bidegree / positivity / CR classification");
    std::string cls_in, cls_kind = "bidim";
    int cls_p = 1, cls_q = 1, cls_k = 1, cls_count = 32, cls_order = 16;
    std::uint64_t cls_seed = 1;
    cls_cmd->add_option("-i,--input", cls_in)->required();
    cls_cmd->add_option("--kind", cls_kind, "bidim | positive | max-complex");
    cls_cmd->add_option("--p", cls_p);
    cls_cmd->add_option("--q", cls_q);
    cls_cmd->add_option("--k", cls_k);
    cls_cmd->add_option("--count", cls_count);
    cls_cmd->add_option("--order", cls_order);
    cls_cmd->add_option("--seed", cls_seed);

    // king-reconstruct
    auto* king_cmd = app.add_subcommand("king-reconstruct",
                                        "recover branch polynomials of a positive closed current");
    std::string king_in, king_out = "-", king_center, king_coeffs;
    int king_nodes = 6, king_deg = 12;
    double king_radius = -1.0, king_tol = 1e-6;
    std::uint64_t king_seed = 42;
    king_cmd->add_option("-i,--input", king_in)->required();
    king_cmd->add_option("-o,--output", king_out);
    king_cmd->add_option("--coeffs", king_coeffs, "write the coefficient data alone");
    king_cmd->add_option("--grid-nodes", king_nodes);
    king_cmd->add_option("--max-degree", king_deg);
    king_cmd->add_option("--grid-radius", king_radius);
    king_cmd->add_option("--grid-center", king_center, "re,im[,re,im..]");
    king_cmd->add_option("--tolerance", king_tol);
    king_cmd->add_option("--seed", king_seed);

    // solve-boundary
    auto* solve_cmd = app.add_subcommand("solve-boundary",
                                         "solve dT = [M] for a cycle via Cauchy moments");
    std::string solve_in, solve_out = "-", solve_csv;
    int solve_trunc = 0, solve_grid = 72, solve_smax = 2, solve_quad = 24, solve_samples = 2048;
    int solve_verify = 50;
    std::uint64_t solve_seed = 99;
    solve_cmd->add_option("-i,--input", solve_in)->required();
    solve_cmd->add_option("-o,--output", solve_out);
    solve_cmd->add_option("--csv", solve_csv, "write branch values as CSV");
    solve_cmd->add_option("--trunc", solve_trunc, "retained coordinates (default: ambient)");
    solve_cmd->add_option("--grid", solve_grid);
    solve_cmd->add_option("--smax", solve_smax, "extra consistency moments");
    solve_cmd->add_option("--quadrature", solve_quad);
    solve_cmd->add_option("--samples", solve_samples);
    solve_cmd->add_option("--verify", solve_verify, "verification probes (0 = skip)");
    solve_cmd->add_option("--seed", solve_seed);

    // run / emit
    auto* run_cmd = app.add_subcommand("run", "run a scenario file");
    std::string run_in, run_out = "-";
    bool run_timings = false;
    run_cmd->add_option("scenario", run_in)->required();
    run_cmd->add_option("-o,--output", run_out);
    run_cmd->add_flag("--timings", run_timings, "include wall-clock times (non-deterministic)");

    auto* emit_cmd = app.add_subcommand("emit", "emit CSV plot data from a report bundle");
    std::string emit_in, emit_sel, emit_out = "-";
    emit_cmd->add_option("bundle", emit_in)->required();
    emit_cmd->add_option("--selector", emit_sel, "shadow | branches:face=K | atoms | convergence")
        ->required();
    emit_cmd->add_option("-o,--output", emit_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            auto T = currents::make_fixture(fixture_name, parse_kv_params(gen_params));
            write_text(gen_out, currents::current_to_json(T).dump(2) + "\n");
            return 0;
        }
        if (list->parsed()) {
            for (const auto& n : currents::fixture_names()) std::cout << n << "\n";
            return 0;
        }
        if (eval_cmd->parsed()) {
            auto T = currents::load_current(eval_in);
            currents::MetricForm w;
            w.N = T.ambient.N;
            w.f = currents::FormScalar::from_expr(
                currents::ExpressionMap(2 * T.ambient.N, {currents::parse_sexpr(eval_f)}));
            for (const auto& s : eval_pis)
                w.entries.push_back(currents::FormEntry::from_expr(
                    currents::ExpressionMap(2 * T.ambient.N, {currents::parse_sexpr(s)})));
            Complex v = currents::evaluate(T, w, eval_order);
            Json out{{"value", Json::array({v.real(), v.imag()})}};
            std::cout << out.dump(2) << "\n";
            return 0;
        }
        if (mass_cmd->parsed()) {
            auto T = currents::load_current(mass_in);
            auto m = currents::mass(T, mass_order);
            Json out;
            out["total"] = m.total;
            out["per_cell"] = m.per_cell;
            out["estimated_error"] = m.estimated_error;
            std::cout << out.dump(2) << "\n";
            if (!std::isnan(mass_expect) && std::abs(m.total - mass_expect) > mass_tol) return 2;
            return 0;
        }
        if (bd_cmd->parsed()) {
            auto T = currents::load_current(bd_in);
            write_text(bd_out, currents::current_to_json(currents::boundary(T)).dump(2) + "\n");
            return 0;
        }
        if (pf_cmd->parsed()) {
            auto T = currents::load_current(pf_in);
            auto F = currents::map_from_sexprs(2 * T.ambient.N, pf_map, pf_holo);
            write_text(pf_out, currents::current_to_json(currents::pushforward(F, T)).dump(2) + "\n");
            return 0;
        }
        if (slice_cmd->parsed()) {
            auto T = currents::load_current(slice_in);
            auto at = parse_point(slice_at);
            auto sl = currents::slice_points_robust(
                T, currents::CoordinateProjection(parse_indices(slice_idx)), at, slice_seed);
            Json out;
            out["regular"] = sl.regular;
            out["total_multiplicity"] = sl.total_multiplicity();
            Json atoms = Json::array();
            for (const auto& a : sl.atoms) {
                Json pt = Json::array();
                for (const auto& c : a.point) pt.push_back(Json::array({c.real(), c.imag()}));
                atoms.push_back(Json{{"point", pt}, {"multiplicity", a.multiplicity}});
            }
            out["atoms"] = std::move(atoms);
            std::cout << out.dump(2) << "\n";
            return sl.regular ? 0 : 2;
        }
        if (cls_cmd->parsed()) {
            auto T = currents::load_current(cls_in);
            currents::ClassificationReport rep;
            if (cls_kind == "bidim")
                rep = currents::classify_bidimension(T, cls_p, cls_q, cls_count, -1.0, cls_order,
                                                     cls_seed);
            else if (cls_kind == "positive")
                rep = currents::is_positive(T, cls_k, cls_count, -1.0, cls_order, cls_seed);
            else if (cls_kind == "max-complex")
                rep = currents::is_maximally_complex(T, cls_count, -1.0, cls_order, cls_seed);
            else
                throw currents::ScenarioError("unknown classification kind '" + cls_kind + "'");
            Json out = currents::detail::classification_json(rep);
            std::cout << out.dump(2) << "\n";
            return rep.verdict ? 0 : 2;
        }
        if (king_cmd->parsed()) {
            auto T = currents::load_current(king_in);
            currents::KingConfig cfg;
            cfg.grid_nodes = king_nodes;
            cfg.max_degree = king_deg;
            cfg.grid_radius = king_radius;
            cfg.tolerance = king_tol;
            cfg.seed = king_seed;
            if (!king_center.empty()) cfg.grid_center = parse_point(king_center);
            auto rec = currents::assemble_variety(T, cfg);
            Json out;
            out["support_residual"] = rec.support_residual;
            out["chain_multiplicities"] = rec.chain_multiplicities;
            Json projs = Json::array();
            for (const auto& pr : rec.projections) {
                Json jp;
                Json I = Json::array();
                for (int i : pr.I) I.push_back(i + 1);
                jp["I"] = I;
                jp["sheets"] = pr.sheet_count;
                jp["support_residual"] = pr.support_residual;
                Json branches = Json::array();
                for (const auto& bp : pr.branches) {
                    Json jb;
                    jb["j"] = bp.j + 1;
                    jb["degree"] = bp.degree;
                    jb["fit_residual"] = bp.fit_residual;
                    Json fits = Json::array();
                    for (const auto& fit : bp.coeff_fits) {
                        Json jf = Json::array();
                        for (std::size_t m = 0; m < fit.monomials.size(); ++m)
                            jf.push_back(Json{{"exponents", fit.monomials[m]},
                                              {"value", Json::array({fit.coeffs[m].real(),
                                                                     fit.coeffs[m].imag()})}});
                        fits.push_back(std::move(jf));
                    }
                    jb["elementary_symmetric_fits"] = std::move(fits);
                    branches.push_back(std::move(jb));
                }
                jp["branches"] = std::move(branches);
                projs.push_back(std::move(jp));
            }
            out["projections"] = std::move(projs);
            write_text(king_out, out.dump(2) + "\n");
            if (!king_coeffs.empty()) {
                Json coeffs;
                coeffs["format"] = "currents-branch-coeffs/1";
                coeffs["projections"] = out["projections"];
                write_text(king_coeffs, coeffs.dump(2) + "\n");
            }
            return 0;
        }
        if (solve_cmd->parsed()) {
            auto M = currents::load_current(solve_in);
            currents::SolverConfig cfg;
            cfg.grid_nx = solve_grid;
            cfg.extra_moments = solve_smax;
            cfg.quad_order = solve_quad;
            cfg.shadow_samples = solve_samples;
            cfg.seed = solve_seed;
            int trunc = solve_trunc > 0 ? solve_trunc : M.ambient.N;
            auto chain = currents::assemble(M, trunc, cfg);
            Json out;
            out["tail_bound"] = chain.tail_bound;
            out["fully_materialized"] = chain.fully_materialized;
            Json faces = Json::array();
            for (const auto& f : chain.faces) {
                Json jf{{"face", f.face},
                        {"winding",
                         chain.arrangement.faces[static_cast<std::size_t>(f.face)].winding},
                        {"sheets", f.sheets},
                        {"fit_residual", f.fit_residual},
                        {"fill", f.fill}};
                Json sheets = Json::array();
                for (const auto& per_sheet : f.fits) {
                    Json coords = Json::array();
                    for (const auto& fit : per_sheet) {
                        Json jc;
                        jc["center"] = Json::array({fit.center[0].real(), fit.center[0].imag()});
                        Json terms = Json::array();
                        for (std::size_t m = 0; m < fit.monomials.size(); ++m)
                            terms.push_back(Json{{"degree", fit.monomials[m][0]},
                                                 {"value", Json::array({fit.coeffs[m].real(),
                                                                        fit.coeffs[m].imag()})}});
                        jc["coefficients"] = std::move(terms);
                        jc["residual"] = fit.residual;
                        coords.push_back(std::move(jc));
                    }
                    sheets.push_back(std::move(coords));
                }
                jf["branch_fits"] = std::move(sheets);
                faces.push_back(std::move(jf));
            }
            out["faces"] = std::move(faces);
            bool pass = true;
            if (solve_verify > 0 && chain.fully_materialized) {
                auto vr = currents::verify_boundary(chain.chain, M, solve_verify, cfg.quad_order,
                                                    cfg.seed + 7);
                out["verify_residual"] = vr.residual;
                out["mass_candidate"] = vr.mass_candidate;
                out["mass_datum"] = vr.mass_datum;
                pass = vr.residual < 1e-5;
            }
            if (chain.fully_materialized) out["mass"] = currents::detail::mass_json(chain.mass_report);
            write_text(solve_out, out.dump(2) + "\n");
            if (!solve_csv.empty()) {
                std::ostringstream csv;
                csv << "face,re_z,im_z,sheet,coord,re_F,im_F\n";
                for (const auto& f : chain.faces)
                    for (std::size_t pos = 0; pos < f.nodes.size(); ++pos) {
                        Complex z = chain.arrangement.node_point(f.nodes[pos]);
                        for (long long h = 0; h < f.sheets; ++h)
                            for (std::size_t j = 0; j < f.values.size(); ++j) {
                                Complex v = f.values[j][pos][static_cast<std::size_t>(h)];
                                csv << f.face << ','
                                    << currents::detail::fmt17(z.real()) << ','
                                    << currents::detail::fmt17(z.imag()) << ',' << h + 1 << ','
                                    << j + 2 << ',' << currents::detail::fmt17(v.real()) << ','
                                    << currents::detail::fmt17(v.imag()) << '\n';
                            }
                    }
                write_text(solve_csv, csv.str());
            }
            return pass ? 0 : 2;
        }
        if (run_cmd->parsed()) {
            auto scenario = currents::parse_scenario(read_text(run_in));
            std::string base = std::filesystem::path(run_in).parent_path().string();
            if (base.empty()) base = ".";
            auto bundle = currents::run_scenario(scenario, base, run_timings);
            write_text(run_out, bundle.dump());
            return bundle.all_passed ? 0 : 2;
        }
        if (emit_cmd->parsed()) {
            Json bundle = Json::parse(read_text(emit_in));
            write_text(emit_out, currents::emit_plotdata(bundle, emit_sel));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
