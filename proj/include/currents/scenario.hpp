#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>

#include "currents/boundary_solver.hpp"
#include "currents/interchange.hpp"
#include "currents/king.hpp"
#include "currents/slicing.hpp"

namespace currents {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Scenario {
    std::uint64_t seed = 0;
    bool has_seed = false;
    int quadrature_order = 16;
    Json tolerances;
    struct CurrentDef {
        std::string name, file, fixture;
        Json params;
    };
    std::vector<CurrentDef> currents;
    struct OpDef {
        std::string op;
        Json params;
    };
    std::vector<OpDef> pipeline;
};

namespace detail {

inline const std::vector<std::string>& known_ops() {
    static const std::vector<std::string> ops = {
        "mass",          "evaluate",        "boundary",       "pushforward",
        "project",       "pas-report",      "classify-bidimension",
        "is-positive",   "max-complex",     "wirtinger",      "slice",
        "slice-check",   "king-reconstruct", "solve-boundary", "verify-boundary",
        "validate-cycle", "arrangement",    "solve-scalar",   "moments"};
    return ops;
}

inline bool op_randomized(const std::string& op) {
    static const std::vector<std::string> r = {"pas-report",      "classify-bidimension",
                                               "is-positive",     "max-complex",
                                               "king-reconstruct", "verify-boundary",
                                               "solve-boundary"};
    return std::find(r.begin(), r.end(), op) != r.end();
}

} // namespace detail

inline Scenario parse_scenario(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioError("scenario parse error at byte " + std::to_string(e.byte) + ": " +
                            e.what());
    }
    Scenario s;
    if (doc.contains("seed")) {
        s.seed = doc["seed"].get<std::uint64_t>();
        s.has_seed = true;
    }
    s.quadrature_order = doc.value("quadrature_order", 16);
    if (s.quadrature_order < 2 || s.quadrature_order > 256)
        throw ScenarioError("quadrature_order out of range [2, 256]");
    if (doc.contains("tolerances")) {
        s.tolerances = doc["tolerances"];
        for (auto it = s.tolerances.begin(); it != s.tolerances.end(); ++it)
            if (!it.value().is_number() || it.value().get<double>() <= 0.0)
                throw ScenarioError("tolerance '" + it.key() + "' must be a positive number");
    }
    std::vector<std::string> defined;
    if (doc.contains("currents")) {
        for (auto it = doc["currents"].begin(); it != doc["currents"].end(); ++it) {
            Scenario::CurrentDef def;
            def.name = it.key();
            const Json& body = it.value();
            def.file = body.value("file", "");
            def.fixture = body.value("fixture", "");
            def.params = body.value("params", Json::object());
            if (def.file.empty() == def.fixture.empty())
                throw ScenarioError("current '" + def.name +
                                    "' must carry exactly one of 'file' or 'fixture'");
            if (!def.fixture.empty()) {
                auto names = fixture_names();
                if (std::find(names.begin(), names.end(), def.fixture) == names.end())
                    throw ScenarioError("current '" + def.name + "': unknown fixture '" +
                                        def.fixture + "'");
            }
            defined.push_back(def.name);
            s.currents.push_back(std::move(def));
        }
    }
    bool randomized = false;
    if (!doc.contains("pipeline") || !doc["pipeline"].is_array())
        throw ScenarioError("scenario requires a 'pipeline' array");
    for (const auto& jop : doc["pipeline"]) {
        Scenario::OpDef op;
        op.op = jop.value("op", "");
        const auto& ops = detail::known_ops();
        if (std::find(ops.begin(), ops.end(), op.op) == ops.end())
            throw ScenarioError("unknown op '" + op.op + "' in pipeline");
        op.params = jop;
        randomized = randomized || detail::op_randomized(op.op);
        if (jop.contains("current")) {
            std::string ref = jop["current"].get<std::string>();
            if (std::find(defined.begin(), defined.end(), ref) == defined.end())
                throw ScenarioError("op '" + op.op + "' references undefined current '" + ref +
                                    "'");
        }
        if (jop.contains("output")) defined.push_back(jop["output"].get<std::string>());
        s.pipeline.push_back(std::move(op));
    }
    if (randomized && !s.has_seed)
        throw ScenarioError("scenario uses randomized probes; a 'seed' field is mandatory");
    return s;
}

struct ReportBundle {
    Json doc;
    bool all_passed = true;
    std::string dump() const { return doc.dump(2) + "\n"; }
};

namespace detail {

inline Json complex_json(Complex v) { return Json::array({v.real(), v.imag()}); }

inline Json mass_json(const MassReport& m) {
    Json j;
    j["total"] = m.total;
    j["per_cell"] = m.per_cell;
    j["quadrature_order"] = m.quadrature_order;
    j["estimated_error"] = m.estimated_error;
    return j;
}

inline Json classification_json(const ClassificationReport& rep) {
    Json j;
    j["verdict"] = rep.verdict;
    j["tolerance"] = rep.tolerance;
    if (!rep.note.empty()) j["note"] = rep.note;
    Json prof = Json::array();
    for (const auto& [bd, v] : rep.tested_profile)
        prof.push_back(Json{{"r", bd.r}, {"s", bd.s}, {"max_abs", v}});
    j["profile"] = std::move(prof);
    return j;
}

inline MetricForm form_from_params(int N, const Json& p) {
    MetricForm w;
    w.N = N;
    std::string f = p.value("f", "1");
    w.f = FormScalar::from_expr(ExpressionMap(2 * N, {parse_sexpr(f)}));
    if (p.contains("pis"))
        for (const auto& s : p["pis"])
            w.entries.push_back(FormEntry::from_expr(
                ExpressionMap(2 * N, {parse_sexpr(s.get<std::string>())})));
    return w;
}

} // namespace detail

// Executes the pipeline; op failures are recorded per result and do not stop
// independent later ops. Output is deterministic for a fixed (scenario, seed).
inline ReportBundle run_scenario(const Scenario& s, const std::string& base_dir = ".",
                                 bool with_timings = false) {
    ReportBundle bundle;
    bundle.doc["format"] = "currents-report/1";
    if (s.has_seed) bundle.doc["seed"] = s.seed;
    bundle.doc["quadrature_order"] = s.quadrature_order;
    bundle.doc["versions"] = Json{{"currents", "0.1.0"}};
    Json results = Json::array();

    std::map<std::string, RectifiableCurrent> env;
    for (const auto& def : s.currents) {
        if (!def.file.empty()) {
            std::filesystem::path p(def.file);
            if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
            env.emplace(def.name, load_current(p.string()));
        } else {
            env.emplace(def.name, make_fixture(def.fixture, def.params));
        }
    }

    auto tol_of = [&](const Json& p, const char* key, double dflt) {
        if (p.contains(key)) return p[key].get<double>();
        if (s.tolerances.contains(key)) return s.tolerances[key].get<double>();
        return dflt;
    };

    for (std::size_t oi = 0; oi < s.pipeline.size(); ++oi) {
        const auto& opdef = s.pipeline[oi];
        const Json& p = opdef.params;
        Json res;
        res["op"] = opdef.op;
        res["index"] = oi;
        res["provenance"] = Json{{"op", opdef.op}, {"params", p}};
        std::uint64_t op_seed = s.seed + 1000ull * (oi + 1);
        auto t0 = std::chrono::steady_clock::now();
        try {
            int order = p.value("order", s.quadrature_order);
            bool passed = true;
            Json out;
            auto current_of = [&](const char* key = "current") -> const RectifiableCurrent& {
                std::string name = p.at(key).get<std::string>();
                auto it = env.find(name);
                if (it == env.end()) throw ScenarioError("unknown current '" + name + "'");
                return it->second;
            };

            if (opdef.op == "mass") {
                MassReport m = mass(current_of(), order);
                out = detail::mass_json(m);
                if (p.contains("expect"))
                    passed = std::abs(m.total - p["expect"].get<double>()) <=
                             tol_of(p, "tol", 1e-8);
            } else if (opdef.op == "evaluate") {
                const auto& T = current_of();
                MetricForm w = detail::form_from_params(T.ambient.N, p);
                Complex v = evaluate(T, w, order);
                out["value"] = detail::complex_json(v);
                if (p.contains("expect")) {
                    Complex e(p["expect"][0].get<double>(), p["expect"][1].get<double>());
                    passed = std::abs(v - e) <= tol_of(p, "tol", 1e-8);
                }
            } else if (opdef.op == "boundary") {
                RectifiableCurrent dT = boundary(current_of());
                out["cells"] = dT.cells.size();
                out["dim"] = dT.dim;
                if (p.contains("output")) env.insert_or_assign(p["output"].get<std::string>(), dT);
            } else if (opdef.op == "pushforward") {
                const auto& T = current_of();
                ExpressionMap F = map_from_sexprs(2 * T.ambient.N,
                                                  p.at("map").get<std::vector<std::string>>(),
                                                  p.value("holomorphic", false));
                RectifiableCurrent img = pushforward(F, T);
                out["ambient_dim"] = img.ambient.N;
                if (p.contains("output")) env.insert_or_assign(p["output"].get<std::string>(), img);
            } else if (opdef.op == "project") {
                const auto& T = current_of();
                std::vector<int> idx;
                for (int i : p.at("indices").get<std::vector<int>>()) idx.push_back(i - 1);
                RectifiableCurrent img = project_current(CoordinateProjection(idx), T);
                out["tail_budget"] = img.tail_budget;
                if (p.contains("output")) env.insert_or_assign(p["output"].get<std::string>(), img);
            } else if (opdef.op == "pas-report") {
                const auto& T = current_of();
                auto prefixes = p.at("prefixes").get<std::vector<int>>();
                auto probes = full_coordinate_probes(T.ambient.N, T.dim,
                                                     p.value("probes", 4), op_seed);
                PasReport rep = pas_convergence_report(T, prefixes, probes, order);
                out["prefixes"] = rep.prefixes;
                out["entries"] = rep.entries;
                if (p.contains("max_last")) {
                    for (double v : rep.entries.back())
                        if (v > p["max_last"].get<double>()) passed = false;
                }
            } else if (opdef.op == "classify-bidimension") {
                const auto& T = current_of();
                auto rep = classify_bidimension(T, p.at("p").get<int>(), p.at("q").get<int>(),
                                                p.value("count", 32), tol_of(p, "tol", -1.0),
                                                order, op_seed);
                out = detail::classification_json(rep);
                if (p.contains("expect_verdict"))
                    passed = rep.verdict == p["expect_verdict"].get<bool>();
            } else if (opdef.op == "is-positive") {
                const auto& T = current_of();
                auto rep = is_positive(T, p.at("k").get<int>(), p.value("count", 32),
                                       tol_of(p, "tol", -1.0), order, op_seed);
                out = detail::classification_json(rep);
                if (p.contains("expect_verdict"))
                    passed = rep.verdict == p["expect_verdict"].get<bool>();
            } else if (opdef.op == "max-complex") {
                const auto& T = current_of();
                auto rep = is_maximally_complex(T, p.value("count", 32), tol_of(p, "tol", -1.0),
                                                order, op_seed);
                out = detail::classification_json(rep);
                if (p.contains("expect_verdict"))
                    passed = rep.verdict == p["expect_verdict"].get<bool>();
            } else if (opdef.op == "wirtinger") {
                const auto& T = current_of();
                auto rep = wirtinger_mass(T, p.at("k").get<int>(), order);
                out["coordinate_sum"] = rep.coordinate_sum;
                out["mass_total"] = rep.mass_total;
                out["ratio"] = rep.ratio;
                out["mass_le_sum"] = rep.mass_le_sum;
                out["imag_residual"] = rep.imag_residual;
                if (p.contains("expect_flag")) passed = rep.mass_le_sum == p["expect_flag"].get<bool>();
                if (passed && p.contains("expect_equal_rel"))
                    passed = std::abs(rep.coordinate_sum - rep.mass_total) <=
                             p["expect_equal_rel"].get<double>() * std::max(1.0, rep.mass_total);
            } else if (opdef.op == "slice") {
                const auto& T = current_of();
                std::vector<int> idx;
                for (int i : p.at("indices").get<std::vector<int>>()) idx.push_back(i - 1);
                std::vector<Complex> at;
                auto flat = p.at("at").get<std::vector<double>>();
                for (std::size_t i = 0; i + 1 < flat.size(); i += 2)
                    at.emplace_back(flat[i], flat[i + 1]);
                Slice sl = slice_points_robust(T, CoordinateProjection(idx), at, op_seed);
                out["regular"] = sl.regular;
                out["total_multiplicity"] = sl.total_multiplicity();
                Json atoms = Json::array();
                for (const auto& a : sl.atoms) {
                    Json ja;
                    Json pt = Json::array();
                    for (const auto& c : a.point) pt.push_back(detail::complex_json(c));
                    ja["point"] = std::move(pt);
                    ja["multiplicity"] = a.multiplicity;
                    atoms.push_back(std::move(ja));
                }
                out["atoms"] = std::move(atoms);
                if (p.contains("expect_total"))
                    passed = sl.total_multiplicity() == p["expect_total"].get<long long>();
            } else if (opdef.op == "slice-check") {
                const auto& T = current_of();
                std::vector<int> ridx;
                for (int i : p.at("real_indices").get<std::vector<int>>()) ridx.push_back(i - 1);
                MetricForm tail = detail::form_from_params(T.ambient.N, p.value("tail", Json::object()));
                auto lo = p.at("lo").get<std::vector<double>>();
                auto hi = p.at("hi").get<std::vector<double>>();
                auto r = slice_integral_check(T, ridx, tail, lo, hi, p.value("n", 256),
                                              p.value("eps", 0.05), order);
                out["residual"] = r.residual;
                out["slice_integral"] = detail::complex_json(r.slice_integral);
                out["contracted"] = detail::complex_json(r.contracted);
                if (p.contains("max_residual")) passed = r.residual <= p["max_residual"].get<double>();
            } else if (opdef.op == "king-reconstruct") {
                const auto& T = current_of();
                KingConfig cfg;
                cfg.grid_nodes = p.value("grid_nodes", 6);
                cfg.max_degree = p.value("max_degree", 12);
                cfg.grid_radius = p.value("grid_radius", -1.0);
                if (p.contains("grid_center")) {
                    std::vector<Complex> c;
                    auto flat = p["grid_center"].get<std::vector<double>>();
                    for (std::size_t i = 0; i + 1 < flat.size(); i += 2)
                        c.emplace_back(flat[i], flat[i + 1]);
                    cfg.grid_center = c;
                }
                cfg.tolerance = tol_of(p, "tolerance", 1e-6);
                cfg.order = order;
                cfg.seed = op_seed;
                auto rec = assemble_variety(T, cfg);
                out["support_residual"] = rec.support_residual;
                out["chain_multiplicities"] = rec.chain_multiplicities;
                Json projections = Json::array();
                for (const auto& pr : rec.projections) {
                    Json jp;
                    Json I = Json::array();
                    for (int i : pr.I) I.push_back(i + 1);
                    jp["I"] = std::move(I);
                    jp["sheets"] = pr.sheet_count;
                    jp["support_residual"] = pr.support_residual;
                    Json branches = Json::array();
                    for (const auto& bp : pr.branches) {
                        Json jb;
                        jb["j"] = bp.j + 1;
                        jb["degree"] = bp.degree;
                        jb["fit_residual"] = bp.fit_residual;
                        Json coeffs = Json::array();
                        for (const auto& fit : bp.coeff_fits) {
                            Json jc = Json::array();
                            for (std::size_t m = 0; m < fit.monomials.size(); ++m) {
                                Json term;
                                term["exponents"] = fit.monomials[m];
                                term["value"] = detail::complex_json(fit.coeffs[m]);
                                jc.push_back(std::move(term));
                            }
                            coeffs.push_back(std::move(jc));
                        }
                        jb["elementary_symmetric_fits"] = std::move(coeffs);
                        branches.push_back(std::move(jb));
                    }
                    jp["branches"] = std::move(branches);
                    projections.push_back(std::move(jp));
                }
                out["projections"] = std::move(projections);
                out["skipped"] = rec.skipped;
                if (p.contains("max_support_residual"))
                    passed = rec.support_residual <= p["max_support_residual"].get<double>();
            } else if (opdef.op == "solve-boundary") {
                const auto& M = current_of();
                SolverConfig cfg;
                cfg.seed = op_seed;
                cfg.shadow_samples = p.value("samples", 2048);
                cfg.grid_nx = p.value("grid", 72);
                cfg.panels = p.value("panels", 1024);
                cfg.fit_degree = p.value("fit_degree", 16);
                cfg.extra_moments = p.value("smax_extra", 2);
                cfg.quad_order = p.value("quadrature", 24);
                int trunc = p.value("trunc", M.ambient.N);
                ChainSolution chain = assemble(M, trunc, cfg);
                out["tail_bound"] = chain.tail_bound;
                out["fully_materialized"] = chain.fully_materialized;
                if (!chain.faces.empty() && chain.fully_materialized)
                    out["mass"] = detail::mass_json(chain.mass_report);
                Json faces = Json::array();
                for (const auto& fsol : chain.faces) {
                    Json jf;
                    jf["face"] = fsol.face;
                    jf["winding"] =
                        chain.arrangement.faces[static_cast<std::size_t>(fsol.face)].winding;
                    jf["sheets"] = fsol.sheets;
                    jf["fit_residual"] = fsol.fit_residual;
                    jf["coherence_residual"] = fsol.coherence_residual;
                    jf["fill"] = fsol.fill;
                    faces.push_back(std::move(jf));
                }
                out["faces"] = std::move(faces);
                out["face_count"] = chain.arrangement.faces.size();
                if (p.value("with_shadow", false)) {
                    Json shadow = Json::array();
                    for (const auto& loop : chain.arrangement.loops)
                        for (const auto& z : loop.pts) shadow.push_back(detail::complex_json(z));
                    out["shadow"] = std::move(shadow);
                }
                if (p.value("with_branches", false)) {
                    Json jb = Json::array();
                    for (const auto& fsol : chain.faces) {
                        Json jf;
                        jf["face"] = fsol.face;
                        Json rows = Json::array();
                        for (std::size_t pos = 0; pos < fsol.nodes.size(); ++pos) {
                            Json row = Json::array();
                            Complex z = chain.arrangement.node_point(fsol.nodes[pos]);
                            row.push_back(z.real());
                            row.push_back(z.imag());
                            for (long long h = 0; h < fsol.sheets; ++h)
                                for (std::size_t j = 0; j < fsol.values.size(); ++j) {
                                    Complex v = fsol.values[j][pos][static_cast<std::size_t>(h)];
                                    row.push_back(v.real());
                                    row.push_back(v.imag());
                                }
                            rows.push_back(std::move(row));
                        }
                        jf["rows"] = std::move(rows);
                        jf["sheets"] = fsol.sheets;
                        jf["coords"] = fsol.values.size();
                        jb.push_back(std::move(jf));
                    }
                    out["branches"] = std::move(jb);
                }
                int vprobes = p.value("verify_probes", 0);
                if (vprobes > 0 && chain.fully_materialized) {
                    VerifyReport vr = verify_boundary(chain.chain, M, vprobes, cfg.quad_order,
                                                      op_seed + 7);
                    out["verify_residual"] = vr.residual;
                    if (p.contains("max_verify_residual"))
                        passed = passed && vr.residual <= p["max_verify_residual"].get<double>();
                }
                if (p.contains("expect_sheets")) {
                    std::vector<long long> got;
                    for (const auto& fsol : chain.faces) got.push_back(fsol.sheets);
                    std::sort(got.begin(), got.end());
                    auto want = p["expect_sheets"].get<std::vector<long long>>();
                    std::sort(want.begin(), want.end());
                    passed = passed && got == want;
                }
            } else if (opdef.op == "verify-boundary") {
                const auto& T = current_of("candidate");
                std::string datum_name = p.at("datum").get<std::string>();
                auto it = env.find(datum_name);
                if (it == env.end()) throw ScenarioError("unknown current '" + datum_name + "'");
                VerifyReport vr = verify_boundary(T, it->second, p.value("probes", 50), order,
                                                  op_seed);
                out["residual"] = vr.residual;
                out["mass_candidate"] = vr.mass_candidate;
                out["mass_datum"] = vr.mass_datum;
                if (p.contains("max_residual")) passed = vr.residual <= p["max_residual"].get<double>();
            } else if (opdef.op == "validate-cycle") {
                CycleReport rep = validate_cycle(current_of());
                out["cycle_ok"] = rep.cycle_ok;
                out["cycle_residual"] = rep.cycle_residual;
                out["immersion_ok"] = rep.immersion_ok;
                out["min_shadow_speed"] = rep.min_shadow_speed;
                out["crossings"] = rep.crossings;
                out["transversal_ok"] = rep.transversal_ok;
                out["shadow_overlaps"] = rep.shadow_overlaps;
                out["moment_condition_required"] = rep.moment_condition_required;
                if (p.contains("expect_pass")) passed = rep.passed() == p["expect_pass"].get<bool>();
            } else if (opdef.op == "arrangement") {
                SolverConfig cfg;
                cfg.shadow_samples = p.value("samples", 2048);
                cfg.grid_nx = p.value("grid", 72);
                PlanarArrangement arr = build_arrangement(current_of(), cfg);
                Json faces = Json::array();
                for (const auto& f : arr.faces)
                    faces.push_back(Json{{"winding", f.winding},
                                         {"unbounded", f.unbounded},
                                         {"nodes", f.nodes.size()}});
                out["faces"] = std::move(faces);
                out["face_count"] = arr.faces.size();
                if (p.contains("expect_faces"))
                    passed = static_cast<int>(arr.faces.size()) == p["expect_faces"].get<int>();
            } else if (opdef.op == "solve-scalar") {
                const auto& M = current_of();
                SolverConfig cfg;
                cfg.seed = op_seed;
                cfg.shadow_samples = p.value("samples", 2048);
                cfg.grid_nx = p.value("grid", 72);
                cfg.panels = p.value("panels", 1024);
                PlanarArrangement arr = build_arrangement(M, cfg);
                MomentEngine engine(M, cfg);
                ScalarSolution sol = solve_scalar(engine, arr, p.at("coord").get<int>() - 1, cfg);
                Json faces = Json::array();
                std::vector<long long> sheets;
                for (std::size_t f = 0; f < sol.faces.size(); ++f) {
                    faces.push_back(Json{{"winding", arr.faces[f].winding},
                                         {"sheets", sol.faces[f].sheets},
                                         {"consistency_residual", sol.faces[f].consistency_residual}});
                    sheets.push_back(sol.faces[f].sheets);
                }
                out["faces"] = std::move(faces);
                if (p.contains("expect_sheets")) {
                    std::sort(sheets.begin(), sheets.end());
                    auto want = p["expect_sheets"].get<std::vector<long long>>();
                    std::sort(want.begin(), want.end());
                    passed = sheets == want;
                }
            } else if (opdef.op == "moments") {
                const auto& M = current_of();
                SolverConfig cfg;
                cfg.shadow_samples = p.value("samples", 2048);
                cfg.panels = p.value("panels", 1024);
                PlanarArrangement arr = build_arrangement(M, cfg);
                MomentEngine engine(M, cfg);
                Complex z(p.at("at")[0].get<double>(), p.at("at")[1].get<double>());
                auto vals = cauchy_moments(engine, arr, p.at("coord").get<int>() - 1, z,
                                           p.value("smax", 3));
                Json jm = Json::array();
                for (const auto& v : vals) jm.push_back(detail::complex_json(v));
                out["moments"] = std::move(jm);
            } else {
                throw ScenarioError("unhandled op '" + opdef.op + "'");
            }
            res["status"] = "ok";
            res["passed"] = passed;
            res["output"] = std::move(out);
            if (!passed) bundle.all_passed = false;
        } catch (const std::exception& e) {
            res["status"] = "error";
            res["passed"] = false;
            res["error"] = e.what();
            bundle.all_passed = false;
        }
        if (with_timings) {
            auto t1 = std::chrono::steady_clock::now();
            res["wall_time_ms"] =
                std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
        }
        results.push_back(std::move(res));
    }
    bundle.doc["results"] = std::move(results);
    bundle.doc["all_passed"] = bundle.all_passed;
    return bundle;
}

// ---------------------------------------------------------------------------
// Plot-data emission
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

// CSV tables out of a report bundle; UTF-8, LF, 17 significant digits.
inline std::string emit_plotdata(const Json& bundle, const std::string& selector) {
    auto find_output = [&](const std::string& op, const char* field) -> const Json* {
        if (!bundle.contains("results")) return nullptr;
        for (const auto& r : bundle["results"])
            if (r.value("op", "") == op && r.contains("output") &&
                r["output"].contains(field))
                return &r["output"][field];
        return nullptr;
    };

    std::string name = selector;
    std::string arg;
    if (auto pos = selector.find(':'); pos != std::string::npos) {
        name = selector.substr(0, pos);
        arg = selector.substr(pos + 1);
    }
    std::ostringstream csv;
    if (name == "shadow") {
        csv << "re,im\n";
        if (const Json* shadow = find_output("solve-boundary", "shadow"))
            for (const auto& z : *shadow)
                csv << detail::fmt17(z[0].get<double>()) << ','
                    << detail::fmt17(z[1].get<double>()) << '\n';
        return csv.str();
    }
    if (name == "branches") {
        int face = -1;
        if (arg.rfind("face=", 0) == 0) face = std::stoi(arg.substr(5));
        const Json* branches = find_output("solve-boundary", "branches");
        long long sheets = 0;
        std::size_t coords = 0;
        const Json* table = nullptr;
        if (branches)
            for (const auto& jf : *branches)
                if (face < 0 || jf.value("face", -1) == face) {
                    table = &jf;
                    sheets = jf.value("sheets", 0ll);
                    coords = jf.value("coords", std::size_t{0});
                    break;
                }
        csv << "re_z,im_z";
        for (long long h = 1; h <= sheets; ++h)
            for (std::size_t j = 1; j <= coords; ++j)
                csv << ",re_F" << h << "_" << j + 1 << ",im_F" << h << "_" << j + 1;
        csv << '\n';
        if (table)
            for (const auto& row : (*table)["rows"]) {
                for (std::size_t i = 0; i < row.size(); ++i)
                    csv << (i ? "," : "") << detail::fmt17(row[i].get<double>());
                csv << '\n';
            }
        return csv.str();
    }
    if (name == "atoms") {
        const Json* atoms = nullptr;
        if (bundle.contains("results"))
            for (const auto& r : bundle["results"])
                if (r.value("op", "") == "slice" && r.contains("output"))
                    atoms = &r["output"]["atoms"];
        csv << "multiplicity";
        std::size_t n_coords = 0;
        if (atoms && !atoms->empty()) n_coords = (*atoms)[0]["point"].size();
        for (std::size_t c = 1; c <= n_coords; ++c) csv << ",re_z" << c << ",im_z" << c;
        csv << '\n';
        if (atoms)
            for (const auto& a : *atoms) {
                csv << a["multiplicity"].get<long long>();
                for (const auto& z : a["point"])
                    csv << ',' << detail::fmt17(z[0].get<double>()) << ','
                        << detail::fmt17(z[1].get<double>());
                csv << '\n';
            }
        return csv.str();
    }
    if (name == "convergence") {
        const Json* entries = find_output("pas-report", "entries");
        const Json* prefixes = find_output("pas-report", "prefixes");
        csv << "prefix";
        std::size_t cols = (entries && !entries->empty()) ? (*entries)[0].size() : 0;
        for (std::size_t c = 1; c <= cols; ++c) csv << ",probe" << c;
        csv << '\n';
        if (entries && prefixes)
            for (std::size_t i = 0; i < entries->size(); ++i) {
                csv << (*prefixes)[i].get<int>();
                for (const auto& v : (*entries)[i]) csv << ',' << detail::fmt17(v.get<double>());
                csv << '\n';
            }
        return csv.str();
    }
    throw ScenarioError("unknown plot selector '" + selector + "'");
}

} // namespace currents
