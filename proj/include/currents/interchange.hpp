#pragma once

#include <fstream>
#include <json.hpp>

#include "currents/fixtures.hpp"
#include "currents/sexpr.hpp"

namespace currents {

using Json = nlohmann::ordered_json;

struct InterchangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// {ambient_dim, dim, cells: [{k, multiplicity, param: [s-expressions]}]}
inline Json current_to_json(const RectifiableCurrent& T) {
    Json doc;
    doc["format"] = "currents/1";
    doc["ambient_dim"] = T.ambient.N;
    doc["dim"] = T.dim;
    if (T.tail_budget != 0.0) doc["tail_budget"] = T.tail_budget;
    Json cells = Json::array();
    for (const Cell& c : T.cells) {
        Json jc;
        jc["k"] = c.dim;
        jc["multiplicity"] = c.multiplicity;
        jc["param"] = to_sexprs(c.param);
        cells.push_back(std::move(jc));
    }
    doc["cells"] = std::move(cells);
    return doc;
}

inline RectifiableCurrent current_from_json(const Json& doc) {
    if (!doc.is_object()) throw InterchangeError("current document must be a JSON object");
    for (const char* key : {"ambient_dim", "dim", "cells"})
        if (!doc.contains(key))
            throw InterchangeError(std::string("current document missing field '") + key + "'");
    int N = doc["ambient_dim"].get<int>();
    int dim = doc["dim"].get<int>();
    if (N < 1) throw InterchangeError("ambient_dim must be >= 1");
    std::vector<Cell> cells;
    for (const auto& jc : doc["cells"]) {
        int k = jc.at("k").get<int>();
        long long mult = jc.value("multiplicity", 1ll);
        std::vector<std::string> exprs = jc.at("param").get<std::vector<std::string>>();
        if (static_cast<int>(exprs.size()) != N)
            throw InterchangeError("cell parametrization must have one expression per ambient "
                                   "coordinate");
        cells.emplace_back(k, map_from_sexprs(k, exprs), mult);
    }
    double tail = doc.value("tail_budget", 0.0);
    return RectifiableCurrent(AmbientSpace(N), dim, std::move(cells), tail);
}

inline void save_current(const RectifiableCurrent& T, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InterchangeError("cannot open '" + path + "' for writing");
    out << current_to_json(T).dump(2) << "\n";
}

inline RectifiableCurrent load_current(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InterchangeError("cannot open '" + path + "'");
    Json doc = Json::parse(in);
    return current_from_json(doc);
}

// ---------------------------------------------------------------------------
// Fixture registry (generator CLI and scenarios)
// ---------------------------------------------------------------------------

inline RectifiableCurrent make_fixture(const std::string& name, const Json& p) {
    auto num = [&](const char* key, double dflt) { return p.value(key, dflt); };
    auto integer = [&](const char* key, int dflt) { return p.value(key, dflt); };
    using namespace fixtures;
    if (name == "disk") return disk(integer("N", 1), num("rho", 1.0),
                                    Complex(num("cx", 0.0), num("cy", 0.0)));
    if (name == "circle") return circle(integer("N", 1), num("rho", 1.0),
                                        Complex(num("cx", 0.0), num("cy", 0.0)));
    if (name == "parabola-graph") return parabola_graph(num("rho", 1.0));
    if (name == "zpowers-graph") return zpowers_graph(integer("N", 3), num("rho", 0.9));
    if (name == "factorial-graph") return factorial_graph(integer("N", 12), num("rho", 1.0));
    if (name == "branch-pair") return branch_pair(num("r0", 0.5), num("r1", 1.0));
    if (name == "half-branch") return half_branch(num("r0", 0.5), num("r1", 1.0));
    if (name == "plane-piece")
        return plane_piece(num("rin", 0.25), num("rout", 1.0), integer("multiplicity", 1));
    if (name == "line-graph") {
        std::vector<std::vector<Complex>> fibers{{Complex(num("b", 0.0)), Complex(num("a", 1.0))}};
        return graph_over_disk(fibers, num("rho", 1.0), integer("multiplicity", 1));
    }
    if (name == "real-plane") return real_plane(integer("N", 2));
    if (name == "bidisk-graph") return bidisk_graph(num("rho", 0.9));
    if (name == "s3-graph") return s3_graph_boundary(num("rho", 1.0));
    if (name == "torus3") return torus3(num("rho", 0.9));
    if (name == "parabola-curve") return parabola_curve();
    if (name == "factorial-curve") return factorial_curve(integer("N", 12));
    if (name == "scaled-parabola-curve") return scaled_parabola_curve(num("s", 1.0));
    if (name == "perturbed-curve") return perturbed_curve(num("a", 0.1));
    if (name == "branch-boundary") return branch_boundary(num("r0", 0.5), num("r1", 1.0));
    if (name == "limacon-curve") return limacon_curve(integer("N", 3), num("c", 0.55));
    if (name == "gerono-curve") return gerono_curve(integer("N", 2));
    if (name == "two-circles") return two_circles(num("sep", 1.6), num("rho", 0.6));
    if (name == "nested-pair") return nested_pair(num("rin", 0.4));
    if (name == "collapsed-curve") return collapsed_curve();
    if (name == "circle-graph") return circle_graph_half_square();
    throw InterchangeError("unknown fixture '" + name + "'");
}

inline std::vector<std::string> fixture_names() {
    return {"disk",          "circle",          "parabola-graph", "zpowers-graph",
            "factorial-graph", "branch-pair",   "half-branch",    "plane-piece",
            "line-graph",    "real-plane",      "bidisk-graph",   "s3-graph",
            "torus3",        "parabola-curve",  "factorial-curve", "scaled-parabola-curve",
            "perturbed-curve", "branch-boundary", "limacon-curve", "gerono-curve",
            "two-circles",   "nested-pair",     "collapsed-curve", "circle-graph"};
}

} // namespace currents
