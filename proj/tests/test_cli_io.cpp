#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "currents/scenario.hpp"

using namespace currents;
using Catch::Approx;

TEST_CASE("interchange round trip is semantically idempotent") {
    for (const char* name : {"disk", "parabola-graph", "branch-pair", "factorial-curve",
                             "s3-graph", "limacon-curve"}) {
        auto T = make_fixture(name, Json::object());
        Json doc = current_to_json(T);
        auto T2 = current_from_json(doc);
        Json doc2 = current_to_json(T2);
        CHECK(doc.dump() == doc2.dump());
        CHECK(T2.ambient.N == T.ambient.N);
        CHECK(T2.dim == T.dim);
        REQUIRE(T2.cells.size() == T.cells.size());
    }
    // round-tripped currents evaluate identically
    auto T = make_fixture("parabola-graph", Json::object());
    auto T2 = current_from_json(current_to_json(T));
    MetricForm w(2, FormScalar::one(2),
                 {coordinate_entry(2, 0), coordinate_entry(2, 1, true)});
    CHECK(std::abs(evaluate(T, w, 12) - evaluate(T2, w, 12)) < 1e-15);
}

TEST_CASE("interchange rejects malformed documents") {
    CHECK_THROWS_AS(current_from_json(Json::parse(R"({"dim": 2, "cells": []})")),
                    InterchangeError);
    CHECK_THROWS_AS(
        current_from_json(Json::parse(
            R"({"ambient_dim": 2, "dim": 2, "cells": [{"k": 2, "param": ["u1"]}]})")),
        InterchangeError);
    CHECK_THROWS_AS(make_fixture("no-such-fixture", Json::object()), InterchangeError);
}

TEST_CASE("scenario validation reports precise failures") {
    // minimal scenario parses
    auto ok = parse_scenario(R"({
        "seed": 1,
        "currents": {"d": {"fixture": "disk"}},
        "pipeline": [{"op": "mass", "current": "d"}]
    })");
    CHECK(ok.pipeline.size() == 1);

    // unknown op names the op
    try {
        parse_scenario(R"({"currents": {"d": {"fixture": "disk"}},
                           "pipeline": [{"op": "frobnicate", "current": "d"}]})");
        FAIL("expected ScenarioError");
    } catch (const ScenarioError& e) {
        CHECK(std::string(e.what()).find("frobnicate") != std::string::npos);
    }

    // negative tolerance rejected
    CHECK_THROWS_AS(parse_scenario(R"({"tolerances": {"tol": -1.0}, "pipeline": []})"),
                    ScenarioError);
    // randomized ops demand a seed
    CHECK_THROWS_AS(parse_scenario(R"({
        "currents": {"d": {"fixture": "disk"}},
        "pipeline": [{"op": "is-positive", "current": "d", "k": 1}]})"),
                    ScenarioError);
    // undefined current reference
    CHECK_THROWS_AS(parse_scenario(R"({
        "seed": 1, "currents": {"d": {"fixture": "disk"}},
        "pipeline": [{"op": "mass", "current": "nope"}]})"),
                    ScenarioError);
    // parse errors carry a byte offset
    try {
        parse_scenario("{\"pipeline\": [");
        FAIL("expected ScenarioError");
    } catch (const ScenarioError& e) {
        CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
}

TEST_CASE("scenario runs record per-op failures without aborting") {
    auto s = parse_scenario(R"({
        "seed": 5,
        "currents": {"d": {"fixture": "disk"}},
        "pipeline": [
            {"op": "slice", "current": "d", "indices": [2], "at": [0.0, 0.0]},
            {"op": "mass", "current": "d", "expect": 3.14159265358979312, "tol": 1e-9}
        ]
    })");
    ReportBundle b = run_scenario(s);
    CHECK(b.doc["results"][0]["status"] == "error"); // index out of range
    CHECK(b.doc["results"][1]["status"] == "ok");
    CHECK(b.doc["results"][1]["passed"] == true);
    CHECK_FALSE(b.all_passed);
}

TEST_CASE("identical scenario and seed produce byte-identical bundles") {
    const char* text = R"({
        "seed": 11,
        "currents": {"g": {"fixture": "parabola-graph"}},
        "pipeline": [
            {"op": "mass", "current": "g"},
            {"op": "classify-bidimension", "current": "g", "p": 1, "q": 1, "count": 8},
            {"op": "slice", "current": "g", "indices": [1], "at": [0.25, 0.0]}
        ]
    })";
    auto s = parse_scenario(text);
    std::string b1 = run_scenario(s).dump();
    std::string b2 = run_scenario(s).dump();
    CHECK(b1 == b2);

    // thread cap must not change the bytes
    setenv("CURRENTS_THREADS", "1", 1);
    std::string b_single = run_scenario(s).dump();
    setenv("CURRENTS_THREADS", "2", 1);
    std::string b_two = run_scenario(s).dump();
    unsetenv("CURRENTS_THREADS");
    CHECK(b_single == b1);
    CHECK(b_two == b1);
}

TEST_CASE("plot emission produces CSV tables") {
    auto s = parse_scenario(R"({
        "seed": 3,
        "currents": {"m": {"fixture": "parabola-curve"}},
        "pipeline": [
            {"op": "solve-boundary", "current": "m", "trunc": 2, "grid": 40,
             "samples": 512, "panels": 256, "with_shadow": true, "with_branches": true},
            {"op": "slice", "current": "m"}
        ]
    })");
    // the slice op above is invalid for a curve; it records an error and the
    // emission still finds the solve results
    ReportBundle b = run_scenario(s);
    std::string shadow = emit_plotdata(b.doc, "shadow");
    CHECK(shadow.rfind("re,im\n", 0) == 0);
    CHECK(std::count(shadow.begin(), shadow.end(), '\n') > 500);
    std::string branches = emit_plotdata(b.doc, "branches:face=1");
    CHECK(branches.find("re_z,im_z") == 0);
    CHECK(std::count(branches.begin(), branches.end(), '\n') > 100);
    // selectors with no payload give a header-only table
    std::string atoms = emit_plotdata(b.doc, "atoms");
    CHECK(atoms == "multiplicity\n");
    CHECK_THROWS_AS(emit_plotdata(b.doc, "nonsense"), ScenarioError);
}

TEST_CASE("fixture registry covers every advertised name") {
    for (const auto& name : fixture_names()) {
        auto T = make_fixture(name, Json::object());
        CHECK(T.ambient.N >= 1);
        CHECK_FALSE(T.cells.empty());
    }
}
