#include "doctest.h"

#include <stdexcept>
#include "orbitcsp/universe.hpp"

#include <sstream>

using namespace orbitcsp;

TEST_CASE("builtin universes") {
    CHECK(UniverseSpec::graph().k == 2);
    CHECK(UniverseSpec::hypergraph(3).k == 3);
    CHECK(UniverseSpec::k3free().bounds.size() == 1);
    CHECK_THROWS_AS(UniverseSpec::builtin("nope"), std::invalid_argument);
}

TEST_CASE("bound parameter and default ell") {
    CHECK(UniverseSpec::hypergraph(3).b_bound() == 3);
    CHECK(UniverseSpec::hypergraph(3).default_ell() == 4);
    CHECK(UniverseSpec::k3free().b_bound() == 3);
    CHECK(UniverseSpec::k3free().default_ell() == 3);
    CHECK(UniverseSpec::graph().default_ell() == 3);
}

TEST_CASE("validate rejects malformed bounds") {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    ForbiddenStructure b;
    b.size = 4;
    b.edges = {{0, 1, 1}};
    u.bounds = {b};
    CHECK_THROWS_AS(u.validate(), std::invalid_argument);
    b.edges = {{0, 1, 5}};
    u.bounds = {b};
    CHECK_THROWS_AS(u.validate(), std::invalid_argument);
}

TEST_CASE("validate enforces closure under homomorphic images") {
    // forbidding only a path of length 2 is not hom-closed: identifying its
    // endpoints yields a single edge, which is not a bound
    UniverseSpec u;
    u.name = "bad";
    u.k = 2;
    ForbiddenStructure p2;
    p2.size = 3;
    p2.edges = {{0, 1}, {1, 2}};
    u.bounds = {p2};
    CHECK_THROWS_AS(u.validate(), std::invalid_argument);
    // the triangle is fine: its only non-collapsing quotient is itself
    CHECK_NOTHROW(UniverseSpec::k3free().validate());
}

TEST_CASE("k3free realizability oracle") {
    UniverseSpec u = UniverseSpec::k3free();
    Fragment triangle = Fragment::empty(2, 3, Tri::True);
    CHECK_FALSE(realizable(triangle, u));
    Fragment path = Fragment::empty(2, 3, Tri::False);
    path.set_flag({0, 1}, Tri::True);
    path.set_flag({1, 2}, Tri::True);
    CHECK(realizable(path, u));
    // C5 is triangle-free
    Fragment c5 = Fragment::empty(2, 5, Tri::False);
    c5.set_flag({0, 1}, Tri::True);
    c5.set_flag({1, 2}, Tri::True);
    c5.set_flag({2, 3}, Tri::True);
    c5.set_flag({3, 4}, Tri::True);
    c5.set_flag({0, 4}, Tri::True);
    CHECK(realizable(c5, u));
    // K4 minus an edge contains a triangle
    Fragment k4e = Fragment::empty(2, 4, Tri::True);
    k4e.set_flag({0, 3}, Tri::False);
    CHECK_FALSE(realizable(k4e, u));
}

TEST_CASE("generic universes realize everything") {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    Fragment all = Fragment::empty(3, 5, Tri::True);
    CHECK(realizable(all, u));
}

TEST_CASE("orbit enumeration counts") {
    // generic 3-uniform hypergraph: injective m-tuples are classified by the
    // induced hypergraph on m points
    UniverseSpec h3 = UniverseSpec::hypergraph(3);
    CHECK(enumerate_orbits(h3, 3, true).size() == 2);
    CHECK(enumerate_orbits(h3, 4, true).size() == 16);
    // m = 2 < k: patterns only
    CHECK(enumerate_orbits(h3, 2, false).size() == 2);
    // all m = 3 orbits: 5 patterns, the discrete one splits in two
    CHECK(enumerate_orbits(h3, 3, false).size() == 6);

    // generic graph: 2^3 graphs on 3 points
    CHECK(enumerate_orbits(UniverseSpec::graph(), 3, true).size() == 8);
    // triangle-free: drop exactly the triangle
    CHECK(enumerate_orbits(UniverseSpec::k3free(), 3, true).size() == 7);
}

TEST_CASE("universe format round-trip") {
    UniverseSpec u = UniverseSpec::k3free();
    std::string text = u.to_text();
    UniverseSpec v = UniverseSpec::parse_text(text);
    CHECK(v.name == u.name);
    CHECK(v.k == u.k);
    CHECK(v.bounds.size() == 1);
    CHECK(v.bounds[0].edges == u.bounds[0].edges);
}

TEST_CASE("universe parser accepts the documented syntax") {
    std::string text =
        "# triangle-free graphs\n"
        "universe k3free k=2\n"
        "bound 3\n"
        "E(0 1)\n"
        "E(0 2)\n"
        "E(1 2)\n"
        "end\n";
    UniverseSpec u = UniverseSpec::parse_text(text);
    CHECK(u.k == 2);
    CHECK(u.bounds[0].size == 3);
    CHECK(u.bounds[0].edges.size() == 3);
}
