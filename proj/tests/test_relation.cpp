#include "doctest.h"

#include <stdexcept>
#include "orbitcsp/relation.hpp"

using namespace orbitcsp;

static UniverseSpec h3() { return UniverseSpec::hypergraph(3); }

TEST_CASE("from_orbits sorts, dedupes, checks arity") {
    auto orbits = enumerate_orbits(h3(), 3, true);
    REQUIRE(orbits.size() == 2);
    Relation r = Relation::from_orbits(3, {orbits[1], orbits[0], orbits[1]});
    CHECK(r.orbits.size() == 2);
    CHECK(r.orbits[0] < r.orbits[1]);
    CHECK_THROWS_AS(Relation::from_orbits(4, {orbits[0]}), std::invalid_argument);
}

TEST_CASE("boolean algebra on arity-k orbits") {
    UniverseSpec u = h3();
    auto all = enumerate_orbits(u, 3, false);
    Relation full = Relation::from_orbits(3, all);
    Relation empty = Relation::from_orbits(3, {});
    CHECK(rel_complement(full, u) == empty);
    CHECK(rel_complement(empty, u) == full);
    // complement is an involution; union/intersection behave
    auto inj = enumerate_orbits(u, 3, true);
    Relation e = Relation::from_orbits(3, {inj[1]});
    CHECK(rel_complement(rel_complement(e, u), u) == e);
    CHECK(rel_union(e, rel_complement(e, u)) == full);
    CHECK(rel_intersect(e, rel_complement(e, u)) == empty);
}

TEST_CASE("projection and injective restriction") {
    auto inj = enumerate_orbits(h3(), 3, true);
    Relation e = Relation::from_orbits(3, {inj[1]});
    std::vector<int> pos = {0, 1};
    Relation p = rel_project(e, pos);
    CHECK(p.arity == 2);
    CHECK(p.orbits.size() == 1);
    CHECK(p.orbits[0].pattern.is_discrete());

    auto all = enumerate_orbits(h3(), 3, false);
    Relation full = Relation::from_orbits(3, all);
    CHECK(rel_restrict_injective(full).orbits.size() == 2);
}

TEST_CASE("template plain relations") {
    Template t = Template::plain(h3());
    CHECK(t.has_relation("E"));
    CHECK(t.has_relation("N"));
    CHECK(t.has_relation("EQ"));
    CHECK(t.has_relation("NEQ"));
    CHECK(t.relation("E").orbits.size() == 1);
    CHECK(t.relation("E").injective());
    CHECK(t.relation("E").orbits[0].flags == std::vector<std::uint8_t>{1});
    CHECK(t.relation("N").orbits[0].flags == std::vector<std::uint8_t>{0});
    CHECK_THROWS_AS((void)t.relation("missing"), std::invalid_argument);
}

TEST_CASE("template rejects unrealizable orbits and duplicate names") {
    Template t = Template::plain(UniverseSpec::k3free());
    // triangle orbit: 3 distinct points, all pairs flagged
    OrbitDescriptor tri;
    tri.k = 2;
    tri.pattern = Pattern::discrete(3);
    tri.flags = {1, 1, 1};
    CHECK_THROWS_AS(t.add_relation("T", Relation::from_orbits(3, {tri})), std::invalid_argument);
    CHECK_THROWS_AS(t.add_relation("E", t.relation("E")), std::invalid_argument);
}

TEST_CASE("ensure_relation is content-addressed and deterministic") {
    Template t = Template::plain(h3());
    Relation r = rel_union(t.relation("E"), t.relation("N"));
    std::string n1 = t.ensure_relation(r);
    std::string n2 = t.ensure_relation(r);
    CHECK(n1 == n2);
    CHECK(t.relation(n1) == r);
    // existing relations resolve to their original names
    CHECK(t.ensure_relation(t.relation("E")) == "E");
}
