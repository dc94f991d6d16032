#include "doctest.h"

#include <stdexcept>
#include "orbitcsp/formats.hpp"
#include "orbitcsp/minimality.hpp"

using namespace orbitcsp;

namespace {

Template h3_plain() { return Template::plain(UniverseSpec::hypergraph(3)); }

}  // namespace

TEST_CASE("orbit descriptors round-trip through their printed form") {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    for (int arity : {2, 3, 4})
        for (bool inj : {false, true})
            for (const auto& o : enumerate_orbits(u, arity, inj)) {
                OrbitDescriptor back = parse_orbit(o.to_string(), u.k);
                CHECK(back == o);
            }
    CHECK_THROWS_AS(parse_orbit("[0,1,2]", 3), std::invalid_argument);
    CHECK_THROWS_AS(parse_orbit("[0,1,2|]", 3), std::invalid_argument);
    CHECK_THROWS_AS(parse_orbit("[0,1,2|2]", 3), std::invalid_argument);
}

TEST_CASE("relations round-trip, including the empty relation") {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    Relation full = Relation::from_orbits(3, enumerate_orbits(u, 3, false));
    CHECK(parse_relation(full.to_string(), 3, u.k) == full);
    Relation empty = Relation::from_orbits(3, {});
    CHECK(parse_relation("{}", 3, u.k) == empty);
    CHECK(parse_relation("{ }", 3, u.k) == empty);
    CHECK_THROWS_AS(parse_relation("[0,1|]", 2, u.k), std::invalid_argument);
    CHECK_THROWS_AS(parse_relation(full.to_string(), 2, u.k), std::invalid_argument);
}

TEST_CASE("pp formulas round-trip through their printed form") {
    PPFormula f;
    f.free = {"x", "y"};
    f.add_var("x");
    f.add_var("y");
    f.add_var("z");
    f.atoms.push_back({"E", {"x", "y", "z"}});
    f.eqs.emplace_back("x", "y");
    f.neqs.emplace_back("y", "z");
    std::string name;
    PPFormula back = parse_pp(f.to_text("phi"), &name);
    CHECK(name == "phi");
    CHECK(back.to_text("phi") == f.to_text("phi"));

    PPFormula empty;
    empty.free = {"x"};
    empty.add_var("x");
    PPFormula eback = parse_pp(empty.to_text("top"));
    CHECK(eback.to_text("top") == empty.to_text("top"));
    CHECK_THROWS_AS(parse_pp("free(x) := true"), std::invalid_argument);
}

TEST_CASE("instances round-trip, stamp included") {
    Template t = h3_plain();
    Instance inst;
    inst.vars = {"x", "y", "z", "w"};
    inst.constraints.push_back({{"x", "y", "z"}, t.relation("E")});
    inst.constraints.push_back({{"x", "w"}, t.relation("NEQ")});
    Instance back = parse_instance_text(inst.to_text(), t);
    CHECK(back.to_text() == inst.to_text());
    CHECK_FALSE(back.minimality_level.has_value());

    Instance m = kl_minimalize(inst, 3, 4, t.universe());
    Instance mback = parse_instance_text(m.to_text(), t);
    CHECK(mback.to_text() == m.to_text());
    REQUIRE(mback.minimality_level.has_value());
    CHECK(*mback.minimality_level == *m.minimality_level);
}

TEST_CASE("instance files accept named relations and neq bodies") {
    Template t = h3_plain();
    Instance a = parse_instance_text(
        "# a comment\n"
        "var x y z\n"
        "constraint (x,y,z) allow E\n"
        "constraint (x, y) neq\n",
        t);
    CHECK(a.vars.size() == 3);
    REQUIRE(a.constraints.size() == 2);
    CHECK(a.constraints[0].rel == t.relation("E"));
    CHECK(a.constraints[1].rel ==
          Relation::from_orbits(2, enumerate_orbits(t.universe(), 2, true)));
    CHECK_THROWS_AS(parse_instance_text("var x y\nconstraint (x,y) allow E\n", t),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_instance_text("var x\nconstraint (x,q) neq\n", t),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_instance_text("frob x\n", t), std::invalid_argument);
}

TEST_CASE("templates round-trip relation for relation") {
    Template t = gen_template(7, UniverseSpec::hypergraph(3), 2);
    Template back = parse_template_text(template_to_text(t));
    CHECK(back.universe().k == t.universe().k);
    REQUIRE(back.names() == t.names());
    for (const auto& name : t.names()) CHECK(back.relation(name) == t.relation(name));
    CHECK(template_to_text(back) == template_to_text(t));
}

TEST_CASE("fragments round-trip and reject partial input") {
    Fragment f = Fragment::empty(3, 5, Tri::False);
    f.set_flag({0, 1, 2}, Tri::True);
    f.set_flag({2, 3, 4}, Tri::True);
    Fragment back = parse_fragment_text(fragment_to_text(f));
    CHECK(back.k == f.k);
    CHECK(back.n == f.n);
    CHECK(back.true_edges() == f.true_edges());

    Fragment partial = Fragment::empty(3, 4, Tri::Undecided);
    CHECK_THROWS_AS(fragment_to_text(partial), std::invalid_argument);
    CHECK_THROWS_AS(parse_fragment_text("E(0 1 2)\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_fragment_text("fragment n=3\n"), std::invalid_argument);
}

TEST_CASE("solutions print the class map and the quotient fragment") {
    Solution sol;
    sol.class_of = {0, 1, 0};
    sol.fragment = Fragment::empty(3, 2, Tri::False);
    std::string text = solution_to_text(sol, {"x", "y", "z"});
    CHECK(text.find("class x 0") != std::string::npos);
    CHECK(text.find("class y 1") != std::string::npos);
    CHECK(text.find("class z 0") != std::string::npos);
    CHECK(text.find("fragment k=3 n=2") != std::string::npos);
    CHECK_THROWS_AS(solution_to_text(sol, {"x", "y"}), std::invalid_argument);
}

TEST_CASE("generators are pure functions of the seed") {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    for (std::uint64_t seed : {1u, 2u, 99u}) {
        Instance a = gen_instance(seed, u, 5, 6);
        Instance b = gen_instance(seed, u, 5, 6);
        CHECK(a.to_text() == b.to_text());
        a.check(u);
        CHECK(template_to_text(gen_template(seed, u, 2)) ==
              template_to_text(gen_template(seed, u, 2)));
    }
    CHECK(gen_instance(1, u, 5, 6).to_text() != gen_instance(2, u, 5, 6).to_text());
    CHECK_THROWS_AS(gen_instance(1, u, 1, 1), std::invalid_argument);
}
