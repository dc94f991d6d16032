#include "doctest.h"

#include <stdexcept>
#include "orbitcsp/pp.hpp"

using namespace orbitcsp;

namespace {

PPFormula formula(std::vector<std::string> vars, std::vector<Atom> atoms,
                  std::vector<std::string> free,
                  std::vector<std::pair<std::string, std::string>> eqs = {},
                  std::vector<std::pair<std::string, std::string>> neqs = {}) {
    PPFormula f;
    f.vars = std::move(vars);
    f.atoms = std::move(atoms);
    f.eqs = std::move(eqs);
    f.neqs = std::move(neqs);
    f.free = std::move(free);
    return f;
}

}  // namespace

TEST_CASE("single atom evaluates to the relation") {
    Template t = Template::plain(UniverseSpec::hypergraph(3));
    PPFormula f = formula({"x", "y", "z"}, {{"E", {"x", "y", "z"}}}, {"x", "y", "z"});
    LabelingSet ls = evaluate(f, t);
    CHECK(ls.as_relation() == t.relation("E"));
}

TEST_CASE("contradictory atoms evaluate to empty") {
    Template t = Template::plain(UniverseSpec::hypergraph(3));
    PPFormula f = formula({"x", "y", "z"}, {{"E", {"x", "y", "z"}}, {"N", {"x", "y", "z"}}},
                          {"x", "y", "z"});
    CHECK(evaluate(f, t).empty());
}

TEST_CASE("existential projection over generic hypergraph") {
    Template t = Template::plain(UniverseSpec::hypergraph(3));
    // exists z E(x,y,z): x,y must be distinct, no pair flags at k=3
    PPFormula f = formula({"x", "y", "z"}, {{"E", {"x", "y", "z"}}}, {"x", "y"});
    LabelingSet ls = evaluate(f, t);
    REQUIRE(ls.classes.size() == 1);
    CHECK(ls.classes[0].pattern.is_discrete());
    CHECK_FALSE(ls.classes[0].has_flags());
}

TEST_CASE("common neighbor in the triangle-free graph") {
    Template t = Template::plain(UniverseSpec::k3free());
    // exists z (E(x,z) & E(y,z)): either x = y, or x != y and xy is a nonedge
    PPFormula f = formula({"x", "y", "z"}, {{"E", {"x", "z"}}, {"E", {"y", "z"}}}, {"x", "y"});
    LabelingSet ls = evaluate(f, t);
    REQUIRE(ls.classes.size() == 2);
    CHECK(ls.classes[0].pattern.class_of == std::vector<int>{0, 0});
    CHECK(ls.classes[1].pattern.is_discrete());
    CHECK(ls.classes[1].flags == std::vector<std::uint8_t>{0});
}

TEST_CASE("common neighbor in the generic graph keeps both injective orbits") {
    Template t = Template::plain(UniverseSpec::graph());
    PPFormula f = formula({"x", "y", "z"}, {{"E", {"x", "z"}}, {"E", {"y", "z"}}}, {"x", "y"});
    LabelingSet ls = evaluate(f, t);
    CHECK(ls.classes.size() == 3);  // x=y, edge, nonedge
}

TEST_CASE("equality and disequality atoms") {
    Template t = Template::plain(UniverseSpec::graph());
    PPFormula f = formula({"x", "y"}, {}, {"x", "y"}, {{"x", "y"}});
    LabelingSet ls = evaluate(f, t);
    REQUIRE(ls.classes.size() == 1);
    CHECK(ls.classes[0].pattern.class_of == std::vector<int>{0, 0});

    PPFormula g = formula({"x", "y"}, {}, {"x", "y"}, {}, {{"x", "y"}});
    LabelingSet ms = evaluate(g, t);
    CHECK(ms.classes.size() == 2);  // edge or nonedge
    for (const auto& c : ms.classes) CHECK(c.pattern.is_discrete());
}

TEST_CASE("unconstrained free pair enumerates all orbits") {
    Template t = Template::plain(UniverseSpec::hypergraph(3));
    PPFormula f = formula({"x", "y", "z"}, {{"E", {"x", "y", "z"}}}, {"x", "y", "z"});
    f.free = {"x", "x", "y"};  // repeated free variables are allowed
    LabelingSet ls = evaluate(f, t);
    REQUIRE(ls.classes.size() == 1);
    CHECK(ls.classes[0].pattern.class_of == std::vector<int>{0, 0, 1});
}

TEST_CASE("projection helper matches descriptor projection") {
    Template t = Template::plain(UniverseSpec::k3free());
    PPFormula f = formula({"x", "y", "z"}, {{"E", {"x", "y"}}, {"E", {"y", "z"}}},
                          {"x", "y", "z"});
    std::vector<std::string> u = {"x", "z"};
    Relation direct = proj_formula(f, u, t);
    Relation via = evaluate(f, t).project(u);
    CHECK(direct == via);
    // path endpoints in a triangle-free graph are nonadjacent or equal
    for (const auto& o : direct.orbits)
        if (o.pattern.is_discrete()) CHECK(o.flags == std::vector<std::uint8_t>{0});
}

TEST_CASE("realizability pruning inside evaluation") {
    Template t = Template::plain(UniverseSpec::k3free());
    // a triangle is unsatisfiable in the triangle-free graph
    PPFormula f = formula({"x", "y", "z"},
                          {{"E", {"x", "y"}}, {"E", {"y", "z"}}, {"E", {"x", "z"}}},
                          {"x", "y", "z"});
    CHECK(evaluate(f, t).empty());
    // C5 is fine
    PPFormula c5 = formula({"a", "b", "c", "d", "e"},
                           {{"E", {"a", "b"}},
                            {"E", {"b", "c"}},
                            {"E", {"c", "d"}},
                            {"E", {"d", "e"}},
                            {"E", {"e", "a"}}},
                           {"a", "b", "c", "d", "e"});
    CHECK_FALSE(evaluate(c5, t).empty());
}

TEST_CASE("evaluation is deterministic across thread counts") {
    Template t = Template::plain(UniverseSpec::k3free());
    PPFormula f = formula({"a", "b", "c", "d", "e"},
                          {{"E", {"a", "b"}}, {"E", {"b", "c"}}, {"E", {"c", "d"}}},
                          {"a", "c", "e"});
    EvalConfig one;
    EvalConfig many;
    many.threads = 4;
    LabelingSet l1 = evaluate(f, t, one);
    LabelingSet l2 = evaluate(f, t, many);
    CHECK(l1.classes == l2.classes);
}

TEST_CASE("caps raise EvalCapExceeded") {
    Template t = Template::plain(UniverseSpec::hypergraph(3));
    PPFormula f = formula({"x", "y", "z"}, {{"E", {"x", "y", "z"}}}, {"x", "y", "z"});
    EvalConfig tiny;
    tiny.node_budget = 1;
    CHECK_THROWS_AS((void)evaluate(f, t, tiny), EvalCapExceeded);
    EvalConfig narrow;
    narrow.max_vars = 2;
    CHECK_THROWS_AS((void)evaluate(f, t, narrow), EvalCapExceeded);
}

TEST_CASE("entails_equality on the orbit level") {
    Template t = Template::plain(UniverseSpec::graph());
    PPFormula f = formula({"x", "y"}, {}, {"x", "y"}, {{"x", "y"}});
    std::vector<std::string> u = {"x"};
    auto all1 = enumerate_orbits(UniverseSpec::graph(), 1, false);
    Relation top = Relation::from_orbits(1, all1);
    CHECK(entails_equality(f, top, u, "x", "y", t));
    PPFormula g = formula({"x", "y"}, {{"E", {"x", "y"}}}, {"x", "y"});
    CHECK_FALSE(entails_equality(g, top, u, "x", "y", t));
}

TEST_CASE("flatten preserves the labeling set") {
    Template t = Template::plain(UniverseSpec::k3free());
    PPFormula f = formula({"x", "y", "z"}, {{"E", {"x", "z"}}, {"E", {"y", "z"}}}, {"x", "y"});
    LabelingSet before = evaluate(f, t);
    PPFormula flat = flatten(f, t);
    CHECK(flat.atoms.size() == 1);
    CHECK(flat.vars == f.free);
    LabelingSet after = evaluate(flat, t);
    CHECK(before.classes == after.classes);
}

TEST_CASE("syntactic composition glues along the shared tuple") {
    Template t = Template::plain(UniverseSpec::k3free());
    // phi(x,y) = E(x,y); compose along y: exists y (E(x,y) & E(y,w))
    PPFormula f = formula({"x", "y"}, {{"E", {"x", "y"}}}, {"x", "y"});
    std::vector<std::string> u1 = {"x"}, v1 = {"y"}, u2 = {"x"}, v2 = {"y"};
    std::vector<std::string> v2r;
    PPFormula comp = syntactic_compose(f, f, u1, v1, u2, v2, &v2r);
    REQUIRE(v2r.size() == 1);
    CHECK(comp.free == std::vector<std::string>{"x", v2r[0]});
    LabelingSet ls = evaluate(comp, t);
    // distance <= 2 in the triangle-free graph: x = w, or x != w nonadjacent
    CHECK(ls.classes.size() == 2);
    for (const auto& c : ls.classes)
        if (c.pattern.is_discrete()) CHECK(c.flags == std::vector<std::uint8_t>{0});
}

TEST_CASE("formula text rendering") {
    PPFormula f = formula({"x", "y", "z"}, {{"E", {"x", "y", "z"}}}, {"x", "y"}, {},
                          {{"x", "y"}});
    CHECK(f.to_text("phi") == "pp phi free(x,y) := E(x,y,z) & x != y");
}
