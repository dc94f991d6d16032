#include "doctest.h"

#include <algorithm>
#include <stdexcept>
#include "orbitcsp/implication.hpp"

using namespace orbitcsp;

namespace {

PPFormula formula(std::vector<std::string> vars, std::vector<Atom> atoms,
                  std::vector<std::string> free,
                  std::vector<std::pair<std::string, std::string>> eqs = {}) {
    PPFormula f;
    f.vars = std::move(vars);
    f.atoms = std::move(atoms);
    f.eqs = std::move(eqs);
    f.free = std::move(free);
    return f;
}

// Q(x1,x2,x3): the 3-ary relation over the triangle-free graph whose members
// have pattern x1=x2=x3, x1=x2, or x2=x3 (all flag variants). Whenever
// (x1,x2) is injective, x2 = x3 follows.
Template q_template() {
    Template t = Template::plain(UniverseSpec::k3free());
    std::vector<OrbitDescriptor> qs;
    for (const auto& o : enumerate_orbits(UniverseSpec::k3free(), 3, false)) {
        const auto& c = o.pattern.class_of;
        if (c == std::vector<int>{0, 0, 0} || c == std::vector<int>{0, 0, 1} ||
            c == std::vector<int>{0, 1, 1})
            qs.push_back(o);
    }
    t.add_relation("Q", Relation::from_orbits(3, qs));
    return t;
}

Relation inj2(const UniverseSpec& u) {
    return Relation::from_orbits(2, enumerate_orbits(u, 2, true));
}

Relation eq_rel(const UniverseSpec& u) {
    OrbitDescriptor eq;
    eq.k = u.k;
    eq.pattern = Pattern::from_labels(std::vector<int>{0, 0});
    return Relation::from_orbits(2, {eq});
}

// R(x1,x2,x3,x4) over the generic 3-uniform hypergraph: injective tuples with
// flag{x1,x2,x3} = flag{x1,x2,x4}; the other two flags are free. Gives the
// identity pair set on {E, N} for u = (x1,x2,x3), v = (x2,x1,x4).
Template r_template_h3() {
    Template t = Template::plain(UniverseSpec::hypergraph(3));
    std::vector<OrbitDescriptor> rs;
    for (const auto& o : enumerate_orbits(UniverseSpec::hypergraph(3), 4, true))
        if (o.flag({0, 1, 2}) == o.flag({0, 1, 3})) rs.push_back(o);
    t.add_relation("R", Relation::from_orbits(4, rs));
    return t;
}

Implication r_implication(Template& t) {
    PPFormula f = formula({"x1", "x2", "x3", "x4"}, {{"R", {"x1", "x2", "x3", "x4"}}},
                          {"x1", "x2", "x3", "x4"});
    Relation E = t.relation("E");
    auto r = check_implication(f, {"x1", "x2", "x3"}, {"x2", "x1", "x4"}, E, E, t);
    REQUIRE(r.impl.has_value());
    return *r.impl;
}

// S(x,y,z,w) over the generic graph: injective tuples where exactly one of
// xy, zw is an edge, plus the classes with x=y and z=w. Its (x,y)->(z,w) pair
// digraph is the 2-cycle edge <-> nonedge together with a loop at equality.
Template s_template_graph() {
    Template t = Template::plain(UniverseSpec::graph());
    std::vector<OrbitDescriptor> ss;
    for (const auto& o : enumerate_orbits(UniverseSpec::graph(), 4, false)) {
        const auto& c = o.pattern.class_of;
        if (c == std::vector<int>{0, 1, 2, 3} && o.flag({0, 1}) != o.flag({2, 3}))
            ss.push_back(o);
        if (c == std::vector<int>{0, 0, 1, 1}) ss.push_back(o);
    }
    t.add_relation("S", Relation::from_orbits(4, ss));
    return t;
}

Implication s_implication(Template& t) {
    PPFormula f =
        formula({"x", "y", "z", "w"}, {{"S", {"x", "y", "z", "w"}}}, {"x", "y", "z", "w"});
    Relation C = inj2(UniverseSpec::graph());
    auto r = check_implication(f, {"x", "y"}, {"z", "w"}, C, C, t);
    REQUIRE(r.impl.has_value());
    return *r.impl;
}

}  // namespace

TEST_CASE("mapping pairs of a path formula") {
    Template t = Template::plain(UniverseSpec::k3free());
    PPFormula f = formula({"x", "y", "z"}, {{"E", {"x", "y"}}, {"E", {"y", "z"}}},
                          {"x", "y", "z"});
    auto pairs = mapping_pairs(f, {"x", "y"}, {"y", "z"}, t);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].first == t.relation("E").orbits[0]);
    CHECK(pairs[0].second == pairs[0].first);
    CHECK(compose_pairs(pairs, pairs) == pairs);
    CHECK(std::is_sorted(pairs.begin(), pairs.end()));
}

TEST_CASE("the Q relation yields an equality implication") {
    Template t = q_template();
    PPFormula f = formula({"x", "y", "z"}, {{"Q", {"x", "y", "z"}}}, {"x", "y", "z"});
    Relation T = inj2(UniverseSpec::k3free());
    Relation Eq = eq_rel(UniverseSpec::k3free());
    auto r = check_implication(f, {"x", "y"}, {"y", "z"}, T, Eq, t);
    REQUIRE(r.impl.has_value());
    CHECK(r.report.ok);
    const Implication& i = *r.impl;
    CHECK(i.C1.orbits.size() == 3);  // eq, nonedge, edge
    CHECK(i.D1.orbits.size() == 3);
    CHECK(i.I == std::vector<int>{1});  // y occurs in v
    CHECK_FALSE(i.injective);           // x=y=z satisfies Q
}

TEST_CASE("item violations are reported with the right index") {
    Template t = q_template();
    PPFormula f = formula({"x", "y", "z"}, {{"Q", {"x", "y", "z"}}}, {"x", "y", "z"});
    Relation T = inj2(UniverseSpec::k3free());
    Relation Eq = eq_rel(UniverseSpec::k3free());
    Relation edge = Relation::from_orbits(2, {t.relation("E").orbits[0]});

    // C not a proper subset of proj_u
    auto full = check_implication(f, {"x", "y"}, {"y", "z"}, rel_union(T, Eq), Eq, t);
    CHECK(full.report.violated_item == 2);
    // a pair from C escapes D
    auto wrong_d = check_implication(f, {"x", "y"}, {"y", "z"}, T, edge, t);
    CHECK(wrong_d.report.violated_item == 4);
    // an orbit of D unreached from C
    auto too_big = check_implication(f, {"x", "y"}, {"y", "z"}, T, rel_union(Eq, edge), t);
    CHECK(too_big.report.violated_item == 5);
}

TEST_CASE("structural preconditions throw") {
    Template t = q_template();
    PPFormula f = formula({"x", "y", "z"}, {{"Q", {"x", "y", "z"}}}, {"x", "y", "z"});
    Relation T = inj2(UniverseSpec::k3free());
    Relation Eq = eq_rel(UniverseSpec::k3free());
    CHECK_THROWS_AS((void)check_implication(f, {"x", "x"}, {"y", "z"}, T, Eq, t),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)check_implication(f, {"x", "y"}, {"x", "y"}, T, Eq, t),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)check_implication(f, {"x", "y"}, {"y", "z"}, Relation{}, Eq, t),
                    std::invalid_argument);
}

TEST_CASE("forced equality fails item one but not the pre-implication") {
    Template t = Template::plain(UniverseSpec::graph());
    PPFormula f = formula({"x0", "x1", "x2", "x3"}, {}, {"x0", "x1", "x2", "x3"},
                          {{"x0", "x2"}, {"x1", "x3"}});
    Relation edge = Relation::from_orbits(2, {t.relation("E").orbits[0]});
    auto full = check_implication(f, {"x0", "x1"}, {"x2", "x3"}, edge, edge, t);
    CHECK(full.report.violated_item == 1);
    auto pre = check_pre_implication(f, {"x0", "x1"}, {"x2", "x3"}, edge, edge, t);
    REQUIRE(pre.impl.has_value());
    CHECK(pre.impl->pre_only);
    CHECK(pre.impl->I.empty());
    CHECK(pre.impl->pairs.size() == 3);  // eq, edge, nonedge each map to themselves
}

TEST_CASE("composition matches the pair-set composition") {
    Template t = r_template_h3();
    Implication i = r_implication(t);
    CHECK(i.pairs.size() == 2);  // E -> E and N -> N
    CHECK(i.injective);

    auto comp = compose_implications(i, i, t);
    REQUIRE(comp.impl.has_value());
    CHECK_FALSE(comp.impl->pre_only);
    CHECK(comp.impl->pairs == compose_pairs(i.pairs, i.pairs));
    CHECK(comp.impl->u == i.u);
    // v2 = (x2,x1,x4) renamed along u2 -> v1 starts with (x1, x2, ...)
    REQUIRE(comp.impl->v.size() == 3);
    CHECK(comp.impl->v[0] == "x1");
    CHECK(comp.impl->v[1] == "x2");
    CHECK(comp.impl->I == std::vector<int>{0, 1});

    Template q = q_template();
    PPFormula f = formula({"x", "y", "z"}, {{"Q", {"x", "y", "z"}}}, {"x", "y", "z"});
    Relation T = inj2(UniverseSpec::k3free());
    Relation Eq = eq_rel(UniverseSpec::k3free());
    Implication iq = *check_implication(f, {"x", "y"}, {"y", "z"}, T, Eq, q).impl;
    CHECK_THROWS_AS((void)compose_implications(iq, iq, q), std::invalid_argument);
}

TEST_CASE("composition properties of a self-composition") {
    Template t = r_template_h3();
    Implication i = r_implication(t);
    ImplPropertiesReport rep = impl_properties_check(i, i, t);
    CHECK(rep.p1 == 4);
    CHECK(rep.p2 == 4);
    CHECK(rep.p == 4);
    CHECK(rep.prop1);
    CHECK(rep.prop2);
    CHECK(rep.prop3_applicable);
    CHECK(rep.prop3);
}

TEST_CASE("pair digraph, smoothness, sinks and sources") {
    Template t = s_template_graph();
    Implication i = s_implication(t);
    ImplDigraph g = impl_digraph(i);
    REQUIRE(g.verts.size() == 3);
    CHECK(g.smooth);
    CHECK(g.num_sccs == 2);
    // vertices in canonical order: eq < nonedge < edge; mutual reachability
    // oracle: edge and nonedge share a component, eq is alone
    CHECK(g.scc_of[1] == g.scc_of[2]);
    CHECK(g.scc_of[0] != g.scc_of[1]);

    SinkSourceReport rep = sinks_sources(g);
    CHECK(rep.smooth);
    REQUIRE(rep.sink_sccs_in_C.size() == 1);
    REQUIRE(rep.source_sccs_outside.size() == 1);
    CHECK(rep.sink_sccs_in_C[0] == g.scc_of[1]);
    CHECK(rep.source_sccs_outside[0] == g.scc_of[0]);

    std::string why;
    CHECK_FALSE(is_complete(i, &why));  // the 2-cycle has no loops
    CHECK(why.find("component") != std::string::npos);

    std::string dot = to_dot(g);
    CHECK(dot.find("digraph impl") != std::string::npos);

    // a (C,D)-implication with C != D has no pair digraph
    Template q = q_template();
    PPFormula f = formula({"x", "y", "z"}, {{"Q", {"x", "y", "z"}}}, {"x", "y", "z"});
    Implication iq = *check_implication(f, {"x", "y"}, {"y", "z"},
                                        inj2(UniverseSpec::k3free()),
                                        eq_rel(UniverseSpec::k3free()), q)
                          .impl;
    CHECK_THROWS_AS((void)impl_digraph(iq), std::invalid_argument);
}

TEST_CASE("completize straightens the index permutation") {
    Template t = r_template_h3();
    Implication i = r_implication(t);
    std::string why;
    CHECK_FALSE(is_complete(i, &why));  // u = (x1,x2,x3) vs v = (x2,x1,x4)
    CHECK(why.find("identity") != std::string::npos);

    Implication c = completize(i, t);
    CHECK(is_complete(c));
    CHECK(c.bsw_assumed);
    CHECK(c.injective);
    CHECK(c.C == i.C);
    for (int idx : c.I)
        CHECK(c.u[static_cast<std::size_t>(idx)] == c.v[static_cast<std::size_t>(idx)]);
    // the pair set is still the identity on {E, N}
    CHECK(c.pairs == i.pairs);

    // non-injective C is rejected
    Template s = s_template_graph();
    Implication is = s_implication(s);
    Relation mixed = rel_union(is.C, eq_rel(UniverseSpec::graph()));
    PPFormula f = is.phi;
    auto bad = check_implication(f, is.u, is.v, mixed, mixed, s);
    if (bad.impl) CHECK_THROWS_AS((void)completize(*bad.impl, s), std::invalid_argument);
}

TEST_CASE("implication graph arcs carry verified witnesses") {
    Template t = q_template();
    SearchBounds bounds;
    bounds.max_atoms = 1;
    bounds.max_vars = 3;
    bounds.closure_depth = 1;
    bounds.candidate_budget = 50'000;
    ImplicationGraph g = build_implication_graph(t, bounds, false);
    CHECK_FALSE(g.arcs.empty());
    for (const auto& a : g.arcs) {
        const Implication& w = a.witness;
        CHECK(g.vertices[static_cast<std::size_t>(a.from)].first == w.C1);
        CHECK(g.vertices[static_cast<std::size_t>(a.from)].second == w.C);
        CHECK(g.vertices[static_cast<std::size_t>(a.to)].first == w.D1);
        CHECK(g.vertices[static_cast<std::size_t>(a.to)].second == w.D);
        auto re = check_implication(w.phi, w.u, w.v, w.C, w.D, t);
        CHECK(re.impl.has_value());
    }
    std::string dot = to_dot(g);
    CHECK(dot.find("digraph implication_graph") != std::string::npos);

    SimplicityReport rep = is_implicationally_simple(g);
    if (!rep.simple) {
        REQUIRE(!rep.cycle.empty());
        for (std::size_t i = 0; i < rep.cycle.size(); ++i) {
            int from = rep.cycle[i];
            int to = rep.cycle[(i + 1) % rep.cycle.size()];
            bool found = false;
            for (const auto& a : g.arcs)
                if (a.from == from && a.to == to) found = true;
            CHECK(found);
        }
    }
}

TEST_CASE("simplicity detection on handmade graphs") {
    ImplicationGraph g;
    g.vertices.resize(3);
    g.arcs.push_back({0, 1, {}});
    g.arcs.push_back({1, 2, {}});
    CHECK(is_implicationally_simple(g).simple);
    g.arcs.push_back({2, 0, {}});
    SimplicityReport rep = is_implicationally_simple(g);
    CHECK_FALSE(rep.simple);
    REQUIRE(rep.cycle.size() == 3);
    std::vector<int> sorted = rep.cycle;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2});
}

TEST_CASE("equality implication detection finds the Q certificate") {
    Template t = q_template();
    SearchBounds bounds;
    bounds.max_atoms = 1;
    bounds.max_vars = 3;
    bounds.candidate_budget = 50'000;
    auto certs = detect_equality_implication(t, bounds);
    REQUIRE(!certs.empty());
    Relation Eq = eq_rel(UniverseSpec::k3free());
    bool q_found = false;
    for (const auto& c : certs) {
        CHECK(c.ell == 2);
        CHECK(c.nvars == 3);
        auto re = check_implication(c.phi, c.u, c.v, c.T, Eq, t);
        CHECK(re.impl.has_value());
        if (!c.phi.atoms.empty() && c.phi.atoms[0].rel == "Q") q_found = true;
    }
    CHECK(q_found);

    // the plain template has no equality implication in these bounds
    Template plain = Template::plain(UniverseSpec::k3free());
    CHECK(detect_equality_implication(plain, bounds).empty());
}

TEST_CASE("critical detection certificates re-verify") {
    Template t = q_template();
    SearchBounds bounds;
    bounds.max_atoms = 1;
    bounds.max_vars = 3;
    bounds.candidate_budget = 50'000;
    for (const auto& c : detect_critical(t, bounds)) {
        auto re = check_implication(c.phi, c.u, c.v, c.C, c.C, t);
        CHECK(re.impl.has_value());
        CHECK(rel_intersect(c.C, c.D).empty());
        CHECK(c.D.injective());
        CHECK(c.C.injective());
    }
}

TEST_CASE("injective witness extension and falsification") {
    Template t = Template::plain(UniverseSpec::k3free());
    PPFormula f = formula({"x", "y", "z"}, {{"E", {"x", "y"}}, {"E", {"y", "z"}}},
                          {"x", "y", "z"});
    // a genuine path class extends
    OrbitDescriptor path;
    path.k = 2;
    path.pattern = Pattern::discrete(3);
    path.flags = {1, 0, 1};  // xy edge, xz nonedge, yz edge
    WitnessResult ok = injective_witness(f, path, t);
    CHECK_FALSE(ok.falsification);
    REQUIRE(ok.h.has_value());
    CHECK(*ok.h == path);
    // the triangle class cannot
    OrbitDescriptor tri = path;
    tri.flags = {1, 1, 1};
    WitnessResult bad = injective_witness(f, tri, t);
    CHECK(bad.falsification);
    CHECK_FALSE(bad.h.has_value());
}
