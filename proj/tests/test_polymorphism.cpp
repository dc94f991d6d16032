#include "doctest.h"

#include <stdexcept>
#include "orbitcsp/polymorphism.hpp"

using namespace orbitcsp;

namespace {

PartialOperation projection_op(int arity, int s, int k) {
    PartialOperation op;
    op.arity = arity;
    op.domain = Fragment::empty(k, s, Tri::False);
    op.output = op.domain;
    std::size_t cells = 1;
    for (int i = 0; i < arity; ++i) cells *= static_cast<std::size_t>(s);
    op.table.resize(cells);
    std::size_t stride = cells / static_cast<std::size_t>(s);
    for (std::size_t c = 0; c < cells; ++c) op.table[c] = static_cast<int>(c / stride);
    return op;
}

PartialOperation majority_op(int s, int k) {
    PartialOperation op;
    op.arity = 3;
    op.domain = Fragment::empty(k, s, Tri::False);
    op.output = op.domain;
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b)
            for (int c = 0; c < s; ++c) {
                int v = a == b || a == c ? a : (b == c ? b : a);
                op.table.push_back(v);
            }
    return op;
}

Relation neq2(const UniverseSpec& u) {
    return Relation::from_orbits(2, enumerate_orbits(u, 2, true));
}

// Q over the triangle-free graph plus the plain relations; (x,y) injective
// in Q(x,y,z) forces y = z, the engine's standing equality implication.
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

}  // namespace

TEST_CASE("projections preserve every relation but are no near-unanimity") {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    PartialOperation op = projection_op(3, 3, 3);
    Template t = Template::plain(u);
    for (const auto& name : t.names()) CHECK(preserves(op, t.relation(name), u).ok);
    auto rep = check_local_nu_equations(op);
    CHECK_FALSE(rep.ok);
}

TEST_CASE("a constant-collapsing operation violates disequality") {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    PartialOperation op = projection_op(3, 3, 3);
    for (auto& v : op.table) v = 0;
    auto rep = preserves(op, neq2(u), u);
    CHECK_FALSE(rep.ok);
    REQUIRE(rep.violation.size() == 3);  // one argument tuple per coordinate
    for (const auto& col : rep.violation) CHECK(col.size() == 2);
}

TEST_CASE("undecided output flags count as violations") {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    PartialOperation op = majority_op(3, 3);
    op.domain.set_flag({0, 1, 2}, Tri::True);
    op.output = Fragment::empty(3, 3, Tri::Undecided);
    Relation edge = Relation::from_orbits(3, {orbit_of(op.domain, std::vector<int>{0, 1, 2})});
    auto rep = preserves(op, edge, u);
    CHECK_FALSE(rep.ok);
    CHECK(rep.detail.find("undecided") != std::string::npos);
}

TEST_CASE("the near-unanimity equations are checked literally") {
    PartialOperation op = majority_op(2, 3);
    CHECK(check_local_nu_equations(op).ok);
    op.table[1] = 1;  // mutate f(0,0,1)
    auto rep = check_local_nu_equations(op);
    CHECK_FALSE(rep.ok);
    CHECK_FALSE(rep.detail.empty());
    PartialOperation binary = projection_op(2, 2, 3);
    CHECK_THROWS_AS(check_local_nu_equations(binary), std::invalid_argument);
}

TEST_CASE("a disequality-only template admits a local near-unanimity operation") {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    Template t(u);
    t.add_relation("NEQ", neq2(u));
    Fragment dom = Fragment::empty(3, 3, Tri::False);
    ProbeResult r = find_local_nu(t, dom, 4);
    REQUIRE(r.status == ProbeStatus::Found);
    REQUIRE(r.op.has_value());
    CHECK(check_local_nu_equations(*r.op).ok);
    CHECK(preserves(*r.op, t.relation("NEQ"), u).ok);
}

TEST_CASE("a one-point domain collapses trivially") {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    Template t = Template::plain(u);
    ProbeResult r = find_local_nu(t, Fragment::empty(3, 1, Tri::False), 3);
    CHECK(r.status == ProbeStatus::Found);
    CHECK(r.op->table == std::vector<int>{0});
}

TEST_CASE("an equality-implication witness set blocks every local near-unanimity") {
    Template t = q_template();
    // witness points a1, a2, b2 with (a1,a2), (a1,b2) injective and
    // (a2,a2,b2) in Q; the pair flags are irrelevant to Q
    Fragment witness = Fragment::empty(2, 3, Tri::False);
    for (int m : {3, 4, 5}) {
        CAPTURE(m);
        ProbeResult r = find_local_nu(t, witness, m);
        CHECK(r.status == ProbeStatus::NoneComplete);
        CHECK_FALSE(r.op.has_value());
    }
}

TEST_CASE("the local obstruction is monotone in the domain") {
    Template t = q_template();
    ProbeResult r = find_local_nu(t, Fragment::empty(2, 4, Tri::False), 3);
    CHECK(r.status == ProbeStatus::NoneComplete);
}

TEST_CASE("a starved budget reports exhaustion, never completeness") {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    Template t(u);
    t.add_relation("NEQ", neq2(u));
    ProbeOptions opts;
    opts.node_budget = 2;
    ProbeResult r = find_local_nu(t, Fragment::empty(3, 3, Tri::False), 3, opts);
    CHECK(r.status == ProbeStatus::NoneExhausted);
    CHECK(to_string(r.status) == "NONE_EXHAUSTED");
}

TEST_CASE("the plain hypergraph template has a binary injection on a hyperedge") {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    Template t = Template::plain(u);
    Fragment dom = Fragment::empty(3, 3, Tri::False);
    dom.set_flag({0, 1, 2}, Tri::True);
    ProbeResult r = find_binary_injection(t, dom);
    REQUIRE(r.status == ProbeStatus::Found);
    const auto& table = r.op->table;
    for (std::size_t i = 0; i < table.size(); ++i)
        for (std::size_t j = i + 1; j < table.size(); ++j) CHECK(table[i] != table[j]);
    for (const auto& name : t.names()) CHECK(preserves(*r.op, t.relation(name), u).ok);
}
