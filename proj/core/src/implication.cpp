#include "orbitcsp/implication.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "orbitcsp/comb.hpp"

namespace orbitcsp {

namespace {

std::vector<int> positions_of(const std::vector<std::string>& order,
                              const std::vector<std::string>& tuple) {
    std::vector<int> pos;
    pos.reserve(tuple.size());
    for (const auto& t : tuple) {
        auto it = std::find(order.begin(), order.end(), t);
        if (it == order.end()) throw std::invalid_argument("tuple entry not free: " + t);
        pos.push_back(static_cast<int>(it - order.begin()));
    }
    return pos;
}

bool is_injective_tuple(const std::vector<std::string>& t) {
    std::set<std::string> s(t.begin(), t.end());
    return s.size() == t.size();
}

std::vector<OrbitPair> pairs_of(const LabelingSet& ls, const std::vector<int>& upos,
                                const std::vector<int>& vpos) {
    std::vector<OrbitPair> out;
    out.reserve(ls.classes.size());
    for (const auto& c : ls.classes) out.emplace_back(proj_orbit(c, upos), proj_orbit(c, vpos));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Item (1): no pair of distinct variables is forced constant.
bool no_forced_equality(const LabelingSet& ls, std::string* witness = nullptr) {
    int m = static_cast<int>(ls.vars.size());
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            bool distinct_somewhere = false;
            for (const auto& c : ls.classes)
                if (c.pattern.class_of[static_cast<std::size_t>(i)] !=
                    c.pattern.class_of[static_cast<std::size_t>(j)]) {
                    distinct_somewhere = true;
                    break;
                }
            if (!distinct_somewhere) {
                if (witness) *witness = ls.vars[static_cast<std::size_t>(i)] + " = " +
                                        ls.vars[static_cast<std::size_t>(j)];
                return false;
            }
        }
    return true;
}

ImplCheckResult check_items(const PPFormula& phi, const std::vector<std::string>& u,
                            const std::vector<std::string>& v, const Relation& C,
                            const Relation& D, const Template& tmpl, const EvalConfig& cfg,
                            bool require_item1) {
    if (!is_injective_tuple(u) || !is_injective_tuple(v))
        throw std::invalid_argument("implication: u and v must be injective tuples");
    std::set<std::string> scope(u.begin(), u.end());
    scope.insert(v.begin(), v.end());
    std::set<std::string> free(phi.free.begin(), phi.free.end());
    if (scope != free)
        throw std::invalid_argument("implication: scope(u) and scope(v) must cover the free set");
    if (u.size() >= free.size() || v.size() >= free.size())
        throw std::invalid_argument("implication: tuples must be shorter than the variable set");
    if (C.empty() || D.empty()) throw std::invalid_argument("implication: C and D must be nonempty");
    if (C.arity != static_cast<int>(u.size()) || D.arity != static_cast<int>(v.size()))
        throw std::invalid_argument("implication: relation arity mismatch");

    LabelingSet ls = evaluate(phi, tmpl, cfg);
    auto upos = positions_of(ls.vars, u);
    auto vpos = positions_of(ls.vars, v);

    ImplCheckResult res;
    if (require_item1) {
        std::string w;
        if (!no_forced_equality(ls, &w)) {
            res.report = {false, 1, "forced equality: " + w};
            return res;
        }
    }
    Relation C1 = ls.project(u);
    Relation D1 = ls.project(v);
    if (!C.proper_subset_of(C1)) {
        res.report = {false, 2, "C is not a proper subset of proj_u"};
        return res;
    }
    if (!D.proper_subset_of(D1)) {
        res.report = {false, 3, "D is not a proper subset of proj_v"};
        return res;
    }
    auto pairs = pairs_of(ls, upos, vpos);
    for (const auto& [O, P] : pairs)
        if (C.contains(O) && !D.contains(P)) {
            res.report = {false, 4, "pair from C escapes D: " + O.to_string() + " -> " +
                                        P.to_string()};
            return res;
        }
    for (const auto& P : D.orbits) {
        bool reached = false;
        for (const auto& [O, Q] : pairs)
            if (Q == P && C.contains(O)) {
                reached = true;
                break;
            }
        if (!reached) {
            res.report = {false, 5, "orbit of D not reached from C: " + P.to_string()};
            return res;
        }
    }

    Implication impl;
    impl.phi = phi;
    impl.u = u;
    impl.v = v;
    impl.C = C;
    impl.D = D;
    impl.C1 = std::move(C1);
    impl.D1 = std::move(D1);
    impl.pairs = std::move(pairs);
    for (std::size_t i = 0; i < u.size(); ++i)
        if (std::find(v.begin(), v.end(), u[i]) != v.end()) impl.I.push_back(static_cast<int>(i));
    impl.injective = std::all_of(ls.classes.begin(), ls.classes.end(),
                                 [](const OrbitDescriptor& c) { return c.pattern.is_discrete(); });
    impl.pre_only = !require_item1;
    res.impl = std::move(impl);
    return res;
}

void conjoin_all_distinct(PPFormula& f) {
    for (std::size_t i = 0; i < f.free.size(); ++i)
        for (std::size_t j = i + 1; j < f.free.size(); ++j) {
            auto p = std::make_pair(f.free[i], f.free[j]);
            auto q = std::make_pair(f.free[j], f.free[i]);
            if (std::find(f.neqs.begin(), f.neqs.end(), p) == f.neqs.end() &&
                std::find(f.neqs.begin(), f.neqs.end(), q) == f.neqs.end())
                f.neqs.push_back(p);
        }
}

void tarjan_scc(const std::vector<std::vector<int>>& adj, std::vector<int>& comp, int& ncomp) {
    int n = static_cast<int>(adj.size());
    comp.assign(static_cast<std::size_t>(n), -1);
    ncomp = 0;
    std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
    std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
    std::vector<int> stack;
    int counter = 0;
    std::function<void(int)> strongconnect = [&](int s) {
        index[static_cast<std::size_t>(s)] = low[static_cast<std::size_t>(s)] = counter++;
        stack.push_back(s);
        on_stack[static_cast<std::size_t>(s)] = true;
        for (int w : adj[static_cast<std::size_t>(s)]) {
            if (index[static_cast<std::size_t>(w)] < 0) {
                strongconnect(w);
                low[static_cast<std::size_t>(s)] =
                    std::min(low[static_cast<std::size_t>(s)], low[static_cast<std::size_t>(w)]);
            } else if (on_stack[static_cast<std::size_t>(w)]) {
                low[static_cast<std::size_t>(s)] =
                    std::min(low[static_cast<std::size_t>(s)], index[static_cast<std::size_t>(w)]);
            }
        }
        if (low[static_cast<std::size_t>(s)] == index[static_cast<std::size_t>(s)]) {
            while (true) {
                int w = stack.back();
                stack.pop_back();
                on_stack[static_cast<std::size_t>(w)] = false;
                comp[static_cast<std::size_t>(w)] = ncomp;
                if (w == s) break;
            }
            ++ncomp;
        }
    };
    for (int s = 0; s < n; ++s)
        if (index[static_cast<std::size_t>(s)] < 0) strongconnect(s);
}

using BoolMatrix = std::vector<std::vector<std::uint8_t>>;

BoolMatrix matmul(const BoolMatrix& a, const BoolMatrix& b) {
    std::size_t n = a.size();
    BoolMatrix c(n, std::vector<std::uint8_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < n; ++t)
            if (a[i][t])
                for (std::size_t j = 0; j < n; ++j)
                    if (b[t][j]) c[i][j] = 1;
    return c;
}

/// All SCCs of the matrix digraph complete with loops.
bool sccs_complete(const BoolMatrix& m) {
    std::size_t n = m.size();
    std::vector<std::vector<int>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (m[i][j]) adj[i].push_back(static_cast<int>(j));
    std::vector<int> comp;
    int ncomp = 0;
    tarjan_scc(adj, comp, ncomp);
    // single-vertex components without loops do not count as strongly
    // connected here; only genuine components must be complete
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (comp[i] != comp[j]) continue;
            bool in_scc = (i != j) || m[i][i];
            if (i != j) {
                // i and j in one component: both directions must exist
                if (!m[i][j]) return false;
            } else if (in_scc) {
                if (!m[i][i]) return false;
            } else {
                // isolated vertex: genuinely in a component iff it has a loop;
                // check whether it lies on any cycle through others
                bool on_cycle = false;
                for (std::size_t t = 0; t < n; ++t)
                    if (t != i && comp[t] == comp[i]) on_cycle = true;
                if (on_cycle && !m[i][i]) return false;
            }
        }
    return true;
}

int scope_union_size(const std::vector<std::string>& u, const std::vector<std::string>& v) {
    std::set<std::string> s(u.begin(), u.end());
    s.insert(v.begin(), v.end());
    return static_cast<int>(s.size());
}

}  // namespace

std::vector<OrbitPair> mapping_pairs(const PPFormula& phi, const std::vector<std::string>& u,
                                     const std::vector<std::string>& v, const Template& tmpl,
                                     const EvalConfig& cfg) {
    LabelingSet ls = evaluate(phi, tmpl, cfg);
    return pairs_of(ls, positions_of(ls.vars, u), positions_of(ls.vars, v));
}

std::vector<OrbitPair> compose_pairs(const std::vector<OrbitPair>& a,
                                     const std::vector<OrbitPair>& b) {
    std::vector<OrbitPair> out;
    for (const auto& [o1, o2] : a)
        for (const auto& [p2, p3] : b)
            if (o2 == p2) out.emplace_back(o1, p3);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

ImplCheckResult check_implication(const PPFormula& phi, const std::vector<std::string>& u,
                                  const std::vector<std::string>& v, const Relation& C,
                                  const Relation& D, const Template& tmpl, const EvalConfig& cfg) {
    return check_items(phi, u, v, C, D, tmpl, cfg, /*require_item1=*/true);
}

ImplCheckResult check_pre_implication(const PPFormula& phi, const std::vector<std::string>& u,
                                      const std::vector<std::string>& v, const Relation& C,
                                      const Relation& D, const Template& tmpl,
                                      const EvalConfig& cfg) {
    return check_items(phi, u, v, C, D, tmpl, cfg, /*require_item1=*/false);
}

ComposeResult compose_implications(const Implication& i1, const Implication& i2, Template& tmpl,
                                   bool injective_mode, bool bsw_assumed, const EvalConfig& cfg) {
    if (!(i1.D == i2.C))
        throw std::invalid_argument("compose_implications: i1.D and i2.C differ");
    if (!(i1.D1 == i2.C1))
        throw std::invalid_argument("compose_implications: proj_v(phi1) and proj_u(phi2) differ");

    PPFormula f1 = flatten(i1.phi, tmpl, cfg);
    PPFormula f2 = flatten(i2.phi, tmpl, cfg);
    std::vector<std::string> v2r;
    PPFormula comp = syntactic_compose(f1, f2, i1.u, i1.v, i2.u, i2.v, &v2r);
    if (injective_mode) conjoin_all_distinct(comp);

    ComposeResult out;
    ImplCheckResult full = check_implication(comp, i1.u, v2r, i1.C, i2.D, tmpl, cfg);
    if (full.impl) {
        out.impl = std::move(full.impl);
        out.report = full.report;
    } else if (full.report.violated_item == 1) {
        ImplCheckResult pre = check_pre_implication(comp, i1.u, v2r, i1.C, i2.D, tmpl, cfg);
        out.report = full.report;  // records the item-(1) failure
        if (pre.impl) out.impl = std::move(pre.impl);
    } else {
        out.report = full.report;
    }
    if (out.impl) out.impl->bsw_assumed = bsw_assumed || i1.bsw_assumed || i2.bsw_assumed;
    return out;
}

ImplPropertiesReport impl_properties_check(const Implication& i1, const Implication& i2,
                                           Template& tmpl, const EvalConfig& cfg) {
    (void)tmpl;
    (void)cfg;
    ImplPropertiesReport r;
    r.p1 = scope_union_size(i1.u, i1.v);
    r.p2 = scope_union_size(i2.u, i2.v);

    // structural composition: rename i2 so that u2 = v1
    ComposedFormula c = conjoin_renamed(i1.phi, i2.phi, i1.v, i2.u);
    std::vector<std::string> v2r;
    v2r.reserve(i2.v.size());
    for (const auto& x : i2.v) v2r.push_back(c.rename2.at(x));
    r.p = scope_union_size(i1.u, v2r);
    r.prop1 = r.p >= std::max(r.p1, r.p2);

    auto inter = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        std::set<std::string> sa(a.begin(), a.end()), out;
        for (const auto& x : b)
            if (sa.count(x)) out.insert(x);
        return out;
    };
    std::set<std::string> s_uv2 = inter(i1.u, v2r);
    std::set<std::string> s_uv1 = inter(i1.v, i1.u);  // scope(u1) ∩ scope(v1) = scope(u1) ∩ scope(u2)
    std::set<std::string> s_triple;
    for (const auto& x : s_uv1)
        if (std::find(v2r.begin(), v2r.end(), x) != v2r.end()) s_triple.insert(x);
    bool lhs = (r.p == r.p1) && (r.p == r.p2);
    bool rhs = (s_uv2 == s_uv1) && (s_uv2 == s_triple);
    r.prop2 = (lhs == rhs);

    bool same = i1.phi.to_text() == i2.phi.to_text() && i1.u == i2.u && i1.v == i2.v;
    r.prop3_applicable = same && r.p == r.p1;
    if (r.prop3_applicable) {
        r.prop3 = true;
        for (std::size_t i = 0; i < i1.v.size(); ++i) {
            if (s_uv2.count(i1.v[i]) && !s_uv2.count(i1.u[i])) r.prop3 = false;
        }
    }
    return r;
}

ImplDigraph impl_digraph(const Implication& i) {
    if (!(i.C == i.D)) throw std::invalid_argument("impl_digraph: needs a (C,C)-implication");
    if (!(i.C1 == i.D1)) throw std::invalid_argument("impl_digraph: proj_u and proj_v differ");
    ImplDigraph g;
    g.E = i.C1;
    g.C = i.C;
    g.verts = i.C1.orbits;
    g.adj.assign(g.verts.size(), {});
    auto idx = [&](const OrbitDescriptor& o) {
        auto it = std::lower_bound(g.verts.begin(), g.verts.end(), o);
        if (it == g.verts.end() || !(*it == o)) return -1;
        return static_cast<int>(it - g.verts.begin());
    };
    for (const auto& [O, P] : i.pairs) {
        int a = idx(O), b = idx(P);
        if (a >= 0 && b >= 0) g.adj[static_cast<std::size_t>(a)].push_back(b);
    }
    for (auto& row : g.adj) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    tarjan_scc(g.adj, g.scc_of, g.num_sccs);
    std::vector<int> indeg(g.verts.size(), 0);
    g.smooth = true;
    for (std::size_t a = 0; a < g.adj.size(); ++a) {
        if (g.adj[a].empty()) g.smooth = false;
        for (int b : g.adj[a]) ++indeg[static_cast<std::size_t>(b)];
    }
    for (int d : indeg)
        if (d == 0) g.smooth = false;
    return g;
}

SinkSourceReport sinks_sources(const ImplDigraph& g) {
    SinkSourceReport rep;
    rep.smooth = g.smooth;
    int n = static_cast<int>(g.verts.size());
    std::vector<bool> has_out(static_cast<std::size_t>(g.num_sccs), false);
    std::vector<bool> has_in(static_cast<std::size_t>(g.num_sccs), false);
    for (int a = 0; a < n; ++a)
        for (int b : g.adj[static_cast<std::size_t>(a)])
            if (g.scc_of[static_cast<std::size_t>(a)] != g.scc_of[static_cast<std::size_t>(b)]) {
                has_out[static_cast<std::size_t>(g.scc_of[static_cast<std::size_t>(a)])] = true;
                has_in[static_cast<std::size_t>(g.scc_of[static_cast<std::size_t>(b)])] = true;
            }
    for (int s = 0; s < g.num_sccs; ++s) {
        bool in_C = true, outside_C = true;
        for (int v = 0; v < n; ++v) {
            if (g.scc_of[static_cast<std::size_t>(v)] != s) continue;
            if (g.C.contains(g.verts[static_cast<std::size_t>(v)]))
                outside_C = false;
            else
                in_C = false;
        }
        if (!has_out[static_cast<std::size_t>(s)] && in_C) rep.sink_sccs_in_C.push_back(s);
        if (!has_in[static_cast<std::size_t>(s)] && outside_C) rep.source_sccs_outside.push_back(s);
    }
    return rep;
}

bool is_complete(const Implication& i, std::string* why) {
    int p = scope_union_size(i.u, i.v);
    ComposedFormula c = conjoin_renamed(i.phi, i.phi, i.v, i.u);
    std::vector<std::string> v2r;
    for (const auto& x : i.v) v2r.push_back(c.rename2.at(x));
    if (scope_union_size(i.u, v2r) != p) {
        if (why) *why = "variable count grows under self-composition";
        return false;
    }
    for (int idx : i.I)
        if (i.u[static_cast<std::size_t>(idx)] != i.v[static_cast<std::size_t>(idx)]) {
            if (why) *why = "index tuple is not the identity";
            return false;
        }
    ImplDigraph g = impl_digraph(i);
    BoolMatrix m(g.verts.size(), std::vector<std::uint8_t>(g.verts.size(), 0));
    for (std::size_t a = 0; a < g.adj.size(); ++a)
        for (int b : g.adj[a]) m[a][static_cast<std::size_t>(b)] = 1;
    if (!sccs_complete(m)) {
        if (why) *why = "a strongly connected component misses an arc or loop";
        return false;
    }
    return true;
}

namespace {

Implication power_of(const Implication& base, std::uint64_t n, Template& tmpl,
                     const EvalConfig& cfg) {
    // left-associated binary exponentiation; composition of (C,C)-implications
    // is associative on the level of satisfying sets
    std::optional<Implication> acc;
    Implication sq = base;
    std::uint64_t e = n;
    while (e > 0) {
        if (e & 1) {
            if (!acc) {
                acc = sq;
            } else {
                ComposeResult r = compose_implications(*acc, sq, tmpl, true, true, cfg);
                if (!r.impl)
                    throw std::runtime_error("completize: power composition failed: " +
                                             r.report.detail);
                acc = std::move(r.impl);
            }
        }
        e >>= 1;
        if (e > 0) {
            ComposeResult r = compose_implications(sq, sq, tmpl, true, true, cfg);
            if (!r.impl)
                throw std::runtime_error("completize: power composition failed: " +
                                         r.report.detail);
            sq = std::move(*r.impl);
        }
    }
    return *acc;
}

}  // namespace

Implication completize(const Implication& input, Template& tmpl, const EvalConfig& cfg,
                       const CompletizeOptions& opts) {
    if (!(input.C == input.D)) throw std::invalid_argument("completize: needs a (C,C)-implication");
    if (!(input.C1 == input.D1))
        throw std::invalid_argument("completize: proj_u and proj_v differ");
    if (!rel_restrict_injective(input.C).same_orbits(input.C))
        throw std::invalid_argument("completize: C must be injective");

    int k = static_cast<int>(input.u.size());

    // make the input injective (harmless when it already is)
    Implication cur = input;
    {
        PPFormula f = cur.phi;
        conjoin_all_distinct(f);
        ImplCheckResult r = check_implication(f, cur.u, cur.v, cur.C, cur.D, tmpl, cfg);
        if (!r.impl)
            throw std::runtime_error("completize: injective restriction failed: " +
                                     r.report.detail);
        cur = std::move(*r.impl);
        cur.bsw_assumed = true;
    }

    // stabilize the variable count (nondecreasing, bounded by 2k)
    for (int round = 0; round <= 2 * k; ++round) {
        ComposeResult r = compose_implications(cur, cur, tmpl, true, true, cfg);
        if (!r.impl)
            throw std::runtime_error("completize: stabilization failed: " + r.report.detail);
        if (scope_union_size(r.impl->u, r.impl->v) == scope_union_size(cur.u, cur.v)) break;
        cur = std::move(*r.impl);
    }

    // kill the index permutation sigma (u_i = v_sigma(i) on I)
    {
        std::map<int, int> sigma;
        for (int i : cur.I) {
            auto it = std::find(cur.v.begin(), cur.v.end(), cur.u[static_cast<std::size_t>(i)]);
            sigma[i] = static_cast<int>(it - cur.v.begin());
        }
        // order of sigma = lcm of cycle lengths
        std::uint64_t order = 1;
        std::set<int> seen;
        for (auto [start, _] : sigma) {
            if (seen.count(start)) continue;
            int len = 0, x = start;
            do {
                seen.insert(x);
                ++len;
                x = sigma.at(x);
            } while (x != start);
            order = std::lcm(order, static_cast<std::uint64_t>(len));
        }
        if (order > 1) cur = power_of(cur, order, tmpl, cfg);
        for (int i : cur.I)
            if (cur.u[static_cast<std::size_t>(i)] != cur.v[static_cast<std::size_t>(i)])
                throw std::runtime_error("completize: index permutation did not stabilize");
    }

    // saturate the SCCs: find the exponent on boolean matrix powers first
    ImplDigraph g = impl_digraph(cur);
    std::size_t n = g.verts.size();
    BoolMatrix m(n, std::vector<std::uint8_t>(n, 0));
    for (std::size_t a = 0; a < g.adj.size(); ++a)
        for (int b : g.adj[a]) m[a][static_cast<std::size_t>(b)] = 1;

    std::uint64_t cap = opts.power_cap;
    if (cap == 0) {
        cap = 1;
        for (std::size_t i = 2; i <= cur.I.size(); ++i) cap *= i;
        std::uint64_t shift = 2 * static_cast<std::uint64_t>(n);
        cap *= shift >= 40 ? (std::uint64_t{1} << 40) : (std::uint64_t{1} << shift);
    }

    BoolMatrix pw = m;
    std::uint64_t e = 1;
    while (!sccs_complete(pw)) {
        if (e >= cap) throw std::runtime_error("completize: power-search cap exceeded");
        pw = matmul(pw, m);
        ++e;
    }

    Implication result = e == 1 ? cur : power_of(cur, e, tmpl, cfg);
    std::string why;
    if (!is_complete(result, &why))
        throw std::runtime_error("completize: result is not complete: " + why);
    ImplCheckResult re =
        check_implication(result.phi, result.u, result.v, result.C, result.D, tmpl, cfg);
    if (!re.impl) throw std::runtime_error("completize: result fails re-verification");
    re.impl->bsw_assumed = true;
    return std::move(*re.impl);
}

namespace {

/// Canonical enumeration of atom conjunctions over at most max_vars variables:
/// atoms are nondecreasing in (relation index, tuple), and variable ids are
/// introduced in order of first appearance.
void enumerate_formulas(const Template& tmpl, int max_atoms, int max_vars,
                        const std::function<bool(const PPFormula&)>& fn) {
    std::vector<std::string> names = tmpl.names();
    struct AtomIdx {
        int rel;
        std::vector<int> tuple;
    };
    std::vector<AtomIdx> atoms;

    std::function<bool(std::vector<AtomIdx>&, int)> rec = [&](std::vector<AtomIdx>& cur,
                                                              int used_vars) -> bool {
        if (!cur.empty()) {
            PPFormula f;
            for (int i = 0; i < used_vars; ++i) f.vars.push_back("x" + std::to_string(i));
            for (const auto& a : cur) {
                Atom at;
                at.rel = names[static_cast<std::size_t>(a.rel)];
                for (int t : a.tuple) at.vars.push_back("x" + std::to_string(t));
                f.atoms.push_back(std::move(at));
            }
            f.free = f.vars;
            if (!fn(f)) return false;
        }
        if (static_cast<int>(cur.size()) == max_atoms) return true;
        for (int r = cur.empty() ? 0 : cur.back().rel; r < static_cast<int>(names.size()); ++r) {
            int arity = tmpl.relation(names[static_cast<std::size_t>(r)]).arity;
            std::vector<int> tuple(static_cast<std::size_t>(arity), 0);
            // enumerate tuples over var ids with the first-appearance rule
            std::function<bool(int, int)> tuples = [&](int pos, int used) -> bool {
                if (pos == arity) {
                    if (!cur.empty() && r == cur.back().rel && tuple < cur.back().tuple)
                        return true;  // keep atoms sorted
                    if (!cur.empty() && r == cur.back().rel && tuple == cur.back().tuple)
                        return true;  // no duplicate atoms
                    cur.push_back({r, tuple});
                    bool go = rec(cur, used);
                    cur.pop_back();
                    return go;
                }
                int limit = std::min(used, max_vars - 1);
                for (int v = 0; v <= limit; ++v) {
                    tuple[static_cast<std::size_t>(pos)] = v;
                    if (!tuples(pos + 1, std::max(used, v + 1))) return false;
                }
                return true;
            };
            if (!tuples(0, used_vars)) return false;
        }
        return true;
    };
    std::vector<AtomIdx> cur;
    rec(cur, 0);
}

std::vector<std::vector<std::string>> injective_var_tuples(const std::vector<std::string>& vars,
                                                           int k) {
    std::vector<std::vector<std::string>> out;
    for (auto& idxs : comb::injective_tuples(static_cast<int>(vars.size()), k)) {
        std::vector<std::string> t;
        t.reserve(idxs.size());
        for (int i : idxs) t.push_back(vars[static_cast<std::size_t>(i)]);
        out.push_back(std::move(t));
    }
    return out;
}

bool covers(const std::vector<std::string>& u, const std::vector<std::string>& v,
            const std::vector<std::string>& vars) {
    std::set<std::string> s(u.begin(), u.end());
    s.insert(v.begin(), v.end());
    return s.size() == vars.size();
}

}  // namespace

ImplicationGraph build_implication_graph(Template& tmpl, const SearchBounds& bounds,
                                         bool injective_mode, const EvalConfig& cfg) {
    ImplicationGraph g;
    g.injective_mode = injective_mode;
    int k = tmpl.universe().k;
    std::uint64_t budget = bounds.candidate_budget;
    std::set<std::pair<int, int>> arc_keys;

    auto vertex_id = [&](const Relation& C1, const Relation& C) {
        for (std::size_t i = 0; i < g.vertices.size(); ++i)
            if (g.vertices[i].first == C1 && g.vertices[i].second == C)
                return static_cast<int>(i);
        g.vertices.emplace_back(C1, C);
        return static_cast<int>(g.vertices.size() - 1);
    };

    auto add_arc = [&](Implication&& w) {
        int from = vertex_id(w.C1, w.C);
        int to = vertex_id(w.D1, w.D);
        if (arc_keys.emplace(from, to).second)
            g.arcs.push_back(ImplicationGraph::Arc{from, to, std::move(w)});
    };

    enumerate_formulas(tmpl, bounds.max_atoms, std::min(bounds.max_vars, 2 * k),
                       [&](const PPFormula& f0) {
        int nv = static_cast<int>(f0.vars.size());
        if (nv <= k || nv > 2 * k) return true;
        if (budget == 0) {
            g.truncated = true;
            return false;
        }
        --budget;
        PPFormula f = f0;
        if (injective_mode) conjoin_all_distinct(f);
        LabelingSet ls;
        try {
            ls = evaluate(f, tmpl, cfg);
        } catch (const EvalCapExceeded&) {
            g.truncated = true;
            return true;
        }
        if (ls.classes.empty()) return true;
        std::string dummy;
        if (!no_forced_equality(ls)) return true;  // item (1) fails for every (u,v)

        auto ktuples = injective_var_tuples(f.vars, k);
        for (const auto& u : ktuples) {
            for (const auto& v : ktuples) {
                if (!covers(u, v, f.vars)) continue;
                if (budget == 0) {
                    g.truncated = true;
                    return false;
                }
                --budget;
                auto upos = positions_of(ls.vars, u);
                auto vpos = positions_of(ls.vars, v);
                Relation C1 = ls.project(u);
                Relation D1 = ls.project(v);
                auto pairs = pairs_of(ls, upos, vpos);
                int norb = static_cast<int>(C1.orbits.size());
                if (norb < 2) continue;
                if (norb > bounds.max_c1_orbits) {
                    g.truncated = true;
                    continue;
                }
                for (std::uint32_t mask = 1; mask + 1 < (1u << norb); ++mask) {
                    std::vector<OrbitDescriptor> cs;
                    for (int b = 0; b < norb; ++b)
                        if (mask & (1u << b)) cs.push_back(C1.orbits[static_cast<std::size_t>(b)]);
                    Relation C = Relation::from_orbits(k, std::move(cs));
                    if (injective_mode && !C.injective()) continue;
                    // items (4) and (5) force D = image of C under the pairs
                    std::vector<OrbitDescriptor> ds;
                    for (const auto& [O, P] : pairs)
                        if (C.contains(O)) ds.push_back(P);
                    if (ds.empty()) continue;
                    Relation D = Relation::from_orbits(k, std::move(ds));
                    if (!D.proper_subset_of(D1)) continue;
                    if (injective_mode && C1 == D1 && C == D) continue;  // self-arc rule
                    Implication w;
                    w.phi = f;
                    w.u = u;
                    w.v = v;
                    w.C = std::move(C);
                    w.D = std::move(D);
                    w.C1 = C1;
                    w.D1 = D1;
                    w.pairs = pairs;
                    for (std::size_t i = 0; i < u.size(); ++i)
                        if (std::find(v.begin(), v.end(), u[i]) != v.end())
                            w.I.push_back(static_cast<int>(i));
                    w.injective = std::all_of(
                        ls.classes.begin(), ls.classes.end(),
                        [](const OrbitDescriptor& c) { return c.pattern.is_discrete(); });
                    add_arc(std::move(w));
                }
            }
        }
        return true;
    });

    for (int depth = 0; depth < bounds.closure_depth; ++depth) {
        std::size_t before = g.arcs.size();
        for (std::size_t a = 0; a < before; ++a) {
            for (std::size_t b = 0; b < before; ++b) {
                const Implication& w1 = g.arcs[a].witness;
                const Implication& w2 = g.arcs[b].witness;
                if (!(w1.D == w2.C) || !(w1.D1 == w2.C1)) continue;
                if (budget == 0) {
                    g.truncated = true;
                    return g;
                }
                --budget;
                try {
                    ComposeResult r =
                        compose_implications(w1, w2, tmpl, injective_mode, injective_mode, cfg);
                    if (r.impl && !r.impl->pre_only) {
                        if (injective_mode && r.impl->C1 == r.impl->D1 && r.impl->C == r.impl->D)
                            continue;
                        add_arc(std::move(*r.impl));
                    }
                } catch (const EvalCapExceeded&) {
                    g.truncated = true;
                }
            }
        }
        if (g.arcs.size() == before) break;
    }
    return g;
}

SimplicityReport is_implicationally_simple(const ImplicationGraph& g) {
    SimplicityReport rep;
    int n = static_cast<int>(g.vertices.size());
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& a : g.arcs) adj[static_cast<std::size_t>(a.from)].push_back(a.to);
    for (auto& row : adj) std::sort(row.begin(), row.end());

    std::vector<int> state(static_cast<std::size_t>(n), 0);  // 0 new, 1 open, 2 done
    std::vector<int> parent(static_cast<std::size_t>(n), -1);
    std::function<bool(int)> dfs = [&](int s) -> bool {
        state[static_cast<std::size_t>(s)] = 1;
        for (int w : adj[static_cast<std::size_t>(s)]) {
            if (state[static_cast<std::size_t>(w)] == 1) {
                // reconstruct the cycle w -> ... -> s -> w
                rep.cycle.clear();
                int x = s;
                rep.cycle.push_back(w);
                while (x != w) {
                    rep.cycle.push_back(x);
                    x = parent[static_cast<std::size_t>(x)];
                }
                std::reverse(rep.cycle.begin() + 1, rep.cycle.end());
                return false;
            }
            if (state[static_cast<std::size_t>(w)] == 0) {
                parent[static_cast<std::size_t>(w)] = s;
                if (!dfs(w)) return false;
            }
        }
        state[static_cast<std::size_t>(s)] = 2;
        return true;
    };
    for (int s = 0; s < n; ++s)
        if (state[static_cast<std::size_t>(s)] == 0 && !dfs(s)) {
            rep.simple = false;
            return rep;
        }
    return rep;
}

std::vector<CriticalCertificate> detect_critical(Template& tmpl, const SearchBounds& bounds,
                                                 const EvalConfig& cfg) {
    std::vector<CriticalCertificate> out;
    int k = tmpl.universe().k;
    std::uint64_t budget = bounds.candidate_budget;

    enumerate_formulas(tmpl, bounds.max_atoms, k + 1, [&](const PPFormula& f) {
        if (static_cast<int>(f.vars.size()) != k + 1) return true;
        if (budget == 0) return false;
        --budget;
        LabelingSet ls;
        try {
            ls = evaluate(f, tmpl, cfg);
        } catch (const EvalCapExceeded&) {
            return true;
        }
        if (ls.classes.empty()) return true;

        auto ktuples = injective_var_tuples(f.vars, k);
        for (const auto& u : ktuples) {
            for (const auto& v : ktuples) {
                if (!covers(u, v, f.vars)) continue;
                // u1, v1 outside scope(u) ∩ scope(v)
                std::set<std::string> su(u.begin(), u.end());
                if (std::find(u.begin(), u.end(), v[0]) != u.end()) continue;
                if (std::find(v.begin(), v.end(), u[0]) != v.end()) continue;
                if (budget == 0) return false;
                --budget;

                auto upos = positions_of(ls.vars, u);
                auto vpos = positions_of(ls.vars, v);
                Relation C1 = ls.project(u);
                Relation D1 = ls.project(v);
                if (!C1.injective() || !D1.injective()) continue;
                auto pairs = pairs_of(ls, upos, vpos);
                int norb = static_cast<int>(C1.orbits.size());
                if (norb > bounds.max_c1_orbits) continue;

                for (std::uint32_t cm = 1; cm + 1 < (1u << norb); ++cm) {
                    std::vector<OrbitDescriptor> cs;
                    for (int b = 0; b < norb; ++b)
                        if (cm & (1u << b)) cs.push_back(C1.orbits[static_cast<std::size_t>(b)]);
                    Relation C = Relation::from_orbits(k, std::move(cs));
                    ImplCheckResult ic = check_implication(f, u, v, C, C, tmpl, cfg);
                    if (!ic.impl) continue;
                    for (std::uint32_t dm = 1; dm + 1 < (1u << norb); ++dm) {
                        if (cm & dm) continue;  // disjointness, checked before evaluation
                        std::vector<OrbitDescriptor> dsv;
                        for (int b = 0; b < norb; ++b)
                            if (dm & (1u << b))
                                dsv.push_back(C1.orbits[static_cast<std::size_t>(b)]);
                        Relation D = Relation::from_orbits(k, std::move(dsv));
                        if (!D.proper_subset_of(C1) || !D.proper_subset_of(D1)) continue;
                        // last bullet: every orbit of D reached from D
                        bool ok = true;
                        for (const auto& P : D.orbits) {
                            bool reached = false;
                            for (const auto& [O, Q] : pairs)
                                if (Q == P && D.contains(O)) reached = true;
                            if (!reached) {
                                ok = false;
                                break;
                            }
                        }
                        if (!ok) continue;
                        out.push_back(CriticalCertificate{f, C, D, u, v});
                    }
                }
            }
        }
        return true;
    });
    return out;
}

std::vector<EqualityImplicationCertificate> detect_equality_implication(Template& tmpl,
                                                                        const SearchBounds& bounds,
                                                                        const EvalConfig& cfg) {
    std::vector<EqualityImplicationCertificate> out;
    int k = tmpl.universe().k;
    std::uint64_t budget = bounds.candidate_budget;

    OrbitDescriptor eq;
    eq.k = k;
    eq.pattern = Pattern::from_labels(std::vector<int>{0, 0});
    Relation Eq = Relation::from_orbits(2, {eq});

    for (int ell = 2; ell <= k; ++ell) {
        for (int nvars : {ell + 1, ell + 2}) {
            if (nvars > bounds.max_vars) continue;
            enumerate_formulas(tmpl, bounds.max_atoms, nvars, [&](const PPFormula& f) {
                if (static_cast<int>(f.vars.size()) != nvars) return true;
                if (budget == 0) return false;
                --budget;
                LabelingSet ls;
                try {
                    ls = evaluate(f, tmpl, cfg);
                } catch (const EvalCapExceeded&) {
                    return true;
                }
                if (ls.classes.empty()) return true;

                auto us = injective_var_tuples(f.vars, ell);
                auto vs = injective_var_tuples(f.vars, 2);
                for (const auto& u : us) {
                    for (const auto& v : vs) {
                        if (!covers(u, v, f.vars)) continue;
                        auto upos = positions_of(ls.vars, u);
                        auto vpos = positions_of(ls.vars, v);
                        Relation T1 = ls.project(u);
                        auto pairs = pairs_of(ls, upos, vpos);
                        // maximal T: injective classes whose image is only the
                        // constant pair
                        std::vector<OrbitDescriptor> ts;
                        bool reaches_eq = false;
                        for (const auto& O : T1.orbits) {
                            if (!O.pattern.is_discrete()) continue;
                            bool all_eq = true, any = false;
                            for (const auto& [P, Q] : pairs)
                                if (P == O) {
                                    any = true;
                                    if (!(Q == eq)) all_eq = false;
                                }
                            if (any && all_eq) {
                                ts.push_back(O);
                                reaches_eq = true;
                            }
                        }
                        if (!reaches_eq) continue;
                        Relation T = Relation::from_orbits(ell, std::move(ts));
                        if (T.empty()) continue;
                        ImplCheckResult r = check_implication(f, u, v, T, Eq, tmpl, cfg);
                        if (r.impl)
                            out.push_back(
                                EqualityImplicationCertificate{f, T, u, v, ell, nvars});
                    }
                }
                return true;
            });
        }
    }
    return out;
}

WitnessResult injective_witness(const PPFormula& phi, const OrbitDescriptor& g, Template& tmpl,
                                const EvalConfig& cfg) {
    LabelingSet ls = evaluate(phi, tmpl, cfg);
    if (!no_forced_equality(ls))
        throw std::invalid_argument(
            "injective_witness: a variable pair is forced constant (precondition violated)");
    if (g.arity() != static_cast<int>(phi.free.size()))
        throw std::invalid_argument("injective_witness: class arity mismatch");

    int k = tmpl.universe().k;
    PPFormula psi = phi;
    conjoin_all_distinct(psi);
    // conjoin the orbit of every injective k-subtuple of g
    for (auto& pos : comb::ksubsets(static_cast<int>(phi.free.size()), k)) {
        std::set<int> classes;
        for (int p : pos) classes.insert(g.pattern.class_of[static_cast<std::size_t>(p)]);
        if (static_cast<int>(classes.size()) != k) continue;
        OrbitDescriptor o = proj_orbit(g, pos);
        std::string rel = tmpl.ensure_relation(Relation::from_orbits(k, {o}));
        Atom at;
        at.rel = rel;
        for (int p : pos) at.vars.push_back(phi.free[static_cast<std::size_t>(p)]);
        psi.atoms.push_back(std::move(at));
    }
    LabelingSet hs = evaluate(psi, tmpl, cfg);
    WitnessResult res;
    if (hs.classes.empty()) {
        res.falsification = true;
        res.detail =
            "no injective satisfying class extends the given orbits; evidence against the "
            "bounded-strict-width assumption";
        return res;
    }
    res.h = hs.classes.front();
    res.detail = "injective class found";
    return res;
}

std::string to_dot(const ImplDigraph& g) {
    std::ostringstream os;
    os << "digraph impl {\n";
    for (std::size_t i = 0; i < g.verts.size(); ++i)
        os << "  v" << i << " [label=\"" << g.verts[i].to_string()
           << (g.C.contains(g.verts[i]) ? " (C)" : "") << "\"];\n";
    for (std::size_t a = 0; a < g.adj.size(); ++a)
        for (int b : g.adj[a]) os << "  v" << a << " -> v" << b << ";\n";
    os << "}\n";
    return os.str();
}

std::string to_dot(const ImplicationGraph& g) {
    std::ostringstream os;
    os << "digraph implication_graph {\n";
    for (std::size_t i = 0; i < g.vertices.size(); ++i)
        os << "  v" << i << " [label=\"(" << g.vertices[i].first.to_string() << ", "
           << g.vertices[i].second.to_string() << ")\"];\n";
    for (std::size_t a = 0; a < g.arcs.size(); ++a)
        os << "  v" << g.arcs[a].from << " -> v" << g.arcs[a].to << " [label=\"w" << a
           << "\"];\n";
    os << "}\n";
    return os.str();
}

}  // namespace orbitcsp
