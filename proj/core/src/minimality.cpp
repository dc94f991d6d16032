#include "orbitcsp/minimality.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "orbitcsp/comb.hpp"

namespace orbitcsp {

int Instance::var_index(const std::string& name) const {
    auto it = std::find(vars.begin(), vars.end(), name);
    return it == vars.end() ? -1 : static_cast<int>(it - vars.begin());
}

void Instance::check(const UniverseSpec& u) const {
    (void)u;
    std::set<std::string> seen(vars.begin(), vars.end());
    if (seen.size() != vars.size()) throw std::invalid_argument("instance: duplicate variable");
    for (const auto& c : constraints) {
        if (c.scope.empty()) throw std::invalid_argument("instance: empty constraint scope");
        std::set<std::string> s(c.scope.begin(), c.scope.end());
        if (s.size() != c.scope.size())
            throw std::invalid_argument("instance: repeated variable in scope");
        for (const auto& v : c.scope)
            if (!seen.count(v)) throw std::invalid_argument("instance: unknown variable " + v);
        if (c.rel.arity != static_cast<int>(c.scope.size()))
            throw std::invalid_argument("instance: constraint arity mismatch");
    }
}

std::string Instance::to_text() const {
    std::ostringstream os;
    os << "var";
    for (const auto& v : vars) os << ' ' << v;
    os << '\n';
    std::vector<std::string> lines;
    for (const auto& c : constraints) {
        std::ostringstream line;
        line << "constraint (";
        for (std::size_t i = 0; i < c.scope.size(); ++i) {
            if (i) line << ',';
            line << c.scope[i];
        }
        line << ") allow {";
        for (const auto& o : c.rel.orbits) line << ' ' << o.to_string();
        line << " }";
        lines.push_back(line.str());
    }
    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
    for (const auto& l : lines) os << l << '\n';
    if (minimality_level)
        os << "minimal " << minimality_level->first << ' ' << minimality_level->second << '\n';
    return os.str();
}

bool is_trivial(const Instance& inst) {
    return std::any_of(inst.constraints.begin(), inst.constraints.end(),
                       [](const Constraint& c) { return c.rel.empty(); });
}

namespace {

std::vector<int> scope_positions(const Constraint& c, std::span<const std::string> u) {
    std::vector<int> pos;
    pos.reserve(u.size());
    for (const auto& name : u) {
        auto it = std::find(c.scope.begin(), c.scope.end(), name);
        if (it == c.scope.end())
            throw std::invalid_argument("projection variable outside constraint scope: " + name);
        pos.push_back(static_cast<int>(it - c.scope.begin()));
    }
    return pos;
}

bool scope_covers(const Constraint& c, std::span<const std::string> u) {
    for (const auto& name : u)
        if (std::find(c.scope.begin(), c.scope.end(), name) == c.scope.end()) return false;
    return true;
}

/// Keeps only orbits whose projection onto pos lies in keep.
bool filter_by_projection(Constraint& c, const std::vector<int>& pos, const Relation& keep) {
    std::vector<OrbitDescriptor> kept;
    for (const auto& o : c.rel.orbits)
        if (keep.contains(proj_orbit(o, pos))) kept.push_back(o);
    if (kept.size() == c.rel.orbits.size()) return false;
    c.rel = Relation::from_orbits(c.rel.arity, std::move(kept));
    return true;
}

}  // namespace

Relation constraint_proj(const Constraint& c, std::span<const std::string> u) {
    auto pos = scope_positions(c, u);
    std::vector<OrbitDescriptor> out;
    out.reserve(c.rel.orbits.size());
    for (const auto& o : c.rel.orbits) out.push_back(proj_orbit(o, pos));
    return Relation::from_orbits(static_cast<int>(u.size()), std::move(out));
}

Relation proj_instance(const Instance& inst, std::span<const std::string> u) {
    if (!inst.minimality_level || inst.minimality_level->first < static_cast<int>(u.size()))
        throw std::logic_error("proj_instance: instance not stamped k-minimal for this tuple");
    for (const auto& c : inst.constraints)
        if (scope_covers(c, u)) return constraint_proj(c, u);
    throw std::logic_error("proj_instance: no covering constraint");
}

Instance kl_minimalize(const Instance& inst, int k, int ell, const UniverseSpec& u,
                       const MinimalizeOptions& opts) {
    if (k < 1 || k > ell) throw std::invalid_argument("kl_minimalize: need 1 <= k <= ell");
    inst.check(u);

    Instance out;
    out.vars = inst.vars;
    out.constraints = inst.constraints;
    int n = static_cast<int>(out.vars.size());

    // one full constraint per nonempty <= ell-subset (the equivalence
    // expansion); subsets already covered by an existing scope are skipped so
    // re-minimalizing is idempotent on the constraint list
    for (int s = 1; s <= std::min(ell, n); ++s) {
        for (const auto& idxs : comb::ksubsets(n, s)) {
            Constraint c;
            for (int i : idxs) c.scope.push_back(out.vars[static_cast<std::size_t>(i)]);
            bool covered = false;
            for (const auto& existing : inst.constraints)
                if (scope_covers(existing, c.scope)) {
                    covered = true;
                    break;
                }
            if (covered) continue;
            c.rel = Relation::from_orbits(s, enumerate_orbits(u, s, false));
            out.constraints.push_back(std::move(c));
        }
    }

    // pair revision schedule: the fixpoint is unique (monotone shrinking), so
    // the iteration order only matters for the confluence test
    std::size_t nc = out.constraints.size();
    std::vector<std::pair<std::size_t, std::size_t>> order;
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = i + 1; j < nc; ++j) order.emplace_back(i, j);
    if (!order.empty()) {
        std::rotate(order.begin(),
                    order.begin() + static_cast<std::ptrdiff_t>(
                                        static_cast<std::size_t>(opts.schedule) % order.size()),
                    order.end());
        if (opts.schedule % 2 == 1) std::reverse(order.begin(), order.end());
    }

    bool changed = true;
    while (changed) {
        changed = false;
        for (auto [i, j] : order) {
            Constraint& ci = out.constraints[i];
            Constraint& cj = out.constraints[j];
            std::vector<std::string> common;
            for (const auto& v : ci.scope)
                if (std::find(cj.scope.begin(), cj.scope.end(), v) != cj.scope.end())
                    common.push_back(v);
            if (common.empty()) continue;
            // order by global variable order for determinism
            std::sort(common.begin(), common.end(), [&](const auto& a, const auto& b) {
                return inst.var_index(a) < inst.var_index(b);
            });
            int m = std::min<int>(k, static_cast<int>(common.size()));
            for (const auto& sub : comb::ksubsets(static_cast<int>(common.size()), m)) {
                std::vector<std::string> s;
                for (int t : sub) s.push_back(common[static_cast<std::size_t>(t)]);
                Relation pi = constraint_proj(ci, s);
                Relation pj = constraint_proj(cj, s);
                if (pi == pj) continue;
                Relation inter = rel_intersect(pi, pj);
                changed |= filter_by_projection(ci, scope_positions(ci, s), inter);
                changed |= filter_by_projection(cj, scope_positions(cj, s), inter);
            }
        }
    }
    out.minimality_level = {k, ell};
    return out;
}

MinimalityReport is_kl_minimal(const Instance& inst, int k, int ell) {
    int n = static_cast<int>(inst.vars.size());
    for (int s = 1; s <= std::min(ell, n); ++s) {
        for (const auto& idxs : comb::ksubsets(n, s)) {
            std::vector<std::string> sub;
            for (int i : idxs) sub.push_back(inst.vars[static_cast<std::size_t>(i)]);
            bool covered = false;
            for (const auto& c : inst.constraints)
                if (scope_covers(c, sub)) {
                    covered = true;
                    break;
                }
            if (!covered) {
                std::string names;
                for (const auto& v : sub) names += (names.empty() ? "" : ",") + v;
                return {false, 1, "no constraint covers {" + names + "}"};
            }
        }
    }
    for (std::size_t i = 0; i < inst.constraints.size(); ++i) {
        for (std::size_t j = i + 1; j < inst.constraints.size(); ++j) {
            const Constraint& ci = inst.constraints[i];
            const Constraint& cj = inst.constraints[j];
            std::vector<std::string> common;
            for (const auto& v : ci.scope)
                if (std::find(cj.scope.begin(), cj.scope.end(), v) != cj.scope.end())
                    common.push_back(v);
            int mmax = std::min<int>(k, static_cast<int>(common.size()));
            for (int m = 1; m <= mmax; ++m) {
                for (const auto& sub : comb::ksubsets(static_cast<int>(common.size()), m)) {
                    std::vector<std::string> s;
                    for (int t : sub) s.push_back(common[static_cast<std::size_t>(t)]);
                    if (!(constraint_proj(ci, s) == constraint_proj(cj, s))) {
                        std::string names;
                        for (const auto& v : s) names += (names.empty() ? "" : ",") + v;
                        return {false, 2,
                                "constraints " + std::to_string(i) + " and " + std::to_string(j) +
                                    " disagree on (" + names + ")"};
                    }
                }
            }
        }
    }
    return {};
}

Injectivized injectivize(const Instance& inst, const UniverseSpec& u) {
    if (!inst.minimality_level || inst.minimality_level->first < 2)
        throw std::logic_error("injectivize: instance must be stamped (k,ell)-minimal, k >= 2");
    if (is_trivial(inst)) throw std::logic_error("injectivize: instance is trivial");

    int n = static_cast<int>(inst.vars.size());
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
        return x;
    };

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            std::vector<std::string> pair = {inst.vars[static_cast<std::size_t>(i)],
                                             inst.vars[static_cast<std::size_t>(j)]};
            Relation p = proj_instance(inst, pair);
            bool constant = std::all_of(p.orbits.begin(), p.orbits.end(),
                                        [](const OrbitDescriptor& o) {
                                            return o.pattern.num_classes() == 1;
                                        });
            if (constant) {
                int a = find(i), b = find(j);
                if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
            }
        }
    }

    Injectivized res;
    for (int i = 0; i < n; ++i)
        res.rep[inst.vars[static_cast<std::size_t>(i)]] =
            inst.vars[static_cast<std::size_t>(find(i))];
    for (int i = 0; i < n; ++i)
        if (find(i) == i) res.instance.vars.push_back(inst.vars[static_cast<std::size_t>(i)]);

    for (const auto& c : inst.constraints) {
        // collapse the scope to representatives, first occurrence order
        std::vector<std::string> new_scope;
        std::vector<int> first_pos;              // position of each new scope var in the old scope
        std::vector<int> rep_of_pos(c.scope.size());  // index into new_scope per old position
        for (std::size_t p = 0; p < c.scope.size(); ++p) {
            const std::string& r = res.rep.at(c.scope[p]);
            auto it = std::find(new_scope.begin(), new_scope.end(), r);
            if (it == new_scope.end()) {
                rep_of_pos[p] = static_cast<int>(new_scope.size());
                new_scope.push_back(r);
                first_pos.push_back(static_cast<int>(p));
            } else {
                rep_of_pos[p] = static_cast<int>(it - new_scope.begin());
            }
        }
        std::vector<OrbitDescriptor> kept;
        for (const auto& o : c.rel.orbits) {
            // identified positions must already be equal in the labeling
            bool consistent = true;
            for (std::size_t p = 0; p < c.scope.size() && consistent; ++p)
                if (o.pattern.class_of[p] !=
                    o.pattern.class_of[static_cast<std::size_t>(
                        first_pos[static_cast<std::size_t>(rep_of_pos[p])])])
                    consistent = false;
            if (!consistent) continue;
            OrbitDescriptor q = proj_orbit(o, first_pos);
            // CSP_inj: distinct scope variables carry injective labelings only
            if (q.pattern.is_discrete()) kept.push_back(q);
        }
        Constraint nc;
        nc.scope = std::move(new_scope);
        nc.rel = Relation::from_orbits(static_cast<int>(nc.scope.size()), std::move(kept));
        res.instance.constraints.push_back(std::move(nc));
    }

    // disequality constraint for every remaining pair
    Relation neq = Relation::from_orbits(2, enumerate_orbits(u, 2, true));
    int m = static_cast<int>(res.instance.vars.size());
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            Constraint nc;
            nc.scope = {res.instance.vars[static_cast<std::size_t>(i)],
                        res.instance.vars[static_cast<std::size_t>(j)]};
            nc.rel = neq;
            res.instance.constraints.push_back(std::move(nc));
        }
    return res;
}

}  // namespace orbitcsp
