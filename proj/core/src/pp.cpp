#include "orbitcsp/pp.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include "orbitcsp/comb.hpp"

namespace orbitcsp {

int PPFormula::var_index(const std::string& name) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i] == name) return static_cast<int>(i);
    return -1;
}

bool PPFormula::is_free(const std::string& name) const {
    return std::find(free.begin(), free.end(), name) != free.end();
}

void PPFormula::add_var(const std::string& name) {
    if (var_index(name) < 0) vars.push_back(name);
}

void PPFormula::check(const Template& tmpl) const {
    for (const auto& a : atoms) {
        const Relation& r = tmpl.relation(a.rel);
        if (static_cast<int>(a.vars.size()) != r.arity)
            throw std::invalid_argument("pp: atom arity mismatch for " + a.rel);
        for (const auto& v : a.vars)
            if (var_index(v) < 0) throw std::invalid_argument("pp: unknown variable " + v);
    }
    for (const auto& [x, y] : eqs)
        if (var_index(x) < 0 || var_index(y) < 0) throw std::invalid_argument("pp: unknown eq var");
    for (const auto& [x, y] : neqs)
        if (var_index(x) < 0 || var_index(y) < 0) throw std::invalid_argument("pp: unknown neq var");
    for (const auto& v : free)
        if (var_index(v) < 0) throw std::invalid_argument("pp: free var not declared: " + v);
}

std::string PPFormula::to_text(const std::string& name) const {
    std::ostringstream os;
    os << "pp " << name << " free(";
    for (std::size_t i = 0; i < free.size(); ++i) {
        if (i) os << ",";
        os << free[i];
    }
    os << ") :=";
    bool first = true;
    auto sep = [&]() {
        os << (first ? " " : " & ");
        first = false;
    };
    for (const auto& a : atoms) {
        sep();
        os << a.rel << "(";
        for (std::size_t i = 0; i < a.vars.size(); ++i) {
            if (i) os << ",";
            os << a.vars[i];
        }
        os << ")";
    }
    for (const auto& [x, y] : eqs) {
        sep();
        os << x << " = " << y;
    }
    for (const auto& [x, y] : neqs) {
        sep();
        os << x << " != " << y;
    }
    if (first) os << " true";
    return os.str();
}

Relation LabelingSet::as_relation() const {
    return Relation::from_orbits(static_cast<int>(vars.size()),
                                 std::vector<OrbitDescriptor>(classes.begin(), classes.end()));
}

Relation LabelingSet::project(std::span<const std::string> tuple) const {
    std::vector<int> pos;
    pos.reserve(tuple.size());
    for (const auto& t : tuple) {
        auto it = std::find(vars.begin(), vars.end(), t);
        if (it == vars.end()) throw std::invalid_argument("project: variable not free: " + t);
        pos.push_back(static_cast<int>(it - vars.begin()));
    }
    std::vector<OrbitDescriptor> out;
    out.reserve(classes.size());
    for (const auto& c : classes) out.push_back(proj_orbit(c, pos));
    return Relation::from_orbits(static_cast<int>(tuple.size()), std::move(out));
}

namespace {

struct ResolvedAtom {
    const Relation* rel;
    std::vector<int> var_idx;
};

struct BoundChecker {
    const UniverseSpec* u;
    int npoints;
    std::set<std::vector<int>> true_edges;

    bool add_ok(const std::vector<int>& edge) {
        true_edges.insert(edge);
        if (u->bounds.empty()) return true;
        for (const auto& b : u->bounds) {
            // small inline hom search
            std::vector<int> img(static_cast<std::size_t>(b.size), -1);
            std::function<bool(int)> rec = [&](int p) -> bool {
                if (p == b.size) return true;
                for (int tgt = 0; tgt < npoints; ++tgt) {
                    img[static_cast<std::size_t>(p)] = tgt;
                    bool ok = true;
                    for (const auto& e : b.edges) {
                        bool complete = true;
                        for (int q : e)
                            if (q > p) {
                                complete = false;
                                break;
                            }
                        if (!complete) continue;
                        std::vector<int> ie;
                        ie.reserve(e.size());
                        for (int q : e) ie.push_back(img[static_cast<std::size_t>(q)]);
                        std::sort(ie.begin(), ie.end());
                        if (std::adjacent_find(ie.begin(), ie.end()) != ie.end() ||
                            !true_edges.count(ie)) {
                            ok = false;
                            break;
                        }
                    }
                    if (ok && rec(p + 1)) return true;
                }
                return false;
            };
            if (rec(0)) return false;
        }
        return true;
    }
    void remove(const std::vector<int>& edge) { true_edges.erase(edge); }
};

struct PartitionSolver {
    const PPFormula& f;
    const Template& tmpl;
    const std::vector<ResolvedAtom>& atoms;
    const std::vector<int>& free_idx;
    std::atomic<std::uint64_t>& nodes;
    std::uint64_t budget;
    int k;

    std::vector<std::vector<int>> slots;          // relevant k-subsets, sorted order
    std::map<std::vector<int>, int> slot_of;
    std::vector<Tri> assign;
    BoundChecker bc;
    std::vector<OrbitDescriptor>* out;

    // per-atom member constraint lists: member -> vector<(slot, value)>
    std::vector<std::vector<std::vector<std::pair<int, bool>>>> members;

    bool bump() {
        return nodes.fetch_add(1, std::memory_order_relaxed) < budget;
    }

    void run(const std::vector<int>& class_of, int nclasses,
             std::vector<OrbitDescriptor>& result) {
        out = &result;
        // equality constraints
        for (const auto& [x, y] : f.eqs)
            if (class_of[static_cast<std::size_t>(f.var_index(x))] !=
                class_of[static_cast<std::size_t>(f.var_index(y))])
                return;
        for (const auto& [x, y] : f.neqs)
            if (class_of[static_cast<std::size_t>(f.var_index(x))] ==
                class_of[static_cast<std::size_t>(f.var_index(y))])
                return;

        slots.clear();
        slot_of.clear();
        members.assign(atoms.size(), {});
        std::set<std::vector<int>> slotset;

        // free classes (distinct, sorted)
        std::vector<int> free_classes;
        for (int p : free_idx) free_classes.push_back(class_of[static_cast<std::size_t>(p)]);
        std::sort(free_classes.begin(), free_classes.end());
        free_classes.erase(std::unique(free_classes.begin(), free_classes.end()),
                           free_classes.end());
        if (static_cast<int>(free_classes.size()) >= k) {
            for (auto& s : comb::ksubsets(static_cast<int>(free_classes.size()), k)) {
                std::vector<int> g;
                g.reserve(s.size());
                for (int i : s) g.push_back(free_classes[static_cast<std::size_t>(i)]);
                slotset.insert(g);
            }
        }

        // atom members
        struct AtomPlan {
            Pattern pattern;
            std::vector<int> gclass;  // atom pattern class -> global class
        };
        std::vector<AtomPlan> plans(atoms.size());
        for (std::size_t ai = 0; ai < atoms.size(); ++ai) {
            std::vector<int> labels;
            labels.reserve(atoms[ai].var_idx.size());
            for (int vi : atoms[ai].var_idx)
                labels.push_back(class_of[static_cast<std::size_t>(vi)]);
            plans[ai].pattern = Pattern::from_labels(labels);
            plans[ai].gclass.assign(static_cast<std::size_t>(plans[ai].pattern.num_classes()), -1);
            for (std::size_t i = 0; i < labels.size(); ++i)
                plans[ai].gclass[static_cast<std::size_t>(plans[ai].pattern.class_of[i])] =
                    labels[i];
            bool any = false;
            for (const auto& o : atoms[ai].rel->orbits) {
                if (o.pattern != plans[ai].pattern) continue;
                any = true;
                if (o.has_flags()) {
                    int c = o.pattern.num_classes();
                    for (auto& s : comb::ksubsets(c, k)) {
                        std::vector<int> g;
                        g.reserve(s.size());
                        for (int j : s)
                            g.push_back(plans[ai].gclass[static_cast<std::size_t>(j)]);
                        std::sort(g.begin(), g.end());
                        slotset.insert(g);
                    }
                }
            }
            if (!any) return;  // no member matches this pattern
        }

        for (const auto& s : slotset) {
            slot_of.emplace(s, static_cast<int>(slots.size()));
            slots.push_back(s);
        }

        for (std::size_t ai = 0; ai < atoms.size(); ++ai) {
            for (const auto& o : atoms[ai].rel->orbits) {
                if (o.pattern != plans[ai].pattern) continue;
                std::vector<std::pair<int, bool>> cons;
                if (o.has_flags()) {
                    int c = o.pattern.num_classes();
                    auto ss = comb::ksubsets(c, k);
                    for (std::size_t si = 0; si < ss.size(); ++si) {
                        std::vector<int> g;
                        g.reserve(ss[si].size());
                        for (int j : ss[si])
                            g.push_back(plans[ai].gclass[static_cast<std::size_t>(j)]);
                        std::sort(g.begin(), g.end());
                        cons.emplace_back(slot_of.at(g), o.flags[si] != 0);
                    }
                }
                members[ai].push_back(std::move(cons));
            }
        }

        assign.assign(slots.size(), Tri::Undecided);
        bc.u = &tmpl.universe();
        bc.npoints = nclasses;
        bc.true_edges.clear();

        dfs_atom(0, class_of);
    }

    void dfs_atom(std::size_t ai, const std::vector<int>& class_of) {
        if (!bump()) throw EvalCapExceeded("evaluate: node budget exceeded");
        if (ai == atoms.size()) {
            dfs_free(0, class_of);
            return;
        }
        for (const auto& cons : members[ai]) {
            std::vector<int> trail;
            bool ok = true;
            for (const auto& [slot, val] : cons) {
                if (assign[static_cast<std::size_t>(slot)] == Tri::Undecided) {
                    assign[static_cast<std::size_t>(slot)] = val ? Tri::True : Tri::False;
                    trail.push_back(slot);
                    if (val && !bc.add_ok(slots[static_cast<std::size_t>(slot)])) {
                        bc.remove(slots[static_cast<std::size_t>(slot)]);
                        assign[static_cast<std::size_t>(slot)] = Tri::Undecided;
                        trail.pop_back();
                        ok = false;
                        break;
                    }
                } else if ((assign[static_cast<std::size_t>(slot)] == Tri::True) != val) {
                    ok = false;
                    break;
                }
            }
            if (ok) dfs_atom(ai + 1, class_of);
            for (auto it = trail.rbegin(); it != trail.rend(); ++it) {
                if (assign[static_cast<std::size_t>(*it)] == Tri::True)
                    bc.remove(slots[static_cast<std::size_t>(*it)]);
                assign[static_cast<std::size_t>(*it)] = Tri::Undecided;
            }
        }
    }

    void dfs_free(std::size_t from, const std::vector<int>& class_of) {
        std::size_t s = from;
        while (s < slots.size() && assign[s] != Tri::Undecided) ++s;
        if (s == slots.size()) {
            emit(class_of);
            return;
        }
        if (!bump()) throw EvalCapExceeded("evaluate: node budget exceeded");
        assign[s] = Tri::False;
        dfs_free(s + 1, class_of);
        assign[s] = Tri::True;
        if (bc.add_ok(slots[s])) dfs_free(s + 1, class_of);
        bc.remove(slots[s]);
        assign[s] = Tri::Undecided;
    }

    void emit(const std::vector<int>& class_of) {
        std::vector<int> labels;
        labels.reserve(free_idx.size());
        for (int p : free_idx) labels.push_back(class_of[static_cast<std::size_t>(p)]);
        OrbitDescriptor o;
        o.k = k;
        o.pattern = Pattern::from_labels(labels);
        int c = o.pattern.num_classes();
        if (c >= k) {
            std::vector<int> gof(static_cast<std::size_t>(c), -1);
            for (std::size_t i = 0; i < labels.size(); ++i)
                gof[static_cast<std::size_t>(o.pattern.class_of[i])] = labels[i];
            auto ss = comb::ksubsets(c, k);
            o.flags.resize(ss.size());
            for (std::size_t si = 0; si < ss.size(); ++si) {
                std::vector<int> g;
                g.reserve(ss[si].size());
                for (int j : ss[si]) g.push_back(gof[static_cast<std::size_t>(j)]);
                std::sort(g.begin(), g.end());
                o.flags[si] = (assign[static_cast<std::size_t>(slot_of.at(g))] == Tri::True) ? 1 : 0;
            }
        }
        out->push_back(std::move(o));
    }
};

}  // namespace

LabelingSet evaluate(const PPFormula& f, const Template& tmpl, const EvalConfig& cfg) {
    f.check(tmpl);
    int m = static_cast<int>(f.vars.size());
    if (m > cfg.max_vars) throw EvalCapExceeded("evaluate: variable cap exceeded");
    if (m == 0) {
        OrbitDescriptor unit;
        unit.k = tmpl.universe().k;
        return LabelingSet{{}, {unit}};
    }

    std::vector<ResolvedAtom> atoms;
    atoms.reserve(f.atoms.size());
    for (const auto& a : f.atoms) {
        ResolvedAtom ra;
        ra.rel = &tmpl.relation(a.rel);
        for (const auto& v : a.vars) ra.var_idx.push_back(f.var_index(v));
        atoms.push_back(std::move(ra));
    }
    std::vector<int> free_idx;
    for (const auto& v : f.free) free_idx.push_back(f.var_index(v));

    // materialize partitions (flat buffer)
    std::vector<int> flat;
    std::vector<int> ncls;
    comb::for_each_partition(m, [&](const std::vector<int>& a, int c) {
        flat.insert(flat.end(), a.begin(), a.end());
        ncls.push_back(c);
        return true;
    });
    std::size_t nparts = ncls.size();

    std::atomic<std::uint64_t> nodes{0};
    int nthreads = std::max(1, cfg.threads);
    std::vector<std::vector<OrbitDescriptor>> results(static_cast<std::size_t>(nthreads));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nthreads));

    auto work = [&](int t) {
        try {
            PartitionSolver ps{f,     tmpl, atoms, free_idx, nodes,
                               cfg.node_budget, tmpl.universe().k, {}, {}, {}, {}, nullptr, {}};
            std::vector<int> class_of(static_cast<std::size_t>(m));
            for (std::size_t pi = static_cast<std::size_t>(t); pi < nparts;
                 pi += static_cast<std::size_t>(nthreads)) {
                std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pi * static_cast<std::size_t>(m)),
                          flat.begin() + static_cast<std::ptrdiff_t>((pi + 1) * static_cast<std::size_t>(m)),
                          class_of.begin());
                ps.run(class_of, ncls[pi], results[static_cast<std::size_t>(t)]);
            }
        } catch (...) {
            errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
    };

    if (nthreads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    LabelingSet ls;
    ls.vars = f.free;
    for (auto& r : results)
        ls.classes.insert(ls.classes.end(), std::make_move_iterator(r.begin()),
                          std::make_move_iterator(r.end()));
    std::sort(ls.classes.begin(), ls.classes.end());
    ls.classes.erase(std::unique(ls.classes.begin(), ls.classes.end()), ls.classes.end());
    return ls;
}

Relation proj_formula(const PPFormula& f, std::span<const std::string> u, const Template& tmpl,
                      const EvalConfig& cfg) {
    return evaluate(f, tmpl, cfg).project(u);
}

bool entails_equality(const PPFormula& f, const Relation& T, std::span<const std::string> u,
                      const std::string& x, const std::string& y, const Template& tmpl,
                      const EvalConfig& cfg) {
    LabelingSet ls = evaluate(f, tmpl, cfg);
    std::vector<int> upos, xy;
    for (const auto& t : u) {
        auto it = std::find(ls.vars.begin(), ls.vars.end(), t);
        if (it == ls.vars.end()) throw std::invalid_argument("entails_equality: non-free var " + t);
        upos.push_back(static_cast<int>(it - ls.vars.begin()));
    }
    auto xit = std::find(ls.vars.begin(), ls.vars.end(), x);
    auto yit = std::find(ls.vars.begin(), ls.vars.end(), y);
    if (xit == ls.vars.end() || yit == ls.vars.end())
        throw std::invalid_argument("entails_equality: x,y must be free");
    int xi = static_cast<int>(xit - ls.vars.begin());
    int yi = static_cast<int>(yit - ls.vars.begin());
    for (const auto& cls : ls.classes) {
        if (!T.contains(proj_orbit(cls, upos))) continue;
        if (cls.pattern.class_of[static_cast<std::size_t>(xi)] !=
            cls.pattern.class_of[static_cast<std::size_t>(yi)])
            return false;
    }
    return true;
}

ComposedFormula conjoin_renamed(const PPFormula& f1, const PPFormula& f2,
                                std::span<const std::string> v1,
                                std::span<const std::string> u2) {
    if (v1.size() != u2.size()) throw std::invalid_argument("compose: tuple length mismatch");
    ComposedFormula out;
    out.formula = f1;

    std::map<std::string, std::string>& ren = out.rename2;
    for (std::size_t i = 0; i < u2.size(); ++i) {
        if (f2.var_index(u2[i]) < 0)
            throw std::invalid_argument("compose: u2 entry not a variable of f2");
        auto [it, fresh] = ren.emplace(u2[i], v1[i]);
        if (!fresh && it->second != v1[i])
            throw std::invalid_argument("compose: u2 must be injective");
    }
    int counter = 0;
    auto fresh_name = [&]() {
        while (true) {
            std::string cand = "z" + std::to_string(counter++);
            if (out.formula.var_index(cand) < 0) {
                bool clash = false;
                for (const auto& [from, to] : ren)
                    if (to == cand) clash = true;
                if (!clash) return cand;
            }
        }
    };
    for (const auto& v : f2.vars)
        if (!ren.count(v)) ren.emplace(v, fresh_name());

    for (const auto& v : f2.vars) out.formula.add_var(ren.at(v));
    for (const auto& a : f2.atoms) {
        Atom na;
        na.rel = a.rel;
        for (const auto& v : a.vars) na.vars.push_back(ren.at(v));
        out.formula.atoms.push_back(std::move(na));
    }
    for (const auto& [x, y] : f2.eqs) out.formula.eqs.emplace_back(ren.at(x), ren.at(y));
    for (const auto& [x, y] : f2.neqs) out.formula.neqs.emplace_back(ren.at(x), ren.at(y));
    out.formula.free = out.formula.vars;
    return out;
}

PPFormula syntactic_compose(const PPFormula& f1, const PPFormula& f2,
                            std::span<const std::string> u1, std::span<const std::string> v1,
                            std::span<const std::string> u2, std::span<const std::string> v2,
                            std::vector<std::string>* v2_renamed) {
    ComposedFormula c = conjoin_renamed(f1, f2, v1, u2);
    std::vector<std::string> keep;
    for (const auto& v : u1) keep.push_back(v);
    std::vector<std::string> rv2;
    for (const auto& v : v2) rv2.push_back(c.rename2.at(v));
    for (const auto& v : rv2)
        if (std::find(keep.begin(), keep.end(), v) == keep.end()) keep.push_back(v);
    c.formula.free = keep;
    if (v2_renamed) *v2_renamed = rv2;
    return c.formula;
}

PPFormula flatten(const PPFormula& f, Template& tmpl, const EvalConfig& cfg) {
    LabelingSet ls = evaluate(f, tmpl, cfg);
    std::string name = tmpl.ensure_relation(ls.as_relation());
    PPFormula out;
    out.vars = f.free;
    out.free = f.free;
    out.atoms.push_back(Atom{name, f.free});
    return out;
}

}  // namespace orbitcsp
