#include "orbitcsp/polymorphism.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "orbitcsp/comb.hpp"

namespace orbitcsp {

std::size_t PartialOperation::index(std::span<const int> args) const {
    std::size_t idx = 0;
    for (int a : args) {
        if (a < 0 || a >= domain.n) throw std::invalid_argument("operation argument out of range");
        idx = idx * static_cast<std::size_t>(domain.n) + static_cast<std::size_t>(a);
    }
    return idx;
}

int PartialOperation::value(std::span<const int> args) const { return table[index(args)]; }

std::string PartialOperation::to_text() const {
    std::ostringstream os;
    os << "arity " << arity << " points " << domain.n << " -> " << output.n << '\n';
    std::vector<int> args(static_cast<std::size_t>(arity), 0);
    for (std::size_t idx = 0; idx < table.size(); ++idx) {
        os << "f(";
        for (int i = 0; i < arity; ++i) os << (i ? "," : "") << args[static_cast<std::size_t>(i)];
        os << ") = " << table[idx] << '\n';
        for (int i = arity - 1; i >= 0; --i) {
            if (++args[static_cast<std::size_t>(i)] < domain.n) break;
            args[static_cast<std::size_t>(i)] = 0;
        }
    }
    return os.str();
}

namespace {

enum class Mem { No, Maybe, Yes };

/// Membership of the tuple's orbit in r, read off a partially decided
/// fragment. Points >= f.n (hypothetical fresh values) count as undecided.
Mem membership(const Relation& r, std::span<const int> t, const Fragment& f) {
    Pattern p = Pattern::from_labels(t);
    int nc = p.num_classes();
    if (nc < f.k) {
        OrbitDescriptor o;
        o.k = f.k;
        o.pattern = p;
        return r.contains(o) ? Mem::Yes : Mem::No;
    }
    std::vector<int> rep(static_cast<std::size_t>(nc), -1);
    for (std::size_t i = 0; i < t.size(); ++i) {
        int c = p.class_of[i];
        if (rep[static_cast<std::size_t>(c)] < 0) rep[static_cast<std::size_t>(c)] = t[i];
    }
    bool maybe = false;
    for (const auto& o : r.orbits) {
        if (o.pattern != p) continue;
        bool compatible = true, certain = true;
        std::size_t fi = 0;
        for (const auto& cs : comb::ksubsets(nc, f.k)) {
            std::vector<int> pts;
            pts.reserve(cs.size());
            bool fresh = false;
            for (int c : cs) {
                int pt = rep[static_cast<std::size_t>(c)];
                if (pt >= f.n) fresh = true;
                pts.push_back(pt);
            }
            std::sort(pts.begin(), pts.end());
            Tri have = fresh ? Tri::Undecided : f.flag(pts);
            bool want = o.flags[fi++] != 0;
            if (have == Tri::Undecided) {
                certain = false;
            } else if ((have == Tri::True) != want) {
                compatible = false;
                break;
            }
        }
        if (compatible && certain) return Mem::Yes;
        if (compatible) maybe = true;
    }
    return maybe ? Mem::Maybe : Mem::No;
}

std::vector<std::vector<int>> tuples_in(const Fragment& domain, const Relation& r) {
    std::vector<std::vector<int>> out;
    std::vector<int> t(static_cast<std::size_t>(r.arity), 0);
    while (true) {
        if (r.contains(orbit_of(domain, t))) out.push_back(t);
        int i = r.arity - 1;
        for (; i >= 0; --i) {
            if (++t[static_cast<std::size_t>(i)] < domain.n) break;
            t[static_cast<std::size_t>(i)] = 0;
        }
        if (i < 0) break;
    }
    return out;
}

Fragment grown(const Fragment& f) {
    Fragment g = Fragment::empty(f.k, f.n + 1, Tri::Undecided);
    if (f.n >= f.k)
        for (const auto& s : comb::ksubsets(f.n, f.k)) g.set_flag(s, f.flag(s));
    return g;
}

std::uint64_t checked_pow(std::size_t base, int exp, std::uint64_t cap) {
    std::uint64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (base != 0 && r > cap / base) return cap + 1;
        r *= base;
    }
    return r;
}

struct Search {
    const UniverseSpec* u = nullptr;
    int m = 0, s = 0;
    bool injective = false;
    std::vector<const Relation*> rels;
    std::vector<std::string> rel_names;
    std::vector<std::vector<std::vector<int>>> rel_tuples;

    std::vector<int> table;  // -1 unassigned
    Fragment out;
    int max_used = 0;
    std::uint64_t nodes = 0, budget = 0, matrix_cap = 0;
    bool exhausted = false;
    std::vector<std::string> transcript;

    std::size_t cell_of(std::span<const int> args) const {
        std::size_t idx = 0;
        for (int a : args) idx = idx * static_cast<std::size_t>(s) + static_cast<std::size_t>(a);
        return idx;
    }

    bool value_used(int v, std::size_t except) const {
        for (std::size_t c = 0; c < table.size(); ++c)
            if (c != except && table[c] == v) return true;
        return false;
    }

    void assign(std::size_t cell, int v) {
        table[cell] = v;
        if (v >= out.n) out = grown(out);
        max_used = std::max(max_used, v);
    }

    struct Snapshot {
        std::vector<int> table;
        Fragment out;
        int max_used;
    };
    Snapshot save() const { return {table, out, max_used}; }
    void restore(Snapshot&& sn) {
        table = std::move(sn.table);
        out = std::move(sn.out);
        max_used = sn.max_used;
    }

    /// Fixpoint of the unit rule: a matrix of relation tuples whose output
    /// rows miss exactly one table cell forces that cell when a single value
    /// keeps the output placeable. Returns false on a definite contradiction.
    bool propagate() {
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t ri = 0; ri < rels.size(); ++ri) {
                const auto& tuples = rel_tuples[ri];
                if (tuples.empty()) continue;
                if (checked_pow(tuples.size(), m, matrix_cap) > matrix_cap) continue;
                int rows = rels[ri]->arity;
                std::vector<std::size_t> sel(static_cast<std::size_t>(m), 0);
                std::vector<std::size_t> cells(static_cast<std::size_t>(rows));
                std::vector<int> args(static_cast<std::size_t>(m));
                std::vector<int> outt(static_cast<std::size_t>(rows));
                while (true) {
                    std::size_t open = table.size();  // the single unassigned cell, if any
                    int nopen = 0;
                    for (int r = 0; r < rows; ++r) {
                        for (int j = 0; j < m; ++j)
                            args[static_cast<std::size_t>(j)] =
                                tuples[sel[static_cast<std::size_t>(j)]][static_cast<std::size_t>(r)];
                        std::size_t c = cell_of(args);
                        cells[static_cast<std::size_t>(r)] = c;
                        if (table[c] < 0 && c != open) {
                            open = c;
                            ++nopen;
                        }
                    }
                    if (nopen == 0) {
                        for (int r = 0; r < rows; ++r)
                            outt[static_cast<std::size_t>(r)] = table[cells[static_cast<std::size_t>(r)]];
                        if (membership(*rels[ri], outt, out) == Mem::No) {
                            if (transcript.size() < 64)
                                transcript.push_back("contradiction: " + rel_names[ri] +
                                                     " not preserved on a decided matrix");
                            return false;
                        }
                    } else if (nopen == 1) {
                        int forced = -1, count = 0;
                        for (int v = 0; v <= max_used + 1 && count < 2; ++v) {
                            if (injective && value_used(v, open)) continue;
                            for (int r = 0; r < rows; ++r) {
                                std::size_t c = cells[static_cast<std::size_t>(r)];
                                outt[static_cast<std::size_t>(r)] = c == open ? v : table[c];
                            }
                            if (membership(*rels[ri], outt, out) != Mem::No) {
                                forced = v;
                                ++count;
                            }
                        }
                        if (count == 0) {
                            if (transcript.size() < 64)
                                transcript.push_back("contradiction: no value for a cell under " +
                                                     rel_names[ri]);
                            return false;
                        }
                        if (count == 1) {
                            assign(open, forced);
                            changed = true;
                        }
                    }
                    int j = m - 1;
                    for (; j >= 0; --j) {
                        if (++sel[static_cast<std::size_t>(j)] < tuples.size()) break;
                        sel[static_cast<std::size_t>(j)] = 0;
                    }
                    if (j < 0) break;
                }
            }
        }
        return true;
    }

    /// All cells assigned: decide the output flags every preservation matrix
    /// reads, branching False first (False never embeds a bound).
    bool decide_flags() {
        if (++nodes > budget) {
            exhausted = true;
            return false;
        }
        for (std::size_t ri = 0; ri < rels.size(); ++ri) {
            const auto& tuples = rel_tuples[ri];
            if (tuples.empty()) continue;
            if (checked_pow(tuples.size(), m, matrix_cap) > matrix_cap) {
                exhausted = true;
                return false;
            }
            int rows = rels[ri]->arity;
            std::vector<std::size_t> sel(static_cast<std::size_t>(m), 0);
            std::vector<int> args(static_cast<std::size_t>(m));
            std::vector<int> outt(static_cast<std::size_t>(rows));
            while (true) {
                for (int r = 0; r < rows; ++r) {
                    for (int j = 0; j < m; ++j)
                        args[static_cast<std::size_t>(j)] =
                            tuples[sel[static_cast<std::size_t>(j)]][static_cast<std::size_t>(r)];
                    outt[static_cast<std::size_t>(r)] = table[cell_of(args)];
                }
                Mem mm = membership(*rels[ri], outt, out);
                if (mm == Mem::No) return false;
                if (mm == Mem::Maybe) {
                    // branch on the first undecided flag this tuple reads
                    std::vector<int> sorted(outt.begin(), outt.end());
                    std::sort(sorted.begin(), sorted.end());
                    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
                    if (static_cast<int>(sorted.size()) >= out.k) {
                        for (const auto& pick :
                             comb::ksubsets(static_cast<int>(sorted.size()), out.k)) {
                            std::vector<int> pts;
                            for (int i : pick) pts.push_back(sorted[static_cast<std::size_t>(i)]);
                            if (out.flag(pts) != Tri::Undecided) continue;
                            for (Tri val : {Tri::False, Tri::True}) {
                                out.set_flag(pts, val);
                                if (val == Tri::True && !realizable(out, *u)) continue;
                                if (decide_flags()) return true;
                                if (exhausted) return false;
                            }
                            out.set_flag(pts, Tri::Undecided);
                            return false;
                        }
                    }
                    return false;  // Maybe without an undecided flag cannot happen
                }
                int j = m - 1;
                for (; j >= 0; --j) {
                    if (++sel[static_cast<std::size_t>(j)] < tuples.size()) break;
                    sel[static_cast<std::size_t>(j)] = 0;
                }
                if (j < 0) break;
            }
        }
        return true;
    }

    enum class Outcome { Found, Unsat, Exhausted };

    Outcome dfs(const std::vector<std::size_t>& order) {
        if (!propagate()) return Outcome::Unsat;
        std::size_t cell = table.size();
        for (std::size_t c : order)
            if (table[c] < 0) {
                cell = c;
                break;
            }
        if (cell == table.size()) {
            Snapshot sn = save();
            if (decide_flags()) return Outcome::Found;
            restore(std::move(sn));
            return exhausted ? Outcome::Exhausted : Outcome::Unsat;
        }
        for (int v = 0; v <= max_used + 1; ++v) {
            if (injective && value_used(v, cell)) continue;
            if (++nodes > budget) {
                exhausted = true;
                return Outcome::Exhausted;
            }
            Snapshot sn = save();
            assign(cell, v);
            Outcome o = dfs(order);
            if (o == Outcome::Found) return o;
            restore(std::move(sn));
            if (o == Outcome::Exhausted) return o;
        }
        return Outcome::Unsat;
    }
};

Search make_search(const Template& t, const Fragment& domain, int arity,
                   const ProbeOptions& opts) {
    const UniverseSpec& u = t.universe();
    if (domain.k != u.k) throw std::invalid_argument("probe: domain arity mismatch");
    if (!domain.total()) throw std::invalid_argument("probe: domain fragment must be total");
    if (!realizable(domain, u)) throw std::invalid_argument("probe: domain is not realizable");
    Search S;
    S.u = &u;
    S.m = arity;
    S.s = domain.n;
    S.out = domain;
    S.max_used = domain.n - 1;
    S.budget = opts.node_budget;
    S.matrix_cap = opts.matrix_cap;
    std::uint64_t ncells = checked_pow(static_cast<std::size_t>(domain.n), arity, opts.matrix_cap);
    if (ncells > opts.matrix_cap) throw std::invalid_argument("probe: table exceeds the budget");
    S.table.assign(static_cast<std::size_t>(ncells), -1);
    for (const auto& name : t.names()) {
        S.rels.push_back(&t.relation(name));
        S.rel_names.push_back(name);
        S.rel_tuples.push_back(tuples_in(domain, t.relation(name)));
    }
    return S;
}

ProbeResult run_probe(Search& S, const std::vector<std::size_t>& order) {
    ProbeResult res;
    Search::Outcome o = S.propagate() ? S.dfs(order) : Search::Outcome::Unsat;
    res.transcript = std::move(S.transcript);
    res.transcript.push_back("nodes " + std::to_string(S.nodes));
    switch (o) {
        case Search::Outcome::Found: {
            for (auto& f : S.out.flags)
                if (f == Tri::Undecided) f = Tri::False;
            PartialOperation op;
            op.arity = S.m;
            op.domain = [&] {
                Fragment d = Fragment::empty(S.out.k, S.s, Tri::Undecided);
                if (S.s >= S.out.k)
                    for (const auto& sub : comb::ksubsets(S.s, S.out.k))
                        d.set_flag(sub, S.out.flag(sub));
                return d;
            }();
            op.table = S.table;
            op.output = S.out;
            res.status = ProbeStatus::Found;
            res.op = std::move(op);
            res.transcript.push_back("found");
            break;
        }
        case Search::Outcome::Unsat:
            res.status = ProbeStatus::NoneComplete;
            res.transcript.push_back("search space exhausted, no operation exists");
            break;
        case Search::Outcome::Exhausted:
            res.status = ProbeStatus::NoneExhausted;
            res.transcript.push_back("budget exhausted");
            break;
    }
    return res;
}

std::vector<std::size_t> branching_order(const Search& S) {
    std::vector<std::pair<int, std::size_t>> keyed;
    std::vector<int> args(static_cast<std::size_t>(S.m), 0);
    for (std::size_t c = 0; c < S.table.size(); ++c) {
        if (S.table[c] < 0) {
            std::vector<int> sorted(args.begin(), args.end());
            std::sort(sorted.begin(), sorted.end());
            sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
            keyed.emplace_back(static_cast<int>(sorted.size()), c);
        }
        for (int i = S.m - 1; i >= 0; --i) {
            if (++args[static_cast<std::size_t>(i)] < S.s) break;
            args[static_cast<std::size_t>(i)] = 0;
        }
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::size_t> order;
    order.reserve(keyed.size());
    for (const auto& [d, c] : keyed) order.push_back(c);
    return order;
}

}  // namespace

PreserveReport preserves(const PartialOperation& op, const Relation& r, const UniverseSpec& u) {
    if (op.table.size() !=
        checked_pow(static_cast<std::size_t>(op.domain.n), op.arity, SIZE_MAX / 2))
        throw std::invalid_argument("preserves: table size mismatch");
    for (int v : op.table)
        if (v < 0 || v >= op.output.n) throw std::invalid_argument("preserves: table not total");
    auto tuples = tuples_in(op.domain, r);
    PreserveReport rep;
    if (tuples.empty()) return rep;
    std::vector<std::size_t> sel(static_cast<std::size_t>(op.arity), 0);
    std::vector<int> args(static_cast<std::size_t>(op.arity));
    std::vector<int> outt(static_cast<std::size_t>(r.arity));
    (void)u;
    while (true) {
        for (int row = 0; row < r.arity; ++row) {
            for (int j = 0; j < op.arity; ++j)
                args[static_cast<std::size_t>(j)] =
                    tuples[sel[static_cast<std::size_t>(j)]][static_cast<std::size_t>(row)];
            outt[static_cast<std::size_t>(row)] = op.table[op.index(args)];
        }
        Mem mm = membership(r, outt, op.output);
        if (mm != Mem::Yes) {
            rep.ok = false;
            for (std::size_t j = 0; j < sel.size(); ++j) rep.violation.push_back(tuples[sel[j]]);
            rep.detail = mm == Mem::No ? "output tuple leaves the relation"
                                       : "output orbit undecided (pending flag decision)";
            return rep;
        }
        int j = op.arity - 1;
        for (; j >= 0; --j) {
            if (++sel[static_cast<std::size_t>(j)] < tuples.size()) break;
            sel[static_cast<std::size_t>(j)] = 0;
        }
        if (j < 0) break;
    }
    return rep;
}

NuReport check_local_nu_equations(const PartialOperation& op) {
    if (op.arity < 3) throw std::invalid_argument("check_local_nu_equations: arity must be >= 3");
    NuReport rep;
    int s = op.domain.n;
    std::vector<int> args(static_cast<std::size_t>(op.arity));
    for (int a = 0; a < s; ++a) {
        std::fill(args.begin(), args.end(), a);
        if (op.value(args) != a) {
            rep.ok = false;
            rep.detail = "idempotence fails at " + std::to_string(a);
            return rep;
        }
        for (int b = 0; b < s; ++b) {
            if (b == a) continue;
            for (int i = 0; i < op.arity; ++i) {
                std::fill(args.begin(), args.end(), a);
                args[static_cast<std::size_t>(i)] = b;
                if (op.value(args) != a) {
                    rep.ok = false;
                    rep.detail = "f with minority " + std::to_string(b) + " at position " +
                                 std::to_string(i) + " over " + std::to_string(a) +
                                 " is not " + std::to_string(a);
                    return rep;
                }
            }
        }
    }
    return rep;
}

ProbeResult find_local_nu(const Template& t, const Fragment& domain, int arity,
                          const ProbeOptions& opts) {
    if (arity < 3) throw std::invalid_argument("find_local_nu: arity must be >= 3");
    Search S = make_search(t, domain, arity, opts);
    // the near-unanimity equations pin every cell with a value of
    // multiplicity >= arity-1 to the majority value
    std::vector<int> args(static_cast<std::size_t>(arity), 0);
    for (std::size_t c = 0; c < S.table.size(); ++c) {
        std::vector<int> count(static_cast<std::size_t>(S.s), 0);
        for (int i = 0; i < arity; ++i) ++count[static_cast<std::size_t>(args[static_cast<std::size_t>(i)])];
        for (int v = 0; v < S.s; ++v)
            if (count[static_cast<std::size_t>(v)] >= arity - 1) S.table[c] = v;
        for (int i = arity - 1; i >= 0; --i) {
            if (++args[static_cast<std::size_t>(i)] < S.s) break;
            args[static_cast<std::size_t>(i)] = 0;
        }
    }
    auto order = branching_order(S);
    S.transcript.push_back("cells " + std::to_string(S.table.size()) + " free " +
                           std::to_string(order.size()));
    ProbeResult res = run_probe(S, order);
    if (res.op) {
        if (!check_local_nu_equations(*res.op).ok)
            throw std::logic_error("find_local_nu: result fails the equations");
        for (const auto& name : t.names())
            if (!preserves(*res.op, t.relation(name), t.universe()).ok)
                throw std::logic_error("find_local_nu: result does not preserve " + name);
        res.transcript.push_back("re-verified: equations and preservation");
    }
    return res;
}

ProbeResult find_binary_injection(const Template& t, const Fragment& domain,
                                  const ProbeOptions& opts) {
    Search S = make_search(t, domain, 2, opts);
    S.injective = true;
    auto order = branching_order(S);
    S.transcript.push_back("cells " + std::to_string(S.table.size()));
    ProbeResult res = run_probe(S, order);
    if (res.op) {
        std::vector<int> seen(res.op->table.begin(), res.op->table.end());
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
            throw std::logic_error("find_binary_injection: result is not injective");
        for (const auto& name : t.names())
            if (!preserves(*res.op, t.relation(name), t.universe()).ok)
                throw std::logic_error("find_binary_injection: result does not preserve " + name);
        res.transcript.push_back("re-verified: injectivity and preservation");
    }
    return res;
}

std::string to_string(ProbeStatus s) {
    switch (s) {
        case ProbeStatus::Found: return "FOUND";
        case ProbeStatus::NoneComplete: return "NONE_COMPLETE";
        default: return "NONE_EXHAUSTED";
    }
}

}  // namespace orbitcsp
