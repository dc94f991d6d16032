#include "orbitcsp/universe.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "orbitcsp/comb.hpp"

namespace orbitcsp {

namespace {

/// True iff the bound maps homomorphically into the given edge set on n points.
bool bound_homs_into(const ForbiddenStructure& b, int n,
                     const std::set<std::vector<int>>& true_edges) {
    std::vector<int> img(static_cast<std::size_t>(b.size), -1);
    // edges whose points are all <= p, used for incremental checking
    std::function<bool(int)> rec = [&](int p) -> bool {
        if (p == b.size) return true;
        for (int tgt = 0; tgt < n; ++tgt) {
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
                    true_edges.find(ie) == true_edges.end()) {
                    ok = false;
                    break;
                }
            }
            if (ok && rec(p + 1)) return true;
        }
        img[static_cast<std::size_t>(p)] = -1;
        return false;
    };
    return rec(0);
}

std::set<std::vector<int>> fragment_true_edges(const Fragment& f) {
    std::set<std::vector<int>> edges;
    for (auto& e : f.true_edges()) edges.insert(e);
    return edges;
}

}  // namespace

int UniverseSpec::b_bound() const {
    int b = k;  // degenerate bounds (repeated entries, asymmetric labelings) have size <= k
    for (const auto& f : bounds) b = std::max(b, f.size);
    return b;
}

int UniverseSpec::default_ell() const { return std::max(k + 1, b_bound()); }

void UniverseSpec::validate() const {
    if (k < 2) throw std::invalid_argument("universe: k must be >= 2");
    for (const auto& b : bounds) {
        if (b.size < k) throw std::invalid_argument("universe: bound smaller than k");
        for (const auto& e : b.edges) {
            if (static_cast<int>(e.size()) != k)
                throw std::invalid_argument("universe: edge arity mismatch");
            for (int p : e)
                if (p < 0 || p >= b.size) throw std::invalid_argument("universe: bad edge point");
            if (!std::is_sorted(e.begin(), e.end()) ||
                std::adjacent_find(e.begin(), e.end()) != e.end())
                throw std::invalid_argument("universe: edge must be a sorted set of distinct points");
        }
    }
    // Closure under homomorphic images: every non-collapsing quotient of a
    // bound must be isomorphic to some bound. A quotient that collapses an
    // edge never maps into the (irreflexive) ground relation, so it is
    // forbidden for free and skipped here. Every hom image factors through a
    // quotient, so enumerating quotients covers all images.
    auto isomorphic = [](const std::set<std::vector<int>>& edges, const ForbiddenStructure& b2,
                         int n) {
        if (b2.size != n || edges.size() != b2.edges.size()) return false;
        std::set<std::vector<int>> target(b2.edges.begin(), b2.edges.end());
        std::vector<int> perm(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
        do {
            bool ok = true;
            for (const auto& e : edges) {
                std::vector<int> ie;
                ie.reserve(e.size());
                for (int p : e) ie.push_back(perm[static_cast<std::size_t>(p)]);
                std::sort(ie.begin(), ie.end());
                if (!target.count(ie)) {
                    ok = false;
                    break;
                }
            }
            if (ok) return true;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return false;
    };
    for (const auto& b : bounds) {
        comb::for_each_partition(b.size, [&](const std::vector<int>& class_of, int nclasses) {
            if (nclasses == b.size) return true;  // identity quotient
            std::set<std::vector<int>> img_edges;
            for (const auto& e : b.edges) {
                std::vector<int> ie;
                for (int p : e) ie.push_back(class_of[static_cast<std::size_t>(p)]);
                std::sort(ie.begin(), ie.end());
                if (std::adjacent_find(ie.begin(), ie.end()) != ie.end()) return true;  // degenerate
                img_edges.insert(ie);
            }
            bool member = false;
            for (const auto& b2 : bounds)
                if (isomorphic(img_edges, b2, nclasses)) {
                    member = true;
                    break;
                }
            if (!member)
                throw std::invalid_argument(
                    "universe: bounds not closed under homomorphic images");
            return true;
        });
    }
}

UniverseSpec UniverseSpec::hypergraph(int k) {
    UniverseSpec u;
    u.name = "hypergraph" + std::to_string(k);
    u.k = k;
    return u;
}

UniverseSpec UniverseSpec::graph() {
    UniverseSpec u = hypergraph(2);
    u.name = "graph";
    return u;
}

UniverseSpec UniverseSpec::k3free() {
    UniverseSpec u;
    u.name = "k3free";
    u.k = 2;
    ForbiddenStructure triangle;
    triangle.size = 3;
    triangle.edges = {{0, 1}, {0, 2}, {1, 2}};
    u.bounds.push_back(triangle);
    return u;
}

UniverseSpec UniverseSpec::builtin(const std::string& name) {
    if (name == "graph") return graph();
    if (name == "k3free") return k3free();
    if (name.rfind("hypergraph", 0) == 0) {
        int k = std::stoi(name.substr(10));
        return hypergraph(k);
    }
    throw std::invalid_argument("unknown builtin universe: " + name);
}

UniverseSpec UniverseSpec::parse(std::istream& in) {
    UniverseSpec u;
    std::string line;
    bool header_seen = false;
    ForbiddenStructure cur;
    bool in_bound = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok) || tok[0] == '#') continue;
        if (tok == "universe") {
            ls >> u.name;
            std::string kv;
            ls >> kv;
            if (kv.rfind("k=", 0) != 0) throw std::invalid_argument("universe header: expected k=<int>");
            u.k = std::stoi(kv.substr(2));
            header_seen = true;
        } else if (tok == "bound") {
            if (in_bound) throw std::invalid_argument("nested bound block");
            cur = ForbiddenStructure{};
            ls >> cur.size;
            in_bound = true;
        } else if (tok == "end") {
            if (!in_bound) throw std::invalid_argument("stray end");
            u.bounds.push_back(cur);
            in_bound = false;
        } else if (tok.rfind("E(", 0) == 0) {
            if (!in_bound) throw std::invalid_argument("edge atom outside bound block");
            std::string rest = tok.substr(2) + " ";
            std::string more;
            while (ls >> more) rest += more + " ";
            std::vector<int> pts;
            std::string num;
            for (char c : rest) {
                if (c == ')' || c == ' ' || c == ',') {
                    if (!num.empty()) {
                        pts.push_back(std::stoi(num));
                        num.clear();
                    }
                } else {
                    num += c;
                }
            }
            std::sort(pts.begin(), pts.end());
            cur.edges.push_back(pts);
        } else {
            throw std::invalid_argument("universe parse: unexpected token " + tok);
        }
    }
    if (!header_seen) throw std::invalid_argument("universe parse: missing header");
    if (in_bound) throw std::invalid_argument("universe parse: unterminated bound block");
    u.validate();
    return u;
}

UniverseSpec UniverseSpec::parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

std::string UniverseSpec::to_text() const {
    std::ostringstream os;
    os << "universe " << name << " k=" << k << "\n";
    for (const auto& b : bounds) {
        os << "bound " << b.size << "\n";
        for (const auto& e : b.edges) {
            os << "E(";
            for (std::size_t i = 0; i < e.size(); ++i) {
                if (i) os << " ";
                os << e[i];
            }
            os << ")\n";
        }
        os << "end\n";
    }
    return os.str();
}

bool realizable(const Fragment& f, const UniverseSpec& u) {
    if (f.k != u.k) throw std::invalid_argument("realizable: fragment arity mismatch");
    auto edges = fragment_true_edges(f);
    for (const auto& b : u.bounds)
        if (bound_homs_into(b, f.n, edges)) return false;
    return true;
}

bool realizable(const OrbitDescriptor& o, const UniverseSpec& u) {
    int c = o.pattern.num_classes();
    Fragment f = Fragment::empty(u.k, c, Tri::False);
    if (c >= u.k) {
        auto subsets = comb::ksubsets(c, u.k);
        for (std::size_t i = 0; i < subsets.size(); ++i)
            f.flags[i] = o.flags.at(i) ? Tri::True : Tri::False;
    }
    return realizable(f, u);
}

std::vector<OrbitDescriptor> enumerate_orbits(const UniverseSpec& u, int m, bool injective_only) {
    if (m < 1) throw std::invalid_argument("enumerate_orbits: m must be >= 1");
    std::vector<OrbitDescriptor> out;
    auto emit_for_pattern = [&](const Pattern& p) {
        int c = p.num_classes();
        OrbitDescriptor o;
        o.k = u.k;
        o.pattern = p;
        if (c < u.k) {
            out.push_back(o);
            return;
        }
        std::size_t nflags = static_cast<std::size_t>(comb::binom(c, u.k));
        if (nflags > 24) throw std::invalid_argument("enumerate_orbits: too many flags to enumerate");
        o.flags.assign(nflags, 0);
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nflags); ++mask) {
            for (std::size_t i = 0; i < nflags; ++i) o.flags[i] = (mask >> i) & 1 ? 1 : 0;
            if (realizable(o, u)) out.push_back(o);
        }
    };
    if (injective_only) {
        emit_for_pattern(Pattern::discrete(m));
    } else {
        comb::for_each_partition(m, [&](const std::vector<int>& class_of, int) {
            Pattern p;
            p.class_of = class_of;
            emit_for_pattern(p);
            return true;
        });
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace orbitcsp
