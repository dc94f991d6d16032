#include "orbitcsp/orbit.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include "orbitcsp/comb.hpp"

namespace orbitcsp {

int Pattern::num_classes() const {
    int mx = -1;
    for (int c : class_of) mx = std::max(mx, c);
    return mx + 1;
}

Pattern Pattern::discrete(int m) {
    Pattern p;
    p.class_of.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) p.class_of[static_cast<std::size_t>(i)] = i;
    return p;
}

Pattern Pattern::from_labels(std::span<const int> labels) {
    Pattern p;
    p.class_of.reserve(labels.size());
    std::map<int, int> remap;
    for (int l : labels) {
        auto it = remap.find(l);
        if (it == remap.end()) it = remap.emplace(l, static_cast<int>(remap.size())).first;
        p.class_of.push_back(it->second);
    }
    return p;
}

bool OrbitDescriptor::flag(const std::vector<int>& class_subset) const {
    if (flags.empty()) throw std::logic_error("descriptor has no flags");
    std::size_t r = comb::subset_rank(class_subset, pattern.num_classes());
    return flags.at(r) != 0;
}

std::string OrbitDescriptor::to_string() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < pattern.class_of.size(); ++i) {
        if (i) os << ",";
        os << pattern.class_of[i];
    }
    os << "|";
    for (std::uint8_t f : flags) os << (f ? '1' : '0');
    os << "]";
    return os.str();
}

OrbitDescriptor proj_orbit(const OrbitDescriptor& o, std::span<const int> positions) {
    for (int p : positions)
        if (p < 0 || p >= o.arity()) throw std::out_of_range("proj_orbit: index out of range");

    std::vector<int> labels;
    labels.reserve(positions.size());
    for (int p : positions) labels.push_back(o.pattern.class_of[static_cast<std::size_t>(p)]);

    OrbitDescriptor r;
    r.k = o.k;
    r.pattern = Pattern::from_labels(labels);
    int c = r.pattern.num_classes();
    if (c >= o.k && o.has_flags()) {
        // new class id -> old class id
        std::vector<int> old_of(static_cast<std::size_t>(c), -1);
        for (std::size_t i = 0; i < labels.size(); ++i)
            old_of[static_cast<std::size_t>(r.pattern.class_of[i])] = labels[i];
        auto subsets = comb::ksubsets(c, o.k);
        r.flags.resize(subsets.size());
        for (std::size_t si = 0; si < subsets.size(); ++si) {
            std::vector<int> olds;
            olds.reserve(static_cast<std::size_t>(o.k));
            for (int nc : subsets[si]) olds.push_back(old_of[static_cast<std::size_t>(nc)]);
            std::sort(olds.begin(), olds.end());
            r.flags[si] = o.flag(olds) ? 1 : 0;
        }
    }
    return r;
}

Fragment Fragment::empty(int k, int n, Tri fill) {
    Fragment f;
    f.k = k;
    f.n = n;
    if (n >= k) f.flags.assign(static_cast<std::size_t>(comb::binom(n, k)), fill);
    return f;
}

bool Fragment::total() const {
    return std::none_of(flags.begin(), flags.end(), [](Tri t) { return t == Tri::Undecided; });
}

Tri Fragment::flag(const std::vector<int>& subset) const {
    return flags.at(comb::subset_rank(subset, n));
}

void Fragment::set_flag(const std::vector<int>& subset, Tri value) {
    flags.at(comb::subset_rank(subset, n)) = value;
}

std::vector<std::vector<int>> Fragment::true_edges() const {
    std::vector<std::vector<int>> out;
    auto subsets = comb::ksubsets(n, k);
    for (std::size_t i = 0; i < subsets.size(); ++i)
        if (flags[i] == Tri::True) out.push_back(subsets[i]);
    return out;
}

OrbitDescriptor orbit_of(const Fragment& f, std::span<const int> t) {
    for (int p : t)
        if (p < 0 || p >= f.n) throw std::invalid_argument("orbit_of: unknown point");

    OrbitDescriptor o;
    o.k = f.k;
    o.pattern = Pattern::from_labels(t);
    int c = o.pattern.num_classes();
    if (c >= f.k) {
        // new class id -> point
        std::vector<int> point_of(static_cast<std::size_t>(c));
        for (std::size_t i = 0; i < t.size(); ++i)
            point_of[static_cast<std::size_t>(o.pattern.class_of[i])] = t[i];
        auto subsets = comb::ksubsets(c, f.k);
        o.flags.resize(subsets.size());
        for (std::size_t si = 0; si < subsets.size(); ++si) {
            std::vector<int> pts;
            pts.reserve(static_cast<std::size_t>(f.k));
            for (int nc : subsets[si]) pts.push_back(point_of[static_cast<std::size_t>(nc)]);
            std::sort(pts.begin(), pts.end());
            Tri v = f.flag(pts);
            if (v == Tri::Undecided) throw std::logic_error("orbit_of: fragment partial on scope");
            o.flags[si] = (v == Tri::True) ? 1 : 0;
        }
    }
    return o;
}

}  // namespace orbitcsp
