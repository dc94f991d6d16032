#include "orbitcsp/relation.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace orbitcsp {

Relation Relation::from_orbits(int arity, std::vector<OrbitDescriptor> orbits,
                               std::optional<std::string> name) {
    for (const auto& o : orbits)
        if (o.arity() != arity) throw std::invalid_argument("relation: orbit arity mismatch");
    std::sort(orbits.begin(), orbits.end());
    orbits.erase(std::unique(orbits.begin(), orbits.end()), orbits.end());
    Relation r;
    r.arity = arity;
    r.orbits = std::move(orbits);
    r.name = std::move(name);
    return r;
}

bool Relation::contains(const OrbitDescriptor& o) const {
    return std::binary_search(orbits.begin(), orbits.end(), o);
}

bool Relation::injective() const {
    return std::all_of(orbits.begin(), orbits.end(),
                       [](const OrbitDescriptor& o) { return o.pattern.is_discrete(); });
}

bool Relation::subset_of(const Relation& other) const {
    return std::includes(other.orbits.begin(), other.orbits.end(), orbits.begin(), orbits.end());
}

bool Relation::proper_subset_of(const Relation& other) const {
    return orbits.size() < other.orbits.size() && subset_of(other);
}

bool Relation::same_orbits(const Relation& other) const {
    return arity == other.arity && orbits == other.orbits;
}

std::string Relation::to_string() const {
    std::ostringstream os;
    os << "{";
    for (std::size_t i = 0; i < orbits.size(); ++i) {
        if (i) os << ";";
        os << orbits[i].to_string();
    }
    os << "}";
    return os.str();
}

bool operator==(const Relation& a, const Relation& b) { return a.same_orbits(b); }

bool operator<(const Relation& a, const Relation& b) {
    if (a.arity != b.arity) return a.arity < b.arity;
    return a.orbits < b.orbits;
}

static void require_same_arity(const Relation& r, const Relation& s) {
    if (r.arity != s.arity) throw std::invalid_argument("relation op: arity mismatch");
}

Relation rel_union(const Relation& r, const Relation& s) {
    require_same_arity(r, s);
    std::vector<OrbitDescriptor> out;
    std::set_union(r.orbits.begin(), r.orbits.end(), s.orbits.begin(), s.orbits.end(),
                   std::back_inserter(out));
    return Relation::from_orbits(r.arity, std::move(out));
}

Relation rel_intersect(const Relation& r, const Relation& s) {
    require_same_arity(r, s);
    std::vector<OrbitDescriptor> out;
    std::set_intersection(r.orbits.begin(), r.orbits.end(), s.orbits.begin(), s.orbits.end(),
                          std::back_inserter(out));
    return Relation::from_orbits(r.arity, std::move(out));
}

Relation rel_complement(const Relation& r, const UniverseSpec& u, bool injective_only) {
    auto all = enumerate_orbits(u, r.arity, injective_only);
    std::vector<OrbitDescriptor> out;
    for (auto& o : all)
        if (!r.contains(o)) out.push_back(std::move(o));
    return Relation::from_orbits(r.arity, std::move(out));
}

Relation rel_project(const Relation& r, std::span<const int> positions) {
    std::vector<OrbitDescriptor> out;
    out.reserve(r.orbits.size());
    for (const auto& o : r.orbits) out.push_back(proj_orbit(o, positions));
    return Relation::from_orbits(static_cast<int>(positions.size()), std::move(out));
}

Relation rel_restrict_injective(const Relation& r) {
    std::vector<OrbitDescriptor> out;
    for (const auto& o : r.orbits)
        if (o.pattern.is_discrete()) out.push_back(o);
    return Relation::from_orbits(r.arity, std::move(out));
}

Template::Template(UniverseSpec universe) : universe_(std::move(universe)) {
    universe_.validate();
}

void Template::add_relation(const std::string& name, Relation r) {
    for (const auto& o : r.orbits)
        if (!realizable(o, universe_))
            throw std::invalid_argument("template: unrealizable orbit in relation " + name);
    r.name = name;
    std::string key = std::to_string(r.arity) + r.to_string();
    if (relations_.count(name)) throw std::invalid_argument("template: duplicate relation " + name);
    relations_.emplace(name, std::move(r));
    content_names_.emplace(key, name);
    order_.push_back(name);
}

bool Template::has_relation(const std::string& name) const { return relations_.count(name) > 0; }

const Relation& Template::relation(const std::string& name) const {
    auto it = relations_.find(name);
    if (it == relations_.end()) throw std::invalid_argument("template: unknown relation " + name);
    return it->second;
}

std::string Template::ensure_relation(const Relation& r) {
    std::string key = std::to_string(r.arity) + r.to_string();
    auto it = content_names_.find(key);
    if (it != content_names_.end()) return it->second;
    std::string name = "_R" + std::to_string(content_names_.size());
    add_relation(name, r);
    return name;
}

Template Template::plain(UniverseSpec universe) {
    Template t(std::move(universe));
    const auto& u = t.universe();
    auto inj = enumerate_orbits(u, u.k, /*injective_only=*/true);
    // flags of an injective k-orbit: exactly one flag
    std::vector<OrbitDescriptor> edge, nonedge;
    for (auto& o : inj) (o.flags.at(0) ? edge : nonedge).push_back(o);
    t.add_relation("E", Relation::from_orbits(u.k, std::move(edge)));
    if (!nonedge.empty()) t.add_relation("N", Relation::from_orbits(u.k, std::move(nonedge)));
    OrbitDescriptor eq;
    eq.k = u.k;
    eq.pattern = Pattern::from_labels(std::vector<int>{0, 0});
    OrbitDescriptor neq;
    neq.k = u.k;
    neq.pattern = Pattern::discrete(2);
    if (u.k == 2) {
        // arity-2 orbits carry a flag at k=2; expand over realizable ones
        t.add_relation("EQ", Relation::from_orbits(2, {eq}));
        auto all2 = enumerate_orbits(u, 2, /*injective_only=*/true);
        t.add_relation("NEQ", Relation::from_orbits(2, std::move(all2)));
    } else {
        t.add_relation("EQ", Relation::from_orbits(2, {eq}));
        t.add_relation("NEQ", Relation::from_orbits(2, {neq}));
    }
    return t;
}

}  // namespace orbitcsp
