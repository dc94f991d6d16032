#ifndef ORBITCSP_RELATION_HPP
#define ORBITCSP_RELATION_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orbitcsp/universe.hpp"

namespace orbitcsp {

/// A first-order-definable relation over the ground structure, represented
/// exactly as a finite union of orbits of a common arity. The orbit list is
/// kept sorted and duplicate-free.
struct Relation {
    int arity = 0;
    std::vector<OrbitDescriptor> orbits;  // sorted, unique
    std::optional<std::string> name;

    static Relation from_orbits(int arity, std::vector<OrbitDescriptor> orbits,
                                std::optional<std::string> name = std::nullopt);

    bool empty() const { return orbits.empty(); }
    bool contains(const OrbitDescriptor& o) const;
    bool injective() const;  // every member has the discrete pattern
    bool subset_of(const Relation& other) const;
    bool proper_subset_of(const Relation& other) const;

    /// Content-only comparison; names are metadata.
    bool same_orbits(const Relation& other) const;

    std::string to_string() const;
};

bool operator==(const Relation& a, const Relation& b);  // content comparison
bool operator<(const Relation& a, const Relation& b);   // canonical order on (arity, orbits)

Relation rel_union(const Relation& r, const Relation& s);
Relation rel_intersect(const Relation& r, const Relation& s);
/// Complement within the realizable orbits of the same arity.
Relation rel_complement(const Relation& r, const UniverseSpec& u, bool injective_only = false);
Relation rel_project(const Relation& r, std::span<const int> positions);
/// Keeps only discrete-pattern orbits (conjunction with the all-distinct relation).
Relation rel_restrict_injective(const Relation& r);

/// CSP template: a universe plus named relations (unions of orbits). Auto
/// registration assigns deterministic content-derived names to relations that
/// arise during expansion and composition, so repeated runs agree bit-exactly.
class Template {
  public:
    explicit Template(UniverseSpec universe);

    const UniverseSpec& universe() const { return universe_; }

    void add_relation(const std::string& name, Relation r);
    bool has_relation(const std::string& name) const;
    const Relation& relation(const std::string& name) const;  // throws on unknown name
    const std::vector<std::string>& names() const { return order_; }

    /// Registers the relation under a content-derived auto name (or returns
    /// the existing name if the same orbit set is already registered).
    std::string ensure_relation(const Relation& r);

    /// Convenience: the single-orbit relations of a fresh hypergraph template
    /// ("E"/"N" at arity k, plus "EQ"/"NEQ" at arity 2).
    static Template plain(UniverseSpec universe);

  private:
    UniverseSpec universe_;
    std::map<std::string, Relation> relations_;
    std::map<std::string, std::string> content_names_;  // canonical orbit text -> name
    std::vector<std::string> order_;
};

}  // namespace orbitcsp

#endif
