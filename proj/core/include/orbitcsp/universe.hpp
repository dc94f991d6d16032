#ifndef ORBITCSP_UNIVERSE_HPP
#define ORBITCSP_UNIVERSE_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "orbitcsp/orbit.hpp"

namespace orbitcsp {

/// A forbidden bound: a finite k-uniform hypergraph. Only positive hyperedge
/// atoms appear; the symmetry of the edge relation is structural.
struct ForbiddenStructure {
    int size = 0;
    std::vector<std::vector<int>> edges;  // sorted k-subsets of {0..size-1}

    auto operator<=>(const ForbiddenStructure&) const = default;
};

/// Ground-structure specification: arity of the hypergraph relation plus the
/// finite list of forbidden bounds. validate() checks that the bound list is
/// closed under homomorphic images, which is what makes the bound-homomorphism
/// test below a decision procedure for embeddability (finite duality).
struct UniverseSpec {
    std::string name;
    int k = 0;
    std::vector<ForbiddenStructure> bounds;

    bool theorem_scope() const { return k >= 3; }
    /// Size of the largest forbidden bound; k for degenerate-only bound lists.
    int b_bound() const;
    /// Default consistency level max(k+1, b_B).
    int default_ell() const;

    void validate() const;  // throws std::invalid_argument on bad universes

    static UniverseSpec hypergraph(int k);
    static UniverseSpec graph();
    static UniverseSpec k3free();
    /// Resolves "hypergraph<k>", "graph", "k3free".
    static UniverseSpec builtin(const std::string& name);

    static UniverseSpec parse(std::istream& in);
    static UniverseSpec parse_text(const std::string& text);
    std::string to_text() const;
};

/// Finite duality test: true iff no bound maps homomorphically into the
/// true-flagged edges of the fragment. Undecided flags count as absent edges,
/// so for a partial fragment this decides whether some total completion is
/// realizable (bounds are all-positive).
bool realizable(const Fragment& f, const UniverseSpec& u);
bool realizable(const OrbitDescriptor& o, const UniverseSpec& u);

/// All realizable orbits of m-tuples, in canonical (pattern, flag) order.
std::vector<OrbitDescriptor> enumerate_orbits(const UniverseSpec& u, int m,
                                              bool injective_only = false);

}  // namespace orbitcsp

#endif
