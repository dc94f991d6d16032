#ifndef ORBITCSP_MINIMALITY_HPP
#define ORBITCSP_MINIMALITY_HPP

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orbitcsp/relation.hpp"

namespace orbitcsp {

/// A constraint: an ordered scope of distinct variables plus the admitted
/// scope-labelings as a union of orbits of arity |scope|.
struct Constraint {
    std::vector<std::string> scope;
    Relation rel;
};

struct Instance {
    std::vector<std::string> vars;
    std::vector<Constraint> constraints;
    /// Set once both bullets of the minimality definition hold.
    std::optional<std::pair<int, int>> minimality_level;

    int var_index(const std::string& name) const;  // -1 if absent
    /// Structural validity: distinct vars, scopes within vars, arities match.
    void check(const UniverseSpec& u) const;

    /// Canonical serialization: constraint lines sorted and deduplicated, so
    /// bit-exact comparison is meaningful regardless of internal order.
    std::string to_text() const;
};

/// True iff some constraint admits no labeling.
bool is_trivial(const Instance& inst);

/// Exact projection of a single constraint onto a tuple of its scope
/// variables (repeats allowed).
Relation constraint_proj(const Constraint& c, std::span<const std::string> u);

/// Projection of a stamped k-minimal instance onto a tuple of length <= k.
/// Throws std::logic_error when the instance is not stamped high enough.
Relation proj_instance(const Instance& inst, std::span<const std::string> u);

struct MinimalizeOptions {
    /// Revision-order schedule; the fixpoint is schedule-independent (tested),
    /// the parameter exists to demonstrate that.
    int schedule = 0;
};

/// Equivalence transformation to a (k,ell)-minimal instance: adds a full
/// constraint per nonempty <= ell-subset of the variables (over the expansion
/// by all orbit-union relations), then prunes allowed sets to the greatest
/// fixpoint where all <= k-tuple projections agree across constraints.
/// Solution set preserved; the result may be trivial.
Instance kl_minimalize(const Instance& inst, int k, int ell, const UniverseSpec& u,
                       const MinimalizeOptions& opts = {});

struct MinimalityReport {
    bool ok = true;
    int bullet = 0;  // 1 or 2 on failure
    std::string detail;
};

/// Literal check of both bullets of the minimality definition.
MinimalityReport is_kl_minimal(const Instance& inst, int k, int ell);

struct Injectivized {
    Instance instance;
    std::map<std::string, std::string> rep;  // original variable -> representative
};

/// Identifies u,v whenever proj_(u,v) lies inside the constant pairs, adds a
/// disequality constraint for every remaining pair, and restricts constraints
/// to injective labelings. Every solution of the result induces a solution of
/// the input via rep. Requires a stamped, nontrivial instance; the output is
/// unstamped (minimality must be re-established).
Injectivized injectivize(const Instance& inst, const UniverseSpec& u);

}  // namespace orbitcsp

#endif
