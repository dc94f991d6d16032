#ifndef ORBITCSP_POLYMORPHISM_HPP
#define ORBITCSP_POLYMORPHISM_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "orbitcsp/relation.hpp"

namespace orbitcsp {

/// A partial operation on the points of a finite fragment: a total table
/// S^arity -> points of an output fragment that extends the domain (points
/// 0..|S|-1 keep their identity, fresh points follow). Output flags may stay
/// Undecided until a preservation check needs them.
struct PartialOperation {
    int arity = 0;
    Fragment domain;         // total on its k-subsets
    std::vector<int> table;  // size n^arity, mixed-radix by argument tuple
    Fragment output;

    int points() const { return domain.n; }
    std::size_t index(std::span<const int> args) const;
    int value(std::span<const int> args) const;
    std::string to_text() const;
};

struct PreserveReport {
    bool ok = true;
    /// On failure, the violating matrix: arity-many argument tuples (columns).
    std::vector<std::vector<int>> violation;
    std::string detail;
};

/// Literal preservation check over all matrices of r-tuples drawn from the
/// domain; an Undecided flag needed to place the output tuple counts as a
/// violation (pending decision).
PreserveReport preserves(const PartialOperation& op, const Relation& r, const UniverseSpec& u);

struct NuReport {
    bool ok = true;
    std::string detail;
};

/// Idempotence a = f(a,..,a) and every near-unanimity equation
/// f(a,..,a,b,a,..,a) = a for a != b in the domain. Requires arity >= 3.
NuReport check_local_nu_equations(const PartialOperation& op);

enum class ProbeStatus { Found, NoneComplete, NoneExhausted };

struct ProbeOptions {
    std::uint64_t node_budget = 200'000;
    /// Propagation skips a relation whose matrix count exceeds this cap.
    std::uint64_t matrix_cap = 2'000'000;
};

struct ProbeResult {
    ProbeStatus status = ProbeStatus::NoneExhausted;
    std::optional<PartialOperation> op;
    std::vector<std::string> transcript;
};

/// Backtracking search for a local near-unanimity operation of the given
/// arity on the domain fragment, preserving every template relation.
/// NoneComplete certifies that no such partial operation exists (a local
/// obstruction); NoneExhausted only reports the spent budget. Found results
/// are re-verified by preserves and check_local_nu_equations.
/// Throws std::invalid_argument when arity < 3 or the domain is not total.
ProbeResult find_local_nu(const Template& t, const Fragment& domain, int arity,
                          const ProbeOptions& opts = {});

/// Same search for a binary table injective on domain^2 preserving every
/// template relation.
ProbeResult find_binary_injection(const Template& t, const Fragment& domain,
                                  const ProbeOptions& opts = {});

std::string to_string(ProbeStatus s);

}  // namespace orbitcsp

#endif
