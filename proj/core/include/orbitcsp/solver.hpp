#ifndef ORBITCSP_SOLVER_HPP
#define ORBITCSP_SOLVER_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orbitcsp/implication.hpp"
#include "orbitcsp/minimality.hpp"

namespace orbitcsp {

/// A solution witness: the quotient of the variables by the assignment's
/// equalities, as a total fragment, plus the variable -> point map.
struct Solution {
    Fragment fragment;
    std::vector<int> class_of;  // per instance variable, in variable order

    auto operator<=>(const Solution&) const = default;
};

/// Independent re-verification: the fragment is total and realizable and
/// every constraint admits its induced labeling.
bool solution_satisfies(const Instance& inst, const UniverseSpec& u, const Solution& sol);

/// Exhaustive search over variable identifications and flags; exact.
/// Throws std::invalid_argument when |V| exceeds the cap.
std::optional<Solution> brute_force_solve(const Instance& inst, const UniverseSpec& u,
                                          int size_cap = 6);

/// All solutions, canonically sorted (the oracle for solution-set equality).
std::vector<Solution> brute_force_all(const Instance& inst, const UniverseSpec& u,
                                      int size_cap = 6);

struct PruneResult {
    Instance instance;
    bool falsification = false;  // trivialization or invariant violation
    std::string detail;
    std::vector<std::string> trace;  // one replayable line per round
    int rounds = 0;
};

/// Sink-pruning rounds: restrict the injective implication graph to vertices
/// matching a current injective k-tuple projection, intersect the covering
/// constraints with the deterministic least sink's F, re-minimalize, repeat
/// until the restriction is empty. Requires an acyclic graph and a stamped
/// nontrivial instance (throws std::invalid_argument otherwise).
PruneResult prune_sinks(const Instance& inst, const Template& tmpl, const ImplicationGraph& g,
                        const UniverseSpec& u);

struct OneOrbitResult {
    std::optional<Solution> solution;
    bool falsification = false;  // bound embedding or constraint violation
    std::string detail;
};

/// Solution extraction for instances whose k-tuple projections are all
/// single orbits: quotient by constant-pair projections, read the fragment
/// off the projections, check realizability, re-verify every constraint.
/// Throws std::invalid_argument when a projection has several orbits or the
/// stamp is missing.
OneOrbitResult one_orbit_solve(const Instance& inst, const UniverseSpec& u);

enum class Verdict { Solved, Unsat, Inconclusive };

struct SolveConfig {
    int ell = 0;  // 0: the universe default max(k+1, b_B)
    SearchBounds bounds;
    EvalConfig eval;
};

struct SolveResult {
    Verdict verdict = Verdict::Inconclusive;
    std::optional<Solution> solution;            // over the injectivized variables
    std::map<std::string, std::string> rep;      // original variable -> representative
    std::optional<Solution> original_solution;   // pulled back to the input variables
    std::string reason;
    std::vector<std::string> trace;
    bool falsification = false;
};

/// Full pipeline: minimalize (trivial => UNSAT), injectivize + re-minimalize,
/// build the bounded injective implication graph, prune sinks, extract the
/// one-orbit solution. Anything the bounded search cannot certify (cycle,
/// truncation, leftover multi-orbit projections, falsification events) is
/// INCONCLUSIVE with a reason, never a guess.
SolveResult solve(const Instance& inst, Template& tmpl, const SolveConfig& cfg = {});

std::string to_string(Verdict v);

}  // namespace orbitcsp

#endif
