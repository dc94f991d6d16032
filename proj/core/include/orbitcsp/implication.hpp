#ifndef ORBITCSP_IMPLICATION_HPP
#define ORBITCSP_IMPLICATION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orbitcsp/pp.hpp"

namespace orbitcsp {

using OrbitPair = std::pair<OrbitDescriptor, OrbitDescriptor>;

/// Verification outcome for the five defining items of an implication.
/// violated_item is 1..5 on failure, 0 when ok.
struct CheckReport {
    bool ok = true;
    int violated_item = 0;
    std::string detail;
};

/// A verified (C,u,D,v)-implication (or pre-implication when pre_only):
/// items of the definition are checked by evaluation, never assumed.
struct Implication {
    PPFormula phi;
    std::vector<std::string> u, v;
    Relation C, D;
    Relation C1, D1;               // proj_u(phi), proj_v(phi)
    std::vector<OrbitPair> pairs;  // sorted unique (orbit of f(u), orbit of f(v))
    std::vector<int> I;            // indices i with u[i] in scope(v)
    bool injective = false;        // every satisfying class is injective
    bool pre_only = false;         // items (2)-(5) hold but (1) fails
    bool bsw_assumed = false;      // built using the bounded-strict-width assumption
};

struct ImplCheckResult {
    CheckReport report;
    std::optional<Implication> impl;
};

/// Exact pair set {(orbit of f(u), orbit of f(v)) : f satisfying}.
std::vector<OrbitPair> mapping_pairs(const PPFormula& phi, const std::vector<std::string>& u,
                                     const std::vector<std::string>& v, const Template& tmpl,
                                     const EvalConfig& cfg = {});

/// Relational composition of pair sets (the right-hand side of the
/// composition lemma's equivalence).
std::vector<OrbitPair> compose_pairs(const std::vector<OrbitPair>& a,
                                     const std::vector<OrbitPair>& b);

ImplCheckResult check_implication(const PPFormula& phi, const std::vector<std::string>& u,
                                  const std::vector<std::string>& v, const Relation& C,
                                  const Relation& D, const Template& tmpl,
                                  const EvalConfig& cfg = {});

/// Same, skipping item (1).
ImplCheckResult check_pre_implication(const PPFormula& phi, const std::vector<std::string>& u,
                                      const std::vector<std::string>& v, const Relation& C,
                                      const Relation& D, const Template& tmpl,
                                      const EvalConfig& cfg = {});

/// Composition i1 o i2 along i1.v = i2.u. Requires i1.D == i2.C and
/// i1.D1 == i2.C1 (throws otherwise). The result is re-verified by
/// evaluation; it comes back pre_only when item (1) fails. In injective mode
/// the satisfying set is restricted to injective classes; the validity of
/// that restriction rests on the bounded-strict-width assumption, recorded on
/// the result rather than verified.
struct ComposeResult {
    CheckReport report;
    std::optional<Implication> impl;
};
ComposeResult compose_implications(const Implication& i1, const Implication& i2, Template& tmpl,
                                   bool injective_mode = false, bool bsw_assumed = false,
                                   const EvalConfig& cfg = {});

/// Variable-count and scope properties of a composition of two
/// (C,C)-implications.
struct ImplPropertiesReport {
    int p1 = 0, p2 = 0, p = 0;
    bool prop1 = false;             // p >= max(p1, p2)
    bool prop2 = false;             // the scope-intersection equivalence
    bool prop3_applicable = false;  // i1 == i2 and p == p1
    bool prop3 = false;             // index closure
};
ImplPropertiesReport impl_properties_check(const Implication& i1, const Implication& i2,
                                           Template& tmpl, const EvalConfig& cfg = {});

/// Mapping-pair digraph of a (C,C)-implication with proj_u = proj_v.
struct ImplDigraph {
    std::vector<OrbitDescriptor> verts;  // orbits of E, canonical order
    std::vector<std::vector<int>> adj;   // sorted out-neighbor lists
    Relation E, C;
    std::vector<int> scc_of;
    int num_sccs = 0;
    bool smooth = false;
};
ImplDigraph impl_digraph(const Implication& i);

struct SinkSourceReport {
    bool smooth = false;
    std::vector<int> sink_sccs_in_C;        // scc ids fully inside Vert(C), sinks
    std::vector<int> source_sccs_outside;   // scc ids inside Vert(E \ C), sources
};
SinkSourceReport sinks_sources(const ImplDigraph& g);

/// The completeness conditions: stable variable count under self-composition,
/// identity index tuple, and every SCC of the digraph complete with loops.
bool is_complete(const Implication& i, std::string* why = nullptr);

/// Builds a complete injective (C,C)-implication from a (C,C)-implication
/// with proj_u = proj_v and injective C, by iterated powers: stabilize the
/// variable count, kill the index permutation, then saturate the SCCs (found
/// through boolean matrix powers, then materialized syntactically).
struct CompletizeOptions {
    std::uint64_t power_cap = 0;  // 0: derive |I|! * 2^(2 * #vertices)
};
Implication completize(const Implication& i, Template& tmpl, const EvalConfig& cfg = {},
                       const CompletizeOptions& opts = {});

struct SearchBounds {
    int max_atoms = 2;
    int max_vars = 6;
    int closure_depth = 1;
    std::uint64_t candidate_budget = 200'000;
    int max_c1_orbits = 10;  // skip C-subset enumeration beyond 2^10
};

struct ImplicationGraph {
    struct Arc {
        int from = 0, to = 0;
        Implication witness;
    };
    std::vector<std::pair<Relation, Relation>> vertices;  // (C1, C)
    std::vector<Arc> arcs;
    bool injective_mode = false;
    bool truncated = false;
};

/// Sound bounded under-approximation of the (injective) implication graph:
/// candidate formulas are atom conjunctions within the search bounds, closed
/// under composition to closure_depth; every arc carries a verified witness.
ImplicationGraph build_implication_graph(Template& tmpl, const SearchBounds& bounds,
                                         bool injective_mode, const EvalConfig& cfg = {});

struct SimplicityReport {
    bool simple = true;
    std::vector<int> cycle;  // vertex indices of a directed cycle when not simple
};
SimplicityReport is_implicationally_simple(const ImplicationGraph& g);

struct CriticalCertificate {
    PPFormula phi;
    Relation C, D;
    std::vector<std::string> u, v;
};
std::vector<CriticalCertificate> detect_critical(Template& tmpl, const SearchBounds& bounds,
                                                 const EvalConfig& cfg = {});

struct EqualityImplicationCertificate {
    PPFormula phi;
    Relation T;
    std::vector<std::string> u;  // injective ell-tuple
    std::vector<std::string> v;  // the (x, y) pair
    int ell = 0;
    int nvars = 0;  // ell+1 or ell+2
};
std::vector<EqualityImplicationCertificate> detect_equality_implication(
    Template& tmpl, const SearchBounds& bounds, const EvalConfig& cfg = {});

/// Injective satisfying class agreeing with g on all injective subtuples.
/// Empty result is reported as a falsification event (evidence against the
/// bounded-strict-width assumption), not an error.
struct WitnessResult {
    std::optional<OrbitDescriptor> h;
    bool falsification = false;
    std::string detail;
};
WitnessResult injective_witness(const PPFormula& phi, const OrbitDescriptor& g, Template& tmpl,
                                const EvalConfig& cfg = {});

std::string to_dot(const ImplDigraph& g);
std::string to_dot(const ImplicationGraph& g);

}  // namespace orbitcsp

#endif
