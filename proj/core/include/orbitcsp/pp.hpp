#ifndef ORBITCSP_PP_HPP
#define ORBITCSP_PP_HPP

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "orbitcsp/relation.hpp"

namespace orbitcsp {

struct Atom {
    std::string rel;
    std::vector<std::string> vars;

    auto operator<=>(const Atom&) const = default;
};

/// Primitive positive formula: a conjunction of relation atoms plus =/!=
/// atoms over an ordered variable set; variables outside `free` are
/// existentially quantified.
struct PPFormula {
    std::vector<std::string> vars;
    std::vector<Atom> atoms;
    std::vector<std::pair<std::string, std::string>> eqs;
    std::vector<std::pair<std::string, std::string>> neqs;
    std::vector<std::string> free;

    int var_index(const std::string& name) const;  // -1 if absent
    bool is_free(const std::string& name) const;
    void add_var(const std::string& name);

    /// Structural validity plus arity resolution against a template.
    void check(const Template& tmpl) const;

    std::string to_text(const std::string& name = "phi") const;
};

struct EvalConfig {
    int max_vars = 12;
    std::uint64_t node_budget = 200'000'000;
    int threads = 1;
};

struct EvalCapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The interpretation of a pp-formula projected to its free variables: a set
/// of orbit classes of free-variable labelings, sorted canonically.
struct LabelingSet {
    std::vector<std::string> vars;  // free variable order
    std::vector<OrbitDescriptor> classes;

    bool empty() const { return classes.empty(); }
    Relation as_relation() const;
    /// Projection onto a tuple of free variables (repeats allowed).
    Relation project(std::span<const std::string> tuple) const;
};

/// Exact evaluation by enumerating orbit classes of complete labelings of the
/// variable set, backtracking over per-k-subset flags pruned by atoms and by
/// bound homomorphisms. An orbit-labeled assignment is satisfiable in the
/// ground structure iff it is realizable, so the result is exact.
LabelingSet evaluate(const PPFormula& f, const Template& tmpl, const EvalConfig& cfg = {});

Relation proj_formula(const PPFormula& f, std::span<const std::string> u, const Template& tmpl,
                      const EvalConfig& cfg = {});

/// True iff every satisfying class whose u-projection lies in T has x and y
/// in the same pattern class.
bool entails_equality(const PPFormula& f, const Relation& T, std::span<const std::string> u,
                      const std::string& x, const std::string& y, const Template& tmpl,
                      const EvalConfig& cfg = {});

struct ComposedFormula {
    PPFormula formula;  // conjunction over the merged variable set, all vars free
    std::map<std::string, std::string> rename2;  // second formula's vars -> merged names
};

/// Conjoins f1 and f2 after renaming f2 so that u2 becomes v1 and no other
/// variable is shared. Quantification is left to the caller (restrict `free`).
ComposedFormula conjoin_renamed(const PPFormula& f1, const PPFormula& f2,
                                std::span<const std::string> v1,
                                std::span<const std::string> u2);

/// Composition of implication formulas: rename so u2 = v1, conjoin, and keep
/// scope(u1) and scope(renamed v2) free (everything else quantified).
PPFormula syntactic_compose(const PPFormula& f1, const PPFormula& f2,
                            std::span<const std::string> u1, std::span<const std::string> v1,
                            std::span<const std::string> u2, std::span<const std::string> v2,
                            std::vector<std::string>* v2_renamed = nullptr);

/// Replaces a formula by a single-atom formula over its free variables whose
/// relation is the formula's labeling set, registered in the template. Exact,
/// and keeps downstream evaluations over composed formulas small.
PPFormula flatten(const PPFormula& f, Template& tmpl, const EvalConfig& cfg = {});

}  // namespace orbitcsp

#endif
