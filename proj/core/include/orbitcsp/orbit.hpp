#ifndef ORBITCSP_ORBIT_HPP
#define ORBITCSP_ORBIT_HPP

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace orbitcsp {

/// Equality pattern of a tuple: a partition of positions 0..m-1 stored as a
/// restricted-growth string (class ids numbered by first occurrence).
struct Pattern {
    std::vector<int> class_of;

    int size() const { return static_cast<int>(class_of.size()); }
    int num_classes() const;
    bool is_discrete() const { return num_classes() == size(); }

    static Pattern discrete(int m);
    /// Canonicalizes arbitrary labels into a restricted-growth string.
    static Pattern from_labels(std::span<const int> labels);

    auto operator<=>(const Pattern&) const = default;
};

enum class Tri : std::uint8_t { False = 0, True = 1, Undecided = 2 };

/// Finite name of an orbit of m-tuples: equality pattern plus one boolean
/// hyperedge flag per unordered k-subset of pattern classes (present only when
/// the pattern has at least k classes). Flags are stored in lexicographic
/// k-subset order, which together with the canonical pattern makes descriptor
/// equality structural.
struct OrbitDescriptor {
    Pattern pattern;
    int k = 0;
    std::vector<std::uint8_t> flags;  // binom(num_classes, k) entries when num_classes >= k

    int arity() const { return pattern.size(); }
    bool has_flags() const { return !flags.empty(); }
    bool flag(const std::vector<int>& class_subset) const;  // subset must be sorted

    std::string to_string() const;

    auto operator<=>(const OrbitDescriptor&) const = default;
};

/// Subtuple descriptor; flags are restricted to the surviving classes and
/// dropped entirely when fewer than k classes remain.
OrbitDescriptor proj_orbit(const OrbitDescriptor& o, std::span<const int> positions);

/// Finite labeled structure standing in for an induced substructure of the
/// ground structure: n points with a (possibly partial) flag on every
/// k-subset of points.
struct Fragment {
    int k = 0;
    int n = 0;
    std::vector<Tri> flags;  // lex order over k-subsets of {0..n-1}; empty if n < k

    static Fragment empty(int k, int n, Tri fill = Tri::Undecided);

    bool total() const;
    Tri flag(const std::vector<int>& subset) const;  // sorted k-subset of points
    void set_flag(const std::vector<int>& subset, Tri value);

    /// List of k-subsets currently flagged true.
    std::vector<std::vector<int>> true_edges() const;

    auto operator<=>(const Fragment&) const = default;
};

/// Orbit of the tuple t read off a fragment that is total on scope(t).
/// Throws std::invalid_argument on unknown points, std::logic_error when the
/// fragment is undecided on a needed k-subset.
OrbitDescriptor orbit_of(const Fragment& f, std::span<const int> t);

}  // namespace orbitcsp

#endif
