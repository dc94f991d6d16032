#ifndef ORBITCSP_FORMATS_HPP
#define ORBITCSP_FORMATS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "orbitcsp/minimality.hpp"
#include "orbitcsp/pp.hpp"
#include "orbitcsp/solver.hpp"

namespace orbitcsp {

/// `[0,1,2|01]`: equality pattern labels, then one flag bit per k-subset.
OrbitDescriptor parse_orbit(const std::string& text, int k);
/// `{[0,1|];[0,1,2|1]}`, possibly empty `{}`.
Relation parse_relation(const std::string& text, int arity, int k);

/// `pp <name> free(x,...) := R(x,y) & x = y & x != z & exists(w,...)`.
/// `true` stands for the empty conjunction. Stores the name when asked.
PPFormula parse_pp(const std::string& text, std::string* name = nullptr);

/// Instance files: `var x y z`, then `constraint (x,y) allow E`,
/// `constraint (x,y) allow { [0,1|] }`, or `constraint (x,y) neq`, then an
/// optional stamp `minimal <k> <ell>`. Instance::to_text parses back exactly.
Instance parse_instance(std::istream& in, const Template& tmpl);
Instance parse_instance_text(const std::string& text, const Template& tmpl);

/// Template files: a universe block (universe.hpp syntax) followed by
/// `relation <name> <arity> {orbits}` lines.
std::string template_to_text(const Template& t);
Template parse_template(std::istream& in);
Template parse_template_text(const std::string& text);

/// Fragment files: `fragment k=<k> n=<n>` plus one `E(p1 .. pk)` line per
/// true flag; everything else is false (total witnesses only).
std::string fragment_to_text(const Fragment& f);
Fragment parse_fragment_text(const std::string& text);

/// Witness files: the variable -> class map followed by the quotient
/// fragment.
std::string solution_to_text(const Solution& sol, const std::vector<std::string>& vars);

/// Seeded random instance: nvars variables v0.., each constraint a random
/// injective scope of arity 2..k with a random nonempty allowed orbit set.
Instance gen_instance(std::uint64_t seed, const UniverseSpec& u, int nvars, int nconstraints);

/// Seeded random template: the plain relations plus nrels random orbit
/// unions named G0.. of arity k or k+1.
Template gen_template(std::uint64_t seed, const UniverseSpec& u, int nrels);

}  // namespace orbitcsp

#endif
