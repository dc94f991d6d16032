#include "orbitcsp/formats.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "orbitcsp/comb.hpp"
#include "orbitcsp/rng.hpp"

namespace orbitcsp {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

/// Comma-separated names inside the parentheses of "head(...)"; returns the
/// rest after the closing paren.
std::vector<std::string> paren_list(const std::string& s, std::size_t* end = nullptr) {
    std::size_t open = s.find('(');
    std::size_t close = s.find(')', open);
    if (open == std::string::npos || close == std::string::npos)
        throw std::invalid_argument("parse: expected a parenthesized list in '" + s + "'");
    std::vector<std::string> out;
    for (const auto& piece : split(s.substr(open + 1, close - open - 1), ',')) {
        std::string t = trim(piece);
        if (!t.empty()) out.push_back(t);
    }
    if (end) *end = close + 1;
    return out;
}

}  // namespace

OrbitDescriptor parse_orbit(const std::string& text, int k) {
    std::string s = trim(text);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        throw std::invalid_argument("parse_orbit: expected [labels|flags], got '" + text + "'");
    s = s.substr(1, s.size() - 2);
    std::size_t bar = s.find('|');
    if (bar == std::string::npos) throw std::invalid_argument("parse_orbit: missing '|'");
    std::vector<int> labels;
    for (const auto& piece : split(s.substr(0, bar), ','))
        labels.push_back(std::stoi(trim(piece)));
    OrbitDescriptor o;
    o.k = k;
    o.pattern = Pattern::from_labels(labels);
    for (char c : s.substr(bar + 1)) {
        if (c != '0' && c != '1') throw std::invalid_argument("parse_orbit: bad flag bit");
        o.flags.push_back(c == '1');
    }
    int nc = o.pattern.num_classes();
    std::size_t want = nc >= k ? static_cast<std::size_t>(comb::binom(nc, k)) : 0;
    if (o.flags.size() != want) throw std::invalid_argument("parse_orbit: flag count mismatch");
    return o;
}

Relation parse_relation(const std::string& text, int arity, int k) {
    std::string s = trim(text);
    if (s.size() < 2 || s.front() != '{' || s.back() != '}')
        throw std::invalid_argument("parse_relation: expected {..}, got '" + text + "'");
    s = trim(s.substr(1, s.size() - 2));
    std::vector<OrbitDescriptor> os;
    if (!s.empty())
        for (const auto& piece : split(s, ';')) {
            // to_text uses ';', Instance::to_text space-separates: allow both
            for (std::size_t at = 0; at < piece.size();) {
                std::size_t open = piece.find('[', at);
                if (open == std::string::npos) break;
                std::size_t close = piece.find(']', open);
                if (close == std::string::npos)
                    throw std::invalid_argument("parse_relation: unterminated orbit");
                os.push_back(parse_orbit(piece.substr(open, close - open + 1), k));
                at = close + 1;
            }
        }
    for (const auto& o : os)
        if (o.arity() != arity) throw std::invalid_argument("parse_relation: arity mismatch");
    return Relation::from_orbits(arity, std::move(os));
}

PPFormula parse_pp(const std::string& text, std::string* name) {
    std::string s = trim(text);
    if (s.rfind("pp ", 0) != 0) throw std::invalid_argument("parse_pp: expected 'pp <name> ...'");
    s = trim(s.substr(3));
    std::size_t sp = s.find_first_of(" \t");
    if (sp == std::string::npos) throw std::invalid_argument("parse_pp: missing body");
    if (name) *name = s.substr(0, sp);
    s = trim(s.substr(sp));
    if (s.rfind("free", 0) != 0) throw std::invalid_argument("parse_pp: expected free(...)");
    std::size_t after = 0;
    PPFormula f;
    f.free = paren_list(s, &after);
    for (const auto& v : f.free) f.add_var(v);
    s = trim(s.substr(after));
    if (s.rfind(":=", 0) != 0) throw std::invalid_argument("parse_pp: expected ':='");
    s = trim(s.substr(2));
    for (const auto& piece : split(s, '&')) {
        std::string c = trim(piece);
        if (c.empty() || c == "true") continue;
        std::size_t neq = c.find("!=");
        std::size_t eq = c.find('=');
        if (c.rfind("exists", 0) == 0) {
            for (const auto& v : paren_list(c)) f.add_var(v);
        } else if (neq != std::string::npos) {
            std::string x = trim(c.substr(0, neq)), y = trim(c.substr(neq + 2));
            f.add_var(x);
            f.add_var(y);
            f.neqs.emplace_back(x, y);
        } else if (eq != std::string::npos && c.find('(') == std::string::npos) {
            std::string x = trim(c.substr(0, eq)), y = trim(c.substr(eq + 1));
            f.add_var(x);
            f.add_var(y);
            f.eqs.emplace_back(x, y);
        } else {
            std::size_t open = c.find('(');
            if (open == std::string::npos)
                throw std::invalid_argument("parse_pp: bad conjunct '" + c + "'");
            Atom a;
            a.rel = trim(c.substr(0, open));
            a.vars = paren_list(c);
            for (const auto& v : a.vars) f.add_var(v);
            f.atoms.push_back(std::move(a));
        }
    }
    return f;
}

Instance parse_instance(std::istream& in, const Template& tmpl) {
    const UniverseSpec& u = tmpl.universe();
    Instance inst;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head == "var") {
            std::string v;
            while (ls >> v) inst.vars.push_back(v);
        } else if (head == "constraint") {
            std::string rest = trim(line.substr(line.find("constraint") + 10));
            std::size_t after = 0;
            Constraint c;
            c.scope = paren_list(rest, &after);
            std::string body = trim(rest.substr(after));
            int arity = static_cast<int>(c.scope.size());
            if (body == "neq") {
                c.rel = Relation::from_orbits(arity, enumerate_orbits(u, arity, true));
            } else if (body.rfind("allow", 0) == 0) {
                std::string what = trim(body.substr(5));
                if (!what.empty() && what[0] == '{') {
                    c.rel = parse_relation(what, arity, u.k);
                } else {
                    c.rel = tmpl.relation(what);
                    if (c.rel.arity != arity)
                        throw std::invalid_argument("parse_instance: relation " + what +
                                                    " has the wrong arity for " + body);
                }
            } else {
                throw std::invalid_argument("parse_instance: bad constraint body '" + body + "'");
            }
            inst.constraints.push_back(std::move(c));
        } else if (head == "minimal") {
            int k = 0, ell = 0;
            if (!(ls >> k >> ell)) throw std::invalid_argument("parse_instance: bad stamp");
            inst.minimality_level = {k, ell};
        } else {
            throw std::invalid_argument("parse_instance: unexpected line '" + line + "'");
        }
    }
    inst.check(u);
    return inst;
}

Instance parse_instance_text(const std::string& text, const Template& tmpl) {
    std::istringstream in(text);
    return parse_instance(in, tmpl);
}

std::string template_to_text(const Template& t) {
    std::ostringstream os;
    os << t.universe().to_text();
    for (const auto& name : t.names()) {
        const Relation& r = t.relation(name);
        os << "relation " << name << " " << r.arity << " " << r.to_string() << "\n";
    }
    return os.str();
}

Template parse_template(std::istream& in) {
    std::string line;
    std::ostringstream upart;
    std::vector<std::string> rel_lines;
    while (std::getline(in, line)) {
        std::string l = trim(line);
        if (l.empty() || l[0] == '#') continue;
        if (l.rfind("relation ", 0) == 0)
            rel_lines.push_back(l);
        else
            upart << l << "\n";
    }
    Template t{UniverseSpec::parse_text(upart.str())};
    for (const auto& l : rel_lines) {
        std::istringstream ls(l);
        std::string head, name;
        int arity = 0;
        ls >> head >> name >> arity;
        std::string rest;
        std::getline(ls, rest);
        t.add_relation(name, parse_relation(trim(rest), arity, t.universe().k));
    }
    return t;
}

Template parse_template_text(const std::string& text) {
    std::istringstream in(text);
    return parse_template(in);
}

std::string fragment_to_text(const Fragment& f) {
    if (!f.total()) throw std::invalid_argument("fragment_to_text: fragment must be total");
    std::ostringstream os;
    os << "fragment k=" << f.k << " n=" << f.n << "\n";
    for (const auto& e : f.true_edges()) {
        os << "E(";
        for (std::size_t i = 0; i < e.size(); ++i) os << (i ? " " : "") << e[i];
        os << ")\n";
    }
    return os.str();
}

Fragment parse_fragment_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Fragment f;
    bool header = false;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("fragment", 0) == 0) {
            int k = 0, n = 0;
            if (std::sscanf(line.c_str(), "fragment k=%d n=%d", &k, &n) != 2)
                throw std::invalid_argument("parse_fragment: bad header");
            f = Fragment::empty(k, n, Tri::False);
            header = true;
        } else if (line.rfind("E(", 0) == 0) {
            if (!header) throw std::invalid_argument("parse_fragment: edge before header");
            std::size_t close = line.find(')');
            if (close == std::string::npos)
                throw std::invalid_argument("parse_fragment: unterminated edge");
            std::istringstream es(line.substr(2, close - 2));
            std::vector<int> pts;
            int p = 0;
            while (es >> p) pts.push_back(p);
            std::sort(pts.begin(), pts.end());
            if (static_cast<int>(pts.size()) != f.k ||
                std::adjacent_find(pts.begin(), pts.end()) != pts.end() || pts.front() < 0 ||
                pts.back() >= f.n)
                throw std::invalid_argument("parse_fragment: bad edge '" + line + "'");
            f.set_flag(pts, Tri::True);
        } else {
            throw std::invalid_argument("parse_fragment: unexpected line '" + line + "'");
        }
    }
    if (!header) throw std::invalid_argument("parse_fragment: missing header");
    return f;
}

std::string solution_to_text(const Solution& sol, const std::vector<std::string>& vars) {
    if (vars.size() != sol.class_of.size())
        throw std::invalid_argument("solution_to_text: variable count mismatch");
    std::ostringstream os;
    for (std::size_t i = 0; i < vars.size(); ++i)
        os << "class " << vars[i] << " " << sol.class_of[i] << "\n";
    os << fragment_to_text(sol.fragment);
    return os.str();
}

Instance gen_instance(std::uint64_t seed, const UniverseSpec& u, int nvars, int nconstraints) {
    if (nvars < 2) throw std::invalid_argument("gen_instance: need at least 2 variables");
    Rng rng(seed);
    Instance inst;
    for (int i = 0; i < nvars; ++i) inst.vars.push_back("v" + std::to_string(i));
    for (int c = 0; c < nconstraints; ++c) {
        int arity = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(
                            std::max(1, std::min(u.k, nvars) - 1))));
        std::vector<int> idx;
        while (static_cast<int>(idx.size()) < arity) {
            int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(nvars)));
            if (std::find(idx.begin(), idx.end(), v) == idx.end()) idx.push_back(v);
        }
        Constraint con;
        for (int i : idx) con.scope.push_back(inst.vars[static_cast<std::size_t>(i)]);
        auto all = enumerate_orbits(u, arity, false);
        std::vector<OrbitDescriptor> pick;
        while (pick.empty())
            for (const auto& o : all)
                if (rng.coin()) pick.push_back(o);
        con.rel = Relation::from_orbits(arity, std::move(pick));
        inst.constraints.push_back(std::move(con));
    }
    return inst;
}

Template gen_template(std::uint64_t seed, const UniverseSpec& u, int nrels) {
    Rng rng(seed);
    Template t = Template::plain(u);
    for (int r = 0; r < nrels; ++r) {
        int arity = u.k + static_cast<int>(rng.below(2));
        auto all = enumerate_orbits(u, arity, false);
        std::vector<OrbitDescriptor> pick;
        while (pick.empty())
            for (const auto& o : all)
                if (rng.coin()) pick.push_back(o);
        t.add_relation("G" + std::to_string(r), Relation::from_orbits(arity, std::move(pick)));
    }
    return t;
}

}  // namespace orbitcsp
