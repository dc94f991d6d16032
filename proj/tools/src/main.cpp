#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "orbitcsp/formats.hpp"
#include "orbitcsp/implication.hpp"
#include "orbitcsp/minimality.hpp"
#include "orbitcsp/polymorphism.hpp"
#include "orbitcsp/solver.hpp"

using namespace orbitcsp;

namespace {

constexpr int kExitError = 3;

struct GlobalOpts {
    std::string universe = "hypergraph3";
    int k = 0;  // overrides the digit in --universe when set
    int ell = 0;
    int max_atoms = 2;
    int max_vars = 6;
    int closure_depth = 1;
    std::uint64_t budget = 200'000;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string template_file;
    std::string out_file;
    std::string trace_file;

    UniverseSpec make_universe() const {
        if (k > 0) return UniverseSpec::hypergraph(k);
        return UniverseSpec::builtin(universe);
    }

    Template make_template() const {
        if (template_file.empty()) return Template::plain(make_universe());
        std::ifstream in(template_file);
        if (!in) throw std::runtime_error("cannot open template file " + template_file);
        return parse_template(in);
    }

    SearchBounds bounds() const {
        SearchBounds b;
        b.max_atoms = max_atoms;
        b.max_vars = max_vars;
        b.closure_depth = closure_depth;
        b.candidate_budget = budget;
        return b;
    }

    EvalConfig eval() const {
        EvalConfig cfg;
        cfg.threads = threads;
        return cfg;
    }
};

void add_global_flags(CLI::App* cmd, GlobalOpts& g) {
    cmd->add_option("--universe", g.universe, "builtin universe: hypergraph<k>, graph, k3free");
    cmd->add_option("--k", g.k, "shortcut for --universe hypergraph<k>");
    cmd->add_option("--ell", g.ell, "consistency level; 0 means max(k+1, b_B)");
    cmd->add_option("--max-atoms", g.max_atoms, "implication search: atoms per candidate");
    cmd->add_option("--max-vars", g.max_vars, "implication search: variables per candidate");
    cmd->add_option("--closure-depth", g.closure_depth, "implication search: composition depth");
    cmd->add_option("--budget", g.budget, "candidate/node budget for bounded searches");
    cmd->add_option("--seed", g.seed, "seed for generator commands");
    cmd->add_option("--threads", g.threads, "worker threads; never changes output");
    cmd->add_option("--template", g.template_file, "template file; default: plain relations");
    cmd->add_option("-o,--out", g.out_file, "write the main output to a file");
    cmd->add_option("--trace", g.trace_file, "write the replayable trace log to a file");
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void emit(const GlobalOpts& g, const std::string& text) {
    if (g.out_file.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(g.out_file);
    if (!out) throw std::runtime_error("cannot write " + g.out_file);
    out << text;
}

void emit_trace(const GlobalOpts& g, const std::vector<std::string>& lines) {
    if (g.trace_file.empty()) return;
    std::ofstream out(g.trace_file);
    if (!out) throw std::runtime_error("cannot write " + g.trace_file);
    for (const auto& l : lines) out << l << "\n";
}

/// Implication spec file: one `pp ...` line, `u ...` and `v ...` tuples, and
/// `C {..}` / `D {..}` relation lines (see docs/formats.md).
struct ImplSpec {
    PPFormula phi;
    std::vector<std::string> u, v;
    Relation C, D;
};

ImplSpec parse_impl_spec(const std::string& text, const Template& tmpl) {
    ImplSpec spec;
    bool have_pp = false, have_c = false, have_d = false;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head) || head[0] == '#') continue;
        if (head == "pp") {
            spec.phi = parse_pp(line);
            have_pp = true;
        } else if (head == "u" || head == "v") {
            auto& t = head == "u" ? spec.u : spec.v;
            std::string w;
            while (ls >> w) t.push_back(w);
        } else if (head == "C" || head == "D") {
            std::string rest;
            std::getline(ls, rest);
            size_t arity = head == "C" ? spec.u.size() : spec.v.size();
            auto& r = head == "C" ? spec.C : spec.D;
            r = parse_relation(rest, static_cast<int>(arity), tmpl.universe().k);
            (head == "C" ? have_c : have_d) = true;
        } else {
            throw std::runtime_error("implication spec: unexpected line '" + line + "'");
        }
    }
    if (!have_pp || spec.u.empty() || spec.v.empty() || !have_c || !have_d)
        throw std::runtime_error("implication spec: needs pp, u, v, C and D lines");
    return spec;
}

std::string impl_to_text(const Implication& i) {
    std::ostringstream os;
    os << i.phi.to_text("phi") << "\n";
    os << "u";
    for (const auto& x : i.u) os << " " << x;
    os << "\nv";
    for (const auto& x : i.v) os << " " << x;
    os << "\nC " << i.C.to_string() << "\nD " << i.D.to_string() << "\n";
    os << "pairs " << i.pairs.size() << "\n";
    for (const auto& [a, b] : i.pairs) os << "  " << a.to_string() << " -> " << b.to_string() << "\n";
    if (i.injective) os << "injective\n";
    if (i.pre_only) os << "pre-only\n";
    if (i.bsw_assumed) os << "bsw-assumed\n";
    return os.str();
}

int cmd_solve(const GlobalOpts& g, const std::string& instance_file) {
    Template tmpl = g.make_template();
    Instance inst = parse_instance_text(slurp(instance_file), tmpl);
    SolveConfig cfg;
    cfg.ell = g.ell;
    cfg.bounds = g.bounds();
    cfg.eval = g.eval();
    SolveResult r = solve(inst, tmpl, cfg);
    emit_trace(g, r.trace);
    std::ostringstream os;
    os << "verdict " << to_string(r.verdict) << "\n";
    if (!r.reason.empty()) os << "reason " << r.reason << "\n";
    if (r.falsification) os << "falsification\n";
    if (r.original_solution) os << solution_to_text(*r.original_solution, inst.vars);
    emit(g, os.str());
    switch (r.verdict) {
        case Verdict::Solved: return 0;
        case Verdict::Unsat: return 1;
        case Verdict::Inconclusive: return 2;
    }
    return kExitError;
}

int cmd_minimalize(const GlobalOpts& g, const std::string& instance_file) {
    Template tmpl = g.make_template();
    const UniverseSpec& u = tmpl.universe();
    Instance inst = parse_instance_text(slurp(instance_file), tmpl);
    int ell = g.ell > 0 ? g.ell : u.default_ell();
    Instance m = kl_minimalize(inst, u.k, ell, u);
    emit(g, m.to_text());
    return is_trivial(m) ? 1 : 0;
}

int cmd_implgraph(const GlobalOpts& g, bool injective) {
    Template tmpl = g.make_template();
    ImplicationGraph graph = build_implication_graph(tmpl, g.bounds(), injective, g.eval());
    emit(g, to_dot(graph));
    return graph.truncated ? 2 : 0;
}

int cmd_checksimple(const GlobalOpts& g, bool injective) {
    Template tmpl = g.make_template();
    ImplicationGraph graph = build_implication_graph(tmpl, g.bounds(), injective, g.eval());
    SimplicityReport rep = is_implicationally_simple(graph);
    std::ostringstream os;
    if (rep.simple) {
        os << "simple (acyclic)\n";
    } else {
        os << "cycle";
        for (int v : rep.cycle) os << " " << v;
        os << "\n";
    }
    if (graph.truncated) os << "truncated\n";
    emit(g, os.str());
    if (!rep.simple) return 2;
    return graph.truncated ? 2 : 0;
}

int cmd_probe_nu(const GlobalOpts& g, const std::string& domain_file, int arity, int points,
                 bool binary_injection) {
    Template tmpl = g.make_template();
    Fragment dom = domain_file.empty()
                       ? Fragment::empty(tmpl.universe().k, points, Tri::False)
                       : parse_fragment_text(slurp(domain_file));
    ProbeOptions opts;
    opts.node_budget = g.budget;
    ProbeResult r = binary_injection ? find_binary_injection(tmpl, dom, opts)
                                     : find_local_nu(tmpl, dom, arity, opts);
    emit_trace(g, r.transcript);
    std::ostringstream os;
    os << "status " << to_string(r.status) << "\n";
    if (r.op) os << r.op->to_text();
    emit(g, os.str());
    return r.status == ProbeStatus::Found ? 0 : 2;
}

int cmd_detect(const GlobalOpts& g, const std::string& kind) {
    Template tmpl = g.make_template();
    std::ostringstream os;
    std::size_t found = 0;
    if (kind == "critical") {
        auto certs = detect_critical(tmpl, g.bounds(), g.eval());
        found = certs.size();
        for (const auto& c : certs) {
            os << c.phi.to_text("phi") << "\n";
            os << "u";
            for (const auto& x : c.u) os << " " << x;
            os << "\nv";
            for (const auto& x : c.v) os << " " << x;
            os << "\nC " << c.C.to_string() << "\nD " << c.D.to_string() << "\n\n";
        }
    } else {
        auto certs = detect_equality_implication(tmpl, g.bounds(), g.eval());
        found = certs.size();
        for (const auto& c : certs) {
            os << c.phi.to_text("phi") << "\n";
            os << "u";
            for (const auto& x : c.u) os << " " << x;
            os << "\nv";
            for (const auto& x : c.v) os << " " << x;
            os << "\nT " << c.T.to_string() << "\nell " << c.ell << "\nnvars " << c.nvars
               << "\n\n";
        }
    }
    os << "certificates " << found << "\n";
    emit(g, os.str());
    return 0;
}

int cmd_compose(const GlobalOpts& g, const std::string& file1, const std::string& file2,
                bool injective) {
    Template tmpl = g.make_template();
    ImplSpec s1 = parse_impl_spec(slurp(file1), tmpl);
    ImplSpec s2 = parse_impl_spec(slurp(file2), tmpl);
    auto c1 = check_implication(s1.phi, s1.u, s1.v, s1.C, s1.D, tmpl, g.eval());
    if (!c1.report.ok) {
        emit(g, "error first implication: " + c1.report.detail + "\n");
        return kExitError;
    }
    auto c2 = check_implication(s2.phi, s2.u, s2.v, s2.C, s2.D, tmpl, g.eval());
    if (!c2.report.ok) {
        emit(g, "error second implication: " + c2.report.detail + "\n");
        return kExitError;
    }
    auto comp = compose_implications(*c1.impl, *c2.impl, tmpl, injective, injective, g.eval());
    if (!comp.impl) {
        emit(g, "error composition: " + comp.report.detail + "\n");
        return kExitError;
    }
    emit(g, impl_to_text(*comp.impl));
    return 0;
}

int cmd_gen(const GlobalOpts& g, const std::string& what, int nvars, int nconstraints,
            int nrels) {
    UniverseSpec u = g.make_universe();
    if (what == "instance") {
        emit(g, gen_instance(g.seed, u, nvars, nconstraints).to_text());
    } else if (what == "template") {
        emit(g, template_to_text(gen_template(g.seed, u, nrels)));
    } else {
        throw std::runtime_error("gen: expected 'instance' or 'template'");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orbit-based CSP toolkit for first-order hypergraph expansions"};
    app.require_subcommand(1);
    GlobalOpts g;

    std::string instance_file, domain_file, impl1, impl2, gen_what, detect_kind;
    int arity = 3, points = 3, nvars = 4, nconstraints = 4, nrels = 1;
    bool injective = false, binary_injection = false;

    auto* solve_cmd = app.add_subcommand("solve", "solve an instance file");
    solve_cmd->add_option("instance", instance_file, "instance file")->required();
    add_global_flags(solve_cmd, g);

    auto* min_cmd = app.add_subcommand("minimalize", "(k,ell)-minimalize an instance file");
    min_cmd->add_option("instance", instance_file, "instance file")->required();
    add_global_flags(min_cmd, g);

    auto* graph_cmd = app.add_subcommand("implgraph", "bounded implication graph as DOT");
    graph_cmd->add_flag("--injective", injective, "injective mode");
    add_global_flags(graph_cmd, g);

    auto* simple_cmd = app.add_subcommand("checksimple", "acyclicity of the implication graph");
    simple_cmd->add_flag("--injective", injective, "injective mode");
    add_global_flags(simple_cmd, g);

    auto* probe_cmd = app.add_subcommand("probe-nu", "search for a local operation");
    probe_cmd->add_option("--domain", domain_file, "domain fragment file");
    probe_cmd->add_option("--points", points, "empty domain on this many points instead");
    probe_cmd->add_option("--arity", arity, "operation arity (>= 3 for near-unanimity)");
    probe_cmd->add_flag("--binary-injection", binary_injection,
                        "search for a binary injection instead");
    add_global_flags(probe_cmd, g);

    auto* detect_cmd = app.add_subcommand("detect", "critical or eq-implication certificates");
    detect_cmd->add_option("kind", detect_kind, "critical | eq-implication")
        ->required()
        ->check(CLI::IsMember({"critical", "eq-implication"}));
    add_global_flags(detect_cmd, g);

    auto* compose_cmd = app.add_subcommand("compose", "compose two verified implications");
    compose_cmd->add_option("first", impl1, "first implication spec file")->required();
    compose_cmd->add_option("second", impl2, "second implication spec file")->required();
    compose_cmd->add_flag("--injective", injective, "injective composition (records bsw)");
    add_global_flags(compose_cmd, g);

    auto* gen_cmd = app.add_subcommand("gen", "seeded random instance or template");
    gen_cmd->add_option("what", gen_what, "instance | template")
        ->required()
        ->check(CLI::IsMember({"instance", "template"}));
    gen_cmd->add_option("--vars", nvars, "variable count");
    gen_cmd->add_option("--constraints", nconstraints, "constraint count");
    gen_cmd->add_option("--rels", nrels, "extra relation count");
    add_global_flags(gen_cmd, g);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve_cmd) return cmd_solve(g, instance_file);
        if (*min_cmd) return cmd_minimalize(g, instance_file);
        if (*graph_cmd) return cmd_implgraph(g, injective);
        if (*simple_cmd) return cmd_checksimple(g, injective);
        if (*probe_cmd) return cmd_probe_nu(g, domain_file, arity, points, binary_injection);
        if (*detect_cmd) return cmd_detect(g, detect_kind);
        if (*compose_cmd) return cmd_compose(g, impl1, impl2, injective);
        if (*gen_cmd) return cmd_gen(g, gen_what, nvars, nconstraints, nrels);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
