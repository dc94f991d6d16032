#include <benchmark/benchmark.h>

#include "orbitcsp/formats.hpp"
#include "orbitcsp/minimality.hpp"
#include "orbitcsp/polymorphism.hpp"
#include "orbitcsp/pp.hpp"
#include "orbitcsp/solver.hpp"
#include "orbitcsp/universe.hpp"

using namespace orbitcsp;

static void BM_EnumerateOrbits(benchmark::State& state) {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    int m = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_orbits(u, m, true));
}
BENCHMARK(BM_EnumerateOrbits)->Arg(4)->Arg(5);

static void BM_Evaluate(benchmark::State& state) {
    Template t = Template::plain(UniverseSpec::k3free());
    PPFormula f;
    f.vars = {"a", "b", "c", "d", "e"};
    f.atoms = {{"E", {"a", "b"}}, {"E", {"b", "c"}}, {"E", {"c", "d"}}, {"E", {"d", "e"}}};
    f.free = {"a", "e"};
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(f, t));
}
BENCHMARK(BM_Evaluate);

static void BM_KlMinimalize(benchmark::State& state) {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    int nvars = static_cast<int>(state.range(0));
    Instance inst = gen_instance(1, u, nvars, nvars + 2);
    for (auto _ : state) benchmark::DoNotOptimize(kl_minimalize(inst, 3, 4, u));
}
BENCHMARK(BM_KlMinimalize)->Arg(4)->Arg(5)->Arg(6);

static void BM_BruteForceAll(benchmark::State& state) {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    int nvars = static_cast<int>(state.range(0));
    Instance inst = gen_instance(1, u, nvars, nvars + 2);
    for (auto _ : state) benchmark::DoNotOptimize(brute_force_all(inst, u));
}
BENCHMARK(BM_BruteForceAll)->Arg(4)->Arg(5);

static void BM_SolvePipeline(benchmark::State& state) {
    UniverseSpec u = UniverseSpec::hypergraph(3);
    Instance inst = gen_instance(1, u, 4, 3);
    SolveConfig cfg;
    cfg.bounds.max_vars = static_cast<int>(state.range(0));
    for (auto _ : state) {
        Template t = Template::plain(u);
        benchmark::DoNotOptimize(solve(inst, t, cfg));
    }
}
BENCHMARK(BM_SolvePipeline)->Arg(3)->Arg(4);

static void BM_ProbeNu(benchmark::State& state) {
    Template t = Template::plain(UniverseSpec::hypergraph(3));
    Fragment dom = Fragment::empty(3, 3, Tri::False);
    dom.set_flag({0, 1, 2}, Tri::True);
    int arity = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(find_local_nu(t, dom, arity));
}
BENCHMARK(BM_ProbeNu)->Arg(3)->Arg(4);

BENCHMARK_MAIN();
