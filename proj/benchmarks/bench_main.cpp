#include <benchmark/benchmark.h>

#include <cfgrid/admittance.hpp>
#include <cfgrid/analysis.hpp>
#include <cfgrid/case_io.hpp>
#include <cfgrid/complex_frequency.hpp>
#include <cfgrid/simulation.hpp>

#include <cmath>

using namespace cfgrid;

namespace {

NetworkCase load(const char* name) { return parse_case(std::string(CFGRID_CASES_DIR) + "/" + name); }

void BM_AssembleAdmittance(benchmark::State& state) {
    auto c = load("mtdc_hybrid.json");
    auto pf = solve_powerflow(c);
    auto blocks = pf.branch_states(c);
    for (auto _ : state) benchmark::DoNotOptimize(assemble_admittance(c, blocks));
}
BENCHMARK(BM_AssembleAdmittance);

void BM_PowerFlowWscc(benchmark::State& state) {
    auto c = load("wscc9.json");
    for (auto _ : state) benchmark::DoNotOptimize(solve_powerflow(c));
}
BENCHMARK(BM_PowerFlowWscc);

void BM_SteadyCoefficientsWscc(benchmark::State& state) {
    auto c = load("wscc9.json");
    auto pf = solve_powerflow(c);
    for (auto _ : state) benchmark::DoNotOptimize(steady_state_coefficients(c, pf));
}
BENCHMARK(BM_SteadyCoefficientsWscc);

void BM_EstimateCf(benchmark::State& state) {
    ComplexSignal s;
    s.dt = 1e-4;
    for (int k = 0; k < state.range(0); ++k) {
        const double t = k * s.dt;
        s.samples.push_back(std::exp(Complex(-2.0 * t, 314.159 * t)) * (1.0 + 0.1 * std::sin(30.0 * t)));
    }
    for (auto _ : state) benchmark::DoNotOptimize(estimate_cf(s));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateCf)->Arg(1000)->Arg(100000);

void BM_SimulateDc(benchmark::State& state) {
    auto c = load("mtdc_dc.json");
    for (auto _ : state) benchmark::DoNotOptimize(simulate(c, 0.1, 1e-4));
}
BENCHMARK(BM_SimulateDc)->Unit(benchmark::kMillisecond);

void BM_SimulateWscc(benchmark::State& state) {
    auto c = load("wscc9.json");
    for (auto _ : state) benchmark::DoNotOptimize(simulate(c, 1.0, 1e-3));
}
BENCHMARK(BM_SimulateWscc)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
