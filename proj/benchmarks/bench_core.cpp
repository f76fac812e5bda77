#include <benchmark/benchmark.h>

#include <sbsim/chainmap.hpp>
#include <sbsim/expm.hpp>
#include <sbsim/lindblad.hpp>
#include <sbsim/nonmarkov.hpp>
#include <sbsim/units.hpp>

using namespace sbsim;

namespace {

lindblad::SystemSpec resonant(std::size_t n_max) {
    lindblad::SystemSpec s;
    s.spin.delta_rabi = hz(100e3);
    s.modes.push_back({hz(100e3), hz(100e3), hz(1.25e3), 0.025, n_max});
    return s;
}

spectral::CompositeSpectralDensity paper_density() {
    return {{spectral::make_lorentzian(hz(100e3), hz(1.25e3), hz(100e3))}};
}

}  // namespace

static void BM_BuildLiouvillian(benchmark::State& state) {
    const auto spec = resonant(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(lindblad::build_liouvillian(spec));
}
BENCHMARK(BM_BuildLiouvillian)->Arg(7)->Arg(15)->Arg(31)->Unit(benchmark::kMicrosecond);

// One output step of the resonant trajectory (Δt = 0.1/Δ).
static void BM_ExpmActionStep(benchmark::State& state) {
    const auto spec = resonant(static_cast<std::size_t>(state.range(0)));
    const ExpmAction prop(lindblad::build_liouvillian(spec));
    const auto rho0 = lindblad::product_state(lindblad::spin_projector(lindblad::SpinStateTag::up), spec);
    const Eigen::VectorXcd v = lindblad::vectorize(rho0.matrix());
    const double dt = 0.1 / spec.spin.delta_rabi;
    for (auto _ : state) benchmark::DoNotOptimize(prop.apply(dt, v));
    state.counters["matvecs"] = static_cast<double>(ExpmAction::last_matvecs());
}
BENCHMARK(BM_ExpmActionStep)->Arg(7)->Arg(15)->Arg(31)->Unit(benchmark::kMicrosecond);

static void BM_ReconstructMaps(benchmark::State& state) {
    const auto spec = resonant(15);
    const auto times = lindblad::uniform_grid(20.0 / spec.spin.delta_rabi, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(nonmarkov::reconstruct_maps(spec, times));
}
BENCHMARK(BM_ReconstructMaps)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_ChainCoefficients(benchmark::State& state) {
    const auto j = paper_density();
    const auto measure = chainmap::discretize_measure(j, hz(400e3), static_cast<std::size_t>(state.range(0)),
                                                      chainmap::lorentzian_focus(j));
    for (auto _ : state) benchmark::DoNotOptimize(chainmap::chain_coefficients(measure, 15));
}
BENCHMARK(BM_ChainCoefficients)->Arg(500)->Arg(2000)->Arg(8000)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
