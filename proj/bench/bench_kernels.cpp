/*
* Copyright (C) 2026 The hospcast authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/

// Parallel vs serial sampling kernels on a fitted HGAM (16 trusts, 21 days).

#include "hospcast/forecast/kernels.hpp"
#include "hospcast/models/univariate.hpp"
#include "hospcast/synth.hpp"

#include <benchmark/benchmark.h>

using namespace hospcast;

namespace {

struct Fixture {
    Hierarchy hierarchy;
    std::vector<forecast::RegionDesign> designs;
};

const Fixture& fixture()
{
    static const Fixture f = [] {
        const auto data = synth::generate(synth::bundled_scenario("ba45-like"));
        const Date origin = data.admissions.start() + 112;
        const auto train = data.admissions.window(data.admissions.start(), origin - 1);
        const auto fit = models::fit_univariate(train, {});
        std::vector<Date> dates;
        for (int d = 0; d < 21; ++d) dates.push_back(origin + d);
        return Fixture{train.hierarchy(), models::forecast_designs(fit, dates)};
    }();
    return f;
}

void simulate(benchmark::State& state, forecast::Execution execution)
{
    const auto& f = fixture();
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(forecast::simulate_forecast("hgam", f.designs, f.hierarchy, n, 7, execution));
    }
    state.SetItemsProcessed(state.iterations() * n);
}

void BM_SimulateParallel(benchmark::State& state) { simulate(state, forecast::Execution::parallel); }
void BM_SimulateSerial(benchmark::State& state) { simulate(state, forecast::Execution::serial); }

} // namespace

BENCHMARK(BM_SimulateParallel)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SimulateSerial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
