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

#pragma once

#include "hospcast/forecast/design.hpp"
#include "hospcast/forecast/samples.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hospcast::forecast {

/// Both paths produce bit-identical output: each draw index has its own
/// random stream, so thread scheduling does not matter.
enum class Execution { parallel, serial };

/// Per draw: one coefficient vector per model (shared by its trusts), mean
/// trajectories exp(rows * beta), then one negative-binomial draw per cell
/// with the model's theta. theta = +inf disables noise (rounded mean).
ForecastSamples simulate_trust_forecast(const std::string& model, const std::vector<RegionDesign>& designs, int n,
                                        std::uint64_t seed, Execution execution = Execution::parallel);

/// Per draw: sum trust mean trajectories of each region, then one
/// negative-binomial draw with the region's theta.
ForecastSamples aggregate_to_region(const ForecastSamples& trust_samples, const Hierarchy& hierarchy,
                                    const std::map<RegionId, double>& region_theta,
                                    Execution execution = Execution::parallel);

/// Convenience: designs -> trust and region samples in one object.
ForecastSamples simulate_forecast(const std::string& model, const std::vector<RegionDesign>& designs,
                                  const Hierarchy& hierarchy, int n, std::uint64_t seed,
                                  Execution execution = Execution::parallel);

} // namespace hospcast::forecast
