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

#include "hospcast/forecast/samples.hpp"

#include <filesystem>
#include <string_view>
#include <vector>

namespace hospcast::forecast {

extern const std::vector<std::string_view> forecasts_header;

/// forecasts.csv: one row per quantile level plus a "mean" row per cell.
/// National cells are written with geography_level "national" and read back
/// as uncalibrated.
void write_forecasts(const std::filesystem::path& path, const std::vector<QuantileForecast>& forecasts);
std::vector<QuantileForecast> load_forecasts(const std::filesystem::path& path);
std::vector<QuantileForecast> parse_forecasts(std::string_view text);

} // namespace hospcast::forecast
