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

#include "hospcast/core/domain.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string_view>

namespace hospcast::io {

/// admissions.csv: date,trust_id,region_id,admissions
/// Rejects date gaps, negative counts, unknown or inconsistent regions and
/// trusts whose spans differ. Errors carry the offending line number.
AdmissionData load_admissions(const std::filesystem::path& path,
                              const std::optional<std::set<RegionId>>& known_regions = std::nullopt);
AdmissionData parse_admissions(std::string_view text,
                               const std::optional<std::set<RegionId>>& known_regions = std::nullopt);
void write_admissions(const std::filesystem::path& path, const AdmissionData& data);

/// indicators.csv: date,geography_id,indicator_id,value
/// Gaps of up to three days are filled by linear interpolation; longer gaps are rejected.
IndicatorPanel load_indicators(const std::filesystem::path& path);
IndicatorPanel parse_indicators(std::string_view text);
void write_indicators(const std::filesystem::path& path, const IndicatorPanel& panel);

/// catchment.csv: ltla_id,trust_id,weight,ltla_population
CatchmentMap load_catchment(const std::filesystem::path& path);
CatchmentMap parse_catchment(std::string_view text);
void write_catchment(const std::filesystem::path& path, const CatchmentMap& map);

/// phases.csv: wave_name,phase,start_date,end_date
void write_phases(const std::filesystem::path& path, const std::vector<WaveWindow>& windows);
std::vector<WaveWindow> load_phases(const std::filesystem::path& path);

constexpr int max_interpolated_gap_days = 3;

} // namespace hospcast::io
