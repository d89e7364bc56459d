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

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hospcast::forecast {

enum class GeographyLevel { trust, region, national };

const char* to_string(GeographyLevel level);
GeographyLevel parse_geography_level(const std::string& text);

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Draws for one geography: rows are target dates, columns draw indices.
struct GeographySamples {
    std::string id;
    GeographyLevel level = GeographyLevel::trust;
    Eigen::MatrixXd means;
    CountMatrix samples;
};

struct ForecastSamples {
    std::string model;
    /// First predicted day.
    Date forecast_date;
    std::vector<Date> dates;
    int n = 0;
    std::uint64_t seed = 0;
    /// Set on national sums; scoring refuses these.
    bool uncalibrated = false;
    std::vector<GeographySamples> geographies;

    const GeographySamples& get(const std::string& id) const;
    const GeographySamples* find(const std::string& id) const;
};

/// The 23 default levels 0.01, 0.025, 0.05, 0.10, ..., 0.90, 0.95, 0.975, 0.99.
std::vector<double> default_quantile_levels();

struct QuantileCell {
    std::string geography_id;
    GeographyLevel level = GeographyLevel::trust;
    Date target_date;
    /// One value per QuantileForecast::levels entry.
    std::vector<double> values;
    double mean = 0.0;
    bool uncalibrated = false;
};

struct QuantileForecast {
    std::string model;
    Date forecast_date;
    std::vector<double> levels;
    std::vector<QuantileCell> cells;

    /// Index of `level` in levels (exact match within 1e-12).
    std::size_t level_index(double level) const;
    double median(const QuantileCell& cell) const { return cell.values[level_index(0.5)]; }
    /// (level, id, date) -> cell index.
    std::map<std::tuple<GeographyLevel, std::string, Date>, std::size_t> index() const;
};

/// Sample quantile with linear interpolation between order statistics
/// (h = (n-1)p on the sorted sample).
double sample_quantile(std::vector<double> sorted_values, double p);

/// Empirical quantiles at `levels` (sorted, must contain 0.5) for every
/// geography and date; n >= 100 required.
QuantileForecast to_quantiles(const ForecastSamples& samples, const std::vector<double>& levels = default_quantile_levels());

/// Per-draw sum across the given region-level samples; flagged uncalibrated.
ForecastSamples national_sum(const ForecastSamples& regional, const std::string& national_id = "national");

} // namespace hospcast::forecast
