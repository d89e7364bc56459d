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

#include "hospcast/forecast/samples.hpp"

#include "hospcast/core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hospcast::forecast {

const char* to_string(GeographyLevel level)
{
    switch (level) {
    case GeographyLevel::trust: return "trust";
    case GeographyLevel::region: return "region";
    case GeographyLevel::national: return "national";
    }
    return "?";
}

GeographyLevel parse_geography_level(const std::string& text)
{
    if (text == "trust") return GeographyLevel::trust;
    if (text == "region") return GeographyLevel::region;
    if (text == "national") return GeographyLevel::national;
    throw ValidationError("unknown geography level '" + text + "'");
}

const GeographySamples* ForecastSamples::find(const std::string& id) const
{
    for (const auto& g : geographies) {
        if (g.id == id) return &g;
    }
    return nullptr;
}

const GeographySamples& ForecastSamples::get(const std::string& id) const
{
    if (const auto* g = find(id)) return *g;
    throw ValidationError("no samples for geography " + id);
}

std::vector<double> default_quantile_levels()
{
    std::vector<double> out = {0.01, 0.025, 0.05};
    for (int k = 2; k <= 18; ++k) out.push_back(k * 0.05);
    for (auto& v : out) v = std::round(v * 1000.0) / 1000.0;
    out.insert(out.end(), {0.95, 0.975, 0.99});
    return out;
}

std::size_t QuantileForecast::level_index(double level) const
{
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (std::abs(levels[i] - level) < 1e-12) return i;
    }
    throw ValidationError("quantile level " + std::to_string(level) + " not in forecast");
}

std::map<std::tuple<GeographyLevel, std::string, Date>, std::size_t> QuantileForecast::index() const
{
    std::map<std::tuple<GeographyLevel, std::string, Date>, std::size_t> out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        if (!out.emplace(std::make_tuple(c.level, c.geography_id, c.target_date), i).second) {
            throw ValidationError("duplicate forecast cell " + c.geography_id + " " + c.target_date.iso());
        }
    }
    return out;
}

double sample_quantile(std::vector<double> sorted_values, double p)
{
    if (sorted_values.empty()) throw ValidationError("quantile of an empty sample");
    const double h = (static_cast<double>(sorted_values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted_values.size() - 1);
    return sorted_values[lo] + (h - static_cast<double>(lo)) * (sorted_values[hi] - sorted_values[lo]);
}

QuantileForecast to_quantiles(const ForecastSamples& samples, const std::vector<double>& levels)
{
    if (samples.n < 100) throw ValidationError("at least 100 samples are needed for quantiles");
    if (!std::is_sorted(levels.begin(), levels.end())) throw ValidationError("quantile levels must be sorted");
    for (double l : levels) {
        if (!(l > 0.0 && l < 1.0)) throw ValidationError("quantile levels must lie in (0, 1)");
    }
    QuantileForecast out;
    out.model = samples.model;
    out.forecast_date = samples.forecast_date;
    out.levels = levels;
    out.level_index(0.5);
    std::vector<double> v(static_cast<std::size_t>(samples.n));
    for (const auto& g : samples.geographies) {
        for (std::size_t k = 0; k < samples.dates.size(); ++k) {
            const auto row = static_cast<Eigen::Index>(k);
            for (int j = 0; j < samples.n; ++j) v[static_cast<std::size_t>(j)] = static_cast<double>(g.samples(row, j));
            std::sort(v.begin(), v.end());
            QuantileCell cell;
            cell.geography_id = g.id;
            cell.level = g.level;
            cell.target_date = samples.dates[k];
            cell.uncalibrated = samples.uncalibrated;
            for (double l : levels) cell.values.push_back(sample_quantile(v, l));
            double s = 0.0;
            for (double x : v) s += x;
            cell.mean = s / static_cast<double>(samples.n);
            out.cells.push_back(std::move(cell));
        }
    }
    return out;
}

ForecastSamples national_sum(const ForecastSamples& regional, const std::string& national_id)
{
    ForecastSamples out;
    out.model = regional.model;
    out.forecast_date = regional.forecast_date;
    out.dates = regional.dates;
    out.n = regional.n;
    out.seed = regional.seed;
    out.uncalibrated = true;
    GeographySamples nat;
    nat.id = national_id;
    nat.level = GeographyLevel::national;
    const auto rows = static_cast<Eigen::Index>(regional.dates.size());
    nat.means = Eigen::MatrixXd::Zero(rows, regional.n);
    nat.samples = CountMatrix::Zero(rows, regional.n);
    bool any = false;
    for (const auto& g : regional.geographies) {
        if (g.level != GeographyLevel::region) continue;
        nat.means += g.means;
        nat.samples += g.samples;
        any = true;
    }
    if (!any) throw ValidationError("national sum needs region-level samples");
    out.geographies.push_back(std::move(nat));
    return out;
}

} // namespace hospcast::forecast
