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

#include "hospcast/forecast/io.hpp"

#include "hospcast/core/csv.hpp"
#include "hospcast/core/errors.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace hospcast::forecast {

const std::vector<std::string_view> forecasts_header = {
    "model", "forecast_date", "target_date", "geography_level", "geography_id", "quantile_level", "value"};

void write_forecasts(const std::filesystem::path& path, const std::vector<QuantileForecast>& forecasts)
{
    csv::Writer w(path, forecasts_header);
    for (const auto& f : forecasts) {
        for (const auto& c : f.cells) {
            const std::string fd = f.forecast_date.iso(), td = c.target_date.iso(), lvl = to_string(c.level);
            for (std::size_t i = 0; i < f.levels.size(); ++i) {
                w.row({f.model, fd, td, lvl, c.geography_id, csv::format(f.levels[i]), csv::format(c.values[i])});
            }
            w.row({f.model, fd, td, lvl, c.geography_id, "mean", csv::format(c.mean)});
        }
    }
}

namespace {

std::vector<QuantileForecast> from_table(const csv::Table& t)
{
    struct Partial {
        std::map<double, double> values;
        std::optional<double> mean;
        std::size_t line = 0;
    };
    using CellKey = std::tuple<GeographyLevel, std::string, Date>;
    std::map<std::pair<std::string, Date>, std::map<CellKey, Partial>> groups;
    std::map<std::pair<std::string, Date>, std::set<double>> levels;

    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const auto line = t.lines[r];
        const auto where = "line " + std::to_string(line) + ": ";
        Date fd, td;
        GeographyLevel level;
        try {
            fd = Date::parse(row[1]);
            td = Date::parse(row[2]);
            level = parse_geography_level(row[3]);
        } catch (const ValidationError& e) {
            throw ValidationError(where + e.what());
        }
        const auto key = std::make_pair(row[0], fd);
        auto& cell = groups[key][CellKey{level, row[4], td}];
        cell.line = line;
        const double value = csv::to_double(row[6], line, "value");
        if (row[5] == "mean") {
            cell.mean = value;
        } else {
            const double q = csv::to_double(row[5], line, "quantile_level");
            if (!(q > 0.0 && q < 1.0)) throw ValidationError(where + "quantile level outside (0, 1)");
            if (!cell.values.emplace(q, value).second) throw ValidationError(where + "duplicate quantile row");
            levels[key].insert(q);
        }
    }

    std::vector<QuantileForecast> out;
    for (auto& [key, cells] : groups) {
        QuantileForecast f;
        f.model = key.first;
        f.forecast_date = key.second;
        f.levels.assign(levels[key].begin(), levels[key].end());
        for (auto& [ck, p] : cells) {
            if (p.values.size() != f.levels.size()) {
                throw ValidationError("line " + std::to_string(p.line) + ": cell " + std::get<1>(ck) + " " +
                                      std::get<2>(ck).iso() + " does not have every quantile level");
            }
            QuantileCell c;
            c.level = std::get<0>(ck);
            c.geography_id = std::get<1>(ck);
            c.target_date = std::get<2>(ck);
            c.uncalibrated = c.level == GeographyLevel::national;
            for (const auto& kv : p.values) c.values.push_back(kv.second);
            c.mean = p.mean.value_or(c.values[f.levels.size() / 2]);
            f.cells.push_back(std::move(c));
        }
        out.push_back(std::move(f));
    }
    return out;
}

} // namespace

std::vector<QuantileForecast> load_forecasts(const std::filesystem::path& path)
{
    return from_table(csv::read(path, forecasts_header));
}

std::vector<QuantileForecast> parse_forecasts(std::string_view text)
{
    return from_table(csv::parse(text, forecasts_header));
}

} // namespace hospcast::forecast
