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

#include "hospcast/core/io.hpp"

#include "hospcast/core/csv.hpp"
#include "hospcast/core/errors.hpp"

#include <algorithm>
#include <map>

namespace hospcast::io {

namespace {

const std::vector<std::string_view> admissions_header = {"date", "trust_id", "region_id", "admissions"};
const std::vector<std::string_view> indicators_header = {"date", "geography_id", "indicator_id", "value"};
const std::vector<std::string_view> catchment_header = {"ltla_id", "trust_id", "weight", "ltla_population"};
const std::vector<std::string_view> phases_header = {"wave_name", "phase", "start_date", "end_date"};

std::string at_line(std::size_t line)
{
    return "line " + std::to_string(line) + ": ";
}

Date parse_date(const std::string& field, std::size_t line)
{
    try {
        return Date::parse(field);
    } catch (const ValidationError& e) {
        throw ValidationError(at_line(line) + e.what());
    }
}

AdmissionData admissions_from(const csv::Table& table, const std::optional<std::set<RegionId>>& known_regions)
{
    struct Row {
        Date date;
        std::int64_t count;
        std::size_t line;
    };
    std::map<TrustId, std::vector<Row>> rows;
    std::map<TrustId, std::pair<RegionId, std::size_t>> regions;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& f = table.rows[r];
        auto line = table.lines[r];
        Date d = parse_date(f[0], line);
        const auto& trust = f[1];
        const auto& region = f[2];
        if (trust.empty()) throw ValidationError(at_line(line) + "empty trust_id");
        if (region.empty() || (known_regions && !known_regions->count(region))) {
            throw ValidationError(at_line(line) + "unknown region '" + region + "'");
        }
        auto [it, inserted] = regions.emplace(trust, std::make_pair(region, line));
        if (!inserted && it->second.first != region) {
            throw ValidationError(at_line(line) + "unknown region '" + region + "' for trust " + trust +
                                  " (line " + std::to_string(it->second.second) + " says " + it->second.first + ")");
        }
        auto count = csv::to_int(f[3], line, "admissions");
        if (count < 0) throw ValidationError(at_line(line) + "negative count " + f[3]);
        rows[trust].push_back({d, count, line});
    }
    if (rows.empty()) throw ValidationError("admissions file has no data rows");

    std::vector<AdmissionSeries> series;
    for (auto& [trust, rs] : rows) {
        std::stable_sort(rs.begin(), rs.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
        AdmissionSeries s{trust, regions[trust].first, rs.front().date, {}};
        for (std::size_t i = 0; i < rs.size(); ++i) {
            if (i > 0) {
                int step = rs[i].date - rs[i - 1].date;
                if (step == 0) {
                    throw ValidationError(at_line(rs[i].line) + "duplicate date " + rs[i].date.iso() + " for trust " + trust);
                }
                if (step != 1) {
                    throw ValidationError(at_line(rs[i].line) + "date gap for trust " + trust + " between " +
                                          rs[i - 1].date.iso() + " and " + rs[i].date.iso());
                }
            }
            s.counts.push_back(rs[i].count);
        }
        series.push_back(std::move(s));
    }
    return AdmissionData(std::move(series));
}

IndicatorPanel indicators_from(const csv::Table& table)
{
    struct Row {
        Date date;
        double value;
        std::size_t line;
    };
    std::map<std::pair<std::string, std::string>, std::vector<Row>> rows;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& f = table.rows[r];
        auto line = table.lines[r];
        Date d = parse_date(f[0], line);
        double v = csv::to_double(f[3], line, "value");
        if (v < 0.0) throw ValidationError(at_line(line) + "negative indicator value");
        rows[{f[1], f[2]}].push_back({d, v, line});
    }
    IndicatorPanel panel;
    for (auto& [key, rs] : rows) {
        std::stable_sort(rs.begin(), rs.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
        IndicatorSeries s{key.first, key.second, rs.front().date, {rs.front().value}};
        for (std::size_t i = 1; i < rs.size(); ++i) {
            int step = rs[i].date - rs[i - 1].date;
            if (step == 0) {
                throw ValidationError(at_line(rs[i].line) + "duplicate date " + rs[i].date.iso() + " for " +
                                      key.first + "/" + key.second);
            }
            if (step - 1 > max_interpolated_gap_days) {
                throw ValidationError(at_line(rs[i].line) + "date gap of " + std::to_string(step - 1) + " days for " +
                                      key.first + "/" + key.second + " exceeds interpolation limit");
            }
            for (int k = 1; k < step; ++k) {
                double frac = static_cast<double>(k) / step;
                s.values.push_back(rs[i - 1].value + frac * (rs[i].value - rs[i - 1].value));
            }
            s.values.push_back(rs[i].value);
        }
        panel.add(std::move(s));
    }
    return panel;
}

CatchmentMap catchment_from(const csv::Table& table)
{
    std::vector<CatchmentEntry> entries;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& f = table.rows[r];
        auto line = table.lines[r];
        entries.push_back({f[0], f[1], csv::to_double(f[2], line, "weight"), csv::to_double(f[3], line, "ltla_population")});
        if (entries.back().weight < 0.0 || entries.back().weight > 1.0) {
            throw ValidationError(at_line(line) + "weight outside [0,1] for ltla " + f[0]);
        }
    }
    return CatchmentMap(std::move(entries));
}

} // namespace

AdmissionData load_admissions(const std::filesystem::path& path, const std::optional<std::set<RegionId>>& known_regions)
{
    return admissions_from(csv::read(path, admissions_header), known_regions);
}

AdmissionData parse_admissions(std::string_view text, const std::optional<std::set<RegionId>>& known_regions)
{
    return admissions_from(csv::parse(text, admissions_header, "admissions.csv"), known_regions);
}

void write_admissions(const std::filesystem::path& path, const AdmissionData& data)
{
    csv::Writer w(path, admissions_header);
    for (std::size_t i = 0; i < data.series().front().counts.size(); ++i) {
        for (const auto& s : data.series()) {
            w.row({(s.start + static_cast<int>(i)).iso(), s.trust_id, s.region_id, std::to_string(s.counts[i])});
        }
    }
}

IndicatorPanel load_indicators(const std::filesystem::path& path)
{
    return indicators_from(csv::read(path, indicators_header));
}

IndicatorPanel parse_indicators(std::string_view text)
{
    return indicators_from(csv::parse(text, indicators_header, "indicators.csv"));
}

void write_indicators(const std::filesystem::path& path, const IndicatorPanel& panel)
{
    csv::Writer w(path, indicators_header);
    for (const auto& [key, s] : panel.all()) {
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            w.row({(s.start + static_cast<int>(i)).iso(), s.geography_id, s.indicator_id, csv::format(s.values[i])});
        }
    }
}

CatchmentMap load_catchment(const std::filesystem::path& path)
{
    return catchment_from(csv::read(path, catchment_header));
}

CatchmentMap parse_catchment(std::string_view text)
{
    return catchment_from(csv::parse(text, catchment_header, "catchment.csv"));
}

void write_catchment(const std::filesystem::path& path, const CatchmentMap& map)
{
    csv::Writer w(path, catchment_header);
    for (const auto& e : map.entries()) {
        w.row({e.ltla_id, e.trust_id, csv::format(e.weight), csv::format(e.ltla_population)});
    }
}

void write_phases(const std::filesystem::path& path, const std::vector<WaveWindow>& windows)
{
    csv::Writer w(path, phases_header);
    for (const auto& win : windows) {
        w.row({win.wave_name, to_string(win.phase), win.start.iso(), win.end.iso()});
    }
}

std::vector<WaveWindow> load_phases(const std::filesystem::path& path)
{
    auto table = csv::read(path, phases_header);
    std::vector<WaveWindow> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& f = table.rows[r];
        WaveWindow w{f[0], parse_phase(f[1]), parse_date(f[2], table.lines[r]), parse_date(f[3], table.lines[r])};
        if (!(w.start < w.end)) throw ValidationError(at_line(table.lines[r]) + "phase start must precede end");
        out.push_back(std::move(w));
    }
    return out;
}

} // namespace hospcast::io
