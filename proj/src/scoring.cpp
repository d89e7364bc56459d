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

#include "hospcast/scoring.hpp"

#include "hospcast/core/csv.hpp"
#include "hospcast/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hospcast::scoring {

double interval_score(double lower, double upper, double alpha, double y)
{
    if (lower > upper) throw ValidationError("interval lower bound exceeds upper bound");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    double s = upper - lower;
    if (y < lower) s += (2.0 / alpha) * (lower - y);
    if (y > upper) s += (2.0 / alpha) * (y - upper);
    return s;
}

WisComponents weighted_interval_score(std::span<const double> levels, std::span<const double> values, double y)
{
    if (levels.size() != values.size() || levels.empty()) throw ValidationError("levels and values differ in size");
    if (levels.size() % 2 == 0) throw ValidationError("quantile levels are not symmetric around the median");
    const std::size_t m = levels.size() / 2;
    if (std::abs(levels[m] - 0.5) > 1e-9) throw ValidationError("quantile levels do not include the median");
    for (std::size_t k = 0; k < m; ++k) {
        if (std::abs(levels[k] + levels[levels.size() - 1 - k] - 1.0) > 1e-9) {
            throw ValidationError("quantile levels are not symmetric around the median");
        }
    }
    const double median = values[m];
    double disp = 0.0, under = 0.0, over = 0.0;
    if (y > median) under += 0.5 * (y - median);
    else over += 0.5 * (median - y);
    for (std::size_t k = 0; k < m; ++k) {
        const double alpha = 2.0 * levels[k];
        const double lo = values[k], hi = values[levels.size() - 1 - k];
        if (lo > hi) throw ValidationError("quantile values are not monotone");
        const double w = alpha / 2.0;
        disp += w * (hi - lo);
        if (y < lo) over += w * (2.0 / alpha) * (lo - y);
        if (y > hi) under += w * (2.0 / alpha) * (y - hi);
    }
    const double scale = 1.0 / (static_cast<double>(m) + 0.5);
    WisComponents out;
    out.dispersion = scale * disp;
    out.underprediction = scale * under;
    out.overprediction = scale * over;
    out.wis = out.dispersion + out.underprediction + out.overprediction;
    return out;
}

double bias(std::span<const double> samples, double y)
{
    if (samples.empty()) throw ValidationError("bias needs samples");
    double below = 0.0, equal = 0.0;
    for (double s : samples) {
        if (s < y) below += 1.0;
        else if (s == y) equal += 1.0;
    }
    const double f = (below + 0.5 * equal) / static_cast<double>(samples.size());
    return 1.0 - 2.0 * f;
}

double quantile_bias(std::span<const double> levels, std::span<const double> values, double y)
{
    if (levels.size() != values.size() || levels.empty()) throw ValidationError("levels and values differ in size");
    const std::size_t m = values.size();
    double f;
    if (y < values.front()) {
        f = 0.0;
    } else if (y > values.back()) {
        f = 1.0;
    } else {
        std::size_t first = m, last = m;
        for (std::size_t i = 0; i < m; ++i) {
            if (values[i] == y) {
                if (first == m) first = i;
                last = i;
            }
        }
        if (first != m) {
            f = 0.5 * (levels[first] + levels[last]);
        } else {
            std::size_t i = 0;
            while (!(values[i] < y && y < values[i + 1])) ++i;
            f = levels[i] + (y - values[i]) / (values[i + 1] - values[i]) * (levels[i + 1] - levels[i]);
        }
    }
    return 1.0 - 2.0 * f;
}

Truth truth_from_admissions(const AdmissionData& data)
{
    Truth out;
    for (const auto& s : data.series()) {
        for (std::size_t i = 0; i < s.counts.size(); ++i) {
            out[{GeographyLevel::trust, s.trust_id, s.start + static_cast<int>(i)}] = static_cast<double>(s.counts[i]);
        }
    }
    for (const auto& region : data.hierarchy().regions()) {
        const auto totals = data.region_totals(region);
        for (std::size_t i = 0; i < totals.size(); ++i) {
            out[{GeographyLevel::region, region, data.start() + static_cast<int>(i)}] = totals[i];
        }
    }
    return out;
}

int horizon_bucket(int days_ahead)
{
    if (days_ahead < 1) throw ValidationError("days ahead must be at least 1");
    return (days_ahead + 6) / 7 * 7;
}

double coverage(std::span<const ScoreRecord> records)
{
    if (records.empty()) throw ValidationError("coverage of an empty record set");
    double c = 0.0;
    for (const auto& r : records) c += r.covered_95 ? 1.0 : 0.0;
    return c / static_cast<double>(records.size());
}

ScoreTable build_score_table(const std::vector<forecast::QuantileForecast>& forecasts, const Truth& truth,
                             const ScoreOptions& options)
{
    std::optional<Date> first_week;
    for (const auto& f : forecasts) {
        if (!first_week || f.forecast_date < *first_week) first_week = f.forecast_date;
    }
    auto wanted = [&](GeographyLevel l) {
        if (options.levels.empty()) return l != GeographyLevel::national;
        return std::find(options.levels.begin(), options.levels.end(), l) != options.levels.end();
    };

    ScoreTable table;
    std::vector<std::string> missing;
    for (const auto& f : forecasts) {
        if (options.exclude_first_week && f.forecast_date == *first_week) continue;
        const auto lo = f.level_index(0.025), hi = f.level_index(0.975), med = f.level_index(0.5);
        for (const auto& c : f.cells) {
            if (!wanted(c.level)) continue;
            if (c.uncalibrated) {
                throw ValidationError("refusing to score uncalibrated forecast for " + c.geography_id + " (" +
                                      f.model + ")");
            }
            const auto it = truth.find({c.level, c.geography_id, c.target_date});
            if (it == truth.end()) {
                missing.push_back(std::string(forecast::to_string(c.level)) + "/" + c.geography_id + "/" +
                                  c.target_date.iso());
                continue;
            }
            const double y = it->second;
            const auto w = weighted_interval_score(f.levels, c.values, y);
            ScoreRecord r;
            r.model = f.model;
            r.level = c.level;
            r.geography_id = c.geography_id;
            r.forecast_date = f.forecast_date;
            r.target_date = c.target_date;
            r.days_ahead = c.target_date - f.forecast_date + 1;
            r.horizon = horizon_bucket(r.days_ahead);
            r.wis = w.wis;
            r.dispersion = w.dispersion;
            r.underprediction = w.underprediction;
            r.overprediction = w.overprediction;
            r.absolute_error = std::abs(y - c.values[med]);
            r.covered_95 = c.values[lo] <= y && y <= c.values[hi];
            r.bias = quantile_bias(f.levels, c.values, y);
            r.phase = phase_of(options.phases, c.target_date);
            table.records.push_back(std::move(r));
        }
    }
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        std::ostringstream msg;
        msg << "missing truth for " << missing.size() << " cell(s):";
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg << ' ' << missing[i];
        if (missing.size() > 20) msg << " ...";
        throw ValidationError(msg.str());
    }
    std::sort(table.records.begin(), table.records.end(), [](const ScoreRecord& a, const ScoreRecord& b) {
        return std::tie(a.model, a.level, a.geography_id, a.forecast_date, a.target_date) <
               std::tie(b.model, b.level, b.geography_id, b.forecast_date, b.target_date);
    });
    return table;
}

namespace {

double median_of(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <class Pred>
std::vector<const ScoreRecord*> select(const std::vector<ScoreRecord>& records, Pred pred)
{
    std::vector<const ScoreRecord*> out;
    for (const auto& r : records)
        if (pred(r)) out.push_back(&r);
    return out;
}

} // namespace

std::vector<SummaryRow> ScoreTable::by_horizon() const
{
    std::map<std::tuple<std::string, int, GeographyLevel>, std::vector<const ScoreRecord*>> groups;
    for (const auto& r : records) groups[{r.model, r.horizon, r.level}].push_back(&r);
    std::vector<SummaryRow> out;
    for (const auto& [key, rs] : groups) {
        SummaryRow s;
        std::tie(s.model, s.horizon, s.level) = key;
        s.n = rs.size();
        std::vector<double> ae;
        for (const auto* r : rs) {
            s.interval_score += r->wis;
            s.coverage_95 += r->covered_95 ? 1.0 : 0.0;
            s.mean_absolute_error += r->absolute_error;
            s.underprediction += r->underprediction;
            s.overprediction += r->overprediction;
            s.dispersion += r->dispersion;
            s.bias += r->bias;
            ae.push_back(r->absolute_error);
        }
        const double n = static_cast<double>(s.n);
        s.interval_score /= n;
        s.coverage_95 /= n;
        s.mean_absolute_error /= n;
        s.underprediction /= n;
        s.overprediction /= n;
        s.dispersion /= n;
        s.bias /= n;
        s.median_absolute_error = median_of(std::move(ae));
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<WeekRow> ScoreTable::by_week() const
{
    std::map<std::tuple<std::string, Date, GeographyLevel>, std::vector<const ScoreRecord*>> groups;
    for (const auto& r : records) groups[{r.model, r.forecast_date, r.level}].push_back(&r);
    std::vector<WeekRow> out;
    for (const auto& [key, rs] : groups) {
        WeekRow w;
        std::tie(w.model, w.forecast_date, w.level) = key;
        w.n = rs.size();
        for (const auto* r : rs) {
            w.wis += r->wis;
            w.bias += r->bias;
            w.coverage_95 += r->covered_95 ? 1.0 : 0.0;
        }
        w.wis /= static_cast<double>(w.n);
        w.bias /= static_cast<double>(w.n);
        w.coverage_95 /= static_cast<double>(w.n);
        out.push_back(std::move(w));
    }
    return out;
}

namespace {

template <class Field>
double filtered_mean(const std::vector<ScoreRecord>& records, const std::string& model, std::optional<int> horizon,
                     std::optional<GeographyLevel> level, std::optional<Phase> phase, Field field)
{
    const auto rs = select(records, [&](const ScoreRecord& r) {
        return r.model == model && (!horizon || r.horizon == *horizon) && (!level || r.level == *level) &&
               (!phase || r.phase == phase);
    });
    if (rs.empty()) throw ValidationError("no score records for model " + model + " with the given filters");
    double s = 0.0;
    for (const auto* r : rs) s += field(*r);
    return s / static_cast<double>(rs.size());
}

} // namespace

double ScoreTable::mean_wis(const std::string& model, std::optional<int> horizon, std::optional<GeographyLevel> level,
                            std::optional<Phase> phase) const
{
    return filtered_mean(records, model, horizon, level, phase, [](const ScoreRecord& r) { return r.wis; });
}

double ScoreTable::mean_bias(const std::string& model, std::optional<int> horizon, std::optional<GeographyLevel> level,
                             std::optional<Phase> phase) const
{
    return filtered_mean(records, model, horizon, level, phase, [](const ScoreRecord& r) { return r.bias; });
}

void write_scores(const std::filesystem::path& path, const ScoreTable& table)
{
    csv::Writer w(path, {"model", "horizon", "geography_level", "forecast_date", "wis", "dispersion",
                         "underprediction", "overprediction", "mae", "covered_95", "bias", "geography_id",
                         "target_date"});
    for (const auto& r : table.records) {
        w.row({r.model, std::to_string(r.horizon), forecast::to_string(r.level), r.forecast_date.iso(),
               csv::format(r.wis), csv::format(r.dispersion), csv::format(r.underprediction),
               csv::format(r.overprediction), csv::format(r.absolute_error), r.covered_95 ? "1" : "0",
               csv::format(r.bias), r.geography_id, r.target_date.iso()});
    }
}

void write_summary(const std::filesystem::path& path, const ScoreTable& table)
{
    csv::Writer w(path, {"model", "forecast_horizon", "geography_level", "interval_score", "coverage_95",
                         "median_absolute_error", "underprediction", "overprediction", "mean_absolute_error"});
    for (const auto& s : table.by_horizon()) {
        w.row({s.model, std::to_string(s.horizon), forecast::to_string(s.level), csv::format(s.interval_score),
               csv::format(s.coverage_95), csv::format(s.median_absolute_error), csv::format(s.underprediction),
               csv::format(s.overprediction), csv::format(s.mean_absolute_error)});
    }
}

} // namespace hospcast::scoring
