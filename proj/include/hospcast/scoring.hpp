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
#include "hospcast/forecast/samples.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace hospcast::scoring {

using forecast::GeographyLevel;

/// (u - l) + (2/alpha)(l - y)[y < l] + (2/alpha)(y - u)[y > u]
double interval_score(double lower, double upper, double alpha, double y);

struct WisComponents {
    double wis = 0.0;
    double dispersion = 0.0;
    double underprediction = 0.0;
    double overprediction = 0.0;
};

/// Levels must be sorted, contain 0.5 and pair up as tau / 1 - tau.
WisComponents weighted_interval_score(std::span<const double> levels, std::span<const double> values, double y);

/// 1 - 2 F(y) with the mid-rank empirical CDF of the samples.
double bias(std::span<const double> samples, double y);

/// 1 - 2 F(y) where F inverts the piecewise-linear quantile function
/// (midpoint of any flat stretch at y; 0 or 1 outside the outer levels).
double quantile_bias(std::span<const double> levels, std::span<const double> values, double y);

/// Observed values keyed by (level, geography, date).
using Truth = std::map<std::tuple<GeographyLevel, std::string, Date>, double>;

/// Trust counts and region totals for every day of `data`.
Truth truth_from_admissions(const AdmissionData& data);

struct ScoreRecord {
    std::string model;
    GeographyLevel level = GeographyLevel::trust;
    std::string geography_id;
    Date forecast_date;
    Date target_date;
    /// Days ahead, 1 = forecast_date.
    int days_ahead = 1;
    /// ceil(days_ahead / 7) * 7
    int horizon = 7;
    double wis = 0.0;
    double dispersion = 0.0;
    double underprediction = 0.0;
    double overprediction = 0.0;
    double absolute_error = 0.0;
    bool covered_95 = false;
    double bias = 0.0;
    std::optional<Phase> phase;
};

int horizon_bucket(int days_ahead);

double coverage(std::span<const ScoreRecord> records);

struct ScoreOptions {
    /// Drop every record of the earliest forecast date.
    bool exclude_first_week = true;
    std::vector<WaveWindow> phases;
    /// Only score these levels (empty = trust and region).
    std::vector<GeographyLevel> levels;
};

struct SummaryRow {
    std::string model;
    int horizon = 7;
    GeographyLevel level = GeographyLevel::trust;
    double interval_score = 0.0;
    double coverage_95 = 0.0;
    double median_absolute_error = 0.0;
    double mean_absolute_error = 0.0;
    double underprediction = 0.0;
    double overprediction = 0.0;
    double dispersion = 0.0;
    double bias = 0.0;
    std::size_t n = 0;
};

struct WeekRow {
    std::string model;
    Date forecast_date;
    GeographyLevel level = GeographyLevel::trust;
    double wis = 0.0;
    double bias = 0.0;
    double coverage_95 = 0.0;
    std::size_t n = 0;
};

struct ScoreTable {
    /// Sorted by model, level, geography, forecast date, target date.
    std::vector<ScoreRecord> records;

    /// Means per (model, horizon, level).
    std::vector<SummaryRow> by_horizon() const;
    /// Means per (model, forecast date, level).
    std::vector<WeekRow> by_week() const;
    /// Mean WIS over records matching the filters.
    double mean_wis(const std::string& model, std::optional<int> horizon = {},
                    std::optional<GeographyLevel> level = {}, std::optional<Phase> phase = {}) const;
    double mean_bias(const std::string& model, std::optional<int> horizon = {},
                     std::optional<GeographyLevel> level = {}, std::optional<Phase> phase = {}) const;
};

/// Scores every cell; refuses uncalibrated cells and lists cells without truth.
ScoreTable build_score_table(const std::vector<forecast::QuantileForecast>& forecasts, const Truth& truth,
                             const ScoreOptions& options = {});

void write_scores(const std::filesystem::path& path, const ScoreTable& table);
void write_summary(const std::filesystem::path& path, const ScoreTable& table);

} // namespace hospcast::scoring
