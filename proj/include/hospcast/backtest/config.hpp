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

#include "hospcast/core/date.hpp"
#include "hospcast/ensembles.hpp"
#include "hospcast/models/indicator.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hospcast::backtest {

enum class ModelKind {
    univariate_baseline,
    univariate_hgam,
    indicator,
    ensemble_mean,
    ensemble_score,
    ensemble_regression,
};

/// A configured model. Entries written "name=base" run model `base` under
/// another name, which also gives it its own random streams.
struct ModelEntry {
    std::string name;
    std::string base;
    ModelKind kind = ModelKind::univariate_hgam;
    std::vector<std::string> indicators;

    bool is_ensemble() const;
};

ModelEntry resolve_model(const std::string& entry);

struct DataSource {
    std::optional<std::string> scenario;
    std::filesystem::path admissions;
    std::filesystem::path indicators;
    std::filesystem::path catchment;
};

struct BacktestConfig {
    DataSource data;
    std::vector<std::string> models = {"univariate-baseline", "univariate-hgam", "google-trends", "111-calls",
                                       "111-online",          "combined",        "ensemble-mean", "ensemble-score",
                                       "ensemble-regression"};
    std::vector<std::string> ensemble_members = {"univariate-hgam", "google-trends", "111-calls", "111-online"};
    std::vector<int> horizons = {7, 14, 21};
    /// Explicit forecast dates (first predicted day, Sundays). When empty,
    /// n_weeks Sundays starting at first_forecast_date (or the earliest
    /// Sunday with enough history).
    std::vector<Date> forecast_dates;
    std::optional<Date> first_forecast_date;
    std::optional<int> n_weeks;
    int train_window_days = 56;
    int knot_spacing_days = 7;
    int n_samples = 2000;
    std::uint64_t seed = 20220515;
    double prior_scale = 0.01;
    ensembles::RegressionMode regression_mode = ensembles::RegressionMode::bayes;
    bool proportional_score_weights = false;
    int l_max = 7;
    int changepoint_days = 14;
    int loess_span_days = 21;
    models::IndicatorTransform indicator_transform = models::IndicatorTransform::log;
    int offset_days = 14;
    int peak_window_days = 14;
    /// Days of the previous week's forecasts used for ensemble weights.
    int weight_window_days = 7;
    std::filesystem::path output_dir = "hospcast-out";

    int max_horizon() const;
    /// Throws ValidationError on any inconsistency that does not need data.
    void validate() const;
};

/// Keys mirror the struct fields; unknown keys are rejected.
BacktestConfig parse_config(const std::string& json_text);
BacktestConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const BacktestConfig& config);

} // namespace hospcast::backtest
