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

#include "hospcast/backtest/config.hpp"
#include "hospcast/core/domain.hpp"
#include "hospcast/ensembles.hpp"
#include "hospcast/forecast/samples.hpp"
#include "hospcast/scoring.hpp"
#include "hospcast/synth.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hospcast::backtest {

struct BacktestInputs {
    AdmissionData admissions;
    /// Indicators already mapped to trusts.
    IndicatorPanel trust_indicators;
    std::map<TrustId, double> populations;
};

BacktestInputs inputs_from_synthetic(const synth::SyntheticData& data);
/// Scenario (generated with config.seed) or the three CSV files.
BacktestInputs load_inputs(const BacktestConfig& config);

/// Configured forecast dates, or the default weekly sequence that fits the data.
std::vector<Date> resolve_forecast_dates(const BacktestConfig& config, const BacktestInputs& inputs);

/// Trust and region samples for one model at one forecast date, fitted on
/// data up to the day before.
forecast::ForecastSamples simulate_model(const BacktestInputs& inputs, const BacktestConfig& config,
                                         const ModelEntry& model, Date forecast_date);

/// Quantiles of simulate_model plus uncalibrated national cells, days 1..max horizon.
forecast::QuantileForecast forecast_model(const BacktestInputs& inputs, const BacktestConfig& config,
                                          const ModelEntry& model, Date forecast_date);

struct WeekForecasts {
    Date forecast_date;
    /// In config.ensemble_members order.
    std::vector<forecast::QuantileForecast> members;
};

struct EnsembleRun {
    std::vector<forecast::QuantileForecast> forecasts;
    std::vector<ensembles::EnsembleWeights> weights;
};

/// Weekly ensemble forecasts. Week b uses member forecasts from week b-1
/// scored on trust cells with days ahead <= weight_window_days and truth
/// before week b's forecast date; week 0 uses equal weights.
EnsembleRun run_ensemble(const ModelEntry& ensemble, const std::vector<WeekForecasts>& weeks,
                         const std::vector<std::string>& members, const scoring::Truth& truth,
                         const BacktestConfig& config);

struct TimeseriesRow {
    std::string model;
    Date week_start;
    double wis = 0.0;
    double bias = 0.0;
    double coverage_95 = 0.0;
    std::optional<double> hospitalisation_ratio;
};

struct BacktestResult {
    std::vector<Date> forecast_dates;
    std::vector<std::string> model_names;
    std::vector<forecast::QuantileForecast> forecasts;
    std::vector<WeekForecasts> member_weeks;
    std::vector<ensembles::EnsembleWeights> weights;
    std::vector<WaveWindow> phases;
    scoring::Truth truth;
    scoring::ScoreTable scores;
    std::vector<TimeseriesRow> timeseries;
    std::vector<std::string> warnings;
};

BacktestResult run_backtest(const BacktestConfig& config, const BacktestInputs& inputs);
BacktestResult run_backtest(const BacktestConfig& config);

/// Scores, keeping only the configured horizons.
scoring::ScoreTable score_forecasts(const std::vector<forecast::QuantileForecast>& forecasts,
                                    const scoring::Truth& truth, const std::vector<WaveWindow>& phases,
                                    const std::vector<int>& horizons);

/// forecasts.csv, scores.csv, summary.csv, weights.csv, timeseries.csv and,
/// when a wave was detected, phases.csv.
void write_outputs(const BacktestResult& result, const std::filesystem::path& dir);
void write_timeseries(const std::filesystem::path& path, const std::vector<TimeseriesRow>& rows);

} // namespace hospcast::backtest
