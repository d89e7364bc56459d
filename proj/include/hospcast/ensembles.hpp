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
#include "hospcast/scoring.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hospcast::ensembles {

using forecast::QuantileForecast;

struct EnsembleWeights {
    std::string method;
    Date week_start;
    std::vector<std::string> models;
    std::vector<double> weights;
    std::vector<std::string> warnings;
};

/// Per-cell, per-level average of member quantiles.
QuantileForecast ensemble_mean(const std::vector<QuantileForecast>& members, const std::string& name = "ensemble-mean");

/// Per-cell, per-level sum of weight x member value. Cells are re-sorted
/// when any weight is negative.
QuantileForecast combine(const std::vector<QuantileForecast>& members, const std::vector<double>& weights,
                         const std::string& name);

/// Inverse-score weights from summed prior-week WIS per member. Members with
/// zero score share all the weight. `proportional` gives w = q / sum(q).
EnsembleWeights score_weights(const std::vector<std::string>& models, const std::vector<double>& summed_wis,
                              bool proportional = false);

QuantileForecast ensemble_by_score(const std::vector<QuantileForecast>& members, const EnsembleWeights& weights,
                                   const std::string& name = "ensemble-score");

enum class RegressionMode { ols, bayes };

struct RegressionOptions {
    RegressionMode mode = RegressionMode::bayes;
    /// Prior standard deviation of each weight.
    double prior_scale = 0.01;
    /// Defaults to 1 / M.
    std::optional<double> prior_mean;
    /// Divide each cell by sqrt(max(mean member median, 1)).
    bool standardize = true;
};

/// Weights from regressing truth on member medians (cells x members).
/// bayes: (X'X + lambda I)^-1 (X'y + lambda m 1), lambda = 1 / prior_scale^2.
EnsembleWeights regression_weights(const std::vector<std::string>& models, const Eigen::MatrixXd& member_medians,
                                   const Eigen::VectorXd& truth, const RegressionOptions& options = {});

QuantileForecast ensemble_by_regression(const std::vector<QuantileForecast>& members, const EnsembleWeights& weights,
                                        const std::string& name = "ensemble-regression");

/// Records with days_ahead <= days_elapsed. Empty output adds a warning.
std::vector<scoring::ScoreRecord> truncate_eval_window(const std::vector<scoring::ScoreRecord>& records,
                                                       int days_elapsed, std::vector<std::string>* warnings = nullptr);

void write_weights(const std::filesystem::path& path, const std::vector<EnsembleWeights>& weights);

} // namespace hospcast::ensembles
