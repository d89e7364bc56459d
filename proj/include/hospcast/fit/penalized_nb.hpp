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

#include "hospcast/fit/design.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hospcast::fit {

/// Coefficients, covariance and dispersion of a fitted log-link regression.
struct FittedModel {
    Eigen::VectorXd coefficients;
    /// Inverse penalised Fisher information at convergence.
    Eigen::MatrixXd covariance;
    /// Negative-binomial dispersion: Var = mu + mu^2 / theta.
    double theta = 1.0;
    std::string family = "negative-binomial";
    std::string link = "log";
    std::vector<std::string> labels;
    /// One per penalty term, in design order.
    std::vector<double> lambdas;
    double edf = 0.0;
    double deviance = 0.0;
    double gcv = 0.0;
    int iterations = 0;
    /// Penalised deviance after each accepted iteration of the final fit (fixed theta).
    std::vector<double> penalized_deviance_trace;

    Eigen::Index column(const std::string& label) const;
};

struct NbFitOptions {
    int max_iterations = 200;
    /// Relative change in penalised deviance.
    double tolerance = 1e-8;
    /// Values per term in the smoothing-parameter grid.
    int grid_size = 20;
    /// Grid span in log10 units around each term's reference scale.
    double grid_log10_low = -4.0;
    double grid_log10_high = 5.0;
    int gcv_sweeps = 2;
    /// Skip the search and use these.
    std::optional<std::vector<double>> lambdas;
    bool estimate_theta = true;
    double theta = 1.0;
    double theta_tolerance = 1e-4;
    double theta_min = 1e-2;
    double theta_max = 1e8;
    int max_theta_rounds = 50;
};

/// Penalised IRLS for a negative-binomial log-link model with smoothing
/// parameters chosen by GCV grid search and theta by moment matching.
FittedModel fit_penalized_nb(const DesignMatrix& design, std::span<const double> y, const NbFitOptions& options = {});

/// Unit deviance sum for the negative binomial.
double nb_deviance(std::span<const double> y, const Eigen::VectorXd& mu, double theta);

/// Theta solving sum (y-mu)^2 / (mu + mu^2/theta) = n - edf, clamped to [theta_min, theta_max].
double moment_theta(std::span<const double> y, const Eigen::VectorXd& mu, double edf, double theta_min,
                    double theta_max);

/// X' (y - mu)/(1 + mu/theta) - S_lambda beta.
Eigen::VectorXd penalized_score(const DesignMatrix& design, std::span<const double> y, const FittedModel& model);

/// exp(X beta + offset)
Eigen::VectorXd fitted_mean(const DesignMatrix& design, const Eigen::VectorXd& beta);

} // namespace hospcast::fit
