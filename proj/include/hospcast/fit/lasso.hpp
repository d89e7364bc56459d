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

struct LassoOptions {
    int n_lambda = 50;
    double lambda_min_ratio = 1e-3;
    int n_folds = 5;
    /// Replaces the automatic path (values in the standardised scale).
    std::optional<std::vector<double>> lambda_path;
    /// Coordinate-descent convergence (largest scaled coefficient change per sweep).
    double tolerance = 1e-7;
    int max_outer = 100;
    int max_sweeps = 200;
    /// KKT residual targeted when polishing the selected solution.
    double polish_tolerance = 1e-12;
    /// Take the largest lambda whose CV deviance is within one fold standard
    /// error of the minimum; false takes the minimum itself.
    bool one_se_rule = true;
};

struct LassoFit {
    /// Coefficients on the original column scale; offset enters with coefficient 1.
    Eigen::VectorXd coefficients;
    std::vector<std::string> labels;
    double lambda = 0.0;
    std::size_t selected = 0;
    std::vector<double> lambda_path;
    std::vector<double> cv_deviance;
    /// Standard deviations used to scale the lasso columns.
    Eigen::VectorXd column_scale;
    /// Set when every lambda on the path zeroed all lasso columns.
    bool intercept_only = false;
    std::vector<std::string> warnings;
};

/// Log-link quasi-Poisson LASSO: IRLS outer loop, cyclic coordinate descent
/// inner loop, lambda chosen by blocked (time-contiguous) K-fold CV deviance.
LassoFit fit_lasso(const DesignMatrix& design, std::span<const double> y, const LassoOptions& options = {});

/// Solution at a single lambda (standardised scale), no cross-validation.
LassoFit fit_lasso_at(const DesignMatrix& design, std::span<const double> y, double lambda,
                      const LassoOptions& options = {});

/// (1/n) X~' (y - mu) on the standardised scale, for KKT checks.
Eigen::VectorXd lasso_gradient(const DesignMatrix& design, std::span<const double> y, const LassoFit& fit);

/// 2 sum [ y log(y/mu) - (y - mu) ]
double quasi_poisson_deviance(std::span<const double> y, const Eigen::VectorXd& mu);

} // namespace hospcast::fit
