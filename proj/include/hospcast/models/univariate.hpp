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
#include "hospcast/fit/penalized_nb.hpp"
#include "hospcast/forecast/design.hpp"

#include <Eigen/Dense>

#include <map>
#include <vector>

namespace hospcast::models {

enum class UnivariateVariant { baseline, hierarchical };

struct UnivariateModelSpec {
    UnivariateVariant variant = UnivariateVariant::hierarchical;
    int knot_spacing_days = 7;
    int train_window_days = 56;
    fit::NbFitOptions fit_options{};

    /// Throws ValidationError unless train_window_days >= 4 * knot_spacing_days.
    void validate() const;
};

/// Linear-predictor pieces for one trust at t_max. Everything is linear in
/// the coefficients of `models[model]`, so coefficient draws propagate exactly.
struct TrustTerms {
    TrustId trust;
    RegionId region;
    std::size_t model = 0;
    /// Log-mean at t_max without the weekday effect.
    Eigen::RowVectorXd level_row;
    /// d(log-mean)/dt at t_max (the growth rate s1).
    Eigen::RowVectorXd slope_row;
    /// Column of the Sunday dummy; weekday w uses weekday_first + w.
    Eigen::Index weekday_first = 0;
};

struct UnivariateFit {
    UnivariateVariant variant = UnivariateVariant::hierarchical;
    Date t_max;
    /// Per trust (baseline) or per region (hierarchical).
    std::vector<fit::FittedModel> models;
    std::map<TrustId, TrustTerms> trusts;
    /// Dispersion to use for region-level noise, per region.
    std::map<RegionId, double> region_theta;

    double growth_rate(const TrustId& trust) const;
    /// Weekday effects indexed 0 = Sunday.
    std::vector<double> weekday_effects(const TrustId& trust) const;
    /// Fitted log-mean at t_max with the weekday effect removed.
    double level(const TrustId& trust) const;
};

/// Independent per-trust fits: intercept + spline + weekday ridge block.
UnivariateFit fit_baseline(const AdmissionData& data, const UnivariateModelSpec& spec);

/// Per-region fits: intercept + trust ridge + shared regional spline +
/// per-trust deviation splines (one shared smoothing parameter) + weekday ridge.
UnivariateFit fit_hgam(const AdmissionData& data, const UnivariateModelSpec& spec);

/// Dispatches on spec.variant; fits every region of `data` using the last
/// train_window_days days.
UnivariateFit fit_univariate(const AdmissionData& data, const UnivariateModelSpec& spec);

/// log-mean(t_max + h) = level + h * s1 + weekday(date).
std::vector<double> predict_log_mean(const UnivariateFit& fit, const TrustId& trust, const std::vector<Date>& dates);

/// Linear-predictor rows for simulation, grouped by region.
std::vector<forecast::RegionDesign> forecast_designs(const UnivariateFit& fit, const std::vector<Date>& dates);

} // namespace hospcast::models
