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
#include "hospcast/fit/design.hpp"
#include "hospcast/fit/lasso.hpp"
#include "hospcast/fit/penalized_nb.hpp"
#include "hospcast/forecast/design.hpp"

#include <map>
#include <string>
#include <vector>

namespace hospcast::models {

struct LagDesignSpec {
    /// Minimum lead h in days; one of 7, 14, 21.
    int horizon = 7;
    /// Extra lags l = 0..max_lag on top of h.
    int max_lag = 7;
    std::vector<std::string> indicators;
    bool region_interactions = true;

    void validate() const;
};

enum class IndicatorTransform { identity, log };

struct IndicatorModelSpec {
    LagDesignSpec lag;
    int train_window_days = 56;
    /// Changepoint c of the correction stage.
    int changepoint_days = 14;
    int loess_span_days = 21;
    IndicatorTransform transform = IndicatorTransform::log;
    fit::LassoOptions lasso{};
    fit::NbFitOptions correction{};
};

/// Smoothed, standardised trust-level indicators on a common daily grid
/// ending at the forecast origin.
struct PreparedIndicators {
    Date start;
    Date end;
    std::map<std::pair<TrustId, std::string>, std::vector<double>> values;

    double at(const TrustId& trust, const std::string& indicator, Date d) const;
};

/// LOESS-smooths each (trust, indicator) series using values up to `last`
/// only, optionally log-transforms, and standardises over [first, last].
PreparedIndicators prepare_indicators(const IndicatorPanel& trust_panel, const std::vector<TrustId>& trusts,
                                      const std::vector<std::string>& indicators, Date first, Date last,
                                      int loess_span_days = 21,
                                      IndicatorTransform transform = IndicatorTransform::identity);

/// Design rows for every trust (sorted) and every day of [first, last].
struct LaggedDesign {
    fit::DesignMatrix design{0};
    std::vector<TrustId> row_trust;
    std::vector<Date> row_date;
};

/// Region intercepts, trust intercepts (first trust of each region dropped),
/// offset log(p_i), and for each indicator j and lag l the national column
/// x(t-h-l, j) plus one interaction column per region.
LaggedDesign build_lagged_design(const PreparedIndicators& indicators, const Hierarchy& hierarchy,
                                 const std::map<TrustId, double>& populations, const LagDesignSpec& spec,
                                 Date first, Date last);

/// Number of indicator columns build_lagged_design produces.
int lagged_indicator_columns(const LagDesignSpec& spec, int n_regions);

/// Stage 1: LASSO of the smoothed response on the lagged design.
fit::LassoFit fit_trend(const LaggedDesign& design, const std::vector<double>& smoothed_response,
                        const fit::LassoOptions& options = {});

/// exp(X beta + offset) for every row of `design`.
std::vector<double> predict_trend(const fit::LassoFit& trend, const LaggedDesign& design);

/// Stage 2 for one region: intercept + trust ridge + split log(H-hat) at
/// t_max - c + weekday ridge. Rows are trusts (in the given order) x days.
struct CorrectionFit {
    fit::FittedModel model;
    std::vector<TrustId> trusts;
    Eigen::Index trust_first = 1;
    Eigen::Index historic = 0;
    Eigen::Index recent = 0;
    Eigen::Index weekday_first = 0;

    double beta_historic() const { return model.coefficients(historic); }
    double beta_recent() const { return model.coefficients(recent); }
};

/// `counts` and `trend` are per trust over the same days [start, start + n).
CorrectionFit fit_correction(const std::vector<TrustId>& trusts, const std::vector<std::vector<double>>& counts,
                             const std::vector<std::vector<double>>& trend, Date start, int changepoint_days,
                             const fit::NbFitOptions& options = {});

struct IndicatorFit {
    IndicatorModelSpec spec;
    Date t_max;
    fit::LassoFit trend;
    /// H-hat over the training window and over t_max+1..t_max+h.
    std::map<TrustId, std::vector<double>> trend_train;
    std::map<TrustId, std::vector<double>> trend_forecast;
    std::map<RegionId, CorrectionFit> correction;
    std::map<TrustId, RegionId> region_of;
    int changepoint_days = 14;
};

/// Both stages at origin data.end(). `trust_panel` must already be mapped to trusts.
IndicatorFit fit_indicator_model(const AdmissionData& data, const IndicatorPanel& trust_panel,
                                 const std::map<TrustId, double>& populations, const IndicatorModelSpec& spec);

/// Correction-stage log-mean using beta_recent * log(H-hat(date)) plus weekday effect.
std::vector<double> forecast_indicator_model(const IndicatorFit& fit, const TrustId& trust,
                                             const std::vector<Date>& dates);

std::vector<forecast::RegionDesign> forecast_designs(const IndicatorFit& fit, const std::vector<Date>& dates);

} // namespace hospcast::models
