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

#include "hospcast/models/indicator.hpp"

#include "hospcast/core/errors.hpp"
#include "hospcast/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hospcast::models {

namespace {

const char* weekday_names[] = {"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};

std::string lag_label(const std::string& indicator, int lag)
{
    return indicator + "@lag" + std::to_string(lag);
}

} // namespace

void LagDesignSpec::validate() const
{
    if (horizon != 7 && horizon != 14 && horizon != 21) {
        throw ValidationError("indicator horizon must be 7, 14 or 21 days, got " + std::to_string(horizon));
    }
    if (max_lag < 0) throw ValidationError("max_lag must be non-negative");
    if (indicators.empty()) throw ValidationError("indicator model needs at least one indicator");
}

double PreparedIndicators::at(const TrustId& trust, const std::string& indicator, Date d) const
{
    const auto it = values.find({trust, indicator});
    if (it == values.end()) throw ValidationError("no indicator " + indicator + " for trust " + trust);
    if (d < start || d > end) throw ValidationError("indicator date " + d.iso() + " outside prepared span");
    return it->second[static_cast<std::size_t>(d - start)];
}

PreparedIndicators prepare_indicators(const IndicatorPanel& trust_panel, const std::vector<TrustId>& trusts,
                                      const std::vector<std::string>& indicators, Date first, Date last,
                                      int loess_span_days, IndicatorTransform transform)
{
    if (first > last) throw ValidationError("empty indicator window");
    PreparedIndicators out;
    out.start = first;
    out.end = last;
    for (const auto& trust : trusts) {
        for (const auto& ind : indicators) {
            const auto* s = trust_panel.find(trust, ind);
            if (!s) throw ValidationError("no indicator " + ind + " for trust " + trust);
            if (s->start > first || s->end() < last) {
                throw ValidationError("indicator history too short for " + trust + "/" + ind + ": need " +
                                      first.iso() + " to " + last.iso() + ", have " + s->start.iso() + " to " +
                                      s->end().iso());
            }
            // Nothing after `last` reaches the smoother.
            const auto n = static_cast<std::size_t>(last - s->start + 1);
            std::span<const double> history(s->values.data(), n);
            auto smooth = loess_smooth(history, loess_span_days).values;
            std::vector<double> v(smooth.begin() + (first - s->start), smooth.end());
            if (transform == IndicatorTransform::log) {
                for (auto& x : v) x = std::log(std::max(x, 1e-8));
            }
            const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
            double ss = 0.0;
            for (double x : v) ss += (x - mean) * (x - mean);
            double sd = std::sqrt(ss / static_cast<double>(v.size()));
            if (!(sd > 0.0)) sd = 1.0;
            for (auto& x : v) x = (x - mean) / sd;
            out.values[{trust, ind}] = std::move(v);
        }
    }
    return out;
}

int lagged_indicator_columns(const LagDesignSpec& spec, int n_regions)
{
    const int base = static_cast<int>(spec.indicators.size()) * (spec.max_lag + 1);
    return spec.region_interactions ? base * (1 + n_regions) : base;
}

LaggedDesign build_lagged_design(const PreparedIndicators& indicators, const Hierarchy& hierarchy,
                                 const std::map<TrustId, double>& populations, const LagDesignSpec& spec,
                                 Date first, Date last)
{
    spec.validate();
    if (first > last) throw ValidationError("empty design window");
    const int reach = spec.horizon + spec.max_lag;
    if (indicators.start > first - reach) {
        throw ValidationError("indicator history too short: need " + std::to_string(reach) + " days before " +
                              first.iso() + " (from " + (first - reach).iso() + "), have from " +
                              indicators.start.iso());
    }
    if (indicators.end < last - spec.horizon) {
        throw ValidationError("indicator history ends " + indicators.end.iso() + ", need " +
                              (last - spec.horizon).iso());
    }

    const auto trusts = hierarchy.trusts();
    const auto regions = hierarchy.regions();
    const int days = last - first + 1;
    const Eigen::Index n = static_cast<Eigen::Index>(trusts.size()) * days;

    LaggedDesign out;
    out.design = fit::DesignMatrix(n);
    out.row_trust.reserve(static_cast<std::size_t>(n));
    out.row_date.reserve(static_cast<std::size_t>(n));
    std::vector<int> times;
    for (const auto& t : trusts) {
        for (int d = 0; d < days; ++d) {
            out.row_trust.push_back(t);
            out.row_date.push_back(first + d);
            times.push_back(d);
        }
    }
    out.design.set_row_times(times);

    auto indicator_of_rows = [&](auto&& value) {
        Eigen::VectorXd col(n);
        for (Eigen::Index r = 0; r < n; ++r) col(r) = value(static_cast<std::size_t>(r));
        return col;
    };

    for (const auto& region : regions) {
        out.design.add_column("region[" + region + "]", indicator_of_rows([&](std::size_t r) {
                                  return hierarchy.region_of(out.row_trust[r]) == region ? 1.0 : 0.0;
                              }));
    }
    for (const auto& region : regions) {
        const auto members = hierarchy.trusts_in(region);
        for (std::size_t k = 1; k < members.size(); ++k) {
            const auto& trust = members[k];
            out.design.add_column("trust[" + trust + "]", indicator_of_rows([&](std::size_t r) {
                                      return out.row_trust[r] == trust ? 1.0 : 0.0;
                                  }));
        }
    }

    Eigen::VectorXd offset(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto it = populations.find(out.row_trust[static_cast<std::size_t>(r)]);
        if (it == populations.end() || !(it->second > 0.0)) {
            throw ValidationError("no catchment population for trust " + out.row_trust[static_cast<std::size_t>(r)]);
        }
        offset(r) = std::log(it->second);
    }
    out.design.set_offset(offset);

    for (const auto& ind : spec.indicators) {
        for (int l = 0; l <= spec.max_lag; ++l) {
            const int lag = spec.horizon + l;
            const Eigen::VectorXd x = indicator_of_rows([&](std::size_t r) {
                return indicators.at(out.row_trust[r], ind, out.row_date[r] - lag);
            });
            out.design.add_column(lag_label(ind, lag), x, fit::PenaltyKind::lasso);
            if (!spec.region_interactions) continue;
            for (const auto& region : regions) {
                Eigen::VectorXd xr = x;
                for (Eigen::Index r = 0; r < n; ++r) {
                    if (hierarchy.region_of(out.row_trust[static_cast<std::size_t>(r)]) != region) xr(r) = 0.0;
                }
                out.design.add_column(lag_label(ind, lag) + ":region[" + region + "]", xr, fit::PenaltyKind::lasso);
            }
        }
    }
    return out;
}

fit::LassoFit fit_trend(const LaggedDesign& design, const std::vector<double>& smoothed_response,
                        const fit::LassoOptions& options)
{
    return fit::fit_lasso(design.design, smoothed_response, options);
}

std::vector<double> predict_trend(const fit::LassoFit& trend, const LaggedDesign& design)
{
    if (trend.labels != design.design.labels()) throw ValidationError("trend model and design columns differ");
    const Eigen::VectorXd eta = design.design.matrix() * trend.coefficients + design.design.offset();
    std::vector<double> out(static_cast<std::size_t>(eta.size()));
    for (Eigen::Index i = 0; i < eta.size(); ++i) out[static_cast<std::size_t>(i)] = std::exp(std::clamp(eta(i), -50.0, 50.0));
    return out;
}

CorrectionFit fit_correction(const std::vector<TrustId>& trusts, const std::vector<std::vector<double>>& counts,
                             const std::vector<std::vector<double>>& trend, Date start, int changepoint_days,
                             const fit::NbFitOptions& options)
{
    if (trusts.empty() || counts.size() != trusts.size() || trend.size() != trusts.size()) {
        throw ValidationError("correction stage needs counts and trend for every trust");
    }
    const int days = static_cast<int>(counts.front().size());
    if (changepoint_days < 0) throw ValidationError("changepoint must be non-negative");
    if (days <= changepoint_days) throw ValidationError("span shorter than changepoint");
    for (std::size_t i = 0; i < trusts.size(); ++i) {
        if (static_cast<int>(counts[i].size()) != days || static_cast<int>(trend[i].size()) != days) {
            throw ValidationError("counts and trend for trust " + trusts[i] + " are not aligned");
        }
    }
    const int nt = static_cast<int>(trusts.size());
    const Eigen::Index n = static_cast<Eigen::Index>(nt) * days;
    const int cut = days - 1 - changepoint_days;  // rows with day index < cut are historic

    fit::DesignMatrix design(n);
    std::vector<int> times(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) times[static_cast<std::size_t>(r)] = static_cast<int>(r % days);
    design.set_row_times(times);

    CorrectionFit out;
    out.trusts = trusts;
    design.add_column("(Intercept)", Eigen::VectorXd::Ones(n));

    Eigen::MatrixXd dummies = Eigen::MatrixXd::Zero(n, nt);
    std::vector<std::string> labels;
    for (int i = 0; i < nt; ++i) {
        dummies.block(static_cast<Eigen::Index>(i) * days, i, days, 1).setOnes();
        labels.push_back("trust[" + trusts[static_cast<std::size_t>(i)] + "]");
    }
    out.trust_first = design.cols();
    design.add_ridge("trust", labels, dummies);

    Eigen::VectorXd hist = Eigen::VectorXd::Zero(n), recent = Eigen::VectorXd::Zero(n);
    std::vector<double> y;
    y.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < nt; ++i) {
        for (int d = 0; d < days; ++d) {
            const double h = trend[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
            if (!(h > 0.0)) throw ValidationError("trend must be positive for trust " + trusts[static_cast<std::size_t>(i)]);
            const Eigen::Index r = static_cast<Eigen::Index>(i) * days + d;
            (d < cut ? hist : recent)(r) = std::log(h);
            y.push_back(counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)]);
        }
    }
    out.historic = design.add_column("logH[historic]", hist);
    out.recent = design.add_column("logH[recent]", recent);

    Eigen::MatrixXd wday = Eigen::MatrixXd::Zero(n, 7);
    std::vector<std::string> wlabels;
    for (auto* w : weekday_names) wlabels.push_back(std::string("wday[") + w + "]");
    for (Eigen::Index r = 0; r < n; ++r) wday(r, (start + static_cast<int>(r % days)).weekday()) = 1.0;
    out.weekday_first = design.cols();
    design.add_ridge("wday", wlabels, wday);

    out.model = fit::fit_penalized_nb(design, y, options);
    return out;
}

IndicatorFit fit_indicator_model(const AdmissionData& data, const IndicatorPanel& trust_panel,
                                 const std::map<TrustId, double>& populations, const IndicatorModelSpec& spec)
{
    spec.lag.validate();
    const int w = spec.train_window_days;
    const int h = spec.lag.horizon;
    if (w <= spec.changepoint_days) throw ValidationError("span shorter than changepoint");
    const Date t_max = data.end();
    const Date train_start = t_max - (w - 1);
    if (data.start() > train_start) {
        throw ValidationError("need " + std::to_string(w) + " days of admissions before " + t_max.iso());
    }

    const auto& hierarchy = data.hierarchy();
    const auto trusts = hierarchy.trusts();
    const auto prepared = prepare_indicators(trust_panel, trusts, spec.lag.indicators,
                                             train_start - (h + spec.lag.max_lag), t_max, spec.loess_span_days,
                                             spec.transform);
    const auto full = build_lagged_design(prepared, hierarchy, populations, spec.lag, train_start, t_max + h);

    // Smoothed admissions over all history up to t_max.
    std::map<TrustId, std::vector<double>> smooth;
    for (const auto& s : data.series()) {
        std::vector<double> c(s.counts.begin(), s.counts.end());
        smooth[s.trust_id] = loess_smooth(c, spec.loess_span_days).floored(0.5);
    }

    std::vector<Eigen::Index> train_rows;
    std::vector<double> y;
    for (std::size_t r = 0; r < full.row_date.size(); ++r) {
        if (full.row_date[r] > t_max) continue;
        train_rows.push_back(static_cast<Eigen::Index>(r));
        y.push_back(smooth.at(full.row_trust[r])[static_cast<std::size_t>(full.row_date[r] - data.start())]);
    }
    LaggedDesign train;
    train.design = full.design.select_rows(train_rows);
    for (auto r : train_rows) {
        train.row_trust.push_back(full.row_trust[static_cast<std::size_t>(r)]);
        train.row_date.push_back(full.row_date[static_cast<std::size_t>(r)]);
    }

    IndicatorFit out;
    out.spec = spec;
    out.t_max = t_max;
    out.changepoint_days = spec.changepoint_days;
    out.trend = fit_trend(train, y, spec.lasso);
    const auto hhat = predict_trend(out.trend, full);
    for (std::size_t r = 0; r < hhat.size(); ++r) {
        auto& dst = full.row_date[r] <= t_max ? out.trend_train[full.row_trust[r]] : out.trend_forecast[full.row_trust[r]];
        dst.push_back(hhat[r]);
    }

    for (const auto& region : hierarchy.regions()) {
        const auto members = hierarchy.trusts_in(region);
        std::vector<std::vector<double>> counts, trend;
        for (const auto& t : members) {
            const auto& s = data.trust(t);
            std::vector<double> c;
            for (Date d = train_start; d <= t_max; ++d) c.push_back(static_cast<double>(s.at(d)));
            counts.push_back(std::move(c));
            trend.push_back(out.trend_train.at(t));
            out.region_of[t] = region;
        }
        out.correction.emplace(region,
                               fit_correction(members, counts, trend, train_start, spec.changepoint_days, spec.correction));
    }
    return out;
}

namespace {

Eigen::RowVectorXd forecast_row(const IndicatorFit& fit, const CorrectionFit& c, const TrustId& trust, Date d)
{
    if (d <= fit.t_max || d > fit.t_max + fit.spec.lag.horizon) {
        throw ValidationError("date " + d.iso() + " is beyond the indicator model's reach (t_max " + fit.t_max.iso() +
                              ", h " + std::to_string(fit.spec.lag.horizon) + ")");
    }
    const auto pos = std::find(c.trusts.begin(), c.trusts.end(), trust);
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(c.model.coefficients.size());
    row(0) = 1.0;
    row(c.trust_first + (pos - c.trusts.begin())) = 1.0;
    row(c.recent) = std::log(fit.trend_forecast.at(trust)[static_cast<std::size_t>(d - fit.t_max - 1)]);
    row(c.weekday_first + d.weekday()) = 1.0;
    return row;
}

const CorrectionFit& correction_for(const IndicatorFit& fit, const TrustId& trust)
{
    const auto it = fit.region_of.find(trust);
    if (it == fit.region_of.end()) throw ValidationError("trust " + trust + " is not in the fitted model");
    return fit.correction.at(it->second);
}

} // namespace

std::vector<double> forecast_indicator_model(const IndicatorFit& fit, const TrustId& trust,
                                             const std::vector<Date>& dates)
{
    const auto& c = correction_for(fit, trust);
    std::vector<double> out;
    for (const auto& d : dates) out.push_back(forecast_row(fit, c, trust, d).dot(c.model.coefficients));
    return out;
}

std::vector<forecast::RegionDesign> forecast_designs(const IndicatorFit& fit, const std::vector<Date>& dates)
{
    std::vector<forecast::RegionDesign> out;
    for (const auto& [region, c] : fit.correction) {
        forecast::RegionDesign rd;
        rd.region = region;
        rd.dates = dates;
        rd.models.push_back(c.model);
        rd.region_theta = c.model.theta;
        for (const auto& trust : c.trusts) {
            forecast::TrustRows tr;
            tr.trust = trust;
            tr.model = 0;
            tr.rows.resize(static_cast<Eigen::Index>(dates.size()), c.model.coefficients.size());
            for (std::size_t k = 0; k < dates.size(); ++k) {
                tr.rows.row(static_cast<Eigen::Index>(k)) = forecast_row(fit, c, trust, dates[k]);
            }
            rd.trusts.push_back(std::move(tr));
        }
        out.push_back(std::move(rd));
    }
    return out;
}

} // namespace hospcast::models
