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

#include "hospcast/models/univariate.hpp"

#include "hospcast/core/errors.hpp"
#include "hospcast/fit/design.hpp"
#include "hospcast/fit/spline.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace hospcast::models {

namespace {

const std::array<const char*, 7> weekday_names = {"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};

std::vector<double> day_times(int n)
{
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = i;
    return t;
}

/// Weekday dummies for `rows` consecutive-day blocks starting at `start`.
Eigen::MatrixXd weekday_dummies(Date start, int days, int repeats)
{
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(days) * repeats, 7);
    for (int r = 0; r < repeats; ++r)
        for (int d = 0; d < days; ++d) out(r * days + d, (start + d).weekday()) = 1.0;
    return out;
}

std::vector<std::string> weekday_labels()
{
    std::vector<std::string> out;
    for (auto* n : weekday_names) out.push_back(std::string("wday[") + n + "]");
    return out;
}

void check_window(const AdmissionData& data, const UnivariateModelSpec& spec)
{
    spec.validate();
    const int available = data.end() - data.start() + 1;
    if (available < spec.train_window_days) {
        throw ValidationError("need " + std::to_string(spec.train_window_days) + " days of admissions, have " +
                              std::to_string(available));
    }
}

std::vector<double> window_counts(const AdmissionSeries& s, Date from, int days)
{
    std::vector<double> out(static_cast<std::size_t>(days));
    for (int d = 0; d < days; ++d) out[static_cast<std::size_t>(d)] = static_cast<double>(s.at(from + d));
    return out;
}

} // namespace

void UnivariateModelSpec::validate() const
{
    if (knot_spacing_days < 1) throw ValidationError("knot spacing must be positive");
    if (train_window_days < 4 * knot_spacing_days) {
        throw ValidationError("train_window_days must be at least 4 x knot_spacing_days");
    }
}

double UnivariateFit::growth_rate(const TrustId& trust) const
{
    const auto& t = trusts.at(trust);
    return t.slope_row.dot(models.at(t.model).coefficients);
}

double UnivariateFit::level(const TrustId& trust) const
{
    const auto& t = trusts.at(trust);
    return t.level_row.dot(models.at(t.model).coefficients);
}

std::vector<double> UnivariateFit::weekday_effects(const TrustId& trust) const
{
    const auto& t = trusts.at(trust);
    const auto& beta = models.at(t.model).coefficients;
    std::vector<double> out(7);
    for (int w = 0; w < 7; ++w) out[static_cast<std::size_t>(w)] = beta(t.weekday_first + w);
    return out;
}

UnivariateFit fit_baseline(const AdmissionData& data, const UnivariateModelSpec& spec)
{
    check_window(data, spec);
    const int w = spec.train_window_days;
    const Date t_max = data.end();
    const Date from = t_max - (w - 1);
    const auto times = day_times(w);
    const auto basis = fit::SplineBasis::for_times(times, spec.knot_spacing_days);
    const Eigen::MatrixXd b = basis.design(times);
    const auto constraint = fit::CenteringConstraint::for_design(b);
    const Eigen::MatrixXd bc = b * constraint.z;
    const Eigen::MatrixXd sc = constraint.z.transpose() * basis.penalty() * constraint.z;
    std::vector<std::string> spline_labels;
    for (Eigen::Index j = 0; j < bc.cols(); ++j) spline_labels.push_back("s(t)." + std::to_string(j));

    UnivariateFit out;
    out.variant = UnivariateVariant::baseline;
    out.t_max = t_max;
    for (const auto& s : data.series()) {
        fit::DesignMatrix design(w);
        const auto intercept = design.add_column("(Intercept)", Eigen::VectorXd::Ones(w));
        const auto spline_first = design.cols();  // == 1
        design.add_term("s(t)", fit::PenaltyKind::spline, spline_labels, bc, sc);
        const auto wday_first = design.cols();
        design.add_ridge("wday", weekday_labels(), weekday_dummies(from, w, 1));

        const auto y = window_counts(s, from, w);
        out.models.push_back(fit::fit_penalized_nb(design, y, spec.fit_options));

        TrustTerms terms;
        terms.trust = s.trust_id;
        terms.region = s.region_id;
        terms.model = out.models.size() - 1;
        terms.level_row = Eigen::RowVectorXd::Zero(design.cols());
        terms.slope_row = Eigen::RowVectorXd::Zero(design.cols());
        terms.level_row(intercept) = 1.0;
        terms.level_row.segment(spline_first, bc.cols()) = basis.evaluate(w - 1) * constraint.z;
        terms.slope_row.segment(spline_first, bc.cols()) = basis.derivative(w - 1) * constraint.z;
        terms.weekday_first = wday_first;
        out.trusts.emplace(s.trust_id, std::move(terms));
    }

    // Moment-matched dispersion for a sum of independent trust-level negative binomials.
    for (const auto& region : data.hierarchy().regions()) {
        const auto members = data.hierarchy().trusts_in(region);
        double num = 0.0, den = 0.0;
        for (int d = 0; d < w; ++d) {
            double total = 0.0, excess = 0.0;
            for (const auto& trust : members) {
                const auto& terms = out.trusts.at(trust);
                const auto& m = out.models[terms.model];
                Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(m.coefficients.size());
                row(0) = 1.0;
                row.segment(1, bc.cols()) = bc.row(d);
                row(terms.weekday_first + (from + d).weekday()) = 1.0;
                const double mu = std::exp(row.dot(m.coefficients));
                total += mu;
                excess += mu * mu / m.theta;
            }
            num += total * total;
            den += excess;
        }
        out.region_theta[region] = den > 0.0 ? num / den : spec.fit_options.theta_max;
    }
    return out;
}

UnivariateFit fit_hgam(const AdmissionData& data, const UnivariateModelSpec& spec)
{
    check_window(data, spec);
    const int w = spec.train_window_days;
    const Date t_max = data.end();
    const Date from = t_max - (w - 1);
    const auto times = day_times(w);

    const auto regional = fit::SplineBasis::for_times(times, spec.knot_spacing_days);
    const int dev_knots = std::max(4, w / (2 * spec.knot_spacing_days));
    const fit::SplineBasis deviation(0.0, w - 1.0, dev_knots);

    UnivariateFit out;
    out.variant = UnivariateVariant::hierarchical;
    out.t_max = t_max;

    for (const auto& region : data.hierarchy().regions()) {
        const auto members = data.hierarchy().trusts_in(region);
        if (members.size() < 2) {
            throw ValidationError("hierarchical model for region " + region + ": >= 2 trusts required");
        }
        const int nt = static_cast<int>(members.size());
        const Eigen::Index n = static_cast<Eigen::Index>(nt) * w;

        fit::DesignMatrix design(n);
        std::vector<int> row_times(static_cast<std::size_t>(n));
        for (Eigen::Index r = 0; r < n; ++r) row_times[static_cast<std::size_t>(r)] = static_cast<int>(r % w);
        design.set_row_times(row_times);

        const auto intercept = design.add_column("(Intercept)", Eigen::VectorXd::Ones(n));

        Eigen::MatrixXd trust_dummies = Eigen::MatrixXd::Zero(n, nt);
        std::vector<std::string> trust_labels;
        for (int i = 0; i < nt; ++i) {
            trust_dummies.block(static_cast<Eigen::Index>(i) * w, i, w, 1).setOnes();
            trust_labels.push_back("trust[" + members[static_cast<std::size_t>(i)] + "]");
        }
        const auto trust_first = design.cols();
        design.add_ridge("trust", trust_labels, trust_dummies);

        const Eigen::MatrixXd br = regional.design(times);
        const auto constraint = fit::CenteringConstraint::for_design(br);
        const Eigen::MatrixXd brc = br * constraint.z;
        Eigen::MatrixXd region_cols(n, brc.cols());
        for (int i = 0; i < nt; ++i) region_cols.block(static_cast<Eigen::Index>(i) * w, 0, w, brc.cols()) = brc;
        std::vector<std::string> region_labels;
        for (Eigen::Index j = 0; j < brc.cols(); ++j) region_labels.push_back("s_region(t)." + std::to_string(j));
        const auto region_first = design.cols();
        design.add_term("s_region(t)", fit::PenaltyKind::spline, region_labels, region_cols,
                        constraint.z.transpose() * regional.penalty() * constraint.z);

        const Eigen::MatrixXd bd = deviation.design(times);
        const Eigen::MatrixXd dev_penalty = deviation.penalty() + deviation.null_space_projector();
        std::vector<Eigen::Index> dev_first(static_cast<std::size_t>(nt));
        int dev_term = -1;
        for (int i = 0; i < nt; ++i) {
            Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(n, bd.cols());
            cols.block(static_cast<Eigen::Index>(i) * w, 0, w, bd.cols()) = bd;
            std::vector<std::string> labels;
            for (Eigen::Index j = 0; j < bd.cols(); ++j) {
                labels.push_back("s_trust(t)[" + members[static_cast<std::size_t>(i)] + "]." + std::to_string(j));
            }
            dev_first[static_cast<std::size_t>(i)] = design.cols();
            if (dev_term < 0) dev_term = design.add_term("s_trust(t)", fit::PenaltyKind::spline, labels, cols, dev_penalty);
            else design.extend_term(dev_term, labels, cols, dev_penalty);
        }
        // Deviation splines start from a stronger penalty than the regional smooth.
        design.set_grid_shift(dev_term, 1.0);

        const auto wday_first = design.cols();
        design.add_ridge("wday", weekday_labels(), weekday_dummies(from, w, nt));

        std::vector<double> y;
        y.reserve(static_cast<std::size_t>(n));
        for (const auto& trust : members) {
            auto c = window_counts(data.trust(trust), from, w);
            y.insert(y.end(), c.begin(), c.end());
        }
        out.models.push_back(fit::fit_penalized_nb(design, y, spec.fit_options));
        out.region_theta[region] = out.models.back().theta;

        for (int i = 0; i < nt; ++i) {
            TrustTerms terms;
            terms.trust = members[static_cast<std::size_t>(i)];
            terms.region = region;
            terms.model = out.models.size() - 1;
            terms.level_row = Eigen::RowVectorXd::Zero(design.cols());
            terms.slope_row = Eigen::RowVectorXd::Zero(design.cols());
            terms.level_row(intercept) = 1.0;
            terms.level_row(trust_first + i) = 1.0;
            terms.level_row.segment(region_first, brc.cols()) = regional.evaluate(w - 1) * constraint.z;
            terms.slope_row.segment(region_first, brc.cols()) = regional.derivative(w - 1) * constraint.z;
            terms.level_row.segment(dev_first[static_cast<std::size_t>(i)], bd.cols()) = deviation.evaluate(w - 1);
            terms.slope_row.segment(dev_first[static_cast<std::size_t>(i)], bd.cols()) = deviation.derivative(w - 1);
            terms.weekday_first = wday_first;
            out.trusts.emplace(terms.trust, std::move(terms));
        }
    }
    return out;
}

UnivariateFit fit_univariate(const AdmissionData& data, const UnivariateModelSpec& spec)
{
    return spec.variant == UnivariateVariant::baseline ? fit_baseline(data, spec) : fit_hgam(data, spec);
}

std::vector<double> predict_log_mean(const UnivariateFit& fit, const TrustId& trust, const std::vector<Date>& dates)
{
    const auto it = fit.trusts.find(trust);
    if (it == fit.trusts.end()) throw ValidationError("trust " + trust + " is not in the fitted model");
    const auto& terms = it->second;
    const auto& beta = fit.models.at(terms.model).coefficients;
    const double level = terms.level_row.dot(beta);
    const double slope = terms.slope_row.dot(beta);
    std::vector<double> out;
    out.reserve(dates.size());
    for (const auto& d : dates) {
        if (d <= fit.t_max) {
            throw ValidationError("forecast date " + d.iso() + " is not after t_max " + fit.t_max.iso());
        }
        const int h = d - fit.t_max;
        out.push_back(level + h * slope + beta(terms.weekday_first + d.weekday()));
    }
    return out;
}

std::vector<forecast::RegionDesign> forecast_designs(const UnivariateFit& fit, const std::vector<Date>& dates)
{
    for (const auto& d : dates) {
        if (d <= fit.t_max) throw ValidationError("forecast date " + d.iso() + " is not after t_max");
    }
    std::map<RegionId, forecast::RegionDesign> by_region;
    std::map<std::pair<RegionId, std::size_t>, std::size_t> model_slot;
    for (const auto& [trust, terms] : fit.trusts) {
        auto& rd = by_region[terms.region];
        rd.region = terms.region;
        rd.dates = dates;
        rd.region_theta = fit.region_theta.at(terms.region);
        auto key = std::make_pair(terms.region, terms.model);
        auto slot = model_slot.find(key);
        if (slot == model_slot.end()) {
            rd.models.push_back(fit.models.at(terms.model));
            slot = model_slot.emplace(key, rd.models.size() - 1).first;
        }
        forecast::TrustRows tr;
        tr.trust = trust;
        tr.model = slot->second;
        tr.rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dates.size()), terms.level_row.size());
        for (std::size_t k = 0; k < dates.size(); ++k) {
            const int h = dates[k] - fit.t_max;
            auto row = tr.rows.row(static_cast<Eigen::Index>(k));
            row = terms.level_row + h * terms.slope_row;
            row(terms.weekday_first + dates[k].weekday()) += 1.0;
        }
        rd.trusts.push_back(std::move(tr));
    }
    std::vector<forecast::RegionDesign> out;
    for (auto& kv : by_region) out.push_back(std::move(kv.second));
    return out;
}

} // namespace hospcast::models
