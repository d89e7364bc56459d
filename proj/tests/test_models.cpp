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

#include "hospcast/core/errors.hpp"
#include "hospcast/fit/sampling.hpp"
#include "hospcast/models/indicator.hpp"
#include "hospcast/models/univariate.hpp"
#include "hospcast/smoothing.hpp"
#include "hospcast/synth.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace hospcast;
using namespace hospcast::models;
using hospcast::testing::exponential_counts;
using hospcast::testing::make_admissions;

namespace {

const Date origin = Date::parse("2022-03-06");

std::vector<Date> days_after(Date t_max, int n)
{
    std::vector<Date> out;
    for (int h = 1; h <= n; ++h) out.push_back(t_max + h);
    return out;
}

UnivariateModelSpec spec_of(UnivariateVariant v)
{
    UnivariateModelSpec s;
    s.variant = v;
    return s;
}

double max_abs_coefficient(const fit::FittedModel& m, const std::string& prefix)
{
    double out = 0;
    for (std::size_t j = 0; j < m.labels.size(); ++j) {
        if (m.labels[j].rfind(prefix, 0) == 0) out = std::max(out, std::abs(m.coefficients(static_cast<Eigen::Index>(j))));
    }
    return out;
}

} // namespace

TEST_CASE("spec validation")
{
    UnivariateModelSpec s;
    s.train_window_days = 20;
    CHECK_THROWS_AS(s.validate(), ValidationError);
    LagDesignSpec l;
    l.indicators = {"x"};
    l.horizon = 10;
    CHECK_THROWS_AS(l.validate(), ValidationError);
    l.horizon = 14;
    l.indicators.clear();
    CHECK_THROWS_AS(l.validate(), ValidationError);
}

TEST_CASE("baseline recovers per-trust growth rates")
{
    auto data = make_admissions(origin, {{"A", "R1"}, {"B", "R1"}, {"C", "R2"}},
                                {exponential_counts(20, 0.05, 70), exponential_counts(200, -0.03, 70),
                                 std::vector<std::int64_t>(70, 40)});
    auto fit = fit_baseline(data, spec_of(UnivariateVariant::baseline));
    CHECK(std::abs(fit.growth_rate("A") - 0.05) < 0.01);
    CHECK(std::abs(fit.growth_rate("B") + 0.03) < 0.01);
    CHECK(std::abs(fit.growth_rate("C")) < 0.01);
    CHECK(fit.models.size() == 3);
}

TEST_CASE("hierarchical model with a shared trend has small deviations")
{
    auto data = make_admissions(origin, {{"A", "R1"}, {"B", "R1"}, {"C", "R1"}},
                                {exponential_counts(20, 0.04, 70), exponential_counts(60, 0.04, 70),
                                 exponential_counts(35, 0.04, 70)});
    auto fit = fit_hgam(data, spec_of(UnivariateVariant::hierarchical));
    REQUIRE(fit.models.size() == 1);
    // Partition of unity bounds each deviation curve by its largest coefficient.
    CHECK(max_abs_coefficient(fit.models[0], "s_trust(t)") < 0.05);
    for (const auto* t : {"A", "B", "C"}) CHECK(std::abs(fit.growth_rate(t) - 0.04) < 0.01);
}

TEST_CASE("hierarchical model lets an outlier trust deviate")
{
    auto data = make_admissions(origin, {{"A", "R1"}, {"B", "R1"}, {"C", "R1"}, {"D", "R1"}},
                                {exponential_counts(20, 0.04, 84), exponential_counts(30, 0.04, 84),
                                 exponential_counts(25, 0.04, 84), exponential_counts(300, -0.03, 84)});
    auto fit = fit_hgam(data, spec_of(UnivariateVariant::hierarchical));
    CHECK(fit.growth_rate("D") < 0.0);
    CHECK(std::abs(fit.growth_rate("D") + 0.03) < 0.02);
    CHECK(std::abs(fit.growth_rate("A") - 0.04) < 0.01);

    // Held-out log-mean error a week ahead stays small for both groups.
    const auto& d = data.trust("D");
    auto lm = predict_log_mean(fit, "D", {data.end() + 7});
    const double truth = std::log(300.0) - 0.03 * (d.counts.size() - 1 + 7);
    CHECK(std::abs(lm[0] - truth) < 0.1);
}

TEST_CASE("hierarchical model rejects single-trust regions")
{
    auto data = make_admissions(origin, {{"A", "R1"}}, {exponential_counts(20, 0.01, 70)});
    try {
        fit_hgam(data, spec_of(UnivariateVariant::hierarchical));
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find(">= 2 trusts required") != std::string::npos);
    }
}

TEST_CASE("log-mean extrapolation closed form")
{
    UnivariateFit fit;
    fit.t_max = Date::parse("2022-06-11");
    fit::FittedModel m;
    m.coefficients = Eigen::VectorXd::Zero(9);
    m.coefficients(0) = std::log(100.0);
    m.coefficients(1) = 0.1;
    fit.models.push_back(m);
    TrustTerms terms;
    terms.trust = "T";
    terms.region = "R";
    terms.level_row = Eigen::RowVectorXd::Unit(9, 0);
    terms.slope_row = Eigen::RowVectorXd::Unit(9, 1);
    terms.weekday_first = 2;
    fit.trusts["T"] = terms;
    auto lm = predict_log_mean(fit, "T", {fit.t_max + 7});
    CHECK(std::exp(lm[0]) == doctest::Approx(201.375).epsilon(1e-5));
    CHECK_THROWS_AS(predict_log_mean(fit, "T", {fit.t_max}), ValidationError);

    fit.models[0].coefficients(1) = 0.0;
    for (int w = 0; w < 7; ++w) fit.models[0].coefficients(2 + w) = 0.1 * w - 0.3;
    auto flat = predict_log_mean(fit, "T", days_after(fit.t_max, 21));
    for (std::size_t h = 7; h < flat.size(); ++h) CHECK(flat[h] == doctest::Approx(flat[h - 7]));
}

TEST_CASE("fitted forecasts are affine in h after removing weekday effects")
{
    auto data = make_admissions(origin, {{"A", "R1"}, {"B", "R1"}},
                                {exponential_counts(20, 0.05, 70), exponential_counts(40, 0.02, 70)});
    for (auto v : {UnivariateVariant::baseline, UnivariateVariant::hierarchical}) {
        auto fit = fit_univariate(data, spec_of(v));
        const auto dates = days_after(fit.t_max, 21);
        for (const auto* t : {"A", "B"}) {
            auto lm = predict_log_mean(fit, t, dates);
            auto wd = fit.weekday_effects(t);
            std::vector<double> adj;
            for (std::size_t i = 0; i < dates.size(); ++i) adj.push_back(lm[i] - wd[static_cast<std::size_t>(dates[i].weekday())]);
            for (std::size_t i = 2; i < adj.size(); ++i) CHECK(std::abs(adj[i] - 2 * adj[i - 1] + adj[i - 2]) < 1e-9);
            CHECK(adj[0] == doctest::Approx(fit.level(t) + fit.growth_rate(t)));
        }
    }
}

TEST_CASE("lagged design column counts")
{
    LagDesignSpec s;
    s.horizon = 7;
    s.max_lag = 2;
    s.indicators = {"a", "b"};
    CHECK(lagged_indicator_columns(s, 7) == 48);
    s.max_lag = 0;
    s.indicators = {"a"};
    s.region_interactions = false;
    CHECK(lagged_indicator_columns(s, 7) == 1);
}

namespace {

synth::WaveScenario lead_scenario(int lead, double noise, double theta)
{
    auto s = synth::bundled_scenario("ba45-like");
    s.theta = theta;
    s.indicators = {{"lead", lead, noise, 1.0}};
    return s;
}

struct PanelData {
    AdmissionData admissions;
    IndicatorPanel panel;
    std::map<TrustId, double> populations;
    synth::SyntheticData raw;
};

PanelData panel_data(const synth::WaveScenario& s)
{
    PanelData p;
    p.raw = synth::generate(s);
    p.admissions = p.raw.admissions;
    p.panel = map_indicators_to_trusts(p.raw.indicators, p.raw.catchment);
    for (const auto& t : p.raw.catchment.trusts()) p.populations[t] = p.raw.catchment.population(t);
    return p;
}

IndicatorModelSpec indicator_spec(int h, std::vector<std::string> inds)
{
    IndicatorModelSpec spec;
    spec.lag.horizon = h;
    spec.lag.indicators = std::move(inds);
    return spec;
}

// Mean of the fitted log-mean minus log(H-hat) over all rows, weekdays averaged.
double overall_level(const CorrectionFit& c, const std::vector<std::vector<double>>& trend, int changepoint)
{
    const auto& b = c.model.coefficients;
    const double wday = b.segment(c.weekday_first, 7).mean();
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < trend.size(); ++i) {
        const auto days = static_cast<int>(trend[i].size());
        for (int t = 0; t < days; ++t) {
            const double lh = std::log(trend[i][static_cast<std::size_t>(t)]);
            const double beta = t < days - changepoint ? c.beta_historic() : c.beta_recent();
            sum += b(0) + b(c.trust_first + static_cast<Eigen::Index>(i)) + wday + beta * lh - lh;
            ++n;
        }
    }
    return sum / n;
}

} // namespace

TEST_CASE("lagged design needs enough indicator history")
{
    auto p = panel_data(lead_scenario(10, 0.0, 20));
    auto spec = indicator_spec(14, {"lead"});
    const Date first = p.admissions.start();
    auto prepared = prepare_indicators(p.panel, p.admissions.hierarchy().trusts(), {"lead"}, first,
                                       first + 80);
    CHECK_THROWS_AS(build_lagged_design(prepared, p.admissions.hierarchy(), p.populations, spec.lag, first + 11, first + 40),
                    ValidationError);
    auto ok = build_lagged_design(prepared, p.admissions.hierarchy(), p.populations, spec.lag, first + 21, first + 40);
    CHECK(ok.design.rows() == 20 * static_cast<Eigen::Index>(p.admissions.series().size()));
}

TEST_CASE("indicator leading admissions by h gives an accurate trend forecast")
{
    auto p = panel_data(lead_scenario(14, 0.0, std::numeric_limits<double>::infinity()));
    // Origins away from the onset and the turn of the wave.
    for (int offset : {91, 112, 126, 140}) {
        const Date t_max = p.admissions.start() + offset;
        auto fit = fit_indicator_model(p.admissions.window(p.admissions.start(), t_max), p.panel.truncated(t_max),
                                       p.populations, indicator_spec(14, {"lead"}));
        int good = 0, total = 0;
        for (const auto& s : p.admissions.series()) {
            std::vector<double> c(s.counts.begin(), s.counts.end());
            auto smooth = loess_smooth(c, 21).values;
            const auto& f = fit.trend_forecast.at(s.trust_id);
            for (int h = 1; h <= 14; ++h) {
                const double realised = smooth[static_cast<std::size_t>((t_max + h) - s.start)];
                ++total;
                if (std::abs(f[static_cast<std::size_t>(h - 1)] / realised - 1.0) < 0.10) ++good;
            }
        }
        CHECK_MESSAGE(static_cast<double>(good) / total > 0.9, "origin day " << offset);
    }
}

TEST_CASE("pure-noise indicators give an intercept-only trend")
{
    auto s = lead_scenario(10, 0.0, 20);
    s.rates = {{{0, 0.0}}};
    auto p = panel_data(s);
    // Replace the indicator with independent noise.
    IndicatorPanel noise;
    fit::Rng rng(5);
    std::normal_distribution<double> z(0.0, 1.0);
    for (const auto& [key, series] : p.panel.all()) {
        auto copy = series;
        for (auto& v : copy.values) v = 10.0 + z(rng);
        noise.add(copy);
    }
    const Date t_max = p.admissions.start() + 100;
    auto fit = fit_indicator_model(p.admissions.window(p.admissions.start(), t_max), noise, p.populations,
                                   indicator_spec(7, {"lead"}));
    for (std::size_t j = 0; j < fit.trend.labels.size(); ++j) {
        if (fit.trend.labels[j].find("@lag") != std::string::npos) {
            CHECK_MESSAGE(fit.trend.coefficients(static_cast<Eigen::Index>(j)) == 0.0, fit.trend.labels[j]);
        }
    }
}

TEST_CASE("infinite lambda gives intercepts plus log population")
{
    auto p = panel_data(lead_scenario(10, 0.0, 20));
    const Date t_max = p.admissions.start() + 100;
    auto spec = indicator_spec(7, {"lead"});
    spec.lasso.lambda_path = std::vector<double>{1e9};
    auto fit = fit_indicator_model(p.admissions.window(p.admissions.start(), t_max), p.panel.truncated(t_max),
                                   p.populations, spec);
    for (const auto& [trust, f] : fit.trend_forecast) {
        for (double v : f) CHECK(v == doctest::Approx(f.front()).epsilon(1e-12));
    }
}

TEST_CASE("correction stage recovers unit coefficients")
{
    const Date start = Date::parse("2022-04-03");
    const int days = 56;
    fit::Rng rng(12);
    std::vector<std::vector<double>> counts(3), trend(3), doubled(3);
    for (int i = 0; i < 3; ++i) {
        for (int t = 0; t < days; ++t) {
            const double mu = (80.0 + 40 * i) * std::exp(0.03 * t - 0.0006 * t * t);
            trend[static_cast<std::size_t>(i)].push_back(mu);
            doubled[static_cast<std::size_t>(i)].push_back(2 * mu);
            counts[static_cast<std::size_t>(i)].push_back(static_cast<double>(fit::sample_negative_binomial(mu, 50.0, rng)));
        }
    }
    const std::vector<TrustId> trusts{"A", "B", "C"};
    auto c = fit_correction(trusts, counts, trend, start, 14);
    CHECK(std::abs(c.beta_historic() - 1.0) < 0.05);
    CHECK(std::abs(c.beta_recent() - 1.0) < 0.05);
    CHECK(std::abs(overall_level(c, trend, 14)) < 0.1);

    auto d = fit_correction(trusts, counts, doubled, start, 14);
    CHECK(std::abs(d.beta_recent() - 1.0) < 0.05);
    CHECK(std::abs(overall_level(d, doubled, 14) + std::log(2.0)) < 0.1);

    std::vector<std::vector<double>> short_counts(3, std::vector<double>(10, 5.0));
    try {
        fit_correction(trusts, short_counts, short_counts, start, 14);
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("span shorter than changepoint") != std::string::npos);
    }
}

TEST_CASE("indicator forecasts stay within reach and beat a flat line")
{
    auto p = panel_data(lead_scenario(10, 0.0, 20));
    double model_err = 0, flat_err = 0;
    int n = 0;
    for (int offset : {84, 91, 98, 105}) {
        const Date t_max = p.admissions.start() + offset;
        auto fit = fit_indicator_model(p.admissions.window(p.admissions.start(), t_max), p.panel.truncated(t_max),
                                       p.populations, indicator_spec(14, {"lead"}));
        CHECK_THROWS_AS(forecast_indicator_model(fit, p.admissions.series().front().trust_id, {t_max + 15}),
                        ValidationError);
        for (const auto& s : p.admissions.series()) {
            auto lm = forecast_indicator_model(fit, s.trust_id, {t_max + 14});
            const double truth = p.raw.true_log_mean.at(s.trust_id)[static_cast<std::size_t>(offset + 14)];
            const double last = p.raw.true_log_mean.at(s.trust_id)[static_cast<std::size_t>(offset)];
            model_err += std::abs(lm[0] - truth);
            flat_err += std::abs(last - truth);
            ++n;
        }
    }
    MESSAGE("indicator MALE " << model_err / n << ", flat MALE " << flat_err / n);
    CHECK(model_err < flat_err);
}

TEST_CASE("combined model uses the same pipeline with more indicators")
{
    auto s = lead_scenario(10, 0.0, 20);
    s.indicators.push_back({"other", 7, 0.1, 2.0});
    auto p = panel_data(s);
    const Date t_max = p.admissions.start() + 100;
    auto data = p.admissions.window(p.admissions.start(), t_max);
    auto one = fit_indicator_model(data, p.panel.truncated(t_max), p.populations, indicator_spec(7, {"lead"}));
    auto two = fit_indicator_model(data, p.panel.truncated(t_max), p.populations, indicator_spec(7, {"lead", "other"}));
    const int regions = 2;
    CHECK(two.trend.labels.size() - one.trend.labels.size() ==
          static_cast<std::size_t>(lagged_indicator_columns(indicator_spec(7, {"other"}).lag, regions)));
}
