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

#include "hospcast/backtest/backtest.hpp"

#include "hospcast/core/csv.hpp"
#include "hospcast/core/errors.hpp"
#include "hospcast/core/io.hpp"
#include "hospcast/fit/sampling.hpp"
#include "hospcast/forecast/io.hpp"
#include "hospcast/forecast/kernels.hpp"
#include "hospcast/models/indicator.hpp"
#include "hospcast/models/univariate.hpp"
#include "hospcast/smoothing.hpp"

#include <algorithm>
#include <exception>

namespace hospcast::backtest {

using forecast::QuantileForecast;

BacktestInputs inputs_from_synthetic(const synth::SyntheticData& data)
{
    BacktestInputs in;
    in.admissions = data.admissions;
    in.trust_indicators = map_indicators_to_trusts(data.indicators, data.catchment);
    for (const auto& t : data.catchment.trusts()) in.populations[t] = data.catchment.population(t);
    return in;
}

BacktestInputs load_inputs(const BacktestConfig& config)
{
    if (config.data.scenario) {
        auto scenario = synth::bundled_scenario(*config.data.scenario);
        scenario.seed = config.seed;
        return inputs_from_synthetic(synth::generate(scenario));
    }
    BacktestInputs in;
    in.admissions = io::load_admissions(config.data.admissions);
    const auto catchment = io::load_catchment(config.data.catchment);
    in.trust_indicators = map_indicators_to_trusts(io::load_indicators(config.data.indicators), catchment);
    for (const auto& t : catchment.trusts()) in.populations[t] = catchment.population(t);
    return in;
}

std::vector<Date> resolve_forecast_dates(const BacktestConfig& config, const BacktestInputs& inputs)
{
    const int h = config.max_horizon();
    const Date start = inputs.admissions.start(), end = inputs.admissions.end();
    std::vector<Date> dates = config.forecast_dates;
    if (dates.empty()) {
        Date first = config.first_forecast_date.value_or(
            (start + config.train_window_days + h + config.l_max).following_sunday());
        for (Date d = first; d + (h - 1) <= end; d += 7) dates.push_back(d);
        if (config.n_weeks) {
            if (static_cast<int>(dates.size()) < *config.n_weeks) {
                throw ValidationError("data supports " + std::to_string(dates.size()) + " forecast weeks, " +
                                      std::to_string(*config.n_weeks) + " requested");
            }
            dates.resize(static_cast<std::size_t>(*config.n_weeks));
        }
    }
    if (dates.empty()) throw ValidationError("no forecast dates fit the data span");
    for (const auto& d : dates) {
        if (d - config.train_window_days < start) {
            throw ValidationError("forecast date " + d.iso() + " has fewer than " +
                                  std::to_string(config.train_window_days) + " days of history");
        }
        if (d + (h - 1) > end) throw ValidationError("no truth for forecast date " + d.iso() + " up to its horizon");
    }
    return dates;
}

namespace {

void append_dates(forecast::ForecastSamples& into, const forecast::ForecastSamples& more)
{
    if (into.geographies.size() != more.geographies.size()) throw ValidationError("sample sets differ in geographies");
    for (std::size_t g = 0; g < into.geographies.size(); ++g) {
        auto& a = into.geographies[g];
        const auto& b = more.geographies[g];
        if (a.id != b.id) throw ValidationError("sample sets differ in geographies");
        Eigen::MatrixXd means(a.means.rows() + b.means.rows(), a.means.cols());
        means << a.means, b.means;
        forecast::CountMatrix samples(a.samples.rows() + b.samples.rows(), a.samples.cols());
        samples << a.samples, b.samples;
        a.means = std::move(means);
        a.samples = std::move(samples);
    }
    into.dates.insert(into.dates.end(), more.dates.begin(), more.dates.end());
}

std::vector<Date> day_range(Date first, int n)
{
    std::vector<Date> out;
    for (int i = 0; i < n; ++i) out.push_back(first + i);
    return out;
}

} // namespace

forecast::ForecastSamples simulate_model(const BacktestInputs& inputs, const BacktestConfig& config,
                                         const ModelEntry& model, Date forecast_date)
{
    if (model.is_ensemble()) throw ValidationError(model.name + " is an ensemble, not a fitted model");
    const Date t_max = forecast_date - 1;
    const auto data = inputs.admissions.window(inputs.admissions.start(), t_max);
    const auto& hierarchy = data.hierarchy();
    const int h = config.max_horizon();

    if (model.kind == ModelKind::univariate_baseline || model.kind == ModelKind::univariate_hgam) {
        models::UnivariateModelSpec spec;
        spec.variant = model.kind == ModelKind::univariate_baseline ? models::UnivariateVariant::baseline
                                                                   : models::UnivariateVariant::hierarchical;
        spec.knot_spacing_days = config.knot_spacing_days;
        spec.train_window_days = config.train_window_days;
        const auto fit = models::fit_univariate(data, spec);
        const auto designs = models::forecast_designs(fit, day_range(forecast_date, h));
        return forecast::simulate_forecast(model.name, designs, hierarchy, config.n_samples,
                                           fit::derive_seed(config.seed, {model.name, forecast_date.iso()}));
    }

    const auto panel = inputs.trust_indicators.truncated(t_max);
    std::optional<forecast::ForecastSamples> out;
    for (int bucket : {7, 14, 21}) {
        if (bucket > h) break;
        models::IndicatorModelSpec spec;
        spec.lag.horizon = bucket;
        spec.lag.max_lag = config.l_max;
        spec.lag.indicators = model.indicators;
        spec.train_window_days = config.train_window_days;
        spec.changepoint_days = config.changepoint_days;
        spec.loess_span_days = config.loess_span_days;
        spec.transform = config.indicator_transform;
        const auto fit = models::fit_indicator_model(data, panel, inputs.populations, spec);
        const auto designs = models::forecast_designs(fit, day_range(forecast_date + (bucket - 7), 7));
        auto s = forecast::simulate_forecast(
            model.name, designs, hierarchy, config.n_samples,
            fit::derive_seed(config.seed, {model.name, forecast_date.iso(), std::to_string(bucket)}));
        if (!out) out = std::move(s);
        else append_dates(*out, s);
    }
    out->forecast_date = forecast_date;
    return *out;
}

QuantileForecast forecast_model(const BacktestInputs& inputs, const BacktestConfig& config, const ModelEntry& model,
                                Date forecast_date)
{
    const auto samples = simulate_model(inputs, config, model, forecast_date);
    auto q = forecast::to_quantiles(samples);
    const auto national = forecast::to_quantiles(forecast::national_sum(samples));
    q.cells.insert(q.cells.end(), national.cells.begin(), national.cells.end());
    return q;
}

namespace {

/// Member forecasts restricted to the weight window, scored against truth
/// strictly before `cutoff`.
QuantileForecast weight_window(const QuantileForecast& f, int days, Date cutoff)
{
    QuantileForecast out = f;
    out.cells.clear();
    for (const auto& c : f.cells) {
        if (c.level != forecast::GeographyLevel::trust) continue;
        if (c.target_date - f.forecast_date + 1 > days || c.target_date >= cutoff) continue;
        out.cells.push_back(c);
    }
    return out;
}

scoring::Truth truth_before(const scoring::Truth& truth, Date cutoff)
{
    scoring::Truth out;
    for (const auto& [k, v] : truth) {
        if (std::get<2>(k) < cutoff) out.emplace(k, v);
    }
    return out;
}

} // namespace

EnsembleRun run_ensemble(const ModelEntry& ensemble, const std::vector<WeekForecasts>& weeks,
                         const std::vector<std::string>& members, const scoring::Truth& truth,
                         const BacktestConfig& config)
{
    if (!ensemble.is_ensemble()) throw ValidationError(ensemble.name + " is not an ensemble");
    EnsembleRun out;
    const auto m = members.size();
    for (std::size_t b = 0; b < weeks.size(); ++b) {
        const auto& week = weeks[b];
        if (week.members.size() != m) throw ValidationError("week " + week.forecast_date.iso() + " lacks members");
        if (ensemble.kind == ModelKind::ensemble_mean) {
            out.forecasts.push_back(ensembles::ensemble_mean(week.members, ensemble.name));
            continue;
        }
        ensembles::EnsembleWeights w;
        if (b == 0) {
            w.models = members;
            w.weights.assign(m, 1.0 / static_cast<double>(m));
            w.method = ensemble.kind == ModelKind::ensemble_score ? "score" : "regression-equal";
            w.warnings.push_back("first week: equal weights");
        } else {
            const auto& prev = weeks[b - 1];
            const auto known = truth_before(truth, week.forecast_date);
            std::vector<QuantileForecast> windowed;
            for (const auto& f : prev.members) {
                windowed.push_back(weight_window(f, config.weight_window_days, week.forecast_date));
            }
            scoring::ScoreOptions opts;
            opts.exclude_first_week = false;
            opts.levels = {forecast::GeographyLevel::trust};
            if (ensemble.kind == ModelKind::ensemble_score) {
                std::vector<double> q;
                for (const auto& f : windowed) {
                    const auto table = scoring::build_score_table({f}, known, opts);
                    double s = 0.0;
                    for (const auto& r : table.records) s += r.wis;
                    if (table.records.empty()) throw ValidationError("member " + f.model + " has no scored cells");
                    q.push_back(s);
                }
                w = ensembles::score_weights(members, q, config.proportional_score_weights);
            } else {
                const auto& cells = windowed.front().cells;
                Eigen::MatrixXd x(static_cast<Eigen::Index>(cells.size()), static_cast<Eigen::Index>(m));
                Eigen::VectorXd y(static_cast<Eigen::Index>(cells.size()));
                std::vector<decltype(windowed.front().index())> idx;
                for (const auto& f : windowed) idx.push_back(f.index());
                for (std::size_t c = 0; c < cells.size(); ++c) {
                    const auto key = std::make_tuple(cells[c].level, cells[c].geography_id, cells[c].target_date);
                    const auto t = known.find(key);
                    if (t == known.end()) throw ValidationError("no truth for " + cells[c].geography_id);
                    y(static_cast<Eigen::Index>(c)) = t->second;
                    for (std::size_t j = 0; j < m; ++j) {
                        const auto& f = windowed[j];
                        x(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) = f.median(f.cells.at(idx[j].at(key)));
                    }
                }
                ensembles::RegressionOptions ro;
                ro.mode = config.regression_mode;
                ro.prior_scale = config.prior_scale;
                w = ensembles::regression_weights(members, x, y, ro);
            }
        }
        w.week_start = week.forecast_date;
        out.forecasts.push_back(ensembles::combine(week.members, w.weights, ensemble.name));
        out.weights.push_back(std::move(w));
    }
    return out;
}

scoring::ScoreTable score_forecasts(const std::vector<QuantileForecast>& forecasts, const scoring::Truth& truth,
                                    const std::vector<WaveWindow>& phases, const std::vector<int>& horizons)
{
    scoring::ScoreOptions opts;
    opts.phases = phases;
    auto table = scoring::build_score_table(forecasts, truth, opts);
    std::erase_if(table.records, [&](const scoring::ScoreRecord& r) {
        return std::find(horizons.begin(), horizons.end(), r.horizon) == horizons.end();
    });
    return table;
}

BacktestResult run_backtest(const BacktestConfig& config, const BacktestInputs& inputs)
{
    config.validate();
    BacktestResult result;
    result.forecast_dates = resolve_forecast_dates(config, inputs);
    result.truth = scoring::truth_from_admissions(inputs.admissions);

    const auto national = inputs.admissions.national_totals();
    try {
        WaveDetectionOptions wopts;
        wopts.offset_days = config.offset_days;
        wopts.peak_window_days = config.peak_window_days;
        result.phases = detect_wave_phases(national, inputs.admissions.start(), wopts);
    } catch (const ValidationError& e) {
        result.warnings.push_back(std::string("no wave phases: ") + e.what());
    }

    std::vector<ModelEntry> fitted, pooled;
    for (const auto& e : config.models) {
        auto m = resolve_model(e);
        result.model_names.push_back(m.name);
        (m.is_ensemble() ? pooled : fitted).push_back(std::move(m));
    }

    // per model, per week
    std::vector<std::vector<QuantileForecast>> member_fc(fitted.size());
    for (const auto& date : result.forecast_dates) {
        std::vector<QuantileForecast> week(fitted.size());
        std::vector<std::exception_ptr> errors(fitted.size());
        const int n = static_cast<int>(fitted.size());
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) {
            try {
                week[static_cast<std::size_t>(i)] = forecast_model(inputs, config, fitted[static_cast<std::size_t>(i)], date);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
        for (std::size_t i = 0; i < fitted.size(); ++i) member_fc[i].push_back(std::move(week[i]));
    }

    std::map<std::string, std::size_t> fitted_index;
    for (std::size_t i = 0; i < fitted.size(); ++i) fitted_index[fitted[i].name] = i;
    if (!pooled.empty()) {
        for (std::size_t b = 0; b < result.forecast_dates.size(); ++b) {
            WeekForecasts w;
            w.forecast_date = result.forecast_dates[b];
            for (const auto& name : config.ensemble_members) w.members.push_back(member_fc[fitted_index.at(name)][b]);
            result.member_weeks.push_back(std::move(w));
        }
    }
    std::map<std::string, std::vector<QuantileForecast>> ensemble_fc;
    for (const auto& e : pooled) {
        auto run = run_ensemble(e, result.member_weeks, config.ensemble_members, result.truth, config);
        ensemble_fc[e.name] = std::move(run.forecasts);
        for (auto& w : run.weights) result.weights.push_back(std::move(w));
    }

    for (const auto& name : result.model_names) {
        const auto it = fitted_index.find(name);
        auto& src = it != fitted_index.end() ? member_fc[it->second] : ensemble_fc.at(name);
        for (auto& f : src) result.forecasts.push_back(std::move(f));
    }

    result.scores = score_forecasts(result.forecasts, result.truth, result.phases, config.horizons);

    std::map<std::pair<std::string, Date>, std::vector<const scoring::ScoreRecord*>> by_week;
    for (const auto& r : result.scores.records) {
        if (r.level == forecast::GeographyLevel::trust && r.days_ahead <= 14) by_week[{r.model, r.forecast_date}].push_back(&r);
    }
    for (const auto& name : result.model_names) {
        for (const auto& date : result.forecast_dates) {
            const auto it = by_week.find({name, date});
            if (it == by_week.end()) continue;
            TimeseriesRow row;
            row.model = name;
            row.week_start = date;
            for (const auto* r : it->second) {
                row.wis += r->wis;
                row.bias += r->bias;
                row.coverage_95 += r->covered_95 ? 1.0 : 0.0;
            }
            const double n = static_cast<double>(it->second.size());
            row.wis /= n;
            row.bias /= n;
            row.coverage_95 /= n;
            row.hospitalisation_ratio =
                hospitalisation_ratio(national, static_cast<std::size_t>(date - inputs.admissions.start()));
            result.timeseries.push_back(std::move(row));
        }
    }
    return result;
}

BacktestResult run_backtest(const BacktestConfig& config)
{
    config.validate();
    return run_backtest(config, load_inputs(config));
}

void write_timeseries(const std::filesystem::path& path, const std::vector<TimeseriesRow>& rows)
{
    csv::Writer w(path, {"model", "week_start", "wis", "bias", "coverage_95", "hospitalisation_ratio"});
    for (const auto& r : rows) {
        w.row({r.model, r.week_start.iso(), csv::format(r.wis), csv::format(r.bias), csv::format(r.coverage_95),
               r.hospitalisation_ratio ? csv::format(*r.hospitalisation_ratio) : "NA"});
    }
}

void write_outputs(const BacktestResult& result, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    forecast::write_forecasts(dir / "forecasts.csv", result.forecasts);
    scoring::write_scores(dir / "scores.csv", result.scores);
    scoring::write_summary(dir / "summary.csv", result.scores);
    ensembles::write_weights(dir / "weights.csv", result.weights);
    write_timeseries(dir / "timeseries.csv", result.timeseries);
    if (!result.phases.empty()) io::write_phases(dir / "phases.csv", result.phases);
}

} // namespace hospcast::backtest
