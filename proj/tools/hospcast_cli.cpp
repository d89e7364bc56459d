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
#include "hospcast/core/errors.hpp"
#include "hospcast/core/io.hpp"
#include "hospcast/forecast/io.hpp"
#include "hospcast/forecast/kernels.hpp"
#include "hospcast/models/indicator.hpp"
#include "hospcast/models/univariate.hpp"
#include "hospcast/smoothing.hpp"
#include "hospcast/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

using namespace hospcast;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;

    std::string scenario;
    std::string admissions, indicators, catchment;
    std::string model = "univariate-hgam";
    std::string forecast_date;
    std::string forecasts_path;
    std::string phases_path;
    std::vector<int> horizons;
};

backtest::BacktestConfig make_config(const Options& o)
{
    backtest::BacktestConfig c;
    if (!o.config_path.empty()) c = backtest::load_config(o.config_path);
    if (o.seed) c.seed = *o.seed;
    if (!o.out_dir.empty()) c.output_dir = o.out_dir;
    if (!o.scenario.empty()) {
        c.data = {};
        c.data.scenario = o.scenario;
    }
    if (!o.admissions.empty()) {
        c.data.scenario.reset();
        c.data.admissions = o.admissions;
        c.data.indicators = o.indicators;
        c.data.catchment = o.catchment;
    }
    if (!o.horizons.empty()) c.horizons = o.horizons;
    if (!c.data.scenario && c.data.admissions.empty()) c.data.scenario = "ba45-like";
    c.validate();
    return c;
}

Date origin_date(const Options& o, const backtest::BacktestConfig& c, const backtest::BacktestInputs& in)
{
    if (!o.forecast_date.empty()) return Date::parse(o.forecast_date);
    return backtest::resolve_forecast_dates(c, in).back();
}

int run_synth(const Options& o)
{
    auto scenario = synth::bundled_scenario(o.scenario.empty() ? "ba45-like" : o.scenario);
    scenario.seed = o.seed.value_or(backtest::BacktestConfig{}.seed);
    const std::filesystem::path dir = o.out_dir.empty() ? "." : o.out_dir;
    synth::write_synthetic(dir, synth::generate(scenario));
    std::cout << "wrote admissions.csv, indicators.csv, catchment.csv, truth.csv to " << dir.string() << "\n";
    return 0;
}

int run_fit(const Options& o)
{
    const auto c = make_config(o);
    const auto in = backtest::load_inputs(c);
    const Date fd = origin_date(o, c, in);
    const auto model = backtest::resolve_model(o.model);
    const auto data = in.admissions.window(in.admissions.start(), fd - 1);
    nlohmann::json j;
    j["model"] = model.name;
    j["t_max"] = (fd - 1).iso();
    if (model.kind == backtest::ModelKind::univariate_baseline || model.kind == backtest::ModelKind::univariate_hgam) {
        models::UnivariateModelSpec spec;
        spec.variant = model.kind == backtest::ModelKind::univariate_baseline ? models::UnivariateVariant::baseline
                                                                             : models::UnivariateVariant::hierarchical;
        spec.knot_spacing_days = c.knot_spacing_days;
        spec.train_window_days = c.train_window_days;
        const auto fit = models::fit_univariate(data, spec);
        for (const auto& [trust, terms] : fit.trusts) {
            j["trusts"][trust] = {{"growth_rate", fit.growth_rate(trust)},
                                  {"level", fit.level(trust)},
                                  {"weekday_effects", fit.weekday_effects(trust)},
                                  {"theta", fit.models[terms.model].theta}};
        }
        for (const auto& [region, theta] : fit.region_theta) j["region_theta"][region] = theta;
    } else if (model.kind == backtest::ModelKind::indicator) {
        models::IndicatorModelSpec spec;
        spec.lag.horizon = c.max_horizon();
        spec.lag.max_lag = c.l_max;
        spec.lag.indicators = model.indicators;
        spec.train_window_days = c.train_window_days;
        spec.changepoint_days = c.changepoint_days;
        spec.loess_span_days = c.loess_span_days;
        spec.transform = c.indicator_transform;
        const auto fit = models::fit_indicator_model(data, in.trust_indicators.truncated(fd - 1), in.populations, spec);
        j["horizon"] = spec.lag.horizon;
        j["lambda"] = fit.trend.lambda;
        j["intercept_only"] = fit.trend.intercept_only;
        for (std::size_t i = 0; i < fit.trend.labels.size(); ++i) {
            if (fit.trend.coefficients(static_cast<Eigen::Index>(i)) != 0.0) {
                j["trend_coefficients"][fit.trend.labels[i]] = fit.trend.coefficients(static_cast<Eigen::Index>(i));
            }
        }
        for (const auto& [region, cf] : fit.correction) {
            j["correction"][region] = {{"beta_historic", cf.beta_historic()},
                                       {"beta_recent", cf.beta_recent()},
                                       {"theta", cf.model.theta}};
        }
    } else {
        throw ValidationError("fit takes a single model, not an ensemble");
    }
    const std::filesystem::path dir = c.output_dir;
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "fit.json") << j.dump(2) << "\n";
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_forecast(const Options& o)
{
    const auto c = make_config(o);
    const auto in = backtest::load_inputs(c);
    const Date fd = origin_date(o, c, in);
    const auto q = backtest::forecast_model(in, c, backtest::resolve_model(o.model), fd);
    std::filesystem::create_directories(c.output_dir);
    forecast::write_forecasts(c.output_dir / "forecasts.csv", {q});
    std::cout << "wrote " << (c.output_dir / "forecasts.csv").string() << "\n";
    return 0;
}

int run_backtest(const Options& o)
{
    const auto c = make_config(o);
    const auto result = backtest::run_backtest(c);
    backtest::write_outputs(result, c.output_dir);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "backtest over " << result.forecast_dates.size() << " weeks written to " << c.output_dir.string()
              << "\n";
    return 0;
}

int run_score(const Options& o)
{
    if (o.forecasts_path.empty() || o.admissions.empty()) {
        throw ValidationError("score needs --forecasts and --admissions");
    }
    const auto forecasts = forecast::load_forecasts(o.forecasts_path);
    const auto truth = scoring::truth_from_admissions(io::load_admissions(o.admissions));
    std::vector<WaveWindow> phases;
    if (!o.phases_path.empty()) phases = io::load_phases(o.phases_path);
    const auto horizons = o.horizons.empty() ? std::vector<int>{7, 14, 21} : o.horizons;
    const auto table = backtest::score_forecasts(forecasts, truth, phases, horizons);
    const std::filesystem::path dir = o.out_dir.empty() ? "." : o.out_dir;
    std::filesystem::create_directories(dir);
    scoring::write_scores(dir / "scores.csv", table);
    scoring::write_summary(dir / "summary.csv", table);
    std::cout << "scored " << table.records.size() << " cells\n";
    return 0;
}

int run_phases(const Options& o)
{
    AdmissionData data;
    backtest::BacktestConfig c;
    if (!o.admissions.empty()) {
        data = io::load_admissions(o.admissions);
        if (!o.config_path.empty()) c = backtest::load_config(o.config_path);
    } else {
        c = make_config(o);
        data = backtest::load_inputs(c).admissions;
    }
    WaveDetectionOptions w;
    w.offset_days = c.offset_days;
    w.peak_window_days = c.peak_window_days;
    const auto phases = detect_wave_phases(data.national_totals(), data.start(), w);
    const std::filesystem::path dir = o.out_dir.empty() ? "." : o.out_dir;
    std::filesystem::create_directories(dir);
    io::write_phases(dir / "phases.csv", phases);
    for (const auto& p : phases) {
        std::cout << p.wave_name << " " << to_string(p.phase) << " " << p.start.iso() << " " << p.end.iso() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hospital admissions forecasting and backtesting"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", o.seed, "Master random seed");
    app.add_option("--out-dir", o.out_dir, "Output directory");

    auto add_data = [&](CLI::App* sub) {
        sub->add_option("--scenario", o.scenario, "Bundled synthetic scenario");
        sub->add_option("--admissions", o.admissions, "admissions.csv");
        sub->add_option("--indicators", o.indicators, "indicators.csv");
        sub->add_option("--catchment", o.catchment, "catchment.csv");
    };

    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic scenario's CSVs");
    synth_cmd->add_option("--scenario", o.scenario, "ba45-like, winter-like, flat or exponential");

    auto* fit_cmd = app.add_subcommand("fit", "Fit one model at one origin and print its parameters");
    add_data(fit_cmd);
    fit_cmd->add_option("--model", o.model, "Model name");
    fit_cmd->add_option("--forecast-date", o.forecast_date, "First forecast day; data up to the day before");

    auto* fc_cmd = app.add_subcommand("forecast", "Write forecasts.csv for one model and origin");
    add_data(fc_cmd);
    fc_cmd->add_option("--model", o.model, "Model name");
    fc_cmd->add_option("--forecast-date", o.forecast_date, "First forecast day");
    fc_cmd->add_option("--horizons", o.horizons, "Subset of 7 14 21");

    auto* bt_cmd = app.add_subcommand("backtest", "Run the rolling weekly backtest");
    add_data(bt_cmd);
    bt_cmd->add_option("--horizons", o.horizons, "Subset of 7 14 21");

    auto* score_cmd = app.add_subcommand("score", "Score forecasts.csv against admissions");
    score_cmd->add_option("--forecasts", o.forecasts_path, "forecasts.csv")->required();
    score_cmd->add_option("--admissions", o.admissions, "admissions.csv")->required();
    score_cmd->add_option("--phases", o.phases_path, "phases.csv");
    score_cmd->add_option("--horizons", o.horizons, "Subset of 7 14 21");

    auto* phases_cmd = app.add_subcommand("phases", "Detect growth/peak/decline windows");
    add_data(phases_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 2;
    }

    try {
        if (*synth_cmd) return run_synth(o);
        if (*fit_cmd) return run_fit(o);
        if (*fc_cmd) return run_forecast(o);
        if (*bt_cmd) return run_backtest(o);
        if (*score_cmd) return run_score(o);
        if (*phases_cmd) return run_phases(o);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        for (const auto& line : e.trace()) std::cerr << "  " << line << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
