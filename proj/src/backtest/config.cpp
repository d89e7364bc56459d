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

#include "hospcast/backtest/config.hpp"

#include "hospcast/core/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace hospcast::backtest {

namespace {

using nlohmann::json;

const std::vector<std::string> indicator_ids = {"google-trends", "111-calls", "111-online"};

} // namespace

bool ModelEntry::is_ensemble() const
{
    return kind == ModelKind::ensemble_mean || kind == ModelKind::ensemble_score ||
           kind == ModelKind::ensemble_regression;
}

ModelEntry resolve_model(const std::string& entry)
{
    ModelEntry m;
    const auto eq = entry.find('=');
    m.name = entry.substr(0, eq);
    m.base = eq == std::string::npos ? entry : entry.substr(eq + 1);
    if (m.name.empty()) throw ValidationError("empty model name in '" + entry + "'");
    const auto& b = m.base;
    if (b == "univariate-baseline") m.kind = ModelKind::univariate_baseline;
    else if (b == "univariate-hgam") m.kind = ModelKind::univariate_hgam;
    else if (b == "ensemble-mean") m.kind = ModelKind::ensemble_mean;
    else if (b == "ensemble-score") m.kind = ModelKind::ensemble_score;
    else if (b == "ensemble-regression") m.kind = ModelKind::ensemble_regression;
    else if (b == "combined") {
        m.kind = ModelKind::indicator;
        m.indicators = indicator_ids;
    } else if (std::find(indicator_ids.begin(), indicator_ids.end(), b) != indicator_ids.end()) {
        m.kind = ModelKind::indicator;
        m.indicators = {b};
    } else {
        throw ValidationError("unknown model '" + b + "'");
    }
    return m;
}

int BacktestConfig::max_horizon() const
{
    return *std::max_element(horizons.begin(), horizons.end());
}

void BacktestConfig::validate() const
{
    if (horizons.empty()) throw ValidationError("at least one horizon is required");
    for (int h : horizons) {
        if (h != 7 && h != 14 && h != 21) {
            throw ValidationError("horizon " + std::to_string(h) + " is not one of 7, 14, 21");
        }
    }
    if (std::set<int>(horizons.begin(), horizons.end()).size() != horizons.size()) {
        throw ValidationError("duplicate horizons");
    }
    if (models.empty()) throw ValidationError("no models configured");
    std::set<std::string> names;
    bool any_ensemble = false;
    for (const auto& e : models) {
        const auto m = resolve_model(e);
        if (!names.insert(m.name).second) throw ValidationError("duplicate model name " + m.name);
        any_ensemble = any_ensemble || m.is_ensemble();
    }
    if (any_ensemble) {
        if (ensemble_members.empty()) throw ValidationError("ensembles need members");
        for (const auto& member : ensemble_members) {
            if (!names.count(member)) throw ValidationError("ensemble member " + member + " is not enabled");
            const auto it = std::find_if(models.begin(), models.end(),
                                         [&](const std::string& e) { return resolve_model(e).name == member; });
            if (resolve_model(*it).is_ensemble()) throw ValidationError("ensemble member " + member + " is an ensemble");
        }
    }
    for (std::size_t i = 0; i < forecast_dates.size(); ++i) {
        if (!forecast_dates[i].is_sunday()) {
            throw ValidationError("forecast date " + forecast_dates[i].iso() + " is not a Sunday");
        }
        if (i > 0 && forecast_dates[i] - forecast_dates[i - 1] != 7) {
            throw ValidationError("forecast dates must be weekly-spaced");
        }
    }
    if (first_forecast_date && !first_forecast_date->is_sunday()) {
        throw ValidationError("first_forecast_date must be a Sunday");
    }
    if (n_weeks && *n_weeks < 1) throw ValidationError("n_weeks must be positive");
    if (train_window_days < 4 * knot_spacing_days) {
        throw ValidationError("train_window_days must be at least 4 x knot_spacing_days");
    }
    if (n_samples < 100) throw ValidationError("n_samples must be at least 100");
    if (!(prior_scale > 0.0)) throw ValidationError("prior_scale must be positive");
    if (l_max < 0) throw ValidationError("l_max must be non-negative");
    if (changepoint_days < 0 || changepoint_days >= train_window_days) {
        throw ValidationError("changepoint_days must lie in [0, train_window_days)");
    }
    if (loess_span_days < 7) throw ValidationError("loess_span_days must be at least 7");
    if (weight_window_days < 1) throw ValidationError("weight_window_days must be positive");
    if (!data.scenario && (data.admissions.empty() || data.indicators.empty() || data.catchment.empty())) {
        throw ValidationError("config needs a scenario or admissions, indicators and catchment paths");
    }
}

BacktestConfig parse_config(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config must be a JSON object");

    BacktestConfig c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "data") {
                for (const auto& [k, dv] : v.items()) {
                    if (k == "scenario") c.data.scenario = dv.get<std::string>();
                    else if (k == "admissions") c.data.admissions = dv.get<std::string>();
                    else if (k == "indicators") c.data.indicators = dv.get<std::string>();
                    else if (k == "catchment") c.data.catchment = dv.get<std::string>();
                    else throw ValidationError("unknown config key data." + k);
                }
            } else if (key == "scenario") c.data.scenario = v.get<std::string>();
            else if (key == "models") c.models = v.get<std::vector<std::string>>();
            else if (key == "ensemble_members") c.ensemble_members = v.get<std::vector<std::string>>();
            else if (key == "horizons") c.horizons = v.get<std::vector<int>>();
            else if (key == "forecast_dates") {
                c.forecast_dates.clear();
                for (const auto& d : v) c.forecast_dates.push_back(Date::parse(d.get<std::string>()));
            } else if (key == "first_forecast_date") c.first_forecast_date = Date::parse(v.get<std::string>());
            else if (key == "n_weeks") c.n_weeks = v.get<int>();
            else if (key == "train_window_days") c.train_window_days = v.get<int>();
            else if (key == "knot_spacing_days") c.knot_spacing_days = v.get<int>();
            else if (key == "n_samples") c.n_samples = v.get<int>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "prior_scale") c.prior_scale = v.get<double>();
            else if (key == "regression_mode") {
                const auto m = v.get<std::string>();
                if (m == "ols") c.regression_mode = ensembles::RegressionMode::ols;
                else if (m == "bayes") c.regression_mode = ensembles::RegressionMode::bayes;
                else throw ValidationError("regression_mode must be ols or bayes");
            } else if (key == "proportional_score_weights") c.proportional_score_weights = v.get<bool>();
            else if (key == "l_max") c.l_max = v.get<int>();
            else if (key == "changepoint_days") c.changepoint_days = v.get<int>();
            else if (key == "loess_span_days") c.loess_span_days = v.get<int>();
            else if (key == "indicator_transform") {
                const auto t = v.get<std::string>();
                if (t == "identity") c.indicator_transform = models::IndicatorTransform::identity;
                else if (t == "log") c.indicator_transform = models::IndicatorTransform::log;
                else throw ValidationError("indicator_transform must be identity or log");
            } else if (key == "offset_days") c.offset_days = v.get<int>();
            else if (key == "peak_window_days") c.peak_window_days = v.get<int>();
            else if (key == "weight_window_days") c.weight_window_days = v.get<int>();
            else if (key == "output_dir") c.output_dir = v.get<std::string>();
            else throw ValidationError("unknown config key " + key);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad config value: ") + e.what());
    }
    c.validate();
    return c;
}

BacktestConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const BacktestConfig& c)
{
    json j;
    if (c.data.scenario) j["data"]["scenario"] = *c.data.scenario;
    else {
        j["data"]["admissions"] = c.data.admissions.string();
        j["data"]["indicators"] = c.data.indicators.string();
        j["data"]["catchment"] = c.data.catchment.string();
    }
    j["models"] = c.models;
    j["ensemble_members"] = c.ensemble_members;
    j["horizons"] = c.horizons;
    if (!c.forecast_dates.empty()) {
        std::vector<std::string> d;
        for (const auto& x : c.forecast_dates) d.push_back(x.iso());
        j["forecast_dates"] = d;
    }
    if (c.first_forecast_date) j["first_forecast_date"] = c.first_forecast_date->iso();
    if (c.n_weeks) j["n_weeks"] = *c.n_weeks;
    j["train_window_days"] = c.train_window_days;
    j["knot_spacing_days"] = c.knot_spacing_days;
    j["n_samples"] = c.n_samples;
    j["seed"] = c.seed;
    j["prior_scale"] = c.prior_scale;
    j["regression_mode"] = c.regression_mode == ensembles::RegressionMode::ols ? "ols" : "bayes";
    j["proportional_score_weights"] = c.proportional_score_weights;
    j["l_max"] = c.l_max;
    j["changepoint_days"] = c.changepoint_days;
    j["loess_span_days"] = c.loess_span_days;
    j["indicator_transform"] = c.indicator_transform == models::IndicatorTransform::log ? "log" : "identity";
    j["offset_days"] = c.offset_days;
    j["peak_window_days"] = c.peak_window_days;
    j["weight_window_days"] = c.weight_window_days;
    j["output_dir"] = c.output_dir.string();
    return j.dump(2);
}

} // namespace hospcast::backtest
