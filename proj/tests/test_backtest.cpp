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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hospcast;
using namespace hospcast::backtest;

namespace {

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

BacktestConfig small_config(const std::string& scenario, int weeks)
{
    BacktestConfig c;
    c.data.scenario = scenario;
    c.n_weeks = weeks;
    c.n_samples = 300;
    c.seed = 3;
    c.models = {"univariate-hgam", "google-trends", "ensemble-mean", "ensemble-score", "ensemble-regression"};
    c.ensemble_members = {"univariate-hgam", "google-trends"};
    return c;
}

std::filesystem::path temp_dir(const std::string& name)
{
    auto d = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(d);
    return d;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(HOSPCAST_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("config parsing")
{
    auto c = parse_config(R"({"scenario": "ba45-like"})");
    CHECK(c.models.size() == 9);
    CHECK(c.horizons == std::vector<int>{7, 14, 21});
    CHECK(c.n_samples == 2000);
    CHECK_THROWS_AS(parse_config(R"({"scenario": "ba45-like", "horizons": [10]})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"scenario": "ba45-like", "colour": 1})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"scenario": "ba45-like", "ensemble_members": ["univariate-baseline"],
                                      "models": ["univariate-hgam", "ensemble-mean"]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"horizons": [7]})"), ValidationError);
    CHECK_THROWS_AS(parse_config("not json"), ValidationError);

    auto round = parse_config(config_to_json(c));
    CHECK(config_to_json(round) == config_to_json(c));
}

TEST_CASE("model aliases")
{
    auto m = resolve_model("copy2=univariate-hgam");
    CHECK(m.name == "copy2");
    CHECK(m.kind == ModelKind::univariate_hgam);
    CHECK(resolve_model("combined").indicators.size() == 3);
    CHECK_THROWS_AS(resolve_model("arima"), ValidationError);
}

TEST_CASE("default forecast dates")
{
    auto c = small_config("ba45-like", 3);
    auto inputs = load_inputs(c);
    auto dates = resolve_forecast_dates(c, inputs);
    REQUIRE(dates.size() == 3);
    CHECK(dates[0] == Date::parse("2022-05-29"));
    CHECK(dates[1] - dates[0] == 7);
    c.n_weeks = 40;
    CHECK_THROWS_AS(resolve_forecast_dates(c, inputs), ValidationError);
}

TEST_CASE("deterministic outputs and idempotent re-scoring")
{
    auto c = small_config("ba45-like", 3);
    auto a = run_backtest(c);
    auto b = run_backtest(c);
    auto da = temp_dir("hospcast_bt_a"), db = temp_dir("hospcast_bt_b");
    write_outputs(a, da);
    write_outputs(b, db);
    for (const auto* f : {"forecasts.csv", "scores.csv", "summary.csv", "weights.csv", "timeseries.csv"}) {
        CHECK_MESSAGE(slurp(da / f) == slurp(db / f), f);
    }

    // Scoring the written forecasts again gives the same table.
    auto reloaded = forecast::load_forecasts(da / "forecasts.csv");
    auto again = score_forecasts(reloaded, a.truth, a.phases, c.horizons);
    REQUIRE(again.records.size() == a.scores.records.size());
    for (std::size_t i = 0; i < again.records.size(); ++i) {
        CHECK(again.records[i].wis == a.scores.records[i].wis);
        CHECK(again.records[i].bias == a.scores.records[i].bias);
    }

    // summary rows = models x horizons x levels
    CHECK(a.scores.by_horizon().size() == c.models.size() * 3 * 2);
    std::filesystem::remove_all(da);
    std::filesystem::remove_all(db);
}

TEST_CASE("national cells are present but not scored")
{
    auto c = small_config("ba45-like", 2);
    c.models = {"univariate-hgam"};
    auto r = run_backtest(c);
    bool national = false;
    for (const auto& cell : r.forecasts.front().cells) {
        if (cell.level == forecast::GeographyLevel::national) {
            national = true;
            CHECK(cell.uncalibrated);
        }
    }
    CHECK(national);
    for (const auto& rec : r.scores.records) CHECK(rec.level != forecast::GeographyLevel::national);
    scoring::ScoreOptions o;
    o.levels = {forecast::GeographyLevel::national};
    CHECK_THROWS_AS(scoring::build_score_table(r.forecasts, r.truth, o), ValidationError);
}

TEST_CASE("flat scenario gives models of similar skill")
{
    auto c = small_config("flat", 6);
    c.models = {"univariate-baseline", "univariate-hgam", "google-trends", "111-calls", "111-online",
                "combined",           "ensemble-mean",   "ensemble-score", "ensemble-regression"};
    c.ensemble_members = {"univariate-hgam", "google-trends", "111-calls", "111-online"};
    auto r = run_backtest(c);
    double lo = 1e300, hi = 0;
    for (const auto& m : r.model_names) {
        const double w = r.scores.mean_wis(m);
        MESSAGE(m << " " << w);
        lo = std::min(lo, w);
        hi = std::max(hi, w);
    }
    CHECK(hi <= 2 * lo);
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("command line")
{
    auto dir = temp_dir("hospcast_cli");
    const auto d = dir.string();
    CHECK(run_cli("synth --scenario ba45-like --out-dir " + d) == 0);
    for (const auto* f : {"admissions.csv", "indicators.csv", "catchment.csv", "truth.csv"}) {
        CHECK(std::filesystem::exists(dir / f));
    }
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("synth --bogus") == 2);
    CHECK(run_cli("synth --scenario nope --out-dir " + d) == 2);
    CHECK(run_cli("phases --admissions " + d + "/admissions.csv --out-dir " + d) == 0);
    CHECK(std::filesystem::exists(dir / "phases.csv"));

    {
        std::ofstream cfg(dir / "config.json");
        cfg << R"({"scenario": "ba45-like", "n_weeks": 2, "n_samples": 200,
                   "models": ["univariate-hgam", "google-trends", "ensemble-mean"],
                   "ensemble_members": ["univariate-hgam", "google-trends"]})";
    }
    CHECK(run_cli("backtest --config " + d + "/config.json --out-dir " + d + "/bt") == 0);
    CHECK(run_cli("score --forecasts " + d + "/bt/forecasts.csv --admissions " + d + "/admissions.csv --phases " + d +
                  "/bt/phases.csv --out-dir " + d + "/rescored --seed 20220515") == 0);
    CHECK(slurp(dir / "bt" / "scores.csv") == slurp(dir / "rescored" / "scores.csv"));
    CHECK(slurp(dir / "bt" / "summary.csv") == slurp(dir / "rescored" / "summary.csv"));

    // Truth missing a date: nonzero exit.
    auto adm = io::load_admissions(dir / "admissions.csv");
    io::write_admissions(dir / "short.csv", adm.window(adm.start(), Date::parse("2022-06-01")));
    CHECK(run_cli("score --forecasts " + d + "/bt/forecasts.csv --admissions " + d + "/short.csv --out-dir " + d) == 2);

    {
        std::ofstream cfg(dir / "bad.json");
        cfg << R"({"scenario": "ba45-like", "horizons": [10]})";
    }
    CHECK(run_cli("backtest --config " + d + "/bad.json") == 2);
    std::filesystem::remove_all(dir);
}
