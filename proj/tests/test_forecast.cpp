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
#include "hospcast/forecast/io.hpp"
#include "hospcast/forecast/kernels.hpp"
#include "hospcast/forecast/samples.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

using namespace hospcast;
using namespace hospcast::forecast;

namespace {

const Date fd = Date::parse("2022-06-12");
const double inf = std::numeric_limits<double>::infinity();

std::vector<Date> dates(int n)
{
    std::vector<Date> out;
    for (int i = 0; i < n; ++i) out.push_back(fd + i);
    return out;
}

/// One region with a single-coefficient model; trust i has log-mean log(means[i]).
RegionDesign constant_region(const std::string& region, const std::vector<std::pair<std::string, double>>& trusts,
                             double theta, double coef_var = 0.0, int n_dates = 7)
{
    RegionDesign rd;
    rd.region = region;
    rd.dates = dates(n_dates);
    fit::FittedModel m;
    m.coefficients = Eigen::VectorXd::Ones(1);
    m.covariance = Eigen::MatrixXd::Constant(1, 1, coef_var);
    m.theta = theta;
    rd.models.push_back(m);
    for (const auto& [id, mean] : trusts) rd.trusts.push_back({id, 0, Eigen::MatrixXd::Constant(n_dates, 1, std::log(mean))});
    rd.region_theta = theta;
    return rd;
}

Hierarchy hierarchy_of(const std::vector<RegionDesign>& designs)
{
    Hierarchy h;
    for (const auto& d : designs) {
        for (const auto& t : d.trusts) h.add(t.trust, d.region);
    }
    return h;
}

} // namespace

TEST_CASE("sample quantile interpolation")
{
    std::vector<double> v(100);
    for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = i + 1;
    CHECK(sample_quantile(v, 0.5) == doctest::Approx(50.5));
    CHECK(sample_quantile(v, 0.0) == 1.0);
    CHECK(sample_quantile(v, 1.0) == 100.0);
    CHECK(sample_quantile(v, 0.25) == doctest::Approx(25.75));
}

TEST_CASE("default quantile levels")
{
    auto l = default_quantile_levels();
    CHECK(l.size() == 23);
    CHECK(l.front() == doctest::Approx(0.01));
    CHECK(l.back() == doctest::Approx(0.99));
    CHECK(std::is_sorted(l.begin(), l.end()));
    for (std::size_t i = 0; i < l.size(); ++i) CHECK(l[i] + l[l.size() - 1 - i] == doctest::Approx(1.0));
}

TEST_CASE("degenerate simulation returns the rounded mean")
{
    std::vector<RegionDesign> designs{constant_region("R", {{"A", 12.4}, {"B", 3.6}}, inf)};
    auto s = simulate_trust_forecast("m", designs, 200, 1);
    CHECK((s.get("A").samples.array() == 12).all());
    CHECK((s.get("B").samples.array() == 4).all());
    auto q = to_quantiles(s);
    for (const auto& c : q.cells) {
        for (double v : c.values) CHECK(v == (c.geography_id == "A" ? 12.0 : 4.0));
    }
}

TEST_CASE("simulated mean matches the model mean")
{
    std::vector<RegionDesign> designs{constant_region("R", {{"A", 25.0}}, 5.0)};
    auto s = simulate_trust_forecast("m", designs, 2000, 3);
    const auto& row = s.get("A").samples.row(0).cast<double>();
    const double mean = row.mean();
    const double se = std::sqrt((25.0 + 25.0 * 25.0 / 5.0) / 2000.0);
    CHECK(std::abs(mean - 25.0) < 3 * se);
    CHECK(std::abs(mean / 25.0 - 1.0) < 0.05);
}

TEST_CASE("simulation is deterministic and the serial path is bit-identical")
{
    std::vector<RegionDesign> designs{constant_region("R1", {{"A", 20.0}, {"B", 7.0}}, 8.0, 0.01, 21),
                                      constant_region("R2", {{"C", 40.0}, {"D", 2.0}}, 3.0, 0.05, 21)};
    auto h = hierarchy_of(designs);
    auto a = simulate_forecast("m", designs, h, 500, 99, Execution::parallel);
    auto b = simulate_forecast("m", designs, h, 500, 99, Execution::parallel);
    auto c = simulate_forecast("m", designs, h, 500, 99, Execution::serial);
    REQUIRE(a.geographies.size() == c.geographies.size());
    for (std::size_t g = 0; g < a.geographies.size(); ++g) {
        CHECK(a.geographies[g].samples == b.geographies[g].samples);
        CHECK(a.geographies[g].samples == c.geographies[g].samples);
        CHECK(a.geographies[g].means == c.geographies[g].means);
    }
    auto other = simulate_forecast("m", designs, h, 500, 100);
    CHECK(other.get("A").samples != a.get("A").samples);
}

TEST_CASE("region aggregation")
{
    std::vector<RegionDesign> designs{constant_region("R", {{"A", 10.0}, {"B", 20.0}}, inf)};
    auto trust = simulate_trust_forecast("m", designs, 2000, 4);
    auto region = aggregate_to_region(trust, hierarchy_of(designs), {{"R", inf}});
    CHECK((region.get("R").samples.array() == 30).all());
    CHECK((region.get("R").means.array() - 30.0).abs().maxCoeff() < 1e-9);

    auto poisson = aggregate_to_region(trust, hierarchy_of(designs), {{"R", 1e13}});
    Eigen::ArrayXd row = poisson.get("R").samples.row(0).cast<double>().array();
    const double var = (row - row.mean()).square().sum() / (row.size() - 1.0);
    CHECK(std::abs(var / 30.0 - 1.0) < 0.1);

    Hierarchy extra = hierarchy_of(designs);
    extra.add("Z", "R");
    CHECK_THROWS_AS(aggregate_to_region(trust, extra, {{"R", inf}}), ValidationError);
}

TEST_CASE("region median lies between summed trust quartiles")
{
    std::vector<RegionDesign> designs{
        constant_region("R", {{"A", 30.0}, {"B", 30.0}, {"C", 30.0}, {"D", 30.0}}, 10.0, 0.0, 7)};
    auto s = simulate_forecast("m", designs, hierarchy_of(designs), 2000, 5);
    auto q = to_quantiles(s);
    const auto i25 = q.level_index(0.25), i75 = q.level_index(0.75), i50 = q.level_index(0.5);
    for (Date d : designs[0].dates) {
        double lo = 0, hi = 0, med = 0;
        for (const auto& c : q.cells) {
            if (c.target_date != d) continue;
            if (c.level == GeographyLevel::trust) {
                lo += c.values[i25];
                hi += c.values[i75];
            } else {
                med = c.values[i50];
            }
        }
        CHECK(med >= lo);
        CHECK(med <= hi);
    }
}

TEST_CASE("national sums are flagged uncalibrated")
{
    ForecastSamples r;
    r.model = "m";
    r.forecast_date = fd;
    r.dates = {fd};
    r.n = 2;
    for (auto [id, a, b] : {std::tuple{"R1", 1, 2}, std::tuple{"R2", 3, 4}}) {
        GeographySamples g;
        g.id = id;
        g.level = GeographyLevel::region;
        g.means = Eigen::MatrixXd::Zero(1, 2);
        g.samples = CountMatrix(1, 2);
        g.samples << a, b;
        r.geographies.push_back(g);
    }
    auto nat = national_sum(r);
    CHECK(nat.uncalibrated);
    CHECK(nat.get("national").samples(0, 0) == 4);
    CHECK(nat.get("national").samples(0, 1) == 6);
}

TEST_CASE("quantiles need enough draws and are monotone")
{
    std::vector<RegionDesign> designs{constant_region("R", {{"A", 15.0}}, 2.0, 0.1, 14)};
    CHECK_THROWS_AS(to_quantiles(simulate_trust_forecast("m", designs, 50, 1)), ValidationError);
    auto q = to_quantiles(simulate_trust_forecast("m", designs, 1000, 1));
    for (const auto& c : q.cells) CHECK(std::is_sorted(c.values.begin(), c.values.end()));
}

TEST_CASE("forecast csv round-trip keeps the uncalibrated flag")
{
    std::vector<RegionDesign> designs{constant_region("R", {{"A", 15.0}, {"B", 9.0}}, 4.0, 0.02, 7)};
    auto s = simulate_forecast("m", designs, hierarchy_of(designs), 300, 8);
    auto q = to_quantiles(s);
    auto nat = to_quantiles(national_sum(s));
    for (auto& c : nat.cells) q.cells.push_back(c);

    auto path = std::filesystem::temp_directory_path() / "hospcast_test_forecasts.csv";
    write_forecasts(path, {q});
    auto back = load_forecasts(path);
    std::filesystem::remove(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0].model == "m");
    CHECK(back[0].levels == q.levels);
    REQUIRE(back[0].cells.size() == q.cells.size());
    auto idx = back[0].index();
    for (const auto& c : q.cells) {
        const auto& b = back[0].cells[idx.at({c.level, c.geography_id, c.target_date})];
        CHECK(b.values == c.values);
        CHECK(b.mean == c.mean);
        CHECK(b.uncalibrated == c.uncalibrated);
    }
}
