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
#include "hospcast/ensembles.hpp"

#include <doctest.h>

#include <random>

using namespace hospcast;
using namespace hospcast::ensembles;
using forecast::QuantileCell;

namespace {

const Date fd = Date::parse("2022-06-12");
const std::vector<double> levels{0.025, 0.25, 0.5, 0.75, 0.975};

QuantileForecast member(const std::string& name, const std::vector<std::vector<double>>& cell_values)
{
    QuantileForecast f;
    f.model = name;
    f.forecast_date = fd;
    f.levels = levels;
    for (std::size_t i = 0; i < cell_values.size(); ++i) {
        QuantileCell c;
        c.geography_id = "T" + std::to_string(i);
        c.target_date = fd;
        c.values = cell_values[i];
        c.mean = c.values[2];
        f.cells.push_back(c);
    }
    return f;
}

QuantileForecast random_member(std::mt19937_64& rng, const std::string& name, int cells)
{
    std::uniform_real_distribution<double> u(0, 100);
    std::vector<std::vector<double>> v(static_cast<std::size_t>(cells));
    for (auto& c : v) {
        for (int k = 0; k < 5; ++k) c.push_back(u(rng));
        std::sort(c.begin(), c.end());
    }
    return member(name, v);
}

void check_same(const QuantileForecast& a, const QuantileForecast& b)
{
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        for (std::size_t k = 0; k < a.levels.size(); ++k) {
            CHECK(a.cells[i].values[k] == doctest::Approx(b.cells[i].values[k]).epsilon(1e-12));
        }
    }
}

} // namespace

TEST_CASE("ensemble mean")
{
    std::mt19937_64 rng(1);
    auto a = random_member(rng, "a", 6);
    auto same = a;
    same.model = "b";
    check_same(ensemble_mean({a, same}), a);

    auto m10 = member("a", {{5, 8, 10, 12, 15}});
    auto m20 = member("b", {{15, 18, 20, 22, 25}});
    CHECK(ensemble_mean({m10, m20}).median(ensemble_mean({m10, m20}).cells[0]) == doctest::Approx(15));

    auto b = random_member(rng, "b", 6), c = random_member(rng, "c", 6);
    auto e = ensemble_mean({a, b, c});
    for (const auto& cell : e.cells) CHECK(std::is_sorted(cell.values.begin(), cell.values.end()));

    auto short_member = random_member(rng, "d", 5);
    CHECK_THROWS_AS(ensemble_mean({a, short_member}), ValidationError);
}

TEST_CASE("score weights")
{
    auto eq = score_weights({"a", "b", "c", "d"}, {1, 1, 1, 1});
    for (double w : eq.weights) CHECK(w == doctest::Approx(0.25));
    auto two = score_weights({"a", "b"}, {1, 3});
    CHECK(two.weights[0] == doctest::Approx(0.75));
    CHECK(two.weights[1] == doctest::Approx(0.25));
    auto zero = score_weights({"a", "b"}, {0, 2});
    CHECK(zero.weights == std::vector<double>{1.0, 0.0});
    auto scaled = score_weights({"a", "b", "c"}, {2, 5, 11});
    auto scaled7 = score_weights({"a", "b", "c"}, {14, 35, 77});
    for (std::size_t m = 0; m < 3; ++m) CHECK(scaled.weights[m] == doctest::Approx(scaled7.weights[m]));
    double total = 0;
    for (double w : scaled.weights) total += w;
    CHECK(total == doctest::Approx(1.0));
    auto literal = score_weights({"a", "b"}, {1, 3}, true);
    CHECK(literal.weights[0] == doctest::Approx(0.25));
}

TEST_CASE("score ensemble")
{
    auto a = member("a", {{6, 7, 8, 9, 10}});
    auto b = member("b", {{12, 14, 16, 18, 20}});
    auto first = ensemble_by_score({a, b}, score_weights({"a", "b"}, {0, 2}));
    check_same(first, a);
    auto mixed = ensemble_by_score({a, b}, score_weights({"a", "b"}, {1, 3}));
    CHECK(mixed.median(mixed.cells[0]) == doctest::Approx(10));
    auto equal = ensemble_by_score({a, b}, score_weights({"a", "b"}, {4, 4}));
    check_same(equal, ensemble_mean({a, b}));
}

TEST_CASE("regression weights")
{
    Eigen::MatrixXd x(5, 1);
    x << 1, 2, 3, 4, 5;
    Eigen::VectorXd y = 2 * x.col(0);
    RegressionOptions ols;
    ols.mode = RegressionMode::ols;
    CHECK(regression_weights({"a"}, x, y, ols).weights[0] == doctest::Approx(2.0));

    RegressionOptions bayes;
    bayes.prior_mean = 0.25;
    bayes.prior_scale = 1.0;
    bayes.standardize = false;
    CHECK(regression_weights({"a"}, Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1), bayes).weights[0] ==
          doctest::Approx(0.625));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(1, 50);
    Eigen::MatrixXd xm(30, 4);
    Eigen::VectorXd ym(30);
    for (Eigen::Index r = 0; r < 30; ++r) {
        for (Eigen::Index c = 0; c < 4; ++c) xm(r, c) = u(rng);
        ym(r) = u(rng);
    }
    RegressionOptions tight;
    tight.prior_scale = 1e-6;
    for (double w : regression_weights({"a", "b", "c", "d"}, xm, ym, tight).weights) CHECK(std::abs(w - 0.25) < 1e-6);

    Eigen::MatrixXd dup(10, 2);
    dup.col(0) = xm.col(0).head(10);
    dup.col(1) = dup.col(0);
    CHECK_THROWS_AS(regression_weights({"a", "b"}, dup, ym.head(10), ols), NumericalError);
    CHECK_NOTHROW(regression_weights({"a", "b"}, dup, ym.head(10), RegressionOptions{}));
}

TEST_CASE("regression ensemble")
{
    std::mt19937_64 rng(4);
    auto a = random_member(rng, "a", 5), b = random_member(rng, "b", 5), c = random_member(rng, "c", 5),
         d = random_member(rng, "d", 5);
    EnsembleWeights w;
    w.weights = {1, 0, 0, 0};
    check_same(ensemble_by_regression({a, b, c, d}, w), a);
    w.weights = {0.25, 0.25, 0.25, 0.25};
    check_same(ensemble_by_regression({a, b, c, d}, w), ensemble_mean({a, b, c, d}));
    auto a2 = a;
    a2.model = "a2";
    w.weights = {0.5, 0.5};
    check_same(ensemble_by_regression({a, a2}, w), a);

    // Negative weights still give monotone quantiles.
    w.weights = {1.5, -0.7, 0.4, -0.2};
    auto neg = ensemble_by_regression({a, b, c, d}, w);
    for (const auto& cell : neg.cells) CHECK(std::is_sorted(cell.values.begin(), cell.values.end()));
}

TEST_CASE("evaluation window truncation")
{
    std::vector<scoring::ScoreRecord> r;
    for (int cell = 0; cell < 3; ++cell) {
        for (int d = 1; d <= 14; ++d) {
            scoring::ScoreRecord x;
            x.geography_id = "T" + std::to_string(cell);
            x.days_ahead = d;
            r.push_back(x);
        }
    }
    CHECK(truncate_eval_window(r, 7).size() == 21);
    CHECK(truncate_eval_window(r, 14).size() == r.size());
    std::vector<std::string> warnings;
    CHECK(truncate_eval_window(r, 0, &warnings).empty());
    CHECK(warnings.size() == 1);
}
