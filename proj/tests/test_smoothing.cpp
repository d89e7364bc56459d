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
#include "hospcast/smoothing.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <random>

using namespace hospcast;

namespace {

// Tricube-weighted least squares at one point, solved directly.
double loess_oracle(const std::vector<double>& y, int span, int i)
{
    const int left = (span - 1) / 2;
    const int right = span - 1 - left;
    const double bw = std::max(left, right) + 1;
    const int lo = std::max(0, i - left);
    const int hi = std::min(static_cast<int>(y.size()) - 1, i + right);
    Eigen::MatrixXd x(hi - lo + 1, 2);
    Eigen::VectorXd w(hi - lo + 1), v(hi - lo + 1);
    for (int j = lo; j <= hi; ++j) {
        x(j - lo, 0) = 1.0;
        x(j - lo, 1) = j - i;
        w(j - lo) = std::pow(1.0 - std::pow(std::abs(j - i) / bw, 3), 3);
        v(j - lo) = y[static_cast<std::size_t>(j)];
    }
    Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
    Eigen::VectorXd beta = (xtw * x).ldlt().solve(xtw * v);
    return beta(0);
}

} // namespace

TEST_CASE("loess reproduces constants and lines")
{
    std::vector<double> c(50, 7.0), l(50);
    for (int i = 0; i < 50; ++i) l[static_cast<std::size_t>(i)] = 3.0 + 0.4 * i;
    auto sc = loess_smooth(c, 21);
    auto sl = loess_smooth(l, 21);
    for (int i = 0; i < 50; ++i) {
        CHECK(sc.values[static_cast<std::size_t>(i)] == doctest::Approx(7.0).epsilon(1e-12));
        CHECK(sl.values[static_cast<std::size_t>(i)] == doctest::Approx(l[static_cast<std::size_t>(i)]).epsilon(1e-10));
    }
}

TEST_CASE("loess matches a weighted least squares oracle")
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<double> y(90);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::sin(0.1 * static_cast<double>(i)) + noise(rng);
    auto s = loess_smooth(y, 21);
    for (int i : {0, 5, 44, 80, 89}) {
        CHECK(std::abs(s.values[static_cast<std::size_t>(i)] - loess_oracle(y, 21, i)) < 1e-8);
    }
}

TEST_CASE("loess is shift-equivariant and validates input")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 10);
    std::vector<double> y(40), z(40);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = u(rng);
        z[i] = y[i] + 12.5;
    }
    auto a = loess_smooth(y, 15);
    auto b = loess_smooth(z, 15);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(b.values[i] == doctest::Approx(a.values[i] + 12.5).epsilon(1e-12));
    CHECK_THROWS_AS(loess_smooth(std::vector<double>(10, 1.0), 21), ValidationError);
    SmoothedSeries s{{0.0, 2.0}, 21};
    CHECK(s.floored()[0] == 0.5);
    CHECK(s.log_floored()[1] == doctest::Approx(std::log(2.0)));
}

TEST_CASE("moving average")
{
    std::vector<double> c(20, 10.0);
    for (double v : moving_average(c, 7)) CHECK(v == doctest::Approx(10.0));
    std::vector<double> s{1, 2, 3, 4, 5, 6, 7};
    CHECK(moving_average(s, 7)[3] == doctest::Approx(4.0));

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 100);
    std::vector<double> y(60);
    for (auto& v : y) v = u(rng);
    auto ma = moving_average(y, 7);
    for (std::size_t i = 3; i + 3 < y.size(); ++i) {
        double sum = 0;
        for (std::size_t j = i - 3; j <= i + 3; ++j) sum += y[j];
        CHECK(ma[i] == doctest::Approx(sum / 7.0).epsilon(1e-12));
    }
}

TEST_CASE("hospitalisation ratio")
{
    std::vector<double> flat(20, 5.0);
    CHECK(*hospitalisation_ratio(flat, 10) == doctest::Approx(1.0));
    std::vector<double> doubling(21);
    for (std::size_t i = 0; i < doubling.size(); ++i) doubling[i] = std::pow(2.0, static_cast<double>(i) / 7.0);
    CHECK(*hospitalisation_ratio(doubling, 14) == doctest::Approx(2.0));
    std::vector<double> zero(10, 0.0);
    zero[8] = 3;
    CHECK_FALSE(hospitalisation_ratio(zero, 8).has_value());
    CHECK_THROWS_AS(hospitalisation_ratio(flat, 3), ValidationError);
}

TEST_CASE("wave phases")
{
    // Triangle peaking on day 50 of 100.
    std::vector<double> tri(100);
    for (int i = 0; i < 100; ++i) tri[static_cast<std::size_t>(i)] = 100.0 - std::abs(i - 50);
    const Date start = Date::parse("2022-03-06");
    auto w = detect_wave_phases(tri, start);
    REQUIRE(w.size() == 3);
    const Date peak = start + 50;
    CHECK(w[1].contains(peak));
    CHECK(w[1].start.is_sunday());
    CHECK(w[1].end.is_sunday());
    CHECK(w[0].end == w[1].start);
    CHECK(w[1].end == w[2].start);

    // Monotone series has no interior maximum.
    std::vector<double> mono(60);
    for (std::size_t i = 0; i < mono.size(); ++i) mono[i] = static_cast<double>(i);
    try {
        detect_wave_phases(mono, start);
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("no interior maximum") != std::string::npos);
    }
}

TEST_CASE("wave phases on a curve with BA.4/5 turning points")
{
    // Troughs on 2022-05-29 and 2022-09-11, peak on 2022-06-12: the detector
    // should give growth 05-15 -> 06-05, peak -> 06-19, decline -> 09-11.
    const Date start = Date::parse("2022-04-01");
    const Date trough1 = Date::parse("2022-05-29");
    const Date top = Date::parse("2022-06-12");
    const Date trough2 = Date::parse("2022-09-11");
    // Flat bottoms and top make the moving-average extremes exact.
    std::vector<double> y;
    for (Date d = start; d <= Date::parse("2022-10-15"); ++d) {
        double v;
        if (d < trough1 - 3) v = 300 + 5.0 * ((trough1 - 3) - d);
        else if (d <= trough1 + 3) v = 300;
        else if (d < top - 3) v = 300 + 35.0 * (d - (trough1 + 3));
        else if (d <= top + 3) v = 580;
        else if (d < trough2 - 3) v = 580 - 280.0 * (d - (top + 3)) / ((trough2 - 3) - (top + 3));
        else if (d <= trough2 + 3) v = 300;
        else v = 300 + 3.0 * (d - (trough2 + 3));
        y.push_back(v);
    }
    WaveDetectionOptions o;
    o.wave_name = "ba45";
    auto w = detect_wave_phases(y, start, o);
    REQUIRE(w.size() == 3);
    CHECK(w[0].start == Date::parse("2022-05-15"));
    CHECK(w[0].end == Date::parse("2022-06-05"));
    CHECK(w[1].end == Date::parse("2022-06-19"));
    CHECK(w[2].end == Date::parse("2022-09-11"));
}
