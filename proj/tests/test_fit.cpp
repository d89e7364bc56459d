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
#include "hospcast/fit/design.hpp"
#include "hospcast/fit/lasso.hpp"
#include "hospcast/fit/penalized_nb.hpp"
#include "hospcast/fit/sampling.hpp"
#include "hospcast/fit/spline.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace hospcast;
using namespace hospcast::fit;

namespace {

std::vector<double> iota_times(int n)
{
    std::vector<double> t(static_cast<std::size_t>(n));
    std::iota(t.begin(), t.end(), 0.0);
    return t;
}

double variance(const std::vector<double>& v)
{
    double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

} // namespace

TEST_CASE("spline basis size, partition of unity and penalty null space")
{
    auto t = iota_times(70);
    auto basis = SplineBasis::for_times(t, 7);
    CHECK(basis.n_knots() == 10);
    CHECK(basis.size() == 12);
    auto b = basis.design(t);
    CHECK(b.cols() == 12);
    for (Eigen::Index i = 0; i < b.rows(); ++i) CHECK(std::abs(b.row(i).sum() - 1.0) < 1e-9);
    for (double x : {0.0, 0.37, 33.3, 69.0}) CHECK(std::abs(basis.evaluate(x).sum() - 1.0) < 1e-9);

    Eigen::VectorXd linear(basis.size());
    for (Eigen::Index k = 0; k < linear.size(); ++k) linear(k) = 2.0 - 0.3 * static_cast<double>(k);
    CHECK(std::abs(linear.dot(basis.penalty() * linear)) < 1e-9);

    CHECK_THROWS_AS(SplineBasis::for_times(iota_times(20), 7), ValidationError);
}

TEST_CASE("spline derivative matches finite differences")
{
    SplineBasis basis(0.0, 56.0, 8);
    Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(basis.size(), -1.0, 2.0).array().sin();
    for (double x : {3.3, 20.0, 55.0}) {
        const double h = 1e-5;
        const double fd = (basis.evaluate(x + h).dot(c) - basis.evaluate(x - h).dot(c)) / (2 * h);
        CHECK(basis.derivative(x).dot(c) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("centering constraint gives zero column sums")
{
    auto t = iota_times(56);
    auto basis = SplineBasis::for_times(t, 7);
    auto b = basis.design(t);
    auto z = CenteringConstraint::for_design(b).z;
    CHECK(z.cols() == b.cols() - 1);
    Eigen::MatrixXd centred = b * z;
    CHECK(centred.colwise().sum().cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("design matrix validation")
{
    DesignMatrix d(3);
    d.add_column("a", Eigen::VectorXd::Ones(3));
    CHECK_THROWS_AS(d.add_column("b", Eigen::VectorXd::Ones(2)), ValidationError);
    d.add_column("a", Eigen::VectorXd::Constant(3, 2.0));
    CHECK_THROWS_AS(d.validate(), ValidationError);
    DesignMatrix z(3);
    z.add_column("zero", Eigen::VectorXd::Zero(3));
    CHECK_THROWS_AS(z.validate(), ValidationError);
}

TEST_CASE("intercept-only negative binomial fit recovers a constant mean")
{
    DesignMatrix d(50);
    d.add_column("intercept", Eigen::VectorXd::Ones(50));
    std::vector<double> y(50, 5.0);
    auto m = fit_penalized_nb(d, y);
    CHECK(std::abs(std::exp(m.coefficients(0)) - 5.0) < 1e-6);
    CHECK_THROWS_AS(fit_penalized_nb(d, std::vector<double>(50, 2.5)), ValidationError);
}

TEST_CASE("Poisson-like data gives a large theta")
{
    std::mt19937_64 rng(2);
    std::poisson_distribution<int> pois(20.0);
    const int n = 400;
    DesignMatrix d(n);
    d.add_column("intercept", Eigen::VectorXd::Ones(n));
    std::vector<double> y(n);
    for (auto& v : y) v = pois(rng);
    auto m = fit_penalized_nb(d, y);
    CHECK(m.theta > 100.0);
}

TEST_CASE("spline fit tracks exact exponential counts")
{
    const int n = 56;
    auto t = iota_times(n);
    auto basis = SplineBasis::for_times(t, 7);
    auto b = basis.design(t);
    auto z = CenteringConstraint::for_design(b).z;
    DesignMatrix d(n);
    d.add_column("intercept", Eigen::VectorXd::Ones(n));
    std::vector<std::string> labels;
    for (Eigen::Index k = 0; k < z.cols(); ++k) labels.push_back("s" + std::to_string(k));
    d.add_term("s", PenaltyKind::spline, labels, b * z, z.transpose() * basis.penalty() * z);
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = std::round(10.0 * std::exp(0.05 * i));
    auto m = fit_penalized_nb(d, y);
    Eigen::VectorXd eta = d.matrix() * m.coefficients;
    for (int i = 3; i < n - 3; ++i) CHECK(std::abs(eta(i) - std::log(10.0 * std::exp(0.05 * i))) < 0.05);

    // IRLS accepted iterations never increase the penalised deviance.
    const auto& trace = m.penalized_deviance_trace;
    for (std::size_t k = 1; k < trace.size(); ++k) CHECK(trace[k] <= trace[k - 1] * (1 + 1e-12));

    // Stationarity of the penalised likelihood at the returned coefficients.
    CHECK(penalized_score(d, y, m).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("negative binomial deviance is zero at the data")
{
    std::vector<double> y{0, 1, 5, 12};
    Eigen::VectorXd mu(4);
    mu << 1e-300, 1, 5, 12;
    CHECK(std::abs(nb_deviance(y, mu, 3.0)) < 1e-9);
    Eigen::VectorXd off = mu.array() + 1.0;
    CHECK(nb_deviance(y, off, 3.0) > 0.0);
}

TEST_CASE("lasso recovers a sparse log-linear signal")
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z(0.0, 1.0);
    const int n = 200;
    Eigen::VectorXd x1(n), x2(n);
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
        x1(i) = z(rng) * 0.5;
        x2(i) = z(rng);
        y[static_cast<std::size_t>(i)] = std::exp(2.0 * x1(i));
    }
    DesignMatrix d(n);
    d.add_column("intercept", Eigen::VectorXd::Ones(n));
    d.add_column("x1", x1, PenaltyKind::lasso);
    d.add_column("x2", x2, PenaltyKind::lasso);
    auto fit = fit_lasso(d, y);
    CHECK(fit.coefficients(2) == 0.0);
    CHECK(std::abs(fit.coefficients(1) - 2.0) < 0.2);

    // KKT conditions at the selected lambda.
    auto g = lasso_gradient(d, y, fit);
    CHECK(std::abs(g(0)) < 1e-6);
    CHECK(std::abs(g(2)) <= fit.lambda * (1 + 1e-6));

    auto big = fit_lasso_at(d, y, 1e6);
    CHECK(big.coefficients(1) == 0.0);
    CHECK(big.coefficients(2) == 0.0);

    // Duplicated column: the pair shares the single-column effect.
    DesignMatrix dup(n);
    dup.add_column("intercept", Eigen::VectorXd::Ones(n));
    dup.add_column("x1", x1, PenaltyKind::lasso);
    dup.add_column("x1b", x1, PenaltyKind::lasso);
    dup.add_column("x2", x2, PenaltyKind::lasso);
    auto fd = fit_lasso(dup, y);
    CHECK(std::abs(fd.coefficients(1) + fd.coefficients(2) - fit.coefficients(1)) < 0.1 * std::abs(fit.coefficients(1)));
}

TEST_CASE("coefficient sampling")
{
    FittedModel m;
    m.coefficients = Eigen::Vector2d(1.0, -2.0);
    m.covariance = Eigen::Matrix2d::Zero();
    auto draws = sample_coefficients(m, 10, 1);
    for (Eigen::Index k = 0; k < draws.cols(); ++k) CHECK(draws.col(k) == m.coefficients);

    m.covariance = Eigen::Matrix2d::Identity();
    auto many = sample_coefficients(m, 50000, 7);
    Eigen::MatrixXd centred = many.colwise() - many.rowwise().mean();
    Eigen::MatrixXd cov = centred * centred.transpose() / (many.cols() - 1.0);
    CHECK((cov - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 0.05);
    CHECK(sample_coefficients(m, 20, 9) == sample_coefficients(m, 20, 9));

    // Negative eigenvalues are clipped.
    Eigen::Matrix2d v;
    v << 1.0, 2.0, 2.0, 1.0;
    auto r = symmetric_sqrt(v);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(r * r);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("negative binomial sampler moments")
{
    Rng rng(derive_seed(1, {"nb"}));
    std::vector<double> p(100000), nb(100000);
    for (auto& v : p) v = static_cast<double>(sample_negative_binomial(4.0, 1e9, rng));
    for (auto& v : nb) v = static_cast<double>(sample_negative_binomial(10.0, 2.0, rng));
    CHECK(std::abs(variance(p) / 4.0 - 1.0) < 0.05);
    CHECK(std::abs(variance(nb) / 60.0 - 1.0) < 0.05);
    CHECK(sample_negative_binomial(10.0, 2.0, 42) == sample_negative_binomial(10.0, 2.0, 42));
    CHECK_THROWS_AS(sample_negative_binomial(-1.0, 2.0, 42), ValidationError);
}

TEST_CASE("seed derivation is stable and tag-sensitive")
{
    CHECK(derive_seed(1, {"a", "b"}) == derive_seed(1, {"a", "b"}));
    CHECK(derive_seed(1, {"a", "b"}) != derive_seed(1, {"b", "a"}));
    CHECK(derive_seed(1, {"ab"}) != derive_seed(1, {"a", "b"}));
    CHECK(derive_seed(1, 3) != derive_seed(2, 3));
}
