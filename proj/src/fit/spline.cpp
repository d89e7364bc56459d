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

#include "hospcast/fit/spline.hpp"

#include "hospcast/core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hospcast::fit {

namespace {
constexpr int cubic_order = 4;
}

SplineBasis::SplineBasis(double lower, double upper, int n_knots)
    : lower_(lower), upper_(upper), n_knots_(n_knots)
{
    if (n_knots < 4) {
        throw ValidationError("spline basis needs at least 4 knots, got " + std::to_string(n_knots));
    }
    if (!(upper > lower)) {
        throw ValidationError("spline basis needs a positive span");
    }
    step_ = (upper - lower) / (n_knots - 1);
    knots_.reserve(static_cast<std::size_t>(n_knots + 6));
    for (int i = -3; i < n_knots + 3; ++i) knots_.push_back(lower + i * step_);
}

SplineBasis SplineBasis::for_times(std::span<const double> times, int knot_spacing_days)
{
    if (times.empty() || knot_spacing_days < 1) {
        throw ValidationError("spline basis needs times and a positive knot spacing");
    }
    auto [lo, hi] = std::minmax_element(times.begin(), times.end());
    std::vector<double> distinct(times.begin(), times.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    int n_knots = static_cast<int>(distinct.size()) / knot_spacing_days;
    if (n_knots < 4) {
        throw ValidationError("span too short for spline basis: " + std::to_string(distinct.size()) +
                              " days at knot spacing " + std::to_string(knot_spacing_days) + " gives fewer than 4 knots");
    }
    return SplineBasis(*lo, *hi, n_knots);
}

std::size_t SplineBasis::span_index(double t) const
{
    // Interval [knots_[k], knots_[k+1]) containing t, with the upper boundary closed.
    double pos = (t - knots_.front()) / step_;
    auto k = static_cast<std::ptrdiff_t>(std::floor(pos));
    const auto last_interior = static_cast<std::ptrdiff_t>(n_knots_ + 1); // knots_[n_knots+2] == upper
    k = std::clamp<std::ptrdiff_t>(k, 3, last_interior);
    return static_cast<std::size_t>(k);
}

Eigen::RowVectorXd SplineBasis::basis(double t, int order) const
{
    // Cox-de Boor recursion restricted to the non-zero functions on the containing interval.
    const std::size_t k = span_index(t);
    std::vector<double> b(static_cast<std::size_t>(order), 0.0);
    b[0] = 1.0;
    for (int d = 1; d < order; ++d) {
        std::vector<double> nb(static_cast<std::size_t>(order), 0.0);
        for (int r = 0; r <= d; ++r) {
            // function index i = k - d + r, order d+1
            const std::ptrdiff_t i = static_cast<std::ptrdiff_t>(k) - d + r;
            double value = 0.0;
            if (r > 0) {
                const double left = knots_[static_cast<std::size_t>(i)];
                const double right = knots_[static_cast<std::size_t>(i + d)];
                value += (t - left) / (right - left) * b[static_cast<std::size_t>(r - 1)];
            }
            if (r < d) {
                const double left = knots_[static_cast<std::size_t>(i + 1)];
                const double right = knots_[static_cast<std::size_t>(i + d + 1)];
                value += (right - t) / (right - left) * b[static_cast<std::size_t>(r)];
            }
            nb[static_cast<std::size_t>(r)] = value;
        }
        b = std::move(nb);
    }
    // Order-`order` functions indexed k-order+1 .. k over the full knot vector.
    const int n_funcs = static_cast<int>(knots_.size()) - order;
    Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(n_funcs);
    for (int r = 0; r < order; ++r) {
        const std::ptrdiff_t i = static_cast<std::ptrdiff_t>(k) - (order - 1) + r;
        if (i >= 0 && i < n_funcs) out(i) = b[static_cast<std::size_t>(r)];
    }
    return out;
}

Eigen::RowVectorXd SplineBasis::evaluate(double t) const
{
    return basis(t, cubic_order);
}

Eigen::RowVectorXd SplineBasis::derivative(double t) const
{
    // d/dt B_{i,4} = 3 [ B_{i,3} / (t_{i+3} - t_i) - B_{i+1,3} / (t_{i+4} - t_{i+1}) ]; uniform knots.
    const Eigen::RowVectorXd q = basis(t, cubic_order - 1);
    const double scale = (cubic_order - 1) / ((cubic_order - 1) * step_);
    Eigen::RowVectorXd out(size());
    for (int i = 0; i < size(); ++i) {
        out(i) = scale * (q(i) - q(i + 1));
    }
    return out;
}

Eigen::MatrixXd SplineBasis::design(std::span<const double> times) const
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(times.size()), size());
    for (std::size_t r = 0; r < times.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = evaluate(times[r]);
    return out;
}

Eigen::MatrixXd SplineBasis::penalty() const
{
    const int m = size();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m - 2, m);
    for (int i = 0; i < m - 2; ++i) {
        d(i, i) = 1.0;
        d(i, i + 1) = -2.0;
        d(i, i + 2) = 1.0;
    }
    return d.transpose() * d;
}

Eigen::MatrixXd SplineBasis::null_space_projector() const
{
    const int m = size();
    Eigen::MatrixXd n(m, 2);
    for (int i = 0; i < m; ++i) {
        n(i, 0) = 1.0;
        n(i, 1) = i - 0.5 * (m - 1);
    }
    return n * (n.transpose() * n).inverse() * n.transpose();
}

CenteringConstraint CenteringConstraint::for_design(const Eigen::MatrixXd& basis_rows)
{
    const Eigen::VectorXd c = basis_rows.colwise().sum().transpose();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(c.size(), c.size());
    return {q.rightCols(c.size() - 1)};
}

} // namespace hospcast::fit
