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

#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace hospcast::fit {

/// Cubic B-spline basis on evenly spaced knots with a second-order
/// difference penalty on the coefficients (P-spline).
///
/// `n_knots` knots span [lower, upper] inclusive; three padding knots are
/// added on each side, giving n_knots + 2 basis functions.
class SplineBasis {
public:
    SplineBasis(double lower, double upper, int n_knots);

    /// Knot count = floor(number of distinct days / spacing); at least 4 required.
    static SplineBasis for_times(std::span<const double> times, int knot_spacing_days);

    int n_knots() const { return n_knots_; }
    int size() const { return n_knots_ + 2; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    /// Full knot sequence including padding.
    const std::vector<double>& knots() const { return knots_; }

    Eigen::RowVectorXd evaluate(double t) const;
    Eigen::RowVectorXd derivative(double t) const;
    Eigen::MatrixXd design(std::span<const double> times) const;

    /// D2' D2 with D2 the second-difference operator.
    Eigen::MatrixXd penalty() const;
    /// Orthogonal projector onto the penalty null space (constant and linear coefficient sequences).
    Eigen::MatrixXd null_space_projector() const;

private:
    /// Values of all order-`order` B-splines (order 4 = cubic) at t.
    Eigen::RowVectorXd basis(double t, int order) const;
    std::size_t span_index(double t) const;

    double lower_;
    double upper_;
    int n_knots_;
    double step_;
    std::vector<double> knots_;
};

/// Reparameterisation absorbing a sum-to-zero constraint over the fitted
/// rows: columns become B * Z and the penalty Z' S Z.
struct CenteringConstraint {
    Eigen::MatrixXd z;

    static CenteringConstraint for_design(const Eigen::MatrixXd& basis_rows);
};

} // namespace hospcast::fit
