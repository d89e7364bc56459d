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

#include "hospcast/fit/penalized_nb.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace hospcast::fit {

using Rng = std::mt19937_64;

/// Stable 64-bit mix of a master seed and a list of tags (FNV-1a + splitmix64).
/// Used to give every parallel task its own stream independent of scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::string_view> tags);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// n draws (columns) from MVN(beta, V) using the symmetric square root of V
/// with negative eigenvalues clipped to zero.
Eigen::MatrixXd sample_coefficients(const FittedModel& model, int n, std::uint64_t seed);

/// Symmetric PSD square root used by sample_coefficients.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& v);

/// Gamma-Poisson draw: E = mean, Var = mean + mean^2/theta.
std::int64_t sample_negative_binomial(double mean, double theta, Rng& rng);
std::int64_t sample_negative_binomial(double mean, double theta, std::uint64_t seed);

/// Above this theta the gamma mixing step is skipped (Poisson limit).
constexpr double poisson_limit_theta = 1e12;

} // namespace hospcast::fit
