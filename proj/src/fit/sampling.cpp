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

#include "hospcast/fit/sampling.hpp"

#include "hospcast/core/errors.hpp"

#include <cmath>

namespace hospcast::fit {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::string_view> tags)
{
    std::uint64_t h = splitmix64(master);
    for (auto t : tags) h = splitmix64(h ^ fnv1a(t));
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& v)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (v + v.transpose()));
    if (eig.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition of coefficient covariance failed");
    }
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::MatrixXd sample_coefficients(const FittedModel& model, int n, std::uint64_t seed)
{
    if (n < 1) throw ValidationError("number of coefficient draws must be positive");
    const auto p = model.coefficients.size();
    const Eigen::MatrixXd root = symmetric_sqrt(model.covariance);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd z(p, n);
    for (int k = 0; k < n; ++k)
        for (Eigen::Index j = 0; j < p; ++j) z(j, k) = normal(rng);
    Eigen::MatrixXd draws = root * z;
    draws.colwise() += model.coefficients;
    return draws;
}

std::int64_t sample_negative_binomial(double mean, double theta, Rng& rng)
{
    if (!(mean > 0.0) || !(theta > 0.0)) {
        throw ValidationError("negative binomial needs positive mean and theta");
    }
    double rate = mean;
    if (theta < poisson_limit_theta) {
        std::gamma_distribution<double> gamma(theta, mean / theta);
        rate = gamma(rng);
        if (!(rate > 0.0)) return 0;
    }
    std::poisson_distribution<std::int64_t> poisson(rate);
    return poisson(rng);
}

std::int64_t sample_negative_binomial(double mean, double theta, std::uint64_t seed)
{
    Rng rng(seed);
    return sample_negative_binomial(mean, theta, rng);
}

} // namespace hospcast::fit
