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

#include "hospcast/forecast/kernels.hpp"

#include "hospcast/core/errors.hpp"
#include "hospcast/fit/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hospcast::forecast {

namespace {

// Keeps exp() and the Poisson sampler in range for wild coefficient draws.
constexpr double max_log_mean = 20.0;

std::int64_t noisy(double mean, double theta, fit::Rng& rng)
{
    if (std::isinf(theta)) return std::llround(mean);
    return fit::sample_negative_binomial(mean, theta, rng);
}

struct PreparedRegion {
    const RegionDesign* design = nullptr;
    std::vector<Eigen::MatrixXd> roots;
    std::uint64_t seed = 0;
    std::size_t first_geography = 0;
};

/// One draw for one region: writes column k of every trust's means and samples.
void draw_region(const PreparedRegion& pr, int k, std::vector<GeographySamples>& out)
{
    const auto& d = *pr.design;
    fit::Rng rng(fit::derive_seed(pr.seed, static_cast<std::uint64_t>(k)));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Eigen::VectorXd> beta(d.models.size());
    for (std::size_t m = 0; m < d.models.size(); ++m) {
        const auto p = d.models[m].coefficients.size();
        Eigen::VectorXd z(p);
        for (Eigen::Index j = 0; j < p; ++j) z(j) = normal(rng);
        beta[m] = d.models[m].coefficients + pr.roots[m] * z;
    }
    for (std::size_t t = 0; t < d.trusts.size(); ++t) {
        const auto& tr = d.trusts[t];
        const Eigen::VectorXd eta = tr.rows * beta[tr.model];
        const double theta = d.models[tr.model].theta;
        auto& g = out[pr.first_geography + t];
        for (Eigen::Index r = 0; r < eta.size(); ++r) {
            const double mu = std::exp(std::min(eta(r), max_log_mean));
            g.means(r, k) = mu;
            g.samples(r, k) = noisy(mu, theta, rng);
        }
    }
}

struct RegionSum {
    std::string region;
    std::vector<const GeographySamples*> members;
    double theta = 1.0;
    std::uint64_t seed = 0;
};

void draw_region_sum(const RegionSum& rs, int k, GeographySamples& out)
{
    fit::Rng rng(fit::derive_seed(rs.seed, static_cast<std::uint64_t>(k)));
    for (Eigen::Index r = 0; r < out.means.rows(); ++r) {
        double m = 0.0;
        for (const auto* g : rs.members) m += g->means(r, k);
        out.means(r, k) = m;
        out.samples(r, k) = noisy(m, rs.theta, rng);
    }
}

} // namespace

ForecastSamples simulate_trust_forecast(const std::string& model, const std::vector<RegionDesign>& designs, int n,
                                        std::uint64_t seed, Execution execution)
{
    if (n < 1) throw ValidationError("number of draws must be positive");
    if (designs.empty()) throw ValidationError("nothing to simulate");
    ForecastSamples out;
    out.model = model;
    out.dates = designs.front().dates;
    if (out.dates.empty()) throw ValidationError("no forecast dates");
    out.forecast_date = out.dates.front();
    out.n = n;
    out.seed = seed;

    const auto rows = static_cast<Eigen::Index>(out.dates.size());
    std::vector<PreparedRegion> prepared;
    for (const auto& d : designs) {
        if (d.dates != out.dates) throw ValidationError("regions disagree on forecast dates");
        PreparedRegion pr;
        pr.design = &d;
        pr.seed = fit::derive_seed(seed, {model, d.region});
        pr.first_geography = out.geographies.size();
        for (const auto& m : d.models) pr.roots.push_back(fit::symmetric_sqrt(m.covariance));
        for (const auto& tr : d.trusts) {
            if (tr.rows.rows() != rows || tr.rows.cols() != d.models.at(tr.model).coefficients.size()) {
                throw ValidationError("design rows for trust " + tr.trust + " have the wrong shape");
            }
            if (out.find(tr.trust)) throw ValidationError("trust " + tr.trust + " appears twice");
            GeographySamples g;
            g.id = tr.trust;
            g.level = GeographyLevel::trust;
            g.means.resize(rows, n);
            g.samples.resize(rows, n);
            out.geographies.push_back(std::move(g));
        }
        prepared.push_back(std::move(pr));
    }

    const auto n_regions = static_cast<int>(prepared.size());
    if (execution == Execution::parallel) {
#pragma omp parallel for collapse(2) schedule(static)
        for (int r = 0; r < n_regions; ++r)
            for (int k = 0; k < n; ++k) draw_region(prepared[static_cast<std::size_t>(r)], k, out.geographies);
    } else {
        for (int r = 0; r < n_regions; ++r)
            for (int k = 0; k < n; ++k) draw_region(prepared[static_cast<std::size_t>(r)], k, out.geographies);
    }
    return out;
}

ForecastSamples aggregate_to_region(const ForecastSamples& trust_samples, const Hierarchy& hierarchy,
                                    const std::map<RegionId, double>& region_theta, Execution execution)
{
    ForecastSamples out;
    out.model = trust_samples.model;
    out.forecast_date = trust_samples.forecast_date;
    out.dates = trust_samples.dates;
    out.n = trust_samples.n;
    out.seed = trust_samples.seed;
    out.uncalibrated = trust_samples.uncalibrated;
    const auto rows = static_cast<Eigen::Index>(out.dates.size());

    std::vector<RegionSum> sums;
    for (const auto& [region, theta] : region_theta) {
        RegionSum rs;
        rs.region = region;
        rs.theta = theta;
        rs.seed = fit::derive_seed(trust_samples.seed, {trust_samples.model, "region-noise", region});
        for (const auto& trust : hierarchy.trusts_in(region)) {
            const auto* g = trust_samples.find(trust);
            if (!g || g->level != GeographyLevel::trust) {
                throw ValidationError("region " + region + " is missing trust " + trust);
            }
            rs.members.push_back(g);
        }
        if (rs.members.empty()) throw ValidationError("region " + region + " has no trusts");
        GeographySamples g;
        g.id = region;
        g.level = GeographyLevel::region;
        g.means.resize(rows, out.n);
        g.samples.resize(rows, out.n);
        out.geographies.push_back(std::move(g));
        sums.push_back(std::move(rs));
    }

    const int n_regions = static_cast<int>(sums.size());
    const int n = out.n;
    if (execution == Execution::parallel) {
#pragma omp parallel for collapse(2) schedule(static)
        for (int r = 0; r < n_regions; ++r)
            for (int k = 0; k < n; ++k)
                draw_region_sum(sums[static_cast<std::size_t>(r)], k, out.geographies[static_cast<std::size_t>(r)]);
    } else {
        for (int r = 0; r < n_regions; ++r)
            for (int k = 0; k < n; ++k)
                draw_region_sum(sums[static_cast<std::size_t>(r)], k, out.geographies[static_cast<std::size_t>(r)]);
    }
    return out;
}

ForecastSamples simulate_forecast(const std::string& model, const std::vector<RegionDesign>& designs,
                                  const Hierarchy& hierarchy, int n, std::uint64_t seed, Execution execution)
{
    auto trusts = simulate_trust_forecast(model, designs, n, seed, execution);
    std::map<RegionId, double> theta;
    for (const auto& d : designs) theta[d.region] = d.region_theta;
    auto regions = aggregate_to_region(trusts, hierarchy, theta, execution);
    for (auto& g : regions.geographies) trusts.geographies.push_back(std::move(g));
    return trusts;
}

} // namespace hospcast::forecast
