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

#include "hospcast/synth.hpp"

#include "hospcast/core/csv.hpp"
#include "hospcast/core/errors.hpp"
#include "hospcast/core/io.hpp"
#include "hospcast/fit/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace hospcast::synth {

namespace {

std::string region_id(int r)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "R%02d", r + 1);
    return buf;
}

std::string trust_id(int r, int i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "R%02dT%02d", r + 1, i + 1);
    return buf;
}

double rate_at(const std::vector<std::pair<int, double>>& schedule, int day)
{
    double r = 0.0;
    for (const auto& [from, rate] : schedule) {
        if (day >= from) r = rate;
    }
    return r;
}

} // namespace

void WaveScenario::validate() const
{
    if (n_regions < 1 || trusts_per_region < 1) throw ValidationError("scenario needs at least one trust");
    if (span_days < 1) throw ValidationError("scenario span must be positive");
    if (rates.empty()) throw ValidationError("scenario needs a growth-rate schedule");
    for (const auto& s : rates) {
        if (s.empty()) throw ValidationError("empty growth-rate schedule");
        for (const auto& [d, r] : s) {
            if (!std::isfinite(r)) throw ValidationError("growth rates must be finite");
        }
    }
    if (!(theta > 0.0)) throw ValidationError("theta must be positive");
    for (double w : weekday) {
        if (!(w > 0.0)) throw ValidationError("weekday multipliers must be positive");
    }
    if (!trust_log_baselines.empty() &&
        trust_log_baselines.size() != static_cast<std::size_t>(n_regions * trusts_per_region)) {
        throw ValidationError("one log baseline per trust required");
    }
    if (trust_log_baselines.empty() && !(national_baseline > 0.0)) {
        throw ValidationError("national baseline must be positive");
    }
    for (const auto& ind : indicators) {
        if (ind.lead_days < 0 || !(ind.scale > 0.0) || !(ind.noise_sd >= 0.0)) {
            throw ValidationError("invalid indicator spec " + ind.id);
        }
    }
}

SyntheticData generate(const WaveScenario& sc)
{
    sc.validate();
    const int n_trusts = sc.n_regions * sc.trusts_per_region;
    int max_lead = 0;
    for (const auto& ind : sc.indicators) max_lead = std::max(max_lead, ind.lead_days);
    const int days = sc.span_days + max_lead;

    std::array<double, 7> weekday = sc.weekday;
    double log_gm = 0.0;
    for (double w : weekday) log_gm += std::log(w) / 7.0;
    for (auto& w : weekday) w /= std::exp(log_gm);

    // Trust sizes and catchment populations.
    std::vector<double> log_base(static_cast<std::size_t>(n_trusts));
    std::vector<double> population(static_cast<std::size_t>(n_trusts));
    {
        fit::Rng rng(fit::derive_seed(sc.seed, {"sizes"}));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> uniform(150000.0, 600000.0);
        std::vector<double> share(static_cast<std::size_t>(n_trusts));
        for (int i = 0; i < n_trusts; ++i) {
            share[static_cast<std::size_t>(i)] = std::exp(sc.trust_size_sd * normal(rng));
            population[static_cast<std::size_t>(i)] = std::round(uniform(rng));
        }
        const double total = std::accumulate(share.begin(), share.end(), 0.0);
        for (int i = 0; i < n_trusts; ++i) {
            log_base[static_cast<std::size_t>(i)] =
                sc.trust_log_baselines.empty()
                    ? std::log(sc.national_baseline * share[static_cast<std::size_t>(i)] / total)
                    : sc.trust_log_baselines[static_cast<std::size_t>(i)];
        }
    }

    // Log means over the span plus the longest indicator lead.
    std::vector<std::vector<double>> log_mean(static_cast<std::size_t>(n_trusts), std::vector<double>(days));
    for (int r = 0; r < sc.n_regions; ++r) {
        const auto& schedule = sc.rates[static_cast<std::size_t>(r) < sc.rates.size() ? r : 0];
        std::vector<double> growth(static_cast<std::size_t>(days), 0.0);
        for (int d = 1; d < days; ++d) growth[d] = growth[d - 1] + rate_at(schedule, d - 1);
        for (int i = 0; i < sc.trusts_per_region; ++i) {
            const int k = r * sc.trusts_per_region + i;
            for (int d = 0; d < days; ++d) {
                log_mean[k][d] = log_base[k] + growth[d] + std::log(weekday[(sc.start + d).weekday()]);
            }
        }
    }

    SyntheticData out;
    std::vector<AdmissionSeries> series;
    for (int r = 0; r < sc.n_regions; ++r) {
        for (int i = 0; i < sc.trusts_per_region; ++i) {
            const int k = r * sc.trusts_per_region + i;
            AdmissionSeries s;
            s.trust_id = trust_id(r, i);
            s.region_id = region_id(r);
            s.start = sc.start;
            fit::Rng rng(fit::derive_seed(sc.seed, {"admissions", s.trust_id}));
            for (int d = 0; d < sc.span_days; ++d) {
                const double mu = std::exp(log_mean[k][d]);
                s.counts.push_back(std::isinf(sc.theta) ? std::llround(mu)
                                                        : fit::sample_negative_binomial(mu, sc.theta, rng));
            }
            out.true_log_mean[s.trust_id] =
                std::vector<double>(log_mean[k].begin(), log_mean[k].begin() + sc.span_days);
            series.push_back(std::move(s));
        }
    }
    out.admissions = AdmissionData(std::move(series));

    // One LTLA per trust, plus an LTLA split between neighbouring trusts for
    // every third trust of a region.
    struct Ltla {
        std::string id;
        std::vector<std::pair<int, double>> feeds;
        double population;
    };
    std::vector<Ltla> ltlas;
    for (int r = 0; r < sc.n_regions; ++r) {
        for (int i = 0; i < sc.trusts_per_region; ++i) {
            const int k = r * sc.trusts_per_region + i;
            ltlas.push_back({"L" + trust_id(r, i), {{k, 1.0}}, population[static_cast<std::size_t>(k)]});
            if (i % 3 == 2 && i + 1 < sc.trusts_per_region) {
                ltlas.push_back({"L" + trust_id(r, i) + "S", {{k, 0.6}, {k + 1, 0.4}},
                                 std::round(0.5 * population[static_cast<std::size_t>(k)])});
            }
        }
    }
    std::vector<CatchmentEntry> entries;
    std::vector<double> trust_pop(static_cast<std::size_t>(n_trusts), 0.0);
    for (const auto& l : ltlas) {
        for (const auto& [k, w] : l.feeds) {
            entries.push_back({l.id, trust_id(k / sc.trusts_per_region, k % sc.trusts_per_region), w, l.population});
            trust_pop[static_cast<std::size_t>(k)] += w * l.population;
        }
    }
    out.catchment = CatchmentMap(std::move(entries));

    // Indicators: admissions rate per 100k population, led by lead_days.
    for (const auto& ind : sc.indicators) {
        for (const auto& l : ltlas) {
            fit::Rng rng(fit::derive_seed(sc.seed, {"indicator", ind.id, l.id}));
            std::normal_distribution<double> normal(0.0, 1.0);
            IndicatorSeries s;
            s.geography_id = l.id;
            s.indicator_id = ind.id;
            s.start = sc.start;
            for (int d = 0; d < sc.span_days; ++d) {
                double v = 0.0;
                for (const auto& [k, w] : l.feeds) {
                    v += w * std::exp(log_mean[k][d + ind.lead_days]) / trust_pop[static_cast<std::size_t>(k)] * 1e5;
                }
                const double noise = ind.noise_sd > 0.0 ? std::exp(ind.noise_sd * normal(rng)) : 1.0;
                s.values.push_back(ind.scale * v * noise);
            }
            out.indicators.add(std::move(s));
        }
    }
    return out;
}

namespace {

std::vector<IndicatorSpec> default_indicators()
{
    return {{"google-trends", 10, 0.10, 0.5}, {"111-calls", 7, 0.15, 2.0}, {"111-online", 5, 0.20, 1.0}};
}

} // namespace

std::vector<WaveScenario> bundled_scenarios()
{
    std::vector<WaveScenario> out;

    WaveScenario ba;
    ba.name = "ba45-like";
    ba.national_baseline = 500.0;
    ba.rates = {
        {{0, -0.01}, {77, 0.075}, {98, 0.01}, {105, -0.01}, {112, -0.03}, {175, 0.01}},
        {{0, -0.01}, {80, 0.072}, {101, 0.01}, {108, -0.01}, {115, -0.028}, {175, 0.01}},
    };
    ba.indicators = default_indicators();
    out.push_back(ba);

    WaveScenario winter;
    winter.name = "winter-like";
    winter.national_baseline = 300.0;
    winter.rates = {
        {{0, -0.003}, {70, 0.03}, {100, -0.03}, {130, 0.005}},
        {{0, -0.003}, {73, 0.029}, {103, -0.029}, {133, 0.005}},
    };
    winter.indicators = default_indicators();
    out.push_back(winter);

    WaveScenario flat;
    flat.name = "flat";
    flat.rates = {{{0, 0.0}}};
    flat.indicators = default_indicators();
    out.push_back(flat);

    WaveScenario expo;
    expo.name = "exponential";
    expo.span_days = 140;
    expo.national_baseline = 20.0;
    expo.rates = {{{0, 0.05}}};
    expo.indicators = default_indicators();
    out.push_back(expo);
    return out;
}

WaveScenario bundled_scenario(const std::string& name)
{
    for (auto& s : bundled_scenarios()) {
        if (s.name == name) return s;
    }
    throw ValidationError("unknown scenario '" + name + "' (expected ba45-like, winter-like, flat or exponential)");
}

void write_synthetic(const std::filesystem::path& dir, const SyntheticData& data)
{
    std::filesystem::create_directories(dir);
    io::write_admissions(dir / "admissions.csv", data.admissions);
    io::write_indicators(dir / "indicators.csv", data.indicators);
    io::write_catchment(dir / "catchment.csv", data.catchment);
    csv::Writer w(dir / "truth.csv", {"date", "trust_id", "true_log_mean"});
    const Date start = data.admissions.start();
    const int n = data.admissions.end() - start + 1;
    for (int d = 0; d < n; ++d) {
        for (const auto& [trust, values] : data.true_log_mean) {
            w.row({(start + d).iso(), trust, csv::format(values[static_cast<std::size_t>(d)])});
        }
    }
}

} // namespace hospcast::synth
