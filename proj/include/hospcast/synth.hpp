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

#include "hospcast/core/domain.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hospcast::synth {

struct IndicatorSpec {
    std::string id;
    /// The indicator at t tracks the admissions mean at t + lead_days.
    int lead_days = 10;
    /// Standard deviation of multiplicative log-normal noise.
    double noise_sd = 0.0;
    double scale = 1.0;
};

struct WaveScenario {
    std::string name = "custom";
    Date start = Date::from_ymd(2022, 3, 6);
    int n_regions = 2;
    int trusts_per_region = 8;
    int span_days = 210;
    /// Piecewise-constant growth rate per region: (start_day, rate per day).
    /// A region without its own schedule uses the first one.
    std::vector<std::vector<std::pair<int, double>>> rates = {{{0, 0.0}}};
    /// Expected national admissions per day at day 0 (before weekday effects).
    double national_baseline = 500.0;
    /// Spread of trust sizes: trust share ~ exp(N(0, sd)).
    double trust_size_sd = 0.3;
    /// Explicit per-trust log baselines override national_baseline.
    std::vector<double> trust_log_baselines;
    /// Sunday first; rescaled to geometric mean 1.
    std::array<double, 7> weekday = {0.95, 1.05, 1.05, 1.0, 1.0, 0.95, 1.0};
    /// Negative-binomial dispersion; +inf gives the rounded mean.
    double theta = 20.0;
    std::vector<IndicatorSpec> indicators;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SyntheticData {
    AdmissionData admissions;
    /// LTLA-level indicator values.
    IndicatorPanel indicators;
    CatchmentMap catchment;
    /// log of the admissions mean per trust and day.
    std::map<TrustId, std::vector<double>> true_log_mean;
};

SyntheticData generate(const WaveScenario& scenario);

/// "ba45-like", "winter-like", "flat", "exponential".
std::vector<WaveScenario> bundled_scenarios();
WaveScenario bundled_scenario(const std::string& name);

/// admissions.csv, indicators.csv, catchment.csv and truth.csv in `dir`.
void write_synthetic(const std::filesystem::path& dir, const SyntheticData& data);

} // namespace hospcast::synth
