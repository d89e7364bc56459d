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

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace hospcast::testing {

/// Admissions from explicit per-trust counts sharing one start date.
inline AdmissionData make_admissions(Date start, const std::vector<std::pair<std::string, std::string>>& trusts,
                                     const std::vector<std::vector<std::int64_t>>& counts)
{
    std::vector<AdmissionSeries> series;
    for (std::size_t i = 0; i < trusts.size(); ++i) {
        series.push_back({trusts[i].first, trusts[i].second, start, counts[i]});
    }
    return AdmissionData(std::move(series));
}

/// round(a * exp(r t)) for t = 0..n-1.
inline std::vector<std::int64_t> exponential_counts(double a, double r, int n)
{
    std::vector<std::int64_t> out;
    for (int t = 0; t < n; ++t) out.push_back(std::llround(a * std::exp(r * t)));
    return out;
}

} // namespace hospcast::testing
