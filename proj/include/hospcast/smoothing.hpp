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

#include <optional>
#include <span>
#include <vector>

namespace hospcast {

/// Output of the LOESS smoother u(.).
struct SmoothedSeries {
    std::vector<double> values;
    int span_days = 0;

    /// log(max(u, floor)); the floor keeps log(u(H)) defined for zero-count stretches.
    std::vector<double> log_floored(double floor = 0.5) const;
    std::vector<double> floored(double floor = 0.5) const;
};

constexpr int default_loess_span_days = 21;

/// Local linear regression with tricube weights over a centred window of
/// `span_days` points, truncated at the series ends.
SmoothedSeries loess_smooth(std::span<const double> series, int span_days = default_loess_span_days);

/// Centred moving average; the window shrinks to what is available at the ends.
std::vector<double> moving_average(std::span<const double> series, int window = 7);

/// H(t) / H(t-7). Empty when H(t-7) is zero.
std::optional<double> hospitalisation_ratio(std::span<const double> series, std::size_t t);

struct WaveDetectionOptions {
    int offset_days = 14;
    int peak_window_days = 14;
    /// Required rise of the peak over the higher of its two troughs (relative).
    double min_prominence = 0.2;
    std::string wave_name = "wave";
};

/// Growth/peak/decline windows from the 7-day moving average of a national
/// series starting at `start`. All boundaries are Sundays.
std::vector<WaveWindow> detect_wave_phases(std::span<const double> national, Date start,
                                           const WaveDetectionOptions& options = {});

} // namespace hospcast
