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

#include "hospcast/smoothing.hpp"

#include "hospcast/core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hospcast {

std::vector<double> SmoothedSeries::floored(double floor) const
{
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [floor](double v) { return std::max(v, floor); });
    return out;
}

std::vector<double> SmoothedSeries::log_floored(double floor) const
{
    auto out = floored(floor);
    for (auto& v : out) v = std::log(v);
    return out;
}

SmoothedSeries loess_smooth(std::span<const double> series, int span_days)
{
    if (span_days < 7) {
        throw ValidationError("LOESS span must be at least 7 days, got " + std::to_string(span_days));
    }
    const auto n = static_cast<std::ptrdiff_t>(series.size());
    if (n < span_days) {
        throw ValidationError("series too short for LOESS: " + std::to_string(n) + " points, span " +
                              std::to_string(span_days));
    }
    const std::ptrdiff_t left = (span_days - 1) / 2;
    const std::ptrdiff_t right = span_days - 1 - left;
    // Bandwidth one step past the furthest window point so every point in the window has weight.
    const double bandwidth = static_cast<double>(std::max(left, right) + 1);

    SmoothedSeries out{std::vector<double>(series.size()), span_days};
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto lo = std::max<std::ptrdiff_t>(0, i - left);
        const auto hi = std::min<std::ptrdiff_t>(n - 1, i + right);
        double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
        for (auto j = lo; j <= hi; ++j) {
            const double x = static_cast<double>(j - i);
            const double u = std::abs(x) / bandwidth;
            const double c = 1.0 - u * u * u;
            const double w = c * c * c;
            const double y = series[static_cast<std::size_t>(j)];
            sw += w;
            swx += w * x;
            swy += w * y;
            swxx += w * x * x;
            swxy += w * x * y;
        }
        // Local fit a + b x evaluated at x = 0, with x centred on the weighted mean for stability.
        const double xbar = swx / sw;
        const double ybar = swy / sw;
        const double sxx = swxx - sw * xbar * xbar;
        const double sxy = swxy - sw * xbar * ybar;
        const double slope = sxx > 0 ? sxy / sxx : 0.0;
        out.values[static_cast<std::size_t>(i)] = ybar - slope * xbar;
    }
    return out;
}

std::vector<double> moving_average(std::span<const double> series, int window)
{
    if (window < 1) {
        throw ValidationError("moving average window must be positive");
    }
    const auto n = static_cast<std::ptrdiff_t>(series.size());
    if (n < window) {
        throw ValidationError("series shorter than moving-average window");
    }
    const std::ptrdiff_t left = (window - 1) / 2;
    const std::ptrdiff_t right = window - 1 - left;
    std::vector<double> out(series.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto lo = std::max<std::ptrdiff_t>(0, i - left);
        const auto hi = std::min<std::ptrdiff_t>(n - 1, i + right);
        double s = 0;
        for (auto j = lo; j <= hi; ++j) s += series[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = s / static_cast<double>(hi - lo + 1);
    }
    return out;
}

std::optional<double> hospitalisation_ratio(std::span<const double> series, std::size_t t)
{
    if (t < 7 || t >= series.size()) {
        throw ValidationError("hospitalisation ratio needs 7 days of history before t and t inside the series");
    }
    const double prev = series[t - 7];
    if (prev == 0.0) {
        return std::nullopt;
    }
    return series[t] / prev;
}

std::vector<WaveWindow> detect_wave_phases(std::span<const double> national, Date start,
                                           const WaveDetectionOptions& options)
{
    if (options.peak_window_days < 1 || options.offset_days < 0) {
        throw ValidationError("peak_window_days must be positive and offset_days non-negative");
    }
    const auto ma = moving_average(national, 7);
    const auto peak_it = std::max_element(ma.begin(), ma.end());
    const auto peak = static_cast<std::size_t>(peak_it - ma.begin());
    if (peak == 0 || peak + 1 == ma.size()) {
        throw ValidationError("no interior maximum in the 7-day moving average");
    }
    const auto trough_before = static_cast<std::size_t>(std::min_element(ma.begin(), peak_it) - ma.begin());
    const auto trough_after = static_cast<std::size_t>(std::min_element(peak_it + 1, ma.end()) - ma.begin());
    const double floor = std::max(ma[trough_before], ma[trough_after]);
    if (*peak_it < (1.0 + options.min_prominence) * floor) {
        throw ValidationError("no peak: the 7-day moving average rises only " +
                              std::to_string(static_cast<int>(std::round(100.0 * (*peak_it / floor - 1.0)))) +
                              "% above its troughs");
    }

    const Date wave_start = (start + static_cast<int>(trough_before) - options.offset_days).preceding_sunday();
    const Date wave_end = (start + static_cast<int>(trough_after)).following_sunday();
    const Date peak_date = start + static_cast<int>(peak);

    Date peak_start = (peak_date - options.peak_window_days / 2).preceding_sunday();
    Date peak_end = peak_start + 7 * ((options.peak_window_days + 6) / 7);
    peak_start = std::max(peak_start, wave_start);
    peak_end = std::min(peak_end, wave_end);
    if (!(wave_start < peak_start) || !(peak_end < wave_end)) {
        throw ValidationError("peak window does not leave room for growth and decline phases");
    }
    return {
        {options.wave_name, Phase::growth, wave_start, peak_start},
        {options.wave_name, Phase::peak, peak_start, peak_end},
        {options.wave_name, Phase::decline, peak_end, wave_end},
    };
}

} // namespace hospcast
