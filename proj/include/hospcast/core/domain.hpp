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

#include "hospcast/core/date.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hospcast {

using TrustId = std::string;
using RegionId = std::string;

struct Geography {
    TrustId trust_id;
    RegionId region_id;
    std::string name;
};

/// Trust -> Region parentage. Every trust belongs to exactly one region.
class Hierarchy {
public:
    void add(const TrustId& trust, const RegionId& region);

    const RegionId& region_of(const TrustId& trust) const;
    bool contains(const TrustId& trust) const { return parent_.count(trust) != 0; }
    /// Sorted.
    std::vector<TrustId> trusts_in(const RegionId& region) const;
    std::vector<TrustId> trusts() const;
    std::vector<RegionId> regions() const;

private:
    std::map<TrustId, RegionId> parent_;
};

/// Daily admission counts for one trust over a contiguous span.
struct AdmissionSeries {
    TrustId trust_id;
    RegionId region_id;
    Date start;
    std::vector<std::int64_t> counts;

    Date end() const { return start + static_cast<int>(counts.size()) - 1; }
    std::int64_t at(Date d) const { return counts.at(static_cast<std::size_t>(d - start)); }
    bool covers(Date d) const { return d >= start && d <= end(); }

    bool operator==(const AdmissionSeries&) const = default;
};

/// Admissions for a set of trusts that share one date span.
class AdmissionData {
public:
    AdmissionData() = default;
    /// Validates that all series share a span and counts are non-negative.
    explicit AdmissionData(std::vector<AdmissionSeries> series);

    const std::vector<AdmissionSeries>& series() const { return series_; }
    const AdmissionSeries& trust(const TrustId& id) const;
    const Hierarchy& hierarchy() const { return hierarchy_; }
    Date start() const { return series_.front().start; }
    Date end() const { return series_.front().end(); }
    bool empty() const { return series_.empty(); }

    /// Sum over trusts in the region for each day of the span.
    std::vector<double> region_totals(const RegionId& region) const;
    std::vector<double> national_totals() const;

    /// Copy restricted to [from, to].
    AdmissionData window(Date from, Date to) const;

private:
    std::vector<AdmissionSeries> series_;
    Hierarchy hierarchy_;
};

struct IndicatorSeries {
    std::string geography_id;
    std::string indicator_id;
    Date start;
    std::vector<double> values;

    Date end() const { return start + static_cast<int>(values.size()) - 1; }
    bool covers(Date d) const { return d >= start && d <= end(); }
    double at(Date d) const { return values.at(static_cast<std::size_t>(d - start)); }
};

/// Daily indicator values keyed by (geography, indicator).
class IndicatorPanel {
public:
    void add(IndicatorSeries series);

    const IndicatorSeries& get(const std::string& geography, const std::string& indicator) const;
    const IndicatorSeries* find(const std::string& geography, const std::string& indicator) const;
    std::set<std::string> indicators() const;
    std::set<std::string> geographies() const;
    const std::map<std::pair<std::string, std::string>, IndicatorSeries>& all() const { return series_; }

    /// Copy with every value after `last` removed.
    IndicatorPanel truncated(Date last) const;

private:
    std::map<std::pair<std::string, std::string>, IndicatorSeries> series_;
};

struct CatchmentEntry {
    std::string ltla_id;
    TrustId trust_id;
    double weight = 0.0;
    double ltla_population = 0.0;
};

/// Probabilistic LTLA -> Trust population mapping.
class CatchmentMap {
public:
    CatchmentMap() = default;
    /// Validates weight ranges, per-LTLA sums (1 +- 1e-9) and positive populations.
    explicit CatchmentMap(std::vector<CatchmentEntry> entries);

    const std::vector<CatchmentEntry>& entries() const { return entries_; }
    bool has_ltla(const std::string& ltla) const;
    std::vector<TrustId> trusts() const;

    /// p_i = sum over LTLAs of weight x population.
    double population(const TrustId& trust) const;

private:
    std::vector<CatchmentEntry> entries_;
    std::map<TrustId, double> population_;
    std::set<std::string> ltlas_;
};

double catchment_population(const CatchmentMap& map, const TrustId& trust);

/// Population-weighted mean of LTLA indicator values for each trust.
IndicatorPanel map_indicators_to_trusts(const IndicatorPanel& ltla_panel, const CatchmentMap& map);

enum class Phase { growth, peak, decline };

const char* to_string(Phase phase);
Phase parse_phase(const std::string& text);

struct WaveWindow {
    std::string wave_name;
    Phase phase = Phase::growth;
    Date start;
    Date end;

    bool contains(Date d) const { return d >= start && d < end; }
    bool operator==(const WaveWindow&) const = default;
};

/// Phase label for a date, if it falls inside one of the windows.
std::optional<Phase> phase_of(const std::vector<WaveWindow>& windows, Date d);

} // namespace hospcast
