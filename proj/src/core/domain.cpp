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

#include "hospcast/core/domain.hpp"

#include "hospcast/core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hospcast {

void Hierarchy::add(const TrustId& trust, const RegionId& region)
{
    if (region.empty()) {
        throw ValidationError("trust " + trust + " has an empty region id");
    }
    auto [it, inserted] = parent_.emplace(trust, region);
    if (!inserted && it->second != region) {
        throw ValidationError("trust " + trust + " assigned to two regions: " + it->second + " and " + region);
    }
}

const RegionId& Hierarchy::region_of(const TrustId& trust) const
{
    auto it = parent_.find(trust);
    if (it == parent_.end()) {
        throw ValidationError("unknown trust " + trust);
    }
    return it->second;
}

std::vector<TrustId> Hierarchy::trusts_in(const RegionId& region) const
{
    std::vector<TrustId> out;
    for (const auto& [t, r] : parent_) {
        if (r == region) out.push_back(t);
    }
    return out;
}

std::vector<TrustId> Hierarchy::trusts() const
{
    std::vector<TrustId> out;
    for (const auto& kv : parent_) out.push_back(kv.first);
    return out;
}

std::vector<RegionId> Hierarchy::regions() const
{
    std::set<RegionId> s;
    for (const auto& kv : parent_) s.insert(kv.second);
    return {s.begin(), s.end()};
}

AdmissionData::AdmissionData(std::vector<AdmissionSeries> series) : series_(std::move(series))
{
    if (series_.empty()) {
        throw ValidationError("no admission series");
    }
    std::sort(series_.begin(), series_.end(),
              [](const auto& a, const auto& b) { return a.trust_id < b.trust_id; });
    for (const auto& s : series_) {
        if (s.counts.empty()) {
            throw ValidationError("empty admission series for trust " + s.trust_id);
        }
        if (s.start != series_.front().start || s.end() != series_.front().end()) {
            throw ValidationError("span mismatch: trust " + s.trust_id + " covers " + s.start.iso() + ".." +
                                  s.end().iso() + " but trust " + series_.front().trust_id + " covers " +
                                  series_.front().start.iso() + ".." + series_.front().end().iso());
        }
        for (auto c : s.counts) {
            if (c < 0) throw ValidationError("negative count for trust " + s.trust_id);
        }
        if (hierarchy_.contains(s.trust_id)) {
            throw ValidationError("duplicate series for trust " + s.trust_id);
        }
        hierarchy_.add(s.trust_id, s.region_id);
    }
}

const AdmissionSeries& AdmissionData::trust(const TrustId& id) const
{
    auto it = std::lower_bound(series_.begin(), series_.end(), id,
                               [](const AdmissionSeries& s, const TrustId& t) { return s.trust_id < t; });
    if (it == series_.end() || it->trust_id != id) {
        throw ValidationError("unknown trust " + id);
    }
    return *it;
}

std::vector<double> AdmissionData::region_totals(const RegionId& region) const
{
    std::vector<double> out(series_.front().counts.size(), 0.0);
    for (const auto& s : series_) {
        if (s.region_id != region) continue;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += static_cast<double>(s.counts[i]);
    }
    return out;
}

std::vector<double> AdmissionData::national_totals() const
{
    std::vector<double> out(series_.front().counts.size(), 0.0);
    for (const auto& s : series_) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += static_cast<double>(s.counts[i]);
    }
    return out;
}

AdmissionData AdmissionData::window(Date from, Date to) const
{
    if (from < start() || to > end() || from > to) {
        throw ValidationError("window " + from.iso() + ".." + to.iso() + " outside admissions span " +
                              start().iso() + ".." + end().iso());
    }
    std::vector<AdmissionSeries> out;
    out.reserve(series_.size());
    auto offset = static_cast<std::size_t>(from - start());
    auto len = static_cast<std::size_t>(to - from + 1);
    for (const auto& s : series_) {
        AdmissionSeries w{s.trust_id, s.region_id, from, {}};
        w.counts.assign(s.counts.begin() + static_cast<std::ptrdiff_t>(offset),
                        s.counts.begin() + static_cast<std::ptrdiff_t>(offset + len));
        out.push_back(std::move(w));
    }
    return AdmissionData(std::move(out));
}

void IndicatorPanel::add(IndicatorSeries series)
{
    for (double v : series.values) {
        if (!std::isfinite(v)) {
            throw ValidationError("non-finite indicator value for " + series.geography_id + "/" + series.indicator_id);
        }
    }
    auto key = std::make_pair(series.geography_id, series.indicator_id);
    if (series_.count(key)) {
        throw ValidationError("duplicate indicator series " + key.first + "/" + key.second);
    }
    series_.emplace(std::move(key), std::move(series));
}

const IndicatorSeries* IndicatorPanel::find(const std::string& geography, const std::string& indicator) const
{
    auto it = series_.find({geography, indicator});
    return it == series_.end() ? nullptr : &it->second;
}

const IndicatorSeries& IndicatorPanel::get(const std::string& geography, const std::string& indicator) const
{
    const auto* s = find(geography, indicator);
    if (!s) {
        throw ValidationError("no indicator series for " + geography + "/" + indicator);
    }
    return *s;
}

std::set<std::string> IndicatorPanel::indicators() const
{
    std::set<std::string> out;
    for (const auto& kv : series_) out.insert(kv.first.second);
    return out;
}

std::set<std::string> IndicatorPanel::geographies() const
{
    std::set<std::string> out;
    for (const auto& kv : series_) out.insert(kv.first.first);
    return out;
}

IndicatorPanel IndicatorPanel::truncated(Date last) const
{
    IndicatorPanel out;
    for (const auto& [key, s] : series_) {
        if (s.start > last) continue;
        IndicatorSeries t = s;
        if (t.end() > last) t.values.resize(static_cast<std::size_t>(last - t.start + 1));
        out.series_.emplace(key, std::move(t));
    }
    return out;
}

CatchmentMap::CatchmentMap(std::vector<CatchmentEntry> entries) : entries_(std::move(entries))
{
    std::map<std::string, double> sums;
    for (const auto& e : entries_) {
        if (!(e.weight >= 0.0 && e.weight <= 1.0)) {
            throw ValidationError("catchment weight outside [0,1] for ltla " + e.ltla_id + " -> " + e.trust_id);
        }
        if (!(e.ltla_population > 0.0)) {
            throw ValidationError("non-positive population for ltla " + e.ltla_id);
        }
        sums[e.ltla_id] += e.weight;
        population_[e.trust_id] += e.weight * e.ltla_population;
        ltlas_.insert(e.ltla_id);
    }
    for (const auto& [ltla, total] : sums) {
        if (std::abs(total - 1.0) > 1e-9) {
            throw ValidationError("catchment weights for ltla " + ltla + " sum to " + std::to_string(total) +
                                  ", expected 1");
        }
    }
    for (const auto& [trust, p] : population_) {
        if (!(p > 0.0)) {
            throw ValidationError("trust " + trust + " has zero catchment population");
        }
    }
}

bool CatchmentMap::has_ltla(const std::string& ltla) const
{
    return ltlas_.count(ltla) != 0;
}

std::vector<TrustId> CatchmentMap::trusts() const
{
    std::vector<TrustId> out;
    for (const auto& kv : population_) out.push_back(kv.first);
    return out;
}

double CatchmentMap::population(const TrustId& trust) const
{
    auto it = population_.find(trust);
    if (it == population_.end()) {
        throw ValidationError("trust " + trust + " is not in the catchment map");
    }
    return it->second;
}

double catchment_population(const CatchmentMap& map, const TrustId& trust)
{
    return map.population(trust);
}

IndicatorPanel map_indicators_to_trusts(const IndicatorPanel& ltla_panel, const CatchmentMap& map)
{
    std::vector<std::string> unmapped;
    for (const auto& g : ltla_panel.geographies()) {
        if (!map.has_ltla(g)) unmapped.push_back(g);
    }
    if (!unmapped.empty()) {
        std::string ids;
        for (const auto& u : unmapped) ids += (ids.empty() ? "" : ", ") + u;
        throw ValidationError("indicator geographies missing from catchment map: " + ids);
    }

    IndicatorPanel out;
    for (const auto& indicator : ltla_panel.indicators()) {
        std::map<TrustId, std::vector<const CatchmentEntry*>> feeds;
        for (const auto& e : map.entries()) {
            if (e.weight > 0.0 && ltla_panel.find(e.ltla_id, indicator)) feeds[e.trust_id].push_back(&e);
        }
        for (const auto& [trust, entries] : feeds) {
            const auto& first = ltla_panel.get(entries.front()->ltla_id, indicator);
            Date start = first.start;
            Date end = first.end();
            for (const auto* e : entries) {
                const auto& s = ltla_panel.get(e->ltla_id, indicator);
                start = std::max(start, s.start);
                end = std::min(end, s.end());
            }
            if (end < start) {
                throw ValidationError("indicator " + indicator + " has no common span for trust " + trust);
            }
            IndicatorSeries ts{trust, indicator, start, std::vector<double>(static_cast<std::size_t>(end - start + 1), 0.0)};
            double mass = 0.0;
            for (const auto* e : entries) {
                const auto& s = ltla_panel.get(e->ltla_id, indicator);
                double w = e->weight * e->ltla_population;
                mass += w;
                for (std::size_t i = 0; i < ts.values.size(); ++i) {
                    ts.values[i] += w * s.at(start + static_cast<int>(i));
                }
            }
            for (auto& v : ts.values) v /= mass;
            out.add(std::move(ts));
        }
    }
    return out;
}

const char* to_string(Phase phase)
{
    switch (phase) {
    case Phase::growth: return "growth";
    case Phase::peak: return "peak";
    case Phase::decline: return "decline";
    }
    return "?";
}

Phase parse_phase(const std::string& text)
{
    if (text == "growth") return Phase::growth;
    if (text == "peak") return Phase::peak;
    if (text == "decline") return Phase::decline;
    throw ValidationError("unknown phase '" + text + "'");
}

std::optional<Phase> phase_of(const std::vector<WaveWindow>& windows, Date d)
{
    for (const auto& w : windows) {
        if (w.contains(d)) return w.phase;
    }
    return std::nullopt;
}

} // namespace hospcast
