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

#include "hospcast/ensembles.hpp"

#include "hospcast/core/csv.hpp"
#include "hospcast/core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hospcast::ensembles {

QuantileForecast combine(const std::vector<QuantileForecast>& members, const std::vector<double>& weights,
                         const std::string& name)
{
    if (members.empty()) throw ValidationError("ensemble needs at least one member");
    if (weights.size() != members.size()) throw ValidationError("one weight per member required");
    const auto& first = members.front();
    std::vector<std::map<std::tuple<forecast::GeographyLevel, std::string, Date>, std::size_t>> idx;
    for (const auto& m : members) {
        if (m.levels != first.levels) throw ValidationError("member " + m.model + " uses different quantile levels");
        if (m.cells.size() != first.cells.size()) {
            throw ValidationError("member " + m.model + " has " + std::to_string(m.cells.size()) + " cells, " +
                                  first.model + " has " + std::to_string(first.cells.size()));
        }
        idx.push_back(m.index());
    }
    const bool resort = std::any_of(weights.begin(), weights.end(), [](double w) { return w < 0.0; });

    QuantileForecast out;
    out.model = name;
    out.forecast_date = first.forecast_date;
    out.levels = first.levels;
    for (const auto& c : first.cells) {
        forecast::QuantileCell cell;
        cell.geography_id = c.geography_id;
        cell.level = c.level;
        cell.target_date = c.target_date;
        cell.values.assign(c.values.size(), 0.0);
        for (std::size_t m = 0; m < members.size(); ++m) {
            const auto it = idx[m].find({c.level, c.geography_id, c.target_date});
            if (it == idx[m].end()) {
                throw ValidationError("member " + members[m].model + " is missing cell " + c.geography_id + " " +
                                      c.target_date.iso());
            }
            const auto& mc = members[m].cells[it->second];
            for (std::size_t l = 0; l < cell.values.size(); ++l) cell.values[l] += weights[m] * mc.values[l];
            cell.mean += weights[m] * mc.mean;
            cell.uncalibrated = cell.uncalibrated || mc.uncalibrated;
        }
        if (resort) std::sort(cell.values.begin(), cell.values.end());
        out.cells.push_back(std::move(cell));
    }
    return out;
}

QuantileForecast ensemble_mean(const std::vector<QuantileForecast>& members, const std::string& name)
{
    if (members.empty()) throw ValidationError("ensemble needs at least one member");
    return combine(members, std::vector<double>(members.size(), 1.0 / static_cast<double>(members.size())), name);
}

EnsembleWeights score_weights(const std::vector<std::string>& models, const std::vector<double>& summed_wis,
                              bool proportional)
{
    if (models.empty() || models.size() != summed_wis.size()) throw ValidationError("one score per member required");
    for (double q : summed_wis) {
        if (!(q >= 0.0) || !std::isfinite(q)) throw ValidationError("member scores must be finite and non-negative");
    }
    EnsembleWeights out;
    out.method = "score";
    out.models = models;
    out.weights.assign(models.size(), 0.0);
    if (proportional) {
        double total = 0.0;
        for (double q : summed_wis) total += q;
        for (std::size_t m = 0; m < models.size(); ++m) {
            out.weights[m] = total > 0.0 ? summed_wis[m] / total : 1.0 / static_cast<double>(models.size());
        }
        return out;
    }
    const auto zeros = std::count(summed_wis.begin(), summed_wis.end(), 0.0);
    if (zeros > 0) {
        for (std::size_t m = 0; m < models.size(); ++m) {
            if (summed_wis[m] == 0.0) out.weights[m] = 1.0 / static_cast<double>(zeros);
        }
        return out;
    }
    double total = 0.0;
    for (double q : summed_wis) total += 1.0 / q;
    for (std::size_t m = 0; m < models.size(); ++m) out.weights[m] = (1.0 / summed_wis[m]) / total;
    return out;
}

QuantileForecast ensemble_by_score(const std::vector<QuantileForecast>& members, const EnsembleWeights& weights,
                                   const std::string& name)
{
    return combine(members, weights.weights, name);
}

EnsembleWeights regression_weights(const std::vector<std::string>& models, const Eigen::MatrixXd& member_medians,
                                   const Eigen::VectorXd& truth, const RegressionOptions& options)
{
    const auto m = static_cast<Eigen::Index>(models.size());
    if (m == 0 || member_medians.cols() != m) throw ValidationError("one median column per member required");
    if (member_medians.rows() != truth.size()) throw ValidationError("medians and truth differ in length");
    if (member_medians.rows() < m) {
        throw ValidationError("regression weights need at least " + std::to_string(m) + " scored cells");
    }
    Eigen::MatrixXd x = member_medians;
    Eigen::VectorXd y = truth;
    if (options.standardize) {
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const double s = std::sqrt(std::max(x.row(r).mean(), 1.0));
            x.row(r) /= s;
            y(r) /= s;
        }
    }
    Eigen::MatrixXd a = x.transpose() * x;
    Eigen::VectorXd b = x.transpose() * y;

    EnsembleWeights out;
    out.models = models;
    if (options.mode == RegressionMode::bayes) {
        if (!(options.prior_scale > 0.0)) throw ValidationError("prior_scale must be positive");
        const double lambda = 1.0 / (options.prior_scale * options.prior_scale);
        const double mean = options.prior_mean.value_or(1.0 / static_cast<double>(m));
        a.diagonal().array() += lambda;
        b.array() += lambda * mean;
        out.method = "regression-bayes";
    } else {
        out.method = "regression-ols";
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < m) {
        throw NumericalError("rank-deficient member design in OLS weights; use bayes mode", {});
    }
    const Eigen::VectorXd beta = qr.solve(b);
    out.weights.assign(beta.data(), beta.data() + beta.size());
    return out;
}

QuantileForecast ensemble_by_regression(const std::vector<QuantileForecast>& members, const EnsembleWeights& weights,
                                        const std::string& name)
{
    return combine(members, weights.weights, name);
}

std::vector<scoring::ScoreRecord> truncate_eval_window(const std::vector<scoring::ScoreRecord>& records,
                                                       int days_elapsed, std::vector<std::string>* warnings)
{
    std::vector<scoring::ScoreRecord> out;
    for (const auto& r : records)
        if (r.days_ahead <= days_elapsed) out.push_back(r);
    if (out.empty() && warnings) warnings->push_back("evaluation window is empty");
    return out;
}

void write_weights(const std::filesystem::path& path, const std::vector<EnsembleWeights>& weights)
{
    csv::Writer w(path, {"method", "week_start", "model", "weight"});
    for (const auto& e : weights) {
        for (std::size_t m = 0; m < e.models.size(); ++m) {
            w.row({e.method, e.week_start.iso(), e.models[m], csv::format(e.weights[m])});
        }
    }
}

} // namespace hospcast::ensembles
