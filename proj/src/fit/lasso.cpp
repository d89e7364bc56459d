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

#include "hospcast/fit/lasso.hpp"

#include "hospcast/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

namespace hospcast::fit {

namespace {

constexpr double eta_limit = 50.0;

struct Problem {
    Eigen::MatrixXd x; // lasso columns scaled to unit standard deviation
    Eigen::VectorXd offset;
    Eigen::VectorXd y;
    std::vector<Eigen::Index> unpenalized;
    std::vector<Eigen::Index> lasso;

    Eigen::Index n() const { return x.rows(); }
    Eigen::Index p() const { return x.cols(); }
};

Eigen::VectorXd linear_predictor(const Problem& pr, const Eigen::VectorXd& beta)
{
    return (pr.x * beta + pr.offset).array().min(eta_limit).max(-eta_limit).matrix();
}

double objective(const Problem& pr, const Eigen::VectorXd& beta, double lambda)
{
    const Eigen::VectorXd eta = linear_predictor(pr, beta);
    double loss = (eta.array().exp() - pr.y.array() * eta.array()).sum() / static_cast<double>(pr.n());
    double l1 = 0.0;
    for (auto j : pr.lasso) l1 += std::abs(beta(j));
    return loss + lambda * l1;
}

double soft_threshold(double g, double lambda)
{
    if (g > lambda) return g - lambda;
    if (g < -lambda) return g + lambda;
    return 0.0;
}

/// Exact minimiser of 0.5 b'Gb - c'b + lambda |b_lasso|_1 by sign-constrained
/// active-set steps, started from the coordinate-descent iterate.
std::optional<Eigen::VectorXd> finish_active_set(const Eigen::MatrixXd& gram, const Eigen::VectorXd& c, double lambda,
                                                 Eigen::VectorXd beta, const Problem& pr)
{
    const auto p = pr.p();
    std::vector<double> sign(static_cast<std::size_t>(p), 0.0);
    std::vector<bool> is_lasso(static_cast<std::size_t>(p), false);
    for (auto j : pr.lasso) {
        is_lasso[static_cast<std::size_t>(j)] = true;
        if (beta(j) != 0.0) sign[static_cast<std::size_t>(j)] = beta(j) > 0.0 ? 1.0 : -1.0;
    }
    const double ridge = 1e-12 * std::max(gram.diagonal().maxCoeff(), 1e-300);
    const int max_steps = 20 * static_cast<int>(p) + 20;
    for (int step = 0; step < max_steps; ++step) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (!is_lasso[static_cast<std::size_t>(j)] || sign[static_cast<std::size_t>(j)] != 0.0) free.push_back(j);
        }
        const auto m = static_cast<Eigen::Index>(free.size());
        Eigen::VectorXd target = beta;
        if (m > 0) {
            Eigen::MatrixXd g(m, m);
            Eigen::VectorXd rhs(m);
            for (Eigen::Index a = 0; a < m; ++a) {
                rhs(a) = c(free[a]) - lambda * sign[static_cast<std::size_t>(free[a])];
                for (Eigen::Index b = 0; b < m; ++b) g(a, b) = gram(free[a], free[b]);
            }
            g.diagonal().array() += ridge;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
            if (ldlt.info() != Eigen::Success) return std::nullopt;
            const Eigen::VectorXd sol = ldlt.solve(rhs);
            for (Eigen::Index a = 0; a < m; ++a) target(free[a]) = sol(a);
        }
        // Walk towards the sign-restricted minimiser, stopping at the first zero crossing.
        double t = 1.0;
        Eigen::Index blocking = -1;
        for (auto j : free) {
            const double s = sign[static_cast<std::size_t>(j)];
            if (s == 0.0 || target(j) * s > 0.0) continue;
            const double tj = beta(j) / (beta(j) - target(j));
            if (tj < t) {
                t = tj;
                blocking = j;
            }
        }
        beta += t * (target - beta);
        if (blocking >= 0) {
            beta(blocking) = 0.0;
            sign[static_cast<std::size_t>(blocking)] = 0.0;
            continue;
        }
        // Add the inactive coordinate that violates the subgradient condition most.
        const Eigen::VectorXd grad = c - gram * beta;
        Eigen::Index worst = -1;
        double worst_val = lambda * (1.0 + 1e-12);
        for (auto j : pr.lasso) {
            if (sign[static_cast<std::size_t>(j)] != 0.0) continue;
            if (std::abs(grad(j)) > worst_val) {
                worst_val = std::abs(grad(j));
                worst = j;
            }
        }
        if (worst < 0) return beta;
        sign[static_cast<std::size_t>(worst)] = grad(worst) > 0.0 ? 1.0 : -1.0;
    }
    return std::nullopt;
}

/// Proximal-Newton solve at one lambda from a warm start.
Eigen::VectorXd solve(const Problem& pr, double lambda, Eigen::VectorXd beta, const LassoOptions& options)
{
    const double inv_n = 1.0 / static_cast<double>(pr.n());
    const auto nu = static_cast<Eigen::Index>(pr.unpenalized.size());
    double f_old = objective(pr, beta, lambda);

    for (int outer = 0; outer < options.max_outer; ++outer) {
        const Eigen::VectorXd eta = linear_predictor(pr, beta);
        const Eigen::VectorXd mu = eta.array().exp().matrix();
        const Eigen::VectorXd z = (eta - pr.offset).array() + (pr.y - mu).array() / mu.array();

        // Covariance-mode coordinate descent on the weighted quadratic model.
        Eigen::MatrixXd xw = pr.x.array().colwise() * mu.array();
        Eigen::MatrixXd gram(pr.p(), pr.p());
        gram.noalias() = inv_n * (pr.x.transpose() * xw);
        const Eigen::VectorXd c = inv_n * (xw.transpose() * z);
        Eigen::VectorXd grad = c - gram * beta; // (1/n) X'W(z - X beta)

        Eigen::MatrixXd hu(nu, nu);
        for (Eigen::Index a = 0; a < nu; ++a)
            for (Eigen::Index b = 0; b < nu; ++b) hu(a, b) = gram(pr.unpenalized[a], pr.unpenalized[b]);
        hu.diagonal().array() += 1e-12;
        Eigen::LDLT<Eigen::MatrixXd> hu_solver(hu);

        Eigen::VectorXd proposal = beta;
        auto apply = [&](Eigen::Index j, double delta) {
            proposal(j) += delta;
            grad.noalias() -= gram.col(j) * delta;
        };
        auto sweep = [&](const std::vector<Eigen::Index>& coords) {
            double max_change = 0.0;
            if (nu > 0) {
                Eigen::VectorXd gu(nu);
                for (Eigen::Index a = 0; a < nu; ++a) gu(a) = grad(pr.unpenalized[a]);
                const Eigen::VectorXd delta = hu_solver.solve(gu);
                for (Eigen::Index a = 0; a < nu; ++a) {
                    const auto j = pr.unpenalized[a];
                    max_change = std::max(max_change, std::abs(delta(a)) * std::sqrt(gram(j, j)));
                    apply(j, delta(a));
                }
            }
            for (auto j : coords) {
                const double a = gram(j, j);
                if (a <= 0.0) continue;
                const double updated = soft_threshold(grad(j) + a * proposal(j), lambda) / a;
                const double delta = updated - proposal(j);
                if (delta != 0.0) {
                    max_change = std::max(max_change, std::abs(delta) * std::sqrt(a));
                    apply(j, delta);
                }
            }
            return max_change;
        };

        int sweeps = 0;
        while (sweeps < options.max_sweeps) {
            double change = sweep(pr.lasso);
            ++sweeps;
            if (change < options.tolerance) break;
            std::vector<Eigen::Index> active;
            for (auto j : pr.lasso)
                if (proposal(j) != 0.0) active.push_back(j);
            while (sweeps < options.max_sweeps) {
                const double c2 = sweep(active);
                ++sweeps;
                if (c2 < options.tolerance) break;
            }
        }

        if (auto exact = finish_active_set(gram, c, lambda, proposal, pr)) proposal = *exact;

        double f_new = objective(pr, proposal, lambda);
        int halvings = 0;
        while (f_new > f_old + 1e-15 * std::abs(f_old) && halvings < 40) {
            proposal = 0.5 * (proposal + beta);
            f_new = objective(pr, proposal, lambda);
            ++halvings;
        }
        const double step = (proposal - beta).cwiseAbs().maxCoeff();
        if (f_new <= f_old) {
            beta = proposal;
            f_old = f_new;
        }
        if (step < options.tolerance || halvings >= 40) break;
    }
    return beta;
}

/// Newton iterations on the active set with signs held fixed. Returns the
/// polished coefficients, or nothing if a sign flips or KKT fails.
std::optional<Eigen::VectorXd> polish(const Problem& pr, double lambda, const Eigen::VectorXd& start,
                                      const LassoOptions& options)
{
    std::vector<Eigen::Index> free = pr.unpenalized;
    std::vector<double> sign(static_cast<std::size_t>(pr.p()), 0.0);
    for (auto j : pr.lasso) {
        if (start(j) != 0.0) {
            free.push_back(j);
            sign[static_cast<std::size_t>(j)] = start(j) > 0.0 ? 1.0 : -1.0;
        }
    }
    const auto m = static_cast<Eigen::Index>(free.size());
    if (m == 0) return start;
    const double inv_n = 1.0 / static_cast<double>(pr.n());
    Eigen::MatrixXd xs(pr.n(), m);
    Eigen::VectorXd s(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        xs.col(a) = pr.x.col(free[static_cast<std::size_t>(a)]);
        s(a) = sign[static_cast<std::size_t>(free[static_cast<std::size_t>(a)])];
    }
    Eigen::VectorXd beta = start;
    auto smooth_objective = [&](const Eigen::VectorXd& b) {
        const Eigen::VectorXd eta = linear_predictor(pr, b);
        double f = (eta.array().exp() - pr.y.array() * eta.array()).sum() * inv_n;
        for (Eigen::Index a = 0; a < m; ++a) f += lambda * s(a) * b(free[static_cast<std::size_t>(a)]);
        return f;
    };
    for (int it = 0; it < 50; ++it) {
        const Eigen::VectorXd mu = linear_predictor(pr, beta).array().exp().matrix();
        const Eigen::VectorXd g = inv_n * (xs.transpose() * (pr.y - mu)) - lambda * s;
        if (g.cwiseAbs().maxCoeff() < options.polish_tolerance) break;
        const Eigen::MatrixXd h = inv_n * (xs.transpose() * (xs.array().colwise() * mu.array()).matrix());
        Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
        if (ldlt.info() != Eigen::Success) return std::nullopt;
        const Eigen::VectorXd delta = ldlt.solve(g);
        const double f0 = smooth_objective(beta);
        double step = 1.0;
        Eigen::VectorXd next = beta;
        for (int k = 0; k < 30; ++k) {
            next = beta;
            for (Eigen::Index a = 0; a < m; ++a) next(free[static_cast<std::size_t>(a)]) += step * delta(a);
            if (smooth_objective(next) <= f0 + 1e-15 * std::abs(f0)) break;
            step *= 0.5;
        }
        beta = next;
        for (Eigen::Index a = 0; a < m; ++a) {
            const auto j = free[static_cast<std::size_t>(a)];
            if (s(a) != 0.0 && beta(j) * s(a) <= 0.0) return std::nullopt;
        }
    }
    // Inactive coordinates must satisfy the subgradient condition.
    const Eigen::VectorXd mu = linear_predictor(pr, beta).array().exp().matrix();
    const Eigen::VectorXd grad = inv_n * (pr.x.transpose() * (pr.y - mu));
    for (auto j : pr.lasso) {
        if (sign[static_cast<std::size_t>(j)] == 0.0 && std::abs(grad(j)) > lambda) return std::nullopt;
    }
    return beta;
}

Problem make_problem(const DesignMatrix& design, std::span<const double> y, Eigen::VectorXd& scale)
{
    if (!design.terms().empty()) {
        throw ValidationError("lasso design must not contain ridge or spline terms");
    }
    Problem pr;
    pr.x = design.matrix();
    pr.offset = design.offset();
    pr.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    scale = Eigen::VectorXd::Ones(pr.x.cols());
    for (Eigen::Index j = 0; j < pr.x.cols(); ++j) {
        if (design.tags()[static_cast<std::size_t>(j)].kind == PenaltyKind::lasso) {
            pr.lasso.push_back(j);
            const auto col = pr.x.col(j);
            const double mean = col.mean();
            double sd = std::sqrt((col.array() - mean).square().mean());
            if (!(sd > 0.0)) sd = std::sqrt(col.array().square().mean());
            scale(j) = sd;
            pr.x.col(j) /= sd;
        } else {
            pr.unpenalized.push_back(j);
        }
    }
    return pr;
}

Problem subset(const Problem& pr, const std::vector<Eigen::Index>& rows)
{
    Problem out;
    out.x.resize(static_cast<Eigen::Index>(rows.size()), pr.p());
    out.offset.resize(static_cast<Eigen::Index>(rows.size()));
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        out.x.row(r) = pr.x.row(rows[i]);
        out.offset(r) = pr.offset(rows[i]);
        out.y(r) = pr.y(rows[i]);
    }
    out.unpenalized = pr.unpenalized;
    out.lasso = pr.lasso;
    return out;
}

Eigen::VectorXd null_fit(const Problem& pr, const LassoOptions& options)
{
    // Lambda large enough that every lasso coefficient stays at zero.
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(pr.p());
    return solve(pr, std::numeric_limits<double>::max(), beta, options);
}

std::vector<double> make_path(const Problem& pr, const LassoOptions& options)
{
    if (options.lambda_path) {
        auto path = *options.lambda_path;
        std::sort(path.begin(), path.end(), std::greater<>());
        return path;
    }
    const Eigen::VectorXd beta0 = null_fit(pr, options);
    const Eigen::VectorXd mu = linear_predictor(pr, beta0).array().exp().matrix();
    double lambda_max = 0.0;
    for (auto j : pr.lasso) {
        lambda_max = std::max(lambda_max, std::abs(pr.x.col(j).dot(pr.y - mu)) / static_cast<double>(pr.n()));
    }
    if (!(lambda_max > 0.0)) lambda_max = 1e-8;
    std::vector<double> path;
    for (int k = 0; k < options.n_lambda; ++k) {
        const double frac = options.n_lambda > 1 ? static_cast<double>(k) / (options.n_lambda - 1) : 0.0;
        path.push_back(lambda_max * std::pow(options.lambda_min_ratio, frac));
    }
    return path;
}

LassoFit to_result(const DesignMatrix& design, const Eigen::VectorXd& beta_std, const Eigen::VectorXd& scale)
{
    LassoFit fit;
    fit.coefficients = beta_std.array() / scale.array();
    fit.labels = design.labels();
    fit.column_scale = scale;
    return fit;
}

} // namespace

double quasi_poisson_deviance(std::span<const double> y, const Eigen::VectorXd& mu)
{
    double dev = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double m = mu(static_cast<Eigen::Index>(i));
        const double yi = y[i];
        dev += 2.0 * ((yi > 0.0 ? yi * std::log(yi / m) : 0.0) - (yi - m));
    }
    return dev;
}

LassoFit fit_lasso_at(const DesignMatrix& design, std::span<const double> y, double lambda,
                      const LassoOptions& options)
{
    design.validate();
    for (double v : y) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("lasso response must be positive and finite");
    }
    Eigen::VectorXd scale;
    const Problem pr = make_problem(design, y, scale);
    Eigen::VectorXd beta = solve(pr, lambda, Eigen::VectorXd::Zero(pr.p()), options);
    if (auto polished = polish(pr, lambda, beta, options)) beta = *polished;
    auto fit = to_result(design, beta, scale);
    fit.lambda = lambda;
    fit.lambda_path = {lambda};
    return fit;
}

LassoFit fit_lasso(const DesignMatrix& design, std::span<const double> y, const LassoOptions& options)
{
    design.validate();
    if (static_cast<Eigen::Index>(y.size()) != design.rows()) {
        throw ValidationError("lasso response length does not match design rows");
    }
    for (double v : y) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("lasso response must be positive and finite");
    }
    if (options.n_folds < 2) throw ValidationError("lasso cross-validation needs at least 2 folds");

    Eigen::VectorXd scale;
    const Problem pr = make_problem(design, y, scale);
    const auto path = make_path(pr, options);

    // Blocked folds: contiguous runs of the ordered distinct row times.
    std::map<int, int> fold_of_time;
    {
        std::vector<int> times(design.row_times().begin(), design.row_times().end());
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
        if (static_cast<int>(times.size()) < options.n_folds) {
            throw ValidationError("fewer distinct times than cross-validation folds");
        }
        for (std::size_t i = 0; i < times.size(); ++i) {
            fold_of_time[times[i]] = static_cast<int>(i * static_cast<std::size_t>(options.n_folds) / times.size());
        }
    }
    std::vector<double> cv(path.size(), 0.0);
    std::vector<std::vector<double>> fold_cv(static_cast<std::size_t>(options.n_folds), std::vector<double>(path.size()));
    for (int fold = 0; fold < options.n_folds; ++fold) {
        std::vector<Eigen::Index> train, test;
        for (Eigen::Index r = 0; r < pr.n(); ++r) {
            (fold_of_time[design.row_times()[static_cast<std::size_t>(r)]] == fold ? test : train).push_back(r);
        }
        const Problem tr = subset(pr, train);
        const Problem te = subset(pr, test);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(pr.p());
        for (std::size_t k = 0; k < path.size(); ++k) {
            beta = solve(tr, path[k], beta, options);
            const Eigen::VectorXd mu = linear_predictor(te, beta).array().exp().matrix();
            const double dev =
                quasi_poisson_deviance(std::span<const double>(te.y.data(), static_cast<std::size_t>(te.n())), mu);
            cv[k] += dev;
            fold_cv[static_cast<std::size_t>(fold)][k] = dev / static_cast<double>(te.n());
        }
    }
    for (auto& v : cv) v /= static_cast<double>(pr.n());
    auto best = static_cast<std::size_t>(std::min_element(cv.begin(), cv.end()) - cv.begin());
    if (options.one_se_rule) {
        const double k = static_cast<double>(options.n_folds);
        double mean = 0.0, ss = 0.0;
        for (const auto& f : fold_cv) mean += f[best] / k;
        for (const auto& f : fold_cv) ss += (f[best] - mean) * (f[best] - mean);
        const double se = std::sqrt(ss / (k - 1.0) / k);
        for (std::size_t j = 0; j < best; ++j) {
            if (cv[j] <= cv[best] + se) {
                best = j;
                break;
            }
        }
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(pr.p());
    Eigen::VectorXd selected;
    bool any_nonzero = false;
    for (std::size_t k = 0; k < path.size(); ++k) {
        beta = solve(pr, path[k], beta, options);
        for (auto j : pr.lasso) any_nonzero = any_nonzero || beta(j) != 0.0;
        if (k == best) selected = beta;
    }

    if (auto polished = polish(pr, path[best], selected, options)) selected = *polished;
    auto fit = to_result(design, selected, scale);
    fit.lambda = path[best];
    fit.selected = best;
    fit.lambda_path = path;
    fit.cv_deviance = cv;
    if (!any_nonzero && !pr.lasso.empty()) {
        fit.intercept_only = true;
        fit.warnings.push_back("all lasso coefficients are zero along the whole path; using the intercept-only model");
    }
    return fit;
}

Eigen::VectorXd lasso_gradient(const DesignMatrix& design, std::span<const double> y, const LassoFit& fit)
{
    Eigen::VectorXd scale;
    const Problem pr = make_problem(design, y, scale);
    const Eigen::VectorXd beta_std = fit.coefficients.array() * scale.array();
    const Eigen::VectorXd mu = linear_predictor(pr, beta_std).array().exp().matrix();
    return pr.x.transpose() * (pr.y - mu) / static_cast<double>(pr.n());
}

} // namespace hospcast::fit
