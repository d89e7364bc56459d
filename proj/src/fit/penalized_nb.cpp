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

#include "hospcast/fit/penalized_nb.hpp"

#include "hospcast/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hospcast::fit {

namespace {

constexpr double eta_limit = 50.0;

struct IrlsState {
    Eigen::VectorXd beta;
    Eigen::VectorXd mu;
    Eigen::MatrixXd xtwx;
    Eigen::MatrixXd info;
    double deviance = 0.0;
    double penalized_deviance = 0.0;
    double edf = 0.0;
    int iterations = 0;
    std::vector<double> trace;
};

Eigen::VectorXd mean_from(const DesignMatrix& design, const Eigen::VectorXd& beta)
{
    Eigen::VectorXd eta = design.matrix() * beta + design.offset();
    return eta.array().min(eta_limit).max(-eta_limit).exp().matrix();
}

Eigen::VectorXd nb_weights(const Eigen::VectorXd& mu, double theta)
{
    return (mu.array() / (1.0 + mu.array() / theta)).matrix();
}

Eigen::MatrixXd weighted_cross(const Eigen::MatrixXd& x, const Eigen::VectorXd& w)
{
    Eigen::MatrixXd xw = x.array().colwise() * w.array();
    Eigen::MatrixXd out(x.cols(), x.cols());
    out.noalias() = x.transpose() * xw;
    return out;
}

std::string describe(int it, double pen_dev, double theta)
{
    std::ostringstream ss;
    ss << "iter " << it << " penalized deviance " << pen_dev << " theta " << theta;
    return ss.str();
}

/// Penalised IRLS at fixed smoothing parameters and theta, with step halving.
IrlsState irls(const DesignMatrix& design, std::span<const double> y, const Eigen::MatrixXd& s, double theta,
               const Eigen::VectorXd* warm, const NbFitOptions& options)
{
    const auto& x = design.matrix();
    const Eigen::Index n = x.rows();
    Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);

    IrlsState st;
    Eigen::VectorXd eta;
    double pen_old = std::numeric_limits<double>::infinity();
    if (warm) {
        st.beta = *warm;
        st.mu = mean_from(design, st.beta);
        eta = st.mu.array().log().matrix();
        pen_old = nb_deviance(y, st.mu, theta) + st.beta.dot(s * st.beta);
    } else {
        const double ybar = std::max(yv.mean(), 0.1);
        st.mu = ((yv.array() + ybar) * 0.5).max(0.1).matrix();
        eta = st.mu.array().log().matrix();
    }

    std::vector<std::string> trace_text;
    bool converged = false;
    for (int it = 1; it <= options.max_iterations; ++it) {
        const Eigen::VectorXd w = nb_weights(st.mu, theta);
        const Eigen::VectorXd z = (eta - design.offset()).array() + (yv - st.mu).array() / st.mu.array();
        st.xtwx = weighted_cross(x, w);
        Eigen::MatrixXd a = st.xtwx + s;
        Eigen::VectorXd b = x.transpose() * (w.array() * z.array()).matrix();
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() != Eigen::Success) {
            trace_text.push_back(describe(it, pen_old, theta));
            throw NumericalError("singular penalized information matrix", trace_text);
        }
        Eigen::VectorXd proposal = llt.solve(b);
        if (!proposal.allFinite()) {
            throw NumericalError("non-finite IRLS update", trace_text);
        }

        Eigen::VectorXd mu_new = mean_from(design, proposal);
        double pen_new = nb_deviance(y, mu_new, theta) + proposal.dot(s * proposal);
        if (st.beta.size() == proposal.size() && std::isfinite(pen_old)) {
            int halvings = 0;
            while (pen_new > pen_old && halvings < 40) {
                proposal = 0.5 * (proposal + st.beta);
                mu_new = mean_from(design, proposal);
                pen_new = nb_deviance(y, mu_new, theta) + proposal.dot(s * proposal);
                ++halvings;
            }
            if (pen_new > pen_old) {
                // No descent direction left at working precision.
                converged = true;
                st.iterations = it;
                break;
            }
        }
        st.beta = std::move(proposal);
        st.mu = std::move(mu_new);
        eta = (x * st.beta + design.offset()).array().min(eta_limit).max(-eta_limit).matrix();
        st.trace.push_back(pen_new);
        trace_text.push_back(describe(it, pen_new, theta));
        st.iterations = it;
        const bool small_change = std::isfinite(pen_old) && std::abs(pen_old - pen_new) / (std::abs(pen_new) + 0.1) <
                                                              options.tolerance;
        pen_old = pen_new;
        if (small_change) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NumericalError("penalized IRLS did not converge in " + std::to_string(options.max_iterations) +
                                 " iterations",
                             trace_text);
    }

    const Eigen::VectorXd w = nb_weights(st.mu, theta);
    st.xtwx = weighted_cross(x, w);
    st.info = st.xtwx + s;
    Eigen::LLT<Eigen::MatrixXd> llt(st.info);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("singular penalized information matrix at convergence", trace_text);
    }
    st.edf = llt.solve(st.xtwx).trace();
    st.deviance = nb_deviance(y, st.mu, theta);
    st.penalized_deviance = st.deviance + st.beta.dot(s * st.beta);
    return st;
}

struct ThetaFit {
    IrlsState state;
    double theta;
};

/// Alternates IRLS at fixed theta with the moment update of theta.
ThetaFit fit_with_theta(const DesignMatrix& design, std::span<const double> y, const Eigen::MatrixXd& s,
                        double theta, const Eigen::VectorXd* warm, const NbFitOptions& options)
{
    IrlsState st = irls(design, y, s, theta, warm, options);
    if (!options.estimate_theta) {
        return {std::move(st), theta};
    }
    for (int round = 0; round < options.max_theta_rounds; ++round) {
        const double next = moment_theta(y, st.mu, st.edf, options.theta_min, options.theta_max);
        const bool done = std::abs(std::log(next) - std::log(theta)) < options.theta_tolerance;
        theta = next;
        Eigen::VectorXd start = st.beta;
        st = irls(design, y, s, theta, &start, options);
        if (done) break;
    }
    return {std::move(st), theta};
}

double gcv_score(const IrlsState& st, Eigen::Index n)
{
    const double dof = static_cast<double>(n) - st.edf;
    if (dof <= 0.0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(n) * st.deviance / (dof * dof);
}

/// Per-term reference scale: trace of the term's X'WX block over trace of its penalty.
std::vector<double> reference_scales(const DesignMatrix& design, const Eigen::MatrixXd& xtwx)
{
    std::vector<double> out;
    for (const auto& term : design.terms()) {
        double info = 0.0, pen = 0.0;
        for (const auto& b : term.blocks) {
            const auto m = b.matrix.rows();
            info += xtwx.block(b.first, b.first, m, m).trace();
            pen += b.matrix.trace();
        }
        out.push_back(pen > 0.0 && info > 0.0 ? info / pen : 1.0);
    }
    return out;
}

} // namespace

Eigen::Index FittedModel::column(const std::string& label) const
{
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (labels[j] == label) return static_cast<Eigen::Index>(j);
    }
    throw ValidationError("model has no coefficient " + label);
}

double nb_deviance(std::span<const double> y, const Eigen::VectorXd& mu, double theta)
{
    double dev = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double yi = y[i];
        const double mi = mu(static_cast<Eigen::Index>(i));
        double term = 0.0;
        if (yi > 0.0) term += yi * std::log(yi / mi);
        term -= (yi + theta) * std::log((yi + theta) / (mi + theta));
        dev += 2.0 * term;
    }
    return dev;
}

double moment_theta(std::span<const double> y, const Eigen::VectorXd& mu, double edf, double theta_min,
                    double theta_max)
{
    const double target = static_cast<double>(y.size()) - edf;
    auto pearson = [&](double theta) {
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double m = mu(static_cast<Eigen::Index>(i));
            const double r = y[i] - m;
            s += r * r / (m + m * m / theta);
        }
        return s;
    };
    if (target <= 0.0) return theta_max;
    // Pearson statistic increases with theta.
    if (pearson(theta_max) <= target) return theta_max;
    if (pearson(theta_min) >= target) return theta_min;
    double lo = std::log(theta_min), hi = std::log(theta_max);
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (pearson(std::exp(mid)) < target) lo = mid;
        else hi = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

Eigen::VectorXd fitted_mean(const DesignMatrix& design, const Eigen::VectorXd& beta)
{
    return mean_from(design, beta);
}

Eigen::VectorXd penalized_score(const DesignMatrix& design, std::span<const double> y, const FittedModel& model)
{
    const Eigen::VectorXd mu = mean_from(design, model.coefficients);
    Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    const Eigen::VectorXd r = ((yv - mu).array() / (1.0 + mu.array() / model.theta)).matrix();
    return design.matrix().transpose() * r - design.penalty(model.lambdas) * model.coefficients;
}

FittedModel fit_penalized_nb(const DesignMatrix& design, std::span<const double> y, const NbFitOptions& options)
{
    design.validate();
    if (static_cast<Eigen::Index>(y.size()) != design.rows()) {
        throw ValidationError("response has " + std::to_string(y.size()) + " values, design has " +
                              std::to_string(design.rows()) + " rows");
    }
    for (double v : y) {
        if (!(v >= 0.0) || std::floor(v) != v) {
            throw ValidationError("negative-binomial response must be non-negative integers");
        }
    }
    const Eigen::Index n = design.rows();
    const std::size_t n_terms = design.terms().size();

    std::vector<double> lambdas;
    double theta = options.estimate_theta ? 10.0 : options.theta;

    if (options.lambdas) {
        lambdas = *options.lambdas;
        if (lambdas.size() != n_terms) {
            throw ValidationError("fixed smoothing parameters do not match the design's penalty terms");
        }
    } else if (n_terms > 0) {
        // Reference scales from the weights of a crude starting mean.
        Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
        const double ybar = std::max(yv.mean(), 0.1);
        const Eigen::VectorXd mu0 = ((yv.array() + ybar) * 0.5).max(0.1).matrix();
        const auto scales = reference_scales(design, weighted_cross(design.matrix(), nb_weights(mu0, theta)));

        std::vector<std::vector<double>> grids(n_terms);
        std::vector<std::size_t> index(n_terms);
        for (std::size_t k = 0; k < n_terms; ++k) {
            const double shift = design.terms()[k].grid_shift;
            for (int g = 0; g < options.grid_size; ++g) {
                const double frac = options.grid_size > 1 ? static_cast<double>(g) / (options.grid_size - 1) : 0.5;
                const double lg = options.grid_log10_low + frac * (options.grid_log10_high - options.grid_log10_low);
                grids[k].push_back(scales[k] * std::pow(10.0, lg + shift));
            }
            // Start nearest the reference scale (log10 offset 0 + shift).
            const double start = -options.grid_log10_low / (options.grid_log10_high - options.grid_log10_low);
            index[k] = static_cast<std::size_t>(std::lround(start * (options.grid_size - 1)));
            lambdas.push_back(grids[k][index[k]]);
        }

        auto initial = fit_with_theta(design, y, design.penalty(lambdas), theta, nullptr, options);
        theta = initial.theta;
        Eigen::VectorXd best_beta = initial.state.beta;
        double best_score = gcv_score(initial.state, n);

        for (int round = 0; round < 2; ++round) {
            if (round > 0) {
                // Refresh the best score at the updated theta.
                auto st = irls(design, y, design.penalty(lambdas), theta, &best_beta, options);
                best_beta = st.beta;
                best_score = gcv_score(st, n);
            }
            for (int sweep = 0; sweep < options.gcv_sweeps; ++sweep) {
                bool changed = false;
                for (std::size_t k = 0; k < n_terms; ++k) {
                    Eigen::VectorXd warm = best_beta;
                    std::size_t chosen = index[k];
                    for (std::size_t g = 0; g < grids[k].size(); ++g) {
                        if (g == index[k]) continue;
                        auto trial = lambdas;
                        trial[k] = grids[k][g];
                        IrlsState st;
                        try {
                            st = irls(design, y, design.penalty(trial), theta, &warm, options);
                        } catch (const NumericalError&) {
                            continue;
                        }
                        warm = st.beta;
                        const double score = gcv_score(st, n);
                        if (score < best_score) {
                            best_score = score;
                            best_beta = st.beta;
                            chosen = g;
                        }
                    }
                    if (chosen != index[k]) {
                        index[k] = chosen;
                        lambdas[k] = grids[k][chosen];
                        changed = true;
                    }
                }
                if (!changed) break;
            }
            if (!options.estimate_theta) break;
            auto refit = fit_with_theta(design, y, design.penalty(lambdas), theta, &best_beta, options);
            const bool stable = std::abs(std::log(refit.theta) - std::log(theta)) < 0.05;
            theta = refit.theta;
            best_beta = refit.state.beta;
            if (stable) break;
        }
    }

    const Eigen::MatrixXd s = n_terms ? design.penalty(lambdas) : Eigen::MatrixXd::Zero(design.cols(), design.cols());
    auto final_fit = fit_with_theta(design, y, s, theta, nullptr, options);

    FittedModel model;
    model.coefficients = final_fit.state.beta;
    model.covariance = final_fit.state.info.llt().solve(Eigen::MatrixXd::Identity(design.cols(), design.cols()));
    model.covariance = 0.5 * (model.covariance + model.covariance.transpose()).eval();
    model.theta = final_fit.theta;
    model.labels = design.labels();
    model.lambdas = lambdas;
    model.edf = final_fit.state.edf;
    model.deviance = final_fit.state.deviance;
    model.gcv = gcv_score(final_fit.state, n);
    model.iterations = final_fit.state.iterations;
    model.penalized_deviance_trace = final_fit.state.trace;
    return model;
}

} // namespace hospcast::fit
