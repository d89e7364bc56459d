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

#include "hospcast/fit/design.hpp"

#include "hospcast/core/errors.hpp"

#include <set>

namespace hospcast::fit {

DesignMatrix::DesignMatrix(Eigen::Index rows) : x_(rows, 0), offset_(Eigen::VectorXd::Zero(rows))
{
    row_times_.resize(static_cast<std::size_t>(rows));
    for (Eigen::Index i = 0; i < rows; ++i) row_times_[static_cast<std::size_t>(i)] = static_cast<int>(i);
}

Eigen::Index DesignMatrix::append(const std::string& label, const Eigen::VectorXd& values, ColumnTag tag)
{
    if (values.size() != x_.rows()) {
        throw ValidationError("column " + label + " has " + std::to_string(values.size()) + " rows, design has " +
                              std::to_string(x_.rows()));
    }
    x_.conservativeResize(Eigen::NoChange, x_.cols() + 1);
    x_.col(x_.cols() - 1) = values;
    labels_.push_back(label);
    tags_.push_back(tag);
    return x_.cols() - 1;
}

Eigen::Index DesignMatrix::add_column(const std::string& label, const Eigen::VectorXd& values, PenaltyKind kind)
{
    if (kind != PenaltyKind::unpenalized && kind != PenaltyKind::lasso) {
        throw ValidationError("add_column only takes unpenalized or lasso columns");
    }
    return append(label, values, {kind, -1});
}

int DesignMatrix::add_term(const std::string& name, PenaltyKind kind, const std::vector<std::string>& labels,
                           const Eigen::MatrixXd& columns, const Eigen::MatrixXd& penalty)
{
    if (kind != PenaltyKind::ridge && kind != PenaltyKind::spline) {
        throw ValidationError("penalised terms must be ridge or spline");
    }
    terms_.push_back({name, kind, {}, 0.0});
    int term = static_cast<int>(terms_.size()) - 1;
    extend_term(term, labels, columns, penalty);
    return term;
}

void DesignMatrix::extend_term(int term, const std::vector<std::string>& labels, const Eigen::MatrixXd& columns,
                               const Eigen::MatrixXd& penalty)
{
    auto& t = terms_.at(static_cast<std::size_t>(term));
    if (static_cast<Eigen::Index>(labels.size()) != columns.cols() || penalty.rows() != columns.cols() ||
        penalty.cols() != columns.cols()) {
        throw ValidationError("term " + t.name + ": labels, columns and penalty sizes disagree");
    }
    Eigen::Index first = x_.cols();
    for (Eigen::Index j = 0; j < columns.cols(); ++j) {
        append(labels[static_cast<std::size_t>(j)], columns.col(j), {t.kind, term});
    }
    t.blocks.push_back({first, penalty});
}

int DesignMatrix::add_ridge(const std::string& name, const std::vector<std::string>& labels,
                            const Eigen::MatrixXd& columns)
{
    return add_term(name, PenaltyKind::ridge, labels, columns,
                    Eigen::MatrixXd::Identity(columns.cols(), columns.cols()));
}

void DesignMatrix::set_offset(Eigen::VectorXd offset)
{
    if (offset.size() != x_.rows()) throw ValidationError("offset length does not match design rows");
    offset_ = std::move(offset);
    has_offset_ = true;
}

void DesignMatrix::set_row_times(std::vector<int> times)
{
    if (static_cast<Eigen::Index>(times.size()) != x_.rows()) {
        throw ValidationError("row time index length does not match design rows");
    }
    row_times_ = std::move(times);
}

void DesignMatrix::validate() const
{
    std::set<std::string> seen;
    for (Eigen::Index j = 0; j < x_.cols(); ++j) {
        const auto& label = labels_[static_cast<std::size_t>(j)];
        if (!seen.insert(label).second) throw ValidationError("duplicate column label " + label);
        if (!x_.col(j).allFinite()) throw ValidationError("non-finite entries in column " + label);
        if (x_.col(j).cwiseAbs().maxCoeff() == 0.0) throw ValidationError("all-zero column " + label);
    }
    if (!offset_.allFinite()) throw ValidationError("non-finite offset");
}

Eigen::Index DesignMatrix::column(const std::string& label) const
{
    for (std::size_t j = 0; j < labels_.size(); ++j) {
        if (labels_[j] == label) return static_cast<Eigen::Index>(j);
    }
    throw ValidationError("no design column labelled " + label);
}

std::vector<Eigen::Index> DesignMatrix::columns_of(PenaltyKind kind) const
{
    std::vector<Eigen::Index> out;
    for (std::size_t j = 0; j < tags_.size(); ++j) {
        if (tags_[j].kind == kind) out.push_back(static_cast<Eigen::Index>(j));
    }
    return out;
}

Eigen::MatrixXd DesignMatrix::penalty(std::span<const double> lambdas) const
{
    if (lambdas.size() != terms_.size()) {
        throw ValidationError("expected " + std::to_string(terms_.size()) + " smoothing parameters, got " +
                              std::to_string(lambdas.size()));
    }
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(x_.cols(), x_.cols());
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        for (const auto& b : terms_[k].blocks) {
            const auto m = b.matrix.rows();
            s.block(b.first, b.first, m, m) += lambdas[k] * b.matrix;
        }
    }
    return s;
}

DesignMatrix DesignMatrix::select_rows(std::span<const Eigen::Index> rows) const
{
    DesignMatrix out(static_cast<Eigen::Index>(rows.size()));
    out.x_.resize(static_cast<Eigen::Index>(rows.size()), x_.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.x_.row(static_cast<Eigen::Index>(i)) = x_.row(rows[i]);
        out.offset_(static_cast<Eigen::Index>(i)) = offset_(rows[i]);
        out.row_times_[i] = row_times_[static_cast<std::size_t>(rows[i])];
    }
    out.labels_ = labels_;
    out.tags_ = tags_;
    out.terms_ = terms_;
    out.has_offset_ = has_offset_;
    return out;
}

} // namespace hospcast::fit
