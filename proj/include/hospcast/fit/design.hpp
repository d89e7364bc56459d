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

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace hospcast::fit {

enum class PenaltyKind { unpenalized, ridge, spline, lasso };

/// One smoothing parameter shared by one or more penalised column blocks.
struct PenaltyTerm {
    struct Block {
        Eigen::Index first = 0;
        Eigen::MatrixXd matrix;
    };

    std::string name;
    PenaltyKind kind = PenaltyKind::ridge;
    std::vector<Block> blocks;
    /// Shifts the smoothing-parameter search grid (log10 units) for this term.
    double grid_shift = 0.0;
};

struct ColumnTag {
    PenaltyKind kind = PenaltyKind::unpenalized;
    int term = -1;
};

/// Regression design: columns with unique labels, penalty tags and an
/// optional fixed offset (coefficient 1) and per-row time index.
class DesignMatrix {
public:
    explicit DesignMatrix(Eigen::Index rows);

    /// Unpenalised or lasso column.
    Eigen::Index add_column(const std::string& label, const Eigen::VectorXd& values,
                            PenaltyKind kind = PenaltyKind::unpenalized);
    /// New penalised term; returns its index.
    int add_term(const std::string& name, PenaltyKind kind, const std::vector<std::string>& labels,
                 const Eigen::MatrixXd& columns, const Eigen::MatrixXd& penalty);
    /// Adds another block to an existing term (shares its smoothing parameter).
    void extend_term(int term, const std::vector<std::string>& labels, const Eigen::MatrixXd& columns,
                     const Eigen::MatrixXd& penalty);
    int add_ridge(const std::string& name, const std::vector<std::string>& labels, const Eigen::MatrixXd& columns);

    void set_offset(Eigen::VectorXd offset);
    void set_row_times(std::vector<int> times);
    void set_grid_shift(int term, double shift) { terms_.at(static_cast<std::size_t>(term)).grid_shift = shift; }

    /// Throws ValidationError on all-zero or non-finite columns and duplicate labels.
    void validate() const;

    Eigen::Index rows() const { return x_.rows(); }
    Eigen::Index cols() const { return x_.cols(); }
    const Eigen::MatrixXd& matrix() const { return x_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<ColumnTag>& tags() const { return tags_; }
    const std::vector<PenaltyTerm>& terms() const { return terms_; }
    const Eigen::VectorXd& offset() const { return offset_; }
    const std::vector<int>& row_times() const { return row_times_; }
    bool has_offset() const { return has_offset_; }

    Eigen::Index column(const std::string& label) const;
    std::vector<Eigen::Index> columns_of(PenaltyKind kind) const;

    /// Sum over terms of lambda_k * S_k embedded in a cols x cols matrix.
    Eigen::MatrixXd penalty(std::span<const double> lambdas) const;

    /// Copy restricted to the given rows (penalties and tags unchanged).
    DesignMatrix select_rows(std::span<const Eigen::Index> rows) const;

private:
    Eigen::Index append(const std::string& label, const Eigen::VectorXd& values, ColumnTag tag);

    Eigen::MatrixXd x_;
    std::vector<std::string> labels_;
    std::vector<ColumnTag> tags_;
    std::vector<PenaltyTerm> terms_;
    Eigen::VectorXd offset_;
    bool has_offset_ = false;
    std::vector<int> row_times_;
};

} // namespace hospcast::fit
