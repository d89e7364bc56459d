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
#include "hospcast/fit/penalized_nb.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hospcast::forecast {

/// Rows of the linear predictor for one trust over the forecast dates.
struct TrustRows {
    TrustId trust;
    /// Index into RegionDesign::models.
    std::size_t model = 0;
    /// dates x coefficients
    Eigen::MatrixXd rows;
};

/// What the simulator needs for one region of one fitted model: the
/// coefficient distributions and the rows mapping coefficients to log-means.
/// Trusts sharing a model share each coefficient draw.
struct RegionDesign {
    RegionId region;
    std::vector<Date> dates;
    std::vector<fit::FittedModel> models;
    std::vector<TrustRows> trusts;
    double region_theta = 1.0;
};

} // namespace hospcast::forecast
