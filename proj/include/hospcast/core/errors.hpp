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

#include <stdexcept>
#include <string>
#include <vector>

namespace hospcast {

/// Malformed input, violated precondition or bad configuration.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine failed (non-convergence, singular system).
/// Carries whatever iteration history the routine collected.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, std::vector<std::string> trace = {})
        : std::runtime_error(what), trace_(std::move(trace)) {}

    const std::vector<std::string>& trace() const noexcept { return trace_; }

private:
    std::vector<std::string> trace_;
};

} // namespace hospcast
