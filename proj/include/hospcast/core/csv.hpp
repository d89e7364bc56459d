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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hospcast::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// 1-based line number in the source file for each row (header is line 1).
    std::vector<std::size_t> lines;
};

/// Reads a comma-separated file with a mandatory header. When `expected` is
/// non-empty the header must match it exactly.
Table read(const std::filesystem::path& path, const std::vector<std::string_view>& expected = {});
Table parse(std::string_view text, const std::vector<std::string_view>& expected = {},
            const std::string& source = "<memory>");

double to_double(std::string_view field, std::size_t line, std::string_view column);
std::int64_t to_int(std::string_view field, std::size_t line, std::string_view column);

/// Shortest representation that round-trips through to_double.
std::string format(double value);

class Writer {
public:
    Writer(const std::filesystem::path& path, const std::vector<std::string_view>& header);

    void row(const std::vector<std::string>& fields);

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

} // namespace hospcast::csv
