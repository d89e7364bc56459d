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

#include "hospcast/core/csv.hpp"

#include "hospcast/core/errors.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace hospcast::csv {

namespace {

std::vector<std::string> split(std::string_view line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string join(const std::vector<std::string>& fields)
{
    std::string s;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) s += ',';
        s += fields[i];
    }
    return s;
}

} // namespace

Table parse(std::string_view text, const std::vector<std::string_view>& expected, const std::string& source)
{
    Table table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    if (text.starts_with("\xEF\xBB\xBF")) {
        pos = 3;
    }
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        auto fields = split(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            if (!expected.empty()) {
                std::vector<std::string> want(expected.begin(), expected.end());
                if (table.header != want) {
                    throw ValidationError(source + ": header '" + join(table.header) + "' does not match expected '" +
                                          join(want) + "'");
                }
            }
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw ValidationError(source + ": line " + std::to_string(line_no) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(fields));
        table.lines.push_back(line_no);
    }
    if (!have_header) {
        throw ValidationError(source + ": missing header row");
    }
    return table;
}

Table read(const std::filesystem::path& path, const std::vector<std::string_view>& expected)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), expected, path.string());
}

double to_double(std::string_view field, std::size_t line, std::string_view column)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw ValidationError("line " + std::to_string(line) + ": column '" + std::string(column) +
                              "' is not a finite number: '" + std::string(field) + "'");
    }
    return v;
}

std::int64_t to_int(std::string_view field, std::size_t line, std::string_view column)
{
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ValidationError("line " + std::to_string(line) + ": column '" + std::string(column) +
                              "' is not an integer: '" + std::string(field) + "'");
    }
    return v;
}

std::string format(double value)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    return std::string(buf, ptr);
}

Writer::Writer(const std::filesystem::path& path, const std::vector<std::string_view>& header)
    : out_(path, std::ios::binary), path_(path)
{
    if (!out_) {
        throw ValidationError("cannot write " + path.string());
    }
    row(std::vector<std::string>(header.begin(), header.end()));
}

void Writer::row(const std::vector<std::string>& fields)
{
    out_ << join(fields) << '\n';
    if (!out_) {
        throw ValidationError("write failed for " + path_.string());
    }
}

} // namespace hospcast::csv
