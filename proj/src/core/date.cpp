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

#include "hospcast/core/date.hpp"

#include "hospcast/core/errors.hpp"

#include <charconv>
#include <chrono>

namespace hospcast {

namespace chr = std::chrono;

Date Date::from_ymd(int year, unsigned month, unsigned day)
{
    chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
    if (!ymd.ok()) {
        throw ValidationError("invalid calendar date " + std::to_string(year) + "-" +
                              std::to_string(month) + "-" + std::to_string(day));
    }
    return Date(static_cast<std::int32_t>(chr::sys_days{ymd}.time_since_epoch().count()));
}

Date Date::parse(std::string_view iso)
{
    auto bad = [&] { return ValidationError("invalid ISO-8601 date '" + std::string(iso) + "'"); };
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        throw bad();
    }
    int y = 0;
    unsigned m = 0, d = 0;
    auto parse_part = [&](std::size_t pos, std::size_t len, auto& out) {
        auto first = iso.data() + pos;
        auto [ptr, ec] = std::from_chars(first, first + len, out);
        if (ec != std::errc{} || ptr != first + len) {
            throw bad();
        }
    };
    parse_part(0, 4, y);
    parse_part(5, 2, m);
    parse_part(8, 2, d);
    return from_ymd(y, m, d);
}

std::string Date::iso() const
{
    chr::year_month_day ymd{chr::sys_days{chr::days{days_}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

int Date::weekday() const
{
    return static_cast<int>(chr::weekday{chr::sys_days{chr::days{days_}}}.c_encoding());
}

Date Date::preceding_sunday() const
{
    return *this - weekday();
}

Date Date::following_sunday() const
{
    int wd = weekday();
    return wd == 0 ? *this : *this + (7 - wd);
}

} // namespace hospcast
