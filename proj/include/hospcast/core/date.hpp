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

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace hospcast {

/// Timezone-free calendar date stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;

    static constexpr Date from_days(std::int32_t days) { return Date(days); }
    static Date from_ymd(int year, unsigned month, unsigned day);
    /// Parses YYYY-MM-DD; throws ValidationError otherwise.
    static Date parse(std::string_view iso);

    constexpr std::int32_t days_since_epoch() const { return days_; }
    std::string iso() const;

    /// 0 = Sunday ... 6 = Saturday
    int weekday() const;
    bool is_sunday() const { return weekday() == 0; }
    /// Nearest Sunday on or before this date.
    Date preceding_sunday() const;
    /// Nearest Sunday on or after this date.
    Date following_sunday() const;

    constexpr Date operator+(int n) const { return Date(days_ + n); }
    constexpr Date operator-(int n) const { return Date(days_ - n); }
    constexpr int operator-(Date other) const { return days_ - other.days_; }
    constexpr Date& operator+=(int n) { days_ += n; return *this; }
    constexpr Date& operator++() { ++days_; return *this; }

    constexpr auto operator<=>(const Date&) const = default;

private:
    constexpr explicit Date(std::int32_t days) : days_(days) {}
    std::int32_t days_ = 0;
};

} // namespace hospcast
