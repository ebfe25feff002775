#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace econet {

// Identifiers are strong integer types so a firm can never be passed where a
// city is expected. Use CityId{42} / static_cast<std::int64_t>(id).
enum class FirmId : std::int64_t {};
enum class CityId : std::int64_t {};

inline std::int64_t raw(FirmId id) { return static_cast<std::int64_t>(id); }
inline std::int64_t raw(CityId id) { return static_cast<std::int64_t>(id); }

// Money is carried as integer cents (currency units x 100).
using Cents = std::int64_t;

enum class Region { North, Northeast, Midwest, Southeast, South };

inline constexpr Region kAllRegions[] = {Region::North, Region::Northeast, Region::Midwest,
                                         Region::Southeast, Region::South};

std::string_view to_string(Region r);
std::optional<Region> parse_region(std::string_view text);

struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date&) const = default;
};

// Parses a strict ISO-8601 calendar date (YYYY-MM-DD).
std::optional<Date> parse_iso_date(std::string_view text);
std::string format_iso_date(const Date& d);

// Closed interval of calendar years.
struct YearRange {
    int first = 0;
    int last = 0;

    bool contains(int year) const { return year >= first && year <= last; }
    int size() const { return last >= first ? last - first + 1 : 0; }
    bool operator==(const YearRange&) const = default;
};

// Parses "A..B" (or a single year "A").
std::optional<YearRange> parse_year_range(std::string_view text);

// Error hierarchy. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// A measure is mathematically undefined on this input (N < 2, zero variance,
// zero total, ...).
class UndefinedResult : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace econet
