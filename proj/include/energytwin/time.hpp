#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace energytwin {

/// Hour-aligned local civil time, counted in hours since 1970-01-01T00:00.
/// No daylight-saving adjustment is applied; every day has 24 hours.
class Timestamp {
public:
	constexpr Timestamp() = default;
	constexpr explicit Timestamp(std::int64_t hours_since_epoch) : hours_(hours_since_epoch) {
	}

	static Timestamp from_civil(int year, unsigned month, unsigned day, unsigned hour = 0);
	/// Parses `YYYY-MM-DDTHH:00`. Throws MalformedTimestamp, or NonHourlyStep when minutes are not zero.
	static Timestamp parse(std::string_view text);

	constexpr std::int64_t hours() const noexcept {
		return hours_;
	}
	std::string to_string() const;

	std::chrono::year_month_day date() const;
	unsigned hour_of_day() const;
	/// 0 = Monday ... 6 = Sunday.
	unsigned weekday() const;

	constexpr Timestamp operator+(std::int64_t h) const noexcept {
		return Timestamp(hours_ + h);
	}
	constexpr Timestamp operator-(std::int64_t h) const noexcept {
		return Timestamp(hours_ - h);
	}
	constexpr std::int64_t operator-(Timestamp other) const noexcept {
		return hours_ - other.hours_;
	}
	constexpr auto operator<=>(const Timestamp &) const = default;

private:
	std::int64_t hours_ = 0;
};

/// Parses an ISO `YYYY-MM-DD` date.
std::chrono::year_month_day parse_date(std::string_view text);
std::string format_date(std::chrono::year_month_day date);

} // namespace energytwin
