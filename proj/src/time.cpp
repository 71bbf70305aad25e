#include "energytwin/time.hpp"

#include "energytwin/error.hpp"

#include <charconv>
#include <cstdio>

namespace energytwin {

namespace {

bool parse_uint(std::string_view text, unsigned &out) {
	if (text.empty()) {
		return false;
	}
	for (char c : text) {
		if (c < '0' || c > '9') {
			return false;
		}
	}
	auto res = std::from_chars(text.data(), text.data() + text.size(), out);
	return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

std::chrono::year_month_day parse_ymd(std::string_view text, std::string_view whole) {
	if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
		throw Error(Errc::MalformedTimestamp, "expected YYYY-MM-DD in '" + std::string(whole) + "'", std::string(whole));
	}
	unsigned y = 0, m = 0, d = 0;
	if (!parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), m) || !parse_uint(text.substr(8, 2), d)) {
		throw Error(Errc::MalformedTimestamp, "non-numeric date field in '" + std::string(whole) + "'",
		            std::string(whole));
	}
	std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(y)}, std::chrono::month{m},
	                                std::chrono::day{d}};
	if (!ymd.ok()) {
		throw Error(Errc::MalformedTimestamp, "invalid calendar date '" + std::string(whole) + "'", std::string(whole));
	}
	return ymd;
}

} // namespace

Timestamp Timestamp::from_civil(int year, unsigned month, unsigned day, unsigned hour) {
	using namespace std::chrono;
	const sys_days days{year_month_day{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}}};
	return Timestamp(static_cast<std::int64_t>(days.time_since_epoch().count()) * 24 + hour);
}

Timestamp Timestamp::parse(std::string_view text) {
	// YYYY-MM-DDTHH:MM
	if (text.size() != 16 || (text[10] != 'T' && text[10] != ' ') || text[13] != ':') {
		throw Error(Errc::MalformedTimestamp, "expected YYYY-MM-DDTHH:00, got '" + std::string(text) + "'",
		            std::string(text));
	}
	const auto ymd = parse_ymd(text.substr(0, 10), text);
	unsigned hour = 0, minute = 0;
	if (!parse_uint(text.substr(11, 2), hour) || !parse_uint(text.substr(14, 2), minute) || hour > 23 ||
	    minute > 59) {
		throw Error(Errc::MalformedTimestamp, "invalid clock time in '" + std::string(text) + "'", std::string(text));
	}
	if (minute != 0) {
		throw Error(Errc::NonHourlyStep, "timestamp not on the hour: '" + std::string(text) + "'", std::string(text));
	}
	const std::chrono::sys_days days{ymd};
	return Timestamp(static_cast<std::int64_t>(days.time_since_epoch().count()) * 24 + hour);
}

std::chrono::year_month_day Timestamp::date() const {
	std::int64_t day = hours_ >= 0 ? hours_ / 24 : -((-hours_ + 23) / 24);
	return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{day}}};
}

unsigned Timestamp::hour_of_day() const {
	return static_cast<unsigned>(((hours_ % 24) + 24) % 24);
}

unsigned Timestamp::weekday() const {
	const std::chrono::weekday wd{std::chrono::sys_days{date()}};
	return wd.iso_encoding() - 1;
}

std::string Timestamp::to_string() const {
	const auto ymd = date();
	char buf[32];
	std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02u:00", static_cast<int>(ymd.year()),
	              static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hour_of_day());
	return buf;
}

std::chrono::year_month_day parse_date(std::string_view text) {
	return parse_ymd(text, text);
}

std::string format_date(std::chrono::year_month_day date) {
	char buf[16];
	std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()), static_cast<unsigned>(date.month()),
	              static_cast<unsigned>(date.day()));
	return buf;
}

} // namespace energytwin
