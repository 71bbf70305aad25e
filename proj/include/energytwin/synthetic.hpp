#pragma once

#include "energytwin/features.hpp"
#include "energytwin/timeseries.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace energytwin {

/// Dates (inclusive) during which the closed-hour electricity load is raised.
struct ModeChangeWindow {
	std::chrono::year_month_day first;
	std::chrono::year_month_day last;
	double increment = 30.0; ///< kWh/h added outside opening hours
};

struct SynthConfig {
	std::uint64_t seed = 42;
	int years = 4;
	Timestamp start = Timestamp::from_civil(2016, 1, 1, 1);

	double electricity_base = 30.0;
	double heating_base = 40.0;
	double electricity_yearly_amplitude = 3.0;
	double heating_yearly_amplitude = 8.0;
	double electricity_daily_amplitude = 4.0; ///< staff hours bump, every day
	double opening_increment = 25.0;
	double heating_coefficient = 4.0;
	double reference_temperature = 17.0;

	double temperature_mean = 7.0;
	double temperature_yearly_amplitude = 10.0;
	double temperature_daily_amplitude = 3.0;

	double electricity_noise_sd = 4.0;
	double heating_noise_sd = 3.0;
	double weather_noise_sd = 1.0;

	/// Unset means Nov 29-30 of the last generated year; see generate().
	std::optional<ModeChangeWindow> mode_change;
	bool default_mode_change = true;

	void validate() const;
	/// The mode-change window generate() will apply, if any.
	std::optional<ModeChangeWindow> effective_mode_change() const;
	Timestamp end() const; ///< one past the last generated hour
};

struct SynthData {
	std::vector<TimeSeries> targets; ///< electricity, heating
	std::vector<TimeSeries> weather; ///< temperature, relative_humidity, dew_point, precipitation, air_pressure, wind_speed
	CalendarConfig calendar;

	Table table() const;
};

inline const std::vector<std::string> kSynthWeatherColumns{"temperature", "relative_humidity", "dew_point",
                                                           "precipitation", "air_pressure", "wind_speed"};

/// Seeded museum-like dataset; identical seeds give bitwise identical output.
SynthData generate(const SynthConfig &config);

/// Masks round(fraction * interior) interior points chosen uniformly at random.
/// The first and last points are never masked.
TimeSeries inject_missing(TimeSeries series, double fraction, std::uint64_t seed);

/// Swedish public holidays of one year (fixed dates plus the Easter cycle and Saturday rules).
std::set<std::chrono::sys_days> swedish_holidays(int year);
std::chrono::year_month_day easter_sunday(int year);

struct SynthFiles {
	std::string csv;
	std::string holidays;
	std::string calendar;
};

/// Writes synthetic.csv, holidays.txt and calendar.json into `dir`.
SynthFiles write_synth_files(const SynthData &data, const std::string &dir);

} // namespace energytwin
