#include "energytwin/synthetic.hpp"

#include "energytwin/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

namespace energytwin {

namespace {

using namespace std::chrono;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kYearDays = 365.25;

void require_nonnegative(double v, const char *name) {
	if (!(v >= 0.0) || !std::isfinite(v)) {
		throw Error(Errc::InvalidConfig, std::string("synth parameter '") + name + "' must be finite and >= 0");
	}
}

double day_of_year(year_month_day d) {
	const sys_days jan1{d.year() / January / 1};
	return static_cast<double>((sys_days{d} - jan1).count());
}

/// Smooth bump centred on 13:00, zero at night.
double daytime_profile(unsigned hour) {
	const double x = std::cos(kTwoPi * (static_cast<double>(hour) - 13.0) / 24.0);
	return std::max(0.0, x);
}

year_month_day saturday_between(year y, month m, unsigned from_day) {
	sys_days d{y / m / day{from_day}};
	while (weekday{d} != Saturday) {
		d += days{1};
	}
	return year_month_day{d};
}

class Ar1 {
public:
	Ar1(double phi, double sd) : phi_(phi), sd_(sd) {
	}
	double next(std::mt19937_64 &rng) {
		state_ = phi_ * state_ + sd_ * std::sqrt(1.0 - phi_ * phi_) * normal_(rng);
		return state_;
	}

private:
	double phi_;
	double sd_;
	double state_ = 0.0;
	std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Gaussian noise, then a floor at a small fraction of the base so the load stays positive.
double positive(double v, double base) {
	const double floor = base > 0.0 ? 0.02 * base : 0.0;
	return std::max(v, floor);
}

} // namespace

void SynthConfig::validate() const {
	if (years < 1 || years > 100) {
		throw Error(Errc::InvalidConfig, "synth years must be in [1, 100], got " + std::to_string(years));
	}
	require_nonnegative(electricity_base, "electricity_base");
	require_nonnegative(heating_base, "heating_base");
	require_nonnegative(electricity_yearly_amplitude, "electricity_yearly_amplitude");
	require_nonnegative(heating_yearly_amplitude, "heating_yearly_amplitude");
	require_nonnegative(electricity_daily_amplitude, "electricity_daily_amplitude");
	require_nonnegative(opening_increment, "opening_increment");
	require_nonnegative(heating_coefficient, "heating_coefficient");
	require_nonnegative(temperature_yearly_amplitude, "temperature_yearly_amplitude");
	require_nonnegative(temperature_daily_amplitude, "temperature_daily_amplitude");
	require_nonnegative(electricity_noise_sd, "electricity_noise_sd");
	require_nonnegative(heating_noise_sd, "heating_noise_sd");
	require_nonnegative(weather_noise_sd, "weather_noise_sd");
	if (!std::isfinite(temperature_mean) || !std::isfinite(reference_temperature)) {
		throw Error(Errc::InvalidConfig, "synth temperatures must be finite");
	}
	if (mode_change) {
		if (!mode_change->first.ok() || !mode_change->last.ok() ||
		    sys_days{mode_change->last} < sys_days{mode_change->first}) {
			throw Error(Errc::InvalidConfig, "mode-change window needs valid dates with first <= last");
		}
		require_nonnegative(mode_change->increment, "mode_change.increment");
	}
}

Timestamp SynthConfig::end() const {
	const year_month_day d = start.date();
	const year_month_day e{d.year() + std::chrono::years{years}, d.month(), d.day()};
	const sys_days end_day = e.ok() ? sys_days{e} : sys_days{e.year() / e.month() / last};
	return Timestamp(static_cast<std::int64_t>(end_day.time_since_epoch().count()) * 24 + start.hour_of_day());
}

std::optional<ModeChangeWindow> SynthConfig::effective_mode_change() const {
	if (mode_change) {
		return mode_change;
	}
	if (!default_mode_change) {
		return std::nullopt;
	}
	const year last_year = start.date().year() + std::chrono::years{years - 1};
	return ModeChangeWindow{last_year / November / 29, last_year / November / 30, 30.0};
}

year_month_day easter_sunday(int y) {
	// Anonymous Gregorian computus.
	const int a = y % 19;
	const int b = y / 100;
	const int c = y % 100;
	const int d = b / 4;
	const int e = b % 4;
	const int f = (b + 8) / 25;
	const int g = (b - f + 1) / 3;
	const int h = (19 * a + b - d - g + 15) % 30;
	const int i = c / 4;
	const int k = c % 4;
	const int l = (32 + 2 * e + 2 * i - h - k) % 7;
	const int m = (a + 11 * h + 22 * l) / 451;
	const int month_ = (h + l - 7 * m + 114) / 31;
	const int day_ = ((h + l - 7 * m + 114) % 31) + 1;
	return year{y} / month{static_cast<unsigned>(month_)} / day{static_cast<unsigned>(day_)};
}

std::set<sys_days> swedish_holidays(int y) {
	const year yr{y};
	const sys_days easter{easter_sunday(y)};
	return {
	    sys_days{yr / January / 1},
	    sys_days{yr / January / 6},
	    easter - days{2},
	    easter,
	    easter + days{1},
	    sys_days{yr / May / 1},
	    easter + days{39},
	    easter + days{49},
	    sys_days{yr / June / 6},
	    sys_days{saturday_between(yr, June, 20)},
	    sys_days{saturday_between(yr, October, 31)},
	    sys_days{yr / December / 25},
	    sys_days{yr / December / 26},
	};
}

SynthData generate(const SynthConfig &config) {
	config.validate();
	const Timestamp end = config.end();
	const std::size_t n = static_cast<std::size_t>(end - config.start);

	SynthData out;
	for (int y = static_cast<int>(config.start.date().year()); y <= static_cast<int>((end - 1).date().year()); ++y) {
		out.calendar.holidays.merge(swedish_holidays(y));
	}
	out.calendar.opening = museum_opening_rules();
	const auto mode_change = config.effective_mode_change();

	std::mt19937_64 rng(config.seed);
	std::normal_distribution<double> normal(0.0, 1.0);
	std::uniform_real_distribution<double> uniform(0.0, 1.0);
	std::exponential_distribution<double> rain_amount(1.0 / 1.2);

	const double wsd = config.weather_noise_sd;
	Ar1 temp_noise(0.9, 2.0 * wsd);
	Ar1 rh_noise(0.9, 6.0 * wsd);
	Ar1 pressure_noise(0.99, 8.0 * wsd);
	Ar1 wind_noise(0.9, 1.5 * wsd);

	std::vector<double> elec(n), heat(n), temp(n), rh(n), dew(n), precip(n), pressure(n), wind(n);
	for (std::size_t t = 0; t < n; ++t) {
		const Timestamp ts = config.start + static_cast<std::int64_t>(t);
		const TemporalFeatures tf = temporal_features(ts, out.calendar);
		const double doy = day_of_year(ts.date()) + static_cast<double>(tf.hour) / 24.0;
		// +1 in winter, -1 in summer
		const double winter = std::cos(kTwoPi * (doy - 15.0) / kYearDays);
		const double daytime = daytime_profile(tf.hour);
		const double diurnal = std::cos(kTwoPi * (static_cast<double>(tf.hour) - 15.0) / 24.0);

		temp[t] = config.temperature_mean - config.temperature_yearly_amplitude * winter +
		          config.temperature_daily_amplitude * diurnal + temp_noise.next(rng);
		rh[t] = std::clamp(78.0 + 8.0 * winter - 12.0 * diurnal + rh_noise.next(rng), 15.0, 100.0);
		{
			// Magnus approximation
			const double a = 17.62, b = 243.12;
			const double gamma = std::log(rh[t] / 100.0) + a * temp[t] / (b + temp[t]);
			dew[t] = b * gamma / (a - gamma);
		}
		precip[t] = uniform(rng) < 0.08 ? rain_amount(rng) : 0.0;
		pressure[t] = 1013.0 + pressure_noise.next(rng);
		wind[t] = std::max(0.0, 4.0 + 0.8 * winter + 1.0 * daytime + wind_noise.next(rng));

		const bool open = tf.is_open && !tf.is_holiday;
		double e = config.electricity_base + config.electricity_yearly_amplitude * winter +
		           config.electricity_daily_amplitude * daytime + (open ? config.opening_increment : 0.0);
		if (mode_change && !open) {
			const sys_days day{ts.date()};
			if (sys_days{mode_change->first} <= day && day <= sys_days{mode_change->last}) {
				e += mode_change->increment;
			}
		}
		elec[t] = positive(e + config.electricity_noise_sd * normal(rng), config.electricity_base);

		const double h = config.heating_base + config.heating_yearly_amplitude * winter +
		                 config.heating_coefficient * std::max(0.0, config.reference_temperature - temp[t]);
		heat[t] = positive(h + config.heating_noise_sd * normal(rng), config.heating_base);
	}

	out.targets = {TimeSeries::complete("electricity", config.start, std::move(elec), "kWh"),
	               TimeSeries::complete("heating", config.start, std::move(heat), "kWh")};
	out.weather = {TimeSeries::complete("temperature", config.start, std::move(temp), "degC"),
	               TimeSeries::complete("relative_humidity", config.start, std::move(rh), "%"),
	               TimeSeries::complete("dew_point", config.start, std::move(dew), "degC"),
	               TimeSeries::complete("precipitation", config.start, std::move(precip), "mm"),
	               TimeSeries::complete("air_pressure", config.start, std::move(pressure), "hPa"),
	               TimeSeries::complete("wind_speed", config.start, std::move(wind), "m/s")};
	return out;
}

Table SynthData::table() const {
	Table t;
	t.start = targets.empty() ? Timestamp{} : targets.front().start;
	t.columns = targets;
	t.columns.insert(t.columns.end(), weather.begin(), weather.end());
	return t;
}

TimeSeries inject_missing(TimeSeries series, double fraction, std::uint64_t seed) {
	if (!(fraction >= 0.0 && fraction < 1.0)) {
		throw Error(Errc::InvalidFraction, "missing fraction must be in [0, 1), got " + std::to_string(fraction));
	}
	const std::size_t n = series.size();
	if (n <= 2) {
		return series;
	}
	const std::size_t interior = n - 2;
	const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(interior)));
	std::vector<std::size_t> idx(interior);
	for (std::size_t i = 0; i < interior; ++i) {
		idx[i] = i + 1;
	}
	std::mt19937_64 rng(seed);
	// partial Fisher-Yates
	for (std::size_t i = 0; i < count; ++i) {
		std::uniform_int_distribution<std::size_t> pick(i, interior - 1);
		std::swap(idx[i], idx[pick(rng)]);
		series.values[idx[i]] = std::numeric_limits<double>::quiet_NaN();
		series.mask[idx[i]] = 1;
	}
	return series;
}

SynthFiles write_synth_files(const SynthData &data, const std::string &dir) {
	namespace fs = std::filesystem;
	std::error_code ec;
	fs::create_directories(dir, ec);
	if (ec) {
		throw Error(Errc::IoError, "cannot create directory '" + dir + "': " + ec.message(), dir);
	}
	SynthFiles files{(fs::path(dir) / "synthetic.csv").string(), (fs::path(dir) / "holidays.txt").string(),
	                 (fs::path(dir) / "calendar.json").string()};
	export_csv_file(files.csv, data.table());
	{
		std::ofstream out(files.holidays, std::ios::binary);
		if (!out) {
			throw Error(Errc::IoError, "cannot write '" + files.holidays + "'", files.holidays);
		}
		write_holidays(out, data.calendar.holidays);
	}
	nlohmann::ordered_json cal;
	cal["holidays"] = "holidays.txt";
	static const char *names[] = {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"};
	nlohmann::ordered_json rules = nlohmann::ordered_json::object();
	for (std::size_t d = 0; d < 7; ++d) {
		if (data.calendar.opening[d]) {
			rules[names[d]] = {data.calendar.opening[d]->open_hour, data.calendar.opening[d]->close_hour};
		} else {
			rules[names[d]] = nullptr;
		}
	}
	cal["opening_rules"] = rules;
	std::ofstream out(files.calendar, std::ios::binary);
	if (!out) {
		throw Error(Errc::IoError, "cannot write '" + files.calendar + "'", files.calendar);
	}
	out << cal.dump(2) << '\n';
	return files;
}

} // namespace energytwin
