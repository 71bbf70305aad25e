#include "energytwin/error.hpp"
#include "energytwin/features.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace energytwin;

namespace {

CalendarConfig museum_calendar() {
	CalendarConfig cal;
	cal.opening = museum_opening_rules();
	return cal;
}

Table ramp_table(std::size_t rows, Timestamp start = Timestamp::from_civil(2019, 1, 7)) {
	std::vector<double> y(rows), temp(rows);
	for (std::size_t i = 0; i < rows; ++i) {
		y[i] = 10.0 + static_cast<double>(i);
		temp[i] = -5.0 + 0.5 * static_cast<double>(i % 20);
	}
	return Table{start, {TimeSeries::complete("load", start, y, "kWh"), TimeSeries::complete("temp", start, temp)}};
}

} // namespace

TEST_CASE("opening hours follow the museum schedule") {
	const CalendarConfig cal = museum_calendar();
	// 2019-11-28 is a Thursday, 2019-11-25 a Monday, 2019-11-30 a Saturday
	CHECK(temporal_features(Timestamp::from_civil(2019, 11, 28, 19), cal).is_open);
	CHECK_FALSE(temporal_features(Timestamp::from_civil(2019, 11, 28, 20), cal).is_open);
	CHECK_FALSE(temporal_features(Timestamp::from_civil(2019, 11, 25, 12), cal).is_open);
	CHECK_FALSE(temporal_features(Timestamp::from_civil(2019, 11, 30, 16), cal).is_open);
	CHECK(temporal_features(Timestamp::from_civil(2019, 11, 30, 15), cal).is_open);
	CHECK(temporal_features(Timestamp::from_civil(2019, 11, 30, 11), cal).is_open);
	CHECK_FALSE(temporal_features(Timestamp::from_civil(2019, 11, 30, 10), cal).is_open);

	const auto sat = temporal_features(Timestamp::from_civil(2019, 11, 30, 15), cal);
	CHECK(sat.is_weekend);
	CHECK(sat.weekday == 5);
	CHECK(sat.hour == 15);
}

TEST_CASE("holidays from a date list") {
	std::istringstream in("# comment\n2019-12-25\n\n2019-12-26\n");
	CalendarConfig cal = museum_calendar();
	cal.holidays = read_holidays(in);
	CHECK(cal.holidays.size() == 2);
	CHECK(temporal_features(Timestamp::from_civil(2019, 12, 25, 3), cal).is_holiday);
	CHECK_FALSE(temporal_features(Timestamp::from_civil(2019, 12, 24, 3), cal).is_holiday);

	const auto fixture = read_holiday_file(ENERGYTWIN_DATA_DIR "/holidays_se_2016_2019.txt");
	CHECK(fixture.size() == 52);
	std::ostringstream out;
	write_holidays(out, cal.holidays);
	CHECK(out.str() == "2019-12-25\n2019-12-26\n");
}

TEST_CASE("sine-cosine encoding") {
	auto near = [](CyclicPair p, double s, double c) {
		return std::abs(p.sin_part - s) < 1e-15 && std::abs(p.cos_part - c) < 1e-15;
	};
	CHECK(near(sine_cosine_encode(0, 24), 0, 1));
	CHECK(near(sine_cosine_encode(6, 24), 1, 0));
	CHECK(near(sine_cosine_encode(12, 24), 0, -1));
	CHECK_THROWS_AS(sine_cosine_encode(1, 0), Error);
	CHECK_THROWS_AS(sine_cosine_encode(1, -7), Error);
}

TEST_CASE("min-max scaling") {
	const std::vector<double> col{0, 10};
	const MinMaxScaler s = fit_minmax({col});
	CHECK(s.range(0).min == 0);
	CHECK(s.range(0).max == 10);
	CHECK(s.apply(0, std::vector<double>{5})[0] == 0.5);
	CHECK(s.apply(0, std::vector<double>{12})[0] == doctest::Approx(1.2).epsilon(1e-15));
	CHECK(s.invert(0, s.apply(0, std::vector<double>{3.7}))[0] == doctest::Approx(3.7).epsilon(1e-15));

	const std::vector<double> flat{5, 5, 5};
	const MinMaxScaler d = fit_minmax({flat});
	CHECK(d.range(0).min == 5);
	CHECK(d.range(0).max == 5);
	CHECK(d.apply(0, std::vector<double>{7})[0] == 0.0);
	CHECK(d.invert(0, std::vector<double>{0.3})[0] == 5.0);

	CHECK_THROWS_AS(fit_minmax({std::span<const double>{}}), Error);
	CHECK_THROWS_AS(MinMaxScaler{}.range(0), Error);
}

TEST_CASE("property: min-max round trip within 1e-12") {
	std::mt19937_64 rng(9);
	std::uniform_real_distribution<double> u(-1e3, 1e3);
	for (int t = 0; t < 200; ++t) {
		const double a = u(rng), b = u(rng);
		const ColumnRange r{std::min(a, b), std::max(a, b)};
		const double v = u(rng);
		CHECK(std::abs(r.invert(r.apply(v)) - v) <= 1e-12 * std::max(1.0, std::abs(v)));
	}
}

TEST_CASE("window counts") {
	FeaturePipeline pipe({"load", {"temp"}, 24}, museum_calendar());
	pipe.fit(ramp_table(100));
	CHECK(pipe.windows(ramp_table(26)).size() == 2);
	const WindowedDataset one = pipe.windows(ramp_table(25));
	REQUIRE(one.size() == 1);
	CHECK(one.raw_labels[0] == 10.0 + 24.0);
	CHECK(one.label_times[0] == Timestamp::from_civil(2019, 1, 7) + 24);
	try {
		(void)pipe.windows(ramp_table(24));
		FAIL("too short table accepted");
	} catch (const Error &e) {
		CHECK(e.code() == Errc::TooShort);
	}
}

TEST_CASE("feature layout") {
	const FeatureSchema schema{"load", {"temp"}, 3};
	CHECK(schema.predictor_count() == 8);
	CHECK(FeatureSchema{"electricity", std::vector<std::string>(6, "w"), 24}.predictor_count() == 13);
	FeaturePipeline pipe(schema, museum_calendar());
	CHECK_THROWS_AS(pipe.transform(ramp_table(10)), Error);
	const Table train = ramp_table(40);
	pipe.fit(train);
	const WindowedDataset ds = pipe.windows(train);
	CHECK(ds.step_width() == 9);
	CHECK(ds.size() == 37);
	// sample 0, step 0 is row 0: scaled target, scaled temp, hour sin/cos, weekday sin/cos, flags
	const auto s = ds.sample(0);
	CHECK(s[0] == 0.0);
	CHECK(s[1] == 0.0);
	CHECK(s[2] == 0.0);
	CHECK(s[3] == 1.0);
	CHECK(s[4] == 0.0); // Monday
	CHECK(s[5] == 1.0);
	CHECK(s[6] == 0.0);
	CHECK(s[7] == 0.0);
	CHECK(s[8] == 0.0);
	CHECK(ds.labels[0] == doctest::Approx(3.0 / 39.0));
	CHECK(ds.raw_labels[0] == 13.0);
	CHECK(ds.target_history(0) == std::vector<double>{0.0, 1.0 / 39.0, 2.0 / 39.0});
	CHECK(std::vector<double>(ds.raw_target_history(1).begin(), ds.raw_target_history(1).end()) ==
	      std::vector<double>{11, 12, 13});
	CHECK(pipe.schema_hash().size() == 16);
}

TEST_CASE("property: cyclical pairs lie on the unit circle and flags are binary") {
	CalendarConfig cal = museum_calendar();
	cal.holidays.insert(std::chrono::sys_days{std::chrono::year{2019} / 1 / 8});
	std::mt19937_64 rng(13);
	FeaturePipeline pipe({"load", {"temp"}, 24}, cal);
	const Table t = ramp_table(24 * 21);
	pipe.fit(t);
	const FeatureFrame f = pipe.transform(t);
	bool saw_open = false, saw_holiday = false;
	for (std::size_t r = 0; r < f.rows(); ++r) {
		const auto row = f.row(r);
		CHECK(std::abs(row[2] * row[2] + row[3] * row[3] - 1.0) <= 1e-9);
		CHECK(std::abs(row[4] * row[4] + row[5] * row[5] - 1.0) <= 1e-9);
		for (std::size_t c = 6; c < 9; ++c) {
			CHECK((row[c] == 0.0 || row[c] == 1.0));
		}
		saw_open |= row[8] == 1.0;
		saw_holiday |= row[6] == 1.0;
	}
	CHECK(saw_open);
	CHECK(saw_holiday);

	for (int trial = 0; trial < 50; ++trial) {
		const std::size_t w = 1 + rng() % 48;
		const std::size_t n = w + 1 + rng() % 200;
		FeaturePipeline p({"load", {"temp"}, w}, cal);
		const Table tt = ramp_table(n);
		p.fit(tt);
		CHECK(p.windows(tt).size() == n - w);
	}
}

TEST_CASE("scalers fitted on train are reused unchanged") {
	FeaturePipeline pipe({"load", {"temp"}, 2}, museum_calendar());
	pipe.fit(ramp_table(10));
	CHECK(pipe.target_range().min == 10.0);
	CHECK(pipe.target_range().max == 19.0);
	const WindowedDataset later = pipe.windows(ramp_table(30));
	// rows beyond the training range scale past 1
	CHECK(later.labels.back() == doctest::Approx((39.0 - 10.0) / 9.0));
}
