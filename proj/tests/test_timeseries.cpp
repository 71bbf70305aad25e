#include "energytwin/error.hpp"
#include "energytwin/timeseries.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace energytwin;

namespace {

TimeSeries series(std::vector<double> values, Timestamp start = Timestamp(0)) {
	TimeSeries s = TimeSeries::complete("x", start, std::move(values));
	for (std::size_t i = 0; i < s.size(); ++i) {
		if (std::isnan(s.values[i])) {
			s.mask[i] = 1;
		}
	}
	return s;
}

constexpr double NaN = std::numeric_limits<double>::quiet_NaN();

template <class F>
Errc code_of(F &&f) {
	try {
		f();
	} catch (const Error &e) {
		return e.code();
	}
	FAIL("expected an error");
	return Errc::InvalidConfig;
}

std::vector<TimeSeries> read(const std::string &text) {
	std::istringstream in(text);
	return ingest_csv(in);
}

} // namespace

TEST_CASE("timestamps") {
	const Timestamp t = Timestamp::parse("2019-11-28T19:00");
	CHECK(t.to_string() == "2019-11-28T19:00");
	CHECK(t.hour_of_day() == 19);
	CHECK(t.weekday() == 3); // a Thursday
	CHECK(Timestamp::parse("2016-01-01T00:00") == Timestamp::from_civil(2016, 1, 1));
	CHECK(code_of([] { (void)Timestamp::parse("2019-11-28"); }) == Errc::MalformedTimestamp);
	CHECK(code_of([] { (void)Timestamp::parse("2019-11-28T19:30"); }) == Errc::NonHourlyStep);
	CHECK(code_of([] { (void)Timestamp::parse("2019-02-30T01:00"); }) == Errc::MalformedTimestamp);
}

TEST_CASE("ingest_csv") {
	auto cols = read("timestamp,load[kWh]\n2019-01-01T00:00,1\n2019-01-01T01:00,\n2019-01-01T02:00,3\n");
	REQUIRE(cols.size() == 1);
	CHECK(cols[0].series_id == "load");
	CHECK(cols[0].unit == "kWh");
	CHECK(cols[0].size() == 3);
	CHECK(cols[0].mask == std::vector<std::uint8_t>{0, 1, 0});

	cols = read("timestamp,a\n2019-01-01T01:00,1\n2019-01-01T03:00,3\n");
	CHECK(cols[0].size() == 3);
	CHECK(cols[0].mask == std::vector<std::uint8_t>{0, 1, 0});
	CHECK(cols[0].start == Timestamp::parse("2019-01-01T01:00"));

	CHECK(code_of([] { read("timestamp,a\n2019-01-01T01:00,1\n2019-01-01T01:00,2\n"); }) ==
	      Errc::DuplicateTimestamp);
	CHECK(code_of([] { read("timestamp,a\n2019-01-01T01:00,abc\n"); }) == Errc::MalformedValue);
	CHECK(code_of([] { (void)ingest_csv_file("/nonexistent/file.csv"); }) == Errc::IoError);
}

TEST_CASE("export then ingest is the identity on complete data") {
	std::mt19937_64 rng(3);
	std::normal_distribution<double> n(0.0, 1e3);
	std::vector<double> a(200), b(200);
	for (std::size_t i = 0; i < a.size(); ++i) {
		a[i] = n(rng);
		b[i] = n(rng) * 1e-9;
	}
	Table t{Timestamp::from_civil(2018, 3, 1, 5),
	        {TimeSeries::complete("a", Timestamp::from_civil(2018, 3, 1, 5), a, "kWh"),
	         TimeSeries::complete("b", Timestamp::from_civil(2018, 3, 1, 5), b)}};
	std::stringstream ss;
	export_csv(ss, t);
	const auto back = ingest_csv(ss);
	REQUIRE(back.size() == 2);
	CHECK(back[0].values == a);
	CHECK(back[1].values == b);
	CHECK(back[0].unit == "kWh");
	CHECK(back[0].start == t.start);
}

TEST_CASE("linear interpolation") {
	CHECK(linear_interpolate_missing(series({1, NaN, 3})).values == std::vector<double>{1, 2, 3});
	const auto filled = linear_interpolate_missing(series({0, NaN, NaN, 3}));
	CHECK(filled.values == std::vector<double>{0, 1, 2, 3});
	CHECK(filled.missing_count() == 0);
	CHECK(code_of([] { (void)linear_interpolate_missing(series({NaN, 2, 3})); }) == Errc::EdgeMissing);
	CHECK(code_of([] { (void)linear_interpolate_missing(series({1, 2, NaN})); }) == Errc::EdgeMissing);
}

TEST_CASE("property: interpolation recovers affine sequences") {
	std::mt19937_64 rng(5);
	std::uniform_real_distribution<double> coef(-100.0, 100.0);
	for (int trial = 0; trial < 50; ++trial) {
		const double a = coef(rng), b = coef(rng);
		const std::size_t n = 3 + rng() % 200;
		std::vector<double> truth(n), holed(n);
		for (std::size_t i = 0; i < n; ++i) {
			truth[i] = a + b * static_cast<double>(i);
			holed[i] = (i > 0 && i + 1 < n && rng() % 3 == 0) ? NaN : truth[i];
		}
		const auto filled = linear_interpolate_missing(series(holed));
		for (std::size_t i = 0; i < n; ++i) {
			CHECK(std::abs(filled.values[i] - truth[i]) <= 1e-12 * std::max(1.0, std::abs(truth[i])));
		}
	}
}

TEST_CASE("align") {
	std::vector<double> v(101, 1.0);
	const auto a = TimeSeries::complete("a", Timestamp(0), v);
	const auto b = TimeSeries::complete("b", Timestamp(50), v);
	const Table t = align({a, b});
	CHECK(t.start == Timestamp(50));
	CHECK(t.rows() == 51);
	CHECK(t.columns[0].series_id == "a");

	const Table same = align({a, a});
	CHECK(same.start == a.start);
	CHECK(same.rows() == a.size());

	const auto c = TimeSeries::complete("c", Timestamp(500), v);
	CHECK(code_of([&] { (void)align({a, c}); }) == Errc::EmptyIntersection);
}

TEST_CASE("split_dataset") {
	std::vector<double> v(1000);
	for (std::size_t i = 0; i < v.size(); ++i) {
		v[i] = static_cast<double>(i);
	}
	const Table t{Timestamp(0), {TimeSeries::complete("y", Timestamp(0), v)}};
	const auto s = split_dataset(t, RatioSplit{{0.8, 0.1, 0.1}});
	CHECK(s.train.rows() == 800);
	CHECK(s.val.rows() == 100);
	CHECK(s.test.rows() == 100);

	// concatenation identity
	std::vector<double> joined;
	for (const Table *p : {&s.train, &s.val, &s.test}) {
		const auto &c = p->column("y").values;
		joined.insert(joined.end(), c.begin(), c.end());
	}
	CHECK(joined == v);
	CHECK(s.val.start == Timestamp(800));

	CHECK(code_of([&] {
		(void)split_dataset(t, CalendarSplit{Timestamp(2000), Timestamp(2100)});
	}) == Errc::BoundaryOutOfRange);
}

TEST_CASE("calendar split reproduces the 38/5/5-month protocol") {
	using namespace std::chrono;
	const Timestamp start = Timestamp::from_civil(2016, 1, 1);
	const std::size_t n = static_cast<std::size_t>(Timestamp::from_civil(2020, 1, 1) - start);
	const Table t{start, {TimeSeries::complete("y", start, std::vector<double>(n, 1.0))}};
	const auto s = split_dataset(t, CalendarSplit{Timestamp::from_civil(2019, 3, 1), Timestamp::from_civil(2019, 8, 1)});
	auto hours = [](sys_days a, sys_days b) { return static_cast<std::size_t>((b - a).count()) * 24; };
	CHECK(s.train.rows() == hours(2016y / January / 1, 2019y / March / 1));
	CHECK(s.val.rows() == hours(2019y / March / 1, 2019y / August / 1));
	CHECK(s.test.rows() == hours(2019y / August / 1, 2020y / January / 1));
	CHECK(s.train.end() - 1 == Timestamp::from_civil(2019, 2, 28, 23));
	CHECK(s.val.end() - 1 == Timestamp::from_civil(2019, 7, 31, 23));
}
