#include "energytwin/error.hpp"
#include "energytwin/twin_graph.hpp"
#include "twin_fixtures.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace energytwin;
using namespace energytwin::twin;

namespace {

Entity location(std::string id) {
	return Entity{id, id, Kind::Location, {}, {}, {}};
}
Entity equipment(std::string id) {
	return Entity{id, id, Kind::Equipment, {}, {}, {}};
}
Entity sensor(std::string id, std::string unit = "kWh") {
	return Entity{id, id, Kind::Point, PointSubtype::Sensor, unit, {}};
}

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

std::vector<std::string> ids(const std::vector<Entity> &v) {
	std::vector<std::string> out;
	for (const auto &e : v) {
		out.push_back(e.id);
	}
	return out;
}

} // namespace

TEST_CASE("add_entity") {
	const TwinDocument doc = add_entity({}, location("floor1"));
	CHECK(doc.entities().size() == 1);
	CHECK(code_of([&] { (void)add_entity(add_entity({}, sensor("p1")), sensor("p1")); }) == Errc::DuplicateId);
	Entity meter = equipment("meter");
	meter.unit = "kWh";
	CHECK(code_of([&] { (void)add_entity({}, meter); }) == Errc::UnitOnNonPoint);
}

TEST_CASE("add_relationship enforces kinds and uniqueness") {
	TwinDocument doc = add_entity(add_entity(add_entity({}, equipment("meter1")), location("floor1")),
	                              equipment("boiler1"));
	doc = add_relationship(doc, {"meter1", Predicate::HasLocation, "floor1"});
	CHECK(doc.relationships().size() == 1);
	CHECK(code_of([&] { (void)add_relationship(doc, {"meter1", Predicate::HasLocation, "boiler1"}); }) ==
	      Errc::PredicateKindMismatch);
	CHECK(code_of([&] { (void)add_relationship(doc, {"meter1", Predicate::HasLocation, "floor1"}); }) ==
	      Errc::DuplicateTriple);
	CHECK(code_of([&] { (void)add_relationship(doc, {"meter1", Predicate::HasPoint, "boiler1"}); }) ==
	      Errc::PredicateKindMismatch);
	CHECK(code_of([&] { (void)add_relationship(doc, {"meter1", Predicate::Feeds, "nowhere"}); }) ==
	      Errc::UnknownEntity);
}

TEST_CASE("failed mutations leave the input untouched") {
	const TwinDocument doc = add_entity(add_entity({}, equipment("meter1")), location("floor1"));
	const TwinDocument before = doc;
	CHECK_THROWS_AS((void)add_relationship(doc, {"meter1", Predicate::HasPoint, "floor1"}), Error);
	CHECK_THROWS_AS((void)add_entity(doc, location("floor1")), Error);
	CHECK(doc == before);
}

TEST_CASE("query_points on the museum twin") {
	const TwinDocument doc = museum_twin();
	CHECK(doc.entities().size() == 20);
	// floor1 has the temperature and humidity sensors, floor2 only a temperature sensor
	CHECK(ids(query_points(doc, {.location_id = "floor1"})) == std::vector<std::string>{"f1_humidity", "f1_temp"});
	CHECK(ids(query_points(doc, {.location_id = "floor2"})) == std::vector<std::string>{"f2_temp"});
	CHECK(query_points(doc, {.subtype = PointSubtype::Setpoint}).empty());
	// meters carry their energy points
	CHECK(ids(query_points(doc, {.equipment_id = "elec_meter"})) == std::vector<std::string>{"elec_energy"});

	const auto all = query_points(doc);
	std::size_t point_count = 0;
	for (const auto &[id, e] : doc.entities()) {
		point_count += e.kind == Kind::Point;
	}
	CHECK(all.size() == point_count);
	for (const auto &e : all) {
		CHECK(e.kind == Kind::Point);
	}
	CHECK(std::is_sorted(all.begin(), all.end(), [](const Entity &a, const Entity &b) { return a.id < b.id; }));
}

TEST_CASE("bindings and point status") {
	TwinDocument doc = add_entity(add_entity({}, sensor("p1")), location("floor1"));
	doc = bind_series(doc, "p1", "electricity");
	REQUIRE(doc.binding("p1"));
	CHECK_FALSE(doc.binding("p1")->latest_value);
	CHECK(doc.binding_for_series("electricity")->point_id == "p1");
	CHECK(code_of([&] { (void)bind_series(doc, "p1", "other"); }) == Errc::AlreadyBound);
	CHECK(code_of([&] { (void)bind_series(doc, "floor1", "x"); }) == Errc::NotAPoint);

	doc = update_point_status(doc, "p1", 100, 3.2);
	doc = update_point_status(doc, "p1", 101, 3.4);
	CHECK(doc.binding("p1")->latest_value == StatusSample{101, 3.4});
	CHECK(code_of([&] { (void)update_point_status(doc, "p1", 100, 1.0); }) == Errc::NonMonotonicTimestamp);

	const TwinDocument unbound = add_entity({}, sensor("p2"));
	CHECK(code_of([&] { (void)update_point_status(unbound, "p2", 1, 1.0); }) == Errc::Unbound);
}

TEST_CASE("serialization") {
	const TwinDocument museum = museum_twin();
	CHECK(deserialize(serialize(museum)) == museum);

	std::ifstream in(ENERGYTWIN_DATA_DIR "/museum_twin.json");
	std::stringstream ss;
	ss << in.rdbuf();
	CHECK(deserialize(ss.str()) == museum);

	const std::string text = serialize(museum);
	CHECK(code_of([&] { (void)deserialize(text.substr(0, text.size() / 2)); }) == Errc::ParseError);

	nlohmann::json j = nlohmann::json::parse(text);
	j["relationships"].push_back({{"subject", "museum"}, {"predicate", "feeds"}, {"object", "missing_room"}});
	try {
		(void)deserialize(j.dump());
		FAIL("dangling relationship accepted");
	} catch (const Error &e) {
		CHECK(e.code() == Errc::IntegrityError);
		CHECK(e.subject() == "missing_room");
	}

	nlohmann::json bad_pred = nlohmann::json::parse(text);
	bad_pred["relationships"][0]["predicate"] = "contains";
	CHECK(code_of([&] { (void)deserialize(bad_pred.dump()); }) == Errc::ParseError);
}

TEST_CASE("property: random twins round-trip and keep integrity") {
	std::mt19937_64 rng(7);
	for (int i = 0; i < 100; ++i) {
		const TwinDocument doc = fixtures::random_twin(rng);
		CHECK_NOTHROW(validate(doc));
		CHECK(deserialize(serialize(doc)) == doc);
	}
}

TEST_CASE("property: corrupted twins are rejected with the offending id") {
	std::mt19937_64 rng(11);
	int rejected = 0;
	for (int i = 0; i < 200; ++i) {
		const TwinDocument doc = fixtures::random_twin(rng);
		const auto c = fixtures::corrupt(doc, i % fixtures::kCorruptionRules, rng);
		if (c.text.empty()) {
			continue;
		}
		try {
			(void)deserialize(c.text);
			FAIL("corruption rule " << i % fixtures::kCorruptionRules << " accepted");
		} catch (const Error &e) {
			CHECK(e.code() == Errc::IntegrityError);
			CHECK(e.subject() == c.offending_id);
			CHECK(std::string(e.what()).find(c.offending_id) != std::string::npos);
			++rejected;
		}
	}
	CHECK(rejected > 100);
}
