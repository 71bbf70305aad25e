#include "energytwin/twin_graph.hpp"

#include "energytwin/error.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

namespace energytwin::twin {

using nlohmann::json;

std::string_view to_string(Kind kind) {
	switch (kind) {
	case Kind::Location: return "Location";
	case Kind::Equipment: return "Equipment";
	case Kind::Resource: return "Resource";
	case Kind::Point: return "Point";
	}
	return "?";
}

std::string_view to_string(PointSubtype subtype) {
	switch (subtype) {
	case PointSubtype::Sensor: return "Sensor";
	case PointSubtype::Setpoint: return "Setpoint";
	case PointSubtype::Status: return "Status";
	case PointSubtype::VirtualPoint: return "VirtualPoint";
	}
	return "?";
}

std::string_view to_string(Predicate predicate) {
	switch (predicate) {
	case Predicate::HasLocation: return "hasLocation";
	case Predicate::IsPartOf: return "isPartOf";
	case Predicate::HasPoint: return "hasPoint";
	case Predicate::Feeds: return "feeds";
	case Predicate::Measures: return "measures";
	}
	return "?";
}

Kind parse_kind(std::string_view text) {
	for (Kind k : {Kind::Location, Kind::Equipment, Kind::Resource, Kind::Point}) {
		if (to_string(k) == text) {
			return k;
		}
	}
	throw Error(Errc::ParseError, "unknown entity kind '" + std::string(text) + "'");
}

PointSubtype parse_subtype(std::string_view text) {
	for (PointSubtype s :
	     {PointSubtype::Sensor, PointSubtype::Setpoint, PointSubtype::Status, PointSubtype::VirtualPoint}) {
		if (to_string(s) == text) {
			return s;
		}
	}
	throw Error(Errc::ParseError, "unknown point subtype '" + std::string(text) + "'");
}

Predicate parse_predicate(std::string_view text) {
	for (Predicate p : {Predicate::HasLocation, Predicate::IsPartOf, Predicate::HasPoint, Predicate::Feeds,
	                    Predicate::Measures}) {
		if (to_string(p) == text) {
			return p;
		}
	}
	throw Error(Errc::ParseError, "unknown predicate '" + std::string(text) + "'");
}

const Entity *TwinDocument::find(std::string_view id) const {
	auto it = entities_.find(std::string(id));
	return it == entities_.end() ? nullptr : &it->second;
}

const SeriesBinding *TwinDocument::binding(std::string_view point_id) const {
	auto it = bindings_.find(std::string(point_id));
	return it == bindings_.end() ? nullptr : &it->second;
}

const SeriesBinding *TwinDocument::binding_for_series(std::string_view series_id) const {
	for (const auto &[id, b] : bindings_) {
		if (b.series_id == series_id) {
			return &b;
		}
	}
	return nullptr;
}

namespace {

void check_entity_shape(const Entity &e) {
	if (e.id.empty()) {
		throw Error(Errc::InvalidConfig, "entity id must not be empty");
	}
	if (e.kind != Kind::Point && e.unit) {
		throw Error(Errc::UnitOnNonPoint, "entity '" + e.id + "' of kind " + std::string(to_string(e.kind)) +
		                                      " carries a unit",
		            e.id);
	}
	if (e.kind != Kind::Point && e.subtype) {
		throw Error(Errc::PredicateKindMismatch, "entity '" + e.id + "' is not a Point but carries a subtype", e.id);
	}
}

void check_relationship(const std::map<std::string, Entity> &entities, const Relationship &rel) {
	auto subj = entities.find(rel.subject);
	if (subj == entities.end()) {
		throw Error(Errc::UnknownEntity, "relationship subject '" + rel.subject + "' does not exist", rel.subject);
	}
	auto obj = entities.find(rel.object);
	if (obj == entities.end()) {
		throw Error(Errc::UnknownEntity, "relationship object '" + rel.object + "' does not exist", rel.object);
	}
	const Kind want = rel.predicate == Predicate::HasPoint      ? Kind::Point
	                  : rel.predicate == Predicate::HasLocation ? Kind::Location
	                                                            : obj->second.kind;
	if (obj->second.kind != want) {
		throw Error(Errc::PredicateKindMismatch,
		            std::string(to_string(rel.predicate)) + " requires a " + std::string(to_string(want)) +
		                " object, '" + rel.object + "' is " + std::string(to_string(obj->second.kind)),
		            rel.object);
	}
}

void check_binding(const std::map<std::string, Entity> &entities, const SeriesBinding &b) {
	auto it = entities.find(b.point_id);
	if (it == entities.end()) {
		throw Error(Errc::UnknownEntity, "binding refers to unknown entity '" + b.point_id + "'", b.point_id);
	}
	if (it->second.kind != Kind::Point) {
		throw Error(Errc::NotAPoint, "'" + b.point_id + "' is not a Point", b.point_id);
	}
}

} // namespace

TwinDocument add_entity(TwinDocument doc, Entity entity) {
	check_entity_shape(entity);
	if (doc.entities_.count(entity.id)) {
		throw Error(Errc::DuplicateId, "entity id '" + entity.id + "' already present", entity.id);
	}
	std::string id = entity.id;
	doc.entities_.emplace(std::move(id), std::move(entity));
	return doc;
}

TwinDocument add_relationship(TwinDocument doc, Relationship rel) {
	check_relationship(doc.entities_, rel);
	if (doc.relationships_.count(rel)) {
		throw Error(Errc::DuplicateTriple,
		            "triple (" + rel.subject + " " + std::string(to_string(rel.predicate)) + " " + rel.object +
		                ") already stored",
		            rel.subject);
	}
	doc.relationships_.insert(std::move(rel));
	return doc;
}

TwinDocument bind_series(TwinDocument doc, const std::string &point_id, const std::string &series_id) {
	SeriesBinding b{point_id, series_id, std::nullopt};
	check_binding(doc.entities_, b);
	if (doc.bindings_.count(point_id)) {
		throw Error(Errc::AlreadyBound, "point '" + point_id + "' is already bound", point_id);
	}
	doc.bindings_.emplace(point_id, std::move(b));
	return doc;
}

TwinDocument update_point_status(TwinDocument doc, const std::string &point_id, std::int64_t timestamp,
                                 double value) {
	auto it = doc.bindings_.find(point_id);
	if (it == doc.bindings_.end()) {
		throw Error(Errc::Unbound, "point '" + point_id + "' has no series binding", point_id);
	}
	auto &latest = it->second.latest_value;
	if (latest && timestamp < latest->timestamp) {
		throw Error(Errc::NonMonotonicTimestamp,
		            "status for '" + point_id + "' at " + std::to_string(timestamp) + " precedes recorded " +
		                std::to_string(latest->timestamp),
		            point_id);
	}
	latest = StatusSample{timestamp, value};
	return doc;
}

std::vector<Entity> query_points(const TwinDocument &doc, const PointFilter &filter) {
	auto require = [&](const std::optional<std::string> &id) {
		if (id && !doc.find(*id)) {
			throw Error(Errc::UnknownEntity, "filter refers to unknown entity '" + *id + "'", *id);
		}
	};
	require(filter.location_id);
	require(filter.equipment_id);

	const auto &rels = doc.relationships();
	auto has = [&](const std::string &s, Predicate p, const std::string &o) {
		return rels.count(Relationship{s, p, o}) > 0;
	};

	std::vector<Entity> out;
	for (const auto &[id, e] : doc.entities()) {
		if (e.kind != Kind::Point) {
			continue;
		}
		if (filter.subtype && e.subtype.value_or(PointSubtype::Sensor) != *filter.subtype) {
			continue;
		}
		if (filter.equipment_id && !has(*filter.equipment_id, Predicate::HasPoint, id)) {
			continue;
		}
		if (filter.location_id) {
			bool located = has(id, Predicate::HasLocation, *filter.location_id);
			for (auto it = rels.begin(); !located && it != rels.end(); ++it) {
				located = it->predicate == Predicate::HasPoint && it->object == id &&
				          has(it->subject, Predicate::HasLocation, *filter.location_id);
			}
			if (!located) {
				continue;
			}
		}
		out.push_back(e);
	}
	return out; // std::map iteration is already id-ordered
}

void validate(const TwinDocument &doc) {
	auto integrity = [](const Error &e) {
		return Error(Errc::IntegrityError, e.what(), e.subject());
	};
	try {
		for (const auto &[id, e] : doc.entities()) {
			if (id != e.id) {
				throw Error(Errc::DuplicateId, "entity key does not match its id", e.id);
			}
			check_entity_shape(e);
		}
		for (const auto &rel : doc.relationships()) {
			check_relationship(doc.entities(), rel);
		}
		for (const auto &[id, b] : doc.bindings()) {
			if (id != b.point_id) {
				throw Error(Errc::AlreadyBound, "binding key does not match its point id", b.point_id);
			}
			check_binding(doc.entities(), b);
		}
	} catch (const Error &e) {
		if (e.code() == Errc::IntegrityError) {
			throw;
		}
		throw integrity(e);
	}
}

std::string serialize(const TwinDocument &doc) {
	json entities = json::array();
	for (const auto &[id, e] : doc.entities()) {
		json je = {{"id", e.id}, {"name", e.name}, {"kind", to_string(e.kind)}};
		if (e.subtype) {
			je["subtype"] = to_string(*e.subtype);
		}
		if (e.unit) {
			je["unit"] = *e.unit;
		}
		json attrs = json::object();
		for (const auto &[k, v] : e.attributes) {
			std::visit([&](const auto &x) { attrs[k] = x; }, v);
		}
		je["attributes"] = std::move(attrs);
		entities.push_back(std::move(je));
	}
	json rels = json::array();
	for (const auto &r : doc.relationships()) {
		rels.push_back({{"subject", r.subject}, {"predicate", to_string(r.predicate)}, {"object", r.object}});
	}
	json binds = json::array();
	for (const auto &[id, b] : doc.bindings()) {
		json jb = {{"point_id", b.point_id}, {"series_id", b.series_id}};
		if (b.latest_value) {
			jb["latest_value"] = {{"timestamp", b.latest_value->timestamp}, {"value", b.latest_value->value}};
		}
		binds.push_back(std::move(jb));
	}
	json root = {{"schema_version", doc.schema_version()},
	             {"entities", std::move(entities)},
	             {"relationships", std::move(rels)},
	             {"bindings", std::move(binds)}};
	return root.dump(2) + "\n";
}

namespace {

const json &field(const json &obj, const char *key) {
	if (!obj.is_object() || !obj.contains(key)) {
		throw Error(Errc::ParseError, std::string("missing field '") + key + "'");
	}
	return obj.at(key);
}

std::string string_field(const json &obj, const char *key) {
	const json &v = field(obj, key);
	if (!v.is_string()) {
		throw Error(Errc::ParseError, std::string("field '") + key + "' must be a string");
	}
	return v.get<std::string>();
}

} // namespace

TwinDocument deserialize(std::string_view text) {
	json root;
	try {
		root = json::parse(text.begin(), text.end());
	} catch (const json::parse_error &e) {
		throw Error(Errc::ParseError, e.what());
	}
	if (!root.is_object()) {
		throw Error(Errc::ParseError, "twin document must be a JSON object");
	}
	TwinDocument doc;
	const json &version = field(root, "schema_version");
	if (!version.is_number_integer()) {
		throw Error(Errc::ParseError, "schema_version must be an integer");
	}
	doc.schema_version_ = version.get<int>();
	if (doc.schema_version_ != kSchemaVersion) {
		throw Error(Errc::ParseError, "unsupported schema_version " + std::to_string(doc.schema_version_));
	}

	const json &entities = field(root, "entities");
	const json &rels = field(root, "relationships");
	const json &binds = field(root, "bindings");
	if (!entities.is_array() || !rels.is_array() || !binds.is_array()) {
		throw Error(Errc::ParseError, "entities, relationships and bindings must be arrays");
	}

	for (const json &je : entities) {
		Entity e;
		e.id = string_field(je, "id");
		e.name = string_field(je, "name");
		e.kind = parse_kind(string_field(je, "kind"));
		if (je.contains("subtype")) {
			e.subtype = parse_subtype(string_field(je, "subtype"));
		}
		if (je.contains("unit")) {
			e.unit = string_field(je, "unit");
		}
		const json &attrs = field(je, "attributes");
		if (!attrs.is_object()) {
			throw Error(Errc::ParseError, "attributes of '" + e.id + "' must be an object");
		}
		for (const auto &[k, v] : attrs.items()) {
			if (v.is_string()) {
				e.attributes.emplace(k, v.get<std::string>());
			} else if (v.is_number()) {
				e.attributes.emplace(k, v.get<double>());
			} else {
				throw Error(Errc::ParseError, "attribute '" + k + "' of '" + e.id + "' must be a string or number");
			}
		}
		if (doc.entities_.count(e.id)) {
			throw Error(Errc::IntegrityError, "duplicate entity id '" + e.id + "'", e.id);
		}
		std::string id = e.id;
		doc.entities_.emplace(std::move(id), std::move(e));
	}

	for (const json &jr : rels) {
		Relationship r{string_field(jr, "subject"), parse_predicate(string_field(jr, "predicate")),
		               string_field(jr, "object")};
		if (!doc.relationships_.insert(r).second) {
			throw Error(Errc::IntegrityError, "duplicate triple with subject '" + r.subject + "'", r.subject);
		}
	}

	for (const json &jb : binds) {
		SeriesBinding b{string_field(jb, "point_id"), string_field(jb, "series_id"), std::nullopt};
		if (jb.contains("latest_value")) {
			const json &lv = jb.at("latest_value");
			const json &ts = field(lv, "timestamp");
			const json &val = field(lv, "value");
			if (!ts.is_number_integer() || !val.is_number()) {
				throw Error(Errc::ParseError, "latest_value of '" + b.point_id + "' is malformed");
			}
			b.latest_value = StatusSample{ts.get<std::int64_t>(), val.get<double>()};
		}
		if (doc.bindings_.count(b.point_id)) {
			throw Error(Errc::IntegrityError, "point '" + b.point_id + "' bound twice", b.point_id);
		}
		std::string id = b.point_id;
		doc.bindings_.emplace(std::move(id), std::move(b));
	}

	validate(doc);
	return doc;
}

TwinDocument museum_twin() {
	TwinDocument doc;
	auto add = [&](std::string id, std::string name, Kind kind, std::optional<std::string> unit = std::nullopt,
	               std::map<std::string, AttributeValue> attrs = {}) {
		Entity e{std::move(id), std::move(name), kind, std::nullopt, std::move(unit), std::move(attrs)};
		if (kind == Kind::Point) {
			e.subtype = PointSubtype::Sensor;
		}
		doc = add_entity(std::move(doc), std::move(e));
	};
	auto rel = [&](const char *s, Predicate p, const char *o) { doc = add_relationship(std::move(doc), {s, p, o}); };

	add("museum", "City museum building", Kind::Location, std::nullopt,
	    {{"city", std::string("Norrkoping")}, {"floor_area_m2", 2500.0}});
	add("floor1", "Ground floor", Kind::Location);
	add("floor2", "Upper floor", Kind::Location);
	add("outdoor", "Outdoor site", Kind::Location);

	add("elec_meter", "Main electricity meter", Kind::Equipment);
	add("heat_meter", "District heating meter", Kind::Equipment);
	add("weather_station", "Weather station", Kind::Equipment, std::nullopt, {{"distance_km", 2.0}});

	add("electricity", "Electricity supply", Kind::Resource);
	add("district_heat", "District heating water", Kind::Resource);

	add("elec_energy", "Hourly electricity consumption", Kind::Point, "kWh");
	add("heat_energy", "Hourly heating load", Kind::Point, "kWh");
	add("f1_temp", "Ground floor air temperature", Kind::Point, "degC");
	add("f1_humidity", "Ground floor relative humidity", Kind::Point, "%RH");
	add("f2_temp", "Upper floor air temperature", Kind::Point, "degC");
	add("out_temp", "Dry-bulb temperature", Kind::Point, "degC");
	add("out_rh", "Relative humidity", Kind::Point, "%");
	add("out_dew", "Dew point temperature", Kind::Point, "degC");
	add("out_precip", "Precipitation", Kind::Point, "mm");
	add("out_pressure", "Air pressure", Kind::Point, "hPa");
	add("out_wind", "Wind speed", Kind::Point, "m/s");

	rel("floor1", Predicate::IsPartOf, "museum");
	rel("floor2", Predicate::IsPartOf, "museum");
	rel("elec_meter", Predicate::HasLocation, "museum");
	rel("heat_meter", Predicate::HasLocation, "museum");
	rel("weather_station", Predicate::HasLocation, "outdoor");
	rel("elec_meter", Predicate::HasPoint, "elec_energy");
	rel("heat_meter", Predicate::HasPoint, "heat_energy");
	rel("elec_energy", Predicate::Measures, "electricity");
	rel("heat_energy", Predicate::Measures, "district_heat");
	rel("heat_meter", Predicate::Feeds, "museum");
	rel("f1_temp", Predicate::HasLocation, "floor1");
	rel("f1_humidity", Predicate::HasLocation, "floor1");
	rel("f2_temp", Predicate::HasLocation, "floor2");
	for (const char *p : {"out_temp", "out_rh", "out_dew", "out_precip", "out_pressure", "out_wind"}) {
		rel("weather_station", Predicate::HasPoint, p);
	}

	const std::pair<const char *, const char *> series[] = {
	    {"elec_energy", "electricity"},         {"heat_energy", "heating"},       {"out_temp", "temperature"},
	    {"out_rh", "relative_humidity"},        {"out_dew", "dew_point"},         {"out_precip", "precipitation"},
	    {"out_pressure", "air_pressure"},       {"out_wind", "wind_speed"}};
	for (const auto &[p, s] : series) {
		doc = bind_series(std::move(doc), p, s);
	}
	return doc;
}

} // namespace energytwin::twin
