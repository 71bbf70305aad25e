#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

namespace energytwin::twin {

enum class Kind { Location, Equipment, Resource, Point };
enum class PointSubtype { Sensor, Setpoint, Status, VirtualPoint };
enum class Predicate { HasLocation, IsPartOf, HasPoint, Feeds, Measures };

std::string_view to_string(Kind kind);
std::string_view to_string(PointSubtype subtype);
std::string_view to_string(Predicate predicate);
Kind parse_kind(std::string_view text);
PointSubtype parse_subtype(std::string_view text);
Predicate parse_predicate(std::string_view text);

using AttributeValue = std::variant<std::string, double>;

struct Entity {
	std::string id;
	std::string name;
	Kind kind = Kind::Location;
	std::optional<PointSubtype> subtype; ///< Points only; Points without one are treated as Sensor.
	std::optional<std::string> unit;     ///< Points only.
	std::map<std::string, AttributeValue> attributes;

	bool operator==(const Entity &) const = default;
};

struct Relationship {
	std::string subject;
	Predicate predicate = Predicate::HasLocation;
	std::string object;

	auto operator<=>(const Relationship &other) const {
		return std::tie(subject, predicate, object) <=> std::tie(other.subject, other.predicate, other.object);
	}
	bool operator==(const Relationship &) const = default;
};

struct StatusSample {
	std::int64_t timestamp = 0;
	double value = 0.0;
	bool operator==(const StatusSample &) const = default;
};

struct SeriesBinding {
	std::string point_id;
	std::string series_id;
	std::optional<StatusSample> latest_value;
	bool operator==(const SeriesBinding &) const = default;
};

inline constexpr int kSchemaVersion = 1;

/// Parametric twin of one building: typed entities, relationship triples and
/// point-to-series bindings. A value type; every mutating operation below takes
/// a document and returns a new one, so a failed operation never leaves a partial write.
class TwinDocument {
public:
	const std::map<std::string, Entity> &entities() const {
		return entities_;
	}
	const std::set<Relationship> &relationships() const {
		return relationships_;
	}
	const std::map<std::string, SeriesBinding> &bindings() const {
		return bindings_;
	}
	int schema_version() const {
		return schema_version_;
	}

	const Entity *find(std::string_view id) const;
	const SeriesBinding *binding(std::string_view point_id) const;
	/// Point bound to `series_id`, if any.
	const SeriesBinding *binding_for_series(std::string_view series_id) const;

	bool operator==(const TwinDocument &) const = default;

private:
	friend TwinDocument add_entity(TwinDocument doc, Entity entity);
	friend TwinDocument add_relationship(TwinDocument doc, Relationship rel);
	friend TwinDocument bind_series(TwinDocument doc, const std::string &point_id, const std::string &series_id);
	friend TwinDocument update_point_status(TwinDocument doc, const std::string &point_id, std::int64_t timestamp,
	                                        double value);
	friend TwinDocument deserialize(std::string_view text);

	std::map<std::string, Entity> entities_;
	std::set<Relationship> relationships_;
	std::map<std::string, SeriesBinding> bindings_;
	int schema_version_ = kSchemaVersion;
};

TwinDocument add_entity(TwinDocument doc, Entity entity);
TwinDocument add_relationship(TwinDocument doc, Relationship rel);
TwinDocument bind_series(TwinDocument doc, const std::string &point_id, const std::string &series_id);
TwinDocument update_point_status(TwinDocument doc, const std::string &point_id, std::int64_t timestamp, double value);

struct PointFilter {
	std::optional<PointSubtype> subtype;
	std::optional<std::string> location_id;
	std::optional<std::string> equipment_id;
};

/// Points matching every given clause, sorted by id. A point is at a location when
/// it has hasLocation to it directly, or when equipment that hasPoint it does.
std::vector<Entity> query_points(const TwinDocument &doc, const PointFilter &filter = {});

/// Full integrity sweep. Throws Error(IntegrityError) whose subject is the first offending id.
void validate(const TwinDocument &doc);

std::string serialize(const TwinDocument &doc);
/// Throws ParseError on malformed text and IntegrityError on any invariant violation.
TwinDocument deserialize(std::string_view text);

/// 20-entity sensor-only twin of a small museum with meters, floor sensors and a weather station.
TwinDocument museum_twin();

} // namespace energytwin::twin
