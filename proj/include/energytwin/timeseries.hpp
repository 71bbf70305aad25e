#pragma once

#include "energytwin/time.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace energytwin {

/// Hourly series; the timestamp of element i is start + i hours.
struct TimeSeries {
	std::string series_id;
	Timestamp start;
	std::vector<double> values;
	std::vector<std::uint8_t> mask; ///< 1 = missing
	std::string unit;

	std::size_t size() const {
		return values.size();
	}
	Timestamp end() const { ///< one past the last sample
		return start + static_cast<std::int64_t>(values.size());
	}
	bool missing(std::size_t i) const {
		return mask[i] != 0;
	}
	std::size_t missing_count() const;

	static TimeSeries complete(std::string id, Timestamp start, std::vector<double> values, std::string unit = {});
};

/// Columns sharing one hourly grid.
struct Table {
	Timestamp start;
	std::vector<TimeSeries> columns;

	std::size_t rows() const {
		return columns.empty() ? 0 : columns.front().size();
	}
	Timestamp end() const {
		return start + static_cast<std::int64_t>(rows());
	}
	const TimeSeries &column(const std::string &id) const;
	bool has_column(const std::string &id) const;
	/// Rows [first, last) as a new table.
	Table slice(std::size_t first, std::size_t last) const;
};

/// Reads `timestamp,col[unit],...`. Gaps in the hourly grid become masked rows.
std::vector<TimeSeries> ingest_csv(std::istream &in);
std::vector<TimeSeries> ingest_csv_file(const std::string &path);

/// Writes the format ingest_csv reads; masked cells are left empty.
void export_csv(std::ostream &out, const Table &table);
void export_csv_file(const std::string &path, const Table &table);

TimeSeries linear_interpolate_missing(TimeSeries series);

/// Restricts every series to the common time range, preserving column order.
Table align(const std::vector<TimeSeries> &series);

struct CalendarSplit {
	Timestamp train_end; ///< first validation hour
	Timestamp val_end;   ///< first test hour
};
struct RatioSplit {
	std::array<double, 3> ratios{0.8, 0.1, 0.1};
};
using SplitSpec = std::variant<CalendarSplit, RatioSplit>;

struct SplitTables {
	Table train;
	Table val;
	Table test;
};

SplitTables split_dataset(const Table &table, const SplitSpec &spec);

} // namespace energytwin
