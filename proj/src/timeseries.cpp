#include "energytwin/timeseries.hpp"

#include "energytwin/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace energytwin {

std::size_t TimeSeries::missing_count() const {
	return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

TimeSeries TimeSeries::complete(std::string id, Timestamp start, std::vector<double> values, std::string unit) {
	TimeSeries s{std::move(id), start, std::move(values), {}, std::move(unit)};
	s.mask.assign(s.values.size(), 0);
	return s;
}

const TimeSeries &Table::column(const std::string &id) const {
	for (const auto &c : columns) {
		if (c.series_id == id) {
			return c;
		}
	}
	throw Error(Errc::InvalidConfig, "table has no column '" + id + "'", id);
}

bool Table::has_column(const std::string &id) const {
	return std::any_of(columns.begin(), columns.end(), [&](const TimeSeries &c) { return c.series_id == id; });
}

Table Table::slice(std::size_t first, std::size_t last) const {
	Table out{start + static_cast<std::int64_t>(first), {}};
	for (const auto &c : columns) {
		TimeSeries s{c.series_id, out.start, {c.values.begin() + first, c.values.begin() + last},
		             {c.mask.begin() + first, c.mask.begin() + last}, c.unit};
		out.columns.push_back(std::move(s));
	}
	return out;
}

namespace {

std::vector<std::string> split_line(const std::string &line) {
	std::vector<std::string> cells;
	std::string cell;
	std::istringstream ss(line);
	while (std::getline(ss, cell, ',')) {
		cells.push_back(cell);
	}
	if (!line.empty() && line.back() == ',') {
		cells.emplace_back();
	}
	return cells;
}

std::string trim(std::string s) {
	auto not_space = [](unsigned char c) { return !std::isspace(c); };
	s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
	s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
	return s;
}

/// `name[unit]` -> (name, unit)
std::pair<std::string, std::string> parse_header_cell(const std::string &cell) {
	const auto open = cell.find('[');
	if (open != std::string::npos && cell.back() == ']') {
		return {trim(cell.substr(0, open)), cell.substr(open + 1, cell.size() - open - 2)};
	}
	return {cell, {}};
}

} // namespace

std::vector<TimeSeries> ingest_csv(std::istream &in) {
	std::string line;
	if (!std::getline(in, line)) {
		throw Error(Errc::ParseError, "empty CSV input");
	}
	if (!line.empty() && line.back() == '\r') {
		line.pop_back();
	}
	const auto header = split_line(line);
	if (header.size() < 2) {
		throw Error(Errc::ParseError, "CSV header needs a timestamp column and at least one value column");
	}
	std::vector<TimeSeries> series;
	for (std::size_t c = 1; c < header.size(); ++c) {
		auto [name, unit] = parse_header_cell(trim(header[c]));
		series.push_back(TimeSeries{name, {}, {}, {}, unit});
	}

	std::optional<Timestamp> first, last;
	std::size_t line_no = 1;
	while (std::getline(in, line)) {
		++line_no;
		if (!line.empty() && line.back() == '\r') {
			line.pop_back();
		}
		if (trim(line).empty()) {
			continue;
		}
		const auto cells = split_line(line);
		if (cells.size() != header.size()) {
			throw Error(Errc::ParseError, "line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
			                                  " cells, header has " + std::to_string(header.size()));
		}
		const Timestamp ts = Timestamp::parse(trim(cells[0]));
		if (last) {
			if (ts == *last) {
				throw Error(Errc::DuplicateTimestamp, "duplicate timestamp " + ts.to_string(), ts.to_string());
			}
			if (ts < *last) {
				throw Error(Errc::NonHourlyStep, "timestamp " + ts.to_string() + " goes backwards", ts.to_string());
			}
			// grid completion
			for (Timestamp gap = *last + 1; gap < ts; gap = gap + 1) {
				for (auto &s : series) {
					s.values.push_back(std::numeric_limits<double>::quiet_NaN());
					s.mask.push_back(1);
				}
			}
		} else {
			first = ts;
		}
		last = ts;
		for (std::size_t c = 1; c < cells.size(); ++c) {
			const std::string cell = trim(cells[c]);
			auto &s = series[c - 1];
			if (cell.empty()) {
				s.values.push_back(std::numeric_limits<double>::quiet_NaN());
				s.mask.push_back(1);
				continue;
			}
			double v = 0.0;
			auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
			if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
				throw Error(Errc::MalformedValue,
				            "line " + std::to_string(line_no) + ": cannot parse '" + cell + "' as a number",
				            s.series_id);
			}
			s.values.push_back(v);
			s.mask.push_back(0);
		}
	}
	for (auto &s : series) {
		s.start = first.value_or(Timestamp{});
	}
	return series;
}

std::vector<TimeSeries> ingest_csv_file(const std::string &path) {
	std::ifstream in(path);
	if (!in) {
		throw Error(Errc::IoError, "cannot open '" + path + "'", path);
	}
	return ingest_csv(in);
}

void export_csv(std::ostream &out, const Table &table) {
	out << "timestamp";
	for (const auto &c : table.columns) {
		out << ',' << c.series_id;
		if (!c.unit.empty()) {
			out << '[' << c.unit << ']';
		}
	}
	out << '\n';
	char buf[64];
	for (std::size_t r = 0; r < table.rows(); ++r) {
		out << (table.start + static_cast<std::int64_t>(r)).to_string();
		for (const auto &c : table.columns) {
			out << ',';
			if (!c.missing(r)) {
				auto res = std::to_chars(buf, buf + sizeof buf, c.values[r]);
				out.write(buf, res.ptr - buf);
			}
		}
		out << '\n';
	}
}

void export_csv_file(const std::string &path, const Table &table) {
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw Error(Errc::IoError, "cannot write '" + path + "'", path);
	}
	export_csv(out, table);
}

TimeSeries linear_interpolate_missing(TimeSeries series) {
	const std::size_t n = series.size();
	if (n == 0) {
		return series;
	}
	if (series.missing(0) || series.missing(n - 1)) {
		throw Error(Errc::EdgeMissing, "series '" + series.series_id + "' has a leading or trailing gap",
		            series.series_id);
	}
	std::size_t left = 0;
	for (std::size_t i = 1; i < n; ++i) {
		if (series.missing(i)) {
			continue;
		}
		if (i > left + 1) {
			const double y0 = series.values[left];
			const double y1 = series.values[i];
			const double span = static_cast<double>(i - left);
			for (std::size_t j = left + 1; j < i; ++j) {
				const double frac = static_cast<double>(j - left) / span;
				series.values[j] = y0 + (y1 - y0) * frac;
				series.mask[j] = 0;
			}
		}
		left = i;
	}
	return series;
}

Table align(const std::vector<TimeSeries> &series) {
	if (series.empty()) {
		throw Error(Errc::EmptyIntersection, "no series to align");
	}
	Timestamp lo = series.front().start;
	Timestamp hi = series.front().end();
	for (const auto &s : series) {
		lo = std::max(lo, s.start);
		hi = std::min(hi, s.end());
	}
	if (!(lo < hi)) {
		throw Error(Errc::EmptyIntersection, "series time ranges do not overlap");
	}
	Table out{lo, {}};
	for (const auto &s : series) {
		const auto first = static_cast<std::size_t>(lo - s.start);
		const auto last = static_cast<std::size_t>(hi - s.start);
		out.columns.push_back(TimeSeries{s.series_id, lo, {s.values.begin() + first, s.values.begin() + last},
		                                 {s.mask.begin() + first, s.mask.begin() + last}, s.unit});
	}
	return out;
}

SplitTables split_dataset(const Table &table, const SplitSpec &spec) {
	const std::size_t n = table.rows();
	std::size_t train_rows = 0, val_rows = 0;
	if (const auto *cal = std::get_if<CalendarSplit>(&spec)) {
		const Timestamp last = table.end() - 1;
		if (!(table.start < cal->train_end) || !(cal->train_end < cal->val_end) || !(cal->val_end <= last)) {
			throw Error(Errc::BoundaryOutOfRange,
			            "split boundaries " + cal->train_end.to_string() + " / " + cal->val_end.to_string() +
			                " must satisfy start < train_end < val_end <= " + last.to_string());
		}
		train_rows = static_cast<std::size_t>(cal->train_end - table.start);
		val_rows = static_cast<std::size_t>(cal->val_end - cal->train_end);
	} else {
		const auto &r = std::get<RatioSplit>(spec).ratios;
		const double sum = r[0] + r[1] + r[2];
		if (r[0] <= 0 || r[1] <= 0 || r[2] <= 0 || std::abs(sum - 1.0) > 1e-9) {
			throw Error(Errc::BoundaryOutOfRange, "split ratios must be positive and sum to 1");
		}
		train_rows = static_cast<std::size_t>(std::floor(static_cast<double>(n) * r[0] + 1e-9));
		val_rows = static_cast<std::size_t>(std::floor(static_cast<double>(n) * r[1] + 1e-9));
		if (train_rows == 0 || val_rows == 0 || train_rows + val_rows >= n) {
			throw Error(Errc::BoundaryOutOfRange, "table too short for the requested ratios");
		}
	}
	return SplitTables{table.slice(0, train_rows), table.slice(train_rows, train_rows + val_rows),
	                   table.slice(train_rows + val_rows, n)};
}

} // namespace energytwin
