#include "energytwin/features.hpp"

#include "energytwin/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

namespace energytwin {

void CalendarConfig::validate() const {
	for (std::size_t d = 0; d < opening.size(); ++d) {
		if (opening[d] && !(opening[d]->open_hour < opening[d]->close_hour && opening[d]->close_hour <= 24)) {
			throw Error(Errc::InvalidConfig, "opening rule for weekday " + std::to_string(d) +
			                                     " needs open_hour < close_hour <= 24");
		}
	}
}

std::array<std::optional<OpeningHours>, 7> museum_opening_rules() {
	std::array<std::optional<OpeningHours>, 7> rules;
	rules[1] = OpeningHours{11, 17}; // Tuesday
	rules[2] = OpeningHours{11, 17};
	rules[3] = OpeningHours{11, 20}; // Thursday
	rules[4] = OpeningHours{11, 17};
	rules[5] = OpeningHours{11, 16}; // Saturday
	rules[6] = OpeningHours{11, 16};
	return rules;
}

std::set<std::chrono::sys_days> read_holidays(std::istream &in) {
	std::set<std::chrono::sys_days> out;
	std::string line;
	while (std::getline(in, line)) {
		while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
			line.pop_back();
		}
		if (line.empty() || line.front() == '#') {
			continue;
		}
		out.insert(std::chrono::sys_days{parse_date(line)});
	}
	return out;
}

std::set<std::chrono::sys_days> read_holiday_file(const std::string &path) {
	std::ifstream in(path);
	if (!in) {
		throw Error(Errc::IoError, "cannot open holiday file '" + path + "'", path);
	}
	return read_holidays(in);
}

void write_holidays(std::ostream &out, const std::set<std::chrono::sys_days> &holidays) {
	for (const auto &d : holidays) {
		out << format_date(std::chrono::year_month_day{d}) << '\n';
	}
}

TemporalFeatures temporal_features(Timestamp ts, const CalendarConfig &cal) {
	TemporalFeatures f;
	f.hour = ts.hour_of_day();
	f.weekday = ts.weekday();
	f.is_holiday = cal.is_holiday(ts.date());
	f.is_weekend = f.weekday >= 5;
	const auto &rule = cal.opening[f.weekday];
	f.is_open = rule && rule->open_hour <= f.hour && f.hour < rule->close_hour;
	return f;
}

CyclicPair sine_cosine_encode(double value, double period) {
	if (!(period > 0.0)) {
		throw Error(Errc::NonPositivePeriod, "period must be positive");
	}
	const double angle = 2.0 * std::numbers::pi * value / period;
	return {std::sin(angle), std::cos(angle)};
}

const ColumnRange &MinMaxScaler::range(std::size_t column) const {
	if (!fitted_) {
		throw Error(Errc::NotFitted, "scaler has not been fitted");
	}
	if (column >= ranges_.size()) {
		throw Error(Errc::ShapeMismatch, "scaler has no column " + std::to_string(column));
	}
	return ranges_[column];
}

std::vector<double> MinMaxScaler::apply(std::size_t column, std::span<const double> values) const {
	const ColumnRange &r = range(column);
	std::vector<double> out(values.size());
	std::transform(values.begin(), values.end(), out.begin(), [&](double v) { return r.apply(v); });
	return out;
}

std::vector<double> MinMaxScaler::invert(std::size_t column, std::span<const double> values) const {
	const ColumnRange &r = range(column);
	std::vector<double> out(values.size());
	std::transform(values.begin(), values.end(), out.begin(), [&](double v) { return r.invert(v); });
	return out;
}

MinMaxScaler fit_minmax(const std::vector<std::span<const double>> &train_columns) {
	std::vector<ColumnRange> ranges;
	ranges.reserve(train_columns.size());
	for (std::size_t c = 0; c < train_columns.size(); ++c) {
		const auto &col = train_columns[c];
		if (col.empty()) {
			throw Error(Errc::EmptyColumn, "column " + std::to_string(c) + " is empty");
		}
		const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
		ranges.push_back({*lo, *hi});
	}
	return MinMaxScaler(std::move(ranges));
}

std::vector<std::string> FeatureSchema::predictor_names() const {
	std::vector<std::string> names = weather;
	for (const char *n : {"hour_sin", "hour_cos", "weekday_sin", "weekday_cos", "is_holiday", "is_weekend", "is_open"}) {
		names.emplace_back(n);
	}
	return names;
}

std::vector<double> WindowedDataset::target_history(std::size_t i) const {
	const auto s = sample(i);
	std::vector<double> out(lookback);
	for (std::size_t t = 0; t < lookback; ++t) {
		out[t] = s[t * step_width()];
	}
	return out;
}

std::vector<double> WindowedDataset::predictor_history(std::size_t i) const {
	const auto s = sample(i);
	std::vector<double> out;
	out.reserve(lookback * predictors);
	for (std::size_t t = 0; t < lookback; ++t) {
		out.insert(out.end(), s.begin() + t * step_width() + 1, s.begin() + (t + 1) * step_width());
	}
	return out;
}

WindowedDataset WindowedDataset::subset(std::span<const std::size_t> indices) const {
	WindowedDataset out;
	out.lookback = lookback;
	out.predictors = predictors;
	out.target_range = target_range;
	out.target_unit = target_unit;
	out.inputs.reserve(indices.size() * sample_width());
	for (std::size_t i : indices) {
		const auto s = sample(i);
		out.inputs.insert(out.inputs.end(), s.begin(), s.end());
		out.labels.push_back(labels[i]);
		const auto h = raw_target_history(i);
		out.raw_history.insert(out.raw_history.end(), h.begin(), h.end());
		out.raw_labels.push_back(raw_labels[i]);
		out.label_times.push_back(label_times[i]);
	}
	return out;
}

WindowedDataset build_windows(const FeatureFrame &frame, std::size_t lookback, ColumnRange target_range,
                              std::string target_unit) {
	const std::size_t n = frame.rows();
	if (lookback == 0) {
		throw Error(Errc::InvalidConfig, "lookback must be at least 1");
	}
	if (n <= lookback) {
		throw Error(Errc::TooShort, "table has " + std::to_string(n) + " rows, windows need at least " +
		                                std::to_string(lookback + 1));
	}
	WindowedDataset ds;
	ds.lookback = lookback;
	ds.predictors = frame.width - 1;
	ds.target_range = target_range;
	ds.target_unit = std::move(target_unit);
	const std::size_t count = n - lookback;
	ds.inputs.reserve(count * lookback * frame.width);
	ds.labels.reserve(count);
	for (std::size_t i = 0; i < count; ++i) {
		ds.inputs.insert(ds.inputs.end(), frame.data.begin() + i * frame.width,
		                 frame.data.begin() + (i + lookback) * frame.width);
		ds.labels.push_back(frame.data[(i + lookback) * frame.width]);
		if (frame.raw_target.size() == n) {
			ds.raw_history.insert(ds.raw_history.end(), frame.raw_target.begin() + i,
			                      frame.raw_target.begin() + i + lookback);
			ds.raw_labels.push_back(frame.raw_target[i + lookback]);
		} else {
			for (std::size_t t = 0; t < lookback; ++t) {
				ds.raw_history.push_back(target_range.invert(frame.data[(i + t) * frame.width]));
			}
			ds.raw_labels.push_back(target_range.invert(ds.labels.back()));
		}
		ds.label_times.push_back(frame.start + static_cast<std::int64_t>(i + lookback));
	}
	return ds;
}

FeaturePipeline::FeaturePipeline(FeatureSchema schema, CalendarConfig calendar)
    : schema_(std::move(schema)), calendar_(std::move(calendar)) {
	calendar_.validate();
	if (schema_.lookback == 0) {
		throw Error(Errc::InvalidConfig, "lookback must be at least 1");
	}
}

void FeaturePipeline::fit(const Table &train) {
	const TimeSeries &target = train.column(schema_.target);
	std::vector<std::span<const double>> cols{std::span<const double>(target.values)};
	for (const auto &w : schema_.weather) {
		cols.emplace_back(train.column(w).values);
	}
	MinMaxScaler all = fit_minmax(cols);
	target_range_ = all.range(0);
	std::vector<ColumnRange> weather;
	for (std::size_t c = 1; c < all.columns(); ++c) {
		weather.push_back(all.range(c));
	}
	weather_scaler_ = MinMaxScaler(std::move(weather));
	target_unit_ = target.unit;
	fitted_ = true;
}

FeatureFrame FeaturePipeline::transform(const Table &table) const {
	if (!fitted_) {
		throw Error(Errc::NotFitted, "feature pipeline has not been fitted");
	}
	const TimeSeries &target = table.column(schema_.target);
	std::vector<const TimeSeries *> weather;
	for (const auto &w : schema_.weather) {
		weather.push_back(&table.column(w));
	}
	for (const TimeSeries *s : weather) {
		if (s->missing_count() > 0) {
			throw Error(Errc::EdgeMissing, "column '" + s->series_id + "' still has missing values", s->series_id);
		}
	}
	if (target.missing_count() > 0) {
		throw Error(Errc::EdgeMissing, "target '" + target.series_id + "' still has missing values",
		            target.series_id);
	}

	FeatureFrame frame;
	frame.start = table.start;
	frame.width = schema_.predictor_count() + 1;
	const std::size_t n = table.rows();
	frame.data.reserve(n * frame.width);
	frame.raw_target = target.values;
	for (std::size_t r = 0; r < n; ++r) {
		frame.data.push_back(target_range_.apply(target.values[r]));
		for (std::size_t c = 0; c < weather.size(); ++c) {
			frame.data.push_back(weather_scaler_.range(c).apply(weather[c]->values[r]));
		}
		const TemporalFeatures tf = temporal_features(table.start + static_cast<std::int64_t>(r), calendar_);
		const CyclicPair hour = sine_cosine_encode(tf.hour, 24.0);
		const CyclicPair day = sine_cosine_encode(tf.weekday, 7.0);
		frame.data.push_back(hour.sin_part);
		frame.data.push_back(hour.cos_part);
		frame.data.push_back(day.sin_part);
		frame.data.push_back(day.cos_part);
		frame.data.push_back(tf.is_holiday ? 1.0 : 0.0);
		frame.data.push_back(tf.is_weekend ? 1.0 : 0.0);
		frame.data.push_back(tf.is_open ? 1.0 : 0.0);
	}
	return frame;
}

WindowedDataset FeaturePipeline::windows(const Table &table) const {
	return build_windows(transform(table), schema_.lookback, target_range_, target_unit_);
}

std::string FeaturePipeline::schema_hash() const {
	std::string canon = "target=" + schema_.target + ";lookback=" + std::to_string(schema_.lookback) + ";cols=";
	for (const auto &n : schema_.predictor_names()) {
		canon += n + ",";
	}
	char buf[64];
	auto add_range = [&](const ColumnRange &r) {
		std::snprintf(buf, sizeof buf, "[%.17g,%.17g]", r.min, r.max);
		canon += buf;
	};
	add_range(target_range_);
	for (std::size_t c = 0; c < weather_scaler_.columns(); ++c) {
		add_range(weather_scaler_.range(c));
	}
	std::uint64_t h = 1469598103934665603ull;
	for (unsigned char ch : canon) {
		h ^= ch;
		h *= 1099511628211ull;
	}
	std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
	return buf;
}

} // namespace energytwin
