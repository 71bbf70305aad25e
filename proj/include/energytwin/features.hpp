#pragma once

#include "energytwin/time.hpp"
#include "energytwin/timeseries.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace energytwin {

struct OpeningHours {
	unsigned open_hour = 0;  ///< inclusive
	unsigned close_hour = 0; ///< exclusive
};

struct CalendarConfig {
	std::set<std::chrono::sys_days> holidays;
	std::array<std::optional<OpeningHours>, 7> opening; ///< index 0 = Monday

	bool is_holiday(std::chrono::year_month_day date) const {
		return holidays.count(std::chrono::sys_days{date}) > 0;
	}
	void validate() const;
};

/// Tuesday to Sunday from 11:00; closes 17:00 Tue/Wed/Fri, 20:00 Thu, 16:00 Sat/Sun.
std::array<std::optional<OpeningHours>, 7> museum_opening_rules();

std::set<std::chrono::sys_days> read_holidays(std::istream &in);
std::set<std::chrono::sys_days> read_holiday_file(const std::string &path);
void write_holidays(std::ostream &out, const std::set<std::chrono::sys_days> &holidays);

struct TemporalFeatures {
	unsigned hour = 0;
	unsigned weekday = 0; ///< 0 = Monday
	bool is_holiday = false;
	bool is_weekend = false;
	bool is_open = false;
};

TemporalFeatures temporal_features(Timestamp ts, const CalendarConfig &cal);

struct CyclicPair {
	double sin_part = 0.0;
	double cos_part = 1.0;
};

CyclicPair sine_cosine_encode(double value, double period);

struct ColumnRange {
	double min = 0.0;
	double max = 0.0;

	bool degenerate() const {
		return !(max > min);
	}
	/// (v - min) / (max - min); a degenerate range maps everything to 0.
	double apply(double v) const {
		return degenerate() ? 0.0 : (v - min) / (max - min);
	}
	double invert(double s) const {
		return degenerate() ? min : min + s * (max - min);
	}
};

class MinMaxScaler {
public:
	MinMaxScaler() = default;
	explicit MinMaxScaler(std::vector<ColumnRange> ranges) : ranges_(std::move(ranges)), fitted_(true) {
	}

	bool fitted() const {
		return fitted_;
	}
	std::size_t columns() const {
		return ranges_.size();
	}
	const ColumnRange &range(std::size_t column) const;

	std::vector<double> apply(std::size_t column, std::span<const double> values) const;
	std::vector<double> invert(std::size_t column, std::span<const double> values) const;

private:
	std::vector<ColumnRange> ranges_;
	bool fitted_ = false;
};

/// Learns per-column min/max. Throws EmptyColumn for an empty column.
MinMaxScaler fit_minmax(const std::vector<std::span<const double>> &train_columns);

/// Input layout: which table columns feed the model and how.
struct FeatureSchema {
	std::string target;
	std::vector<std::string> weather;
	std::size_t lookback = 24;

	/// Predictor count k: scaled weather + 4 cyclical + 3 binary.
	std::size_t predictor_count() const {
		return weather.size() + 7;
	}
	std::vector<std::string> predictor_names() const;
};

inline constexpr std::size_t kCyclicalFeatures = 4;
inline constexpr std::size_t kBinaryFeatures = 3;

/// Scaled model inputs on an hourly grid: column 0 is the scaled target, columns 1..k the predictors.
struct FeatureFrame {
	Timestamp start;
	std::size_t width = 0; ///< k + 1
	std::vector<double> data; ///< row-major rows x width
	std::vector<double> raw_target; ///< target in physical units

	std::size_t rows() const {
		return width == 0 ? 0 : data.size() / width;
	}
	std::span<const double> row(std::size_t r) const {
		return {data.data() + r * width, width};
	}
};

/// Supervised one-step-ahead samples: history rows t-w+1..t, label at t+1.
struct WindowedDataset {
	std::size_t lookback = 0;
	std::size_t predictors = 0; ///< k
	std::vector<double> inputs; ///< samples x lookback x (k+1); per step [y, x_1..x_k]
	std::vector<double> labels; ///< scaled label y_{t+1}
	std::vector<double> raw_history; ///< samples x lookback target values in physical units
	std::vector<double> raw_labels;  ///< labels in physical units
	std::vector<Timestamp> label_times;
	ColumnRange target_range;
	std::string target_unit;

	std::size_t size() const {
		return labels.size();
	}
	std::size_t step_width() const {
		return predictors + 1;
	}
	std::size_t sample_width() const {
		return lookback * step_width();
	}
	std::span<const double> sample(std::size_t i) const {
		return {inputs.data() + i * sample_width(), sample_width()};
	}
	std::vector<double> target_history(std::size_t i) const;
	std::vector<double> predictor_history(std::size_t i) const;
	/// Labels in physical units.
	const std::vector<double> &actuals() const {
		return raw_labels;
	}
	std::span<const double> raw_target_history(std::size_t i) const {
		return {raw_history.data() + i * lookback, lookback};
	}
	WindowedDataset subset(std::span<const std::size_t> indices) const;
};

/// Produces exactly rows - w samples; throws TooShort when rows <= w.
WindowedDataset build_windows(const FeatureFrame &frame, std::size_t lookback, ColumnRange target_range = {},
                              std::string target_unit = {});

/// Scalers fitted on the training split, applied unchanged to every split.
class FeaturePipeline {
public:
	FeaturePipeline(FeatureSchema schema, CalendarConfig calendar);

	void fit(const Table &train);
	bool fitted() const {
		return fitted_;
	}
	FeatureFrame transform(const Table &table) const;
	WindowedDataset windows(const Table &table) const;

	const FeatureSchema &schema() const {
		return schema_;
	}
	const CalendarConfig &calendar() const {
		return calendar_;
	}
	const ColumnRange &target_range() const {
		return target_range_;
	}
	const MinMaxScaler &weather_scaler() const {
		return weather_scaler_;
	}
	/// FNV-1a over the schema and fitted scaler parameters, as 16 hex digits.
	std::string schema_hash() const;

private:
	FeatureSchema schema_;
	CalendarConfig calendar_;
	MinMaxScaler weather_scaler_;
	ColumnRange target_range_;
	std::string target_unit_;
	bool fitted_ = false;
};

} // namespace energytwin
