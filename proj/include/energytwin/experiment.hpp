#pragma once

#include "energytwin/evaluation.hpp"
#include "energytwin/features.hpp"
#include "energytwin/forecast_models.hpp"
#include "energytwin/synthetic.hpp"
#include "energytwin/timeseries.hpp"
#include "energytwin/training.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace energytwin {

struct ModelSpec {
	std::string name;
	std::vector<ForecastMode> modes; ///< empty = every head the model supports
	HyperMap hyperparameters;
	std::optional<TrainConfig> train; ///< overrides the experiment-wide settings
};

struct PlotRange {
	Timestamp first;
	Timestamp last; ///< inclusive
};

struct ExperimentConfig {
	std::filesystem::path base_dir; ///< relative paths resolve against this

	std::vector<std::string> csv_paths;
	std::optional<SynthConfig> synth;
	double synth_missing_fraction = 0.0;
	std::optional<std::string> holidays_path;
	std::optional<std::array<std::optional<OpeningHours>, 7>> opening_rules;
	std::optional<std::string> twin_path;

	std::vector<std::string> targets{"electricity", "heating"};
	std::vector<std::string> weather_columns = kSynthWeatherColumns;
	std::size_t lookback = 24;
	QuantileSet quantiles;
	SplitSpec split = RatioSplit{};
	std::vector<ModelSpec> models;
	TrainConfig train;
	std::uint64_t seed = 42;
	std::string out = "out";
	std::optional<PlotRange> plot_range;

	/// Throws InvalidConfig / UnknownModel / InvalidQuantile.
	void validate() const;
	std::filesystem::path resolve(const std::string &path) const;
	std::filesystem::path out_dir() const {
		return resolve(out);
	}
};

ExperimentConfig parse_experiment_config(std::string_view json_text, std::filesystem::path base_dir = {});
/// Paths inside the file resolve relative to its directory.
ExperimentConfig load_experiment_config(const std::string &path);

struct Overrides {
	std::optional<std::uint64_t> seed;
	std::optional<std::string> out; ///< taken relative to the working directory
	std::optional<std::vector<std::string>> models;
};

void apply_overrides(ExperimentConfig &cfg, const Overrides &overrides);

struct Dataset {
	Table table;
	CalendarConfig calendar;
};

/// Reads the configured CSVs (or generates the synthetic set), fills gaps and aligns.
Dataset load_dataset(const ExperimentConfig &cfg);

/// Scaled windows built independently per split, so no window straddles a boundary.
/// An empty or too-short validation split yields an empty validation set.
struct PreparedTarget {
	std::string target;
	FeaturePipeline pipeline;
	WindowedDataset train;
	WindowedDataset val;
	WindowedDataset test;
};

PreparedTarget prepare_target(const Dataset &data, const ExperimentConfig &cfg, const std::string &target);

/// One (model, head, target) fit. The seed is the base seed plus the model's list index.
struct TrainJob {
	std::size_t model_index = 0;
	std::string model;
	ForecastMode mode = ForecastMode::Point;
	std::string target;
	std::uint64_t seed = 0;
};

std::vector<TrainJob> plan_jobs(const ExperimentConfig &cfg);
std::string checkpoint_name(const std::string &model, const std::string &target, ForecastMode mode);

struct RunOptions {
	std::size_t parallel_models = 1;
};

void cmd_synth(const ExperimentConfig &cfg, std::ostream &log);
void cmd_twin_validate(const std::string &path, std::ostream &log);
void cmd_train(const ExperimentConfig &cfg, const RunOptions &options, std::ostream &log);
std::vector<EvaluationReport> cmd_evaluate(const ExperimentConfig &cfg, std::ostream &log);

} // namespace energytwin
