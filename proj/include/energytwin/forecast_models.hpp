#pragma once

#include "energytwin/features.hpp"
#include "energytwin/losses.hpp"
#include "energytwin/networks.hpp"
#include "energytwin/training.hpp"

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace energytwin {

enum class ForecastMode { Point, Quantile };
enum class ValueScale { Scaled, Physical };

std::string_view to_string(ForecastMode mode);

struct PointForecast {
	std::vector<Timestamp> times;
	std::vector<double> values;
	std::string unit;
	ValueScale scale = ValueScale::Physical;

	std::size_t size() const {
		return values.size();
	}
};

struct QuantileForecast {
	std::vector<Timestamp> times;
	QuantileSet levels;
	std::vector<double> values; ///< sample-major: values[i * |Q| + j]
	std::string unit;
	ValueScale scale = ValueScale::Physical;

	std::size_t size() const {
		return times.size();
	}
	double at(std::size_t i, std::size_t j) const {
		return values[i * levels.size() + j];
	}
	/// Forecasts for one level across all samples. Throws InvalidQuantile if absent.
	std::vector<double> level(double p) const;
};

/// Maps scaled forecasts to physical units. Throws InvalidConfig when already physical.
PointForecast to_physical(PointForecast forecast, const ColumnRange &range);
QuantileForecast to_physical(QuantileForecast forecast, const ColumnRange &range);

/// Seasonal-naive one-step forecast from a history: the value `lag` steps before the next one.
double sn_forecast(std::span<const double> history, std::size_t lag);

using HyperMap = std::map<std::string, double>;

/// Learned state restorable from a checkpoint.
struct ModelState {
	std::size_t lookback = 0;
	std::size_t predictors = 0;
	ColumnRange target_range;
	std::string unit;
	std::vector<double> parameters;
};

/// One-step-ahead forecaster with either a point head or a |Q|-output quantile head.
class ForecastModel {
public:
	virtual ~ForecastModel() = default;

	/// Registry name (sn1, sn24, lr, qlr, rnn, cnn).
	virtual std::string name() const = 0;
	virtual HyperMap hyperparameters() const = 0;

	ForecastMode mode() const {
		return mode_;
	}
	const QuantileSet &quantiles() const {
		return quantiles_;
	}
	std::size_t output_size() const {
		return mode_ == ForecastMode::Point ? 1 : quantiles_.size();
	}
	bool fitted() const {
		return fitted_;
	}
	std::uint64_t seed() const {
		return seed_;
	}

	/// Returns a report for iteratively trained models.
	std::optional<TrainReport> fit(const WindowedDataset &train, const WindowedDataset &val, const TrainConfig &cfg);

	PointForecast predict_point(const WindowedDataset &windows) const;
	QuantileForecast predict_quantiles(const WindowedDataset &windows) const;

	ModelState state() const;
	void restore(ModelState state);

protected:
	ForecastModel(ForecastMode mode, QuantileSet quantiles, std::uint64_t seed)
	    : mode_(mode), quantiles_(std::move(quantiles)), seed_(seed) {
	}

	virtual std::optional<TrainReport> fit_impl(const WindowedDataset &train, const WindowedDataset &val,
	                                            const TrainConfig &cfg) = 0;
	/// outputs x samples in scaled units
	virtual nn::Matrix predict_scaled(const WindowedDataset &windows) const = 0;
	virtual std::vector<double> parameters() const = 0;
	virtual void set_parameters(std::span<const double> params) = 0;
	/// True when predict_scaled already returns physical units.
	virtual bool outputs_physical() const {
		return false;
	}

	void check_windows(const WindowedDataset &windows) const;

	ForecastMode mode_;
	QuantileSet quantiles_;
	std::uint64_t seed_;
	bool fitted_ = false;
	std::size_t lookback_ = 0;
	std::size_t predictors_ = 0;
	ColumnRange target_range_;
	std::string unit_;
};

/// y_hat(t+1) = y(t+1-lag). Point mode only; needs lookback >= lag.
class SeasonalNaiveModel final : public ForecastModel {
public:
	explicit SeasonalNaiveModel(std::size_t lag);

	std::string name() const override {
		return "sn" + std::to_string(lag_);
	}
	HyperMap hyperparameters() const override {
		return {{"lag", static_cast<double>(lag_)}};
	}
	std::size_t lag() const {
		return lag_;
	}

protected:
	std::optional<TrainReport> fit_impl(const WindowedDataset &, const WindowedDataset &, const TrainConfig &) override;
	nn::Matrix predict_scaled(const WindowedDataset &windows) const override;
	std::vector<double> parameters() const override {
		return {};
	}
	void set_parameters(std::span<const double>) override {
	}
	bool outputs_physical() const override {
		return true;
	}

private:
	std::size_t lag_;
};

/// Least squares on the flattened window plus intercept, solved in closed form with
/// ridge jitter. A zero ridge solves exactly and throws SingularSystem on rank deficiency.
class LinearRegressionModel final : public ForecastModel {
public:
	explicit LinearRegressionModel(double ridge = 1e-8);

	std::string name() const override {
		return "lr";
	}
	HyperMap hyperparameters() const override {
		return {{"ridge", ridge_}};
	}
	const nn::LinearNetwork *network() const {
		return net_.get();
	}

protected:
	std::optional<TrainReport> fit_impl(const WindowedDataset &train, const WindowedDataset &val,
	                                    const TrainConfig &cfg) override;
	nn::Matrix predict_scaled(const WindowedDataset &windows) const override;
	std::vector<double> parameters() const override;
	void set_parameters(std::span<const double> params) override;

private:
	double ridge_;
	std::unique_ptr<nn::LinearNetwork> net_;
};

/// Ridge least-squares solution of the affine map (weights then intercept), exposed for reuse.
std::vector<double> solve_least_squares(const WindowedDataset &ds, double ridge);

/// One affine head per quantile, trained with Adam on the total pinball loss. Heads
/// start from the least-squares fit shifted by the empirical residual quantiles.
class QuantileLinearModel final : public ForecastModel {
public:
	explicit QuantileLinearModel(QuantileSet quantiles = {}, std::uint64_t seed = 42);

	std::string name() const override {
		return "qlr";
	}
	HyperMap hyperparameters() const override {
		return {};
	}

protected:
	std::optional<TrainReport> fit_impl(const WindowedDataset &train, const WindowedDataset &val,
	                                    const TrainConfig &cfg) override;
	nn::Matrix predict_scaled(const WindowedDataset &windows) const override;
	std::vector<double> parameters() const override;
	void set_parameters(std::span<const double> params) override;

private:
	std::unique_ptr<nn::LinearNetwork> net_;
};

/// Recurrent (rnn) or convolutional (cnn) network trained by train_network.
class NeuralModel final : public ForecastModel {
public:
	NeuralModel(nn::RecurrentHyper hyper, ForecastMode mode, QuantileSet quantiles = {}, std::uint64_t seed = 42);
	NeuralModel(nn::ConvolutionalHyper hyper, ForecastMode mode, QuantileSet quantiles = {}, std::uint64_t seed = 42);

	std::string name() const override {
		return recurrent_ ? "rnn" : "cnn";
	}
	HyperMap hyperparameters() const override;
	/// Builds (or rebuilds) the network for the given input dimensions and seeds its weights.
	nn::Network &build(std::size_t lookback, std::size_t predictors);
	const nn::Network *network() const {
		return net_.get();
	}

protected:
	std::optional<TrainReport> fit_impl(const WindowedDataset &train, const WindowedDataset &val,
	                                    const TrainConfig &cfg) override;
	nn::Matrix predict_scaled(const WindowedDataset &windows) const override;
	std::vector<double> parameters() const override;
	void set_parameters(std::span<const double> params) override;

private:
	bool recurrent_;
	nn::RecurrentHyper rnn_hyper_;
	nn::ConvolutionalHyper cnn_hyper_;
	std::unique_ptr<nn::Network> net_;
};

/// Registry names accepted by make_model.
const std::vector<std::string> &model_registry();
/// Whether the named model offers a point head, a quantile head, or both.
std::vector<ForecastMode> supported_modes(const std::string &name);

/// Throws UnknownModel for names outside the registry and InvalidHyperparameter
/// for unknown or non-positive settings.
std::unique_ptr<ForecastModel> make_model(const std::string &name, ForecastMode mode, const HyperMap &hyper = {},
                                          QuantileSet quantiles = {}, std::uint64_t seed = 42);

struct CheckpointHeader {
	std::string name;
	ForecastMode mode = ForecastMode::Point;
	std::string target;
	HyperMap hyperparameters;
	std::uint64_t seed = 0;
	std::string schema_hash;
	QuantileSet quantiles;
	ModelState state; ///< parameters travel in the binary section
};

/// Text header line plus JSON line, followed by little-endian float64 parameters.
void save_checkpoint(const std::string &path, const ForecastModel &model, const std::string &target,
                     const std::string &schema_hash);
std::string encode_checkpoint(const ForecastModel &model, const std::string &target, const std::string &schema_hash);
CheckpointHeader decode_checkpoint(const std::string &bytes);
CheckpointHeader read_checkpoint(const std::string &path);
/// Rebuilds a fitted model from a checkpoint.
std::unique_ptr<ForecastModel> load_model(const CheckpointHeader &ckpt);

} // namespace energytwin
