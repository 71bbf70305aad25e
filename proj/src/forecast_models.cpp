#include "energytwin/forecast_models.hpp"

#include "energytwin/error.hpp"

#include <algorithm>
#include <cmath>

namespace energytwin {

std::string_view to_string(ForecastMode mode) {
	return mode == ForecastMode::Point ? "point" : "quantile";
}

std::vector<double> QuantileForecast::level(double p) const {
	const std::size_t j = levels.index_of(p);
	if (j == levels.size()) {
		throw Error(Errc::InvalidQuantile, "forecast has no level " + std::to_string(p));
	}
	std::vector<double> out(size());
	for (std::size_t i = 0; i < size(); ++i) {
		out[i] = at(i, j);
	}
	return out;
}

PointForecast to_physical(PointForecast forecast, const ColumnRange &range) {
	if (forecast.scale == ValueScale::Physical) {
		throw Error(Errc::InvalidConfig, "forecast is already in physical units");
	}
	for (double &v : forecast.values) {
		v = range.invert(v);
	}
	forecast.scale = ValueScale::Physical;
	return forecast;
}

QuantileForecast to_physical(QuantileForecast forecast, const ColumnRange &range) {
	if (forecast.scale == ValueScale::Physical) {
		throw Error(Errc::InvalidConfig, "forecast is already in physical units");
	}
	for (double &v : forecast.values) {
		v = range.invert(v);
	}
	forecast.scale = ValueScale::Physical;
	return forecast;
}

double sn_forecast(std::span<const double> history, std::size_t lag) {
	if (lag == 0) {
		throw Error(Errc::InvalidHyperparameter, "seasonal lag must be positive");
	}
	if (history.size() < lag) {
		throw Error(Errc::InsufficientHistory, "history of " + std::to_string(history.size()) +
		                                           " values is shorter than lag " + std::to_string(lag));
	}
	return history[history.size() - lag];
}

// ---------------------------------------------------------------- base

std::optional<TrainReport> ForecastModel::fit(const WindowedDataset &train, const WindowedDataset &val,
                                              const TrainConfig &cfg) {
	if (train.size() == 0) {
		throw Error(Errc::TooShort, "cannot fit " + name() + " on an empty dataset");
	}
	if (val.size() > 0 && (val.lookback != train.lookback || val.predictors != train.predictors)) {
		throw Error(Errc::ShapeMismatch, "validation windows do not match the training schema");
	}
	lookback_ = train.lookback;
	predictors_ = train.predictors;
	target_range_ = train.target_range;
	unit_ = train.target_unit;
	fitted_ = false;
	auto report = fit_impl(train, val, cfg);
	fitted_ = true;
	return report;
}

void ForecastModel::check_windows(const WindowedDataset &windows) const {
	if (!fitted_) {
		throw Error(Errc::NotFitted, name() + " has not been fitted");
	}
	if (windows.lookback != lookback_ || windows.predictors != predictors_) {
		throw Error(Errc::ShapeMismatch, name() + " was fitted on windows of " + std::to_string(lookback_) + "x" +
		                                     std::to_string(predictors_) + ", got " +
		                                     std::to_string(windows.lookback) + "x" +
		                                     std::to_string(windows.predictors));
	}
}

PointForecast ForecastModel::predict_point(const WindowedDataset &windows) const {
	check_windows(windows);
	if (mode_ != ForecastMode::Point) {
		throw Error(Errc::ShapeMismatch, name() + " has a quantile head, not a point head");
	}
	PointForecast f;
	f.times = windows.label_times;
	f.unit = unit_;
	if (windows.size() == 0) {
		return f;
	}
	const nn::Matrix out = predict_scaled(windows);
	f.values.assign(out.data(), out.data() + out.size());
	if (outputs_physical()) {
		f.scale = ValueScale::Physical;
		return f;
	}
	f.scale = ValueScale::Scaled;
	return to_physical(std::move(f), target_range_);
}

QuantileForecast ForecastModel::predict_quantiles(const WindowedDataset &windows) const {
	check_windows(windows);
	if (mode_ != ForecastMode::Quantile) {
		throw Error(Errc::ShapeMismatch, name() + " has a point head, not a quantile head");
	}
	QuantileForecast f;
	f.times = windows.label_times;
	f.levels = quantiles_;
	f.unit = unit_;
	f.scale = ValueScale::Scaled;
	if (windows.size() > 0) {
		nn::Matrix out = predict_scaled(windows);
		// crossing quantiles are resolved by sorting each step's outputs
		for (Eigen::Index c = 0; c < out.cols(); ++c) {
			std::sort(out.col(c).data(), out.col(c).data() + out.rows());
		}
		f.values.assign(out.data(), out.data() + out.size());
	}
	if (outputs_physical()) {
		f.scale = ValueScale::Physical;
		return f;
	}
	return to_physical(std::move(f), target_range_);
}

ModelState ForecastModel::state() const {
	if (!fitted_) {
		throw Error(Errc::NotFitted, name() + " has not been fitted");
	}
	return {lookback_, predictors_, target_range_, unit_, parameters()};
}

void ForecastModel::restore(ModelState state) {
	lookback_ = state.lookback;
	predictors_ = state.predictors;
	target_range_ = state.target_range;
	unit_ = state.unit;
	set_parameters(state.parameters);
	fitted_ = true;
}

// ---------------------------------------------------------------- seasonal naive

SeasonalNaiveModel::SeasonalNaiveModel(std::size_t lag)
    : ForecastModel(ForecastMode::Point, QuantileSet{}, 0), lag_(lag) {
	if (lag == 0) {
		throw Error(Errc::InvalidHyperparameter, "seasonal lag must be positive");
	}
}

std::optional<TrainReport> SeasonalNaiveModel::fit_impl(const WindowedDataset &train, const WindowedDataset &,
                                                        const TrainConfig &) {
	if (train.lookback < lag_) {
		throw Error(Errc::InsufficientHistory,
		            "lookback " + std::to_string(train.lookback) + " is shorter than lag " + std::to_string(lag_));
	}
	return std::nullopt;
}

nn::Matrix SeasonalNaiveModel::predict_scaled(const WindowedDataset &windows) const {
	nn::Matrix out(1, static_cast<Eigen::Index>(windows.size()));
	for (std::size_t i = 0; i < windows.size(); ++i) {
		out(0, static_cast<Eigen::Index>(i)) = sn_forecast(windows.raw_target_history(i), lag_);
	}
	return out;
}

// ---------------------------------------------------------------- linear regression

std::vector<double> solve_least_squares(const WindowedDataset &ds, double ridge) {
	const auto d = static_cast<Eigen::Index>(ds.sample_width());
	const auto n = static_cast<Eigen::Index>(ds.size());
	const Eigen::Map<const nn::Matrix> x(ds.inputs.data(), d, n);
	const Eigen::Map<const Eigen::VectorXd> y(ds.labels.data(), n);

	nn::Matrix gram = nn::Matrix::Zero(d + 1, d + 1);
	gram.topLeftCorner(d, d).selfadjointView<Eigen::Lower>().rankUpdate(x);
	gram.topLeftCorner(d, d) = gram.topLeftCorner(d, d).selfadjointView<Eigen::Lower>();
	const Eigen::VectorXd sums = x.rowwise().sum();
	gram.block(d, 0, 1, d) = sums.transpose();
	gram.block(0, d, d, 1) = sums;
	gram(d, d) = static_cast<double>(n);
	Eigen::VectorXd rhs(d + 1);
	rhs.head(d) = x * y;
	rhs(d) = y.sum();

	Eigen::VectorXd beta;
	if (ridge > 0.0) {
		gram.diagonal().array() += ridge;
		Eigen::LLT<nn::Matrix> llt(gram);
		if (llt.info() != Eigen::Success) {
			throw Error(Errc::SingularSystem, "normal equations are not positive definite");
		}
		beta = llt.solve(rhs);
	} else {
		Eigen::ColPivHouseholderQR<nn::Matrix> qr(gram);
		if (qr.rank() < gram.rows()) {
			throw Error(Errc::SingularSystem, "normal equations are rank deficient (rank " +
			                                      std::to_string(qr.rank()) + " of " + std::to_string(gram.rows()) +
			                                      ")");
		}
		beta = qr.solve(rhs);
	}
	if (!beta.allFinite()) {
		throw Error(Errc::SingularSystem, "least-squares solution is not finite");
	}
	return {beta.data(), beta.data() + beta.size()};
}

LinearRegressionModel::LinearRegressionModel(double ridge)
    : ForecastModel(ForecastMode::Point, QuantileSet{}, 0), ridge_(ridge) {
	if (!(ridge >= 0.0)) {
		throw Error(Errc::InvalidHyperparameter, "ridge must be non-negative");
	}
}

std::optional<TrainReport> LinearRegressionModel::fit_impl(const WindowedDataset &train, const WindowedDataset &,
                                                           const TrainConfig &) {
	set_parameters(solve_least_squares(train, ridge_));
	return std::nullopt;
}

nn::Matrix LinearRegressionModel::predict_scaled(const WindowedDataset &windows) const {
	return net_->predict(nn::SequenceBatch::all(windows));
}

std::vector<double> LinearRegressionModel::parameters() const {
	return {net_->parameters().begin(), net_->parameters().end()};
}

void LinearRegressionModel::set_parameters(std::span<const double> params) {
	net_ = std::make_unique<nn::LinearNetwork>(nn::Shape{lookback_, predictors_ + 1, 1});
	if (params.size() != net_->parameter_count()) {
		throw Error(Errc::ShapeMismatch, "lr expects " + std::to_string(net_->parameter_count()) +
		                                     " parameters, got " + std::to_string(params.size()));
	}
	std::copy(params.begin(), params.end(), net_->parameters().begin());
}

// ---------------------------------------------------------------- quantile linear regression

QuantileLinearModel::QuantileLinearModel(QuantileSet quantiles, std::uint64_t seed)
    : ForecastModel(ForecastMode::Quantile, std::move(quantiles), seed) {
}

namespace {

double empirical_quantile(std::vector<double> values, double p) {
	std::sort(values.begin(), values.end());
	const double pos = p * static_cast<double>(values.size() - 1);
	const auto lo = static_cast<std::size_t>(std::floor(pos));
	const std::size_t hi = std::min(lo + 1, values.size() - 1);
	return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
}

} // namespace

std::optional<TrainReport> QuantileLinearModel::fit_impl(const WindowedDataset &train, const WindowedDataset &val,
                                                         const TrainConfig &cfg) {
	const std::size_t q = quantiles_.size();
	const std::vector<double> beta = solve_least_squares(train, 1e-8);
	const std::size_t d = train.sample_width();

	nn::LinearNetwork point(nn::Shape{lookback_, predictors_ + 1, 1});
	std::copy(beta.begin(), beta.end(), point.parameters().begin());
	const nn::Matrix fitted = point.predict(nn::SequenceBatch::all(train));
	std::vector<double> residuals(train.size());
	for (std::size_t i = 0; i < train.size(); ++i) {
		residuals[i] = train.labels[i] - fitted(0, static_cast<Eigen::Index>(i));
	}

	net_ = std::make_unique<nn::LinearNetwork>(nn::Shape{lookback_, predictors_ + 1, q});
	auto params = net_->parameters();
	for (std::size_t c = 0; c < d; ++c) {
		for (std::size_t j = 0; j < q; ++j) {
			params[net_->weight_offset() + c * q + j] = beta[c];
		}
	}
	auto bias = net_->head_bias();
	for (std::size_t j = 0; j < q; ++j) {
		bias[j] = beta[d] + empirical_quantile(residuals, quantiles_[j]);
	}
	TrainConfig c = cfg;
	c.seed = seed_;
	return train_network(*net_, train, val, LossSpec::quantile(quantiles_), c);
}

nn::Matrix QuantileLinearModel::predict_scaled(const WindowedDataset &windows) const {
	return net_->predict(nn::SequenceBatch::all(windows));
}

std::vector<double> QuantileLinearModel::parameters() const {
	return {net_->parameters().begin(), net_->parameters().end()};
}

void QuantileLinearModel::set_parameters(std::span<const double> params) {
	net_ = std::make_unique<nn::LinearNetwork>(nn::Shape{lookback_, predictors_ + 1, quantiles_.size()});
	if (params.size() != net_->parameter_count()) {
		throw Error(Errc::ShapeMismatch, "qlr expects " + std::to_string(net_->parameter_count()) +
		                                     " parameters, got " + std::to_string(params.size()));
	}
	std::copy(params.begin(), params.end(), net_->parameters().begin());
}

// ---------------------------------------------------------------- neural

NeuralModel::NeuralModel(nn::RecurrentHyper hyper, ForecastMode mode, QuantileSet quantiles, std::uint64_t seed)
    : ForecastModel(mode, std::move(quantiles), seed), recurrent_(true), rnn_hyper_(hyper) {
	if (hyper.hidden_size == 0 || hyper.layers == 0 || !(hyper.dropout >= 0.0 && hyper.dropout < 1.0)) {
		throw Error(Errc::InvalidHyperparameter, "rnn needs positive hidden_size and layers, dropout in [0,1)");
	}
}

NeuralModel::NeuralModel(nn::ConvolutionalHyper hyper, ForecastMode mode, QuantileSet quantiles, std::uint64_t seed)
    : ForecastModel(mode, std::move(quantiles), seed), recurrent_(false), cnn_hyper_(hyper) {
	if (hyper.channels == 0 || hyper.kernel_size == 0 || hyper.dilation_levels == 0 ||
	    !(hyper.dropout >= 0.0 && hyper.dropout < 1.0)) {
		throw Error(Errc::InvalidHyperparameter,
		            "cnn needs positive channels, kernel_size and dilation_levels, dropout in [0,1)");
	}
}

HyperMap NeuralModel::hyperparameters() const {
	HyperMap out;
	const nn::Hyperparameters h =
	    recurrent_ ? nn::Hyperparameters{{"hidden_size", static_cast<double>(rnn_hyper_.hidden_size)},
	                                     {"layers", static_cast<double>(rnn_hyper_.layers)},
	                                     {"dropout", rnn_hyper_.dropout}}
	               : nn::Hyperparameters{{"channels", static_cast<double>(cnn_hyper_.channels)},
	                                     {"kernel_size", static_cast<double>(cnn_hyper_.kernel_size)},
	                                     {"dilation_levels", static_cast<double>(cnn_hyper_.dilation_levels)},
	                                     {"dropout", cnn_hyper_.dropout}};
	out.insert(h.begin(), h.end());
	return out;
}

nn::Network &NeuralModel::build(std::size_t lookback, std::size_t predictors) {
	const nn::Shape shape{lookback, predictors + 1, output_size()};
	if (recurrent_) {
		net_ = std::make_unique<nn::RecurrentNetwork>(shape, rnn_hyper_);
	} else {
		net_ = std::make_unique<nn::ConvolutionalNetwork>(shape, cnn_hyper_);
	}
	net_->initialize(seed_);
	return *net_;
}

std::optional<TrainReport> NeuralModel::fit_impl(const WindowedDataset &train, const WindowedDataset &val,
                                                 const TrainConfig &cfg) {
	build(lookback_, predictors_);
	const LossSpec loss = mode_ == ForecastMode::Point ? LossSpec::squared() : LossSpec::quantile(quantiles_);
	TrainConfig c = cfg;
	c.seed = seed_;
	return train_network(*net_, train, val, loss, c);
}

nn::Matrix NeuralModel::predict_scaled(const WindowedDataset &windows) const {
	constexpr std::size_t chunk = 1024;
	nn::Matrix out(static_cast<Eigen::Index>(output_size()), static_cast<Eigen::Index>(windows.size()));
	std::vector<std::size_t> idx;
	for (std::size_t first = 0; first < windows.size(); first += chunk) {
		const std::size_t last = std::min(windows.size(), first + chunk);
		idx.resize(last - first);
		for (std::size_t i = first; i < last; ++i) {
			idx[i - first] = i;
		}
		out.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(last - first)) =
		    net_->predict(nn::SequenceBatch::gather(windows, idx));
	}
	return out;
}

std::vector<double> NeuralModel::parameters() const {
	return {net_->parameters().begin(), net_->parameters().end()};
}

void NeuralModel::set_parameters(std::span<const double> params) {
	build(lookback_, predictors_);
	if (params.size() != net_->parameter_count()) {
		throw Error(Errc::ShapeMismatch, name() + " expects " + std::to_string(net_->parameter_count()) +
		                                     " parameters, got " + std::to_string(params.size()));
	}
	std::copy(params.begin(), params.end(), net_->parameters().begin());
}

// ---------------------------------------------------------------- registry

const std::vector<std::string> &model_registry() {
	static const std::vector<std::string> names{"sn1", "sn24", "lr", "qlr", "rnn", "cnn"};
	return names;
}

std::vector<ForecastMode> supported_modes(const std::string &name) {
	if (name == "sn1" || name == "sn24" || name == "lr") {
		return {ForecastMode::Point};
	}
	if (name == "qlr") {
		return {ForecastMode::Quantile};
	}
	if (name == "rnn" || name == "cnn") {
		return {ForecastMode::Point, ForecastMode::Quantile};
	}
	throw Error(Errc::UnknownModel, "unknown model '" + name + "'", name);
}

namespace {

class HyperReader {
public:
	HyperReader(const std::string &model, const HyperMap &hyper) : model_(model), hyper_(hyper) {
	}
	std::size_t size(const std::string &key, std::size_t fallback) {
		seen_.push_back(key);
		auto it = hyper_.find(key);
		if (it == hyper_.end()) {
			return fallback;
		}
		const double v = it->second;
		if (!(v >= 1.0) || v != std::floor(v) || v > 1e6) {
			throw Error(Errc::InvalidHyperparameter, model_ + "." + key + " must be a positive integer", key);
		}
		return static_cast<std::size_t>(v);
	}
	double real(const std::string &key, double fallback) {
		seen_.push_back(key);
		auto it = hyper_.find(key);
		return it == hyper_.end() ? fallback : it->second;
	}
	void finish() const {
		for (const auto &[k, v] : hyper_) {
			if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) {
				throw Error(Errc::InvalidHyperparameter, "unknown hyperparameter '" + k + "' for " + model_, k);
			}
		}
	}

private:
	std::string model_;
	const HyperMap &hyper_;
	std::vector<std::string> seen_;
};

} // namespace

std::unique_ptr<ForecastModel> make_model(const std::string &name, ForecastMode mode, const HyperMap &hyper,
                                          QuantileSet quantiles, std::uint64_t seed) {
	const auto modes = supported_modes(name);
	if (std::find(modes.begin(), modes.end(), mode) == modes.end()) {
		throw Error(Errc::InvalidConfig, name + " has no " + std::string(to_string(mode)) + " head", name);
	}
	HyperReader r(name, hyper);
	std::unique_ptr<ForecastModel> model;
	if (name == "sn1" || name == "sn24") {
		model = std::make_unique<SeasonalNaiveModel>(name == "sn1" ? 1 : 24);
		r.real("lag", 0.0);
	} else if (name == "lr") {
		model = std::make_unique<LinearRegressionModel>(r.real("ridge", 1e-8));
	} else if (name == "qlr") {
		model = std::make_unique<QuantileLinearModel>(std::move(quantiles), seed);
	} else if (name == "rnn") {
		nn::RecurrentHyper h;
		h.hidden_size = r.size("hidden_size", h.hidden_size);
		h.layers = r.size("layers", h.layers);
		h.dropout = r.real("dropout", h.dropout);
		model = std::make_unique<NeuralModel>(h, mode, std::move(quantiles), seed);
	} else {
		nn::ConvolutionalHyper h;
		h.channels = r.size("channels", h.channels);
		h.kernel_size = r.size("kernel_size", h.kernel_size);
		h.dilation_levels = r.size("dilation_levels", h.dilation_levels);
		h.dropout = r.real("dropout", h.dropout);
		model = std::make_unique<NeuralModel>(h, mode, std::move(quantiles), seed);
	}
	r.finish();
	return model;
}

} // namespace energytwin
