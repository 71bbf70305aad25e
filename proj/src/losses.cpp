#include "energytwin/losses.hpp"

#include "energytwin/error.hpp"

#include <algorithm>
#include <string>

namespace energytwin {

QuantileSet::QuantileSet(std::vector<double> levels) : levels_(std::move(levels)) {
	if (levels_.empty()) {
		throw Error(Errc::InvalidQuantile, "quantile set must not be empty");
	}
	for (std::size_t i = 0; i < levels_.size(); ++i) {
		if (!(levels_[i] > 0.0 && levels_[i] < 1.0)) {
			throw Error(Errc::InvalidQuantile, "quantile level " + std::to_string(levels_[i]) + " outside (0,1)");
		}
		if (i > 0 && !(levels_[i] > levels_[i - 1])) {
			throw Error(Errc::InvalidQuantile, "quantile levels must be strictly increasing");
		}
	}
}

std::size_t QuantileSet::index_of(double p) const {
	auto it = std::find(levels_.begin(), levels_.end(), p);
	return static_cast<std::size_t>(it - levels_.begin());
}

namespace {

void check_level(double p) {
	if (!(p > 0.0 && p < 1.0)) {
		throw Error(Errc::InvalidQuantile, "quantile level " + std::to_string(p) + " outside (0,1)");
	}
}

} // namespace

double quantile_loss(double forecast, double actual, double p) {
	check_level(p);
	const double over = std::max(0.0, forecast - actual);
	const double under = std::max(0.0, actual - forecast);
	return (1.0 - p) * over + p * under;
}

double quantile_loss_derivative(double forecast, double actual, double p) {
	return forecast >= actual ? 1.0 - p : -p;
}

double total_quantile_loss(std::span<const double> forecasts, std::span<const double> labels, const QuantileSet &q) {
	if (forecasts.size() != labels.size() * q.size()) {
		throw Error(Errc::LengthMismatch, std::to_string(forecasts.size()) + " forecasts for " +
		                                      std::to_string(labels.size()) + " labels x " + std::to_string(q.size()) +
		                                      " quantiles");
	}
	double total = 0.0;
	for (std::size_t i = 0; i < labels.size(); ++i) {
		for (std::size_t j = 0; j < q.size(); ++j) {
			total += quantile_loss(forecasts[i * q.size() + j], labels[i], q[j]);
		}
	}
	return total;
}

double squared_loss(std::span<const double> forecasts, std::span<const double> labels) {
	if (forecasts.size() != labels.size()) {
		throw Error(Errc::LengthMismatch,
		            std::to_string(forecasts.size()) + " forecasts for " + std::to_string(labels.size()) + " labels");
	}
	double total = 0.0;
	for (std::size_t i = 0; i < labels.size(); ++i) {
		const double e = forecasts[i] - labels[i];
		total += e * e;
	}
	return total;
}

double LossSpec::evaluate(std::span<const double> outputs, std::span<const double> labels,
                          std::span<double> gradient) const {
	const std::size_t width = output_size();
	if (outputs.size() != labels.size() * width || gradient.size() != outputs.size()) {
		throw Error(Errc::LengthMismatch, "loss inputs have inconsistent sizes");
	}
	if (kind == Kind::Squared) {
		for (std::size_t i = 0; i < labels.size(); ++i) {
			gradient[i] = 2.0 * (outputs[i] - labels[i]);
		}
		return squared_loss(outputs, labels);
	}
	for (std::size_t i = 0; i < labels.size(); ++i) {
		for (std::size_t j = 0; j < width; ++j) {
			gradient[i * width + j] = quantile_loss_derivative(outputs[i * width + j], labels[i], quantiles[j]);
		}
	}
	return total_quantile_loss(outputs, labels, quantiles);
}

double LossSpec::evaluate(std::span<const double> outputs, std::span<const double> labels) const {
	if (kind == Kind::Squared) {
		return squared_loss(outputs, labels);
	}
	return total_quantile_loss(outputs, labels, quantiles);
}

} // namespace energytwin
