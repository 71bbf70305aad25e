#pragma once

#include <initializer_list>
#include <span>
#include <vector>

namespace energytwin {

/// Strictly increasing probabilities in (0, 1).
class QuantileSet {
public:
	QuantileSet() : QuantileSet({0.1, 0.5, 0.9}) {
	}
	QuantileSet(std::initializer_list<double> levels) : QuantileSet(std::vector<double>(levels)) {
	}
	explicit QuantileSet(std::vector<double> levels);

	std::size_t size() const {
		return levels_.size();
	}
	double operator[](std::size_t i) const {
		return levels_[i];
	}
	const std::vector<double> &levels() const {
		return levels_;
	}
	/// Index of level p (exact match), or size() when absent.
	std::size_t index_of(double p) const;

	auto begin() const {
		return levels_.begin();
	}
	auto end() const {
		return levels_.end();
	}
	bool operator==(const QuantileSet &) const = default;

private:
	std::vector<double> levels_;
};

/// Pinball loss (1-p)(yhat-y)_+ + p(y-yhat)_+.
double quantile_loss(double forecast, double actual, double p);

/// d/d(forecast) of the pinball loss; at forecast == actual the right derivative (1-p) is used.
double quantile_loss_derivative(double forecast, double actual, double p);

/// Sum over samples and quantiles. `forecasts` is sample-major: forecasts[i * |Q| + j] is sample i, level Q[j].
double total_quantile_loss(std::span<const double> forecasts, std::span<const double> labels, const QuantileSet &q);

/// Sum of squared errors.
double squared_loss(std::span<const double> forecasts, std::span<const double> labels);

struct LossSpec {
	enum class Kind { Squared, Quantile };

	Kind kind = Kind::Squared;
	QuantileSet quantiles;

	static LossSpec squared() {
		return {};
	}
	static LossSpec quantile(QuantileSet q = {}) {
		return {Kind::Quantile, std::move(q)};
	}

	std::size_t output_size() const {
		return kind == Kind::Squared ? 1 : quantiles.size();
	}
	/// Total loss over a batch; writes d(loss)/d(output) into `gradient` (same layout as `outputs`).
	double evaluate(std::span<const double> outputs, std::span<const double> labels,
	                std::span<double> gradient) const;
	double evaluate(std::span<const double> outputs, std::span<const double> labels) const;
};

} // namespace energytwin
