#pragma once

#include "energytwin/forecast_models.hpp"

namespace fixtures {

/// Returns the actual labels; a quantile head repeats them at every level.
class PerfectModel final : public energytwin::ForecastModel {
public:
	explicit PerfectModel(energytwin::ForecastMode mode) : ForecastModel(mode, {}, 0) {
	}
	std::string name() const override {
		return "perfect";
	}
	energytwin::HyperMap hyperparameters() const override {
		return {};
	}

protected:
	std::optional<energytwin::TrainReport> fit_impl(const energytwin::WindowedDataset &,
	                                                const energytwin::WindowedDataset &,
	                                                const energytwin::TrainConfig &) override {
		return std::nullopt;
	}
	energytwin::nn::Matrix predict_scaled(const energytwin::WindowedDataset &w) const override {
		energytwin::nn::Matrix out(static_cast<Eigen::Index>(output_size()), static_cast<Eigen::Index>(w.size()));
		for (std::size_t i = 0; i < w.size(); ++i) {
			out.col(static_cast<Eigen::Index>(i)).setConstant(w.raw_labels[i]);
		}
		return out;
	}
	std::vector<double> parameters() const override {
		return {};
	}
	void set_parameters(std::span<const double>) override {
	}
	bool outputs_physical() const override {
		return true;
	}
};

} // namespace fixtures
