#pragma once

#include "energytwin/forecast_models.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace energytwin {

/// 100 * RMSE / mean(actual).
double cv_rmse(std::span<const double> forecasts, std::span<const double> actuals);
/// 100 * mean(forecast - actual) / mean(actual); over-prediction is positive.
double nmbe(std::span<const double> forecasts, std::span<const double> actuals);
/// 2 * sum of pinball losses at level p / sum(actual).
double rho_risk(std::span<const double> quantile_forecasts, std::span<const double> actuals, double p);

inline constexpr double kAshraeCvRmseLimit = 30.0;
inline constexpr double kAshraeNmbeLimit = 10.0;

/// CV-RMSE <= 30 % and |NMBE| <= 10 %, both bounds inclusive.
bool ashrae_check(double cv_rmse_pct, double nmbe_pct);

/// Fraction of actuals inside [lower, upper].
double interval_coverage(std::span<const double> lower, std::span<const double> upper, std::span<const double> actuals);

struct EvaluationReport {
	std::string model;
	std::string target;
	std::size_t horizon = 0;
	std::optional<double> cv_rmse_pct;
	std::optional<double> nmbe_pct;
	std::map<double, double> rho_risk; ///< level -> rho-risk
	std::optional<bool> ashrae_pass;
};

/// A named model slot; either head may be absent.
struct SuiteEntry {
	std::string name;
	const ForecastModel *point = nullptr;
	const ForecastModel *quantile = nullptr;
};

/// The levels at which rho-risk is reported.
inline const std::vector<double> kRhoRiskLevels{0.5, 0.9};

/// One report per entry, in entry order, scored against the physical labels of `test`.
std::vector<EvaluationReport> evaluate_suite(const std::vector<SuiteEntry> &models, const WindowedDataset &test,
                                             const std::string &target,
                                             const std::vector<double> &rho_levels = kRhoRiskLevels);

/// Per target, the model with the best CV-RMSE, |NMBE| and rho-risk at each level.
/// Keys look like "heating/cv_rmse" or "heating/rho_risk(0.9)".
std::map<std::string, std::string> best_models(const std::vector<EvaluationReport> &reports);

/// Model rows with CV-RMSE and NMBE columns per target.
void write_point_table(std::ostream &out, const std::vector<EvaluationReport> &reports,
                       const std::vector<std::string> &targets);
/// Model rows with rho-risk columns per target; models without a quantile head are omitted.
void write_quantile_table(std::ostream &out, const std::vector<EvaluationReport> &reports,
                          const std::vector<std::string> &targets,
                          const std::vector<double> &rho_levels = kRhoRiskLevels);

struct PlotSeries {
	std::string name;
	const PointForecast *point = nullptr;
	const QuantileForecast *quantiles = nullptr;
};

/// Hourly rows of timestamp, actual, and every given forecast for hours in [first, last].
/// Returns the number of rows written.
std::size_t write_plot_data(std::ostream &out, const WindowedDataset &test, const std::vector<PlotSeries> &series,
                            Timestamp first, Timestamp last);

} // namespace energytwin
