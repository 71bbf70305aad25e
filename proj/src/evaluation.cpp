#include "energytwin/evaluation.hpp"

#include "energytwin/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace energytwin {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b) {
	if (a.size() != b.size()) {
		throw Error(Errc::LengthMismatch,
		            std::to_string(a.size()) + " forecasts for " + std::to_string(b.size()) + " actuals");
	}
	if (a.empty()) {
		throw Error(Errc::LengthMismatch, "metrics need at least one forecast");
	}
}

double mean_actual(std::span<const double> actuals) {
	const double mean = std::accumulate(actuals.begin(), actuals.end(), 0.0) / static_cast<double>(actuals.size());
	if (mean == 0.0) {
		throw Error(Errc::ZeroMeanTarget, "mean of the actual values is zero");
	}
	return mean;
}

std::string format(const char *fmt, double v) {
	char buf[64];
	std::snprintf(buf, sizeof buf, fmt, v);
	return buf;
}

std::string level_label(double p) {
	return format("%g", p);
}

} // namespace

double cv_rmse(std::span<const double> forecasts, std::span<const double> actuals) {
	check_lengths(forecasts, actuals);
	const double mean = mean_actual(actuals);
	double sse = 0.0;
	for (std::size_t t = 0; t < actuals.size(); ++t) {
		const double e = forecasts[t] - actuals[t];
		sse += e * e;
	}
	return std::sqrt(sse / static_cast<double>(actuals.size())) / mean * 100.0;
}

double nmbe(std::span<const double> forecasts, std::span<const double> actuals) {
	check_lengths(forecasts, actuals);
	const double mean = mean_actual(actuals);
	double bias = 0.0;
	for (std::size_t t = 0; t < actuals.size(); ++t) {
		bias += forecasts[t] - actuals[t];
	}
	return bias / static_cast<double>(actuals.size()) / mean * 100.0;
}

double rho_risk(std::span<const double> quantile_forecasts, std::span<const double> actuals, double p) {
	check_lengths(quantile_forecasts, actuals);
	if (!(p > 0.0 && p < 1.0)) {
		throw Error(Errc::InvalidQuantile, "quantile level " + std::to_string(p) + " outside (0,1)");
	}
	const double total = std::accumulate(actuals.begin(), actuals.end(), 0.0);
	if (!(total > 0.0)) {
		throw Error(Errc::NonPositiveTargetSum, "sum of the actual values must be positive");
	}
	double loss = 0.0;
	for (std::size_t t = 0; t < actuals.size(); ++t) {
		loss += quantile_loss(quantile_forecasts[t], actuals[t], p);
	}
	return 2.0 * loss / total;
}

bool ashrae_check(double cv_rmse_pct, double nmbe_pct) {
	return cv_rmse_pct <= kAshraeCvRmseLimit && std::abs(nmbe_pct) <= kAshraeNmbeLimit;
}

double interval_coverage(std::span<const double> lower, std::span<const double> upper,
                         std::span<const double> actuals) {
	check_lengths(lower, actuals);
	check_lengths(upper, actuals);
	std::size_t inside = 0;
	for (std::size_t t = 0; t < actuals.size(); ++t) {
		inside += lower[t] <= actuals[t] && actuals[t] <= upper[t];
	}
	return static_cast<double>(inside) / static_cast<double>(actuals.size());
}

std::vector<EvaluationReport> evaluate_suite(const std::vector<SuiteEntry> &models, const WindowedDataset &test,
                                             const std::string &target, const std::vector<double> &rho_levels) {
	std::vector<EvaluationReport> reports;
	const std::vector<double> &actuals = test.actuals();
	for (const SuiteEntry &entry : models) {
		EvaluationReport r;
		r.model = entry.name;
		r.target = target;
		r.horizon = test.size();
		if (entry.point) {
			const PointForecast f = entry.point->predict_point(test);
			r.cv_rmse_pct = cv_rmse(f.values, actuals);
			r.nmbe_pct = nmbe(f.values, actuals);
			r.ashrae_pass = ashrae_check(*r.cv_rmse_pct, *r.nmbe_pct);
		}
		if (entry.quantile) {
			const QuantileForecast f = entry.quantile->predict_quantiles(test);
			for (double p : rho_levels) {
				if (f.levels.index_of(p) < f.levels.size()) {
					r.rho_risk[p] = rho_risk(f.level(p), actuals, p);
				}
			}
		}
		reports.push_back(std::move(r));
	}
	return reports;
}

std::map<std::string, std::string> best_models(const std::vector<EvaluationReport> &reports) {
	std::map<std::string, std::pair<double, std::string>> best;
	auto offer = [&](const std::string &key, double score, const std::string &model) {
		auto it = best.find(key);
		if (it == best.end() || score < it->second.first) {
			best[key] = {score, model};
		}
	};
	for (const auto &r : reports) {
		if (r.cv_rmse_pct) {
			offer(r.target + "/cv_rmse", *r.cv_rmse_pct, r.model);
			offer(r.target + "/nmbe", std::abs(*r.nmbe_pct), r.model);
		}
		for (const auto &[p, v] : r.rho_risk) {
			offer(r.target + "/rho_risk(" + level_label(p) + ")", v, r.model);
		}
	}
	std::map<std::string, std::string> out;
	for (const auto &[k, v] : best) {
		out[k] = v.second;
	}
	return out;
}

namespace {

std::vector<std::string> model_order(const std::vector<EvaluationReport> &reports) {
	std::vector<std::string> names;
	for (const auto &r : reports) {
		if (std::find(names.begin(), names.end(), r.model) == names.end()) {
			names.push_back(r.model);
		}
	}
	return names;
}

const EvaluationReport *lookup(const std::vector<EvaluationReport> &reports, const std::string &model,
                               const std::string &target) {
	for (const auto &r : reports) {
		if (r.model == model && r.target == target) {
			return &r;
		}
	}
	return nullptr;
}

} // namespace

void write_point_table(std::ostream &out, const std::vector<EvaluationReport> &reports,
                       const std::vector<std::string> &targets) {
	out << "model";
	for (const auto &t : targets) {
		out << ',' << t << "_cv_rmse_pct," << t << "_nmbe_pct," << t << "_ashrae";
	}
	out << '\n';
	for (const auto &m : model_order(reports)) {
		bool any = false;
		std::string row = m;
		for (const auto &t : targets) {
			const EvaluationReport *r = lookup(reports, m, t);
			if (r && r->cv_rmse_pct) {
				any = true;
				row += "," + format("%.4f", *r->cv_rmse_pct) + "," + format("%.4f", *r->nmbe_pct) + "," +
				       (*r->ashrae_pass ? "pass" : "fail");
			} else {
				row += ",-,-,-";
			}
		}
		if (any) {
			out << row << '\n';
		}
	}
}

void write_quantile_table(std::ostream &out, const std::vector<EvaluationReport> &reports,
                          const std::vector<std::string> &targets, const std::vector<double> &rho_levels) {
	out << "model";
	for (const auto &t : targets) {
		for (double p : rho_levels) {
			out << ',' << t << "_rho_risk_" << level_label(p);
		}
	}
	out << '\n';
	for (const auto &m : model_order(reports)) {
		bool any = false;
		std::string row = m;
		for (const auto &t : targets) {
			const EvaluationReport *r = lookup(reports, m, t);
			for (double p : rho_levels) {
				if (r && r->rho_risk.count(p)) {
					any = true;
					row += "," + format("%.6f", r->rho_risk.at(p));
				} else {
					row += ",-";
				}
			}
		}
		if (any) {
			out << row << '\n';
		}
	}
}

std::size_t write_plot_data(std::ostream &out, const WindowedDataset &test, const std::vector<PlotSeries> &series,
                            Timestamp first, Timestamp last) {
	out << "timestamp,actual";
	for (const auto &s : series) {
		if (s.point) {
			out << ',' << s.name << "_point";
		}
		if (s.quantiles) {
			for (double p : s.quantiles->levels) {
				out << ',' << s.name << "_p" << format("%g", p * 100.0);
			}
		}
	}
	out << '\n';
	std::size_t rows = 0;
	for (std::size_t i = 0; i < test.size(); ++i) {
		const Timestamp ts = test.label_times[i];
		if (ts < first || last < ts) {
			continue;
		}
		out << ts.to_string() << ',' << format("%.6f", test.actuals()[i]);
		for (const auto &s : series) {
			if (s.point) {
				out << ',' << format("%.6f", s.point->values.at(i));
			}
			if (s.quantiles) {
				for (std::size_t j = 0; j < s.quantiles->levels.size(); ++j) {
					out << ',' << format("%.6f", s.quantiles->at(i, j));
				}
			}
		}
		out << '\n';
		++rows;
	}
	return rows;
}

} // namespace energytwin
