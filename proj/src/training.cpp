#include "energytwin/training.hpp"

#include "energytwin/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace energytwin {

void TrainConfig::validate() const {
	if (batch_size == 0 || max_epochs == 0 || !(learning_rate > 0.0) || early_stop_patience == 0) {
		throw Error(Errc::InvalidConfig, "batch_size, max_epochs, learning_rate and early_stop_patience must be positive");
	}
	if (early_stop_patience >= max_epochs) {
		throw Error(Errc::InvalidConfig, "early_stop_patience must be smaller than max_epochs");
	}
	if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
		throw Error(Errc::InvalidConfig, "invalid optimizer moments");
	}
}

double TrainReport::best_val_loss() const {
	if (best_epoch == 0) {
		return initial_val_loss;
	}
	return epochs.at(best_epoch - 1).val_loss;
}

std::string_view to_string(StopReason reason) {
	return reason == StopReason::EarlyStop ? "early_stop" : "max_epochs";
}

void write_train_report(std::ostream &out, const TrainReport &report) {
	char buf[128];
	out << "epoch,train_loss,val_loss\n";
	std::snprintf(buf, sizeof buf, "0,%.10g,%.10g\n", report.initial_train_loss, report.initial_val_loss);
	out << buf;
	for (const auto &e : report.epochs) {
		std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g\n", e.epoch, e.train_loss, e.val_loss);
		out << buf;
	}
	out << "# best_epoch=" << report.best_epoch << " stop=" << to_string(report.stop_reason) << '\n';
}

bool EarlyStopping::update(std::size_t epoch, double val_loss) {
	improved_ = val_loss < best_;
	if (improved_) {
		best_ = val_loss;
		best_epoch_ = epoch;
		bad_epochs_ = 0;
	} else {
		++bad_epochs_;
	}
	return bad_epochs_ >= patience_;
}

AdamOptimizer::AdamOptimizer(std::size_t parameter_count, double learning_rate, double beta1, double beta2,
                             double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon), m_(parameter_count, 0.0),
      v_(parameter_count, 0.0) {
}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grad) {
	++t_;
	const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
	const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
	for (std::size_t i = 0; i < params.size(); ++i) {
		m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
		v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
		params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
	}
}

double mean_loss(const nn::Network &net, const WindowedDataset &ds, const LossSpec &loss) {
	if (ds.size() == 0) {
		return 0.0;
	}
	constexpr std::size_t chunk = 1024;
	double total = 0.0;
	std::vector<std::size_t> idx;
	for (std::size_t first = 0; first < ds.size(); first += chunk) {
		const std::size_t last = std::min(ds.size(), first + chunk);
		idx.resize(last - first);
		std::iota(idx.begin(), idx.end(), first);
		const nn::Matrix out = net.predict(nn::SequenceBatch::gather(ds, idx));
		total += loss.evaluate({out.data(), static_cast<std::size_t>(out.size())},
		                       {ds.labels.data() + first, last - first});
	}
	return total / static_cast<double>(ds.size());
}

namespace {

void check_finite(double loss, double limit, std::size_t epoch) {
	if (!std::isfinite(loss) || loss > limit) {
		throw Error(Errc::DivergedLoss, "training loss diverged (" + std::to_string(loss) + ") in epoch " +
		                                    std::to_string(epoch));
	}
}

} // namespace

TrainReport train_network(nn::Network &net, const WindowedDataset &train_set, const WindowedDataset &val_set,
                          const LossSpec &loss, const TrainConfig &cfg) {
	cfg.validate();
	if (train_set.size() == 0) {
		throw Error(Errc::TooShort, "training set is empty");
	}
	if (net.shape().lookback != train_set.lookback || net.shape().step_width != train_set.step_width() ||
	    net.shape().outputs != loss.output_size()) {
		throw Error(Errc::ShapeMismatch, "network shape does not match the training data or loss");
	}
	const WindowedDataset &monitor = val_set.size() > 0 ? val_set : train_set;

	TrainReport report;
	report.initial_train_loss = mean_loss(net, train_set, loss);
	report.initial_val_loss = mean_loss(net, monitor, loss);
	const double limit = 1e6 * (report.initial_train_loss + 1.0);
	check_finite(report.initial_train_loss, limit, 0);

	nn::Rng order_rng(cfg.seed);
	nn::Rng dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
	AdamOptimizer adam(net.parameter_count(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
	EarlyStopping stopper(cfg.early_stop_patience, report.initial_val_loss);
	std::vector<double> best(net.parameters().begin(), net.parameters().end());
	std::vector<double> grad(net.parameter_count());
	std::vector<std::size_t> order(train_set.size());
	std::iota(order.begin(), order.end(), std::size_t{0});
	auto ws = net.make_workspace();

	for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
		std::shuffle(order.begin(), order.end(), order_rng);
		double epoch_total = 0.0;
		for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
			const std::size_t last = std::min(order.size(), first + cfg.batch_size);
			const std::span<const std::size_t> idx(order.data() + first, last - first);
			const nn::SequenceBatch batch = nn::SequenceBatch::gather(train_set, idx);
			std::vector<double> labels(idx.size());
			for (std::size_t i = 0; i < idx.size(); ++i) {
				labels[i] = train_set.labels[idx[i]];
			}
			const nn::Matrix out = net.forward(batch, *ws, &dropout_rng);
			nn::Matrix d_out(out.rows(), out.cols());
			const double batch_loss = loss.evaluate({out.data(), static_cast<std::size_t>(out.size())}, labels,
			                                        {d_out.data(), static_cast<std::size_t>(d_out.size())});
			check_finite(batch_loss / static_cast<double>(idx.size()), limit, epoch);
			epoch_total += batch_loss;
			d_out /= static_cast<double>(idx.size());
			std::fill(grad.begin(), grad.end(), 0.0);
			net.backward(*ws, d_out, grad);
			adam.step(net.parameters(), grad);
		}
		EpochRecord rec{epoch, epoch_total / static_cast<double>(order.size()), mean_loss(net, monitor, loss)};
		check_finite(rec.val_loss, limit, epoch);
		report.epochs.push_back(rec);
		const bool stop = stopper.update(epoch, rec.val_loss);
		if (stopper.improved()) {
			std::copy(net.parameters().begin(), net.parameters().end(), best.begin());
			report.best_epoch = epoch;
		}
		if (stop) {
			report.stop_reason = StopReason::EarlyStop;
			break;
		}
	}
	std::copy(best.begin(), best.end(), net.parameters().begin());
	return report;
}

GradientCheckReport gradient_check(nn::Network &net, const LossSpec &loss, const nn::SequenceBatch &batch,
                                   std::span<const double> labels, double step) {
	GradientCheckReport report;
	if (batch.batch() == 0 || labels.empty()) {
		return report;
	}
	if (net.parameter_count() > 10000) {
		throw Error(Errc::InvalidConfig, "gradient check is limited to 10^4 parameters");
	}
	auto ws = net.make_workspace();
	const nn::Matrix out = net.forward(batch, *ws, nullptr);
	nn::Matrix d_out(out.rows(), out.cols());
	loss.evaluate({out.data(), static_cast<std::size_t>(out.size())}, labels,
	              {d_out.data(), static_cast<std::size_t>(d_out.size())});
	const std::uint64_t base_signature = ws->relu_signature;
	std::vector<double> analytic(net.parameter_count(), 0.0);
	net.backward(*ws, d_out, analytic);

	auto total_at = [&](std::uint64_t &signature) {
		const nn::Matrix o = net.forward(batch, *ws, nullptr);
		signature = ws->relu_signature;
		return loss.evaluate({o.data(), static_cast<std::size_t>(o.size())}, labels);
	};
	auto params = net.parameters();
	for (std::size_t i = 0; i < params.size(); ++i) {
		const double saved = params[i];
		std::uint64_t sig_plus = 0, sig_minus = 0;
		params[i] = saved + step;
		const double plus = total_at(sig_plus);
		params[i] = saved - step;
		const double minus = total_at(sig_minus);
		params[i] = saved;
		if (sig_plus != base_signature || sig_minus != base_signature) {
			++report.skipped_at_kinks;
			continue;
		}
		const double numeric = (plus - minus) / (2.0 * step);
		const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
		report.max_relative_deviation = std::max(report.max_relative_deviation, std::abs(analytic[i] - numeric) / denom);
		++report.checked;
	}
	return report;
}

} // namespace energytwin
