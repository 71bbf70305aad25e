#pragma once

#include "energytwin/features.hpp"
#include "energytwin/losses.hpp"
#include "energytwin/networks.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace energytwin {

struct TrainConfig {
	std::size_t batch_size = 64;
	std::size_t max_epochs = 20;
	double learning_rate = 1e-3;
	std::size_t early_stop_patience = 3;
	std::uint64_t seed = 42;
	double beta1 = 0.9;
	double beta2 = 0.999;
	double epsilon = 1e-8;

	void validate() const;
};

struct EpochRecord {
	std::size_t epoch = 0;
	double train_loss = 0.0; ///< mean per-sample loss over the epoch's mini-batches
	double val_loss = 0.0;   ///< mean per-sample loss on the validation set, dropout off
};

enum class StopReason { MaxEpochs, EarlyStop };

struct TrainReport {
	double initial_train_loss = 0.0; ///< epoch 0, before any update
	double initial_val_loss = 0.0;
	std::vector<EpochRecord> epochs;
	std::size_t best_epoch = 0; ///< 0 when no epoch improved on the initial parameters
	StopReason stop_reason = StopReason::MaxEpochs;

	double best_val_loss() const;
};

std::string_view to_string(StopReason reason);
/// `epoch,train_loss,val_loss` table with a trailing summary comment.
void write_train_report(std::ostream &out, const TrainReport &report);

/// Tracks the best validation loss and signals a stop after `patience` epochs without strict improvement.
class EarlyStopping {
public:
	explicit EarlyStopping(std::size_t patience, double initial = std::numeric_limits<double>::infinity())
	    : patience_(patience), best_(initial) {
	}

	/// Returns true when training should stop after this epoch.
	bool update(std::size_t epoch, double val_loss);
	bool improved() const {
		return improved_;
	}
	std::size_t best_epoch() const {
		return best_epoch_;
	}
	double best() const {
		return best_;
	}

private:
	std::size_t patience_;
	double best_;
	std::size_t best_epoch_ = 0;
	std::size_t bad_epochs_ = 0;
	bool improved_ = false;
};

/// Adaptive moment estimation over a flat parameter vector.
class AdamOptimizer {
public:
	AdamOptimizer(std::size_t parameter_count, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
	              double epsilon = 1e-8);

	void step(std::span<double> params, std::span<const double> grad);

private:
	double lr_, beta1_, beta2_, eps_;
	std::vector<double> m_, v_;
	std::size_t t_ = 0;
};

/// Mean per-sample loss of `net` on `ds`, dropout off.
double mean_loss(const nn::Network &net, const WindowedDataset &ds, const LossSpec &loss);

/// Seeded mini-batch Adam with early stopping on the validation loss. On return `net`
/// holds the parameters of the best validation epoch. Throws DivergedLoss on a
/// non-finite loss or one exceeding 1e6 times the initial loss (plus one).
TrainReport train_network(nn::Network &net, const WindowedDataset &train_set, const WindowedDataset &val_set,
                          const LossSpec &loss, const TrainConfig &cfg);

struct GradientCheckReport {
	double max_relative_deviation = 0.0;
	std::size_t checked = 0;
	std::size_t skipped_at_kinks = 0; ///< parameters whose +-step flipped a ReLU unit

	bool passed(double tolerance) const {
		return max_relative_deviation <= tolerance;
	}
};

/// Central finite differences of the total loss on (batch, labels) against backward().
/// Per-parameter deviation is |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
GradientCheckReport gradient_check(nn::Network &net, const LossSpec &loss, const nn::SequenceBatch &batch,
                                   std::span<const double> labels, double step = 1e-5);

} // namespace energytwin
