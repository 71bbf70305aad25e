#pragma once

#include "energytwin/features.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace energytwin::nn {

using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// One (k+1) x batch matrix per lookback step, oldest first; column b is sample b.
struct SequenceBatch {
	std::vector<Matrix> steps;

	std::size_t batch() const {
		return steps.empty() ? 0 : static_cast<std::size_t>(steps.front().cols());
	}
	static SequenceBatch gather(const WindowedDataset &ds, std::span<const std::size_t> indices);
	static SequenceBatch all(const WindowedDataset &ds);
};

struct Shape {
	std::size_t lookback = 0;
	std::size_t step_width = 0; ///< k + 1
	std::size_t outputs = 1;
};

/// Per-forward activation cache; each network keeps its own concrete layout.
struct Workspace {
	virtual ~Workspace() = default;
	std::uint64_t relu_signature = 0; ///< hash of ReLU on/off pattern of the last forward
};

using Hyperparameters = std::vector<std::pair<std::string, double>>;

/// Differentiable forecaster body + affine head over a flat parameter vector.
class Network {
public:
	virtual ~Network() = default;

	virtual std::string kind() const = 0;
	virtual Hyperparameters hyperparameters() const = 0;
	virtual std::unique_ptr<Network> clone() const = 0;
	virtual std::unique_ptr<Workspace> make_workspace() const = 0;

	/// Outputs (outputs x batch). Dropout is applied only when `dropout_rng` is given.
	virtual Matrix forward(const SequenceBatch &x, Workspace &ws, Rng *dropout_rng) const = 0;
	/// Adds d(loss)/d(params) for the forward recorded in `ws` into `grad`.
	virtual void backward(const Workspace &ws, const Matrix &d_output, std::span<double> grad) const = 0;

	Matrix predict(const SequenceBatch &x) const;

	const Shape &shape() const {
		return shape_;
	}
	std::size_t parameter_count() const {
		return params_.size();
	}
	std::span<double> parameters() {
		return params_;
	}
	std::span<const double> parameters() const {
		return params_;
	}
	/// Head bias, one entry per output.
	std::span<double> head_bias() {
		return {params_.data() + head_bias_offset_, shape_.outputs};
	}

	/// Uniform in +-1/sqrt(fan_in) per tensor.
	void initialize(std::uint64_t seed);

protected:
	struct Tensor {
		std::size_t offset, rows, cols, fan_in;
	};

	explicit Network(Shape shape) : shape_(shape) {
	}
	Tensor allocate(std::size_t rows, std::size_t cols, std::size_t fan_in);
	void finish_layout(const Tensor &head_bias);
	void check_input(const SequenceBatch &x) const;

	Eigen::Map<const Matrix> view(const Tensor &t) const {
		return {params_.data() + t.offset, static_cast<Eigen::Index>(t.rows), static_cast<Eigen::Index>(t.cols)};
	}
	static Eigen::Map<Matrix> view(std::span<double> flat, const Tensor &t) {
		return {flat.data() + t.offset, static_cast<Eigen::Index>(t.rows), static_cast<Eigen::Index>(t.cols)};
	}

	Shape shape_;
	std::vector<double> params_;
	std::vector<Tensor> tensors_;
	std::size_t head_bias_offset_ = 0;
};

/// Affine map of the flattened window: the linear-regression body.
class LinearNetwork final : public Network {
public:
	explicit LinearNetwork(Shape shape);

	std::string kind() const override {
		return "linear";
	}
	Hyperparameters hyperparameters() const override {
		return {};
	}
	std::unique_ptr<Network> clone() const override {
		return std::make_unique<LinearNetwork>(*this);
	}
	std::unique_ptr<Workspace> make_workspace() const override;
	Matrix forward(const SequenceBatch &x, Workspace &ws, Rng *dropout_rng) const override;
	void backward(const Workspace &ws, const Matrix &d_output, std::span<double> grad) const override;

	/// Column-major outputs x (lookback * step_width) weights, then `outputs` biases.
	std::size_t weight_offset() const {
		return weights_.offset;
	}
	static Matrix flatten(const SequenceBatch &x);

private:
	Tensor weights_, bias_;
};

struct RecurrentHyper {
	std::size_t hidden_size = 64;
	std::size_t layers = 1;
	double dropout = 0.1;
};

/// Stacked gated recurrent cells (input/forget/output gates with a cell state);
/// the last step's top hidden state feeds the affine head.
class RecurrentNetwork final : public Network {
public:
	RecurrentNetwork(Shape shape, RecurrentHyper hyper);

	std::string kind() const override {
		return "rnn";
	}
	Hyperparameters hyperparameters() const override;
	std::unique_ptr<Network> clone() const override {
		return std::make_unique<RecurrentNetwork>(*this);
	}
	std::unique_ptr<Workspace> make_workspace() const override;
	Matrix forward(const SequenceBatch &x, Workspace &ws, Rng *dropout_rng) const override;
	void backward(const Workspace &ws, const Matrix &d_output, std::span<double> grad) const override;

	const RecurrentHyper &hyper() const {
		return hyper_;
	}

private:
	struct Layer {
		Tensor wx, wh, b;
		std::size_t input;
	};
	RecurrentHyper hyper_;
	std::vector<Layer> layers_;
	Tensor head_w_, head_b_;
};

struct ConvolutionalHyper {
	std::size_t channels = 32;
	std::size_t kernel_size = 2;
	std::size_t dilation_levels = 5;
	double dropout = 0.1;
};

/// 1 + sum over levels of (kernel - 1) * 2^level.
std::size_t receptive_field(const ConvolutionalHyper &hyper);

/// Residual blocks of causal dilated 1-D convolutions, dilation doubling per level.
class ConvolutionalNetwork final : public Network {
public:
	ConvolutionalNetwork(Shape shape, ConvolutionalHyper hyper);

	std::string kind() const override {
		return "cnn";
	}
	Hyperparameters hyperparameters() const override;
	std::unique_ptr<Network> clone() const override {
		return std::make_unique<ConvolutionalNetwork>(*this);
	}
	std::unique_ptr<Workspace> make_workspace() const override;
	Matrix forward(const SequenceBatch &x, Workspace &ws, Rng *dropout_rng) const override;
	void backward(const Workspace &ws, const Matrix &d_output, std::span<double> grad) const override;

	const ConvolutionalHyper &hyper() const {
		return hyper_;
	}

private:
	struct Block {
		std::vector<Tensor> taps; ///< one channels x input matrix per kernel tap
		Tensor bias;
		bool projected = false;
		Tensor proj_w, proj_b;
		std::size_t input, dilation;
	};
	ConvolutionalHyper hyper_;
	std::vector<Block> blocks_;
	Tensor head_w_, head_b_;
};

} // namespace energytwin::nn
