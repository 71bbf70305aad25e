#include "energytwin/networks.hpp"

#include "energytwin/error.hpp"

#include <cmath>

namespace energytwin::nn {

namespace {

Matrix sigmoid(const Matrix &z) {
	return (1.0 + (-z.array()).exp()).inverse().matrix();
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng &rng) {
	Matrix mask(rows, cols);
	std::uniform_real_distribution<double> u(0.0, 1.0);
	const double keep = 1.0 - rate;
	for (Eigen::Index j = 0; j < cols; ++j) {
		for (Eigen::Index i = 0; i < rows; ++i) {
			mask(i, j) = u(rng) < keep ? 1.0 / keep : 0.0;
		}
	}
	return mask;
}

void check_dropout(double rate) {
	if (!(rate >= 0.0 && rate < 1.0)) {
		throw Error(Errc::InvalidHyperparameter, "dropout must lie in [0, 1)");
	}
}

std::uint64_t mix_relu(std::uint64_t h, const Matrix &pre) {
	const double *p = pre.data();
	for (Eigen::Index i = 0; i < pre.size(); ++i) {
		h ^= static_cast<std::uint64_t>(p[i] > 0.0) + static_cast<std::uint64_t>(i);
		h *= 1099511628211ull;
	}
	return h;
}

} // namespace

SequenceBatch SequenceBatch::gather(const WindowedDataset &ds, std::span<const std::size_t> indices) {
	const auto width = static_cast<Eigen::Index>(ds.step_width());
	const auto b = static_cast<Eigen::Index>(indices.size());
	SequenceBatch batch;
	batch.steps.assign(ds.lookback, Matrix(width, b));
	for (Eigen::Index col = 0; col < b; ++col) {
		const auto s = ds.sample(indices[static_cast<std::size_t>(col)]);
		for (std::size_t t = 0; t < ds.lookback; ++t) {
			for (Eigen::Index r = 0; r < width; ++r) {
				batch.steps[t](r, col) = s[t * ds.step_width() + static_cast<std::size_t>(r)];
			}
		}
	}
	return batch;
}

SequenceBatch SequenceBatch::all(const WindowedDataset &ds) {
	std::vector<std::size_t> idx(ds.size());
	for (std::size_t i = 0; i < idx.size(); ++i) {
		idx[i] = i;
	}
	return gather(ds, idx);
}

Network::Tensor Network::allocate(std::size_t rows, std::size_t cols, std::size_t fan_in) {
	Tensor t{params_.size(), rows, cols, fan_in};
	params_.resize(params_.size() + rows * cols, 0.0);
	tensors_.push_back(t);
	return t;
}

void Network::finish_layout(const Tensor &head_bias) {
	head_bias_offset_ = head_bias.offset;
}

void Network::initialize(std::uint64_t seed) {
	Rng rng(seed);
	for (const Tensor &t : tensors_) {
		const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(t.fan_in, 1)));
		std::uniform_real_distribution<double> u(-bound, bound);
		for (std::size_t i = 0; i < t.rows * t.cols; ++i) {
			params_[t.offset + i] = u(rng);
		}
	}
}

void Network::check_input(const SequenceBatch &x) const {
	if (x.steps.size() != shape_.lookback) {
		throw Error(Errc::ShapeMismatch, "expected " + std::to_string(shape_.lookback) + " steps, got " +
		                                     std::to_string(x.steps.size()));
	}
	for (const auto &s : x.steps) {
		if (static_cast<std::size_t>(s.rows()) != shape_.step_width || s.cols() != x.steps.front().cols()) {
			throw Error(Errc::ShapeMismatch, "expected step width " + std::to_string(shape_.step_width) + ", got " +
			                                     std::to_string(s.rows()));
		}
	}
}

Matrix Network::predict(const SequenceBatch &x) const {
	auto ws = make_workspace();
	return forward(x, *ws, nullptr);
}

// ---------------------------------------------------------------- linear

namespace {
struct LinearWorkspace : Workspace {
	Matrix input;
};
} // namespace

LinearNetwork::LinearNetwork(Shape shape) : Network(shape) {
	const std::size_t d = shape.lookback * shape.step_width;
	weights_ = allocate(shape.outputs, d, d);
	bias_ = allocate(shape.outputs, 1, d);
	finish_layout(bias_);
}

std::unique_ptr<Workspace> LinearNetwork::make_workspace() const {
	return std::make_unique<LinearWorkspace>();
}

Matrix LinearNetwork::flatten(const SequenceBatch &x) {
	const Eigen::Index width = x.steps.empty() ? 0 : x.steps.front().rows();
	Matrix out(width * static_cast<Eigen::Index>(x.steps.size()), static_cast<Eigen::Index>(x.batch()));
	for (std::size_t t = 0; t < x.steps.size(); ++t) {
		out.middleRows(static_cast<Eigen::Index>(t) * width, width) = x.steps[t];
	}
	return out;
}

Matrix LinearNetwork::forward(const SequenceBatch &x, Workspace &ws, Rng *) const {
	check_input(x);
	auto &cache = static_cast<LinearWorkspace &>(ws);
	cache.input = flatten(x);
	Matrix out = view(weights_) * cache.input;
	out.colwise() += view(bias_).col(0);
	return out;
}

void LinearNetwork::backward(const Workspace &ws, const Matrix &d_output, std::span<double> grad) const {
	const auto &cache = static_cast<const LinearWorkspace &>(ws);
	view(grad, weights_).noalias() += d_output * cache.input.transpose();
	view(grad, bias_) += d_output.rowwise().sum();
}

// ---------------------------------------------------------------- recurrent

namespace {
struct LayerCache {
	std::vector<Matrix> x, i, f, g, o, c, tc, h, mask;
};
struct RecurrentWorkspace : Workspace {
	std::vector<LayerCache> layers;
	Matrix head_in, head_mask;
	bool dropout = false;
};
} // namespace

RecurrentNetwork::RecurrentNetwork(Shape shape, RecurrentHyper hyper) : Network(shape), hyper_(hyper) {
	if (hyper.hidden_size == 0 || hyper.layers == 0 || shape.lookback == 0 || shape.step_width == 0 ||
	    shape.outputs == 0) {
		throw Error(Errc::InvalidHyperparameter, "recurrent network sizes must be positive");
	}
	check_dropout(hyper.dropout);
	const std::size_t h = hyper.hidden_size;
	for (std::size_t l = 0; l < hyper.layers; ++l) {
		const std::size_t in = l == 0 ? shape.step_width : h;
		Layer layer;
		layer.input = in;
		layer.wx = allocate(4 * h, in, in + h);
		layer.wh = allocate(4 * h, h, in + h);
		layer.b = allocate(4 * h, 1, in + h);
		layers_.push_back(layer);
	}
	head_w_ = allocate(shape.outputs, h, h);
	head_b_ = allocate(shape.outputs, 1, h);
	finish_layout(head_b_);
}

Hyperparameters RecurrentNetwork::hyperparameters() const {
	return {{"hidden_size", static_cast<double>(hyper_.hidden_size)},
	        {"layers", static_cast<double>(hyper_.layers)},
	        {"dropout", hyper_.dropout}};
}

std::unique_ptr<Workspace> RecurrentNetwork::make_workspace() const {
	return std::make_unique<RecurrentWorkspace>();
}

Matrix RecurrentNetwork::forward(const SequenceBatch &x, Workspace &ws, Rng *rng) const {
	check_input(x);
	auto &cache = static_cast<RecurrentWorkspace &>(ws);
	const auto H = static_cast<Eigen::Index>(hyper_.hidden_size);
	const auto B = static_cast<Eigen::Index>(x.batch());
	const std::size_t T = shape_.lookback;
	cache.dropout = rng != nullptr && hyper_.dropout > 0.0;
	cache.layers.assign(layers_.size(), {});

	std::vector<Matrix> input = x.steps;
	for (std::size_t l = 0; l < layers_.size(); ++l) {
		const Layer &layer = layers_[l];
		LayerCache &lc = cache.layers[l];
		const auto wx = view(layer.wx);
		const auto wh = view(layer.wh);
		const auto b = view(layer.b).col(0);
		Matrix h = Matrix::Zero(H, B);
		Matrix c = Matrix::Zero(H, B);
		lc.x = std::move(input);
		for (auto *v : {&lc.i, &lc.f, &lc.g, &lc.o, &lc.c, &lc.tc, &lc.h}) {
			v->resize(T);
		}
		for (std::size_t t = 0; t < T; ++t) {
			Matrix z = wx * lc.x[t];
			z.noalias() += wh * h;
			z.colwise() += b;
			lc.i[t] = sigmoid(z.topRows(H));
			lc.f[t] = sigmoid(z.middleRows(H, H));
			lc.g[t] = z.middleRows(2 * H, H).array().tanh().matrix();
			lc.o[t] = sigmoid(z.bottomRows(H));
			c = (lc.f[t].array() * c.array() + lc.i[t].array() * lc.g[t].array()).matrix();
			lc.c[t] = c;
			lc.tc[t] = c.array().tanh().matrix();
			h = (lc.o[t].array() * lc.tc[t].array()).matrix();
			lc.h[t] = h;
		}
		if (l + 1 < layers_.size()) {
			input.resize(T);
			lc.mask.clear();
			for (std::size_t t = 0; t < T; ++t) {
				if (cache.dropout) {
					lc.mask.push_back(dropout_mask(H, B, hyper_.dropout, *rng));
					input[t] = (lc.h[t].array() * lc.mask.back().array()).matrix();
				} else {
					input[t] = lc.h[t];
				}
			}
		}
	}
	const Matrix &top = cache.layers.back().h.back();
	if (cache.dropout) {
		cache.head_mask = dropout_mask(H, B, hyper_.dropout, *rng);
		cache.head_in = (top.array() * cache.head_mask.array()).matrix();
	} else {
		cache.head_in = top;
	}
	Matrix out = view(head_w_) * cache.head_in;
	out.colwise() += view(head_b_).col(0);
	return out;
}

void RecurrentNetwork::backward(const Workspace &ws, const Matrix &d_output, std::span<double> grad) const {
	const auto &cache = static_cast<const RecurrentWorkspace &>(ws);
	const auto H = static_cast<Eigen::Index>(hyper_.hidden_size);
	const auto B = d_output.cols();
	const std::size_t T = shape_.lookback;

	view(grad, head_w_).noalias() += d_output * cache.head_in.transpose();
	view(grad, head_b_) += d_output.rowwise().sum();
	Matrix d_top = view(head_w_).transpose() * d_output;
	if (cache.dropout) {
		d_top = (d_top.array() * cache.head_mask.array()).matrix();
	}

	// gradient arriving at each step's hidden output from above
	std::vector<Matrix> d_above(T);
	d_above[T - 1] = std::move(d_top);
	const Matrix zeros = Matrix::Zero(H, B);

	for (std::size_t l = layers_.size(); l-- > 0;) {
		const Layer &layer = layers_[l];
		const LayerCache &lc = cache.layers[l];
		const auto wx = view(layer.wx);
		const auto wh = view(layer.wh);
		auto gwx = view(grad, layer.wx);
		auto gwh = view(grad, layer.wh);
		auto gb = view(grad, layer.b);

		Matrix dh_rec = zeros;
		Matrix dc_rec = zeros;
		Matrix dz(4 * H, B);
		std::vector<Matrix> d_below(l > 0 ? T : 0);
		for (std::size_t t = T; t-- > 0;) {
			Matrix dh = dh_rec;
			if (d_above[t].size() != 0) {
				dh += d_above[t];
			}
			const auto &i = lc.i[t].array();
			const auto &f = lc.f[t].array();
			const auto &g = lc.g[t].array();
			const auto &o = lc.o[t].array();
			const auto &tc = lc.tc[t].array();
			const Matrix &c_prev = t > 0 ? lc.c[t - 1] : zeros;
			const Matrix &h_prev = t > 0 ? lc.h[t - 1] : zeros;

			const Eigen::ArrayXXd dc = dc_rec.array() + dh.array() * o * (1.0 - tc.square());
			dz.topRows(H) = (dc * g * i * (1.0 - i)).matrix();
			dz.middleRows(H, H) = (dc * c_prev.array() * f * (1.0 - f)).matrix();
			dz.middleRows(2 * H, H) = (dc * i * (1.0 - g.square())).matrix();
			dz.bottomRows(H) = (dh.array() * tc * o * (1.0 - o)).matrix();
			dc_rec = (dc * f).matrix();

			gwx.noalias() += dz * lc.x[t].transpose();
			if (t > 0) {
				gwh.noalias() += dz * h_prev.transpose();
			}
			gb += dz.rowwise().sum();
			dh_rec.noalias() = wh.transpose() * dz;
			if (l > 0) {
				d_below[t].noalias() = wx.transpose() * dz;
			}
		}
		if (l > 0) {
			const LayerCache &below = cache.layers[l - 1];
			for (std::size_t t = 0; t < T; ++t) {
				if (cache.dropout) {
					d_below[t] = (d_below[t].array() * below.mask[t].array()).matrix();
				}
			}
			d_above = std::move(d_below);
		}
	}
}

// ---------------------------------------------------------------- convolutional

std::size_t receptive_field(const ConvolutionalHyper &hyper) {
	std::size_t rf = 1;
	for (std::size_t l = 0; l < hyper.dilation_levels; ++l) {
		rf += (hyper.kernel_size - 1) * (std::size_t{1} << l);
	}
	return rf;
}

namespace {
struct BlockCache {
	std::vector<Matrix> x, pre, mask, y;
};
struct ConvWorkspace : Workspace {
	std::vector<BlockCache> blocks;
	bool dropout = false;
};
} // namespace

ConvolutionalNetwork::ConvolutionalNetwork(Shape shape, ConvolutionalHyper hyper) : Network(shape), hyper_(hyper) {
	if (hyper.channels == 0 || hyper.kernel_size == 0 || hyper.dilation_levels == 0 || shape.lookback == 0 ||
	    shape.step_width == 0 || shape.outputs == 0) {
		throw Error(Errc::InvalidHyperparameter, "convolutional network sizes must be positive");
	}
	if (hyper.dilation_levels > 16) {
		throw Error(Errc::InvalidHyperparameter, "at most 16 dilation levels are supported");
	}
	check_dropout(hyper.dropout);
	if (receptive_field(hyper) < shape.lookback) {
		throw Error(Errc::InvalidHyperparameter, "receptive field " + std::to_string(receptive_field(hyper)) +
		                                             " is shorter than the lookback " +
		                                             std::to_string(shape.lookback));
	}
	const std::size_t C = hyper.channels;
	for (std::size_t l = 0; l < hyper.dilation_levels; ++l) {
		Block block;
		block.input = l == 0 ? shape.step_width : C;
		block.dilation = std::size_t{1} << l;
		const std::size_t fan_in = block.input * hyper.kernel_size;
		for (std::size_t j = 0; j < hyper.kernel_size; ++j) {
			block.taps.push_back(allocate(C, block.input, fan_in));
		}
		block.bias = allocate(C, 1, fan_in);
		block.projected = block.input != C;
		if (block.projected) {
			block.proj_w = allocate(C, block.input, block.input);
			block.proj_b = allocate(C, 1, block.input);
		}
		blocks_.push_back(block);
	}
	head_w_ = allocate(shape.outputs, C, C);
	head_b_ = allocate(shape.outputs, 1, C);
	finish_layout(head_b_);
}

Hyperparameters ConvolutionalNetwork::hyperparameters() const {
	return {{"channels", static_cast<double>(hyper_.channels)},
	        {"kernel_size", static_cast<double>(hyper_.kernel_size)},
	        {"dilation_levels", static_cast<double>(hyper_.dilation_levels)},
	        {"dropout", hyper_.dropout}};
}

std::unique_ptr<Workspace> ConvolutionalNetwork::make_workspace() const {
	return std::make_unique<ConvWorkspace>();
}

Matrix ConvolutionalNetwork::forward(const SequenceBatch &x, Workspace &ws, Rng *rng) const {
	check_input(x);
	auto &cache = static_cast<ConvWorkspace &>(ws);
	const auto C = static_cast<Eigen::Index>(hyper_.channels);
	const auto B = static_cast<Eigen::Index>(x.batch());
	const std::size_t T = shape_.lookback;
	cache.dropout = rng != nullptr && hyper_.dropout > 0.0;
	cache.blocks.assign(blocks_.size(), {});
	std::uint64_t signature = 1469598103934665603ull;

	std::vector<Matrix> input = x.steps;
	for (std::size_t l = 0; l < blocks_.size(); ++l) {
		const Block &block = blocks_[l];
		BlockCache &bc = cache.blocks[l];
		bc.x = std::move(input);
		bc.pre.resize(T);
		bc.y.resize(T);
		bc.mask.resize(cache.dropout ? T : 0);
		const auto bias = view(block.bias).col(0);
		for (std::size_t t = 0; t < T; ++t) {
			Matrix pre = Matrix::Zero(C, B);
			pre.colwise() += bias;
			for (std::size_t j = 0; j < block.taps.size(); ++j) {
				const std::size_t lag = j * block.dilation;
				if (lag > t) {
					break;
				}
				pre.noalias() += view(block.taps[j]) * bc.x[t - lag];
			}
			signature = mix_relu(signature, pre);
			Matrix act = pre.cwiseMax(0.0);
			if (cache.dropout) {
				bc.mask[t] = dropout_mask(C, B, hyper_.dropout, *rng);
				act = (act.array() * bc.mask[t].array()).matrix();
			}
			if (block.projected) {
				act.noalias() += view(block.proj_w) * bc.x[t];
				act.colwise() += view(block.proj_b).col(0);
			} else {
				act += bc.x[t];
			}
			bc.pre[t] = std::move(pre);
			bc.y[t] = std::move(act);
		}
		input = bc.y;
	}
	cache.relu_signature = signature;
	Matrix out = view(head_w_) * cache.blocks.back().y.back();
	out.colwise() += view(head_b_).col(0);
	return out;
}

void ConvolutionalNetwork::backward(const Workspace &ws, const Matrix &d_output, std::span<double> grad) const {
	const auto &cache = static_cast<const ConvWorkspace &>(ws);
	const std::size_t T = shape_.lookback;

	view(grad, head_w_).noalias() += d_output * cache.blocks.back().y.back().transpose();
	view(grad, head_b_) += d_output.rowwise().sum();

	std::vector<Matrix> dy(T);
	dy[T - 1] = view(head_w_).transpose() * d_output;

	for (std::size_t l = blocks_.size(); l-- > 0;) {
		const Block &block = blocks_[l];
		const BlockCache &bc = cache.blocks[l];
		std::vector<Matrix> dx(T);
		auto accumulate = [&](std::size_t s, const Matrix &g) {
			if (dx[s].size() == 0) {
				dx[s] = g;
			} else {
				dx[s] += g;
			}
		};
		for (std::size_t t = T; t-- > 0;) {
			if (dy[t].size() == 0) {
				continue;
			}
			Matrix dpre = dy[t];
			if (cache.dropout) {
				dpre = (dpre.array() * bc.mask[t].array()).matrix();
			}
			dpre = (dpre.array() * (bc.pre[t].array() > 0.0).cast<double>()).matrix();
			view(grad, block.bias) += dpre.rowwise().sum();
			for (std::size_t j = 0; j < block.taps.size(); ++j) {
				const std::size_t lag = j * block.dilation;
				if (lag > t) {
					break;
				}
				view(grad, block.taps[j]).noalias() += dpre * bc.x[t - lag].transpose();
				accumulate(t - lag, view(block.taps[j]).transpose() * dpre);
			}
			if (block.projected) {
				view(grad, block.proj_w).noalias() += dy[t] * bc.x[t].transpose();
				view(grad, block.proj_b) += dy[t].rowwise().sum();
				accumulate(t, view(block.proj_w).transpose() * dy[t]);
			} else {
				accumulate(t, dy[t]);
			}
		}
		dy = std::move(dx);
	}
}

} // namespace energytwin::nn
