#include "energytwin/error.hpp"
#include "energytwin/forecast_models.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <sstream>

namespace energytwin {

namespace {

constexpr std::string_view kMagic = "ENERGYTWIN-CKPT 1";

void put_le(std::string &out, double v) {
	std::uint64_t bits = 0;
	std::memcpy(&bits, &v, sizeof bits);
	for (int b = 0; b < 8; ++b) {
		out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
	}
}

double get_le(const unsigned char *p) {
	std::uint64_t bits = 0;
	for (int b = 7; b >= 0; --b) {
		bits = (bits << 8) | p[b];
	}
	double v = 0.0;
	std::memcpy(&v, &bits, sizeof v);
	return v;
}

} // namespace

std::string encode_checkpoint(const ForecastModel &model, const std::string &target, const std::string &schema_hash) {
	const ModelState st = model.state();
	nlohmann::json header = {
	    {"name", model.name()},
	    {"mode", to_string(model.mode())},
	    {"target", target},
	    {"unit", st.unit},
	    {"hyperparameters", model.hyperparameters()},
	    {"seed", model.seed()},
	    {"schema_hash", schema_hash},
	    {"quantiles", model.quantiles().levels()},
	    {"lookback", st.lookback},
	    {"predictors", st.predictors},
	    {"target_range", {st.target_range.min, st.target_range.max}},
	    {"parameter_count", st.parameters.size()},
	};
	std::string out(kMagic);
	out += '\n';
	out += header.dump();
	out += '\n';
	out.reserve(out.size() + st.parameters.size() * 8);
	for (double v : st.parameters) {
		put_le(out, v);
	}
	return out;
}

void save_checkpoint(const std::string &path, const ForecastModel &model, const std::string &target,
                     const std::string &schema_hash) {
	const std::string bytes = encode_checkpoint(model, target, schema_hash);
	const auto parent = std::filesystem::path(path).parent_path();
	if (!parent.empty()) {
		std::error_code ec;
		std::filesystem::create_directories(parent, ec);
	}
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw Error(Errc::IoError, "cannot write checkpoint '" + path + "'", path);
	}
	out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

CheckpointHeader decode_checkpoint(const std::string &bytes) {
	const auto first = bytes.find('\n');
	if (first == std::string::npos || bytes.compare(0, first, kMagic) != 0) {
		throw Error(Errc::ParseError, "not an energytwin checkpoint");
	}
	const auto second = bytes.find('\n', first + 1);
	if (second == std::string::npos) {
		throw Error(Errc::ParseError, "checkpoint header is truncated");
	}
	CheckpointHeader ck;
	try {
		const auto h = nlohmann::json::parse(bytes.substr(first + 1, second - first - 1));
		ck.name = h.at("name").get<std::string>();
		const auto mode = h.at("mode").get<std::string>();
		if (mode != "point" && mode != "quantile") {
			throw Error(Errc::ParseError, "unknown checkpoint mode '" + mode + "'");
		}
		ck.mode = mode == "point" ? ForecastMode::Point : ForecastMode::Quantile;
		ck.target = h.at("target").get<std::string>();
		ck.hyperparameters = h.at("hyperparameters").get<HyperMap>();
		ck.seed = h.at("seed").get<std::uint64_t>();
		ck.schema_hash = h.at("schema_hash").get<std::string>();
		ck.quantiles = QuantileSet(h.at("quantiles").get<std::vector<double>>());
		ck.state.lookback = h.at("lookback").get<std::size_t>();
		ck.state.predictors = h.at("predictors").get<std::size_t>();
		const auto range = h.at("target_range").get<std::vector<double>>();
		if (range.size() != 2) {
			throw Error(Errc::ParseError, "target_range needs two values");
		}
		ck.state.target_range = {range[0], range[1]};
		ck.state.unit = h.at("unit").get<std::string>();
		const auto count = h.at("parameter_count").get<std::size_t>();
		const std::size_t body = bytes.size() - second - 1;
		if (body != count * 8) {
			throw Error(Errc::ParseError, "checkpoint declares " + std::to_string(count) + " parameters but carries " +
			                                  std::to_string(body) + " bytes");
		}
		const auto *p = reinterpret_cast<const unsigned char *>(bytes.data() + second + 1);
		ck.state.parameters.resize(count);
		for (std::size_t i = 0; i < count; ++i) {
			ck.state.parameters[i] = get_le(p + 8 * i);
		}
	} catch (const nlohmann::json::exception &e) {
		throw Error(Errc::ParseError, std::string("malformed checkpoint header: ") + e.what());
	}
	return ck;
}

CheckpointHeader read_checkpoint(const std::string &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw Error(Errc::IoError, "cannot open checkpoint '" + path + "'", path);
	}
	std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
	return decode_checkpoint(bytes);
}

std::unique_ptr<ForecastModel> load_model(const CheckpointHeader &ckpt) {
	auto model = make_model(ckpt.name, ckpt.mode, ckpt.hyperparameters, ckpt.quantiles, ckpt.seed);
	model->restore(ckpt.state);
	return model;
}

} // namespace energytwin
