#include "energytwin/error.hpp"
#include "energytwin/evaluation.hpp"
#include "energytwin/forecast_models.hpp"
#include "random_windows.hpp"
#include "synth_windows.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace energytwin;

namespace {

template <class F>
Errc code_of(F &&f) {
	try {
		f();
	} catch (const Error &e) {
		return e.code();
	}
	FAIL("expected an error");
	return Errc::InvalidConfig;
}

TrainConfig quick(std::size_t epochs = 2) {
	TrainConfig cfg;
	cfg.max_epochs = epochs;
	cfg.early_stop_patience = 1;
	cfg.learning_rate = 3e-3;
	return cfg;
}

WindowedDataset head(const WindowedDataset &ds, std::size_t n) {
	std::vector<std::size_t> idx(std::min(n, ds.size()));
	std::iota(idx.begin(), idx.end(), std::size_t{0});
	return ds.subset(idx);
}

double mse(const std::vector<double> &a, const std::vector<double> &b) {
	double s = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		s += (a[i] - b[i]) * (a[i] - b[i]);
	}
	return s / static_cast<double>(a.size());
}

} // namespace

TEST_CASE("seasonal-naive forecasts") {
	CHECK(sn_forecast(std::vector<double>{5, 7, 9}, 1) == 9);
	std::vector<double> h(48);
	for (std::size_t i = 0; i < h.size(); ++i) {
		h[i] = 100.0 + static_cast<double>(i);
	}
	// the forecast for hour 49 repeats hour 25
	CHECK(sn_forecast(h, 24) == h[24]);
	CHECK(code_of([] { (void)sn_forecast(std::vector<double>(10, 1.0), 24); }) == Errc::InsufficientHistory);
}

TEST_CASE("SN models wrap sn_forecast exactly and their error is the lag difference") {
	const auto data = fixtures::synth_windows("electricity");
	for (std::size_t lag : {1u, 24u}) {
		SeasonalNaiveModel m(lag);
		(void)m.fit(data.train, data.val, {});
		const PointForecast f = m.predict_point(data.test);
		CHECK(f.scale == ValueScale::Physical);
		CHECK(f.unit == "kWh");
		for (std::size_t i = 0; i < data.test.size(); ++i) {
			const auto hist = data.test.raw_target_history(i);
			CHECK(f.values[i] == sn_forecast(hist, lag));
			CHECK(f.values[i] - data.test.actuals()[i] == hist[hist.size() - lag] - data.test.raw_labels[i]);
		}
	}
	FeaturePipeline short_pipe({"electricity", kSynthWeatherColumns, 12}, data.pipeline.calendar());
	SeasonalNaiveModel sn24(24);
	auto short_ds = fixtures::random_windows(4, 12, 13, 1);
	CHECK(code_of([&] { (void)sn24.fit(short_ds, short_ds, {}); }) == Errc::InsufficientHistory);
}

TEST_CASE("linear regression recovers a realizable affine target") {
	auto ds = fixtures::random_windows(200, 3, 2, 5);
	std::mt19937_64 rng(6);
	std::normal_distribution<double> n(0.0, 1.0);
	std::vector<double> w(ds.sample_width());
	for (auto &v : w) {
		v = n(rng);
	}
	const double b = 0.7;
	for (std::size_t i = 0; i < ds.size(); ++i) {
		const auto s = ds.sample(i);
		ds.labels[i] = std::inner_product(s.begin(), s.end(), w.begin(), b);
		ds.raw_labels[i] = ds.labels[i];
	}
	LinearRegressionModel lr;
	(void)lr.fit(ds, ds, {});
	const PointForecast f = lr.predict_point(ds);
	double worst = 0.0;
	for (std::size_t i = 0; i < ds.size(); ++i) {
		worst = std::max(worst, std::abs(f.values[i] - ds.labels[i]));
	}
	CHECK(worst <= 1e-8);

	LinearRegressionModel exact(0.0);
	(void)exact.fit(ds, ds, {});
	CHECK(exact.predict_point(ds).values[0] == doctest::Approx(ds.labels[0]).epsilon(1e-10));
}

TEST_CASE("linear regression on a constant target predicts the constant") {
	auto ds = fixtures::random_windows(100, 4, 3, 7);
	const double c = 0.42;
	for (std::size_t i = 0; i < ds.size(); ++i) {
		ds.labels[i] = c;
		ds.raw_labels[i] = c;
	}
	LinearRegressionModel lr;
	(void)lr.fit(ds, ds, {});
	const auto other = fixtures::random_windows(20, 4, 3, 8);
	for (double v : lr.predict_point(other).values) {
		CHECK(v == doctest::Approx(c).epsilon(1e-6));
	}
}

TEST_CASE("exact least squares rejects a rank-deficient system") {
	auto ds = fixtures::random_windows(50, 2, 1, 9);
	for (std::size_t i = 0; i < ds.size(); ++i) {
		ds.inputs[i * ds.sample_width() + 1] = ds.inputs[i * ds.sample_width()]; // duplicated column
	}
	LinearRegressionModel lr(0.0);
	CHECK(code_of([&] { (void)lr.fit(ds, ds, {}); }) == Errc::SingularSystem);
}

TEST_CASE("quantile LR median tracks the LR point head and outputs are ordered") {
	const auto data = fixtures::synth_windows("heating");
	LinearRegressionModel lr;
	(void)lr.fit(data.train, data.val, {});
	QuantileLinearModel qlr({0.1, 0.5, 0.9}, 3);
	(void)qlr.fit(data.train, data.val, quick(3));
	const auto point = lr.predict_point(data.test);
	const auto q = qlr.predict_quantiles(data.test);
	CHECK(q.scale == ValueScale::Physical);
	const auto median = q.level(0.5);
	double mean_abs = 0.0;
	for (std::size_t i = 0; i < median.size(); ++i) {
		mean_abs += std::abs(median[i] - point.values[i]);
		CHECK(q.at(i, 0) <= q.at(i, 1));
		CHECK(q.at(i, 1) <= q.at(i, 2));
	}
	mean_abs /= static_cast<double>(median.size());
	// the synthetic heating noise has standard deviation 3 kWh
	CHECK(mean_abs < 1.0);
	CHECK(code_of([&] { (void)qlr.predict_point(data.test); }) == Errc::ShapeMismatch);
}

TEST_CASE("single-median quantile LR minimises half the absolute error") {
	const auto data = fixtures::synth_windows("heating");
	QuantileLinearModel med({0.5}, 1);
	(void)med.fit(data.train, data.val, quick(2));
	const auto f = med.predict_quantiles(data.test);
	double pinball = 0.0, abs_err = 0.0;
	for (std::size_t i = 0; i < f.size(); ++i) {
		pinball += quantile_loss(f.at(i, 0), data.test.actuals()[i], 0.5);
		abs_err += std::abs(f.at(i, 0) - data.test.actuals()[i]);
	}
	CHECK(pinball == doctest::Approx(0.5 * abs_err).epsilon(1e-12));
}

TEST_CASE("untrained quantile networks still emit ordered quantiles") {
	const auto ds = fixtures::random_windows(300, 24, 13, 10);
	NeuralModel rnn(nn::RecurrentHyper{8, 1, 0.0}, ForecastMode::Quantile, {0.1, 0.5, 0.9}, 11);
	TrainConfig cfg = quick(2);
	cfg.learning_rate = 1e-9;
	(void)rnn.fit(ds, ds, cfg);
	const auto q = rnn.predict_quantiles(ds);
	for (std::size_t i = 0; i < q.size(); ++i) {
		CHECK(q.at(i, 0) <= q.at(i, 1));
		CHECK(q.at(i, 1) <= q.at(i, 2));
	}
}

TEST_CASE("training the recurrent model beats its untrained self") {
	const auto data = fixtures::synth_windows("heating");
	const WindowedDataset train = head(data.train, 2000);
	NeuralModel rnn(nn::RecurrentHyper{8, 1, 0.1}, ForecastMode::Point, {}, 12);
	rnn.build(train.lookback, train.predictors);
	TrainConfig none = quick(2);
	none.learning_rate = 1e-12;
	NeuralModel untrained(nn::RecurrentHyper{8, 1, 0.1}, ForecastMode::Point, {}, 12);
	(void)untrained.fit(train, data.val, none);
	(void)rnn.fit(train, data.val, quick(3));
	const double before = mse(untrained.predict_point(train).values, train.actuals());
	const double after = mse(rnn.predict_point(train).values, train.actuals());
	CHECK(after < before);
}

TEST_CASE("mismatched predictor count is rejected") {
	const auto ds = fixtures::random_windows(60, 4, 3, 13);
	LinearRegressionModel lr;
	(void)lr.fit(ds, ds, {});
	const auto other = fixtures::random_windows(5, 4, 2, 14);
	CHECK(code_of([&] { (void)lr.predict_point(other); }) == Errc::ShapeMismatch);
	LinearRegressionModel unfitted;
	CHECK(code_of([&] { (void)unfitted.predict_point(ds); }) == Errc::NotFitted);
}

TEST_CASE("identical seeds give bitwise identical forecasts") {
	const auto ds = fixtures::random_windows(300, 24, 13, 15);
	auto fit = [&](std::uint64_t seed) {
		auto m = make_model("cnn", ForecastMode::Quantile, {{"channels", 4}}, {}, seed);
		(void)m->fit(ds, ds, quick(2));
		return m->predict_quantiles(ds).values;
	};
	CHECK(fit(5) == fit(5));
	CHECK(fit(5) != fit(6));
}

TEST_CASE("forecasts are tagged physical and cannot be inverted twice") {
	PointForecast f{{}, {0.5}, "kWh", ValueScale::Scaled};
	const PointForecast p = to_physical(f, {10, 20});
	CHECK(p.values[0] == 15.0);
	CHECK(p.scale == ValueScale::Physical);
	CHECK(code_of([&] { (void)to_physical(p, {10, 20}); }) == Errc::InvalidConfig);
}

TEST_CASE("model registry and hyperparameters") {
	CHECK(model_registry() == std::vector<std::string>{"sn1", "sn24", "lr", "qlr", "rnn", "cnn"});
	CHECK(code_of([] { (void)make_model("transformer", ForecastMode::Point); }) == Errc::UnknownModel);
	CHECK(code_of([] { (void)make_model("rnn", ForecastMode::Point, {{"hidden", 3}}); }) ==
	      Errc::InvalidHyperparameter);
	CHECK(code_of([] { (void)make_model("rnn", ForecastMode::Point, {{"hidden_size", 2.5}}); }) ==
	      Errc::InvalidHyperparameter);
	CHECK(code_of([] { (void)make_model("sn1", ForecastMode::Quantile); }) == Errc::InvalidConfig);
	CHECK(make_model("cnn", ForecastMode::Point)->name() == "cnn");
	const auto rnn = make_model("rnn", ForecastMode::Quantile);
	CHECK(rnn->output_size() == 3);
}

TEST_CASE("checkpoints restore identical forecasts") {
	const auto ds = fixtures::random_windows(200, 24, 13, 16);
	for (const std::string name : {"sn24", "lr", "qlr", "rnn", "cnn"}) {
		const ForecastMode mode = supported_modes(name).back();
		auto m = make_model(name, mode, {}, {}, 3);
		(void)m->fit(ds, ds, quick(2));
		const std::string bytes = encode_checkpoint(*m, "heating", "0123456789abcdef");
		const CheckpointHeader h = decode_checkpoint(bytes);
		CHECK(h.name == name);
		CHECK(h.target == "heating");
		CHECK(h.schema_hash == "0123456789abcdef");
		CHECK(h.seed == m->seed());
		const auto back = load_model(h);
		if (mode == ForecastMode::Point) {
			CHECK(back->predict_point(ds).values == m->predict_point(ds).values);
		} else {
			CHECK(back->predict_quantiles(ds).values == m->predict_quantiles(ds).values);
		}
		CHECK(code_of([&] { (void)decode_checkpoint(bytes.substr(0, bytes.size() - 3)); }) == Errc::ParseError);
	}
	CHECK(code_of([] { (void)decode_checkpoint("not a checkpoint"); }) == Errc::ParseError);
}
