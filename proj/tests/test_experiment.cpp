#include "energytwin/error.hpp"
#include "energytwin/experiment.hpp"
#include "run_helpers.hpp"

#include <doctest.h>

#include <sstream>

using namespace energytwin;
using fixtures::read_tree;
using fixtures::run_cli;
using fixtures::scratch;
using fixtures::write_text;

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

/// One synthetic year, three cheap models, explicit plot window.
std::string small_config(const std::string &models = R"(["sn1", "lr", {"name": "cnn", "modes": ["point"],
      "hyperparameters": {"channels": 4, "kernel_size": 3, "dilation_levels": 4}}])",
                         const std::string &extra = "") {
	return R"({
  "data": {"synth": {"seed": 3, "years": 1, "start": "2016-01-01T01:00"}},
  "split": {"ratios": [0.8, 0.1, 0.1]},
  "models": )" + models + R"(,
  "train": {"batch_size": 256, "max_epochs": 2, "learning_rate": 0.003, "early_stop_patience": 1},
  "plot_range": {"first": "2016-12-10T00:00", "last": "2016-12-12T23:00"},)" +
	       extra + R"(
  "out": "out"
})";
}

Errc parse_code(const std::string &text) {
	return code_of([&] { (void)parse_experiment_config(text); });
}

std::size_t count_lines(const std::string &s) {
	return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_CASE("config parsing") {
	const ExperimentConfig cfg = parse_experiment_config(small_config(), "/base");
	CHECK(cfg.synth->years == 1);
	CHECK(cfg.models.size() == 3);
	CHECK(cfg.models[2].hyperparameters.at("channels") == 4.0);
	CHECK(cfg.train.max_epochs == 2);
	CHECK(cfg.train.seed == 42);
	CHECK(cfg.out_dir() == std::filesystem::path("/base/out"));
	CHECK(cfg.plot_range->last == Timestamp::parse("2016-12-12T23:00"));

	CHECK(parse_code("{not json") == Errc::InvalidConfig);
	CHECK(parse_code(small_config(R"(["sn1"])", R"("colour": "blue",)")) == Errc::InvalidConfig);
	CHECK(parse_code(small_config(R"(["sn1", "xgboost"])")) == Errc::UnknownModel);
	CHECK(parse_code(small_config(R"([{"name": "qlr", "modes": ["point"]}])")) == Errc::InvalidConfig);
	CHECK(parse_code(small_config(R"([{"name": "rnn", "hyperparameters": {"hidden": 3}}])")) ==
	      Errc::InvalidHyperparameter);
	// receptive field 8 cannot cover a 24-hour lookback
	CHECK(parse_code(small_config(R"([{"name": "cnn", "hyperparameters": {"dilation_levels": 3}}])")) ==
	      Errc::InvalidHyperparameter);
	CHECK(parse_code(small_config(R"(["sn1"])", R"("quantiles": [0.9, 0.1],)")) == Errc::InvalidQuantile);
	CHECK(parse_code(small_config(R"(["sn1"])", R"("lookback": "long",)")) == Errc::InvalidConfig);
	CHECK(parse_code(R"({"data": {"csv": "a.csv", "synth": {}}, "models": ["sn1"]})") == Errc::InvalidConfig);
	CHECK(parse_code(R"({"data": {}, "models": ["sn1"]})") == Errc::InvalidConfig);
	CHECK(parse_code(R"({"data": {"synth": {"years": 0}}, "models": ["sn1"]})") == Errc::InvalidConfig);
	CHECK(parse_code(R"({"data": {"csv": "a.csv"}, "models": []})") == Errc::InvalidConfig);
	CHECK(parse_code(R"({"data": {"csv": "a.csv"}, "models": ["sn1"], "train": {"max_epochs": 3,
	      "early_stop_patience": 3}})") == Errc::InvalidConfig);
	CHECK(code_of([] { (void)load_experiment_config("/nonexistent/config.json"); }) == Errc::InvalidConfig);
}

TEST_CASE("overrides") {
	ExperimentConfig cfg = parse_experiment_config(small_config());
	apply_overrides(cfg, Overrides{7, std::nullopt, std::vector<std::string>{"cnn", "sn24"}});
	CHECK(cfg.seed == 7);
	CHECK(cfg.train.seed == 7);
	REQUIRE(cfg.models.size() == 2);
	CHECK(cfg.models[0].hyperparameters.at("channels") == 4.0); // keeps the configured entry
	CHECK(cfg.models[1].name == "sn24");
	CHECK(code_of([&] { apply_overrides(cfg, Overrides{{}, {}, std::vector<std::string>{"gbm"}}); }) ==
	      Errc::UnknownModel);
}

TEST_CASE("job plan and checkpoint names") {
	const ExperimentConfig cfg = parse_experiment_config(small_config(R"(["sn1", "qlr", "rnn"])"));
	const auto jobs = plan_jobs(cfg);
	REQUIRE(jobs.size() == 8);
	CHECK(jobs[0].model == "sn1");
	CHECK(jobs[1].target == "heating");
	CHECK(jobs[2].mode == ForecastMode::Quantile);
	CHECK(jobs[4].model == "rnn");
	CHECK(jobs[4].mode == ForecastMode::Point);
	CHECK(jobs[6].mode == ForecastMode::Quantile);
	for (const auto &j : jobs) {
		CHECK(j.seed == cfg.seed + j.model_index);
	}
	CHECK(checkpoint_name("rnn", "heating", ForecastMode::Quantile) == "rnn_heating_quantile.ckpt");
}

TEST_CASE("prepared targets window each split separately") {
	const ExperimentConfig cfg = parse_experiment_config(small_config());
	const Dataset data = load_dataset(cfg);
	CHECK(data.table.rows() == 8784);
	const PreparedTarget p = prepare_target(data, cfg, "heating");
	for (const auto *w : {&p.train, &p.val, &p.test}) {
		CHECK(w->lookback == 24);
		CHECK(w->predictors == 13);
	}
	const auto rows = split_dataset(data.table, cfg.split);
	CHECK(p.train.size() == rows.train.rows() - 24);
	CHECK(p.val.size() == rows.val.rows() - 24);
	CHECK(p.test.size() == rows.test.rows() - 24);
	CHECK(p.test.actuals().front() == data.table.column("heating").values[rows.train.rows() + rows.val.rows() + 24]);
}

TEST_CASE("command-line exit codes") {
	const auto dir = scratch("cli_codes");
	const auto log = dir / "log.txt";
	auto config = [&](const std::string &name, const std::string &body) {
		write_text(dir / name, body);
		return "--config '" + (dir / name).string() + "'";
	};

	CHECK(run_cli("twin-validate '" ENERGYTWIN_DATA_DIR "/museum_twin.json'", log).status == 0);
	CHECK(fixtures::slurp(log).find("20 entities") != std::string::npos);

	CHECK(run_cli("train " + config("unknown.json", small_config(R"(["sn1", "xgboost"])")), log).status == 1);
	CHECK(run_cli("train " + config("years.json", R"({"data": {"synth": {"years": 0}}, "models": ["sn1"]})"), log)
	          .status == 1);
	CHECK(run_cli("train --config '" + (dir / "absent.json").string() + "'", log).status == 1);
	CHECK(run_cli("train --frobnicate", log).status == 1);
	CHECK(run_cli("synth " + config("nosynth.json", R"({"data": {"csv": "x.csv"}, "models": ["sn1"]})"), log)
	          .status == 1);

	CHECK(run_cli("train " + config("csv.json", R"({"data": {"csv": "missing.csv"}, "models": ["sn1"]})"), log)
	          .status == 2);

	write_text(dir / "broken_twin.json", "{\"entities\": [");
	CHECK(run_cli("twin-validate '" + (dir / "broken_twin.json").string() + "'", log).status == 2);
	std::string twin = fixtures::slurp(ENERGYTWIN_DATA_DIR "/museum_twin.json");
	twin.replace(twin.find("\"relationships\": ["), 18,
	             R"("relationships": [{"subject": "elec_meter", "predicate": "feeds", "object": "ghost"},)");
	write_text(dir / "dangling_twin.json", twin);
	const auto dangling = run_cli("twin-validate '" + (dir / "dangling_twin.json").string() + "'", log);
	CHECK(dangling.status == 2);
	CHECK(dangling.output.find("ghost") != std::string::npos);

	const std::string diverge = small_config(R"([{"name": "cnn", "modes": ["point"],
	    "hyperparameters": {"channels": 4, "kernel_size": 3, "dilation_levels": 4}}])");
	auto lr_pos = diverge.find("0.003");
	std::string huge = diverge;
	huge.replace(lr_pos, 5, "1e6");
	CHECK(run_cli("train " + config("diverge.json", huge), log).status == 3);
}

TEST_CASE("evaluation rejects checkpoints from another schema") {
	const auto dir = scratch("cli_schema");
	const auto log = dir / "log.txt";
	write_text(dir / "a.json", small_config(R"(["lr"])"));
	write_text(dir / "b.json", small_config(R"(["lr"])", R"("lookback": 12,)"));
	REQUIRE(run_cli("train --config '" + (dir / "a.json").string() + "'", log).status == 0);
	CHECK(run_cli("evaluate --config '" + (dir / "a.json").string() + "'", log).status == 0);
	const auto mismatch = run_cli("evaluate --config '" + (dir / "b.json").string() + "'", log);
	CHECK(mismatch.status == 2);
	CHECK(mismatch.output.find("SchemaMismatch") != std::string::npos);
	std::filesystem::remove(dir / "out/checkpoints/lr_heating_point.ckpt");
	CHECK(run_cli("evaluate --config '" + (dir / "a.json").string() + "'", log).status == 2);
}

TEST_CASE("train and evaluate a small suite") {
	const auto dir = scratch("suite");
	ExperimentConfig cfg = parse_experiment_config(small_config(), dir);
	std::ostringstream log;
	cmd_train(cfg, {}, log);
	const auto reports = cmd_evaluate(cfg, log);
	CHECK(reports.size() == 6);

	const std::string table = fixtures::slurp(dir / "out/tables/point_metrics.csv");
	CHECK(count_lines(table) == 4);
	CHECK(table.rfind("model,electricity_cv_rmse_pct,electricity_nmbe_pct,electricity_ashrae,heating_cv_rmse_pct,", 0) ==
	      0);
	for (const char *m : {"\nsn1,", "\nlr,", "\ncnn,"}) {
		CHECK(table.find(m) != std::string::npos);
	}
	// no quantile heads configured: header only
	CHECK(count_lines(fixtures::slurp(dir / "out/tables/quantile_metrics.csv")) == 1);

	for (const char *t : {"electricity", "heating"}) {
		const std::string plot = fixtures::slurp(dir / "out/plots" / (std::string(t) + "_plot.csv"));
		CHECK(count_lines(plot) == 1 + 72);
		CHECK(plot.find("\n2016-12-10T00:00,") != std::string::npos);
		CHECK(plot.find("\n2016-12-12T23:00,") != std::string::npos);
		CHECK(plot.find("cnn_point") != std::string::npos);
	}
	const std::string best = fixtures::slurp(dir / "out/tables/best_models.csv");
	CHECK(best.find("heating/cv_rmse,") != std::string::npos);
}

TEST_CASE("reruns are byte-identical, serial or parallel") {
	const auto dir = scratch("rerun");
	const auto log = dir / "log.txt";
	write_text(dir / "cfg.json",
	           small_config(R"(["sn24", "qlr", {"name": "rnn", "hyperparameters": {"hidden_size": 4}},
	               {"name": "cnn", "modes": ["point"], "hyperparameters": {"channels": 4, "kernel_size": 3,
	               "dilation_levels": 4}}])"));
	const std::string cfg = "--config '" + (dir / "cfg.json").string() + "'";
	auto run = [&](const std::string &out, const std::string &flags) {
		const std::string o = " --out '" + (dir / out).string() + "'";
		REQUIRE(run_cli("train " + cfg + o + flags, log).status == 0);
		REQUIRE(run_cli("evaluate " + cfg + o, log).status == 0);
		return read_tree(dir / out);
	};
	const auto first = run("one", "");
	CHECK(first.size() > 10);
	CHECK(run("two", "") == first);
	CHECK(run("par", " --parallel-models 3") == first);
	CHECK(run("one", "") == first); // idempotent over an existing output directory
	const auto seeded = [&] {
		REQUIRE(run_cli("train " + cfg + " --seed 5 --out '" + (dir / "s5").string() + "'", log).status == 0);
		return read_tree(dir / "s5");
	}();
	CHECK(seeded.at("checkpoints/rnn_heating_point.ckpt") != first.at("checkpoints/rnn_heating_point.ckpt"));
}
