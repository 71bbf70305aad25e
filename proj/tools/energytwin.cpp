#include "energytwin/error.hpp"
#include "energytwin/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

std::vector<std::string> split_list(const std::string &list) {
	std::vector<std::string> out;
	std::stringstream ss(list);
	std::string item;
	while (std::getline(ss, item, ',')) {
		if (!item.empty()) {
			out.push_back(item);
		}
	}
	return out;
}

} // namespace

int main(int argc, char **argv) {
	using namespace energytwin;

	CLI::App app{"Digital-twin energy forecasting experiments"};
	app.require_subcommand(1);

	std::string config_path;
	std::string twin_path;
	std::optional<std::string> out;
	std::optional<std::uint64_t> seed;
	std::optional<std::string> models;
	std::size_t parallel = 1;

	auto add_common = [&](CLI::App *cmd) {
		cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
		cmd->add_option("--out", out, "Output directory (overrides the config)");
		cmd->add_option("--seed", seed, "Base seed (overrides the config)");
		cmd->add_option("--models", models, "Comma-separated model list (overrides the config)");
	};

	CLI::App *synth = app.add_subcommand("synth", "Write the synthetic benchmark files");
	add_common(synth);
	CLI::App *twin = app.add_subcommand("twin-validate", "Load and validate a twin document");
	twin->add_option("path", twin_path, "Twin JSON document")->required();
	CLI::App *train = app.add_subcommand("train", "Fit every configured model and target");
	add_common(train);
	train->add_option("--parallel-models", parallel, "Concurrent model fits")->check(CLI::PositiveNumber);
	CLI::App *evaluate = app.add_subcommand("evaluate", "Score checkpoints on the test split");
	add_common(evaluate);

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		const int rc = app.exit(e);
		return rc == 0 ? 0 : static_cast<int>(ErrorCategory::Config);
	}

	try {
		if (twin->parsed()) {
			cmd_twin_validate(twin_path, std::cout);
			return 0;
		}
		ExperimentConfig cfg = load_experiment_config(config_path);
		Overrides o;
		o.seed = seed;
		o.out = out;
		if (models) {
			o.models = split_list(*models);
		}
		apply_overrides(cfg, o);
		if (synth->parsed()) {
			cmd_synth(cfg, std::cout);
		} else if (train->parsed()) {
			cmd_train(cfg, RunOptions{parallel}, std::cout);
		} else {
			cmd_evaluate(cfg, std::cout);
		}
	} catch (const Error &e) {
		std::cerr << "error: " << e.what() << '\n';
		if (!e.subject().empty()) {
			std::cerr << "offending id: " << e.subject() << '\n';
		}
		return static_cast<int>(e.category());
	} catch (const std::exception &e) {
		std::cerr << "error: " << e.what() << '\n';
		return static_cast<int>(ErrorCategory::Data);
	}
	return 0;
}
