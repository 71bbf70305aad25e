#include "energytwin/experiment.hpp"

#include "energytwin/error.hpp"
#include "energytwin/twin_graph.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace energytwin {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char *kWeekdays[] = {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"};

[[noreturn]] void bad(const std::string &what) {
	throw Error(Errc::InvalidConfig, what);
}

void check_keys(const json &obj, const std::string &where, std::initializer_list<const char *> allowed) {
	if (!obj.is_object()) {
		bad(where + " must be an object");
	}
	for (const auto &[key, _] : obj.items()) {
		if (std::find_if(allowed.begin(), allowed.end(), [&](const char *a) { return key == a; }) == allowed.end()) {
			bad("unknown key '" + key + "' in " + where);
		}
	}
}

double number(const json &v, const std::string &where) {
	if (!v.is_number()) {
		bad(where + " must be a number");
	}
	return v.get<double>();
}

std::size_t count(const json &v, const std::string &where, std::size_t min = 0) {
	if (!v.is_number_integer() && !v.is_number_unsigned()) {
		bad(where + " must be an integer");
	}
	const auto x = v.get<std::int64_t>();
	if (x < static_cast<std::int64_t>(min)) {
		bad(where + " must be >= " + std::to_string(min));
	}
	return static_cast<std::size_t>(x);
}

std::string text(const json &v, const std::string &where) {
	if (!v.is_string()) {
		bad(where + " must be a string");
	}
	return v.get<std::string>();
}

std::vector<std::string> strings(const json &v, const std::string &where) {
	if (!v.is_array()) {
		bad(where + " must be an array of strings");
	}
	std::vector<std::string> out;
	for (const auto &e : v) {
		out.push_back(text(e, where));
	}
	return out;
}

Timestamp timestamp(const json &v, const std::string &where) {
	try {
		return Timestamp::parse(text(v, where));
	} catch (const Error &e) {
		bad(where + ": " + e.what());
	}
}

std::chrono::year_month_day date(const json &v, const std::string &where) {
	try {
		return parse_date(text(v, where));
	} catch (const Error &e) {
		bad(where + ": " + e.what());
	}
}

ForecastMode parse_mode(const std::string &s) {
	if (s == "point") {
		return ForecastMode::Point;
	}
	if (s == "quantile") {
		return ForecastMode::Quantile;
	}
	bad("model mode must be 'point' or 'quantile', got '" + s + "'");
}

TrainConfig parse_train(const json &j, TrainConfig cfg, const std::string &where) {
	check_keys(j, where, {"batch_size", "max_epochs", "learning_rate", "early_stop_patience"});
	if (j.contains("batch_size")) {
		cfg.batch_size = count(j["batch_size"], where + ".batch_size", 1);
	}
	if (j.contains("max_epochs")) {
		cfg.max_epochs = count(j["max_epochs"], where + ".max_epochs", 1);
	}
	if (j.contains("learning_rate")) {
		cfg.learning_rate = number(j["learning_rate"], where + ".learning_rate");
	}
	if (j.contains("early_stop_patience")) {
		cfg.early_stop_patience = count(j["early_stop_patience"], where + ".early_stop_patience", 1);
	}
	return cfg;
}

SynthConfig parse_synth(const json &j) {
	check_keys(j, "data.synth",
	           {"seed", "years", "start", "electricity_base", "heating_base", "electricity_yearly_amplitude",
	            "heating_yearly_amplitude", "electricity_daily_amplitude", "opening_increment", "heating_coefficient",
	            "reference_temperature", "temperature_mean", "temperature_yearly_amplitude",
	            "temperature_daily_amplitude", "electricity_noise_sd", "heating_noise_sd", "weather_noise_sd",
	            "mode_change", "missing_fraction"});
	SynthConfig s;
	if (j.contains("seed")) {
		s.seed = count(j["seed"], "data.synth.seed");
	}
	if (j.contains("years")) {
		const json &y = j["years"];
		if (!y.is_number_integer()) {
			bad("data.synth.years must be an integer");
		}
		s.years = y.get<int>();
	}
	if (j.contains("start")) {
		s.start = timestamp(j["start"], "data.synth.start");
	}
	const std::pair<const char *, double SynthConfig::*> reals[] = {
	    {"electricity_base", &SynthConfig::electricity_base},
	    {"heating_base", &SynthConfig::heating_base},
	    {"electricity_yearly_amplitude", &SynthConfig::electricity_yearly_amplitude},
	    {"heating_yearly_amplitude", &SynthConfig::heating_yearly_amplitude},
	    {"electricity_daily_amplitude", &SynthConfig::electricity_daily_amplitude},
	    {"opening_increment", &SynthConfig::opening_increment},
	    {"heating_coefficient", &SynthConfig::heating_coefficient},
	    {"reference_temperature", &SynthConfig::reference_temperature},
	    {"temperature_mean", &SynthConfig::temperature_mean},
	    {"temperature_yearly_amplitude", &SynthConfig::temperature_yearly_amplitude},
	    {"temperature_daily_amplitude", &SynthConfig::temperature_daily_amplitude},
	    {"electricity_noise_sd", &SynthConfig::electricity_noise_sd},
	    {"heating_noise_sd", &SynthConfig::heating_noise_sd},
	    {"weather_noise_sd", &SynthConfig::weather_noise_sd},
	};
	for (const auto &[key, field] : reals) {
		if (j.contains(key)) {
			s.*field = number(j[key], std::string("data.synth.") + key);
		}
	}
	if (j.contains("mode_change")) {
		const json &m = j["mode_change"];
		if (m.is_null()) {
			s.default_mode_change = false;
		} else {
			check_keys(m, "data.synth.mode_change", {"first", "last", "increment"});
			if (!m.contains("first") || !m.contains("last")) {
				bad("data.synth.mode_change needs 'first' and 'last'");
			}
			ModeChangeWindow w{date(m["first"], "data.synth.mode_change.first"),
			                   date(m["last"], "data.synth.mode_change.last")};
			if (m.contains("increment")) {
				w.increment = number(m["increment"], "data.synth.mode_change.increment");
			}
			s.mode_change = w;
		}
	}
	return s;
}

std::array<std::optional<OpeningHours>, 7> parse_opening(const json &j) {
	check_keys(j, "data.opening_rules",
	           {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"});
	std::array<std::optional<OpeningHours>, 7> rules;
	for (std::size_t d = 0; d < 7; ++d) {
		if (!j.contains(kWeekdays[d]) || j[kWeekdays[d]].is_null()) {
			continue;
		}
		const json &r = j[kWeekdays[d]];
		const std::string where = std::string("data.opening_rules.") + kWeekdays[d];
		if (!r.is_array() || r.size() != 2) {
			bad(where + " must be [open_hour, close_hour] or null");
		}
		rules[d] = OpeningHours{static_cast<unsigned>(count(r[0], where)), static_cast<unsigned>(count(r[1], where))};
	}
	return rules;
}

ModelSpec parse_model(const json &j, const TrainConfig &base, std::size_t i) {
	const std::string where = "models[" + std::to_string(i) + "]";
	if (j.is_string()) {
		return ModelSpec{j.get<std::string>(), {}, {}, {}};
	}
	check_keys(j, where, {"name", "modes", "hyperparameters", "train"});
	if (!j.contains("name")) {
		bad(where + " needs a name");
	}
	ModelSpec m;
	m.name = text(j["name"], where + ".name");
	if (j.contains("modes")) {
		for (const auto &s : strings(j["modes"], where + ".modes")) {
			m.modes.push_back(parse_mode(s));
		}
	}
	if (j.contains("hyperparameters")) {
		const json &h = j["hyperparameters"];
		if (!h.is_object()) {
			bad(where + ".hyperparameters must be an object");
		}
		for (const auto &[k, v] : h.items()) {
			m.hyperparameters[k] = number(v, where + ".hyperparameters." + k);
		}
	}
	if (j.contains("train")) {
		m.train = parse_train(j["train"], base, where + ".train");
	}
	return m;
}

std::vector<ForecastMode> modes_of(const ModelSpec &m) {
	return m.modes.empty() ? supported_modes(m.name) : m.modes;
}

std::string read_file(const fs::path &path, Errc missing) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw Error(missing, "cannot open '" + path.string() + "'", path.string());
	}
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

void write_file(const fs::path &path, const std::string &content) {
	std::error_code ec;
	fs::create_directories(path.parent_path(), ec);
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw Error(Errc::IoError, "cannot write '" + path.string() + "'", path.string());
	}
	out << content;
}

/// Synthetic data with the configured fraction of interior gaps.
SynthData synth_with_gaps(const ExperimentConfig &cfg) {
	SynthData data = generate(*cfg.synth);
	if (cfg.synth_missing_fraction > 0.0) {
		std::uint64_t k = 1;
		for (auto *group : {&data.targets, &data.weather}) {
			for (auto &s : *group) {
				s = inject_missing(std::move(s), cfg.synth_missing_fraction, cfg.synth->seed + k++);
			}
		}
	}
	return data;
}

WindowedDataset windows_or_empty(const FeaturePipeline &pipe, const Table &table, std::size_t lookback) {
	if (table.rows() <= lookback) {
		WindowedDataset empty;
		empty.lookback = lookback;
		empty.predictors = pipe.schema().predictor_count();
		empty.target_range = pipe.target_range();
		return empty;
	}
	return pipe.windows(table);
}

std::string format_loss(double v) {
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.6g", v);
	return buf;
}

} // namespace

void ExperimentConfig::validate() const {
	if (csv_paths.empty() && !synth) {
		bad("data needs either 'csv' paths or a 'synth' section");
	}
	if (!csv_paths.empty() && synth) {
		bad("data takes 'csv' or 'synth', not both");
	}
	if (synth) {
		synth->validate();
		if (!(synth_missing_fraction >= 0.0 && synth_missing_fraction < 1.0)) {
			throw Error(Errc::InvalidFraction, "data.synth.missing_fraction must be in [0, 1)");
		}
	}
	if (lookback < 1) {
		bad("lookback must be >= 1");
	}
	if (targets.empty()) {
		bad("at least one target is required");
	}
	if (models.empty()) {
		bad("at least one model is required");
	}
	for (const auto &m : models) {
		const auto supported = supported_modes(m.name); // throws UnknownModel
		for (ForecastMode mode : m.modes) {
			if (std::find(supported.begin(), supported.end(), mode) == supported.end()) {
				bad(m.name + " has no " + std::string(to_string(mode)) + " head");
			}
		}
		// rejects unknown or malformed hyperparameters up front
		for (ForecastMode mode : modes_of(m)) {
			const auto model = make_model(m.name, mode, m.hyperparameters, quantiles, seed);
			if (m.name == "cnn") {
				const HyperMap h = model->hyperparameters();
				nn::ConvolutionalHyper conv;
				conv.kernel_size = static_cast<std::size_t>(h.at("kernel_size"));
				conv.dilation_levels = static_cast<std::size_t>(h.at("dilation_levels"));
				if (nn::receptive_field(conv) < lookback) {
					throw Error(Errc::InvalidHyperparameter,
					            "cnn receptive field " + std::to_string(nn::receptive_field(conv)) +
					                " is shorter than the lookback " + std::to_string(lookback));
				}
			}
		}
		if (m.train) {
			m.train->validate();
		}
	}
	train.validate();
	if (opening_rules) {
		CalendarConfig cal;
		cal.opening = *opening_rules;
		cal.validate();
	}
	if (plot_range && plot_range->last < plot_range->first) {
		bad("plot_range.last precedes plot_range.first");
	}
}

fs::path ExperimentConfig::resolve(const std::string &path) const {
	const fs::path p(path);
	return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

ExperimentConfig parse_experiment_config(std::string_view json_text, fs::path base_dir) {
	json j;
	try {
		j = json::parse(json_text);
	} catch (const json::parse_error &e) {
		bad(std::string("config is not valid JSON: ") + e.what());
	}
	check_keys(j, "config",
	           {"data", "twin", "targets", "weather_columns", "lookback", "quantiles", "split", "models", "train",
	            "seed", "out", "plot_range"});
	ExperimentConfig cfg;
	cfg.base_dir = std::move(base_dir);

	if (!j.contains("data")) {
		bad("config needs a 'data' section");
	}
	const json &d = j["data"];
	check_keys(d, "data", {"csv", "synth", "holidays", "opening_rules"});
	if (d.contains("csv")) {
		cfg.csv_paths = d["csv"].is_string() ? std::vector<std::string>{d["csv"].get<std::string>()}
		                                     : strings(d["csv"], "data.csv");
	}
	if (d.contains("synth")) {
		cfg.synth = parse_synth(d["synth"]);
		if (d["synth"].contains("missing_fraction")) {
			cfg.synth_missing_fraction = number(d["synth"]["missing_fraction"], "data.synth.missing_fraction");
		}
	}
	if (d.contains("holidays")) {
		cfg.holidays_path = text(d["holidays"], "data.holidays");
	}
	if (d.contains("opening_rules")) {
		cfg.opening_rules = parse_opening(d["opening_rules"]);
	}
	if (j.contains("twin")) {
		cfg.twin_path = text(j["twin"], "twin");
	}
	if (j.contains("targets")) {
		cfg.targets = strings(j["targets"], "targets");
	}
	if (j.contains("weather_columns")) {
		cfg.weather_columns = strings(j["weather_columns"], "weather_columns");
	}
	if (j.contains("lookback")) {
		cfg.lookback = count(j["lookback"], "lookback", 1);
	}
	if (j.contains("quantiles")) {
		const json &q = j["quantiles"];
		if (!q.is_array()) {
			bad("quantiles must be an array of numbers");
		}
		std::vector<double> levels;
		for (const auto &v : q) {
			levels.push_back(number(v, "quantiles"));
		}
		cfg.quantiles = QuantileSet(levels);
	}
	if (j.contains("split")) {
		const json &s = j["split"];
		check_keys(s, "split", {"train_end", "val_end", "ratios"});
		if (s.contains("ratios")) {
			if (s.contains("train_end") || s.contains("val_end")) {
				bad("split takes either ratios or calendar boundaries");
			}
			const json &r = s["ratios"];
			if (!r.is_array() || r.size() != 3) {
				bad("split.ratios must hold three numbers");
			}
			cfg.split = RatioSplit{{number(r[0], "split.ratios"), number(r[1], "split.ratios"),
			                        number(r[2], "split.ratios")}};
		} else {
			if (!s.contains("train_end") || !s.contains("val_end")) {
				bad("calendar split needs train_end and val_end");
			}
			cfg.split = CalendarSplit{timestamp(s["train_end"], "split.train_end"),
			                          timestamp(s["val_end"], "split.val_end")};
		}
	}
	if (j.contains("train")) {
		cfg.train = parse_train(j["train"], cfg.train, "train");
	}
	if (j.contains("seed")) {
		cfg.seed = count(j["seed"], "seed");
	}
	cfg.train.seed = cfg.seed;
	if (j.contains("models")) {
		const json &m = j["models"];
		if (!m.is_array()) {
			bad("models must be an array");
		}
		for (std::size_t i = 0; i < m.size(); ++i) {
			cfg.models.push_back(parse_model(m[i], cfg.train, i));
		}
	}
	if (j.contains("out")) {
		cfg.out = text(j["out"], "out");
	}
	if (j.contains("plot_range")) {
		const json &p = j["plot_range"];
		check_keys(p, "plot_range", {"first", "last"});
		if (!p.contains("first") || !p.contains("last")) {
			bad("plot_range needs first and last");
		}
		cfg.plot_range = PlotRange{timestamp(p["first"], "plot_range.first"), timestamp(p["last"], "plot_range.last")};
	}
	cfg.validate();
	return cfg;
}

ExperimentConfig load_experiment_config(const std::string &path) {
	const std::string body = read_file(path, Errc::InvalidConfig);
	return parse_experiment_config(body, fs::path(path).parent_path());
}

void apply_overrides(ExperimentConfig &cfg, const Overrides &o) {
	if (o.seed) {
		cfg.seed = *o.seed;
		cfg.train.seed = *o.seed;
	}
	if (o.out) {
		cfg.out = fs::absolute(*o.out).string();
	}
	if (o.models) {
		std::vector<ModelSpec> selected;
		for (const auto &name : *o.models) {
			supported_modes(name); // throws UnknownModel
			auto it = std::find_if(cfg.models.begin(), cfg.models.end(),
			                       [&](const ModelSpec &m) { return m.name == name; });
			selected.push_back(it != cfg.models.end() ? *it : ModelSpec{name, {}, {}, {}});
		}
		cfg.models = std::move(selected);
	}
	cfg.validate();
}

Dataset load_dataset(const ExperimentConfig &cfg) {
	Dataset out;
	std::vector<TimeSeries> series;
	if (cfg.synth) {
		SynthData data = synth_with_gaps(cfg);
		out.calendar = data.calendar;
		series = data.targets;
		series.insert(series.end(), data.weather.begin(), data.weather.end());
	} else {
		for (const auto &p : cfg.csv_paths) {
			auto cols = ingest_csv_file(cfg.resolve(p).string());
			series.insert(series.end(), std::make_move_iterator(cols.begin()), std::make_move_iterator(cols.end()));
		}
		out.calendar.opening = museum_opening_rules();
	}
	if (cfg.holidays_path) {
		out.calendar.holidays = read_holiday_file(cfg.resolve(*cfg.holidays_path).string());
	}
	if (cfg.opening_rules) {
		out.calendar.opening = *cfg.opening_rules;
	}
	std::vector<std::string> needed = cfg.targets;
	needed.insert(needed.end(), cfg.weather_columns.begin(), cfg.weather_columns.end());
	std::vector<TimeSeries> used;
	for (const auto &name : needed) {
		auto it = std::find_if(series.begin(), series.end(), [&](const TimeSeries &s) { return s.series_id == name; });
		if (it == series.end()) {
			throw Error(Errc::EmptyColumn, "column '" + name + "' not found in the input data", name);
		}
		used.push_back(it->missing_count() > 0 ? linear_interpolate_missing(*it) : *it);
	}
	out.table = align(used);
	return out;
}

PreparedTarget prepare_target(const Dataset &data, const ExperimentConfig &cfg, const std::string &target) {
	FeatureSchema schema{target, cfg.weather_columns, cfg.lookback};
	PreparedTarget p{target, FeaturePipeline(schema, data.calendar), {}, {}, {}};
	const SplitTables split = split_dataset(data.table, cfg.split);
	p.pipeline.fit(split.train);
	p.train = p.pipeline.windows(split.train);
	p.val = windows_or_empty(p.pipeline, split.val, cfg.lookback);
	p.test = p.pipeline.windows(split.test);
	return p;
}

std::vector<TrainJob> plan_jobs(const ExperimentConfig &cfg) {
	std::vector<TrainJob> jobs;
	for (std::size_t i = 0; i < cfg.models.size(); ++i) {
		for (ForecastMode mode : modes_of(cfg.models[i])) {
			for (const auto &target : cfg.targets) {
				jobs.push_back({i, cfg.models[i].name, mode, target, cfg.seed + i});
			}
		}
	}
	return jobs;
}

std::string checkpoint_name(const std::string &model, const std::string &target, ForecastMode mode) {
	return model + "_" + target + "_" + std::string(to_string(mode)) + ".ckpt";
}

void cmd_synth(const ExperimentConfig &cfg, std::ostream &log) {
	if (!cfg.synth) {
		bad("synth needs a data.synth section");
	}
	const SynthData data = synth_with_gaps(cfg);
	const SynthFiles files = write_synth_files(data, (cfg.out_dir() / "synth").string());
	log << "wrote " << files.csv << " (" << data.table().rows() << " hours, "
	    << data.targets.size() + data.weather.size() << " series)\n";
	log << "wrote " << files.holidays << " (" << data.calendar.holidays.size() << " holidays)\n";
	log << "wrote " << files.calendar << '\n';
}

void cmd_twin_validate(const std::string &path, std::ostream &log) {
	const std::string body = read_file(path, Errc::IoError);
	const twin::TwinDocument doc = twin::deserialize(body);
	log << "valid: " << doc.entities().size() << " entities, " << doc.relationships().size() << " relationships, "
	    << doc.bindings().size() << " bindings\n";
}

void cmd_train(const ExperimentConfig &cfg, const RunOptions &options, std::ostream &log) {
	const Dataset data = load_dataset(cfg);
	std::vector<PreparedTarget> prepared;
	for (const auto &t : cfg.targets) {
		prepared.push_back(prepare_target(data, cfg, t));
	}
	const fs::path out = cfg.out_dir();
	const std::vector<TrainJob> jobs = plan_jobs(cfg);
	std::vector<std::string> messages(jobs.size());
	std::vector<std::exception_ptr> failures(jobs.size());

	auto run = [&](std::size_t j) {
		const TrainJob &job = jobs[j];
		const ModelSpec &spec = cfg.models[job.model_index];
		const auto &p = *std::find_if(prepared.begin(), prepared.end(),
		                              [&](const PreparedTarget &x) { return x.target == job.target; });
		TrainConfig tc = spec.train.value_or(cfg.train);
		tc.seed = job.seed;
		auto model = make_model(job.model, job.mode, spec.hyperparameters, cfg.quantiles, job.seed);
		const auto report = model->fit(p.train, p.val, tc);
		const std::string stem = job.model + "_" + job.target + "_" + std::string(to_string(job.mode));
		save_checkpoint((out / "checkpoints" / checkpoint_name(job.model, job.target, job.mode)).string(), *model,
		                job.target, p.pipeline.schema_hash());
		std::string msg = "trained " + stem;
		if (report) {
			std::ostringstream csv;
			write_train_report(csv, *report);
			write_file(out / "reports" / (stem + "_train.csv"), csv.str());
			msg += ": best_epoch=" + std::to_string(report->best_epoch) + " epochs=" +
			       std::to_string(report->epochs.size()) + " val_loss=" + format_loss(report->best_val_loss()) +
			       " stop=" + std::string(to_string(report->stop_reason));
		}
		messages[j] = msg;
	};

	const std::size_t workers = std::max<std::size_t>(1, std::min(options.parallel_models, jobs.size()));
	if (workers == 1) {
		for (std::size_t j = 0; j < jobs.size(); ++j) {
			run(j);
			log << messages[j] << '\n' << std::flush;
		}
	} else {
		std::atomic<std::size_t> next{0};
		std::vector<std::thread> pool;
		for (std::size_t w = 0; w < workers; ++w) {
			pool.emplace_back([&] {
				for (std::size_t j = next++; j < jobs.size(); j = next++) {
					try {
						run(j);
					} catch (...) {
						failures[j] = std::current_exception();
					}
				}
			});
		}
		for (auto &t : pool) {
			t.join();
		}
		for (std::size_t j = 0; j < jobs.size(); ++j) {
			if (failures[j]) {
				std::rethrow_exception(failures[j]);
			}
			log << messages[j] << '\n';
		}
	}

	if (cfg.twin_path) {
		twin::TwinDocument doc = twin::deserialize(read_file(cfg.resolve(*cfg.twin_path), Errc::IoError));
		const Timestamp last = data.table.end() - 1;
		for (const auto &t : cfg.targets) {
			if (const auto *b = doc.binding_for_series(t)) {
				const double v = data.table.column(t).values.back();
				doc = twin::update_point_status(std::move(doc), b->point_id, last.hours(), v);
			}
		}
		write_file(out / "twin_state.json", twin::serialize(doc) + "\n");
		log << "updated twin point status at " << last.to_string() << '\n';
	}
}

std::vector<EvaluationReport> cmd_evaluate(const ExperimentConfig &cfg, std::ostream &log) {
	const Dataset data = load_dataset(cfg);
	const fs::path out = cfg.out_dir();
	std::vector<EvaluationReport> all;
	std::ostringstream best_txt;

	for (const auto &target : cfg.targets) {
		const PreparedTarget p = prepare_target(data, cfg, target);
		const std::string hash = p.pipeline.schema_hash();
		std::vector<std::unique_ptr<ForecastModel>> owned;
		std::vector<SuiteEntry> entries;
		for (const auto &spec : cfg.models) {
			SuiteEntry entry{spec.name};
			for (ForecastMode mode : modes_of(spec)) {
				const fs::path path = out / "checkpoints" / checkpoint_name(spec.name, target, mode);
				const CheckpointHeader header = read_checkpoint(path.string());
				if (header.schema_hash != hash) {
					throw Error(Errc::SchemaMismatch,
					            "checkpoint " + path.filename().string() + " was trained on schema " +
					                header.schema_hash + " but the data has schema " + hash,
					            path.filename().string());
				}
				if (header.name != spec.name || header.mode != mode || header.target != target) {
					throw Error(Errc::SchemaMismatch, "checkpoint " + path.filename().string() +
					                                      " does not hold " + spec.name + " for " + target,
					            path.filename().string());
				}
				owned.push_back(load_model(header));
				(mode == ForecastMode::Point ? entry.point : entry.quantile) = owned.back().get();
			}
			entries.push_back(entry);
		}
		auto reports = evaluate_suite(entries, p.test, target);

		// plot data
		PlotRange range{p.test.label_times.front(), p.test.label_times.front() + 167};
		if (cfg.plot_range) {
			range = *cfg.plot_range;
		} else if (cfg.synth) {
			if (auto mc = cfg.synth->effective_mode_change()) {
				const Timestamp first = Timestamp::from_civil(static_cast<int>(mc->first.year()),
				                                              static_cast<unsigned>(mc->first.month()),
				                                              static_cast<unsigned>(mc->first.day()));
				const Timestamp last = Timestamp::from_civil(static_cast<int>(mc->last.year()),
				                                             static_cast<unsigned>(mc->last.month()),
				                                             static_cast<unsigned>(mc->last.day()), 23);
				if (p.test.label_times.front() <= first && last <= p.test.label_times.back()) {
					range = {first, last};
				}
			}
		}
		std::vector<PointForecast> points;
		std::vector<QuantileForecast> quantiles;
		points.reserve(entries.size());
		quantiles.reserve(entries.size());
		std::vector<PlotSeries> plot;
		for (const auto &e : entries) {
			PlotSeries s{e.name};
			if (e.point) {
				points.push_back(e.point->predict_point(p.test));
				s.point = &points.back();
			}
			if (e.quantile) {
				quantiles.push_back(e.quantile->predict_quantiles(p.test));
				s.quantiles = &quantiles.back();
			}
			plot.push_back(s);
		}
		std::ostringstream plot_csv;
		const std::size_t rows = write_plot_data(plot_csv, p.test, plot, range.first, range.last);
		write_file(out / "plots" / (target + "_plot.csv"), plot_csv.str());
		log << "wrote plot data for " << target << " (" << rows << " hours)\n";

		all.insert(all.end(), reports.begin(), reports.end());
	}

	std::ostringstream t1, t2, best;
	write_point_table(t1, all, cfg.targets);
	write_quantile_table(t2, all, cfg.targets);
	for (const auto &[metric, model] : best_models(all)) {
		best << metric << ',' << model << '\n';
	}
	write_file(out / "tables" / "point_metrics.csv", t1.str());
	write_file(out / "tables" / "quantile_metrics.csv", t2.str());
	write_file(out / "tables" / "best_models.csv", "metric,model\n" + best.str());
	log << "point forecasts (CV-RMSE %, NMBE %, ASHRAE)\n" << t1.str();
	log << "quantile forecasts (rho-risk)\n" << t2.str();
	log << "best models\n" << best.str();
	return all;
}

} // namespace energytwin
