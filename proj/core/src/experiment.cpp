#include "stallpred/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stallpred/errors.hpp"
#include "stallpred/flight_csv.hpp"
#include "stallpred/model_file.hpp"

namespace stallpred {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::uint64_t corpus_seed(std::uint64_t master) { return mix_seed(master, 0xC0F0F5ULL); }
std::uint64_t split_seed(std::uint64_t master) { return mix_seed(master, 0x5B117ULL); }
std::uint64_t init_seed(std::uint64_t master) { return mix_seed(master, 0x171117ULL); }
std::uint64_t train_seed(std::uint64_t master) { return mix_seed(master, 0x7E817ULL); }
std::uint64_t tune_seed(std::uint64_t master) { return mix_seed(master, 0x7EBE5ULL); }

namespace {

// Typed lookup with key-qualified errors.
template <typename T>
T get_or(const ordered_json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const std::exception&) {
        throw ConfigError(key, "config: invalid value for key '" + key + "'");
    }
}

const ordered_json* section(const ordered_json& j, const char* key) {
    if (!j.contains(key)) return nullptr;
    if (!j.at(key).is_object())
        throw ConfigError(key, std::string("config: '") + key + "' must be an object");
    return &j.at(key);
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError("<root>", std::string("config: not valid JSON: ") + e.what());
    }

    ExperimentConfig cfg;
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    cfg.output_dir = get_or<std::string>(j, "output_dir", "out");
    cfg.corpus_dir = get_or<std::string>(j, "corpus_dir", "");
    cfg.dataset_path = get_or<std::string>(j, "dataset_path", "");

    if (const auto* c = section(j, "corpus")) {
        cfg.corpus_present = true;
        cfg.corpus.gradual_flights = get_or<std::size_t>(*c, "gradual_flights", 0);
        cfg.corpus.abrupt_flights = get_or<std::size_t>(*c, "abrupt_flights", 0);
        cfg.corpus.cruise_flights = get_or<std::size_t>(*c, "cruise_flights", 0);
        cfg.corpus.base.duration_s = get_or<std::size_t>(*c, "duration_s", 240);
        cfg.corpus.base.base_speed_kt = get_or<double>(*c, "base_speed_kt", 210.0);
        cfg.corpus.base.stall_aoa_deg = get_or<double>(*c, "stall_aoa_deg", 15.0);
        cfg.corpus.base.warning_margin = get_or<double>(*c, "warning_margin", 0.85);
        cfg.corpus.base.noise_level = get_or<double>(*c, "noise_level", 1.0);
    }
    if (!cfg.corpus_present && cfg.corpus_dir.empty() && cfg.dataset_path.empty())
        throw ConfigError("dataset_path",
                          "config: provide one of 'corpus', 'corpus_dir' or 'dataset_path'");

    if (const auto* d = section(j, "data")) {
        cfg.data.window_len = get_or<std::size_t>(*d, "window_len", 10);
        cfg.data.horizon = get_or<std::size_t>(*d, "horizon", 10);
        cfg.data.counts.train_pos = get_or<std::size_t>(*d, "train_pos", 1020);
        cfg.data.counts.train_neg = get_or<std::size_t>(*d, "train_neg", 1020);
        cfg.data.counts.val_each = get_or<std::size_t>(*d, "val_each", 150);
        cfg.data.counts.test_each = get_or<std::size_t>(*d, "test_each", 150);
        cfg.data.segment_exclusive = get_or<bool>(*d, "segment_exclusive", true);
    }

    if (const auto* m = section(j, "model")) {
        cfg.model.preset = get_or<std::string>(*m, "preset", "arch-a");
        if (m->contains("spec")) cfg.model.custom = spec_from_json_text(m->at("spec").dump());
        if (const auto* i = section(*m, "init")) {
            cfg.model.init.he_recurrent = get_or<bool>(*i, "he_recurrent", true);
            cfg.model.init.forget_bias = get_or<double>(*i, "forget_bias", 1.0);
        }
    }

    if (const auto* t = section(j, "train")) {
        cfg.train.learning_rate = get_or<double>(*t, "learning_rate", 0.001);
        cfg.train.epochs = get_or<std::size_t>(*t, "epochs", 100);
        cfg.train.batch_size = get_or<std::size_t>(*t, "batch_size", 32);
        cfg.train.adam_beta1 = get_or<double>(*t, "adam_beta1", 0.9);
        cfg.train.adam_beta2 = get_or<double>(*t, "adam_beta2", 0.999);
        cfg.train.adam_eps = get_or<double>(*t, "adam_eps", 1e-8);
        cfg.train.shuffle = get_or<bool>(*t, "shuffle", true);
        cfg.train.threads = get_or<std::size_t>(*t, "threads", 1);
    }

    if (const auto* t = section(j, "tune")) {
        cfg.tune.present = true;
        cfg.tune.budget = get_or<std::size_t>(*t, "budget", 25);
        cfg.tune.init = get_or<std::size_t>(*t, "init", 5);
        cfg.tune.epochs = get_or<std::size_t>(*t, "epochs", 15);
        cfg.tune.lr_low = get_or<double>(*t, "learning_rate_low", 1e-5);
        cfg.tune.lr_high = get_or<double>(*t, "learning_rate_high", 1e-2);
        cfg.tune.tune_hidden_units = get_or<bool>(*t, "tune_hidden_units", false);
        cfg.tune.units_low = get_or<std::size_t>(*t, "units_low", 8);
        cfg.tune.units_high = get_or<std::size_t>(*t, "units_high", 256);
    }

    if (const auto* e = section(j, "evaluate"))
        cfg.eval_threshold = get_or<double>(*e, "threshold", 0.5);
    return cfg;
}

ModelSpec model_spec_of(const ModelSection& section, std::size_t features,
                        std::size_t window_len) {
    ModelSpec spec = section.custom ? *section.custom : spec_preset(section.preset);
    spec.input_features = features;
    spec.window_len = window_len;
    validate(spec);
    return spec;
}

std::string resolved_config_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    if (cfg.corpus_present) {
        j["corpus"] = {{"gradual_flights", cfg.corpus.gradual_flights},
                       {"abrupt_flights", cfg.corpus.abrupt_flights},
                       {"cruise_flights", cfg.corpus.cruise_flights},
                       {"duration_s", cfg.corpus.base.duration_s},
                       {"base_speed_kt", cfg.corpus.base.base_speed_kt},
                       {"stall_aoa_deg", cfg.corpus.base.stall_aoa_deg},
                       {"warning_margin", cfg.corpus.base.warning_margin},
                       {"noise_level", cfg.corpus.base.noise_level}};
    }
    if (!cfg.corpus_dir.empty()) j["corpus_dir"] = cfg.corpus_dir;
    if (!cfg.dataset_path.empty()) j["dataset_path"] = cfg.dataset_path;
    j["data"] = {{"window_len", cfg.data.window_len},
                 {"horizon", cfg.data.horizon},
                 {"train_pos", cfg.data.counts.train_pos},
                 {"train_neg", cfg.data.counts.train_neg},
                 {"val_each", cfg.data.counts.val_each},
                 {"test_each", cfg.data.counts.test_each},
                 {"segment_exclusive", cfg.data.segment_exclusive}};
    j["model"] = {{"preset", cfg.model.preset},
                  {"init", {{"he_recurrent", cfg.model.init.he_recurrent},
                            {"forget_bias", cfg.model.init.forget_bias}}}};
    if (cfg.model.custom) j["model"]["spec"] = ordered_json::parse(spec_to_json(*cfg.model.custom));
    j["train"] = {{"learning_rate", cfg.train.learning_rate},
                  {"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"adam_beta1", cfg.train.adam_beta1},
                  {"adam_beta2", cfg.train.adam_beta2},
                  {"adam_eps", cfg.train.adam_eps},
                  {"shuffle", cfg.train.shuffle},
                  {"threads", cfg.train.threads}};
    if (cfg.tune.present) {
        j["tune"] = {{"budget", cfg.tune.budget},
                     {"init", cfg.tune.init},
                     {"epochs", cfg.tune.epochs},
                     {"learning_rate_low", cfg.tune.lr_low},
                     {"learning_rate_high", cfg.tune.lr_high},
                     {"tune_hidden_units", cfg.tune.tune_hidden_units},
                     {"units_low", cfg.tune.units_low},
                     {"units_high", cfg.tune.units_high}};
    }
    j["evaluate"] = {{"threshold", cfg.eval_threshold}};
    return j.dump(2) + "\n";
}

namespace {

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base_dir) / p).string();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw IoError("write failed for " + path);
}

PreparedDataset prepare_from_corpus(const ExperimentConfig& cfg,
                                    const std::vector<TimeSeries>& corpus) {
    Dataset pool = assemble_windows(corpus, cfg.data.window_len, cfg.data.horizon);
    Splits splits = balance_and_split(pool, cfg.data.counts, split_seed(cfg.seed),
                                      cfg.data.segment_exclusive, cfg.data.window_len,
                                      cfg.data.horizon);
    PreparedDataset pd;
    pd.standardizer = fit_standardizer(splits.train);
    pd.splits.train = apply_standardizer(pd.standardizer, splits.train);
    pd.splits.val = apply_standardizer(pd.standardizer, splits.val);
    pd.splits.test = apply_standardizer(pd.standardizer, splits.test);
    pd.seed = cfg.seed;
    pd.window_len = cfg.data.window_len;
    pd.horizon = cfg.data.horizon;
    for (const auto& ts : corpus) pd.series_ids.push_back(ts.id);
    return pd;
}

std::vector<TimeSeries> load_corpus_dir(const std::string& dir) {
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) throw IoError("corpus_dir is not a directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("corpus_dir has no .csv files: " + dir);
    std::vector<TimeSeries> corpus;
    corpus.reserve(files.size());
    for (const auto& f : files) {
        TimeSeries ts = parse_flight_csv(f);
        ts.id = fs::path(f).stem().string();
        corpus.push_back(std::move(ts));
    }
    return corpus;
}

}  // namespace

ExperimentResult run_experiment_json(const std::string& config_text,
                                     const std::string& base_dir,
                                     std::optional<std::uint64_t> seed_override) {
    ExperimentConfig cfg = parse_experiment_config(config_text);
    if (seed_override) cfg.seed = *seed_override;
    cfg.corpus.seed = corpus_seed(cfg.seed);

    const std::string out_dir = resolve_path(base_dir, cfg.output_dir);
    fs::create_directories(out_dir);

    ExperimentResult result;
    result.artifacts.resolved_config = (fs::path(out_dir) / "config_resolved.json").string();
    write_file(result.artifacts.resolved_config, resolved_config_json(cfg));

    // Stage: dataset.
    PreparedDataset pd;
    if (!cfg.dataset_path.empty()) {
        pd = load_dataset(resolve_path(base_dir, cfg.dataset_path));
    } else if (!cfg.corpus_dir.empty()) {
        pd = prepare_from_corpus(cfg, load_corpus_dir(resolve_path(base_dir, cfg.corpus_dir)));
    } else {
        pd = prepare_from_corpus(cfg, generate_corpus(cfg.corpus));
    }

    const std::size_t features =
        pd.splits.train.samples.empty() ? kNumFlightParams : pd.splits.train.samples[0].x.rows;

    // Stage: train, optionally preceded by hyperparameter tuning.
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = train_seed(cfg.seed);
    ModelSpec spec = model_spec_of(cfg.model, features, pd.window_len);

    if (cfg.tune.present) {
        SearchSpace space;
        space.dims.push_back(
            {"learning_rate", DimKind::ContinuousLog, cfg.tune.lr_low, cfg.tune.lr_high, {}});
        std::vector<std::size_t> lstm_layers;
        if (cfg.tune.tune_hidden_units) {
            for (std::size_t li = 0; li < spec.layers.size(); ++li) {
                const auto k = spec.layers[li].kind;
                if (k == LayerKind::LstmUni || k == LayerKind::LstmBi) {
                    lstm_layers.push_back(li);
                    space.dims.push_back({"units_layer" + std::to_string(li), DimKind::Integer,
                                          static_cast<double>(cfg.tune.units_low),
                                          static_cast<double>(cfg.tune.units_high),
                                          {}});
                }
            }
        }

        auto spec_at = [&](const Vector& unit) {
            ModelSpec s = spec;
            const Vector vals = native_values(space, unit);
            for (std::size_t d = 0; d < lstm_layers.size(); ++d)
                s.layers[lstm_layers[d]].hidden_units =
                    static_cast<std::size_t>(vals[1 + d]);
            return s;
        };

        auto objective = [&](const Vector& unit) {
            const Vector vals = native_values(space, unit);
            TrainConfig tc = train_cfg;
            tc.learning_rate = vals[0];
            tc.epochs = cfg.tune.epochs;
            Model trial = init_model(spec_at(unit), init_seed(cfg.seed), cfg.model.init);
            try {
                fit(trial, pd.splits.train, pd.splits.val, tc);
            } catch (const NumericError&) {
                return std::numeric_limits<double>::quiet_NaN();  // diverged trial
            }
            const Vector probs = predict_probs(trial, pd.splits.val, tc.threads);
            const std::vector<int> y = labels_of(pd.splits.val);
            std::size_t correct = 0;
            for (std::size_t i = 0; i < probs.size(); ++i)
                if ((probs[i] >= 0.5 ? 1 : 0) == y[i]) ++correct;
            return static_cast<double>(correct) / static_cast<double>(probs.size());
        };

        const TuneResult tuned =
            tune(objective, space, cfg.tune.budget, cfg.tune.init, tune_seed(cfg.seed));

        result.artifacts.tune_trace_csv = (fs::path(out_dir) / "tune_trace.csv").string();
        write_file(result.artifacts.tune_trace_csv, trace_to_csv(space, tuned.trace));

        const Vector best_vals = native_values(space, tuned.best_point);
        train_cfg.learning_rate = best_vals[0];
        spec = spec_at(tuned.best_point);

        ordered_json best;
        best["train"] = {{"learning_rate", train_cfg.learning_rate}};
        best["model"] = {{"spec", ordered_json::parse(spec_to_json(spec))}};
        best["objective"] = tuned.best_objective;
        result.artifacts.best_config_json = (fs::path(out_dir) / "best_config.json").string();
        write_file(result.artifacts.best_config_json, best.dump(2) + "\n");
    }

    Model model = init_model(spec, init_seed(cfg.seed), cfg.model.init);
    result.history = fit(model, pd.splits.train, pd.splits.val, train_cfg);

    result.artifacts.history_csv = (fs::path(out_dir) / "train_history.csv").string();
    write_file(result.artifacts.history_csv, history_to_csv(result.history));

    result.artifacts.model_file = (fs::path(out_dir) / "model.stm").string();
    save_model(model, pd.standardizer, result.artifacts.model_file);

    // Stage: evaluate on the test split.
    const Vector scores = predict_probs(model, pd.splits.test, train_cfg.threads);
    result.report = evaluate_scores(scores, labels_of(pd.splits.test), cfg.eval_threshold);
    result.artifacts.report_json = (fs::path(out_dir) / "eval_report.json").string();
    write_file(result.artifacts.report_json, eval_report_to_json(result.report));
    return result;
}

ExperimentResult run_experiment(const std::string& config_path,
                                std::optional<std::uint64_t> seed_override) {
    std::ifstream f(config_path, std::ios::binary);
    if (!f) throw ConfigError("config", "cannot open config file: " + config_path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return run_experiment_json(text, fs::path(config_path).parent_path().string(),
                               seed_override);
}

int exit_code_for_current_exception() {
    try {
        throw;
    } catch (const ConfigError&) {
        return 2;
    } catch (const std::invalid_argument&) {
        return 2;
    } catch (const NumericError&) {
        return 4;
    } catch (const SchemaError&) {
        return 3;
    } catch (const ParseError&) {
        return 3;
    } catch (const FormatError&) {
        return 3;
    } catch (const ValidationError&) {
        return 3;
    } catch (const CapacityError&) {
        return 3;
    } catch (const CorruptFileError&) {
        return 3;
    } catch (const VersionError&) {
        return 3;
    } catch (const UndefinedMetricError&) {
        return 3;
    } catch (const IoError&) {
        return 3;
    } catch (const std::exception&) {
        return 1;
    }
}

}  // namespace stallpred
