// stallpred: stall-warning prediction pipeline driver.
//
// Subcommands: generate, prepare, train, tune, evaluate, predict, run.
// Every run is reproducible from its config file and seed; --seed overrides
// the config seed. Exit codes: 0 ok, 2 config error, 3 data error,
// 4 numeric error, 1 anything else.

#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stallpred/errors.hpp"
#include "stallpred/experiment.hpp"
#include "stallpred/fit.hpp"
#include "stallpred/flight_csv.hpp"
#include "stallpred/metrics.hpp"
#include "stallpred/model_file.hpp"
#include "stallpred/text.hpp"

namespace fs = std::filesystem;
using namespace stallpred;

namespace {

std::string read_file(const std::string& path, const char* what) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError(what, std::string("cannot open ") + what + " file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    f << content;
}

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
};

std::optional<std::uint64_t> seed_opt(bool seed_set, std::uint64_t seed) {
    if (seed_set) return seed;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// generate: synthetic corpus as flight CSVs plus a manifest
// ---------------------------------------------------------------------------

int cmd_generate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 std::string out_dir) {
    ExperimentConfig cfg = parse_experiment_config(read_file(config_path, "config"));
    if (seed) cfg.seed = *seed;
    if (!cfg.corpus_present)
        throw ConfigError("corpus", "generate requires a 'corpus' section in the config");
    cfg.corpus.seed = corpus_seed(cfg.seed);

    if (out_dir.empty())
        out_dir = (fs::path(fs::path(config_path).parent_path()) / cfg.output_dir / "corpus")
                      .string();
    fs::create_directories(out_dir);

    const std::vector<TimeSeries> corpus = generate_corpus(cfg.corpus);
    nlohmann::ordered_json manifest;
    manifest["seed"] = cfg.seed;
    manifest["flights"] = nlohmann::ordered_json::array();
    for (const auto& ts : corpus) {
        const std::string file = ts.id + ".csv";
        write_flight_csv(ts, (fs::path(out_dir) / file).string());
        manifest["flights"].push_back({{"id", ts.id},
                                       {"file", file},
                                       {"length_s", ts.length()},
                                       {"warnings", [&] {
                                            std::size_t n = 0;
                                            for (auto w : ts.stall_warning) n += w;
                                            return n;
                                        }()}});
    }
    write_file((fs::path(out_dir) / "corpus_manifest.json").string(), manifest.dump(2) + "\n");
    std::cout << "wrote " << corpus.size() << " flights to " << out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// prepare: corpus -> windowed, balanced, standardized dataset container
// ---------------------------------------------------------------------------

int cmd_prepare(const std::string& config_path, std::optional<std::uint64_t> seed,
                std::string corpus_dir, std::string out_file) {
    ExperimentConfig cfg = parse_experiment_config(read_file(config_path, "config"));
    if (seed) cfg.seed = *seed;
    if (!corpus_dir.empty()) {
        cfg.corpus_dir = corpus_dir;
        cfg.corpus_present = false;
    }
    cfg.corpus.seed = corpus_seed(cfg.seed);

    const std::string base = fs::path(config_path).parent_path().string();
    std::vector<TimeSeries> corpus;
    if (!cfg.corpus_dir.empty()) {
        fs::path dir(cfg.corpus_dir);
        if (dir.is_relative()) dir = fs::path(base) / dir;
        std::vector<std::string> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".csv")
                files.push_back(e.path().string());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw IoError("corpus_dir has no .csv files: " + dir.string());
        for (const auto& f : files) {
            TimeSeries ts = parse_flight_csv(f);
            ts.id = fs::path(f).stem().string();
            corpus.push_back(std::move(ts));
        }
    } else if (cfg.corpus_present) {
        corpus = generate_corpus(cfg.corpus);
    } else {
        throw ConfigError("corpus_dir", "prepare needs 'corpus' or 'corpus_dir'");
    }

    Dataset pool = assemble_windows(corpus, cfg.data.window_len, cfg.data.horizon);
    Splits splits = balance_and_split(pool, cfg.data.counts, split_seed(cfg.seed),
                                      cfg.data.segment_exclusive, cfg.data.window_len,
                                      cfg.data.horizon);
    // Retention report: how much of the raw pool the balanced set keeps.
    const std::size_t kept = splits.train.size() + splits.val.size() + splits.test.size();
    std::cerr << "pool " << pool.size() << " windows, kept " << kept << " ("
              << (pool.size() ? 100.0 * static_cast<double>(kept) /
                                    static_cast<double>(pool.size())
                              : 0.0)
              << "%)\n";

    PreparedDataset pd;
    pd.standardizer = fit_standardizer(splits.train);
    pd.splits.train = apply_standardizer(pd.standardizer, splits.train);
    pd.splits.val = apply_standardizer(pd.standardizer, splits.val);
    pd.splits.test = apply_standardizer(pd.standardizer, splits.test);
    pd.seed = cfg.seed;
    pd.window_len = cfg.data.window_len;
    pd.horizon = cfg.data.horizon;
    for (const auto& ts : corpus) pd.series_ids.push_back(ts.id);

    if (out_file.empty())
        out_file = (fs::path(base) / cfg.output_dir / "dataset.spds").string();
    fs::create_directories(fs::path(out_file).parent_path());
    save_dataset(pd, out_file);
    std::cout << "wrote dataset (" << pd.splits.train.size() << "/" << pd.splits.val.size()
              << "/" << pd.splits.test.size() << ") to " << out_file << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train / tune / run: thin wrappers over run_experiment
// ---------------------------------------------------------------------------

int run_pipeline(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& dataset_override, int tune_mode /*-1 strip, 1 require, 0 as-is*/) {
    std::string text = read_file(config_path, "config");
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError("<root>", std::string("config: not valid JSON: ") + e.what());
    }
    if (!dataset_override.empty()) {
        j["dataset_path"] = dataset_override;
        j.erase("corpus");
        j.erase("corpus_dir");
    }
    if (tune_mode < 0) j.erase("tune");
    if (tune_mode > 0 && !j.contains("tune"))
        throw ConfigError("tune", "tune requires a 'tune' section in the config");

    const ExperimentResult result = run_experiment_json(
        j.dump(), fs::path(config_path).parent_path().string(), seed);
    std::cout << "accuracy " << fmt_double(result.report.metrics.accuracy) << ", auc "
              << fmt_double(result.report.auc) << "\n"
              << "artifacts in " << fs::path(result.artifacts.report_json).parent_path().string()
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate: score a stored model against a prepared dataset split
// ---------------------------------------------------------------------------

int cmd_evaluate(const std::string& model_path, const std::string& dataset_path,
                 const std::string& split, double threshold, const std::string& out_file,
                 const std::string& roc_file) {
    auto [model, standardizer] = load_model(model_path);
    (void)standardizer;  // dataset containers are already standardized
    const PreparedDataset pd = load_dataset(dataset_path);
    const Dataset* ds = &pd.splits.test;
    if (split == "train")
        ds = &pd.splits.train;
    else if (split == "val")
        ds = &pd.splits.val;
    else if (split != "test")
        throw ConfigError("split", "evaluate: split must be train|val|test");

    const Vector scores = predict_probs(model, *ds);
    const EvalReport report = evaluate_scores(scores, labels_of(*ds), threshold);
    const std::string json = eval_report_to_json(report);
    if (out_file.empty())
        std::cout << json;
    else
        write_file(out_file, json);
    if (!roc_file.empty())
        write_file(roc_file, roc_curve_to_csv(roc_curve(scores, labels_of(*ds))));
    return 0;
}

// ---------------------------------------------------------------------------
// predict: per-timestep stall probability from raw flight rows
// ---------------------------------------------------------------------------

// Incremental reader for the flight CSV schema; stall_warning is optional
// here since prediction inputs may predate any warning.
class RowStream {
public:
    explicit RowStream(const std::string& header) {
        std::stringstream ss(header);
        std::string name;
        std::size_t col = 0;
        cols_.assign(kNumFlightParams, -1);
        while (std::getline(ss, name, ',')) {
            while (!name.empty() && (name.back() == '\r' || name.back() == ' '))
                name.pop_back();
            for (std::size_t f = 0; f < kNumFlightParams; ++f)
                if (name == kFlightParamNames[f]) cols_[f] = static_cast<int>(col);
            ++col;
        }
        n_cols_ = col;
        for (std::size_t f = 0; f < kNumFlightParams; ++f)
            if (cols_[f] < 0)
                throw SchemaError(std::string("predict: missing column '") +
                                  kFlightParamNames[f] + "'");
    }

    // Returns the parsed 16-vector for one data row.
    Vector parse_row(const std::string& line, std::size_t row_no) const {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != n_cols_)
            throw FormatError("predict: row " + std::to_string(row_no) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(n_cols_));
        Vector v(kNumFlightParams);
        for (std::size_t f = 0; f < kNumFlightParams; ++f) {
            try {
                v[f] = std::stod(cells[static_cast<std::size_t>(cols_[f])]);
            } catch (const std::exception&) {
                throw ParseError("predict: non-numeric cell at row " + std::to_string(row_no));
            }
        }
        return v;
    }

private:
    std::vector<int> cols_;
    std::size_t n_cols_ = 0;
};

int cmd_predict(const std::string& model_path, const std::string& input_file, bool follow,
                double threshold) {
    auto [model, standardizer] = load_model(model_path);
    const std::size_t window_len = model.spec.window_len;

    std::ifstream file_in;
    std::istream* in = &std::cin;
    if (!follow) {
        if (input_file.empty())
            throw ConfigError("input", "predict needs --input FILE or --follow");
        file_in.open(input_file, std::ios::binary);
        if (!file_in) throw IoError("predict: cannot open " + input_file);
        in = &file_in;
    }

    std::string line;
    if (!std::getline(*in, line)) throw FormatError("predict: empty input");
    RowStream rows(line);

    std::deque<Vector> window;
    std::size_t t = 0;
    std::size_t row_no = 1;
    while (std::getline(*in, line)) {
        ++row_no;
        if (line.empty()) continue;
        window.push_back(rows.parse_row(line, row_no));
        if (window.size() > window_len) window.pop_front();
        if (window.size() == window_len) {
            Matrix x(kNumFlightParams, window_len);
            for (std::size_t k = 0; k < window_len; ++k)
                for (std::size_t f = 0; f < kNumFlightParams; ++f) x(f, k) = window[k][f];
            standardize_window(standardizer, x);
            const double p = model_forward(model, x, RunMode::Infer);
            std::cout << "{\"t\":" << t << ",\"probability\":" << fmt_double(p)
                      << ",\"alarm\":" << (p >= threshold ? "true" : "false") << "}\n";
            if (follow) std::cout.flush();
        }
        ++t;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LSTM stall-warning prediction pipeline"};
    app.require_subcommand(1);

    std::string config_path, model_path, dataset_path, input_file, out_path, roc_file;
    std::string corpus_dir, split = "test";
    std::uint64_t seed = 0;
    bool seed_set = false, follow = false;
    double threshold = 0.5;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { seed_set = true; });
    };

    auto* gen = app.add_subcommand("generate", "write a synthetic flight corpus as CSVs");
    gen->add_option("--config", config_path, "experiment config JSON")->required();
    gen->add_option("--out", out_path, "corpus output directory");
    add_seed(gen);

    auto* prep = app.add_subcommand("prepare", "window, balance and standardize a corpus");
    prep->add_option("--config", config_path, "experiment config JSON")->required();
    prep->add_option("--corpus-dir", corpus_dir, "directory of flight CSVs");
    prep->add_option("--out", out_path, "dataset container path");
    add_seed(prep);

    auto* train = app.add_subcommand("train", "train a model (ignores any tune section)");
    train->add_option("--config", config_path, "experiment config JSON")->required();
    train->add_option("--dataset", dataset_path, "prepared dataset container");
    add_seed(train);

    auto* tune = app.add_subcommand("tune", "Bayesian hyperparameter search, then train");
    tune->add_option("--config", config_path, "experiment config JSON")->required();
    tune->add_option("--dataset", dataset_path, "prepared dataset container");
    add_seed(tune);

    auto* run = app.add_subcommand("run", "full experiment as configured");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    add_seed(run);

    auto* eval = app.add_subcommand("evaluate", "score a stored model on a dataset split");
    eval->add_option("--model", model_path, "model file")->required();
    eval->add_option("--dataset", dataset_path, "prepared dataset container")->required();
    eval->add_option("--split", split, "train|val|test (default test)");
    eval->add_option("--threshold", threshold, "decision threshold (default 0.5)");
    eval->add_option("--out", out_path, "report JSON path (stdout otherwise)");
    eval->add_option("--roc", roc_file, "ROC curve CSV path");

    auto* pred = app.add_subcommand("predict", "per-timestep stall probability");
    pred->add_option("--model", model_path, "model file")->required();
    pred->add_option("--input", input_file, "flight CSV (batch mode)");
    pred->add_flag("--follow", follow, "stream rows from standard input");
    pred->add_option("--threshold", threshold, "alarm threshold (default 0.5)");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto seed_override = seed_opt(seed_set, seed);
        if (gen->parsed()) return cmd_generate(config_path, seed_override, out_path);
        if (prep->parsed()) return cmd_prepare(config_path, seed_override, corpus_dir, out_path);
        if (train->parsed()) return run_pipeline(config_path, seed_override, dataset_path, -1);
        if (tune->parsed()) return run_pipeline(config_path, seed_override, dataset_path, 1);
        if (run->parsed()) return run_pipeline(config_path, seed_override, "", 0);
        if (eval->parsed())
            return cmd_evaluate(model_path, dataset_path, split, threshold, out_path, roc_file);
        if (pred->parsed()) return cmd_predict(model_path, input_file, follow, threshold);
    } catch (const std::exception& e) {
        std::cerr << "stallpred: error: " << e.what() << "\n";
        return exit_code_for_current_exception();
    }
    return 0;
}
