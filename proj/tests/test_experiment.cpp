#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stallpred/dataset_file.hpp"
#include "stallpred/errors.hpp"
#include "stallpred/experiment.hpp"
#include "stallpred/flight_csv.hpp"

using namespace stallpred;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("stallpred_exp_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Small but complete pipeline config: 6 gradual + 2 cruise flights cover
// 40/40 + 10+10 split quotas with a micro model.
std::string small_config(const std::string& out_dir, bool with_tune = false) {
    std::string cfg = R"({
  "seed": 21,
  "output_dir": ")" + out_dir + R"(",
  "corpus": {"gradual_flights": 8, "abrupt_flights": 0, "cruise_flights": 2, "duration_s": 150},
  "data": {"train_pos": 40, "train_neg": 40, "val_each": 10, "test_each": 10},
  "model": {"spec": {"input_features": 16, "window_len": 10, "layers": [
      {"kind": "lstm", "units": 6}, {"kind": "dense", "units": 4}, {"kind": "output_sigmoid"}]}},
  "train": {"learning_rate": 0.003, "epochs": 3, "batch_size": 16, "threads": 1})";
    if (with_tune)
        cfg += R"(,
  "tune": {"budget": 4, "init": 2, "epochs": 1})";
    cfg += "\n}\n";
    return cfg;
}

int run_cli(const std::string& args, std::string* stdout_text = nullptr) {
    const std::string cmd = std::string(STALLPRED_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[512];
    while (std::fgets(buf, sizeof(buf), pipe)) out += buf;
    const int status = ::pclose(pipe);
    if (stdout_text) *stdout_text = out;
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config: missing data source names the key") {
    try {
        parse_experiment_config(R"({"seed": 1})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key == "dataset_path");
        CHECK(std::string(e.what()).find("dataset_path") != std::string::npos);
    }
}

TEST_CASE("config: invalid JSON and bad value types") {
    CHECK_THROWS_AS(parse_experiment_config("{nope"), ConfigError);
    try {
        parse_experiment_config(R"({"corpus": {}, "train": {"epochs": "ten"}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key == "epochs");
    }
}

TEST_CASE("config: defaults fill in and the echo is stable") {
    ExperimentConfig cfg = parse_experiment_config(R"({"corpus": {"gradual_flights": 3}})");
    CHECK(cfg.seed == 0);
    CHECK(cfg.data.counts.train_pos == 1020);
    CHECK(cfg.data.counts.val_each == 150);
    CHECK(cfg.train.epochs == 100);
    CHECK(cfg.train.learning_rate == 0.001);
    CHECK(cfg.train.batch_size == 32);
    CHECK(cfg.eval_threshold == 0.5);
    CHECK(cfg.data.segment_exclusive);

    const std::string echo = resolved_config_json(cfg);
    ExperimentConfig back = parse_experiment_config(echo);
    CHECK(resolved_config_json(back) == echo);
}

TEST_CASE("run_experiment_json: end-to-end artifacts") {
    TempDir dir;
    const ExperimentResult r = run_experiment_json(small_config("run1"), dir.path.string());

    CHECK(fs::exists(r.artifacts.resolved_config));
    CHECK(fs::exists(r.artifacts.model_file));
    CHECK(fs::exists(r.artifacts.history_csv));
    CHECK(fs::exists(r.artifacts.report_json));
    CHECK(r.history.epochs.size() == 3);
    CHECK(r.report.cm.total() == 20);

    const std::string csv = slurp(r.artifacts.history_csv);
    CHECK(csv.rfind("epoch,train_loss,val_loss,val_accuracy\n", 0) == 0);
    // 3 epochs -> header + 3 rows
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("run_experiment_json: reruns are byte-identical") {
    TempDir dir;
    const ExperimentResult a = run_experiment_json(small_config("a"), dir.path.string());
    const ExperimentResult b = run_experiment_json(small_config("b"), dir.path.string());
    CHECK(slurp(a.artifacts.report_json) == slurp(b.artifacts.report_json));
    CHECK(slurp(a.artifacts.history_csv) == slurp(b.artifacts.history_csv));
    CHECK(slurp(a.artifacts.model_file) == slurp(b.artifacts.model_file));
}

TEST_CASE("run_experiment_json: seed override changes the run") {
    TempDir dir;
    const ExperimentResult a = run_experiment_json(small_config("a"), dir.path.string());
    const ExperimentResult b =
        run_experiment_json(small_config("b"), dir.path.string(), std::uint64_t{99});
    CHECK(slurp(a.artifacts.model_file) != slurp(b.artifacts.model_file));
}

TEST_CASE("run_experiment_json: tuning emits trace and best config") {
    TempDir dir;
    const ExperimentResult r =
        run_experiment_json(small_config("tuned", true), dir.path.string());
    REQUIRE(fs::exists(r.artifacts.tune_trace_csv));
    REQUIRE(fs::exists(r.artifacts.best_config_json));
    const std::string trace = slurp(r.artifacts.tune_trace_csv);
    CHECK(trace.rfind("iter,learning_rate,objective,status\n", 0) == 0);
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 5);  // header + 4 trials
    const std::string best = slurp(r.artifacts.best_config_json);
    CHECK(best.find("learning_rate") != std::string::npos);
    CHECK(best.find("\"model\"") != std::string::npos);
}

TEST_CASE("run_experiment_json: prepared dataset input path") {
    TempDir dir;
    // first produce a dataset container via the corpus path
    const ExperimentResult seeded = run_experiment_json(small_config("seed"), dir.path.string());
    (void)seeded;

    // build a container directly
    ExperimentConfig cfg = parse_experiment_config(small_config("unused"));
    cfg.corpus.seed = corpus_seed(cfg.seed);
    auto corpus = generate_corpus(cfg.corpus);
    Dataset pool = assemble_windows(corpus, 10, 10);
    Splits splits = balance_and_split(pool, cfg.data.counts, split_seed(cfg.seed), true, 10, 10);
    PreparedDataset pd;
    pd.standardizer = fit_standardizer(splits.train);
    pd.splits.train = apply_standardizer(pd.standardizer, splits.train);
    pd.splits.val = apply_standardizer(pd.standardizer, splits.val);
    pd.splits.test = apply_standardizer(pd.standardizer, splits.test);
    for (const auto& ts : corpus) pd.series_ids.push_back(ts.id);
    const std::string ds_path = (dir.path / "data.spds").string();
    save_dataset(pd, ds_path);

    const std::string cfg_text = R"({
      "seed": 21,
      "output_dir": "from_ds",
      "dataset_path": "data.spds",
      "model": {"spec": {"input_features": 16, "window_len": 10, "layers": [
          {"kind": "lstm", "units": 6}, {"kind": "dense", "units": 4}, {"kind": "output_sigmoid"}]}},
      "train": {"learning_rate": 0.003, "epochs": 3, "batch_size": 16}
    })";
    const ExperimentResult r = run_experiment_json(cfg_text, dir.path.string());
    CHECK(r.history.epochs.size() == 3);
    CHECK(r.report.cm.total() == 20);
    // same data and seeds as the corpus-driven run: identical artifacts
    CHECK(slurp(r.artifacts.model_file) == slurp(seeded.artifacts.model_file));
}

TEST_CASE("exit codes map the error taxonomy") {
    auto code_for = [](auto thrower) {
        try {
            thrower();
        } catch (...) {
            return exit_code_for_current_exception();
        }
        return 0;
    };
    CHECK(code_for([] { throw ConfigError("k", "m"); }) == 2);
    CHECK(code_for([] { throw std::invalid_argument("m"); }) == 2);
    CHECK(code_for([] { throw NumericError("m"); }) == 4);
    CHECK(code_for([] { throw SchemaError("m"); }) == 3);
    CHECK(code_for([] { throw ParseError("m"); }) == 3);
    CHECK(code_for([] { throw CapacityError("m", 2); }) == 3);
    CHECK(code_for([] { throw CorruptFileError("m"); }) == 3);
    CHECK(code_for([] { throw VersionError("m"); }) == 3);
    CHECK(code_for([] { throw std::runtime_error("m"); }) == 1);
}

TEST_CASE("cli: run subcommand end to end, rerun byte-identical") {
    TempDir dir;
    const std::string cfg_path = (dir.path / "cfg.json").string();
    {
        std::ofstream f(cfg_path);
        f << small_config("cli_out");
    }
    CHECK(run_cli("run --config " + cfg_path) == 0);
    const std::string report1 = slurp((dir.path / "cli_out/eval_report.json").string());
    const std::string model1 = slurp((dir.path / "cli_out/model.stm").string());
    CHECK(run_cli("run --config " + cfg_path) == 0);
    CHECK(slurp((dir.path / "cli_out/eval_report.json").string()) == report1);
    CHECK(slurp((dir.path / "cli_out/model.stm").string()) == model1);
}

TEST_CASE("cli: config without a data source exits 2") {
    TempDir dir;
    const std::string cfg_path = (dir.path / "bad.json").string();
    {
        std::ofstream f(cfg_path);
        f << R"({"seed": 1, "train": {"epochs": 1}})";
    }
    CHECK(run_cli("run --config " + cfg_path) == 2);
}

TEST_CASE("cli: generate, prepare, evaluate, predict chain") {
    TempDir dir;
    const std::string cfg_path = (dir.path / "cfg.json").string();
    {
        std::ofstream f(cfg_path);
        f << small_config("chain");
    }
    const std::string corpus_dir = (dir.path / "corpus").string();
    CHECK(run_cli("generate --config " + cfg_path + " --out " + corpus_dir) == 0);
    CHECK(fs::exists(corpus_dir + "/gradual_0000.csv"));
    CHECK(fs::exists(corpus_dir + "/corpus_manifest.json"));

    const std::string ds_path = (dir.path / "chain.spds").string();
    CHECK(run_cli("prepare --config " + cfg_path + " --corpus-dir " + corpus_dir + " --out " +
                  ds_path) == 0);
    CHECK(fs::exists(ds_path));

    CHECK(run_cli("train --config " + cfg_path) == 0);
    const std::string model_path = (dir.path / "chain/model.stm").string();
    REQUIRE(fs::exists(model_path));

    std::string report;
    CHECK(run_cli("evaluate --model " + model_path + " --dataset " + ds_path + " --split test",
                  &report) == 0);
    CHECK(report.find("\"accuracy\"") != std::string::npos);
    CHECK(report.find("\"confusion\"") != std::string::npos);

    std::string lines;
    CHECK(run_cli("predict --model " + model_path + " --input " + corpus_dir +
                      "/gradual_0000.csv",
                  &lines) == 0);
    // 150-row flight, 10-step windows: first emission at t = 9
    CHECK(lines.rfind("{\"t\":9,", 0) == 0);
    CHECK(std::count(lines.begin(), lines.end(), '\n') == 150 - 9);
    CHECK(lines.find("\"probability\":") != std::string::npos);
    CHECK(lines.find("\"alarm\":") != std::string::npos);
}

TEST_CASE("cli: predict --follow streams line-delimited JSON") {
    TempDir dir;
    const std::string cfg_path = (dir.path / "cfg.json").string();
    {
        std::ofstream f(cfg_path);
        f << small_config("follow");
    }
    CHECK(run_cli("run --config " + cfg_path) == 0);
    const std::string model_path = (dir.path / "follow/model.stm").string();

    // feed 12 rows of a generated flight through stdin
    FlightProfile p;
    p.kind = ProfileKind::Cruise;
    p.duration_s = 12;
    p.seed = 4;
    TimeSeries ts = generate_flight(p);
    const std::string flight_csv = (dir.path / "stream.csv").string();
    write_flight_csv(ts, flight_csv);

    std::string out;
    const std::string cmd = std::string("cat ") + flight_csv + " | " + STALLPRED_CLI_PATH +
                            " predict --model " + model_path + " --follow 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[256];
    while (std::fgets(buf, sizeof(buf), pipe)) out += buf;
    CHECK(WEXITSTATUS(::pclose(pipe)) == 0);
    // 12 rows buffered into 3 emissions (t = 9, 10, 11)
    CHECK(std::count(out.begin(), out.end(), '\n') == 3);
    CHECK(out.rfind("{\"t\":9,", 0) == 0);
}
