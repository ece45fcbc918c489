#pragma once

#include <optional>
#include <string>

#include "stallpred/dataset_file.hpp"
#include "stallpred/fit.hpp"
#include "stallpred/metrics.hpp"
#include "stallpred/synthgen.hpp"
#include "stallpred/tune.hpp"

namespace stallpred {

// Parsed form of the single JSON experiment config. Every default of the
// other modules is overridable here; one master seed drives all stages
// through fixed derived streams.
struct DataSection {
    std::size_t window_len = 10;
    std::size_t horizon = 10;
    SplitCounts counts;
    bool segment_exclusive = true;
};

struct ModelSection {
    std::string preset = "arch-a";
    std::optional<ModelSpec> custom;  // takes precedence over preset
    InitOptions init;
};

struct TuneSection {
    bool present = false;
    std::size_t budget = 25;
    std::size_t init = 5;
    std::size_t epochs = 15;  // per-trial training epochs
    double lr_low = 1e-5;
    double lr_high = 1e-2;
    bool tune_hidden_units = false;
    std::size_t units_low = 8;
    std::size_t units_high = 256;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    bool corpus_present = false;
    CorpusConfig corpus;       // synthetic corpus (counts + base profile)
    std::string corpus_dir;    // or: directory of flight CSVs
    std::string dataset_path;  // or: prepared dataset container
    DataSection data;
    ModelSection model;
    TrainConfig train;
    TuneSection tune;
    double eval_threshold = 0.5;
};

/// Throws ConfigError naming the offending key.
ExperimentConfig parse_experiment_config(const std::string& json_text);

/// The effective configuration with every default filled in; echoed into the
/// output directory so a run is reproducible from its artifacts alone.
std::string resolved_config_json(const ExperimentConfig& cfg);

ModelSpec model_spec_of(const ModelSection& section, std::size_t features,
                        std::size_t window_len);

struct ExperimentArtifacts {
    std::string resolved_config;
    std::string model_file;
    std::string history_csv;
    std::string report_json;
    std::string tune_trace_csv;    // empty unless tuning ran
    std::string best_config_json;  // empty unless tuning ran
};

struct ExperimentResult {
    EvalReport report;
    TrainHistory history;
    ExperimentArtifacts artifacts;
};

/// End-to-end run: corpus (generated, CSV directory, or prepared file) ->
/// windows -> balanced splits -> standardization -> train or tune+train ->
/// test-set evaluation -> artifacts. Relative paths resolve against
/// base_dir. Fully deterministic per (config, seed).
ExperimentResult run_experiment_json(const std::string& config_text,
                                     const std::string& base_dir,
                                     std::optional<std::uint64_t> seed_override = {});

ExperimentResult run_experiment(const std::string& config_path,
                                std::optional<std::uint64_t> seed_override = {});

/// Maps the in-flight exception to the documented process exit codes:
/// 2 config, 3 data, 4 numeric, 1 anything else.
int exit_code_for_current_exception();

// Fixed seed streams derived from the master seed.
std::uint64_t corpus_seed(std::uint64_t master);
std::uint64_t split_seed(std::uint64_t master);
std::uint64_t init_seed(std::uint64_t master);
std::uint64_t train_seed(std::uint64_t master);
std::uint64_t tune_seed(std::uint64_t master);

}  // namespace stallpred
