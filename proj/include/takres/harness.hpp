#pragma once

#include "takres/control.hpp"

#include <string>
#include <vector>

namespace takres {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kSoftwareVersion = "takres 1.0.0";

/// Ensemble size presets: Desk = 5x5 runs, Paper = 20x20 runs (and the
/// full-length controlled run for the neuron experiments).
enum class Scale { Desk, Paper };

/// Settings for the single-run and scanned hybrid experiments.
struct TrrnnSettings {
    long tau_T = -12;
    long m = 350;
    double mu = 0.1;
};

/// Settings for the closed-loop neuron experiments. The node sweep uses the
/// grids; the single controlled run uses `predictor`.
struct ControlSettings {
    FHNParams fhn = fhn_excitable_preset();
    PredictorSpec predictor{.kind = PredictorKind::Hybrid, .mu = 0.1};
    ControllerSpec controller{.target_isi = 700.0};
    PredictorSpec hybrid_base{.kind = PredictorKind::Hybrid, .mu = 0.1};
    PredictorSpec classic_base{
        .kind = PredictorKind::Classic, .mu = 0.99, .alpha = 0.2};
    std::vector<long> hybrid_nodes = {8, 12, 20, 30};
    std::vector<long> classic_nodes = {12, 30, 60, 120, 200, 340};
    long train_len = 100000;
    long run_len = 1000000;
};

/// Complete, serializable description of one experiment. JSON round-trip via
/// load_config/save_config; the schema is versioned and unknown experiments
/// are rejected at validation time.
struct ExperimentConfig {
    std::string experiment = "predict";
    // predict + base of every ensemble scan (reservoir, lengths, noise, seeds)
    EnsembleConfig ensemble;
    // cross-correlation analysis and window filter
    EmbeddingSpec takens{-12, 4};
    long lag_lo = -60;
    long lag_hi = 60;
    long delta = 3;
    std::vector<long> tau_values;     // scan-tau grid (empty = default)
    std::vector<double> mu_values;    // scan-mu grid (empty = default)
    std::vector<long> delay_values;   // scan-delay grid (empty = default)
    TrrnnSettings trrnn;
    ControlSettings control;
    long workers = 0;
    std::string out_dir = "results";
};

/// Per-experiment defaults (e.g. the delay scan zeroes the noise knobs and
/// uses the 350-node contractive base). Throws ParameterError on an unknown
/// experiment name.
ExperimentConfig default_config(const std::string& experiment);

/// Apply an ensemble-size preset (and, for the control experiments, the
/// matching run length: Desk 1e6, Paper 4e6 samples).
void apply_scale(ExperimentConfig& config, Scale scale);

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);

/// Parse/serialize without touching the filesystem.
ExperimentConfig parse_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& config);

/// 64-bit FNV-1a over the canonical (key-sorted) JSON serialization, as a
/// 16-digit hex string; invariant under field reordering in the source file.
std::string config_hash(const ExperimentConfig& config);

struct RunRecord {
    std::string experiment;
    std::string hash;                // config_hash of the executed config
    std::string started;             // ISO 8601 UTC
    std::string finished;
    std::string version = kSoftwareVersion;
    bool divergence_dominated = false;  // > 90% divergent runs
    std::vector<std::string> files;  // result files written (absolute paths)
    std::string summary_json;        // headline metrics, serialized JSON
};

/// Validate, dispatch to the named experiment, write result CSV/JSON files
/// atomically (write-then-rename) into config.out_dir, and return the record
/// (also persisted as record.json). Result files are a pure function of the
/// config; only record.json carries timestamps.
RunRecord run_experiment(const ExperimentConfig& config);

/// TimeSeries serialization: single-column CSV with header `value`, plus a
/// sidecar JSON (same path + ".json") holding {dt, origin_index} and any
/// extra metadata supplied as serialized JSON.
void write_time_series(const TimeSeries& series, const std::string& csv_path,
                       const std::string& extra_metadata_json = "{}");
TimeSeries read_time_series(const std::string& csv_path);

/// Atomic text-file write: stage to `path.tmp`, then rename over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace takres
