#pragma once

#include "takres/takens_analysis.hpp"

#include <vector>

namespace takres {

/// Delayed-readout hybrid network: the state evolution is the plain random
/// recurrent network; the output layer sees each state concatenated with its
/// tau_T-delayed copy (one virtual node per real node).
struct TrrnnSpec {
    long tau_T = -12;  // negative = past states; 0 allowed as degenerate case
    Reservoir base;
};

/// T x 2m feature rows: row n = (x_{n+1}, x_{n+1+tau_T}). Rows are emitted
/// only once |tau_T| past states exist (washout must cover the delay). The
/// trailing depth+1 raw states are kept for closed-loop continuation.
struct AugmentedStateMatrix {
    Eigen::MatrixXd X;
    std::vector<Eigen::VectorXd> tail_states;  // oldest..newest, depth+1 entries
    long depth = 0;                            // |tau_T|, ring-buffer size
    long washout = 0;
};

/// Teacher-forced evolution identical to reservoir drive; only the emitted
/// feature rows differ (current state paired with the delayed one).
AugmentedStateMatrix drive_augmented(const TrrnnSpec& spec, const TimeSeries& input,
                                     long washout, double state_noise = 0.0,
                                     std::uint64_t noise_seed = 0);

/// Free run of the hybrid readout: a ring buffer supplies the delayed half of
/// the feature vector; the output feeds back as the next input. `history`
/// holds the depth+1 most recent teacher-forced states (oldest first);
/// `y_start` is emitted first and fed back.
ClosedLoopResult trrnn_predict_closed_loop(const TrrnnSpec& spec,
                                           const ReadoutModel& model,
                                           const std::vector<Eigen::VectorXd>& history,
                                           double y_start, long horizon,
                                           double state_noise = 0.0,
                                           std::uint64_t noise_seed = 0);

/// Full train/predict pipeline on a Mackey-Glass task (mirrors
/// run_prediction: one-step-ahead teacher, per-entry training jitter,
/// free-run scoring).
RunResult run_trrnn_prediction(const TrrnnSpec& spec, const MgTask& task,
                               const TrainOptions& opts);

struct DelayScanRow {
    long tau_T = 0;
    EnsembleSummary summary;
    double eps1 = 0.0;  // ensemble means over the augmented columns
    double eps2 = 0.0;
};

/// Ensemble defaults for the delay scan: all noise knobs at zero. With only
/// 350 nodes the regression is far from capacity, so noise regularization is
/// unnecessary, and the scan relies on closed-loop divergence to separate
/// viable delays from unviable ones — noise would blur that separation.
inline EnsembleConfig delay_scan_ensemble_defaults() {
    EnsembleConfig c;
    c.train_noise = 0.0;
    c.entry_noise = 0.0;
    c.loop_noise = 0.0;
    return c;
}

struct DelayScanConfig {
    EnsembleConfig base = delay_scan_ensemble_defaults();
    // m/mu overridden by the members below
    long m = 350;
    double mu = 0.1;
    EmbeddingSpec takens{-12, 4};
    long lag_lo = -60;
    long lag_hi = 60;
    long workers = 0;
};

/// Scan the readout delay tau_T: per value, ensemble prediction metrics of
/// the hybrid readout plus distortion bounds over the 2m augmented columns.
/// The state evolution is delay-independent, so each (network, sequence)
/// pair is driven once and shared across the grid.
std::vector<DelayScanRow> delay_scan(const DelayScanConfig& config,
                                     const std::vector<long>& tau_values,
                                     EpsilonMode mode = EpsilonMode::Aggregate);

} // namespace takres
