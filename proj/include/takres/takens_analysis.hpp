#pragma once

#include "takres/embedding.hpp"
#include "takres/reservoir.hpp"

#include <vector>

namespace takres {

/// Per-node cross-correlation summary: the lag of the maximum |CC| with the
/// input and that maximum. Nodes interpreted as delay coordinates.
struct CcaProfile {
    std::vector<long> best_lag;
    std::vector<double> cc_max;
    std::vector<bool> flagged;  // constant node column, lag undefined
    long l_min = 0;             // extreme lags over non-flagged nodes
    long l_max = 0;
};

/// Readout filter: windows of half-width delta centered at integer multiples
/// n * tau0_net, n in {0..M-1} — the present plus M-1 windows stepping into
/// the past (tau0_net < 0), mirroring the Takens delay coordinates.
struct WindowFilterSpec {
    long tau0_net = -12;
    long delta = 3;
    long M = 4;
};

/// Empirical distortion limits of interstate distances under the network's
/// random projection of the Takens-embedded input.
struct EpsilonBounds {
    double eps1 = 0.0;     // 1 - eps_min
    double eps2 = 0.0;     // eps_max - 1
    double eps_min = 0.0;  // raw lower ratio limit
    double eps_max = 0.0;  // raw upper ratio limit
    long h = 0;  // projected dimensionality: distinct lags represented
};

enum class EpsilonMode {
    /// Componentwise min/max numerators over all consecutive pairs, divided
    /// by the time-mean Takens interstate distance (scalar bounds).
    Aggregate,
    /// Min/max over pairs of the ratio of true distances.
    PerPairRatio,
};

/// Normalized cross-correlation of x against y over [lag_lo, lag_hi].
/// Lag k pairs x_n with y_{n+k}; negative lag means x reflects past input.
/// Both series are mean-subtracted and the sum is normalized by
/// len * sd(x) * sd(y) (biased, so |CC| <= 1).
std::vector<double> cross_correlation(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& y, long lag_lo,
                                      long lag_hi);

/// Per-node best lag and |CC| maximum. Ties break toward the smallest |lag|,
/// then toward the negative lag. Constant columns get cc_max = 0, lag 0,
/// and are flagged.
CcaProfile cca_profile(const Eigen::MatrixXd& states, const Eigen::VectorXd& input,
                       long lag_lo = -60, long lag_hi = 60);

/// Node indices (with multiplicity: one entry per window that contains the
/// node's lag) selected by the CCA window filter.
std::vector<long> window_filter(const CcaProfile& profile,
                                const WindowFilterSpec& spec);

/// Distortion bounds of the projection phi: Takens rows and phi rows must be
/// aligned in time (equal row count). phi has one coordinate per distinct lag
/// in [l_min, l_max] (the node with the largest |CC| at that lag), ordered by
/// lag; ratios carry the sqrt(M/h) dimensionality scale of random-projection
/// distance comparisons.
EpsilonBounds epsilon_bounds(const DelayMatrix& input_embed,
                             const Eigen::MatrixXd& states,
                             const CcaProfile& profile,
                             EpsilonMode mode = EpsilonMode::Aggregate);

struct ScanConfig {
    EnsembleConfig base;
    EmbeddingSpec takens{-12, 4};
    long lag_lo = -60;
    long lag_hi = 60;
    long delta = 3;     // CCA window half-width
    long windows_M = 4; // window index bound, from the FNN dimension
    long workers = 0;
};

struct TauScanRow {
    long tau0_net = 0;
    EnsembleSummary summary;
    double mean_nodes = 0.0;  // selected columns (with multiplicity)
};

struct TauScanResult {
    std::vector<TauScanRow> rows;
    EnsembleSummary baseline;  // unfiltered readout
};

/// Scan the CCA window position tau0_net; the readout is trained only on
/// filtered node columns, the state evolution always uses all nodes.
TauScanResult tau_scan(const ScanConfig& config, std::vector<long> tau_values);

struct MuScanRow {
    double mu = 0.0;
    EnsembleSummary summary;
    double eps1 = 0.0;  // ensemble means
    double eps2 = 0.0;
};

/// Scan the bifurcation parameter mu: per value, ensemble prediction metrics
/// of the window-filtered readout (tau0_net from config.takens) plus
/// ensemble-averaged distortion bounds.
std::vector<MuScanRow> mu_scan(const ScanConfig& config,
                               const std::vector<double>& mu_values,
                               EpsilonMode mode = EpsilonMode::Aggregate);

} // namespace takres
