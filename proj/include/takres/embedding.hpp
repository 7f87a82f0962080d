#pragma once

#include "takres/time_series.hpp"

#include <optional>
#include <vector>

namespace takres {

/// Takens delay-embedding parameters. tau0 is negative for past lags,
/// matching the sign convention used throughout.
struct EmbeddingSpec {
    long tau0 = -12;
    long M = 4;
};

/// Delay-coordinate matrix: row r is a reconstructed state, newest
/// coordinate first, past coordinates rightward.
struct DelayMatrix {
    Eigen::MatrixXd rows;  // (len - (M-1)*|tau0|) x M
    EmbeddingSpec source_spec;
};

struct NotFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Normalized autocorrelation rho(k), k = 0..max_lag, of the mean-subtracted
/// series with biased normalization; rho(0) = 1.
std::vector<double> acf(const TimeSeries& series, long max_lag);

enum class Tau0Rule { FirstMinimumAbs, FirstZero };

/// Embedding lag from the ACF: -k* at the first local minimum of |rho|
/// (default) or at the first zero crossing.
long select_tau0(const std::vector<double>& acf_values,
                 Tau0Rule rule = Tau0Rule::FirstMinimumAbs);

struct FnnResult {
    std::vector<double> fractions;  // false-neighbor fraction for M = 1..M_max
    std::optional<long> m_min;      // smallest M with fraction < threshold
};

/// False-nearest-neighbor estimate of the minimum embedding dimension.
/// Neighbor search excludes temporally adjacent points within |tau0| samples.
FnnResult false_nearest_neighbors(const TimeSeries& series, long tau0, long m_max,
                                  double r_tol = 10.0,
                                  double fraction_threshold = 0.01);

DelayMatrix delay_embed(const TimeSeries& series, const EmbeddingSpec& spec);

} // namespace takres
