#include "takres/embedding.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace takres {

std::vector<double> acf(const TimeSeries& series, long max_lag) {
    const long n = series.size();
    if (max_lag >= n / 2) throw ParameterError("acf: max_lag must be < len/2");
    const double mean = series.values.mean();
    Eigen::VectorXd x = series.values.array() - mean;
    const double denom = x.squaredNorm();
    if (denom <= 0.0) throw DegenerateInputError("acf: constant series");
    std::vector<double> rho(static_cast<std::size_t>(max_lag) + 1);
    rho[0] = 1.0;
    for (long k = 1; k <= max_lag; ++k)
        rho[static_cast<std::size_t>(k)] =
            x.head(n - k).dot(x.tail(n - k)) / denom;
    return rho;
}

long select_tau0(const std::vector<double>& acf_values, Tau0Rule rule) {
    const long n = static_cast<long>(acf_values.size());
    if (rule == Tau0Rule::FirstZero) {
        for (long k = 1; k < n; ++k) {
            if (acf_values[static_cast<std::size_t>(k)] <= 0.0) return -k;
        }
        throw NotFoundError("select_tau0: no zero crossing within max_lag; increase max_lag");
    }
    for (long k = 1; k + 1 < n; ++k) {
        const double prev = std::abs(acf_values[static_cast<std::size_t>(k - 1)]);
        const double cur = std::abs(acf_values[static_cast<std::size_t>(k)]);
        const double next = std::abs(acf_values[static_cast<std::size_t>(k + 1)]);
        if (prev > cur && cur < next) return -k;
    }
    throw NotFoundError("select_tau0: no local minimum of |ACF| within max_lag; increase max_lag");
}

FnnResult false_nearest_neighbors(const TimeSeries& series, long tau0, long m_max,
                                  double r_tol, double fraction_threshold) {
    if (m_max < 2) throw ParameterError("false_nearest_neighbors: M_max must be >= 2");
    const long lag = std::abs(tau0);
    if (lag == 0) throw ParameterError("false_nearest_neighbors: tau0 must be nonzero");
    const long n = series.size();
    const double* y = series.values.data();

    FnnResult result;
    for (long m = 1; m <= m_max; ++m) {
        // points valid in the (m+1)-dimensional embedding
        const long n_pts = n - m * lag;
        if (n_pts < 2)
            throw ParameterError("false_nearest_neighbors: series too short for M_max=" +
                                 std::to_string(m_max));
        long n_false = 0;
        for (long i = 0; i < n_pts; ++i) {
            double best = std::numeric_limits<double>::infinity();
            long best_j = -1;
            for (long j = 0; j < n_pts; ++j) {
                if (std::abs(i - j) <= lag) continue;  // Theiler window
                double d2 = 0.0;
                for (long c = 0; c < m; ++c) {
                    const double diff = y[i + c * lag] - y[j + c * lag];
                    d2 += diff * diff;
                }
                if (d2 < best) {
                    best = d2;
                    best_j = j;
                }
            }
            if (best_j < 0) continue;
            const double dist = std::sqrt(best);
            const double extra = std::abs(y[i + m * lag] - y[best_j + m * lag]);
            if (extra > r_tol * dist) ++n_false;
        }
        result.fractions.push_back(static_cast<double>(n_false) /
                                   static_cast<double>(n_pts));
        if (!result.m_min && result.fractions.back() < fraction_threshold)
            result.m_min = m;
    }
    return result;
}

DelayMatrix delay_embed(const TimeSeries& series, const EmbeddingSpec& spec) {
    if (spec.tau0 == 0) throw ParameterError("delay_embed: tau0 must be nonzero");
    if (spec.M < 1) throw ParameterError("delay_embed: M must be >= 1");
    const long lag = std::abs(spec.tau0);
    const long n = series.size();
    const long n_rows = n - (spec.M - 1) * lag;
    if (n_rows < 1) throw ParameterError("delay_embed: series too short for spec");

    // Newest coordinate first; for a negative lag, row r describes the state
    // whose current sample sits at index r + (M-1)*|tau0|.
    const long base = spec.tau0 < 0 ? (spec.M - 1) * lag : 0;
    DelayMatrix out;
    out.source_spec = spec;
    out.rows.resize(n_rows, spec.M);
    for (long r = 0; r < n_rows; ++r)
        for (long c = 0; c < spec.M; ++c)
            out.rows(r, c) = series.values[base + r + c * spec.tau0];
    return out;
}

} // namespace takres
