#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>

namespace takres {

/// Uniformly sampled scalar sequence. The universal currency between modules.
struct TimeSeries {
    Eigen::VectorXd values;
    double dt = 1.0;
    long origin_index = 0;

    long size() const { return static_cast<long>(values.size()); }
    double operator[](long i) const { return values[i]; }

    TimeSeries segment(long start, long len) const {
        TimeSeries out;
        out.values = values.segment(start, len);
        out.dt = dt;
        out.origin_index = origin_index + start;
        return out;
    }
};

struct DegenerateInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Remove the sample mean; returns the centered series and the removed mean.
inline std::pair<TimeSeries, double> mean_subtract(const TimeSeries& series) {
    if (series.size() == 0) throw ParameterError("mean_subtract: empty series");
    const double mean = series.values.mean();
    TimeSeries out = series;
    out.values.array() -= mean;
    return {std::move(out), mean};
}

} // namespace takres
