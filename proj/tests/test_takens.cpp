#include "takres/rng.hpp"
#include "takres/signals.hpp"
#include "takres/takens_analysis.hpp"

#include <doctest.h>

#include <cmath>

using namespace takres;

namespace {

Eigen::VectorXd random_vec(long n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd v(n);
    for (long i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
    return v;
}

} // namespace

TEST_CASE("cross-correlation peaks at the imposed shift") {
    const Eigen::VectorXd x = random_vec(2000, 5);
    // y_{n+3} = x_n  =>  the lag-3 coefficient pairs identical samples
    Eigen::VectorXd y = Eigen::VectorXd::Zero(2000);
    y.tail(1997) = x.head(1997);
    const std::vector<double> cc = cross_correlation(x, y, -10, 10);
    long best = -10;
    double best_val = -1.0;
    for (long k = -10; k <= 10; ++k) {
        const double v = std::abs(cc[static_cast<std::size_t>(k + 10)]);
        CHECK(v <= 1.0 + 1e-12);
        if (v > best_val) {
            best_val = v;
            best = k;
        }
    }
    CHECK(best == 3);
    CHECK(best_val > 0.95);
    CHECK_THROWS_AS(cross_correlation(x, y.head(10), -5, 5), ParameterError);
    CHECK_THROWS_AS(cross_correlation(x, y, 5, -5), ParameterError);
    CHECK_THROWS_AS(cross_correlation(x, Eigen::VectorXd::Zero(2000), -5, 5),
                    DegenerateInputError);
}

TEST_CASE("cca_profile recovers per-node shifts, ties break toward zero") {
    const Eigen::VectorXd input = random_vec(1500, 9);
    Eigen::MatrixXd states(1500, 4);
    states.col(0) = input;                       // lag 0
    states.col(1).setZero();
    states.col(1).tail(1495) = input.head(1495); // node sees input 5 steps late
    states.col(2).setZero();
    states.col(2).head(1493) = input.tail(1493); // node anticipates by 7
    states.col(3).setConstant(2.5);              // degenerate
    const CcaProfile p = cca_profile(states, input, -20, 20);
    CHECK(p.best_lag[0] == 0);
    CHECK(p.best_lag[1] == -5);
    CHECK(p.best_lag[2] == 7);
    CHECK(p.flagged[3]);
    CHECK(p.cc_max[3] == 0.0);
    CHECK(p.l_min == -5);
    CHECK(p.l_max == 7);
}

TEST_CASE("cca_profile matches a brute-force recomputation bit-exactly") {
    // small driven network, m <= 10
    const Reservoir res = build_reservoir(8, 1.1, 0.8, 0.2, 21);
    const TimeSeries input = gen_mackey_glass(MGParams{}, 800, MGHistory{}, 4);
    const StateMatrix st = drive(res, input, nullptr, 100);
    const Eigen::VectorXd post = input.values.tail(700);
    const long lo = -30, hi = 30;
    const CcaProfile fast = cca_profile(st.X, post, lo, hi);
    for (long i = 0; i < 8; ++i) {
        const std::vector<double> cc =
            cross_correlation(st.X.col(i), post, lo, hi);
        // same tie-break order as the library: 0, -1, +1, -2, +2, ...
        long best = 0;
        double best_val = -1.0;
        for (long a = 0; a <= 30; ++a) {
            for (long k : {-a, a}) {
                if (k == 0 && a != 0) continue;
                const double v = std::abs(cc[static_cast<std::size_t>(k - lo)]);
                if (v > best_val) {
                    best_val = v;
                    best = k;
                }
            }
        }
        CHECK(fast.best_lag[static_cast<std::size_t>(i)] == best);
        CHECK(fast.cc_max[static_cast<std::size_t>(i)] == best_val);  // bitwise
    }
}

TEST_CASE("window_filter selects lags near window centers, with multiplicity") {
    CcaProfile p;
    p.best_lag = {0, -12, -24, -36, -5, -14};
    p.cc_max = {1, 1, 1, 1, 1, 1};
    p.flagged = {false, false, false, false, false, true};
    const WindowFilterSpec spec{-12, 3, 4};
    const std::vector<long> sel = window_filter(p, spec);
    // windows at 0, -12, -24, -36 with half-width 3: nodes 0..3; node 4
    // (lag -5) misses every window; node 5 is flagged
    REQUIRE(sel.size() == 4);
    CHECK(sel == std::vector<long>{0, 1, 2, 3});

    // a wide delta makes windows overlap: lag -12 falls in both the window
    // at 0 and the window at -12, so the node is selected twice
    const std::vector<long> wide = window_filter(p, {-12, 12, 2});
    long count1 = 0;
    for (long i : wide) count1 += i == 1;
    CHECK(count1 == 2);
    CHECK_THROWS_AS(window_filter(p, {-12, -1, 4}), ParameterError);
}

TEST_CASE("window_filter selection grows monotonically with delta") {
    const Reservoir res = build_reservoir(40, 1.1, 0.8, 0.2, 13);
    const TimeSeries input = gen_mackey_glass(MGParams{}, 1200, MGHistory{}, 6);
    const StateMatrix st = drive(res, input, nullptr, 200);
    const CcaProfile p = cca_profile(st.X, input.values.tail(1000), -60, 60);
    std::size_t prev = 0;
    for (long delta = 0; delta <= 6; ++delta) {
        const std::size_t n = window_filter(p, {-12, delta, 4}).size();
        CHECK(n >= prev);
        prev = n;
    }
}

TEST_CASE("epsilon bounds sandwich every consecutive pair") {
    // states whose columns are distinct-lag copies of the input: the lag
    // representatives are the columns themselves, so the ratios can be
    // recomputed directly in the test
    const Eigen::VectorXd input = random_vec(600, 31);
    const long n = 580;
    Eigen::MatrixXd states(n, 3);
    const Eigen::VectorXd base = input.tail(n);
    states.col(0) = base;                          // lag 0
    states.col(1) = input.segment(20 - 4, n);      // lag -4
    states.col(2) = input.segment(20 - 9, n);      // lag -9
    TimeSeries post;
    post.values = base;
    const EmbeddingSpec spec{-3, 4};
    const DelayMatrix embed = delay_embed(post, spec);
    const long trim = (spec.M - 1) * 3;
    const Eigen::MatrixXd phi = states.bottomRows(n - trim);
    const CcaProfile profile = cca_profile(states, base, -15, 15);
    REQUIRE(profile.best_lag[0] == 0);
    REQUIRE(profile.best_lag[1] == -4);
    REQUIRE(profile.best_lag[2] == -9);

    const EpsilonBounds eb =
        epsilon_bounds(embed, phi, profile, EpsilonMode::PerPairRatio);
    CHECK(eb.h == 3);
    const double jl = std::sqrt(static_cast<double>(spec.M) / 3.0);
    for (long r = 0; r + 1 < phi.rows(); ++r) {
        const double num = (phi.row(r + 1) - phi.row(r)).norm();
        const double den = (embed.rows.row(r + 1) - embed.rows.row(r)).norm();
        REQUIRE(den > 0.0);
        const double ratio = jl * num / den;
        CHECK(ratio >= eb.eps_min - 1e-12);
        CHECK(ratio <= eb.eps_max + 1e-12);
    }
    CHECK(eb.eps1 == doctest::Approx(1.0 - eb.eps_min).epsilon(1e-15));
    CHECK(eb.eps2 == doctest::Approx(eb.eps_max - 1.0).epsilon(1e-15));

    // aggregate mode emits valid bounds on the same data
    const EpsilonBounds agg =
        epsilon_bounds(embed, phi, profile, EpsilonMode::Aggregate);
    CHECK(agg.eps_min <= agg.eps_max);
    CHECK(agg.h == 3);

    CHECK_THROWS_AS(epsilon_bounds(embed, phi.topRows(10), profile),
                    ParameterError);
}

TEST_CASE("tau_scan smoke: rows align with the requested grid") {
    ScanConfig config;
    config.base.m = 50;
    config.base.train_len = 900;
    config.base.washout = 300;
    config.base.horizon = 30;
    config.base.n_networks = 2;
    config.base.n_sequences = 2;
    const TauScanResult res = tau_scan(config, {-12, -3});
    REQUIRE(res.rows.size() == 2);
    CHECK(res.rows[0].tau0_net == -12);
    CHECK(res.rows[1].tau0_net == -3);
    CHECK(res.baseline.runs.size() == 4);
    for (const auto& row : res.rows) {
        CHECK(row.summary.runs.size() == 4);
        CHECK(row.mean_nodes >= 0.0);
        CHECK(std::isfinite(row.summary.mean_nmse_all));
    }
}

TEST_CASE("mu_scan smoke: per-mu summaries and distortion bounds") {
    ScanConfig config;
    config.base.m = 50;
    config.base.train_len = 900;
    config.base.washout = 300;
    config.base.horizon = 30;
    config.base.n_networks = 2;
    config.base.n_sequences = 2;
    const std::vector<MuScanRow> rows = mu_scan(config, {0.5, 1.1});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].mu == 0.5);
    CHECK(rows[1].mu == 1.1);
    for (const auto& row : rows) {
        CHECK(row.summary.runs.size() == 4);
        CHECK(std::isfinite(row.eps1));
        CHECK(std::isfinite(row.eps2));
    }
}
