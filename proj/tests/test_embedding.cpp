#include "takres/embedding.hpp"
#include "takres/signals.hpp"

#include <doctest.h>

#include <cmath>

using namespace takres;

namespace {

TimeSeries sine_series(long n, double period) {
    TimeSeries ts;
    ts.values.resize(n);
    for (long i = 0; i < n; ++i)
        ts.values[i] = std::sin(2.0 * M_PI * static_cast<double>(i) / period);
    return ts;
}

} // namespace

TEST_CASE("acf basics") {
    const TimeSeries ts = sine_series(4000, 24.0);
    const std::vector<double> rho = acf(ts, 48);
    CHECK(rho[0] == 1.0);
    // a period-24 sine has acf ~ cos(2 pi k / 24): +1 at the period, -1 at
    // the half period
    CHECK(rho[24] == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(rho[12] == doctest::Approx(-1.0).epsilon(1e-2));
    CHECK_THROWS_AS(acf(ts, 2000), ParameterError);
    TimeSeries flat;
    flat.values = Eigen::VectorXd::Constant(100, 3.0);
    CHECK_THROWS_AS(acf(flat, 10), DegenerateInputError);
}

TEST_CASE("select_tau0 on handcrafted acf tables") {
    // first local minimum of |acf| at lag 3
    CHECK(select_tau0({1.0, 0.6, 0.2, 0.05, 0.1, 0.3}) == -3);
    // sign is ignored: |.| minimum at lag 2
    CHECK(select_tau0({1.0, 0.5, -0.1, -0.4, -0.2}) == -2);
    // first zero crossing at lag 3
    CHECK(select_tau0({1.0, 0.5, 0.1, -0.2, -0.4}, Tau0Rule::FirstZero) == -3);
    // no minimum / no crossing within the table
    CHECK_THROWS_AS(select_tau0({1.0, 0.9, 0.8, 0.7}), NotFoundError);
    CHECK_THROWS_AS(select_tau0({1.0, 0.9, 0.8}, Tau0Rule::FirstZero),
                    NotFoundError);
}

TEST_CASE("Mackey-Glass embedding lag is -12") {
    const TimeSeries ts = gen_mackey_glass(MGParams{}, 10000, MGHistory{}, 1);
    CHECK(select_tau0(acf(ts, 60)) == -12);
    // the choice is not an artifact of one seed
    const TimeSeries ts2 = gen_mackey_glass(MGParams{}, 10000, MGHistory{}, 9);
    CHECK(select_tau0(acf(ts2, 60)) == -12);
}

TEST_CASE("delay_embed lays out coordinates newest-first") {
    TimeSeries ts;
    ts.values.resize(10);
    for (long i = 0; i < 10; ++i) ts.values[i] = static_cast<double>(i);
    const DelayMatrix dm = delay_embed(ts, {-2, 3});
    REQUIRE(dm.rows.rows() == 6);
    REQUIRE(dm.rows.cols() == 3);
    for (long r = 0; r < 6; ++r) {
        CHECK(dm.rows(r, 0) == static_cast<double>(r + 4));
        CHECK(dm.rows(r, 1) == static_cast<double>(r + 2));
        CHECK(dm.rows(r, 2) == static_cast<double>(r));
    }
    CHECK_THROWS_AS(delay_embed(ts, {0, 3}), ParameterError);
    CHECK_THROWS_AS(delay_embed(ts, {-2, 0}), ParameterError);
    CHECK_THROWS_AS(delay_embed(ts, {-5, 4}), ParameterError);
}

TEST_CASE("false nearest neighbors: a sine needs two dimensions") {
    // irrational period: the sampled orbit fills the circle instead of
    // revisiting the same handful of points exactly
    const TimeSeries ts = sine_series(1500, 40.7);
    const FnnResult fnn = false_nearest_neighbors(ts, -10, 4);
    REQUIRE(fnn.fractions.size() == 4);
    REQUIRE(fnn.m_min.has_value());
    CHECK(*fnn.m_min <= 3);  // a limit cycle embeds in very few dimensions
    // fractions are fractions
    for (double f : fnn.fractions) {
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
    }
    CHECK_THROWS_AS(false_nearest_neighbors(ts, 0, 4), ParameterError);
    CHECK_THROWS_AS(false_nearest_neighbors(ts, -10, 1), ParameterError);
}

TEST_CASE("Mackey-Glass minimum embedding dimension is near 4") {
    const TimeSeries ts = gen_mackey_glass(MGParams{}, 3000, MGHistory{}, 1);
    const FnnResult fnn = false_nearest_neighbors(ts, -12, 6);
    REQUIRE(fnn.m_min.has_value());
    CHECK(*fnn.m_min >= 3);
    CHECK(*fnn.m_min <= 5);
}
