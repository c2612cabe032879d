#include <cmath>

#include "doctest.h"
#include "semplace/rng.hpp"
#include "semplace/stats.hpp"

using namespace semplace;

TEST_CASE("mean and sample stddev") {
    CHECK(mean({1, 2, 3, 4}) == 2.5);
    CHECK(sample_stddev({1, 2, 3, 4}) == doctest::Approx(std::sqrt(5.0 / 3)).epsilon(1e-12));
    CHECK(sample_stddev({7, 7, 7}) == 0.0);
    CHECK_THROWS_AS(mean({}), std::invalid_argument);
    CHECK_THROWS_AS(sample_stddev({1}), std::invalid_argument);
}

TEST_CASE("pearson r on exact lines") {
    CHECK(pearson_r({1, 2, 3, 4}, {3, 5, 7, 9}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson_r({1, 2, 3, 4}, {0, -3, -6, -9}) == doctest::Approx(-1.0).epsilon(1e-12));
    // hand-worked case: x={1,2,3}, y={1,2,4} -> r = 3 / sqrt(2 * 14/3)
    CHECK(pearson_r({1, 2, 3}, {1, 2, 4}) ==
          doctest::Approx(3.0 / std::sqrt(2.0 * 14.0 / 3.0)).epsilon(1e-12));
    // shifting or scaling either series leaves r unchanged
    CHECK(pearson_r({10, 20, 30}, {101, 102, 104}) ==
          doctest::Approx(pearson_r({1, 2, 3}, {1, 2, 4})).epsilon(1e-12));

    CHECK_THROWS_AS(pearson_r({1, 2}, {1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(pearson_r({1, 2}, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(pearson_r({1, 1, 1}, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("incomplete beta against closed forms") {
    CHECK(incomplete_beta(1, 1, 0.37) == doctest::Approx(0.37).epsilon(1e-12));
    CHECK(incomplete_beta(1, 3, 0.2) ==
          doctest::Approx(1.0 - std::pow(0.8, 3)).epsilon(1e-12));
    CHECK(incomplete_beta(4, 1, 0.6) == doctest::Approx(std::pow(0.6, 4)).epsilon(1e-12));
    CHECK(incomplete_beta(2.5, 2.5, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
    CHECK(incomplete_beta(2.0, 5.0, 0.3) ==
          doctest::Approx(1.0 - incomplete_beta(5.0, 2.0, 0.7)).epsilon(1e-12));
    CHECK(incomplete_beta(3, 2, 0.0) == 0.0);
    CHECK(incomplete_beta(3, 2, 1.0) == 1.0);
    // reference values from an independent implementation
    CHECK(incomplete_beta(2.5, 1.5, 0.3) == doctest::Approx(0.08894372317066562).epsilon(1e-10));
    CHECK(incomplete_beta(0.5, 5.0, 0.62) == doctest::Approx(0.9976360446852938).epsilon(1e-10));
    CHECK_THROWS_AS(incomplete_beta(1, 1, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(incomplete_beta(1, 1, 1.1), std::invalid_argument);
}

TEST_CASE("student t cdf") {
    // nu = 1 is Cauchy
    for (double t : {-3.0, -0.5, 0.0, 0.8, 4.0})
        CHECK(student_t_cdf(t, 1) ==
              doctest::Approx(0.5 + std::atan(t) / M_PI).epsilon(1e-12));
    // nu = 2 closed form
    for (double t : {-2.0, 0.3, 1.7})
        CHECK(student_t_cdf(t, 2) ==
              doctest::Approx(0.5 * (1.0 + t / std::sqrt(2.0 + t * t))).epsilon(1e-12));
    // reference values
    CHECK(student_t_cdf(1.3, 7) == doctest::Approx(0.8826160823038114).epsilon(1e-10));
    CHECK(student_t_cdf(-2.1, 30) == doctest::Approx(0.022121235631161782).epsilon(1e-10));
    // symmetry and the normal limit
    CHECK(student_t_cdf(-1.234, 9) ==
          doctest::Approx(1.0 - student_t_cdf(1.234, 9)).epsilon(1e-12));
    for (double t : {-2.0, -1.0, 0.0, 1.0, 2.0})
        CHECK(student_t_cdf(t, 1e6) == doctest::Approx(normal_cdf(t)).epsilon(1e-4));
    CHECK_THROWS_AS(student_t_cdf(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("pearson p against reference values") {
    // exact by hand: nu=1, r=1/sqrt(2) gives t=1, p = 1 - 2*atan(1)/pi = 0.5
    CHECK(pearson_p_two_sided(1.0 / std::sqrt(2.0), 3) == doctest::Approx(0.5).epsilon(1e-12));
    // exact by hand: nu=2, r=0.5 gives t^2=2/3, p = 1 - t/sqrt(2+t^2) = 0.5
    CHECK(pearson_p_two_sided(0.5, 4) == doctest::Approx(0.5).epsilon(1e-12));
    // independent reference implementation
    CHECK(pearson_p_two_sided(0.5, 12) == doctest::Approx(0.097854614257812).epsilon(1e-9));
    CHECK(pearson_p_two_sided(0.2, 102) == doctest::Approx(0.043860884260170).epsilon(1e-9));
    CHECK(pearson_p_two_sided(-0.7, 25) == doctest::Approx(0.000098108475931).epsilon(1e-6));
    CHECK(pearson_p_two_sided(0.1, 1000) == doctest::Approx(0.001544116107401).epsilon(1e-8));
    // sign symmetry, boundary behavior
    CHECK(pearson_p_two_sided(-0.5, 12) ==
          doctest::Approx(pearson_p_two_sided(0.5, 12)).epsilon(1e-12));
    CHECK(pearson_p_two_sided(0.0, 50) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson_p_two_sided(1.0, 10) == 0.0);
    CHECK_THROWS_AS(pearson_p_two_sided(0.5, 2), std::invalid_argument);
}

TEST_CASE("normal cdf") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-1.0) == doctest::Approx(0.15865525393145705).epsilon(1e-12));
    CHECK(normal_cdf(3.0, 3.0, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(5.0, 3.0, 2.0) == doctest::Approx(normal_cdf(1.0)).epsilon(1e-12));
}

TEST_CASE("ks statistic") {
    const auto uniform01 = [](double x) { return x; };
    CHECK(ks_statistic({0.5}, uniform01) == doctest::Approx(0.5).epsilon(1e-12));
    // evenly spaced grid {0.1,...,1.0}: worst deviation is exactly 0.1
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(i / 10.0);
    CHECK(ks_statistic(grid, uniform01) == doctest::Approx(0.1).epsilon(1e-12));
    // mid-cell grid {(i-0.5)/n}: D = 0.5/n
    std::vector<double> mid;
    for (int i = 1; i <= 20; ++i) mid.push_back((i - 0.5) / 20.0);
    CHECK(ks_statistic(mid, uniform01) == doctest::Approx(0.025).epsilon(1e-12));
    CHECK_THROWS_AS(ks_statistic({}, uniform01), std::invalid_argument);

    SUBCASE("true uniforms pass at the 1% critical value") {
        Rng rng(2024);
        std::vector<double> sample;
        for (int i = 0; i < 2000; ++i) sample.push_back(rng.uniform());
        CHECK(ks_statistic(sample, uniform01) < ks_critical(2000, 0.01));
    }
    SUBCASE("a shifted sample fails") {
        Rng rng(2024);
        std::vector<double> sample;
        for (int i = 0; i < 2000; ++i) sample.push_back(0.8 * rng.uniform());
        CHECK(ks_statistic(sample, uniform01) > ks_critical(2000, 0.01));
    }
}

TEST_CASE("ks critical value formula") {
    // sqrt(-0.5 ln(alpha/2)) is the classic Kolmogorov coefficient
    CHECK(ks_critical(100000, 0.01) ==
          doctest::Approx(std::sqrt(-0.5 * std::log(0.005)) / std::sqrt(100000.0))
              .epsilon(1e-12));
    CHECK(ks_critical(1, 0.05) == doctest::Approx(std::sqrt(-0.5 * std::log(0.025))).epsilon(1e-12));
    CHECK(ks_critical(400, 0.01) > ks_critical(400, 0.05));
    CHECK(ks_critical(100, 0.01) > ks_critical(1000, 0.01));
    CHECK_THROWS_AS(ks_critical(0, 0.01), std::invalid_argument);
}

TEST_CASE("rng determinism and distributions") {
    SUBCASE("same seed, same stream") {
        Rng a(123), b(123);
        for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    }
    SUBCASE("streams differ and rebuild identically") {
        Rng s0(9, 0), s1(9, 1);
        CHECK(s0.next_u64() != s1.next_u64());
        CHECK(Rng(9, 1).next_u64() == Rng(9, 1).next_u64());
        CHECK(Rng(9, 0).next_u64() != Rng(10, 0).next_u64());
    }
    SUBCASE("uniform bounds") {
        Rng rng(5);
        for (int i = 0; i < 5000; ++i) {
            const double u = rng.uniform();
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
            const double v = rng.uniform(-2.0, 3.0);
            CHECK(v >= -2.0);
            CHECK(v < 3.0);
        }
    }
    SUBCASE("uniform_int covers inclusive bounds") {
        Rng rng(6);
        bool lo = false, hi = false;
        for (int i = 0; i < 2000; ++i) {
            const int k = rng.uniform_int(2, 5);
            CHECK(k >= 2);
            CHECK(k <= 5);
            lo |= k == 2;
            hi |= k == 5;
        }
        CHECK(lo);
        CHECK(hi);
        CHECK_THROWS_AS(rng.uniform_int(3, 2), std::invalid_argument);
    }
    SUBCASE("normal moments") {
        Rng rng(7);
        double s = 0, ss = 0;
        const int n = 50000;
        for (int i = 0; i < n; ++i) {
            const double x = rng.normal(2.0, 0.5);
            s += x;
            ss += x * x;
        }
        const double m = s / n;
        CHECK(std::abs(m - 2.0) < 0.02);
        CHECK(std::abs(std::sqrt(ss / n - m * m) - 0.5) < 0.01);
    }
    SUBCASE("categorical follows the weights") {
        Rng rng(8);
        int c[2] = {0, 0};
        for (int i = 0; i < 10000; ++i) ++c[rng.categorical({1.0, 3.0})];
        CHECK(std::abs(c[1] - 7500) < 250);
        CHECK_THROWS_AS(rng.categorical({0.0, 0.0}), std::invalid_argument);
        CHECK_THROWS_AS(rng.categorical({-1.0, 2.0}), std::invalid_argument);
    }
    SUBCASE("normal samples pass a ks test against the normal cdf") {
        Rng rng(9);
        std::vector<double> sample;
        for (int i = 0; i < 5000; ++i) sample.push_back(rng.normal());
        const double d = ks_statistic(sample, [](double x) { return normal_cdf(x); });
        CHECK(d < ks_critical(5000, 0.01));
    }
}
