#include <cmath>
#include <vector>

#include "doctest.h"
#include "thermocast/errors.hpp"
#include "thermocast/stats.hpp"

using namespace thermocast;

TEST_SUITE("stats") {

TEST_CASE("normal quantile against reference values") {
    // reference values computed with an independent statistics package
    CHECK(stats::normal_quantile(0.975) ==
          doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(stats::normal_quantile(0.84) ==
          doctest::Approx(0.994457883209753).epsilon(1e-12));
    CHECK(stats::normal_quantile(0.995) ==
          doctest::Approx(2.5758293035489004).epsilon(1e-12));
    CHECK(stats::normal_quantile(0.05) ==
          doctest::Approx(-1.6448536269514729).epsilon(1e-12));
    CHECK(stats::normal_quantile(0.5) == doctest::Approx(0.0));
    CHECK_THROWS_AS(stats::normal_quantile(0.0), DomainError);
    CHECK_THROWS_AS(stats::normal_quantile(1.0), DomainError);
}

TEST_CASE("normal quantile inverts the cdf") {
    for (double p : {0.001, 0.01, 0.2, 0.5, 0.77, 0.99, 0.9999}) {
        const double x = stats::normal_quantile(p);
        CHECK(stats::normal_cdf(x) == doctest::Approx(p).epsilon(1e-12));
    }
}

TEST_CASE("student-t quantile against reference values") {
    CHECK(stats::student_t_quantile(0.975, 1) ==
          doctest::Approx(12.706204736432095).epsilon(1e-9));
    CHECK(stats::student_t_quantile(0.975, 5) ==
          doctest::Approx(2.570581835636314).epsilon(1e-10));
    CHECK(stats::student_t_quantile(0.975, 10) ==
          doctest::Approx(2.2281388519649385).epsilon(1e-10));
    CHECK(stats::student_t_quantile(0.975, 30) ==
          doctest::Approx(2.0422724563012373).epsilon(1e-10));
    CHECK(stats::student_t_quantile(0.975, 9999) ==
          doctest::Approx(1.9602012636213575).epsilon(1e-10));
    CHECK(stats::student_t_quantile(0.84, 7) ==
          doctest::Approx(1.070287396273964).epsilon(1e-10));
    CHECK(stats::student_t_quantile(0.995, 3) ==
          doctest::Approx(5.840909309733352).epsilon(1e-10));
    CHECK(stats::student_t_quantile(0.5, 12) == doctest::Approx(0.0));
    // symmetry
    CHECK(stats::student_t_quantile(0.025, 5) ==
          doctest::Approx(-2.570581835636314).epsilon(1e-10));
}

TEST_CASE("student-t quantile inverts the cdf") {
    for (double dof : {2.0, 9.0, 99.0, 9999.0}) {
        for (double p : {0.01, 0.16, 0.5, 0.84, 0.975, 0.999}) {
            const double t = stats::student_t_quantile(p, dof);
            CHECK(stats::student_t_cdf(t, dof) ==
                  doctest::Approx(p).epsilon(1e-10));
        }
    }
}

TEST_CASE("incomplete beta basics") {
    CHECK(stats::incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(stats::incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    // I_x(1,1) = x
    CHECK(stats::incomplete_beta(1.0, 1.0, 0.37) ==
          doctest::Approx(0.37).epsilon(1e-12));
    // I_x(1, b) = 1 - (1-x)^b
    CHECK(stats::incomplete_beta(1.0, 4.0, 0.2) ==
          doctest::Approx(1.0 - std::pow(0.8, 4)).epsilon(1e-12));
}

TEST_CASE("mean and sample std") {
    const std::vector<double> xs = {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
    const double m = stats::mean(xs);
    CHECK(m == doctest::Approx(5.0));
    // sample variance with n-1 = 32/7
    CHECK(stats::sample_std(xs, m) ==
          doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-12));
    CHECK(stats::sample_std(std::vector<double>{3.0}, 3.0) == 0.0);
}

}  // TEST_SUITE
