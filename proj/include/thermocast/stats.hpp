#pragma once

#include <cstdint>
#include <span>

namespace thermocast::stats {

// Standard normal CDF and quantile. The quantile uses a rational
// approximation refined with Halley steps against erfc, accurate to machine
// precision over (0, 1).
double normal_cdf(double x);
double normal_quantile(double p);

// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction.
double incomplete_beta(double a, double b, double x);

// Student-t CDF and quantile with `dof` degrees of freedom. The quantile
// inverts the CDF by Newton iteration started from the Cornish-Fisher
// expansion; evaluated exactly for every dof (no large-n shortcut).
double student_t_cdf(double t, double dof);
double student_t_quantile(double p, double dof);

double mean(std::span<const double> xs);
// Sample standard deviation (n-1 denominator); 0 for n < 2.
double sample_std(std::span<const double> xs, double mean);

}  // namespace thermocast::stats
