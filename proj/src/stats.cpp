#include "thermocast/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "thermocast/errors.hpp"

namespace thermocast::stats {

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

namespace {

// Acklam's rational approximation for the inverse normal CDF.
double normal_quantile_approx(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
                c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
                 c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
            a[5]) *
           q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r +
            1.0);
}

}  // namespace

double normal_quantile(double p) {
    if (p <= 0.0 || p >= 1.0)
        throw DomainError("normal_quantile requires p in (0, 1)");
    double x = normal_quantile_approx(p);
    // Two Halley refinements against the exact CDF.
    for (int i = 0; i < 2; ++i) {
        const double e = normal_cdf(x) - p;
        const double u =
            e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(x * x / 2.0);
        x -= u / (1.0 + x * u / 2.0);
    }
    return x;
}

namespace {

double beta_cont_frac(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                            std::lgamma(b) + a * std::log(x) +
                            b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_cont_frac(a, b, x) / a;
    return 1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
    if (dof <= 0.0) throw DomainError("student_t_cdf requires dof > 0");
    const double x = dof / (dof + t * t);
    const double p = 0.5 * incomplete_beta(dof / 2.0, 0.5, x);
    return t >= 0.0 ? 1.0 - p : p;
}

double student_t_quantile(double p, double dof) {
    if (p <= 0.0 || p >= 1.0)
        throw DomainError("student_t_quantile requires p in (0, 1)");
    if (dof <= 0.0) throw DomainError("student_t_quantile requires dof > 0");
    if (p == 0.5) return 0.0;
    // Cornish-Fisher start around the normal quantile.
    const double z = normal_quantile(p);
    const double z3 = z * z * z;
    const double z5 = z3 * z * z;
    double t = z + (z3 + z) / (4.0 * dof) +
               (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * dof * dof);
    // Newton iterations on the exact CDF.
    for (int i = 0; i < 60; ++i) {
        const double err = student_t_cdf(t, dof) - p;
        const double pdf =
            std::exp(std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) -
                     0.5 * std::log(dof * 3.14159265358979323846) -
                     (dof + 1.0) / 2.0 * std::log1p(t * t / dof));
        if (pdf <= 0.0) break;
        const double delta = err / pdf;
        t -= delta;
        if (std::fabs(delta) < 1e-13 * (1.0 + std::fabs(t))) break;
    }
    return t;
}

double mean(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs, double mu) {
    if (xs.size() < 2) return 0.0;
    double sq = 0.0;
    for (double x : xs) sq += (x - mu) * (x - mu);
    return std::sqrt(sq / static_cast<double>(xs.size() - 1));
}

}  // namespace thermocast::stats
