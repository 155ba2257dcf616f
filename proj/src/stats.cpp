#include "sagtwin/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace sagtwin::stats {

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double lag1_autocorrelation(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        den += (x[i] - m) * (x[i] - m);
        if (i + 1 < x.size()) num += (x[i] - m) * (x[i + 1] - m);
    }
    if (den <= 0.0) return 0.0;
    return num / den;
}

double slope(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) throw WindowTooShort("slope: need at least 2 values");
    // Closed-form simple regression against t = 0..n-1.
    const double nf = static_cast<double>(n);
    const double t_mean = (nf - 1.0) / 2.0;
    const double v_mean = mean(values);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = static_cast<double>(i) - t_mean;
        num += dt * (values[i] - v_mean);
        den += dt * dt;
    }
    return num / den;
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term =
            2.0 * std::pow(-1.0, j - 1) * std::exp(-2.0 * j * j * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

TestResult welch_t_test(double mean1, double var1, std::size_t n1,
                        double mean2, double var2, std::size_t n2) {
    const double a = var1 / static_cast<double>(n1);
    const double b = var2 / static_cast<double>(n2);
    const double se2 = a + b;
    if (se2 <= 0.0) {
        // Both samples degenerate: identical means pass, different means fail.
        return {0.0, mean1 == mean2 ? 1.0 : 0.0};
    }
    const double t = (mean1 - mean2) / std::sqrt(se2);
    const double df = se2 * se2 /
                      (a * a / static_cast<double>(n1 - 1) +
                       b * b / static_cast<double>(n2 - 1));
    boost::math::students_t dist(df);
    const double p = 2.0 * boost::math::cdf(dist, -std::abs(t));
    return {t, p};
}

TestResult f_test(double var1, std::size_t n1, double var2, std::size_t n2) {
    if (var1 <= 0.0 || var2 <= 0.0) {
        // Degenerate variance is maximally non-baseline unless both collapse.
        return {0.0, (var1 == var2) ? 1.0 : 0.0};
    }
    const double f = var1 / var2;
    boost::math::fisher_f dist(static_cast<double>(n1 - 1),
                               static_cast<double>(n2 - 1));
    const double cdf = boost::math::cdf(dist, f);
    const double p = 2.0 * std::min(cdf, 1.0 - cdf);
    return {f, std::min(p, 1.0)};
}

TestResult ks_test(std::span<const double> sample1, std::span<const double> sample2) {
    const std::size_t n1 = sample1.size(), n2 = sample2.size();
    if (n1 == 0 || n2 == 0) throw InsufficientData("ks_test: empty sample");

    std::vector<double> s1(sample1.begin(), sample1.end());
    std::vector<double> s2(sample2.begin(), sample2.end());
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());

    const bool s1_degenerate = s1.front() == s1.back();
    const bool s2_degenerate = s2.front() == s2.back();
    if (s1_degenerate != s2_degenerate) return {1.0, 0.0};

    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < n1 && j < n2) {
        const double x = std::min(s1[i], s2[j]);
        while (i < n1 && s1[i] <= x) ++i;
        while (j < n2 && s2[j] <= x) ++j;
        const double f1 = static_cast<double>(i) / static_cast<double>(n1);
        const double f2 = static_cast<double>(j) / static_cast<double>(n2);
        d = std::max(d, std::abs(f1 - f2));
    }

    const double ne = static_cast<double>(n1) * static_cast<double>(n2) /
                      static_cast<double>(n1 + n2);
    const double sq = std::sqrt(ne);
    const double lambda = (sq + 0.12 + 0.11 / sq) * d;
    return {d, kolmogorov_q(lambda)};
}

TestResult fisher_z_test(double r1, std::size_t n1, double r2, std::size_t n2) {
    if (n1 < 4 || n2 < 4) throw InsufficientData("fisher_z_test: need n >= 4");
    auto clamp_r = [](double r) { return std::clamp(r, -0.999999, 0.999999); };
    const double z1 = std::atanh(clamp_r(r1));
    const double z2 = std::atanh(clamp_r(r2));
    const double se = std::sqrt(1.0 / static_cast<double>(n1 - 3) +
                                1.0 / static_cast<double>(n2 - 3));
    const double z = (z1 - z2) / se;
    const double p = 2.0 * normal_cdf(-std::abs(z));
    return {z, p};
}

TestResult ks_normality_test(std::span<const double> sample, double mu, double sigma) {
    if (sample.empty() || sigma <= 0.0)
        throw InsufficientData("ks_normality_test: bad input");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double cdf = normal_cdf((s[i] - mu) / sigma);
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
    }
    const double sq = std::sqrt(n);
    const double lambda = (sq + 0.12 + 0.11 / sq) * d;
    return {d, kolmogorov_q(lambda)};
}

}  // namespace sagtwin::stats
