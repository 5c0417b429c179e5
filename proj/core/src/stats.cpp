#include "qbme/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qbme {

namespace {

// Lower regularized gamma by series expansion (x < a + 1).
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 1000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma by Lentz continued fraction (x >= a + 1).
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_q(double a, double x) {
    if (a <= 0 || x < 0) throw std::domain_error("need a > 0 and x >= 0");
    if (x == 0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double ks_statistic_exponential(std::vector<double> samples, double rate) {
    if (samples.empty() || rate <= 0) throw std::domain_error("need samples and rate > 0");
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0;
    for (size_t i = 0; i < samples.size(); ++i) {
        double cdf = -std::expm1(-rate * samples[i]);
        d = std::max(d, std::abs(cdf - double(i) / n));
        d = std::max(d, std::abs(double(i + 1) / n - cdf));
    }
    return d;
}

double ks_p_value(double d, size_t n) {
    double rn = std::sqrt(double(n));
    double lambda = (rn + 0.12 + 0.11 / rn) * d;
    double sum = 0;
    double sign = 1;
    for (int k = 1; k <= 100; ++k) {
        double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double chi2_statistic(const std::vector<double>& observed,
                      const std::vector<double>& expected) {
    if (observed.size() != expected.size())
        throw std::invalid_argument("observed/expected size mismatch");
    double s = 0;
    for (size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0) {
            if (observed[i] != 0)
                throw std::domain_error("nonzero count in zero-expectation cell");
            continue;
        }
        double diff = observed[i] - expected[i];
        s += diff * diff / expected[i];
    }
    return s;
}

double chi2_p_value(double chi2, size_t dof) {
    if (dof == 0) throw std::domain_error("need dof > 0");
    return regularized_gamma_q(double(dof) / 2.0, chi2 / 2.0);
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw std::invalid_argument("distribution size mismatch");
    double s = 0;
    for (size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

}  // namespace qbme
