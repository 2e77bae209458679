#pragma once

// Empirical moment machinery for even orders up to ~200.
//
// Conventions used throughout the library:
//   * all moments are per-period (no annualization) and use the 1/n
//     population normalizer;
//   * high-order sums run in log space (see signed_log.hpp) so that
//     e.g. (1e-2)^200 contributes instead of flushing to zero.

#include "series.hpp"
#include "signed_log.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace xdldi {

inline double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_stdev(const std::vector<double>& v) {
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

// log(m!!) for odd m, returned as the signed-log representation of m!!.
// m = -1 and m = 1 both give the empty product 1.
inline SignedLogValue double_factorial_log(long m) {
    if (m < -1 || m % 2 == 0)
        throw InvalidInputError("double_factorial_log: order must be odd and >= -1, got " +
                                std::to_string(m));
    double lg = 0.0;
    for (long i = 3; i <= m; i += 2) lg += std::log(static_cast<double>(i));
    return SignedLogValue::from_log(1, lg);
}

// (1/n) sum (x_i - mean)^order, order even and >= 2.
inline SignedLogValue central_moment(const ReturnSeries& x, int order) {
    x.validate();
    if (order < 2 || order % 2 != 0)
        throw InvalidInputError("central_moment: order must be even and >= 2, got " +
                                std::to_string(order));
    const double mu = mean(x.values);
    SignedLogSum sum;
    for (double v : x.values) {
        const double d = v - mu;
        if (d == 0.0) continue;
        sum.add(1, static_cast<double>(order) * std::log(std::abs(d)));
    }
    SignedLogValue total = sum.total();
    if (total.is_zero()) return total;  // constant series: all deviations vanish
    total.log_magnitude -= std::log(static_cast<double>(x.size()));
    return total;
}

// (1/n) sum (c_i - mean_c) (l_i - liability_drift)^(2k-1).
// With k = 1 this reduces to the sample covariance regardless of the drift,
// because the c-deviations sum to zero.
inline SignedLogValue cross_moment(const ReturnSeries& c, const ReturnSeries& l, int k,
                                   double liability_drift) {
    c.validate();
    l.validate();
    require_aligned(c, l, "cross_moment");
    if (k < 1) throw InvalidInputError("cross_moment: k must be >= 1, got " + std::to_string(k));
    const double mu_c = mean(c.values);
    const long p = 2L * k - 1L;
    SignedLogSum sum;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double dc = c.values[i] - mu_c;
        const double dl = l.values[i] - liability_drift;
        if (dc == 0.0 || dl == 0.0) continue;
        const int sign = ((dc > 0.0) == (dl > 0.0)) ? 1 : -1;  // dl^odd keeps dl's sign
        sum.add(sign, std::log(std::abs(dc)) + static_cast<double>(p) * std::log(std::abs(dl)));
    }
    SignedLogValue total = sum.total();
    if (total.is_zero()) return total;
    total.log_magnitude -= std::log(static_cast<double>(c.size()));
    return total;
}

// Extreme-deviation summary of one series.
//
// moment_sequence[k-1] holds the 2k-th root of the 2k-th central moment.
// The sequence is nondecreasing in k (power-mean inequality), bounded above
// by xd_value and below by xd_value * (extremal_count/n)^(1/2k), and
// converges to xd_value as k grows.
struct XdEstimate {
    double xd_value = 0.0;       // max_i |x_i - mean|
    long extremal_count = 0;     // ties at the maximum (relative tolerance 1e-9)
    std::vector<double> moment_sequence;
};

inline XdEstimate xd(const ReturnSeries& x, int k_max = 100) {
    x.validate();
    if (k_max < 1)
        throw InvalidInputError("xd: k_max must be >= 1, got " + std::to_string(k_max));
    const double mu = mean(x.values);
    std::vector<double> absdev(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) absdev[i] = std::abs(x.values[i] - mu);
    XdEstimate est;
    est.xd_value = *std::max_element(absdev.begin(), absdev.end());
    if (est.xd_value == 0.0)
        throw DegenerateInputError("xd: constant series has no deviation scale");
    for (double a : absdev)
        if (a >= est.xd_value * (1.0 - 1e-9)) ++est.extremal_count;

    const double log_n = std::log(static_cast<double>(x.size()));
    std::vector<double> logdev;
    logdev.reserve(absdev.size());
    for (double a : absdev)
        if (a > 0.0) logdev.push_back(std::log(a));
    est.moment_sequence.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        SignedLogSum sum;
        const double p = 2.0 * k;
        for (double ld : logdev) sum.add(1, p * ld);
        const SignedLogValue total = sum.total();
        est.moment_sequence.push_back(std::exp((total.log_magnitude - log_n) / p));
    }
    return est;
}

// Empirical tail risk of the de-meaned loss distribution. Losses are the
// negated deviations; VaR_p is the ceil((1-p)n)-th largest loss and CVaR_p
// the mean of those worst losses, so VaR <= CVaR <= XD by construction.
struct TailRisk {
    double var = 0.0;
    double cvar = 0.0;
    // Set when n < 1/(1-p): the order statistic is then just the sample max.
    bool small_sample = false;
};

inline TailRisk var_cvar(const ReturnSeries& x, double p) {
    x.validate();
    if (!(p > 0.0 && p < 1.0))
        throw InvalidInputError("var_cvar: p must lie in (0,1), got " + std::to_string(p));
    const double mu = mean(x.values);
    std::vector<double> losses(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) losses[i] = mu - x.values[i];
    std::sort(losses.begin(), losses.end(), std::greater<double>());
    const double n = static_cast<double>(losses.size());
    // Guard against 1-p picking up one spurious ulp (e.g. 0.01*1e5 -> 1000.0000...01).
    auto m = static_cast<std::size_t>(std::ceil((1.0 - p) * n - 1e-9));
    m = std::min(std::max<std::size_t>(m, 1), losses.size());
    TailRisk tr;
    tr.var = losses[m - 1];
    tr.cvar = std::accumulate(losses.begin(), losses.begin() + static_cast<long>(m), 0.0) /
              static_cast<double>(m);
    tr.small_sample = n < 1.0 / (1.0 - p);
    return tr;
}

}  // namespace xdldi
