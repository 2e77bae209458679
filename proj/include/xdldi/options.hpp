#pragma once

// Option analytics: Black-Scholes pricing and greeks, implied volatility,
// stochastic-volatility dynamics, and 2k-moment option hedge weights.
//
// Spot/vol dynamics behind the hedge formulas:
//     dS / S   = mu dt + sigma dW
//     d sigma  = alpha dZ,   dZ = q dW + sqrt(1 - q^2) dY
// so q is the spot/vol shock correlation and alpha the vol-of-vol.

#include "allocation.hpp"
#include "moments.hpp"
#include "rng.hpp"
#include "series.hpp"
#include "signed_log.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace xdldi {

enum class OptionKind { call, put };

inline const char* option_kind_name(OptionKind k) {
    return k == OptionKind::call ? "call" : "put";
}

inline OptionKind parse_option_kind(const std::string& s) {
    if (s == "call") return OptionKind::call;
    if (s == "put") return OptionKind::put;
    throw InvalidInputError("unknown option kind '" + s + "' (expected call|put)");
}

struct OptionSpec {
    std::string underlying;
    double strike = 0.0;
    double expiry = 0.0;  // remaining life in years
    OptionKind kind = OptionKind::call;
    int position_sign = 1;  // +1 long, -1 short

    void validate() const {
        if (!(strike > 0.0)) throw InvalidInputError("OptionSpec: strike must be positive");
        if (!std::isfinite(expiry)) throw InvalidInputError("OptionSpec: non-finite expiry");
        if (position_sign != 1 && position_sign != -1)
            throw InvalidInputError("OptionSpec: position_sign must be +-1");
    }
};

struct VolParams {
    double sigma = 0.0;  // current instantaneous volatility
    double alpha = 0.0;  // vol-of-vol
    double q = 0.0;      // spot/vol shock correlation

    void validate() const {
        if (!(sigma > 0.0)) throw InvalidInputError("VolParams: sigma must be positive");
        if (!(alpha >= 0.0)) throw InvalidInputError("VolParams: alpha must be >= 0");
        if (std::abs(q) > 1.0) throw InvalidInputError("VolParams: |q| must be <= 1");
    }
};

namespace detail {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.141592653589793238462643383279502884);
}

}  // namespace detail

inline double intrinsic_value(const OptionSpec& spec, double spot) {
    return spec.kind == OptionKind::call ? std::max(spot - spec.strike, 0.0)
                                         : std::max(spec.strike - spot, 0.0);
}

// Black-Scholes price; expired options (expiry <= 0) return intrinsic value.
inline double bs_price(const OptionSpec& spec, double spot, double vol, double rate = 0.0) {
    spec.validate();
    if (!(spot > 0.0)) throw InvalidInputError("bs_price: spot must be positive");
    if (spec.expiry <= 0.0) return intrinsic_value(spec, spot);
    if (!(vol > 0.0)) throw InvalidInputError("bs_price: vol must be positive");
    const double sqrt_t = std::sqrt(spec.expiry);
    const double d1 = (std::log(spot / spec.strike) + (rate + 0.5 * vol * vol) * spec.expiry) /
                      (vol * sqrt_t);
    const double d2 = d1 - vol * sqrt_t;
    const double df = std::exp(-rate * spec.expiry);
    if (spec.kind == OptionKind::call)
        return spot * detail::norm_cdf(d1) - spec.strike * df * detail::norm_cdf(d2);
    return spec.strike * df * detail::norm_cdf(-d2) - spot * detail::norm_cdf(-d1);
}

// First-order sensitivities plus the theta-like drift bracket
// dOmega/dt + (1/2) sigma^2 S^2 d2Omega/dS2 that multiplies dt in the
// hedge-PnL expansion. Expired options carry zero greeks.
struct Greeks {
    double delta = 0.0;
    double vega = 0.0;
    double theta_drift = 0.0;
};

inline Greeks operator+(const Greeks& a, const Greeks& b) {
    return {a.delta + b.delta, a.vega + b.vega, a.theta_drift + b.theta_drift};
}

inline Greeks operator*(double s, const Greeks& g) {
    return {s * g.delta, s * g.vega, s * g.theta_drift};
}

inline Greeks bs_greeks(const OptionSpec& spec, double spot, double vol, double rate = 0.0) {
    spec.validate();
    if (!(spot > 0.0)) throw InvalidInputError("bs_greeks: spot must be positive");
    if (spec.expiry <= 0.0) return {};
    if (!(vol > 0.0)) throw InvalidInputError("bs_greeks: vol must be positive");
    const double sqrt_t = std::sqrt(spec.expiry);
    const double d1 = (std::log(spot / spec.strike) + (rate + 0.5 * vol * vol) * spec.expiry) /
                      (vol * sqrt_t);
    const double d2 = d1 - vol * sqrt_t;
    const double df = std::exp(-rate * spec.expiry);
    Greeks g;
    g.delta = spec.kind == OptionKind::call ? detail::norm_cdf(d1) : detail::norm_cdf(d1) - 1.0;
    g.vega = spot * detail::norm_pdf(d1) * sqrt_t;
    // dOmega/dt (calendar theta) for the call; the put follows by parity.
    double theta_call = -spot * detail::norm_pdf(d1) * vol / (2.0 * sqrt_t) -
                        rate * spec.strike * df * detail::norm_cdf(d2);
    const double theta = spec.kind == OptionKind::call
                             ? theta_call
                             : theta_call + rate * spec.strike * df;
    const double gamma = detail::norm_pdf(d1) / (spot * vol * sqrt_t);
    g.theta_drift = theta + 0.5 * vol * vol * spot * spot * gamma;
    return g;
}

// Implied volatility by bisection to |model - quote| < 1e-10 * spot.
// Quotes outside static no-arbitrage bounds are rejected.
inline double implied_vol(const OptionSpec& spec, double spot, double quote, double rate = 0.0) {
    spec.validate();
    if (!(spot > 0.0)) throw InvalidInputError("implied_vol: spot must be positive");
    if (spec.expiry <= 0.0)
        throw InvalidInputError("implied_vol: option is expired (expiry <= 0)");
    const double df = std::exp(-rate * spec.expiry);
    const double lower = spec.kind == OptionKind::call ? std::max(spot - spec.strike * df, 0.0)
                                                       : std::max(spec.strike * df - spot, 0.0);
    const double upper = spec.kind == OptionKind::call ? spot : spec.strike * df;
    const double tol = 1e-10 * spot;
    if (quote < lower - tol || quote > upper + tol)
        throw ArbitrageViolationError(
            "implied_vol: quote " + std::to_string(quote) + " outside no-arbitrage bounds [" +
            std::to_string(lower) + ", " + std::to_string(upper) + "]");

    double lo = 1e-9, hi = 1.0;
    while (bs_price(spec, spot, hi, rate) < quote && hi < 100.0) hi *= 2.0;
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double err = bs_price(spec, spot, mid, rate) - quote;
        if (std::abs(err) < tol) return mid;
        (err > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

// Straddle implied vol: the average of the two legs' implied vols.
inline double straddle_implied_vol(const OptionSpec& call_spec, const OptionSpec& put_spec,
                                   double spot, double call_quote, double put_quote,
                                   double rate = 0.0) {
    return 0.5 * (implied_vol(call_spec, spot, call_quote, rate) +
                  implied_vol(put_spec, spot, put_quote, rate));
}

// Skew-adjusted hedge ratio: delta + q (alpha / sigma) vega. This is the
// k = 1 regression coefficient of option-price moves on spot moves under
// the joint spot/vol dynamics, and the quantity the 2k-weights act on.
inline double skew_adjusted_ratio(const Greeks& greeks, const VolParams& vp) {
    vp.validate();
    return greeks.delta + vp.q * (vp.alpha / vp.sigma) * greeks.vega;
}

// Option hedge weight at moment order k with a Gaussian own moment:
//     w = [ (mu - r)/(2k lambda (2k-1)!! sigma^{2k}) + skew_adjusted_ratio ]^{1/(2k-1)}.
inline double option_weight(double mu, double funding_rate, const Greeks& greeks,
                            const VolParams& vp, int k, const RiskAppetite& appetite) {
    appetite.validate();
    vp.validate();
    if (k < 1) throw InvalidInputError("option_weight: k must be >= 1");
    const SignedLogValue own = double_factorial_log(2L * k - 1L) *
                               SignedLogValue::from_value(vp.sigma).pow_int(2L * k);
    const SignedLogValue term1 =
        SignedLogValue::from_value(mu - funding_rate) /
        (SignedLogValue::from_value(2.0 * k * appetite.lambda) * own);
    const SignedLogValue bracket =
        term1 + SignedLogValue::from_value(skew_adjusted_ratio(greeks, vp));
    return bracket.odd_root(2L * k - 1L).value();
}

// Same weight with an empirical own moment E[(dC - mu)^{2k}] replacing the
// Gaussian closed form (used by the backtest on trailing windows).
inline double option_weight_empirical(double mu, double funding_rate,
                                      const SignedLogValue& own_moment_2k, const Greeks& greeks,
                                      const VolParams& vp, int k, const RiskAppetite& appetite) {
    appetite.validate();
    vp.validate();
    if (k < 1) throw InvalidInputError("option_weight_empirical: k must be >= 1");
    if (own_moment_2k.is_zero())
        throw DegenerateInputError("option_weight_empirical: zero own moment");
    const SignedLogValue term1 =
        SignedLogValue::from_value(mu - funding_rate) /
        (SignedLogValue::from_value(2.0 * k * appetite.lambda) * own_moment_2k);
    const SignedLogValue bracket =
        term1 + SignedLogValue::from_value(skew_adjusted_ratio(greeks, vp));
    return bracket.odd_root(2L * k - 1L).value();
}

// Hurdle correction of the option position,
//     r_c = 2k lambda (2k-1)!! sigma^{2k} skew_adjusted_ratio,
// consistent with hurdle_rate_weight + option_weight to rounding error.
inline double option_hurdle_correction(const Greeks& greeks, const VolParams& vp, int k,
                                       const RiskAppetite& appetite) {
    appetite.validate();
    vp.validate();
    if (k < 1) throw InvalidInputError("option_hurdle_correction: k must be >= 1");
    const SignedLogValue rc = SignedLogValue::from_value(2.0 * k * appetite.lambda) *
                              double_factorial_log(2L * k - 1L) *
                              SignedLogValue::from_value(vp.sigma).pow_int(2L * k) *
                              SignedLogValue::from_value(skew_adjusted_ratio(greeks, vp));
    return rc.value();
}

// ---------------------------------------------------------------------------
// Path simulation
// ---------------------------------------------------------------------------

// Euler paths of the joint spot/vol dynamics. Log-spot stepping keeps spot
// positive; vol is reflected at zero. Spot starts at 1, vol at vp.sigma.
struct PathEnsemble {
    Eigen::MatrixXd spot;  // n_paths x (n_steps + 1)
    Eigen::MatrixXd vol;
    double dt = 0.0;
    // alpha sqrt(dt) is large against sigma: reflection at zero will distort
    // the vol distribution; a finer step is advisable.
    bool step_warning = false;
};

inline PathEnsemble simulate_spot_vol_paths(const VolParams& vp, double mu, long n_paths,
                                            long n_steps, double horizon, std::uint64_t seed) {
    vp.validate();
    if (n_paths < 1 || n_steps < 1)
        throw InvalidInputError("simulate_spot_vol_paths: need n_paths >= 1 and n_steps >= 1");
    if (!(horizon > 0.0)) throw InvalidInputError("simulate_spot_vol_paths: horizon must be positive");
    PathEnsemble ens;
    ens.dt = horizon / static_cast<double>(n_steps);
    const double sqrt_dt = std::sqrt(ens.dt);
    ens.step_warning = vp.alpha * sqrt_dt > vp.sigma / 3.0;
    ens.spot.resize(n_paths, n_steps + 1);
    ens.vol.resize(n_paths, n_steps + 1);

    // Per-path sub-seeds drawn up front so any path partitioning scheme
    // reproduces the same ensemble.
    Rng master(seed);
    std::vector<std::uint64_t> subseeds(static_cast<std::size_t>(n_paths));
    for (auto& s : subseeds) s = master.raw();

    const double root_1mq2 = std::sqrt(std::max(0.0, 1.0 - vp.q * vp.q));
    for (long p = 0; p < n_paths; ++p) {
        Rng rng(subseeds[static_cast<std::size_t>(p)]);
        double log_s = 0.0;
        double sig = vp.sigma;
        ens.spot(p, 0) = 1.0;
        ens.vol(p, 0) = sig;
        for (long st = 1; st <= n_steps; ++st) {
            const double dw = sqrt_dt * rng.normal();
            const double dy = sqrt_dt * rng.normal();
            const double dz = vp.q * dw + root_1mq2 * dy;
            log_s += (mu - 0.5 * sig * sig) * ens.dt + sig * dw;
            sig = std::abs(sig + vp.alpha * dz);
            ens.spot(p, st) = std::exp(log_s);
            ens.vol(p, st) = sig;
        }
    }
    return ens;
}

// Heuristic historical proxy for (alpha, q): alpha from the stdev of vol
// changes per sqrt(dt), q from the correlation of vol changes with returns.
// A coarse starting point, not a calibration.
inline VolParams estimate_vol_params(const std::vector<double>& vol_history,
                                     const std::vector<double>& returns, double dt) {
    if (vol_history.size() < 3 || vol_history.size() != returns.size() + 1)
        throw InvalidInputError(
            "estimate_vol_params: need len(vol_history) == len(returns) + 1 >= 3");
    if (!(dt > 0.0)) throw InvalidInputError("estimate_vol_params: dt must be positive");
    const std::size_t n = returns.size();
    std::vector<double> dvol(n);
    for (std::size_t i = 0; i < n; ++i) dvol[i] = vol_history[i + 1] - vol_history[i];
    const double m_dv = mean(dvol), m_r = mean(returns);
    double c = 0.0, v_dv = 0.0, v_r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        c += (dvol[i] - m_dv) * (returns[i] - m_r);
        v_dv += (dvol[i] - m_dv) * (dvol[i] - m_dv);
        v_r += (returns[i] - m_r) * (returns[i] - m_r);
    }
    VolParams vp;
    vp.sigma = vol_history.back();
    vp.alpha = std::sqrt(v_dv / static_cast<double>(n)) / std::sqrt(dt);
    vp.q = (v_dv > 0.0 && v_r > 0.0) ? c / std::sqrt(v_dv * v_r) : 0.0;
    vp.q = std::clamp(vp.q, -1.0, 1.0);
    return vp;
}

}  // namespace xdldi
