#pragma once

// Closed-form 2k-moment portfolio weights, hurdle-rate diagnostics, the
// empirical objective, and per-component portfolio assembly.
//
// The objective being maximized over the scalar weight w, per component:
//     w E(dC - r) - E(dL - r_L) - lambda E[(w(dC - r) - (dL - r_L))^{2k}]
// Even-power penalties make it concave, which the numerical maximizer
// exploits. k = 1 reproduces classical mean-variance with a hedge overlay;
// large k approaches the extreme-deviation limit.

#include "ica.hpp"
#include "moments.hpp"
#include "signed_log.hpp"
#include "stats.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace xdldi {

// ---------------------------------------------------------------------------
// Closed-form weights
// ---------------------------------------------------------------------------

// Return-seeking regime:
//     w = [ ((mu - r)/(2k lambda) + E[dC dL^{2k-1}]) / E[dC^{2k}] ]^{1/(2k-1)}
// with the real odd root, so the sign of the bracket is preserved.
inline double return_seeking_weight(const ComponentStats& cs, const RiskAppetite& appetite) {
    cs.validate();
    appetite.validate();
    if (cs.own_moment_2k.is_zero())
        throw DegenerateInputError("return_seeking_weight: zero own moment (constant component)");
    const SignedLogValue excess = SignedLogValue::from_value(cs.mu - cs.r);
    const SignedLogValue scale = SignedLogValue::from_value(2.0 * cs.k * appetite.lambda);
    const SignedLogValue bracket = (excess / scale + cs.cross_moment_2k1) / cs.own_moment_2k;
    return bracket.odd_root(2L * cs.k - 1L).value();
}

// Risk-avoiding regime: correlation hedge plus a penalty-scaled return tilt,
//     w = rho sigma_L / sigma
//       + (1/(2k(2k-1) lambda)) (1/E[residual^{2k-2}]) (mu - r)/sigma^2.
// A vanishing residual moment at k >= 2 means the liability is fully spanned
// by the hedge; the hedge term alone is returned with the flag set.
struct RiskAvoidingWeight {
    double weight = 0.0;
    bool liability_spanned = false;
};

inline RiskAvoidingWeight risk_avoiding_weight(const ComponentStats& cs,
                                               const RiskAppetite& appetite) {
    cs.validate();
    appetite.validate();
    if (cs.sigma <= 0.0)
        throw DegenerateInputError("risk_avoiding_weight: zero-volatility component");
    RiskAvoidingWeight out;
    const double hedge = cs.rho * cs.sigma_L / cs.sigma;
    if (cs.residual_moment_2k2.is_zero()) {
        if (cs.k == 1)
            throw InvalidInputError("risk_avoiding_weight: residual moment of order 0 cannot vanish");
        out.weight = hedge;
        out.liability_spanned = true;
        return out;
    }
    const SignedLogValue tilt =
        SignedLogValue::from_value(cs.mu - cs.r) /
        (SignedLogValue::from_value(2.0 * cs.k * (2.0 * cs.k - 1.0) * appetite.lambda) *
         cs.residual_moment_2k2 * SignedLogValue::from_value(cs.sigma * cs.sigma));
    out.weight = hedge + tilt.value();
    return out;
}

// Classical mean-variance-with-hedge weight (the k = 1 limit of both regimes):
//     w = (1/(2 lambda)) (mu - r)/sigma^2 + rho sigma_L / sigma.
inline double classical_weight(const ComponentStats& cs, const RiskAppetite& appetite) {
    cs.validate();
    appetite.validate();
    if (cs.sigma <= 0.0)
        throw DegenerateInputError("classical_weight: zero-volatility component");
    return (cs.mu - cs.r) / (2.0 * appetite.lambda * cs.sigma * cs.sigma) +
           cs.rho * cs.sigma_L / cs.sigma;
}

// Hurdle-rate correction r_c = 2k lambda E[dC dL^{2k-1}]: the amount by which
// the liability's co-movement effectively lowers the funding rate.
inline double hurdle_correction(const ComponentStats& cs, const RiskAppetite& appetite) {
    cs.validate();
    appetite.validate();
    return (SignedLogValue::from_value(2.0 * cs.k * appetite.lambda) * cs.cross_moment_2k1).value();
}

// Return-seeking weight expressed through a hurdle correction:
//     w = [ (mu - (r - r_c)) / (2k lambda E[dC^{2k}]) ]^{1/(2k-1)}.
// Algebraically identical to return_seeking_weight when r_c comes from
// hurdle_correction on the same stats.
inline double hurdle_rate_weight(double mu, double funding_rate, double hurdle,
                                 const SignedLogValue& own_moment_2k, int k,
                                 const RiskAppetite& appetite) {
    appetite.validate();
    if (k < 1) throw InvalidInputError("hurdle_rate_weight: k must be >= 1");
    if (own_moment_2k.is_zero())
        throw DegenerateInputError("hurdle_rate_weight: zero own moment");
    const SignedLogValue bracket =
        SignedLogValue::from_value(mu - (funding_rate - hurdle)) /
        (SignedLogValue::from_value(2.0 * k * appetite.lambda) * own_moment_2k);
    return bracket.odd_root(2L * k - 1L).value();
}

// ---------------------------------------------------------------------------
// Gaussian (delta-one) closed forms
// ---------------------------------------------------------------------------

// Weight of a delta-one hedge instrument when both legs are Gaussian:
//     w = [ (mu - r)/(2k lambda (2k-1)!! sigma^{2k})
//           + rho (sigma_L/sigma)^{2k-1} ]^{1/(2k-1)}.
inline double delta_one_weight(double mu, double funding_rate, double sigma, double rho,
                               double sigma_L, int k, const RiskAppetite& appetite) {
    appetite.validate();
    if (k < 1) throw InvalidInputError("delta_one_weight: k must be >= 1");
    if (!(sigma > 0.0)) throw DegenerateInputError("delta_one_weight: sigma must be positive");
    if (std::abs(rho) > 1.0 + 1e-12)
        throw InvalidInputError("delta_one_weight: |rho| must be <= 1");
    const SignedLogValue sig = SignedLogValue::from_value(sigma);
    const SignedLogValue own = double_factorial_log(2L * k - 1L) * sig.pow_int(2L * k);
    const SignedLogValue term1 =
        SignedLogValue::from_value(mu - funding_rate) /
        (SignedLogValue::from_value(2.0 * k * appetite.lambda) * own);
    const SignedLogValue ratio = SignedLogValue::from_value(sigma_L) / sig;
    const SignedLogValue term2 = SignedLogValue::from_value(rho) * ratio.pow_int(2L * k - 1L);
    return (term1 + term2).odd_root(2L * k - 1L).value();
}

// Gaussian hurdle correction r_c = 2k lambda (2k-1)!! rho sigma sigma_L^{2k-1}
// (the Gaussian cross moment E[dC dL^{2k-1}] = rho sigma sigma_L^{2k-1} (2k-1)!!
// folded into the generic definition above).
inline double delta_one_hurdle(double rho, double sigma, double sigma_L, int k,
                               const RiskAppetite& appetite) {
    appetite.validate();
    if (k < 1) throw InvalidInputError("delta_one_hurdle: k must be >= 1");
    const SignedLogValue rc = SignedLogValue::from_value(2.0 * k * appetite.lambda) *
                              double_factorial_log(2L * k - 1L) *
                              SignedLogValue::from_value(rho) *
                              SignedLogValue::from_value(sigma) *
                              SignedLogValue::from_value(sigma_L).pow_int(2L * k - 1L);
    return rc.value();
}

// Correlation as seen by the order-k allocation: sign(rho) |rho|^{1/(2k-1)}.
// Flattens toward +-1 as k grows; 0 and +-1 are exact fixed points.
inline double effective_correlation(double rho, int k) {
    if (k < 1) throw InvalidInputError("effective_correlation: k must be >= 1");
    if (std::abs(rho) > 1.0 + 1e-12)
        throw InvalidInputError("effective_correlation: |rho| must be <= 1");
    if (rho == 0.0) return 0.0;
    const double mag = std::exp(std::log(std::min(std::abs(rho), 1.0)) / (2.0 * k - 1.0));
    return std::copysign(mag, rho);
}

// DIAGNOSTIC ONLY: the k -> infinity limit sign(rho) sigma_L / sigma of the
// pure hedge. Not used for allocation decisions; exposed for profile plots.
inline double sign_limit_weight(double rho, double sigma, double sigma_L) {
    if (!(sigma > 0.0)) throw DegenerateInputError("sign_limit_weight: sigma must be positive");
    if (rho == 0.0) return 0.0;
    return std::copysign(sigma_L / sigma, rho);
}

// Delta-one weight over a grid of expected returns, per k. The map mu -> w
// is nondecreasing for every k (odd root of an affine function), which is
// asserted as a sanity check on the numerics.
struct ProfilePoint {
    double mu = 0.0;
    int k = 1;
    double weight = 0.0;
};

inline std::vector<ProfilePoint> weight_profile(const std::vector<double>& mu_grid,
                                                double funding_rate, double sigma, double rho,
                                                double sigma_L, const std::vector<int>& k_list,
                                                const RiskAppetite& appetite) {
    if (mu_grid.empty()) throw InvalidInputError("weight_profile: empty mu grid");
    if (k_list.empty()) throw InvalidInputError("weight_profile: empty k list");
    for (std::size_t i = 1; i < mu_grid.size(); ++i)
        if (!(mu_grid[i - 1] < mu_grid[i]))
            throw InvalidInputError("weight_profile: mu grid must be strictly increasing");
    std::vector<ProfilePoint> out;
    out.reserve(mu_grid.size() * k_list.size());
    for (int k : k_list) {
        double prev = -std::numeric_limits<double>::infinity();
        for (double mu : mu_grid) {
            const double w = delta_one_weight(mu, funding_rate, sigma, rho, sigma_L, k, appetite);
            if (w < prev - 1e-12 * (1.0 + std::abs(prev)))
                throw Error("weight_profile: monotonicity violated at mu=" + std::to_string(mu));
            prev = w;
            out.push_back({mu, k, w});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Empirical objective
// ---------------------------------------------------------------------------

// Sample objective for scalar weight w on aligned component/liability series:
//     w (mean_c - r) - (mean_l - r_L)
//     - lambda (1/n) sum_t (w (c_t - r) - (l_t - r_L))^{2k}.
// The penalty sum runs in log space; an overflowing penalty yields -inf.
inline double objective_value(double w, const ReturnSeries& component,
                              const ReturnSeries& liability, double funding_rate,
                              double liability_rate, int k, const RiskAppetite& appetite) {
    component.validate();
    liability.validate();
    require_aligned(component, liability, "objective_value");
    if (k < 1) throw InvalidInputError("objective_value: k must be >= 1");
    appetite.validate();
    const double n = static_cast<double>(component.size());
    SignedLogSum penalty;
    for (std::size_t t = 0; t < component.size(); ++t) {
        const double a =
            w * (component.values[t] - funding_rate) - (liability.values[t] - liability_rate);
        if (a == 0.0) continue;
        penalty.add(1, 2.0 * k * std::log(std::abs(a)));
    }
    SignedLogValue pen = penalty.total();
    double penalty_value = 0.0;
    if (!pen.is_zero()) {
        pen.log_magnitude -= std::log(n);
        penalty_value = pen.value();  // +inf when the sum overflows
    }
    const double drift = w * (mean(component.values) - funding_rate) -
                         (mean(liability.values) - liability_rate);
    return drift - appetite.lambda * penalty_value;
}

// Deterministic maximizer of the concave sample objective: expand a bracket
// around the hint until the middle point dominates, then golden-section.
struct ObjectiveMaximum {
    double weight = 0.0;
    double objective = 0.0;
    int evaluations = 0;
};

inline ObjectiveMaximum maximize_objective(const ReturnSeries& component,
                                           const ReturnSeries& liability, double funding_rate,
                                           double liability_rate, int k,
                                           const RiskAppetite& appetite, double weight_hint = 0.0) {
    int evals = 0;
    const auto f = [&](double w) {
        ++evals;
        return objective_value(w, component, liability, funding_rate, liability_rate, k, appetite);
    };

    double b = std::isfinite(weight_hint) ? weight_hint : 0.0;
    double step = std::max(1.0, std::abs(b));
    double a = b - step, c = b + step;
    double fa = f(a), fb = f(b), fc = f(c);
    // Slide the triple uphill, doubling the step, until the middle dominates.
    int guard = 0;
    while (!(fb >= fa && fb >= fc)) {
        if (++guard > 600)
            throw DegenerateInputError("maximize_objective: objective appears unbounded");
        if (fc > fb) {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            step *= 2.0;
            c = b + step;
            fc = f(c);
        } else {
            c = b;
            fc = fb;
            b = a;
            fb = fa;
            step *= 2.0;
            a = b - step;
            fa = f(a);
        }
    }
    // Golden-section shrink on the unimodal bracket [a, c].
    const double gr = 0.6180339887498949;
    double x1 = c - gr * (c - a);
    double x2 = a + gr * (c - a);
    double f1 = f(x1), f2 = f(x2);
    while (c - a > 1e-12 * (1.0 + std::abs(a) + std::abs(c)) && evals < 100000) {
        if (f1 >= f2) {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - gr * (c - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (c - a);
            f2 = f(x2);
        }
    }
    ObjectiveMaximum out;
    out.weight = f1 >= f2 ? x1 : x2;
    out.objective = std::max(f1, f2);
    out.evaluations = evals;
    return out;
}

// ---------------------------------------------------------------------------
// Portfolio assembly
// ---------------------------------------------------------------------------

enum class Regime { auto_select, return_seeking, risk_avoiding, classical };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::auto_select: return "auto";
        case Regime::return_seeking: return "return_seeking";
        case Regime::risk_avoiding: return "risk_avoiding";
        case Regime::classical: return "classical";
    }
    return "?";
}

struct AllocationResult {
    std::vector<double> component_weights;   // one per component
    std::vector<double> asset_weights;       // unmixing^T * component_weights
    std::vector<Regime> regimes;             // regime actually used per component
    std::vector<double> hurdles;             // r_c diagnostics per component
    std::vector<std::string> notes;          // degeneracy annotations ("" if clean)
};

// Weights for every component of a fitted model against one liability.
// Degenerate components are annotated and given zero weight rather than
// failing the whole allocation.
inline AllocationResult allocate(const MixingModel& model, const ReturnSeries& liability,
                                 const std::vector<double>& asset_funding_rates,
                                 double liability_rate, int k, const RiskAppetite& appetite,
                                 Regime regime = Regime::auto_select) {
    appetite.validate();
    const std::vector<ComponentStats> stats =
        component_stats(model, liability, asset_funding_rates, k, liability_rate);
    AllocationResult res;
    const std::size_t r = stats.size();
    res.component_weights.resize(r, 0.0);
    res.asset_weights.assign(static_cast<std::size_t>(model.unmixing.cols()), 0.0);
    res.regimes.resize(r, regime);
    res.hurdles.resize(r, 0.0);
    res.notes.resize(r);

    for (std::size_t i = 0; i < r; ++i) {
        const ComponentStats& cs = stats[i];
        try {
            res.hurdles[i] = hurdle_correction(cs, appetite);
            switch (regime) {
                case Regime::return_seeking:
                    res.component_weights[i] = return_seeking_weight(cs, appetite);
                    break;
                case Regime::classical:
                    res.component_weights[i] = classical_weight(cs, appetite);
                    break;
                case Regime::risk_avoiding: {
                    const RiskAvoidingWeight ra = risk_avoiding_weight(cs, appetite);
                    res.component_weights[i] = ra.weight;
                    if (ra.liability_spanned) res.notes[i] = "liability fully spanned by hedge";
                    break;
                }
                case Regime::auto_select: {
                    const double w_rs = return_seeking_weight(cs, appetite);
                    const RiskAvoidingWeight ra = risk_avoiding_weight(cs, appetite);
                    const double obj_rs =
                        objective_value(w_rs, model.components[i], liability, cs.r, liability_rate,
                                        k, appetite);
                    const double obj_ra =
                        objective_value(ra.weight, model.components[i], liability, cs.r,
                                        liability_rate, k, appetite);
                    if (obj_rs > obj_ra) {
                        res.component_weights[i] = w_rs;
                        res.regimes[i] = Regime::return_seeking;
                    } else {
                        res.component_weights[i] = ra.weight;
                        res.regimes[i] = Regime::risk_avoiding;
                        if (ra.liability_spanned) res.notes[i] = "liability fully spanned by hedge";
                    }
                    break;
                }
            }
        } catch (const DegenerateInputError& e) {
            res.component_weights[i] = 0.0;
            res.notes[i] = e.what();
        }
    }

    for (std::size_t j = 0; j < res.asset_weights.size(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < r; ++i)
            acc += model.unmixing(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                   res.component_weights[i];
        res.asset_weights[j] = acc;
    }
    return res;
}

}  // namespace xdldi
