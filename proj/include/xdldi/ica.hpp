#pragma once

// Independent-component decomposition of a return panel.
//
// Pipeline: center -> SVD whitening with rank truncation -> symmetric
// FastICA with the log-cosh contrast -> canonical ordering and signs.
// Everything is deterministic for a fixed (panel, seed, tolerances).

#include "moments.hpp"
#include "rng.hpp"
#include "series.hpp"
#include "stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace xdldi {

struct WhitenResult {
    ReturnPanel whitened;               // T x r, unit sample covariance (1/T normalizer)
    Eigen::MatrixXd transform;          // r x N: whitened = centered * transform^T
    Eigen::MatrixXd inverse_transform;  // N x r: centered  = whitened * inverse_transform^T
    Eigen::VectorXd column_means;       // N
    int rank = 0;
};

// Rank-truncated whitening. Rank counts singular values of the centered
// panel at or above rank_tolerance * largest.
inline WhitenResult whiten(const ReturnPanel& panel, double rank_tolerance = 1e-10) {
    panel.validate();
    if (!(rank_tolerance > 0.0) || !(rank_tolerance < 1.0))
        throw InvalidInputError("whiten: rank_tolerance must lie in (0,1)");
    const Eigen::Index T = panel.returns.rows();
    const Eigen::Index N = panel.returns.cols();

    WhitenResult res;
    res.column_means = panel.returns.colwise().mean();
    Eigen::MatrixXd centered = panel.returns.rowwise() - res.column_means.transpose();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0)
        throw DegenerateInputError("whiten: zero-variance panel");
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) >= rank_tolerance * sv(0)) ++r;
    res.rank = r;

    const double sqrt_T = std::sqrt(static_cast<double>(T));
    const Eigen::MatrixXd Vr = svd.matrixV().leftCols(r);
    const Eigen::VectorXd sr = sv.head(r);
    // Z = centered * K^T has sample covariance (1/T) Z^T Z = I_r.
    res.transform = (Vr * (sqrt_T * sr.cwiseInverse()).asDiagonal()).transpose();
    res.inverse_transform = Vr * (sr / sqrt_T).asDiagonal();

    res.whitened.assets.reserve(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) res.whitened.assets.push_back("w" + std::to_string(i));
    res.whitened.timestamps = panel.timestamps;
    res.whitened.returns = centered * res.transform.transpose();
    (void)N;
    return res;
}

// Fitted decomposition: components = raw_returns * unmixing^T (component
// means retained), centered_returns ~= centered_components * mixing^T.
struct MixingModel {
    Eigen::MatrixXd unmixing;  // r x N
    Eigen::MatrixXd mixing;    // N x r
    std::vector<ReturnSeries> components;
    Eigen::VectorXd asset_means;  // N
    int rank = 0;
};

struct IcaResult {
    MixingModel model;
    bool converged = false;
    int iterations = 0;
    double final_change = 0.0;  // last max_i (1 - |<w_i_new, w_i_old>|)
    // All recovered components have near-zero excess kurtosis: the contrast
    // had nothing to lock onto (e.g. purely Gaussian sources), so the
    // rotation is arbitrary even though the fit "converged".
    bool low_nongaussianity = false;
};

namespace detail {

// W <- (W W^T)^{-1/2} W via symmetric eigendecomposition.
inline Eigen::MatrixXd symmetric_decorrelate(const Eigen::MatrixXd& W) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W * W.transpose());
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-300);
    return es.eigenvectors() * ev.cwiseInverse().cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose() * W;
}

inline double excess_kurtosis(const std::vector<double>& v) {
    const double mu = mean(v);
    double s2 = 0.0, s4 = 0.0;
    for (double x : v) {
        const double d = x - mu;
        s2 += d * d;
        s4 += d * d * d * d;
    }
    const double n = static_cast<double>(v.size());
    s2 /= n;
    s4 /= n;
    if (s2 <= 0.0) return 0.0;
    return s4 / (s2 * s2) - 3.0;
}

}  // namespace detail

// Symmetric FastICA on the whitened panel. Non-convergence is reported in
// the result status, not thrown: the best iterate is still returned.
inline IcaResult fast_ica(const ReturnPanel& panel, std::uint64_t seed, double tol = 1e-10,
                          int max_iter = 1000, double rank_tolerance = 1e-10) {
    if (!(tol > 0.0)) throw InvalidInputError("fast_ica: tol must be positive");
    if (max_iter < 1) throw InvalidInputError("fast_ica: max_iter must be >= 1");
    const WhitenResult wh = whiten(panel, rank_tolerance);
    const Eigen::MatrixXd& Z = wh.whitened.returns;  // T x r
    const Eigen::Index T = Z.rows();
    const int r = wh.rank;

    // Seeded start, orthonormalized.
    Rng rng(seed);
    Eigen::MatrixXd W(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) W(i, j) = rng.normal();
    W = detail::symmetric_decorrelate(W);

    IcaResult res;
    const double inv_T = 1.0 / static_cast<double>(T);
    for (int it = 1; it <= max_iter; ++it) {
        const Eigen::MatrixXd U = Z * W.transpose();          // T x r projections
        const Eigen::MatrixXd G = U.array().tanh().matrix();  // log-cosh contrast derivative
        Eigen::MatrixXd W_new(r, r);
        for (int i = 0; i < r; ++i) {
            const double gprime_mean = (1.0 - G.col(i).array().square()).mean();
            W_new.row(i) = inv_T * (G.col(i).transpose() * Z) - gprime_mean * W.row(i);
        }
        W_new = detail::symmetric_decorrelate(W_new);
        double change = 0.0;
        for (int i = 0; i < r; ++i)
            change = std::max(change, 1.0 - std::abs(W_new.row(i).dot(W.row(i))));
        W = W_new;
        res.iterations = it;
        res.final_change = change;
        if (change < tol) {
            res.converged = true;
            break;
        }
    }

    MixingModel& m = res.model;
    m.rank = r;
    m.asset_means = wh.column_means;
    m.unmixing = W * wh.transform;                  // r x N
    m.mixing = wh.inverse_transform * W.transpose();  // N x r

    // Canonical presentation: order components by explained variance
    // (squared mixing-column norm), descending; fix signs so each mixing
    // column's largest-magnitude entry is positive.
    std::vector<int> order(static_cast<std::size_t>(r));
    std::iota(order.begin(), order.end(), 0);
    Eigen::VectorXd expl(r);
    for (int i = 0; i < r; ++i) expl(i) = m.mixing.col(i).squaredNorm();
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return expl(a) > expl(b); });
    Eigen::MatrixXd unmix_sorted(r, m.unmixing.cols());
    Eigen::MatrixXd mix_sorted(m.mixing.rows(), r);
    for (int i = 0; i < r; ++i) {
        Eigen::Index imax;
        m.mixing.col(order[static_cast<std::size_t>(i)]).cwiseAbs().maxCoeff(&imax);
        const double flip =
            m.mixing(imax, order[static_cast<std::size_t>(i)]) < 0.0 ? -1.0 : 1.0;
        unmix_sorted.row(i) = flip * m.unmixing.row(order[static_cast<std::size_t>(i)]);
        mix_sorted.col(i) = flip * m.mixing.col(order[static_cast<std::size_t>(i)]);
    }
    m.unmixing = unmix_sorted;
    m.mixing = mix_sorted;

    // Components from raw (un-centered) returns so their means survive.
    const Eigen::MatrixXd comp = panel.returns * m.unmixing.transpose();  // T x r
    m.components.reserve(static_cast<std::size_t>(r));
    double max_abs_kurt = 0.0;
    for (int i = 0; i < r; ++i) {
        ReturnSeries s;
        s.timestamps = panel.timestamps;
        s.values.assign(comp.col(i).data(), comp.col(i).data() + comp.rows());
        max_abs_kurt = std::max(max_abs_kurt, std::abs(detail::excess_kurtosis(s.values)));
        m.components.push_back(std::move(s));
    }
    res.low_nongaussianity = res.converged && max_abs_kurt < 0.1;
    return res;
}

// Summary statistics of every component against one liability series.
// Component funding rates are the unmixing-weighted asset funding rates;
// the hedge residual uses the correlation hedge rho * sigma_L / sigma.
inline std::vector<ComponentStats> component_stats(const MixingModel& model,
                                                   const ReturnSeries& liability,
                                                   const std::vector<double>& asset_funding_rates,
                                                   int k, double liability_rate = 0.0) {
    if (k < 1) throw InvalidInputError("component_stats: k must be >= 1");
    liability.validate();
    if (model.components.empty())
        throw DegenerateInputError("component_stats: model has no components");
    if (static_cast<Eigen::Index>(asset_funding_rates.size()) != model.unmixing.cols())
        throw AlignmentError("component_stats: " + std::to_string(asset_funding_rates.size()) +
                             " funding rates vs " + std::to_string(model.unmixing.cols()) +
                             " assets");
    require_aligned(model.components.front(), liability, "component_stats");

    const double mu_L = mean(liability.values);
    const double sigma_L = sample_stdev(liability.values);
    const std::size_t n = liability.size();

    std::vector<ComponentStats> out;
    out.reserve(model.components.size());
    for (std::size_t ci = 0; ci < model.components.size(); ++ci) {
        const ReturnSeries& comp = model.components[ci];
        ComponentStats cs;
        cs.k = k;
        cs.mu = mean(comp.values);
        cs.sigma = sample_stdev(comp.values);
        cs.sigma_L = sigma_L;
        double rate = 0.0;
        for (std::size_t j = 0; j < asset_funding_rates.size(); ++j)
            rate += model.unmixing(static_cast<Eigen::Index>(ci), static_cast<Eigen::Index>(j)) *
                    asset_funding_rates[j];
        cs.r = rate;

        double cov = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            cov += (comp.values[t] - cs.mu) * (liability.values[t] - mu_L);
        cov /= static_cast<double>(n);
        cs.rho = (cs.sigma > 0.0 && sigma_L > 0.0) ? cov / (cs.sigma * sigma_L) : 0.0;
        cs.rho = std::clamp(cs.rho, -1.0, 1.0);

        cs.own_moment_2k = central_moment(comp, 2 * k);
        cs.cross_moment_2k1 = cross_moment(comp, liability, k, liability_rate);

        // Residual of the correlation hedge: (dL - r_L) - rho (sigma_L/sigma)(dC - mu).
        if (k == 1) {
            cs.residual_moment_2k2 = SignedLogValue::one();  // exponent 2k-2 = 0
        } else {
            const double beta = cs.sigma > 0.0 ? cs.rho * sigma_L / cs.sigma : 0.0;
            SignedLogSum sum;
            for (std::size_t t = 0; t < n; ++t) {
                const double resid =
                    (liability.values[t] - liability_rate) - beta * (comp.values[t] - cs.mu);
                if (resid == 0.0) continue;
                sum.add(1, static_cast<double>(2 * k - 2) * std::log(std::abs(resid)));
            }
            SignedLogValue total = sum.total();
            if (!total.is_zero()) total.log_magnitude -= std::log(static_cast<double>(n));
            cs.residual_moment_2k2 = total;
        }
        cs.validate();
        out.push_back(cs);
    }
    return out;
}

}  // namespace xdldi
