#pragma once

// Walk-forward backtests.
//
// Both backtests report the cumulative net PnL of a book that is short the
// hedged instrument (the liability NPV, or a written straddle) and long the
// hedge assets. Value changes obey, per step and strategy,
//     value[t] - value[t-1] = pnl[t] - cost[t]
// where pnl is the sum of position * price-change terms and cost is the
// transaction cost of that step's trades. All estimation uses data strictly
// before the evaluation window; weights never see the future.

#include "allocation.hpp"
#include "ica.hpp"
#include "io.hpp"
#include "liability.hpp"
#include "moments.hpp"
#include "options.hpp"
#include "series.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace xdldi {

struct BacktestConfig {
    std::vector<int> k_list{1, 5, 10, 50};
    double lambda = 0.01;
    int estimation_window = 60;
    int rebalance_every = 1;
    double cost_rate = 0.0006;
    std::uint64_t seed = 1;
    double funding_rate = 0.0;    // per-period funding charge on hedge positions
    double liability_rate = 0.0;  // per-period drift deduction on the liability
    double rank_tolerance = 1e-10;
    double ica_tol = 1e-8;
    int ica_max_iter = 1000;
    bool roll_valuation = true;
    double vol_alpha = 0.0;  // vol-of-vol for option hedges
    double vol_q = 0.0;      // spot/vol correlation for option hedges

    void validate() const {
        if (k_list.empty()) throw InvalidInputError("BacktestConfig: k_list must be non-empty");
        for (int k : k_list)
            if (k < 1) throw InvalidInputError("BacktestConfig: k_list entries must be >= 1");
        if (!(lambda > 0.0)) throw InvalidInputError("BacktestConfig: lambda must be positive");
        if (estimation_window < 30)
            throw InvalidInputError("BacktestConfig: estimation_window must be >= 30, got " +
                                    std::to_string(estimation_window));
        if (rebalance_every < 1)
            throw InvalidInputError("BacktestConfig: rebalance_every must be >= 1");
        if (cost_rate < 0.0) throw InvalidInputError("BacktestConfig: cost_rate must be >= 0");
        if (!(rank_tolerance > 0.0 && rank_tolerance < 1.0))
            throw InvalidInputError("BacktestConfig: rank_tolerance must lie in (0,1)");
        if (!(ica_tol > 0.0)) throw InvalidInputError("BacktestConfig: ica_tol must be positive");
        if (ica_max_iter < 1) throw InvalidInputError("BacktestConfig: ica_max_iter must be >= 1");
    }

    static BacktestConfig from_run_config(const RunConfig& rc) {
        BacktestConfig c;
        c.k_list = rc.k_list;
        c.lambda = rc.lambda;
        c.estimation_window = rc.estimation_window;
        c.rebalance_every = rc.rebalance_every;
        c.cost_rate = rc.cost_rate;
        c.seed = rc.seed;
        c.funding_rate = rc.funding_rate;
        c.liability_rate = rc.liability_rate;
        c.rank_tolerance = rc.rank_tolerance;
        c.ica_tol = rc.ica_tol;
        c.ica_max_iter = rc.ica_max_iter;
        c.roll_valuation = rc.roll_valuation;
        c.vol_alpha = rc.vol_alpha;
        c.vol_q = rc.vol_q;
        c.validate();
        return c;
    }
};

struct TradeRecord {
    std::string date;
    std::string instrument;
    double quantity = 0.0;  // signed position change (notional for LDI, shares for options)
    double price = 0.0;
    double cost = 0.0;
};

struct StrategySeries {
    std::string name;
    std::vector<double> value;  // cumulative net PnL, aligned to report dates
    std::vector<double> pnl;    // gross position * price-change PnL per step
    std::vector<double> cost;   // transaction cost per step
};

struct WeightRecord {
    std::string strategy;
    std::string instrument;
    double weight = 0.0;
};

struct BacktestReport {
    std::vector<std::string> dates;  // setup date followed by evaluation dates
    std::vector<StrategySeries> strategies;
    std::vector<TradeRecord> trades;
    std::vector<WeightRecord> weights;
    std::vector<std::string> notes;

    const StrategySeries& strategy(const std::string& name) const {
        for (const StrategySeries& s : strategies)
            if (s.name == name) return s;
        throw InvalidInputError("BacktestReport: no strategy named '" + name + "'");
    }
};

struct SummaryStats {
    double vol = 0.0;           // stdev of per-step net value changes
    double xd = 0.0;            // max |de-meaned net value change|
    double max_drawdown = 0.0;  // peak-to-trough of the value path
    double total_cost = 0.0;
    double final_value = 0.0;
};

inline SummaryStats summarize(const StrategySeries& s) {
    if (s.value.size() < 2) throw InvalidInputError("summarize: series too short");
    std::vector<double> changes(s.value.size() - 1);
    for (std::size_t i = 1; i < s.value.size(); ++i) changes[i - 1] = s.value[i] - s.value[i - 1];
    SummaryStats st;
    const double m = mean(changes);
    st.vol = sample_stdev(changes);
    for (double c : changes) st.xd = std::max(st.xd, std::abs(c - m));
    double peak = s.value.front();
    for (double v : s.value) {
        peak = std::max(peak, v);
        st.max_drawdown = std::max(st.max_drawdown, peak - v);
    }
    st.total_cost = std::accumulate(s.cost.begin(), s.cost.end(), 0.0);
    st.final_value = s.value.back();
    return st;
}

// Transaction costs at a proportional rate on traded value.
inline double apply_costs(std::vector<TradeRecord>& trades, double cost_rate) {
    if (cost_rate < 0.0) throw InvalidInputError("apply_costs: cost_rate must be >= 0");
    double total = 0.0;
    for (TradeRecord& t : trades) {
        t.cost = cost_rate * std::abs(t.quantity) * t.price;
        total += t.cost;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Liability-driven backtest
// ---------------------------------------------------------------------------

// Fits the decomposition and the per-component 2k-moment statistics on the
// first estimation_window return periods, forms return-seeking weights per k,
// then walks the remaining periods marking a book that is long the asset
// weights (scaled to the liability NPV) and short the liability.
inline BacktestReport run_ldi_backtest(const ReturnPanel& panel, const CashflowSchedule& schedule,
                                       const std::vector<DatedCurve>& curves,
                                       const BacktestConfig& cfg) {
    cfg.validate();
    panel.validate();
    const long T = static_cast<long>(panel.periods());
    const long W = cfg.estimation_window;
    if (T < W + 2)
        throw InvalidInputError("run_ldi_backtest: need at least estimation_window + 2 = " +
                                std::to_string(W + 2) + " return periods, got " +
                                std::to_string(T));

    // The curves must mark every panel date plus the day before the first
    // return (so that liability returns align with panel returns).
    const ReturnSeries liab_returns = liability_returns(schedule, curves, cfg.roll_valuation);
    if (liab_returns.timestamps != panel.timestamps)
        throw AlignmentError(
            "run_ldi_backtest: liability return dates do not match panel dates (need curves on "
            "every price date)");
    const std::vector<double> liab_values = liability_values(schedule, curves, cfg.roll_valuation);

    // Estimation slice.
    ReturnPanel est_panel;
    est_panel.assets = panel.assets;
    est_panel.timestamps.assign(panel.timestamps.begin(), panel.timestamps.begin() + W);
    est_panel.returns = panel.returns.topRows(W);
    ReturnSeries est_liab;
    est_liab.timestamps = est_panel.timestamps;
    est_liab.values.assign(liab_returns.values.begin(), liab_returns.values.begin() + W);

    const IcaResult ica = fast_ica(est_panel, cfg.seed, cfg.ica_tol, cfg.ica_max_iter,
                                   cfg.rank_tolerance);
    BacktestReport report;
    if (!ica.converged)
        report.notes.push_back("ica: not converged after " + std::to_string(ica.iterations) +
                               " iterations (final change " + format_double(ica.final_change) +
                               ")");
    if (ica.low_nongaussianity)
        report.notes.push_back("ica: components look Gaussian; rotation is weakly identified");

    const std::vector<double> funding(panel.width(), cfg.funding_rate);
    const RiskAppetite appetite{cfg.lambda};

    report.dates.reserve(static_cast<std::size_t>(T - W) + 1);
    report.dates.push_back(panel.timestamps[static_cast<std::size_t>(W - 1)]);
    for (long t = W; t < T; ++t) report.dates.push_back(panel.timestamps[static_cast<std::size_t>(t)]);

    // Unhedged benchmark: short the liability, no assets.
    {
        StrategySeries s;
        s.name = "liability";
        s.value.push_back(0.0);
        s.pnl.push_back(0.0);
        s.cost.push_back(0.0);
        for (long t = W; t < T; ++t) {
            const double dL = liab_values[static_cast<std::size_t>(t + 1)] -
                              liab_values[static_cast<std::size_t>(t)] -
                              cfg.liability_rate * liab_values[static_cast<std::size_t>(t)];
            s.pnl.push_back(-dL);
            s.cost.push_back(0.0);
            s.value.push_back(s.value.back() - dL);
        }
        report.strategies.push_back(std::move(s));
    }

    for (int k : cfg.k_list) {
        const AllocationResult alloc = allocate(ica.model, est_liab, funding, cfg.liability_rate,
                                                k, appetite, Regime::return_seeking);
        const std::string name = "ldi_k" + std::to_string(k);
        for (std::size_t i = 0; i < alloc.component_weights.size(); ++i) {
            report.weights.push_back({name, "c" + std::to_string(i), alloc.component_weights[i]});
            if (!alloc.notes[i].empty())
                report.notes.push_back(name + "/c" + std::to_string(i) + ": " + alloc.notes[i]);
        }
        for (std::size_t j = 0; j < alloc.asset_weights.size(); ++j)
            report.weights.push_back({name, panel.assets[j], alloc.asset_weights[j]});

        StrategySeries s;
        s.name = name;
        std::vector<double> notional(panel.width(), 0.0);
        std::vector<TradeRecord> setup;
        for (std::size_t j = 0; j < panel.width(); ++j) {
            notional[j] = alloc.asset_weights[j] * liab_values[static_cast<std::size_t>(W)];
            if (notional[j] != 0.0)
                setup.push_back({report.dates.front(), panel.assets[j], notional[j], 1.0, 0.0});
        }
        double cost0 = apply_costs(setup, cfg.cost_rate);
        report.trades.insert(report.trades.end(), setup.begin(), setup.end());
        s.value.push_back(-cost0);
        s.pnl.push_back(0.0);
        s.cost.push_back(cost0);

        for (long t = W; t < T; ++t) {
            double asset_pnl = 0.0;
            for (std::size_t j = 0; j < panel.width(); ++j)
                asset_pnl += notional[j] *
                             (panel.returns(t, static_cast<Eigen::Index>(j)) - cfg.funding_rate);
            const double dL = liab_values[static_cast<std::size_t>(t + 1)] -
                              liab_values[static_cast<std::size_t>(t)] -
                              cfg.liability_rate * liab_values[static_cast<std::size_t>(t)];
            const double pnl = asset_pnl - dL;

            double step_cost = 0.0;
            const bool is_last = t + 1 == T;
            if (!is_last && (t + 1 - W) % cfg.rebalance_every == 0) {
                std::vector<TradeRecord> rebalance;
                const std::string& date = panel.timestamps[static_cast<std::size_t>(t)];
                for (std::size_t j = 0; j < panel.width(); ++j) {
                    const double target =
                        alloc.asset_weights[j] * liab_values[static_cast<std::size_t>(t + 1)];
                    const double grown =
                        notional[j] * (1.0 + panel.returns(t, static_cast<Eigen::Index>(j)));
                    if (std::abs(target - grown) > 0.0)
                        rebalance.push_back({date, panel.assets[j], target - grown, 1.0, 0.0});
                    notional[j] = target;
                }
                step_cost = apply_costs(rebalance, cfg.cost_rate);
                report.trades.insert(report.trades.end(), rebalance.begin(), rebalance.end());
            } else {
                for (std::size_t j = 0; j < panel.width(); ++j)
                    notional[j] *= 1.0 + panel.returns(t, static_cast<Eigen::Index>(j));
            }
            s.pnl.push_back(pnl);
            s.cost.push_back(step_cost);
            s.value.push_back(s.value.back() + pnl - step_cost);
        }
        report.strategies.push_back(std::move(s));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Option hedge backtest
// ---------------------------------------------------------------------------

namespace detail {

struct StraddleSeries {
    std::string underlying;
    double strike = 0.0;
    std::string expiry;
    std::map<std::string, double> call_close;  // by date
    std::map<std::string, double> put_close;
};

inline std::map<std::string, StraddleSeries> group_straddles(const QuoteTable& quotes) {
    std::map<std::string, StraddleSeries> by_underlying;
    for (const OptionQuote& q : quotes.rows) {
        StraddleSeries& s = by_underlying[q.underlying];
        if (s.underlying.empty()) {
            s.underlying = q.underlying;
            s.strike = q.strike;
            s.expiry = q.expiry;
        }
        if (q.strike != s.strike || q.expiry != s.expiry)
            throw InvalidInputError("option backtest: underlying '" + q.underlying +
                                    "' mixes strikes or expiries; one straddle per underlying");
        auto& leg = q.kind == OptionKind::call ? s.call_close : s.put_close;
        leg[q.date] = q.close;
    }
    for (const auto& [und, s] : by_underlying) {
        if (s.call_close.empty() || s.put_close.empty())
            throw InvalidInputError("option backtest: underlying '" + und +
                                    "' needs both call and put quotes");
        if (s.call_close.begin()->first != s.put_close.begin()->first)
            throw InvalidInputError("option backtest: underlying '" + und +
                                    "' legs start on different dates");
    }
    return by_underlying;
}

}  // namespace detail

// Short one ATM straddle per underlying at its first quote date, hold to
// expiry, hedge daily at the close. Strategies per underlying:
//   <und>/unhedged   no hedge;
//   <und>/delta      classic delta replication of the straddle;
//   <und>/k<K>       2k-moment weight on the skew-adjusted ratio, with the
//                    own moment taken from the trailing estimation window.
inline BacktestReport run_option_hedge_backtest(const QuoteTable& quotes,
                                                const PriceTable& underlier_prices,
                                                const BacktestConfig& cfg) {
    cfg.validate();
    const std::map<std::string, detail::StraddleSeries> straddles =
        detail::group_straddles(quotes);
    const RiskAppetite appetite{cfg.lambda};

    BacktestReport report;
    std::vector<std::string> all_dates;

    for (const auto& [und, straddle] : straddles) {
        const auto instr_it =
            std::find(underlier_prices.instruments.begin(), underlier_prices.instruments.end(), und);
        if (instr_it == underlier_prices.instruments.end())
            throw InvalidInputError("option backtest: no prices for underlying '" + und + "'");
        const Eigen::Index col = instr_it - underlier_prices.instruments.begin();

        const std::string write_date = straddle.call_close.begin()->first;
        const std::string& expiry_date = straddle.expiry;
        const auto date_lo = std::lower_bound(underlier_prices.dates.begin(),
                                              underlier_prices.dates.end(), write_date);
        if (date_lo == underlier_prices.dates.end() || *date_lo != write_date)
            throw InvalidInputError("option backtest: write date " + write_date +
                                    " missing from prices of '" + und + "'");
        const auto date_hi = std::lower_bound(underlier_prices.dates.begin(),
                                              underlier_prices.dates.end(), expiry_date);
        if (date_hi == underlier_prices.dates.end() || *date_hi != expiry_date)
            throw InvalidInputError("option backtest: expiry date " + expiry_date +
                                    " missing from prices of '" + und + "'");
        const long wi = date_lo - underlier_prices.dates.begin();
        const long ei = date_hi - underlier_prices.dates.begin();
        if (ei <= wi)
            throw InvalidInputError("option backtest: expiry not after write date for '" + und +
                                    "'");
        if (wi < cfg.estimation_window + 1)
            throw InvalidInputError(
                "option backtest: need " + std::to_string(cfg.estimation_window + 1) +
                " price dates before the write date of '" + und + "', got " + std::to_string(wi));

        // Trailing estimation window, strictly before the write date.
        std::vector<double> trailing(static_cast<std::size_t>(cfg.estimation_window));
        for (long t = 0; t < cfg.estimation_window; ++t) {
            const long row = wi - cfg.estimation_window + t;
            trailing[static_cast<std::size_t>(t)] =
                underlier_prices.close(row, col) / underlier_prices.close(row - 1, col) - 1.0;
        }
        const ReturnSeries trailing_series = ReturnSeries::from_values(trailing);
        const double mu = mean(trailing);

        // Life dates and straddle marks (carry the last implied vol through
        // quoteless days; no hedge trade on those days).
        const std::vector<std::string> life(underlier_prices.dates.begin() + wi,
                                            underlier_prices.dates.begin() + ei + 1);
        const long n_life = static_cast<long>(life.size()) - 1;
        std::vector<double> spot(life.size()), straddle_value(life.size()), iv(life.size());
        std::vector<bool> quoted(life.size(), false);
        std::vector<Greeks> greeks(life.size());
        double carried_iv = 0.0;
        for (std::size_t t = 0; t < life.size(); ++t) {
            const std::string& date = life[t];
            spot[t] = underlier_prices.close(wi + static_cast<long>(t), col);
            const double tau = year_fraction(date, expiry_date);
            const OptionSpec call{und, straddle.strike, tau, OptionKind::call, 1};
            const OptionSpec put{und, straddle.strike, tau, OptionKind::put, 1};
            const auto cq = straddle.call_close.find(date);
            const auto pq = straddle.put_close.find(date);
            if (t + 1 == life.size()) {
                // Expiry: cash settle at intrinsic value.
                straddle_value[t] = intrinsic_value(call, spot[t]) + intrinsic_value(put, spot[t]);
                iv[t] = carried_iv;
                continue;
            }
            if (cq != straddle.call_close.end() && pq != straddle.put_close.end()) {
                straddle_value[t] = cq->second + pq->second;
                iv[t] = straddle_implied_vol(call, put, spot[t], cq->second, pq->second);
                quoted[t] = true;
            } else if (t == 0) {
                throw InvalidInputError("option backtest: no quote on the write date for '" + und +
                                        "'");
            } else {
                iv[t] = carried_iv;
                straddle_value[t] =
                    bs_price(call, spot[t], iv[t]) + bs_price(put, spot[t], iv[t]);
            }
            carried_iv = iv[t];
            greeks[t] = bs_greeks(call, spot[t], iv[t]) + bs_greeks(put, spot[t], iv[t]);
        }

        // Hedge weight per strategy and day. Entry 0 is the write-date weight.
        struct HedgeRule {
            std::string name;
            int k = 0;  // 0: delta baseline
        };
        std::vector<HedgeRule> rules;
        rules.push_back({und + "/unhedged", -1});
        rules.push_back({und + "/delta", 0});
        for (int k : cfg.k_list) rules.push_back({und + "/k" + std::to_string(k), k});

        if (report.dates.empty()) {
            report.dates = life;
        } else if (report.dates != life) {
            throw InvalidInputError(
                "option backtest: underlyings trade on different date grids; run them separately");
        }

        for (const HedgeRule& rule : rules) {
            StrategySeries s;
            s.name = rule.name;
            double position = 0.0;
            double value = 0.0;

            const auto target_weight = [&](std::size_t t) -> double {
                if (rule.k < 0) return 0.0;
                if (rule.k == 0) return greeks[t].delta;
                VolParams vp{iv[t], cfg.vol_alpha, cfg.vol_q};
                const SignedLogValue own = central_moment(trailing_series, 2 * rule.k);
                return option_weight_empirical(mu, cfg.funding_rate, own, greeks[t], vp, rule.k,
                                               appetite);
            };

            // Write date: sell the straddle, set the initial hedge.
            {
                std::vector<TradeRecord> trades;
                trades.push_back({life[0], und + "-straddle", -1.0, straddle_value[0], 0.0});
                const double w0 = target_weight(0);
                if (w0 != 0.0) trades.push_back({life[0], und, w0, spot[0], 0.0});
                const double cost0 = apply_costs(trades, cfg.cost_rate);
                report.trades.insert(report.trades.end(), trades.begin(), trades.end());
                report.weights.push_back({rule.name, und, w0});
                position = w0;
                value = -cost0;
                s.value.push_back(value);
                s.pnl.push_back(0.0);
                s.cost.push_back(cost0);
            }

            for (long t = 1; t <= n_life; ++t) {
                const std::size_t ut = static_cast<std::size_t>(t);
                const double pnl =
                    position * (spot[ut] - spot[ut - 1] - cfg.funding_rate * spot[ut - 1]) -
                    (straddle_value[ut] - straddle_value[ut - 1] -
                     cfg.funding_rate * straddle_value[ut - 1]);
                double step_cost = 0.0;
                std::vector<TradeRecord> trades;
                if (t == n_life) {
                    // Expiry: unwind the share hedge; the straddle cash-settles.
                    if (position != 0.0)
                        trades.push_back({life[ut], und, -position, spot[ut], 0.0});
                    position = 0.0;
                } else if (quoted[ut] && rule.k >= 0) {
                    const double target = target_weight(ut);
                    if (target != position)
                        trades.push_back({life[ut], und, target - position, spot[ut], 0.0});
                    position = target;
                }
                if (!trades.empty()) {
                    step_cost = apply_costs(trades, cfg.cost_rate);
                    report.trades.insert(report.trades.end(), trades.begin(), trades.end());
                }
                value += pnl - step_cost;
                s.value.push_back(value);
                s.pnl.push_back(pnl);
                s.cost.push_back(step_cost);
            }
            report.strategies.push_back(std::move(s));
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Report output
// ---------------------------------------------------------------------------

inline void write_report_csv(const BacktestReport& report, const std::string& path) {
    std::vector<std::string> rows;
    for (const StrategySeries& s : report.strategies)
        for (std::size_t t = 0; t < report.dates.size(); ++t)
            rows.push_back(report.dates[t] + "," + s.name + "," + format_double(s.value[t]) + "," +
                           format_double(s.pnl[t]) + "," + format_double(s.cost[t]));
    write_csv(path, "date,strategy,value,pnl,cost", rows);
}

inline void write_trades_csv(const BacktestReport& report, const std::string& path) {
    std::vector<std::string> rows;
    rows.reserve(report.trades.size());
    for (const TradeRecord& t : report.trades)
        rows.push_back(t.date + "," + t.instrument + "," + format_double(t.quantity) + "," +
                       format_double(t.price) + "," + format_double(t.cost));
    write_csv(path, "date,instrument,quantity,price,cost", rows);
}

inline void write_weights_csv(const BacktestReport& report, const std::string& path) {
    std::vector<std::string> rows;
    rows.reserve(report.weights.size());
    for (const WeightRecord& w : report.weights)
        rows.push_back(w.strategy + "," + w.instrument + "," + format_double(w.weight));
    write_csv(path, "strategy,instrument,weight", rows);
}

// Per-strategy summary statistics plus run metadata, written atomically.
inline void write_summary_json(const BacktestReport& report, const std::string& path,
                               const std::map<std::string, std::string>& meta = {}) {
    nlohmann::ordered_json j;
    for (const auto& [key, value] : meta) j[key] = value;
    j["first_date"] = report.dates.front();
    j["last_date"] = report.dates.back();
    j["periods"] = report.dates.size() - 1;
    nlohmann::ordered_json strategies;
    for (const StrategySeries& s : report.strategies) {
        const SummaryStats st = summarize(s);
        nlohmann::ordered_json row;
        row["vol"] = st.vol;
        row["xd"] = st.xd;
        row["max_drawdown"] = st.max_drawdown;
        row["total_cost"] = st.total_cost;
        row["final_value"] = st.final_value;
        strategies[s.name] = row;
    }
    j["strategies"] = strategies;
    if (!report.notes.empty()) j["notes"] = report.notes;
    atomic_write(path, j.dump(2) + "\n");
}

}  // namespace xdldi
