// xdldi command-line tool.
//
// Subcommands: risk-report, decompose, profile, backtest-ldi,
// backtest-options, synth. Global flags: --seed, --config, --out-dir.
// Values from a --config file are applied first; explicit command-line
// flags override them. All outputs are written atomically and contain no
// timestamps, so identical inputs and seed give byte-identical files.

#include <xdldi/xdldi.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using xdldi::format_double;

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void note_written(const std::string& path) { std::cout << "wrote " << path << "\n"; }

// Returns panel from whichever of prices/returns is configured.
xdldi::ReturnPanel load_panel_input(const xdldi::RunConfig& rc) {
    if (!rc.prices.empty() && !rc.returns.empty())
        throw xdldi::InvalidInputError("give either a prices file or a returns file, not both");
    if (!rc.prices.empty()) return xdldi::panel_from_prices(xdldi::load_prices(rc.prices));
    if (!rc.returns.empty()) return xdldi::load_returns(rc.returns);
    throw xdldi::InvalidInputError(
        "no input: set --prices or --returns (or the prices/returns config keys)");
}

// ---------------------------------------------------------------------------
// risk-report: per-instrument VaR/CVaR at each requested level, the extreme
// deviation, and the root-2k central moment sequence.
// ---------------------------------------------------------------------------

int cmd_risk_report(const xdldi::RunConfig& rc, const std::string& out_dir) {
    const xdldi::ReturnPanel panel = load_panel_input(rc);

    std::vector<std::string> report_rows;
    std::vector<std::string> seq_rows;
    for (std::size_t j = 0; j < panel.width(); ++j) {
        const xdldi::ReturnSeries col = panel.column(j);
        const xdldi::XdEstimate est = xdldi::xd(col, rc.k_max);
        for (double p : rc.p_levels) {
            const xdldi::TailRisk tr = xdldi::var_cvar(col, p);
            report_rows.push_back(panel.assets[j] + "," + format_double(p) + "," +
                                  format_double(tr.var) + "," + format_double(tr.cvar) + "," +
                                  format_double(est.xd_value));
        }
        for (int k = 1; k <= rc.k_max; ++k)
            seq_rows.push_back(panel.assets[j] + "," + std::to_string(k) + "," +
                               format_double(est.moment_sequence[static_cast<std::size_t>(k - 1)]));
    }

    fs::create_directories(out_dir);
    const std::string report_path = join_path(out_dir, "risk_report.csv");
    const std::string seq_path = join_path(out_dir, "moment_sequence.csv");
    xdldi::write_csv(report_path, "instrument,p,var,cvar,xd", report_rows);
    xdldi::write_csv(seq_path, "instrument,k,moment_root", seq_rows);
    note_written(report_path);
    note_written(seq_path);
    return 0;
}

// ---------------------------------------------------------------------------
// decompose: independent-component decomposition of a return panel.
// ---------------------------------------------------------------------------

int cmd_decompose(const xdldi::RunConfig& rc, const std::string& out_dir) {
    const xdldi::ReturnPanel panel = load_panel_input(rc);
    const xdldi::IcaResult res =
        xdldi::fast_ica(panel, rc.seed, rc.ica_tol, rc.ica_max_iter, rc.rank_tolerance);
    const xdldi::MixingModel& m = res.model;

    std::vector<std::string> mixing_rows;
    std::vector<std::string> unmixing_rows;
    std::vector<std::string> comp_rows;
    for (std::size_t a = 0; a < panel.width(); ++a)
        for (int c = 0; c < m.rank; ++c)
            mixing_rows.push_back(panel.assets[a] + ",c" + std::to_string(c) + "," +
                                  format_double(m.mixing(static_cast<Eigen::Index>(a), c)));
    for (int c = 0; c < m.rank; ++c)
        for (std::size_t a = 0; a < panel.width(); ++a)
            unmixing_rows.push_back("c" + std::to_string(c) + "," + panel.assets[a] + "," +
                                    format_double(m.unmixing(c, static_cast<Eigen::Index>(a))));
    for (std::size_t t = 0; t < panel.periods(); ++t)
        for (int c = 0; c < m.rank; ++c)
            comp_rows.push_back(panel.timestamps[t] + ",c" + std::to_string(c) + "," +
                                format_double(m.components[static_cast<std::size_t>(c)].values[t]));

    nlohmann::ordered_json j;
    j["seed"] = rc.seed;
    j["instruments"] = panel.width();
    j["periods"] = panel.periods();
    j["rank"] = m.rank;
    j["converged"] = res.converged;
    j["iterations"] = res.iterations;
    j["final_change"] = res.final_change;
    j["low_nongaussianity"] = res.low_nongaussianity;
    nlohmann::ordered_json means;
    for (std::size_t a = 0; a < panel.width(); ++a)
        means[panel.assets[a]] = m.asset_means(static_cast<Eigen::Index>(a));
    j["asset_means"] = means;
    nlohmann::ordered_json kurt;
    for (int c = 0; c < m.rank; ++c)
        kurt["c" + std::to_string(c)] =
            xdldi::detail::excess_kurtosis(m.components[static_cast<std::size_t>(c)].values);
    j["component_excess_kurtosis"] = kurt;

    fs::create_directories(out_dir);
    const std::string mixing_path = join_path(out_dir, "mixing.csv");
    const std::string unmixing_path = join_path(out_dir, "unmixing.csv");
    const std::string comp_path = join_path(out_dir, "components.csv");
    const std::string summary_path = join_path(out_dir, "decompose_summary.json");
    xdldi::write_csv(mixing_path, "asset,component,value", mixing_rows);
    xdldi::write_csv(unmixing_path, "component,asset,value", unmixing_rows);
    xdldi::write_csv(comp_path, "date,component,value", comp_rows);
    xdldi::atomic_write(summary_path, j.dump(2) + "\n");
    note_written(mixing_path);
    note_written(unmixing_path);
    note_written(comp_path);
    note_written(summary_path);
    return 0;
}

// ---------------------------------------------------------------------------
// profile: delta-one weight as a function of expected return per k, and the
// effective correlation as a function of the raw correlation per k.
// ---------------------------------------------------------------------------

struct ProfileArgs {
    double mu_min = 0.0;
    double mu_max = 0.02;
    int mu_steps = 81;
    double rho = 0.5;
    double sigma = 0.01;
    double sigma_l = 0.01;
    int rho_steps = 41;
};

int cmd_profile(const xdldi::RunConfig& rc, const ProfileArgs& pa, const std::string& out_dir) {
    if (pa.mu_steps < 1) throw xdldi::InvalidInputError("profile: --mu-steps must be >= 1");
    if (pa.mu_steps > 1 && !(pa.mu_max > pa.mu_min))
        throw xdldi::InvalidInputError("profile: --mu-max must exceed --mu-min");
    if (pa.rho_steps < 2) throw xdldi::InvalidInputError("profile: --rho-steps must be >= 2");
    if (!(pa.sigma > 0.0)) throw xdldi::InvalidInputError("profile: --sigma must be positive");
    if (!(pa.sigma_l >= 0.0)) throw xdldi::InvalidInputError("profile: --sigma-l must be >= 0");
    if (std::abs(pa.rho) > 1.0) throw xdldi::InvalidInputError("profile: |--rho| must be <= 1");

    std::vector<double> mu_grid(static_cast<std::size_t>(pa.mu_steps));
    for (int i = 0; i < pa.mu_steps; ++i)
        mu_grid[static_cast<std::size_t>(i)] =
            pa.mu_steps == 1 ? pa.mu_min
                             : pa.mu_min + (pa.mu_max - pa.mu_min) * static_cast<double>(i) /
                                               static_cast<double>(pa.mu_steps - 1);

    const xdldi::RiskAppetite appetite{rc.lambda};
    const std::vector<xdldi::ProfilePoint> points = xdldi::weight_profile(
        mu_grid, rc.funding_rate, pa.sigma, pa.rho, pa.sigma_l, rc.k_list, appetite);
    std::vector<std::string> weight_rows;
    weight_rows.reserve(points.size());
    for (const xdldi::ProfilePoint& p : points)
        weight_rows.push_back(format_double(p.mu) + "," + std::to_string(p.k) + "," +
                              format_double(p.weight));

    std::vector<std::string> corr_rows;
    corr_rows.reserve(static_cast<std::size_t>(pa.rho_steps) * rc.k_list.size());
    for (int k : rc.k_list)
        for (int i = 0; i < pa.rho_steps; ++i) {
            const double rho =
                -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(pa.rho_steps - 1);
            corr_rows.push_back(format_double(rho) + "," + std::to_string(k) + "," +
                                format_double(xdldi::effective_correlation(rho, k)));
        }

    fs::create_directories(out_dir);
    const std::string weight_path = join_path(out_dir, "weight_profile.csv");
    const std::string corr_path = join_path(out_dir, "effective_correlation.csv");
    xdldi::write_csv(weight_path, "mu,k,weight", weight_rows);
    xdldi::write_csv(corr_path, "rho,k,value", corr_rows);
    note_written(weight_path);
    note_written(corr_path);
    return 0;
}

// ---------------------------------------------------------------------------
// Backtests
// ---------------------------------------------------------------------------

std::map<std::string, std::string> run_meta(const xdldi::RunConfig& rc) {
    std::string ks;
    for (std::size_t i = 0; i < rc.k_list.size(); ++i)
        ks += (i ? "," : "") + std::to_string(rc.k_list[i]);
    return {{"seed", std::to_string(rc.seed)},
            {"lambda", format_double(rc.lambda)},
            {"estimation_window", std::to_string(rc.estimation_window)},
            {"k_list", ks},
            {"cost_rate", format_double(rc.cost_rate)}};
}

void write_backtest_files(const xdldi::BacktestReport& report, const xdldi::RunConfig& rc,
                          const std::string& out_dir, const std::string& prefix) {
    fs::create_directories(out_dir);
    const std::string report_path = join_path(out_dir, prefix + "_report.csv");
    const std::string trades_path = join_path(out_dir, prefix + "_trades.csv");
    const std::string weights_path = join_path(out_dir, prefix + "_weights.csv");
    const std::string summary_path = join_path(out_dir, prefix + "_summary.json");
    xdldi::write_report_csv(report, report_path);
    xdldi::write_trades_csv(report, trades_path);
    xdldi::write_weights_csv(report, weights_path);
    xdldi::write_summary_json(report, summary_path, run_meta(rc));
    note_written(report_path);
    note_written(trades_path);
    note_written(weights_path);
    note_written(summary_path);
}

int cmd_backtest_ldi(const xdldi::RunConfig& rc, const std::string& out_dir) {
    if (rc.cashflows.empty())
        throw xdldi::InvalidInputError("backtest-ldi: set --cashflows (or the cashflows config key)");
    if (rc.curves.empty())
        throw xdldi::InvalidInputError("backtest-ldi: set --curves (or the curves config key)");
    const xdldi::ReturnPanel panel = load_panel_input(rc);
    const xdldi::CashflowSchedule schedule = xdldi::load_cashflows(rc.cashflows);
    const std::vector<xdldi::DatedCurve> curves = xdldi::load_curves(rc.curves);
    const xdldi::BacktestConfig cfg = xdldi::BacktestConfig::from_run_config(rc);
    const xdldi::BacktestReport report = xdldi::run_ldi_backtest(panel, schedule, curves, cfg);
    write_backtest_files(report, rc, out_dir, "ldi");
    return 0;
}

int cmd_backtest_options(const xdldi::RunConfig& rc, const std::string& out_dir) {
    if (rc.quotes.empty())
        throw xdldi::InvalidInputError(
            "backtest-options: set --quotes (or the quotes config key)");
    if (rc.underlying.empty())
        throw xdldi::InvalidInputError(
            "backtest-options: set --underlying (or the underlying config key)");
    const xdldi::QuoteTable quotes = xdldi::load_option_quotes(rc.quotes);
    const xdldi::PriceTable underlier = xdldi::load_prices(rc.underlying);
    const xdldi::BacktestConfig cfg = xdldi::BacktestConfig::from_run_config(rc);
    const xdldi::BacktestReport report = xdldi::run_option_hedge_backtest(quotes, underlier, cfg);
    write_backtest_files(report, rc, out_dir, "option");
    return 0;
}

// ---------------------------------------------------------------------------
// synth: generate example data sets.
// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string kind;
    // factor panel (panel and ldi kinds)
    int periods = 756;
    int instruments = 10;
    int factors = 9;
    double vol_scale = 0.01;
    double noise_scale = 0.0;
    int jump_period = -1;
    double jump_scale = 10.0;
    bool identity_mixing = false;
    // curve and liability (ldi kind)
    double base_rate = 0.03;
    double level_vol = 2e-4;
    double slope_vol = 5e-5;
    int liability_years = 20;
    double liability_amount = 100.0;
    // option scenario (options kind)
    int trailing_days = 60;
    int life_days = 40;
    double mu = 0.0;
    double sigma = 0.2;
    double alpha = 0.5;
    double q = -0.5;
    double jump_return = 0.0;
    int jump_day = -1;
    // shared
    std::string start_date = "2021-01-04";
    double base_price = 100.0;
};

int cmd_synth(const SynthArgs& sa, std::uint64_t seed, const std::string& out_dir) {
    fs::create_directories(out_dir);
    if (sa.kind == "panel") {
        xdldi::SynthSpec spec;
        spec.instruments = sa.instruments;
        spec.factors = sa.factors;
        spec.periods = sa.periods;
        spec.vol_scale = sa.vol_scale;
        spec.noise_scale = sa.noise_scale;
        spec.jump_period = sa.jump_period;
        spec.jump_scale = sa.jump_scale;
        spec.identity_mixing = sa.identity_mixing;
        spec.start_date = sa.start_date;
        spec.base_price = sa.base_price;
        const xdldi::PriceTable prices = xdldi::synth_panel(spec, seed);
        const std::string path = join_path(out_dir, "prices.csv");
        xdldi::write_prices(prices, path);
        note_written(path);
        return 0;
    }
    if (sa.kind == "ldi") {
        xdldi::LdiScenarioSpec spec;
        spec.panel.instruments = sa.instruments;
        spec.panel.factors = sa.factors;
        spec.panel.periods = sa.periods;
        spec.panel.vol_scale = sa.vol_scale;
        spec.panel.noise_scale = sa.noise_scale;
        spec.panel.jump_period = sa.jump_period;
        spec.panel.jump_scale = sa.jump_scale;
        spec.panel.identity_mixing = sa.identity_mixing;
        spec.panel.start_date = sa.start_date;
        spec.panel.base_price = sa.base_price;
        spec.base_rate = sa.base_rate;
        spec.level_vol = sa.level_vol;
        spec.slope_vol = sa.slope_vol;
        spec.liability_years = sa.liability_years;
        spec.liability_amount = sa.liability_amount;
        const xdldi::LdiScenario scen = xdldi::synth_ldi_scenario(spec, seed);
        const std::string prices_path = join_path(out_dir, "prices.csv");
        const std::string cashflows_path = join_path(out_dir, "cashflows.csv");
        const std::string curves_path = join_path(out_dir, "curves.csv");
        xdldi::write_prices(scen.prices, prices_path);
        xdldi::write_cashflows(scen.cashflows, cashflows_path);
        xdldi::write_curves(scen.curves, curves_path);
        note_written(prices_path);
        note_written(cashflows_path);
        note_written(curves_path);
        return 0;
    }
    if (sa.kind == "options") {
        xdldi::OptionScenarioSpec spec;
        spec.trailing_days = sa.trailing_days;
        spec.life_days = sa.life_days;
        spec.mu = sa.mu;
        spec.vp = {sa.sigma, sa.alpha, sa.q};
        spec.jump_return = sa.jump_return;
        spec.jump_day = sa.jump_day;
        spec.start_date = sa.start_date;
        spec.base_price = sa.base_price;
        const xdldi::OptionScenario scen = xdldi::synth_option_scenario(spec, seed);
        const std::string underlying_path = join_path(out_dir, "underlying.csv");
        const std::string quotes_path = join_path(out_dir, "quotes.csv");
        xdldi::write_prices(scen.underlier, underlying_path);
        xdldi::write_option_quotes(scen.quotes, quotes_path);
        note_written(underlying_path);
        note_written(quotes_path);
        return 0;
    }
    throw xdldi::InvalidInputError("synth: unknown kind '" + sa.kind + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "liability-driven allocation under 2k-moment risk penalties: risk reports,\n"
        "independent-component decomposition, weight profiles, and walk-forward backtests"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "key = value configuration file");
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config file)");
    app.add_option("--out-dir", out_dir, "output directory (created if missing)")
        ->capture_default_str();

    // Shared input/parameter overrides; each is applied on top of the config
    // file only where the flag was actually given.
    std::string prices_path, returns_path, cashflows_path, curves_path, quotes_path,
        underlying_path;
    std::vector<int> k_list;
    std::vector<double> p_levels;
    int k_max = 0, estimation_window = 0, rebalance_every = 0, ica_max_iter = 0;
    double lambda = 0.0, cost_rate = 0.0, funding_rate = 0.0, liability_rate = 0.0;
    double rank_tolerance = 0.0, ica_tol = 0.0, vol_alpha = 0.0, vol_q = 0.0;

    struct Bound {
        CLI::Option* opt;
        std::function<void(xdldi::RunConfig&)> apply;
    };
    std::vector<Bound> bound;
    const auto bind = [&bound](CLI::Option* opt, std::function<void(xdldi::RunConfig&)> apply) {
        bound.push_back({opt, std::move(apply)});
    };
    const auto add_panel_inputs = [&](CLI::App* cmd) {
        bind(cmd->add_option("--prices", prices_path, "price CSV (date,instrument,close)"),
             [&](xdldi::RunConfig& rc) { rc.prices = prices_path; });
        bind(cmd->add_option("--returns", returns_path, "return CSV (date,instrument,return)"),
             [&](xdldi::RunConfig& rc) { rc.returns = returns_path; });
    };
    const auto add_k_list = [&](CLI::App* cmd) {
        bind(cmd->add_option("--k-list", k_list, "moment orders k (comma separated)")
                 ->delimiter(','),
             [&](xdldi::RunConfig& rc) { rc.k_list = k_list; });
    };
    const auto add_lambda = [&](CLI::App* cmd) {
        bind(cmd->add_option("--lambda", lambda, "risk-appetite parameter"),
             [&](xdldi::RunConfig& rc) { rc.lambda = lambda; });
    };
    const auto add_backtest_params = [&](CLI::App* cmd) {
        add_k_list(cmd);
        add_lambda(cmd);
        bind(cmd->add_option("--estimation-window", estimation_window,
                             "periods used to fit weights"),
             [&](xdldi::RunConfig& rc) { rc.estimation_window = estimation_window; });
        bind(cmd->add_option("--rebalance-every", rebalance_every, "rebalance cadence in periods"),
             [&](xdldi::RunConfig& rc) { rc.rebalance_every = rebalance_every; });
        bind(cmd->add_option("--cost-rate", cost_rate, "proportional transaction cost"),
             [&](xdldi::RunConfig& rc) { rc.cost_rate = cost_rate; });
        bind(cmd->add_option("--funding-rate", funding_rate, "per-period funding charge"),
             [&](xdldi::RunConfig& rc) { rc.funding_rate = funding_rate; });
    };

    // risk-report ----------------------------------------------------------
    auto* risk = app.add_subcommand("risk-report",
                                    "per-instrument VaR/CVaR/XD and moment sequence");
    risk->fallthrough();
    add_panel_inputs(risk);
    bind(risk->add_option("--p-levels", p_levels, "tail levels in (0,1), comma separated")
             ->delimiter(','),
         [&](xdldi::RunConfig& rc) { rc.p_levels = p_levels; });
    bind(risk->add_option("--k-max", k_max, "largest moment order in the sequence"),
         [&](xdldi::RunConfig& rc) { rc.k_max = k_max; });

    // decompose -------------------------------------------------------------
    auto* decompose = app.add_subcommand("decompose",
                                         "independent-component decomposition of a panel");
    decompose->fallthrough();
    add_panel_inputs(decompose);
    bind(decompose->add_option("--rank-tolerance", rank_tolerance,
                               "relative singular-value cutoff"),
         [&](xdldi::RunConfig& rc) { rc.rank_tolerance = rank_tolerance; });
    bind(decompose->add_option("--ica-tol", ica_tol, "fixed-point convergence tolerance"),
         [&](xdldi::RunConfig& rc) { rc.ica_tol = ica_tol; });
    bind(decompose->add_option("--ica-max-iter", ica_max_iter, "fixed-point iteration cap"),
         [&](xdldi::RunConfig& rc) { rc.ica_max_iter = ica_max_iter; });

    // profile ----------------------------------------------------------------
    auto* profile = app.add_subcommand(
        "profile", "weight-vs-return and effective-correlation tables per k");
    profile->fallthrough();
    ProfileArgs pa;
    add_k_list(profile);
    add_lambda(profile);
    bind(profile->add_option("--funding-rate", funding_rate, "funding rate entering the hurdle"),
         [&](xdldi::RunConfig& rc) { rc.funding_rate = funding_rate; });
    profile->add_option("--mu-min", pa.mu_min, "grid start")->capture_default_str();
    profile->add_option("--mu-max", pa.mu_max, "grid end")->capture_default_str();
    profile->add_option("--mu-steps", pa.mu_steps, "grid points")->capture_default_str();
    profile->add_option("--rho", pa.rho, "component/liability correlation")
        ->capture_default_str();
    profile->add_option("--sigma", pa.sigma, "component volatility")->capture_default_str();
    profile->add_option("--sigma-l", pa.sigma_l, "liability volatility")->capture_default_str();
    profile->add_option("--rho-steps", pa.rho_steps, "points on the [-1,1] correlation grid")
        ->capture_default_str();

    // backtests ---------------------------------------------------------------
    auto* bt_ldi = app.add_subcommand("backtest-ldi",
                                      "walk-forward liability-hedging backtest");
    bt_ldi->fallthrough();
    add_panel_inputs(bt_ldi);
    bind(bt_ldi->add_option("--cashflows", cashflows_path,
                            "liability cashflow CSV (time_years,amount)"),
         [&](xdldi::RunConfig& rc) { rc.cashflows = cashflows_path; });
    bind(bt_ldi->add_option("--curves", curves_path,
                            "zero-curve CSV (date,tenor_years,zero_rate)"),
         [&](xdldi::RunConfig& rc) { rc.curves = curves_path; });
    add_backtest_params(bt_ldi);
    bind(bt_ldi->add_option("--liability-rate", liability_rate,
                            "per-period drift deducted from liability changes"),
         [&](xdldi::RunConfig& rc) { rc.liability_rate = liability_rate; });

    auto* bt_opt = app.add_subcommand("backtest-options",
                                      "walk-forward straddle-hedging backtest");
    bt_opt->fallthrough();
    bind(bt_opt->add_option("--quotes", quotes_path,
                            "option quote CSV (date,option_id,underlying,strike,expiry,kind,close)"),
         [&](xdldi::RunConfig& rc) { rc.quotes = quotes_path; });
    bind(bt_opt->add_option("--underlying", underlying_path,
                            "underlier price CSV (date,instrument,close)"),
         [&](xdldi::RunConfig& rc) { rc.underlying = underlying_path; });
    add_backtest_params(bt_opt);
    bind(bt_opt->add_option("--vol-alpha", vol_alpha, "vol-of-vol for the skew adjustment"),
         [&](xdldi::RunConfig& rc) { rc.vol_alpha = vol_alpha; });
    bind(bt_opt->add_option("--vol-q", vol_q, "spot/vol correlation for the skew adjustment"),
         [&](xdldi::RunConfig& rc) { rc.vol_q = vol_q; });

    // synth ---------------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate synthetic example data");
    synth->fallthrough();
    SynthArgs sa;
    synth->add_option("--kind", sa.kind, "data set kind")
        ->required()
        ->check(CLI::IsMember({"panel", "ldi", "options"}));
    synth->add_option("--periods", sa.periods, "return periods")->capture_default_str();
    synth->add_option("--instruments", sa.instruments, "instrument count")
        ->capture_default_str();
    synth->add_option("--factors", sa.factors, "independent factor count")
        ->capture_default_str();
    synth->add_option("--vol-scale", sa.vol_scale, "per-period return stdev scale")
        ->capture_default_str();
    synth->add_option("--noise-scale", sa.noise_scale, "idiosyncratic noise, in vol-scale units")
        ->capture_default_str();
    synth->add_option("--jump-period", sa.jump_period, "period of an injected factor shock")
        ->capture_default_str();
    synth->add_option("--jump-scale", sa.jump_scale, "shock size in factor stdevs")
        ->capture_default_str();
    synth->add_flag("--identity-mixing", sa.identity_mixing,
                    "mix factors one-to-one onto instruments");
    synth->add_option("--base-rate", sa.base_rate, "initial short rate (ldi)")
        ->capture_default_str();
    synth->add_option("--level-vol", sa.level_vol, "curve level-shift stdev (ldi)")
        ->capture_default_str();
    synth->add_option("--slope-vol", sa.slope_vol, "curve slope-tilt stdev (ldi)")
        ->capture_default_str();
    synth->add_option("--liability-years", sa.liability_years, "annual payment count (ldi)")
        ->capture_default_str();
    synth->add_option("--liability-amount", sa.liability_amount, "annual payment size (ldi)")
        ->capture_default_str();
    synth->add_option("--trailing-days", sa.trailing_days, "history before the write date (options)")
        ->capture_default_str();
    synth->add_option("--life-days", sa.life_days, "days from write to expiry (options)")
        ->capture_default_str();
    synth->add_option("--mu", sa.mu, "annualized drift (options)")->capture_default_str();
    synth->add_option("--sigma", sa.sigma, "initial volatility (options)")
        ->capture_default_str();
    synth->add_option("--alpha", sa.alpha, "vol-of-vol (options)")->capture_default_str();
    synth->add_option("--q", sa.q, "spot/vol correlation (options)")->capture_default_str();
    synth->add_option("--jump-return", sa.jump_return, "one-day shock during the life (options)")
        ->capture_default_str();
    synth->add_option("--jump-day", sa.jump_day, "0-based life day of the shock (options)")
        ->capture_default_str();
    synth->add_option("--start-date", sa.start_date, "first calendar date")
        ->capture_default_str();
    synth->add_option("--base-price", sa.base_price, "initial price level")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        xdldi::RunConfig rc;
        if (!config_path.empty()) rc = xdldi::load_config(config_path);
        if (seed_opt->count() > 0) rc.seed = seed;
        for (const Bound& b : bound)
            if (b.opt->count() > 0) b.apply(rc);
        rc.validate();

        if (app.got_subcommand(risk)) return cmd_risk_report(rc, out_dir);
        if (app.got_subcommand(decompose)) return cmd_decompose(rc, out_dir);
        if (app.got_subcommand(profile)) return cmd_profile(rc, pa, out_dir);
        if (app.got_subcommand(bt_ldi)) return cmd_backtest_ldi(rc, out_dir);
        if (app.got_subcommand(bt_opt)) return cmd_backtest_options(rc, out_dir);
        if (app.got_subcommand(synth)) return cmd_synth(sa, rc.seed, out_dir);
        std::cerr << "xdldi: no subcommand given\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "xdldi: " << e.what() << "\n";
        return 1;
    }
}
