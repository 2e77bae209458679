#include <xdldi/io.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace xdldi;
namespace fs = std::filesystem;

namespace {

struct TmpDir {
    fs::path path;
    TmpDir() {
        path = fs::temp_directory_path() /
               ("xdldi_io_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TmpDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void put_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig config_from_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "test.cfg");
}

}  // namespace

TEST_CASE("format_double round-trips arbitrary doubles exactly") {
    Rng rng(1);
    for (int i = 0; i < 2000; ++i) {
        const double x = (rng.uniform() - 0.5) * std::exp(rng.uniform(-200.0, 200.0));
        REQUIRE(parse_double(format_double(x), "t") == x);
    }
    REQUIRE_THROWS_AS(parse_double("1.2x", "t"), IoError);
    REQUIRE_THROWS_AS(parse_double("", "t"), IoError);
    REQUIRE_THROWS_AS(parse_double("nan", "t"), IoError);
    REQUIRE_THROWS_AS(parse_double("inf", "t"), IoError);
    REQUIRE(parse_long("-42", "t") == -42);
    REQUIRE_THROWS_AS(parse_long("12.5", "t"), IoError);
    REQUIRE_THROWS_AS(parse_long("", "t"), IoError);
}

TEST_CASE("atomic write leaves no temporaries and replaces content whole") {
    TmpDir tmp;
    const std::string target = tmp.file("out.txt");
    atomic_write(target, "first\n");
    REQUIRE(slurp(target) == "first\n");
    atomic_write(target, "second\n");
    REQUIRE(slurp(target) == "second\n");
    REQUIRE_FALSE(fs::exists(target + ".tmp"));
}

TEST_CASE("price table round trip preserves every cell") {
    TmpDir tmp;
    PriceTable pt;
    pt.dates = {"2024-01-02", "2024-01-03", "2024-01-04"};
    pt.instruments = {"AAA", "BBB"};
    pt.close.resize(3, 2);
    pt.close << 100.0, 50.0, 101.0, 49.5, 99.4142135623730951, 50.25;
    write_prices(pt, tmp.file("prices.csv"));
    const PriceTable back = load_prices(tmp.file("prices.csv"));
    REQUIRE(back.dates == pt.dates);
    REQUIRE(back.instruments == pt.instruments);
    REQUIRE_FALSE(back.reordered);
    REQUIRE((back.close - pt.close).cwiseAbs().maxCoeff() == 0.0);

    const ReturnPanel panel = panel_from_prices(back);
    REQUIRE(panel.assets == pt.instruments);
    REQUIRE(panel.timestamps == std::vector<std::string>{"2024-01-03", "2024-01-04"});
    REQUIRE(std::abs(panel.returns(0, 0) - 0.01) < 1e-15);  // 100 -> 101
    REQUIRE(std::abs(panel.returns(0, 1) - (-0.01)) < 1e-15);
}

TEST_CASE("out-of-order price rows are sorted and flagged") {
    TmpDir tmp;
    put_file(tmp.file("p.csv"),
             "date,instrument,close\n"
             "2024-01-03,AAA,101\n"
             "2024-01-02,AAA,100\n"
             "2024-01-04,AAA,102\n");
    const PriceTable pt = load_prices(tmp.file("p.csv"));
    REQUIRE(pt.reordered);
    REQUIRE(pt.dates == std::vector<std::string>{"2024-01-02", "2024-01-03", "2024-01-04"});
    REQUIRE(pt.close(0, 0) == 100.0);
    REQUIRE(pt.close(2, 0) == 102.0);
}

TEST_CASE("price loader rejects malformed input with file and line context") {
    TmpDir tmp;

    put_file(tmp.file("gap.csv"),
             "date,instrument,close\n"
             "2024-01-02,AAA,100\n2024-01-02,BBB,50\n2024-01-03,AAA,101\n");
    REQUIRE_THROWS_WITH(load_prices(tmp.file("gap.csv")),
                        Catch::Matchers::ContainsSubstring("missing observations") &&
                            Catch::Matchers::ContainsSubstring("(2024-01-03, BBB)"));

    put_file(tmp.file("dup.csv"),
             "date,instrument,close\n2024-01-02,AAA,100\n2024-01-02,AAA,100\n");
    REQUIRE_THROWS_WITH(load_prices(tmp.file("dup.csv")),
                        Catch::Matchers::ContainsSubstring("dup.csv:3") &&
                            Catch::Matchers::ContainsSubstring("duplicate"));

    put_file(tmp.file("bad.csv"), "date,instrument,close\n2024-01-02,AAA,1e999x\n");
    REQUIRE_THROWS_WITH(load_prices(tmp.file("bad.csv")),
                        Catch::Matchers::ContainsSubstring("bad.csv:2"));

    put_file(tmp.file("hdr.csv"), "date,close\n2024-01-02,100\n");
    REQUIRE_THROWS_WITH(load_prices(tmp.file("hdr.csv")),
                        Catch::Matchers::ContainsSubstring("expected header"));

    put_file(tmp.file("fields.csv"), "date,instrument,close\n2024-01-02,AAA\n");
    REQUIRE_THROWS_WITH(load_prices(tmp.file("fields.csv")),
                        Catch::Matchers::ContainsSubstring("fields.csv:2") &&
                            Catch::Matchers::ContainsSubstring("expected 3 fields"));

    put_file(tmp.file("empty.csv"), "");
    REQUIRE_THROWS_WITH(load_prices(tmp.file("empty.csv")),
                        Catch::Matchers::ContainsSubstring("empty file"));

    put_file(tmp.file("nodata.csv"), "date,instrument,close\n");
    REQUIRE_THROWS_WITH(load_prices(tmp.file("nodata.csv")),
                        Catch::Matchers::ContainsSubstring("no data rows"));

    put_file(tmp.file("baddate.csv"), "date,instrument,close\n2024-1-2,AAA,100\n");
    REQUIRE_THROWS_AS(load_prices(tmp.file("baddate.csv")), Error);

    REQUIRE_THROWS_WITH(load_prices(tmp.file("missing.csv")),
                        Catch::Matchers::ContainsSubstring("cannot open"));

    // Non-positive closes only fail when building a return panel.
    put_file(tmp.file("neg.csv"),
             "date,instrument,close\n2024-01-02,AAA,100\n2024-01-03,AAA,-1\n2024-01-04,AAA,90\n");
    const PriceTable neg = load_prices(tmp.file("neg.csv"));
    REQUIRE_THROWS_AS(panel_from_prices(neg), InvalidInputError);

    put_file(tmp.file("short.csv"), "date,instrument,close\n2024-01-02,AAA,100\n2024-01-03,AAA,101\n");
    REQUIRE_THROWS_AS(panel_from_prices(load_prices(tmp.file("short.csv"))), InvalidInputError);
}

TEST_CASE("precomputed return files load directly") {
    TmpDir tmp;
    put_file(tmp.file("r.csv"),
             "date,instrument,return\n"
             "2024-01-02,AAA,0.01\n2024-01-02,BBB,-0.002\n"
             "2024-01-03,AAA,-0.005\n2024-01-03,BBB,0.001\n");
    const ReturnPanel panel = load_returns(tmp.file("r.csv"));
    REQUIRE(panel.assets == std::vector<std::string>{"AAA", "BBB"});
    REQUIRE(panel.returns(0, 0) == 0.01);
    REQUIRE(panel.returns(1, 1) == 0.001);
}

TEST_CASE("cashflow files round trip and sort by time") {
    TmpDir tmp;
    put_file(tmp.file("cf.csv"), "time_years,amount\n2.0,200\n0.5,50\n1.0,100\n");
    const CashflowSchedule s = load_cashflows(tmp.file("cf.csv"));
    REQUIRE(s.flows.size() == 3);
    REQUIRE(s.flows[0].time_years == 0.5);
    REQUIRE(s.flows[2].amount == 200.0);

    write_cashflows(s, tmp.file("cf2.csv"));
    const CashflowSchedule s2 = load_cashflows(tmp.file("cf2.csv"));
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(s2.flows[i].time_years == s.flows[i].time_years);
        REQUIRE(s2.flows[i].amount == s.flows[i].amount);
    }
    // Duplicate times survive sorting but fail schedule validation.
    put_file(tmp.file("cfdup.csv"), "time_years,amount\n1.0,100\n1.0,50\n");
    REQUIRE_THROWS_AS(load_cashflows(tmp.file("cfdup.csv")), InvalidInputError);
}

TEST_CASE("curve files group by date and sort pillars") {
    TmpDir tmp;
    put_file(tmp.file("c.csv"),
             "date,tenor_years,zero_rate\n"
             "2024-01-03,10,0.035\n"
             "2024-01-02,10,0.03\n"
             "2024-01-02,1,0.02\n"
             "2024-01-03,1,0.025\n");
    const std::vector<DatedCurve> curves = load_curves(tmp.file("c.csv"));
    REQUIRE(curves.size() == 2);
    REQUIRE(curves[0].date == "2024-01-02");
    REQUIRE(curves[0].tenors == std::vector<double>{1.0, 10.0});
    REQUIRE(curves[0].zero_rates == std::vector<double>{0.02, 0.03});
    REQUIRE(curves[1].zero_rates == std::vector<double>{0.025, 0.035});

    write_curves(curves, tmp.file("c2.csv"));
    const std::vector<DatedCurve> back = load_curves(tmp.file("c2.csv"));
    REQUIRE(back.size() == 2);
    REQUIRE(back[1].zero_rates == curves[1].zero_rates);

    put_file(tmp.file("cdup.csv"),
             "date,tenor_years,zero_rate\n2024-01-02,1,0.02\n2024-01-02,1,0.03\n");
    REQUIRE_THROWS_AS(load_curves(tmp.file("cdup.csv")), InvalidInputError);
    put_file(tmp.file("cone.csv"), "date,tenor_years,zero_rate\n2024-01-02,1,0.02\n");
    REQUIRE_THROWS_AS(load_curves(tmp.file("cone.csv")), InvalidInputError);
}

TEST_CASE("option quote files round trip with validation") {
    TmpDir tmp;
    QuoteTable qt;
    qt.rows.push_back({"2024-01-03", "X-100-P", "X", 100.0, "2024-02-01", OptionKind::put, 3.25});
    qt.rows.push_back({"2024-01-02", "X-100-C", "X", 100.0, "2024-02-01", OptionKind::call, 2.5});
    write_option_quotes(qt, tmp.file("q.csv"));
    const QuoteTable back = load_option_quotes(tmp.file("q.csv"));
    REQUIRE(back.rows.size() == 2);
    REQUIRE(back.rows[0].date == "2024-01-02");  // sorted on load
    REQUIRE(back.rows[0].kind == OptionKind::call);
    REQUIRE(back.rows[1].close == 3.25);
    REQUIRE(back.rows[1].expiry == "2024-02-01");

    put_file(tmp.file("qdup.csv"),
             "date,option_id,underlying,strike,expiry,kind,close\n"
             "2024-01-02,X-100-C,X,100,2024-02-01,call,2.5\n"
             "2024-01-02,X-100-C,X,100,2024-02-01,call,2.6\n");
    REQUIRE_THROWS_WITH(load_option_quotes(tmp.file("qdup.csv")),
                        Catch::Matchers::ContainsSubstring("duplicate quote"));

    put_file(tmp.file("qkind.csv"),
             "date,option_id,underlying,strike,expiry,kind,close\n"
             "2024-01-02,X-100-C,X,100,2024-02-01,straddle,2.5\n");
    REQUIRE_THROWS_WITH(load_option_quotes(tmp.file("qkind.csv")),
                        Catch::Matchers::ContainsSubstring("qkind.csv:2"));

    put_file(tmp.file("qneg.csv"),
             "date,option_id,underlying,strike,expiry,kind,close\n"
             "2024-01-02,X-100-C,X,100,2024-02-01,call,-2.5\n");
    REQUIRE_THROWS_WITH(load_option_quotes(tmp.file("qneg.csv")),
                        Catch::Matchers::ContainsSubstring("negative close"));
}

TEST_CASE("config parsing is strict and complete") {
    const RunConfig cfg = config_from_string(
        "# full configuration\n"
        "prices = data/p.csv\n"
        "returns = data/r.csv\n"
        "cashflows = data/cf.csv\n"
        "curves = data/c.csv\n"
        "quotes = data/q.csv\n"
        "underlying = SYN0\n"
        "k_list = 1, 2, 10\n"
        "lambda = 0.05   # trailing comment\n"
        "estimation_window = 90\n"
        "rebalance_every = 5\n"
        "cost_rate = 0.001\n"
        "seed = 42\n"
        "funding_rate = 0.0001\n"
        "liability_rate = 0.0002\n"
        "rank_tolerance = 1e-9\n"
        "ica_tol = 1e-7\n"
        "ica_max_iter = 500\n"
        "roll_valuation = false\n"
        "k_max = 50\n"
        "p_levels = 0.9, 0.975\n"
        "vol_alpha = 0.4\n"
        "vol_q = -0.3\n");
    REQUIRE(cfg.prices == "data/p.csv");
    REQUIRE(cfg.underlying == "SYN0");
    REQUIRE(cfg.k_list == std::vector<int>{1, 2, 10});
    REQUIRE(cfg.lambda == 0.05);
    REQUIRE(cfg.estimation_window == 90);
    REQUIRE(cfg.rebalance_every == 5);
    REQUIRE(cfg.cost_rate == 0.001);
    REQUIRE(cfg.seed == 42);
    REQUIRE(cfg.funding_rate == 0.0001);
    REQUIRE(cfg.liability_rate == 0.0002);
    REQUIRE(cfg.rank_tolerance == 1e-9);
    REQUIRE(cfg.ica_tol == 1e-7);
    REQUIRE(cfg.ica_max_iter == 500);
    REQUIRE_FALSE(cfg.roll_valuation);
    REQUIRE(cfg.k_max == 50);
    REQUIRE(cfg.p_levels == std::vector<double>{0.9, 0.975});
    REQUIRE(cfg.vol_alpha == 0.4);
    REQUIRE(cfg.vol_q == -0.3);

    // Defaults survive an empty config.
    const RunConfig dflt = config_from_string("\n# nothing\n");
    REQUIRE(dflt.k_list == std::vector<int>{1, 5, 10, 50});
    REQUIRE(dflt.lambda == 0.01);
    REQUIRE(dflt.estimation_window == 60);
    REQUIRE(dflt.roll_valuation);

    REQUIRE_THROWS_WITH(config_from_string("speling = x\n"),
                        Catch::Matchers::ContainsSubstring("unknown key 'speling'"));
    REQUIRE_THROWS_WITH(config_from_string("lambda = 0.1\nlambda = 0.2\n"),
                        Catch::Matchers::ContainsSubstring("duplicate key"));
    REQUIRE_THROWS_WITH(config_from_string("lambda == 0.1x\n"),
                        Catch::Matchers::ContainsSubstring("cannot parse"));
    REQUIRE_THROWS_WITH(config_from_string("lambda\n"),
                        Catch::Matchers::ContainsSubstring("expected 'key = value'"));
    REQUIRE_THROWS_AS(config_from_string("estimation_window = 10\n"), ConfigError);
    REQUIRE_THROWS_AS(config_from_string("k_list = 0\n"), ConfigError);
    REQUIRE_THROWS_AS(config_from_string("p_levels = 1.5\n"), ConfigError);
    REQUIRE_THROWS_AS(config_from_string("roll_valuation = maybe\n"), ConfigError);
    REQUIRE_THROWS_AS(config_from_string("= 3\n"), ConfigError);
}

TEST_CASE("business days skip weekends") {
    // 2021-01-04 was a Monday.
    const std::vector<std::string> days = business_days("2021-01-04", 6);
    REQUIRE(days == std::vector<std::string>{"2021-01-04", "2021-01-05", "2021-01-06",
                                             "2021-01-07", "2021-01-08", "2021-01-11"});
    // A Saturday start shifts onto the following Monday.
    REQUIRE(business_days("2021-01-02", 1).front() == "2021-01-04");
}

TEST_CASE("synthetic panels have the advertised factor structure") {
    SynthSpec spec;
    spec.instruments = 10;
    spec.factors = 9;
    spec.periods = 756;
    const PriceTable pt = synth_panel(spec, 7);
    REQUIRE(pt.dates.size() == 757);
    REQUIRE(pt.instruments.size() == 10);
    REQUIRE(pt.instruments.front() == "SYN0");

    const ReturnPanel panel = panel_from_prices(pt);
    const Eigen::MatrixXd centered =
        panel.returns.rowwise() - panel.returns.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    const Eigen::VectorXd sv = svd.singularValues();
    REQUIRE(sv(8) > 1e-6 * sv(0));   // nine live directions
    REQUIRE(sv(9) < 1e-6 * sv(0));   // tenth is numerically dead

    // Per-instrument return scale tracks vol_scale (unit-norm mixing rows).
    for (Eigen::Index j = 0; j < panel.returns.cols(); ++j) {
        std::vector<double> col(panel.returns.col(j).data(),
                                panel.returns.col(j).data() + panel.returns.rows());
        const double sd = sample_stdev(col);
        REQUIRE(sd > 0.5 * spec.vol_scale);
        REQUIRE(sd < 2.0 * spec.vol_scale);
    }

    // Identity mixing exposes the raw factors: alternating heavy/light tails.
    SynthSpec ident;
    ident.instruments = 4;
    ident.factors = 4;
    ident.periods = 4000;
    ident.identity_mixing = true;
    const ReturnPanel raw = panel_from_prices(synth_panel(ident, 11));
    for (int j = 0; j < 4; ++j) {
        std::vector<double> col(raw.returns.col(j).data(),
                                raw.returns.col(j).data() + raw.returns.rows());
        const double kurt = xdldi::detail::excess_kurtosis(col);
        if (j % 2 == 0)
            REQUIRE(kurt > 1.0);    // Laplace factor: heavy tails
        else
            REQUIRE(kurt < -0.5);   // uniform factor: light tails
    }

    // Seed determinism.
    const PriceTable a = synth_panel(spec, 123), b = synth_panel(spec, 123),
                     c = synth_panel(spec, 124);
    REQUIRE((a.close - b.close).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((a.close - c.close).cwiseAbs().maxCoeff() > 0.0);

    // A planted jump dominates that period's cross-section.
    SynthSpec jumpy = spec;
    jumpy.jump_period = 100;
    jumpy.jump_scale = 25.0;
    const ReturnPanel jp = panel_from_prices(synth_panel(jumpy, 5));
    Eigen::Index argmax = 0;
    double best = 0.0;
    for (Eigen::Index t = 0; t < jp.returns.rows(); ++t) {
        const double m = jp.returns.row(t).cwiseAbs().maxCoeff();
        if (m > best) {
            best = m;
            argmax = t;
        }
    }
    REQUIRE(argmax == 100);

    REQUIRE_THROWS_AS(synth_panel(SynthSpec{.instruments = 2, .factors = 5}, 1),
                      InvalidInputError);
}

TEST_CASE("liability scenario ties curves, prices and cashflows together") {
    LdiScenarioSpec spec;
    spec.panel.instruments = 2;
    spec.panel.factors = 2;
    spec.panel.periods = 300;
    spec.panel.identity_mixing = true;
    spec.level_vol = 3e-4;
    spec.slope_vol = 0.0;
    const LdiScenario scen = synth_ldi_scenario(spec, 9);

    REQUIRE(scen.curves.size() == 301);
    REQUIRE(scen.prices.dates.size() == 301);
    for (std::size_t i = 0; i < scen.curves.size(); ++i)
        REQUIRE(scen.curves[i].date == scen.prices.dates[i]);
    REQUIRE(scen.cashflows.flows.size() == 20);
    REQUIRE(scen.cashflows.flows.back().amount == 100.0);
    // Payments start beyond the simulated window (300 days ~ 1.2y -> year 2),
    // so the rolled NPV path never hits a settlement cliff.
    REQUIRE(scen.cashflows.flows.front().time_years == 2.0);
    REQUIRE(scen.cashflows.flows.back().time_years == 21.0);

    // Factor 0 moves both instrument 0 and the curve level, so liability
    // returns must be strongly negatively correlated with instrument 0.
    const ReturnPanel panel = panel_from_prices(scen.prices);
    const ReturnSeries liab = liability_returns(scen.cashflows, scen.curves, true);
    REQUIRE(liab.size() == static_cast<std::size_t>(panel.returns.rows()));
    double c01 = 0.0, v0 = 0.0, v1 = 0.0;
    const double m0 = panel.returns.col(0).mean();
    const double m1 = mean(liab.values);
    for (Eigen::Index t = 0; t < panel.returns.rows(); ++t) {
        const double a = panel.returns(t, 0) - m0;
        const double b = liab.values[static_cast<std::size_t>(t)] - m1;
        c01 += a * b;
        v0 += a * a;
        v1 += b * b;
    }
    REQUIRE(c01 / std::sqrt(v0 * v1) < -0.95);
}

TEST_CASE("option scenario writes an invertible straddle with intrinsic settlement") {
    OptionScenarioSpec spec;
    spec.trailing_days = 40;
    spec.life_days = 15;
    const OptionScenario scen = synth_option_scenario(spec, 77);

    REQUIRE(scen.underlier.dates.size() == 56);
    REQUIRE(scen.write_date == scen.underlier.dates[40]);
    REQUIRE(scen.expiry_date == scen.underlier.dates.back());
    REQUIRE(scen.quotes.rows.size() == 2 * 16);  // call+put, write day through expiry
    REQUIRE(scen.strike == std::round(scen.underlier.close(40, 0)));

    // Quotes on the write date invert to the simulator's vol state.
    const OptionQuote& q0 = scen.quotes.rows.front();
    REQUIRE(q0.date == scen.write_date);
    OptionSpec os{q0.underlying, q0.strike, year_fraction(q0.date, q0.expiry), q0.kind, 1};
    const double iv = implied_vol(os, scen.underlier.close(40, 0), q0.close);
    REQUIRE(iv > 0.02);
    REQUIRE(iv < 2.0);

    // Expiry rows carry intrinsic value.
    const double final_spot = scen.underlier.close(55, 0);
    int expiry_rows = 0;
    for (const OptionQuote& q : scen.quotes.rows) {
        if (q.date != scen.expiry_date) continue;
        ++expiry_rows;
        OptionSpec spec_q{q.underlying, q.strike, 0.0, q.kind, 1};
        REQUIRE(q.close == intrinsic_value(spec_q, final_spot));
    }
    REQUIRE(expiry_rows == 2);

    // A planted one-day crash lands on the requested life day.
    OptionScenarioSpec crash = spec;
    crash.jump_return = -0.12;
    crash.jump_day = 5;
    const OptionScenario cs = synth_option_scenario(crash, 77);
    const double jump_ret = cs.underlier.close(40 + 1 + 5, 0) / cs.underlier.close(40 + 5, 0) -
                            scen.underlier.close(40 + 1 + 5, 0) / scen.underlier.close(40 + 5, 0);
    REQUIRE(std::abs(jump_ret - (-0.12) * (scen.underlier.close(40 + 1 + 5, 0) /
                                           scen.underlier.close(40 + 5, 0))) < 1e-12);
}
