#pragma once

// File formats and synthetic data.
//
// CSV schemas (exact headers, comma-separated, no quoting):
//   prices:    date,instrument,close
//   returns:   date,instrument,return
//   cashflows: time_years,amount
//   curves:    date,tenor_years,zero_rate
//   quotes:    date,option_id,underlying,strike,expiry,kind,close
// Parsers are strict: wrong header, wrong field count, unparsable numbers,
// duplicate keys and gaps are all hard errors carrying file:line context.
// Writers are atomic (temp file + rename), so failed runs leave no partial
// output behind.

#include "dates.hpp"
#include "liability.hpp"
#include "options.hpp"
#include "rng.hpp"
#include "series.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace xdldi {

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s, const std::string& context) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty() || errno == ERANGE || !std::isfinite(v))
        throw IoError(context + ": cannot parse number '" + s + "'");
    return v;
}

inline long parse_long(const std::string& s, const std::string& context) {
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || s.empty() || errno == ERANGE)
        throw IoError(context + ": cannot parse integer '" + s + "'");
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

struct CsvFile {
    std::string name;                            // basename, for error context
    std::vector<std::vector<std::string>> rows;  // data rows, header stripped
    std::vector<std::size_t> line_numbers;       // 1-based source line per row
};

inline CsvFile read_csv(const std::string& path, const std::string& expected_header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    CsvFile csv;
    csv.name = std::filesystem::path(path).filename().string();
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw IoError(csv.name + ": empty file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header)
        throw IoError(csv.name + ":1: expected header '" + expected_header + "', got '" + line +
                      "'");
    const std::size_t n_fields = split_csv_line(expected_header).size();
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != n_fields)
            throw IoError(csv.name + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(n_fields) + " fields, got " +
                          std::to_string(fields.size()));
        csv.rows.push_back(std::move(fields));
        csv.line_numbers.push_back(lineno);
    }
    if (csv.rows.empty()) throw IoError(csv.name + ": no data rows");
    return csv;
}

// Write-all-or-nothing: content goes to a sibling temp file first and is
// renamed into place only on success.
inline void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("write failed for '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
    }
}

inline void write_csv(const std::string& path, const std::string& header,
                      const std::vector<std::string>& rows) {
    std::string content = header;
    content.push_back('\n');
    for (const std::string& r : rows) {
        content += r;
        content.push_back('\n');
    }
    atomic_write(path, content);
}

// ---------------------------------------------------------------------------
// Prices and return panels
// ---------------------------------------------------------------------------

struct PriceTable {
    std::vector<std::string> dates;        // sorted ascending, unique
    std::vector<std::string> instruments;  // first-appearance order
    Eigen::MatrixXd close;                 // dates x instruments
    std::string currency = "USD";
    bool reordered = false;  // input rows arrived out of date order
};

inline PriceTable load_prices(const std::string& path,
                              const char* header = "date,instrument,close") {
    const CsvFile csv = read_csv(path, header);
    PriceTable pt;
    std::vector<std::string> raw_dates;
    raw_dates.reserve(csv.rows.size());
    std::map<std::string, std::size_t> instrument_index;
    for (const auto& row : csv.rows) raw_dates.push_back(row[0]);
    std::vector<std::string> sorted_dates = raw_dates;
    std::sort(sorted_dates.begin(), sorted_dates.end());
    sorted_dates.erase(std::unique(sorted_dates.begin(), sorted_dates.end()), sorted_dates.end());
    pt.dates = sorted_dates;
    pt.reordered = !std::is_sorted(raw_dates.begin(), raw_dates.end());
    std::map<std::string, std::size_t> date_index;
    for (std::size_t i = 0; i < pt.dates.size(); ++i) date_index[pt.dates[i]] = i;

    for (const auto& row : csv.rows) {
        if (instrument_index.find(row[1]) == instrument_index.end()) {
            instrument_index[row[1]] = pt.instruments.size();
            pt.instruments.push_back(row[1]);
        }
    }
    pt.close.setConstant(static_cast<Eigen::Index>(pt.dates.size()),
                         static_cast<Eigen::Index>(pt.instruments.size()),
                         std::numeric_limits<double>::quiet_NaN());
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const std::string ctx = csv.name + ":" + std::to_string(csv.line_numbers[r]);
        parse_date(row[0]);  // validates the date format
        const double v = parse_double(row[2], ctx);
        const Eigen::Index di = static_cast<Eigen::Index>(date_index[row[0]]);
        const Eigen::Index ii = static_cast<Eigen::Index>(instrument_index[row[1]]);
        if (!std::isnan(pt.close(di, ii)))
            throw IoError(ctx + ": duplicate observation for (" + row[0] + ", " + row[1] + ")");
        pt.close(di, ii) = v;
    }
    std::string gaps;
    for (std::size_t d = 0; d < pt.dates.size(); ++d)
        for (std::size_t i = 0; i < pt.instruments.size(); ++i)
            if (std::isnan(pt.close(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)))) {
                if (!gaps.empty()) gaps += ", ";
                if (gaps.size() < 300) gaps += "(" + pt.dates[d] + ", " + pt.instruments[i] + ")";
            }
    if (!gaps.empty()) throw IoError(csv.name + ": missing observations: " + gaps);
    return pt;
}

inline void write_prices(const PriceTable& pt, const std::string& path) {
    std::vector<std::string> rows;
    rows.reserve(pt.dates.size() * pt.instruments.size());
    for (std::size_t d = 0; d < pt.dates.size(); ++d)
        for (std::size_t i = 0; i < pt.instruments.size(); ++i)
            rows.push_back(pt.dates[d] + "," + pt.instruments[i] + "," +
                           format_double(pt.close(static_cast<Eigen::Index>(d),
                                                  static_cast<Eigen::Index>(i))));
    write_csv(path, "date,instrument,close", rows);
}

// Close-to-close fractional returns; timestamps shift onto the later date.
inline ReturnPanel panel_from_prices(const PriceTable& pt) {
    if (pt.dates.size() < 3)
        throw InvalidInputError("panel_from_prices: need at least 3 dates, got " +
                                std::to_string(pt.dates.size()));
    for (Eigen::Index d = 0; d < pt.close.rows(); ++d)
        for (Eigen::Index i = 0; i < pt.close.cols(); ++i)
            if (!(pt.close(d, i) > 0.0))
                throw InvalidInputError("panel_from_prices: non-positive close for (" +
                                        pt.dates[static_cast<std::size_t>(d)] + ", " +
                                        pt.instruments[static_cast<std::size_t>(i)] + ")");
    ReturnPanel panel;
    panel.assets = pt.instruments;
    panel.timestamps.assign(pt.dates.begin() + 1, pt.dates.end());
    panel.returns = pt.close.bottomRows(pt.close.rows() - 1).array() /
                        pt.close.topRows(pt.close.rows() - 1).array() -
                    1.0;
    panel.validate();
    return panel;
}

// Pre-computed returns with the same grid layout as a price file.
inline ReturnPanel load_returns(const std::string& path) {
    const PriceTable raw = load_prices(path, "date,instrument,return");
    ReturnPanel panel;
    panel.assets = raw.instruments;
    panel.timestamps = raw.dates;
    panel.returns = raw.close;
    panel.validate();
    return panel;
}

// ---------------------------------------------------------------------------
// Cashflows and curves
// ---------------------------------------------------------------------------

inline CashflowSchedule load_cashflows(const std::string& path) {
    const CsvFile csv = read_csv(path, "time_years,amount");
    CashflowSchedule sched;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const std::string ctx = csv.name + ":" + std::to_string(csv.line_numbers[r]);
        sched.flows.push_back(
            {parse_double(csv.rows[r][0], ctx), parse_double(csv.rows[r][1], ctx)});
    }
    std::stable_sort(sched.flows.begin(), sched.flows.end(),
                     [](const Cashflow& a, const Cashflow& b) { return a.time_years < b.time_years; });
    sched.validate();
    return sched;
}

inline void write_cashflows(const CashflowSchedule& sched, const std::string& path) {
    std::vector<std::string> rows;
    rows.reserve(sched.flows.size());
    for (const Cashflow& cf : sched.flows)
        rows.push_back(format_double(cf.time_years) + "," + format_double(cf.amount));
    write_csv(path, "time_years,amount", rows);
}

inline std::vector<DatedCurve> load_curves(const std::string& path) {
    const CsvFile csv = read_csv(path, "date,tenor_years,zero_rate");
    std::map<std::string, DatedCurve> by_date;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const std::string ctx = csv.name + ":" + std::to_string(csv.line_numbers[r]);
        parse_date(csv.rows[r][0]);
        DatedCurve& c = by_date[csv.rows[r][0]];
        c.date = csv.rows[r][0];
        c.tenors.push_back(parse_double(csv.rows[r][1], ctx));
        c.zero_rates.push_back(parse_double(csv.rows[r][2], ctx));
    }
    std::vector<DatedCurve> curves;
    curves.reserve(by_date.size());
    for (auto& [date, curve] : by_date) {
        // Sort pillars by tenor; duplicate tenors then fail validation.
        std::vector<std::size_t> idx(curve.tenors.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return curve.tenors[a] < curve.tenors[b];
        });
        DatedCurve sorted;
        sorted.date = curve.date;
        for (std::size_t i : idx) {
            sorted.tenors.push_back(curve.tenors[i]);
            sorted.zero_rates.push_back(curve.zero_rates[i]);
        }
        sorted.validate();
        curves.push_back(std::move(sorted));
    }
    return curves;  // std::map iteration: ascending date order
}

inline void write_curves(const std::vector<DatedCurve>& curves, const std::string& path) {
    std::vector<std::string> rows;
    for (const DatedCurve& c : curves)
        for (std::size_t i = 0; i < c.tenors.size(); ++i)
            rows.push_back(c.date + "," + format_double(c.tenors[i]) + "," +
                           format_double(c.zero_rates[i]));
    write_csv(path, "date,tenor_years,zero_rate", rows);
}

// ---------------------------------------------------------------------------
// Option quotes
// ---------------------------------------------------------------------------

struct OptionQuote {
    std::string date;
    std::string option_id;
    std::string underlying;
    double strike = 0.0;
    std::string expiry;  // ISO date
    OptionKind kind = OptionKind::call;
    double close = 0.0;
};

struct QuoteTable {
    std::vector<OptionQuote> rows;  // sorted by (date, option_id)
};

inline QuoteTable load_option_quotes(const std::string& path) {
    const CsvFile csv = read_csv(path, "date,option_id,underlying,strike,expiry,kind,close");
    QuoteTable qt;
    qt.rows.reserve(csv.rows.size());
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const std::string ctx = csv.name + ":" + std::to_string(csv.line_numbers[r]);
        OptionQuote q;
        q.date = row[0];
        parse_date(q.date);
        q.option_id = row[1];
        q.underlying = row[2];
        q.strike = parse_double(row[3], ctx);
        q.expiry = row[4];
        parse_date(q.expiry);
        try {
            q.kind = parse_option_kind(row[5]);
        } catch (const InvalidInputError& e) {
            throw IoError(ctx + ": " + e.what());
        }
        q.close = parse_double(row[6], ctx);
        if (!(q.strike > 0.0)) throw IoError(ctx + ": strike must be positive");
        if (q.close < 0.0) throw IoError(ctx + ": negative close");
        qt.rows.push_back(std::move(q));
    }
    std::stable_sort(qt.rows.begin(), qt.rows.end(), [](const OptionQuote& a, const OptionQuote& b) {
        return a.date != b.date ? a.date < b.date : a.option_id < b.option_id;
    });
    for (std::size_t i = 1; i < qt.rows.size(); ++i)
        if (qt.rows[i].date == qt.rows[i - 1].date &&
            qt.rows[i].option_id == qt.rows[i - 1].option_id)
            throw IoError(csv.name + ": duplicate quote for (" + qt.rows[i].date + ", " +
                          qt.rows[i].option_id + ")");
    return qt;
}

inline void write_option_quotes(const QuoteTable& qt, const std::string& path) {
    std::vector<std::string> rows;
    rows.reserve(qt.rows.size());
    for (const OptionQuote& q : qt.rows)
        rows.push_back(q.date + "," + q.option_id + "," + q.underlying + "," +
                       format_double(q.strike) + "," + q.expiry + "," + option_kind_name(q.kind) +
                       "," + format_double(q.close));
    write_csv(path, "date,option_id,underlying,strike,expiry,kind,close", rows);
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

// Line-oriented strict `key = value` configuration. '#' starts a comment.
// Unknown keys are rejected so typos cannot silently fall back to defaults.
struct RunConfig {
    // input files
    std::string prices;
    std::string returns;
    std::string cashflows;
    std::string curves;
    std::string quotes;
    std::string underlying;

    // shared model parameters
    std::vector<int> k_list{1, 5, 10, 50};
    double lambda = 0.01;
    int estimation_window = 60;
    int rebalance_every = 1;
    double cost_rate = 0.0006;
    std::uint64_t seed = 1;
    double funding_rate = 0.0;
    double liability_rate = 0.0;
    double rank_tolerance = 1e-10;
    double ica_tol = 1e-8;
    int ica_max_iter = 1000;
    bool roll_valuation = true;

    // risk-report parameters
    int k_max = 100;
    std::vector<double> p_levels{0.95, 0.99};

    // option-hedge parameters
    double vol_alpha = 0.0;
    double vol_q = 0.0;

    void validate() const {
        if (k_list.empty()) throw ConfigError("config: k_list must be non-empty");
        for (int k : k_list)
            if (k < 1) throw ConfigError("config: k_list entries must be >= 1");
        if (!(lambda > 0.0)) throw ConfigError("config: lambda must be positive");
        if (estimation_window < 30)
            throw ConfigError("config: estimation_window must be >= 30, got " +
                              std::to_string(estimation_window));
        if (rebalance_every < 1) throw ConfigError("config: rebalance_every must be >= 1");
        if (cost_rate < 0.0) throw ConfigError("config: cost_rate must be >= 0");
        if (!(rank_tolerance > 0.0 && rank_tolerance < 1.0))
            throw ConfigError("config: rank_tolerance must lie in (0,1)");
        if (!(ica_tol > 0.0)) throw ConfigError("config: ica_tol must be positive");
        if (ica_max_iter < 1) throw ConfigError("config: ica_max_iter must be >= 1");
        if (k_max < 1) throw ConfigError("config: k_max must be >= 1");
        for (double p : p_levels)
            if (!(p > 0.0 && p < 1.0)) throw ConfigError("config: p_levels must lie in (0,1)");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& value, const std::string& ctx, Parse parse) {
    std::vector<T> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse(trim(item), ctx));
    if (out.empty()) throw ConfigError(ctx + ": empty list");
    return out;
}

inline bool parse_bool(const std::string& value, const std::string& ctx) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(ctx + ": cannot parse boolean '" + value + "'");
}

}  // namespace detail

inline RunConfig parse_config(std::istream& in, const std::string& name) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string ctx = name + ":" + std::to_string(lineno);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(ctx + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(ctx + ": empty key");
        if (!seen.insert(key).second) throw ConfigError(ctx + ": duplicate key '" + key + "'");

        if (key == "prices") cfg.prices = value;
        else if (key == "returns") cfg.returns = value;
        else if (key == "cashflows") cfg.cashflows = value;
        else if (key == "curves") cfg.curves = value;
        else if (key == "quotes") cfg.quotes = value;
        else if (key == "underlying") cfg.underlying = value;
        else if (key == "k_list")
            cfg.k_list = detail::parse_list<int>(value, ctx, [](const std::string& s,
                                                                const std::string& c) {
                return static_cast<int>(parse_long(s, c));
            });
        else if (key == "lambda") cfg.lambda = parse_double(value, ctx);
        else if (key == "estimation_window")
            cfg.estimation_window = static_cast<int>(parse_long(value, ctx));
        else if (key == "rebalance_every")
            cfg.rebalance_every = static_cast<int>(parse_long(value, ctx));
        else if (key == "cost_rate") cfg.cost_rate = parse_double(value, ctx);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_long(value, ctx));
        else if (key == "funding_rate") cfg.funding_rate = parse_double(value, ctx);
        else if (key == "liability_rate") cfg.liability_rate = parse_double(value, ctx);
        else if (key == "rank_tolerance") cfg.rank_tolerance = parse_double(value, ctx);
        else if (key == "ica_tol") cfg.ica_tol = parse_double(value, ctx);
        else if (key == "ica_max_iter")
            cfg.ica_max_iter = static_cast<int>(parse_long(value, ctx));
        else if (key == "roll_valuation") cfg.roll_valuation = detail::parse_bool(value, ctx);
        else if (key == "k_max") cfg.k_max = static_cast<int>(parse_long(value, ctx));
        else if (key == "p_levels")
            cfg.p_levels = detail::parse_list<double>(value, ctx, parse_double);
        else if (key == "vol_alpha") cfg.vol_alpha = parse_double(value, ctx);
        else if (key == "vol_q") cfg.vol_q = parse_double(value, ctx);
        else
            throw ConfigError(ctx + ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    return parse_config(in, std::filesystem::path(path).filename().string());
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

// Weekday sequence starting at `start` (which is shifted onto a weekday).
inline std::vector<std::string> business_days(const std::string& start, std::size_t count) {
    long serial = parse_date(start);
    std::vector<std::string> out;
    out.reserve(count);
    while (out.size() < count) {
        const long weekday = ((serial % 7) + 7 + 4) % 7;  // 1970-01-01 was a Thursday (=4)
        if (weekday != 6 && weekday != 0) out.push_back(format_date(serial));
        ++serial;
    }
    return out;
}

// Non-Gaussian factor panel plus a linear mixing into instrument returns.
struct SynthSpec {
    int instruments = 10;
    int factors = 9;
    int periods = 756;           // number of return periods
    double vol_scale = 0.01;     // typical per-period instrument return stdev
    double noise_scale = 0.0;    // idiosyncratic noise stdev, in vol_scale units
    int jump_period = -1;        // 0-based return period of the shock, -1 for none
    double jump_scale = 10.0;    // shock size on factor 0, in factor stdevs
    bool identity_mixing = false;  // requires factors == instruments
    std::string start_date = "2021-01-04";
    double base_price = 100.0;

    void validate() const {
        if (instruments < 1 || factors < 1 || periods < 2)
            throw InvalidInputError("SynthSpec: need instruments, factors >= 1 and periods >= 2");
        if (factors > instruments)
            throw InvalidInputError("SynthSpec: factors must not exceed instruments");
        if (!(vol_scale > 0.0)) throw InvalidInputError("SynthSpec: vol_scale must be positive");
        if (noise_scale < 0.0) throw InvalidInputError("SynthSpec: noise_scale must be >= 0");
        if (jump_period >= periods)
            throw InvalidInputError("SynthSpec: jump_period beyond the sample");
        if (identity_mixing && factors != instruments)
            throw InvalidInputError("SynthSpec: identity mixing requires factors == instruments");
    }
};

namespace detail {

// Unit-variance non-Gaussian draws: Laplace (heavy) and uniform (light)
// alternating by factor index, so every source is identifiable.
inline Eigen::MatrixXd synth_factors(int periods, int factors, Rng& rng) {
    Eigen::MatrixXd F(periods, factors);
    const double u_half_width = std::sqrt(3.0);
    for (int t = 0; t < periods; ++t)
        for (int j = 0; j < factors; ++j)
            F(t, j) = (j % 2 == 0) ? rng.laplace() : rng.uniform(-u_half_width, u_half_width);
    return F;
}

inline Eigen::MatrixXd synth_mixing(int instruments, int factors, bool identity, Rng& rng) {
    if (identity) return Eigen::MatrixXd::Identity(instruments, factors);
    Eigen::MatrixXd B(instruments, factors);
    for (int i = 0; i < instruments; ++i) {
        do {
            for (int j = 0; j < factors; ++j) B(i, j) = rng.uniform(-1.0, 1.0);
        } while (B.row(i).norm() < 1e-3);
        B.row(i) /= B.row(i).norm();
    }
    return B;
}

inline PriceTable prices_from_returns(const Eigen::MatrixXd& R, const std::string& start_date,
                                      double base_price, const std::string& prefix) {
    PriceTable pt;
    pt.dates = business_days(start_date, static_cast<std::size_t>(R.rows()) + 1);
    for (Eigen::Index i = 0; i < R.cols(); ++i)
        pt.instruments.push_back(prefix + std::to_string(i));
    pt.close.resize(R.rows() + 1, R.cols());
    for (Eigen::Index i = 0; i < R.cols(); ++i) {
        double p = base_price;
        pt.close(0, i) = p;
        for (Eigen::Index t = 0; t < R.rows(); ++t) {
            p *= 1.0 + R(t, i);
            if (!(p > 0.0))
                throw InvalidInputError("synthetic price went non-positive; lower vol_scale");
            pt.close(t + 1, i) = p;
        }
    }
    return pt;
}

}  // namespace detail

inline PriceTable synth_panel(const SynthSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    Eigen::MatrixXd F = detail::synth_factors(spec.periods, spec.factors, rng);
    const Eigen::MatrixXd B =
        detail::synth_mixing(spec.instruments, spec.factors, spec.identity_mixing, rng);
    if (spec.jump_period >= 0) F(spec.jump_period, 0) += spec.jump_scale;
    Eigen::MatrixXd R = spec.vol_scale * (F * B.transpose());
    if (spec.noise_scale > 0.0)
        for (Eigen::Index t = 0; t < R.rows(); ++t)
            for (Eigen::Index i = 0; i < R.cols(); ++i)
                R(t, i) += spec.vol_scale * spec.noise_scale * rng.normal();
    return detail::prices_from_returns(R, spec.start_date, spec.base_price, "SYN");
}

// Asset panel plus a factor-driven curve history and a level cashflow
// schedule: the liability NPV co-moves with the panel through the shared
// factors, so decomposition-based hedging has something real to find.
struct LdiScenarioSpec {
    SynthSpec panel;
    std::vector<double> tenors{0.5, 1, 2, 3, 5, 7, 10, 15, 20, 30};
    double base_rate = 0.03;
    double base_slope = 0.01;      // long-end minus short-end of the initial curve
    double level_vol = 2e-4;       // per-period level-shift stdev driven by factor 0
    double slope_vol = 5e-5;       // per-period slope-tilt stdev driven by factor 1
    double curve_noise = 0.0;      // independent per-pillar noise stdev
    int liability_years = 20;
    double liability_amount = 100.0;

    void validate() const {
        panel.validate();
        if (tenors.size() < 2) throw InvalidInputError("LdiScenarioSpec: need >= 2 tenors");
        if (liability_years < 1 || liability_amount <= 0.0)
            throw InvalidInputError("LdiScenarioSpec: bad liability schedule");
        if (panel.factors < 2)
            throw InvalidInputError("LdiScenarioSpec: need >= 2 factors to drive the curve");
    }
};

struct LdiScenario {
    PriceTable prices;
    std::vector<DatedCurve> curves;
    CashflowSchedule cashflows;
};

inline LdiScenario synth_ldi_scenario(const LdiScenarioSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    Eigen::MatrixXd F = detail::synth_factors(spec.panel.periods, spec.panel.factors, rng);
    const Eigen::MatrixXd B = detail::synth_mixing(spec.panel.instruments, spec.panel.factors,
                                                   spec.panel.identity_mixing, rng);
    if (spec.panel.jump_period >= 0) F(spec.panel.jump_period, 0) += spec.panel.jump_scale;
    Eigen::MatrixXd R = spec.panel.vol_scale * (F * B.transpose());
    if (spec.panel.noise_scale > 0.0)
        for (Eigen::Index t = 0; t < R.rows(); ++t)
            for (Eigen::Index i = 0; i < R.cols(); ++i)
                R(t, i) += spec.panel.vol_scale * spec.panel.noise_scale * rng.normal();

    LdiScenario scen;
    scen.prices =
        detail::prices_from_returns(R, spec.panel.start_date, spec.panel.base_price, "SYN");

    const double t_max = spec.tenors.back();
    std::vector<double> level(spec.tenors.size()), tilt(spec.tenors.size());
    for (std::size_t i = 0; i < spec.tenors.size(); ++i) {
        level[i] = 1.0;
        tilt[i] = spec.tenors[i] / t_max - 0.5;
    }
    DatedCurve cur;
    cur.date = scen.prices.dates.front();
    cur.tenors = spec.tenors;
    cur.zero_rates.resize(spec.tenors.size());
    for (std::size_t i = 0; i < spec.tenors.size(); ++i)
        cur.zero_rates[i] = spec.base_rate + spec.base_slope * (spec.tenors[i] / t_max);
    scen.curves.push_back(cur);
    for (int t = 0; t < spec.panel.periods; ++t) {
        const double dl = spec.level_vol * F(t, 0);
        const double ds = spec.slope_vol * F(t, 1);
        for (std::size_t i = 0; i < spec.tenors.size(); ++i) {
            cur.zero_rates[i] += dl * level[i] + ds * tilt[i];
            if (spec.curve_noise > 0.0) cur.zero_rates[i] += spec.curve_noise * rng.normal();
        }
        cur.date = scen.prices.dates[static_cast<std::size_t>(t) + 1];
        scen.curves.push_back(cur);
    }

    // Defer the first payment beyond the simulated window: a payment date
    // inside the sample would show up as a one-day amortization cliff in the
    // rolled NPV series, which is settlement, not market risk.
    const int defer = spec.panel.periods / 252 + 1;
    for (int y = 0; y < spec.liability_years; ++y)
        scen.cashflows.flows.push_back({static_cast<double>(defer + y), spec.liability_amount});
    return scen;
}

// Underlier path with stochastic volatility plus daily straddle quotes
// (both legs priced on the path's instantaneous vol).
struct OptionScenarioSpec {
    int trailing_days = 60;  // price history before the straddle is written
    int life_days = 40;      // trading days from write date to expiry
    double mu = 0.0;         // annualized drift
    VolParams vp{0.2, 0.5, -0.5};
    double jump_return = 0.0;  // extra one-day return injected during the life
    int jump_day = -1;         // 0-based day within the life window, -1 for none
    std::string underlying = "SYN";
    std::string start_date = "2021-01-04";
    double base_price = 100.0;

    void validate() const {
        if (trailing_days < 30)
            throw InvalidInputError("OptionScenarioSpec: trailing_days must be >= 30");
        if (life_days < 2) throw InvalidInputError("OptionScenarioSpec: life_days must be >= 2");
        if (jump_day >= life_days)
            throw InvalidInputError("OptionScenarioSpec: jump_day beyond the life window");
        vp.validate();
        if (!(base_price > 0.0))
            throw InvalidInputError("OptionScenarioSpec: base_price must be positive");
    }
};

struct OptionScenario {
    PriceTable underlier;
    QuoteTable quotes;
    std::string write_date;
    std::string expiry_date;
    double strike = 0.0;
};

inline OptionScenario synth_option_scenario(const OptionScenarioSpec& spec, std::uint64_t seed) {
    spec.validate();
    const double dt = 1.0 / 252.0;
    const int total_days = spec.trailing_days + spec.life_days;
    Rng rng(seed);

    OptionScenario scen;
    scen.underlier.dates = business_days(spec.start_date, static_cast<std::size_t>(total_days) + 1);
    scen.underlier.instruments = {spec.underlying};
    scen.underlier.close.resize(total_days + 1, 1);

    std::vector<double> vols(static_cast<std::size_t>(total_days) + 1);
    double log_s = std::log(spec.base_price);
    double sig = spec.vp.sigma;
    const double root_1mq2 = std::sqrt(std::max(0.0, 1.0 - spec.vp.q * spec.vp.q));
    scen.underlier.close(0, 0) = spec.base_price;
    vols[0] = sig;
    for (int t = 1; t <= total_days; ++t) {
        const double dw = std::sqrt(dt) * rng.normal();
        const double dy = std::sqrt(dt) * rng.normal();
        log_s += (spec.mu - 0.5 * sig * sig) * dt + sig * dw;
        const int life_index = t - 1 - spec.trailing_days;
        if (spec.jump_day >= 0 && life_index == spec.jump_day)
            log_s += std::log1p(spec.jump_return);
        sig = std::abs(sig + spec.vp.alpha * (spec.vp.q * dw + root_1mq2 * dy));
        sig = std::max(sig, 0.02);  // keep quotes invertible
        scen.underlier.close(t, 0) = std::exp(log_s);
        vols[static_cast<std::size_t>(t)] = sig;
    }

    const int wi = spec.trailing_days;
    scen.write_date = scen.underlier.dates[static_cast<std::size_t>(wi)];
    scen.expiry_date = scen.underlier.dates.back();
    scen.strike = std::round(scen.underlier.close(wi, 0));

    char id_buf[64];
    std::snprintf(id_buf, sizeof(id_buf), "%s-%ld", spec.underlying.c_str(),
                  std::lround(scen.strike));
    for (int t = wi; t <= total_days; ++t) {
        const double spot = scen.underlier.close(t, 0);
        const double tau =
            year_fraction(scen.underlier.dates[static_cast<std::size_t>(t)], scen.expiry_date);
        for (OptionKind kind : {OptionKind::call, OptionKind::put}) {
            OptionSpec os{spec.underlying, scen.strike, tau, kind, 1};
            OptionQuote q;
            q.date = scen.underlier.dates[static_cast<std::size_t>(t)];
            q.option_id =
                std::string(id_buf) + (kind == OptionKind::call ? "-C" : "-P");
            q.underlying = spec.underlying;
            q.strike = scen.strike;
            q.expiry = scen.expiry_date;
            q.kind = kind;
            q.close = tau > 0.0 ? bs_price(os, spot, vols[static_cast<std::size_t>(t)])
                                : intrinsic_value(os, spot);
            scen.quotes.rows.push_back(std::move(q));
        }
    }
    return scen;
}

}  // namespace xdldi
