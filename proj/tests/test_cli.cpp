// End-to-end tests of the command-line tool. Every subcommand is run as a
// child process and judged on its exit code and the files it emits: byte
// stability across reruns, schema headers, cross-file consistency, and
// clean failure (nonzero exit, diagnostic on stderr, no partial outputs).

#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

struct TmpDir {
    fs::path path;
    TmpDir() {
        std::ostringstream name;
        name << "xdldi_cli_" << ::getpid() << "_" << static_cast<const void*>(this);
        path = fs::temp_directory_path() / name.str();
        fs::create_directories(path);
    }
    ~TmpDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args, const std::string& stderr_file = "/dev/null") {
    const std::string cmd =
        std::string(XDLDI_CLI_PATH) + " " + args + " >/dev/null 2>" + stderr_file;
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Minimal CSV reader for the tool's unquoted outputs; checks the header.
std::vector<std::vector<std::string>> read_rows(const std::string& path,
                                                const std::string& header) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == header);
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        rows.push_back(std::move(fields));
    }
    return rows;
}

double num(const std::string& s) { return std::stod(s); }

}  // namespace

TEST_CASE("cli: synth is reproducible per seed and sensitive to it") {
    TmpDir dir;
    REQUIRE(run_cli("synth --kind panel --periods 80 --instruments 4 --factors 3 --seed 3 "
                    "--out-dir " + dir.file("a")) == 0);
    REQUIRE(run_cli("synth --kind panel --periods 80 --instruments 4 --factors 3 --seed 3 "
                    "--out-dir " + dir.file("b")) == 0);
    REQUIRE(run_cli("synth --kind panel --periods 80 --instruments 4 --factors 3 --seed 4 "
                    "--out-dir " + dir.file("c")) == 0);
    const std::string a = slurp(dir.file("a/prices.csv"));
    REQUIRE(a == slurp(dir.file("b/prices.csv")));
    REQUIRE(a != slurp(dir.file("c/prices.csv")));
    REQUIRE(a.rfind("date,instrument,close\n", 0) == 0);
}

TEST_CASE("cli: config file supplies the seed and explicit flags override it") {
    TmpDir dir;
    {
        std::ofstream cfg(dir.file("run.cfg"));
        cfg << "# comment line\nseed = 5\n";
    }
    const std::string synth = "synth --kind panel --periods 60 --instruments 3 --factors 2 ";
    REQUIRE(run_cli(synth + "--config " + dir.file("run.cfg") + " --out-dir " + dir.file("cfg5")) == 0);
    REQUIRE(run_cli(synth + "--seed 5 --out-dir " + dir.file("flag5")) == 0);
    REQUIRE(run_cli(synth + "--config " + dir.file("run.cfg") + " --seed 7 --out-dir " +
                    dir.file("mix7")) == 0);
    REQUIRE(run_cli(synth + "--seed 7 --out-dir " + dir.file("flag7")) == 0);

    REQUIRE(slurp(dir.file("cfg5/prices.csv")) == slurp(dir.file("flag5/prices.csv")));
    REQUIRE(slurp(dir.file("mix7/prices.csv")) == slurp(dir.file("flag7/prices.csv")));
    REQUIRE(slurp(dir.file("cfg5/prices.csv")) != slurp(dir.file("flag7/prices.csv")));
}

TEST_CASE("cli: risk-report orders var <= cvar <= xd and emits the full sequence") {
    TmpDir dir;
    REQUIRE(run_cli("synth --kind panel --periods 150 --instruments 3 --factors 3 --seed 2 "
                    "--out-dir " + dir.file("data")) == 0);
    REQUIRE(run_cli("risk-report --prices " + dir.file("data/prices.csv") +
                    " --p-levels 0.9,0.99 --k-max 100 --out-dir " + dir.file("out")) == 0);

    const auto risk = read_rows(dir.file("out/risk_report.csv"), "instrument,p,var,cvar,xd");
    REQUIRE(risk.size() == 3 * 2);  // instruments x p-levels
    for (const auto& row : risk) {
        REQUIRE(row.size() == 5);
        const double var = num(row[2]), cvar = num(row[3]), xd = num(row[4]);
        REQUIRE(var <= cvar);
        REQUIRE(cvar <= xd);
    }

    const auto seq = read_rows(dir.file("out/moment_sequence.csv"), "instrument,k,moment_root");
    REQUIRE(seq.size() == 3 * 100);
    std::map<std::string, double> xd_of;
    for (const auto& row : risk) xd_of[row[0]] = num(row[4]);
    std::map<std::string, double> prev;
    for (const auto& row : seq) {
        const double root = num(row[2]);
        // Root moments are nondecreasing in the order and bounded by the
        // largest absolute deviation.
        if (prev.count(row[0])) REQUIRE(root >= prev[row[0]] * (1.0 - 1e-12));
        prev[row[0]] = root;
        REQUIRE(root <= xd_of.at(row[0]) * (1.0 + 1e-12));
    }

    // Rerun lands byte-identical.
    REQUIRE(run_cli("risk-report --prices " + dir.file("data/prices.csv") +
                    " --p-levels 0.9,0.99 --k-max 100 --out-dir " + dir.file("out2")) == 0);
    REQUIRE(slurp(dir.file("out/risk_report.csv")) == slurp(dir.file("out2/risk_report.csv")));
    REQUIRE(slurp(dir.file("out/moment_sequence.csv")) ==
            slurp(dir.file("out2/moment_sequence.csv")));
}

namespace {

// Reads a decompose output directory plus its input prices and checks that
// component series times the mixing matrix rebuild every input return. On a
// full-rank panel the component columns carry the means, so the raw sum
// reconstructs directly; on a rank-deficient panel only the in-span part of
// the mean survives, so the general identity de-means the components and
// adds back the stored asset means.
void check_reconstruction(const TmpDir& dir, const std::string& data, const std::string& out,
                          int expected_rank, int instruments, int periods) {
    const nlohmann::json summary =
        nlohmann::json::parse(slurp(dir.file(out + "/decompose_summary.json")));
    REQUIRE(summary.at("rank").get<int>() == expected_rank);
    REQUIRE(summary.at("instruments").get<int>() == instruments);
    REQUIRE(summary.at("periods").get<int>() == periods);

    const auto price_rows =
        read_rows(dir.file(data + "/prices.csv"), "date,instrument,close");
    std::vector<std::string> dates;
    std::map<std::string, std::map<std::string, double>> close;  // date -> instrument -> close
    for (const auto& row : price_rows) {
        if (close.find(row[0]) == close.end()) dates.push_back(row[0]);
        close[row[0]][row[1]] = num(row[2]);
    }

    std::map<std::string, std::map<std::string, double>> mixing;  // asset -> component -> value
    for (const auto& row : read_rows(dir.file(out + "/mixing.csv"), "asset,component,value"))
        mixing[row[0]][row[1]] = num(row[2]);
    std::map<std::string, std::map<std::string, double>> comp;  // date -> component -> value
    std::map<std::string, double> comp_mean;
    for (const auto& row :
         read_rows(dir.file(out + "/components.csv"), "date,component,value")) {
        comp[row[0]][row[1]] = num(row[2]);
        comp_mean[row[1]] += num(row[2]);
    }
    REQUIRE(comp.size() == static_cast<std::size_t>(periods));
    for (auto& [name, total] : comp_mean) total /= static_cast<double>(periods);

    const bool full_rank = expected_rank == instruments;
    for (std::size_t t = 1; t < dates.size(); ++t) {
        for (const auto& [asset, mix_row] : mixing) {
            const double ret = close[dates[t]][asset] / close[dates[t - 1]][asset] - 1.0;
            double rebuilt =
                full_rank ? 0.0 : summary.at("asset_means").at(asset).get<double>();
            for (const auto& [component, value] : mix_row) {
                const double c = comp[dates[t]][component];
                rebuilt += (full_rank ? c : c - comp_mean[component]) * value;
            }
            REQUIRE(std::abs(rebuilt - ret) < 1e-8);
        }
    }
}

}  // namespace

TEST_CASE("cli: decompose outputs reconstruct the input returns") {
    TmpDir dir;

    // Full-rank panel: the component columns sum-reconstruct the returns.
    REQUIRE(run_cli("synth --kind panel --periods 200 --instruments 5 --factors 5 --seed 6 "
                    "--out-dir " + dir.file("full")) == 0);
    REQUIRE(run_cli("decompose --prices " + dir.file("full/prices.csv") + " --seed 1 --out-dir " +
                    dir.file("full_out")) == 0);
    check_reconstruction(dir, "full", "full_out", 5, 5, 200);

    // Rank-deficient panel (five instruments driven by four factors).
    REQUIRE(run_cli("synth --kind panel --periods 200 --instruments 5 --factors 4 --seed 6 "
                    "--out-dir " + dir.file("thin")) == 0);
    REQUIRE(run_cli("decompose --prices " + dir.file("thin/prices.csv") + " --seed 1 --out-dir " +
                    dir.file("out")) == 0);
    check_reconstruction(dir, "thin", "out", 4, 5, 200);

    // Rerun with the same seed is byte-identical.
    REQUIRE(run_cli("decompose --prices " + dir.file("thin/prices.csv") + " --seed 1 --out-dir " +
                    dir.file("out2")) == 0);
    for (const char* f :
         {"mixing.csv", "unmixing.csv", "components.csv", "decompose_summary.json"})
        REQUIRE(slurp(dir.file(std::string("out/") + f)) ==
                slurp(dir.file(std::string("out2/") + f)));
}

TEST_CASE("cli: profile emits an affine k=1 column and exact correlation endpoints") {
    TmpDir dir;
    REQUIRE(run_cli("profile --k-list 1,5,50 --lambda 0.01 --mu-min 0 --mu-max 0.02 "
                    "--mu-steps 21 --rho-steps 9 --out-dir " + dir.file("out")) == 0);

    const auto weights = read_rows(dir.file("out/weight_profile.csv"), "mu,k,weight");
    REQUIRE(weights.size() == 3 * 21);
    std::vector<double> k1;
    for (const auto& row : weights)
        if (row[1] == "1") k1.push_back(num(row[2]));
    REQUIRE(k1.size() == 21);
    for (std::size_t i = 2; i < k1.size(); ++i) {
        const double second_diff = (k1[i] - k1[i - 1]) - (k1[i - 1] - k1[i - 2]);
        REQUIRE(std::abs(second_diff) < 1e-9 * (1.0 + std::abs(k1[i])));
    }

    const auto corr = read_rows(dir.file("out/effective_correlation.csv"), "rho,k,value");
    REQUIRE(corr.size() == 3 * 9);
    for (const auto& row : corr) {
        const double rho = num(row[0]), value = num(row[2]);
        REQUIRE(std::abs(value) <= 1.0);
        if (rho == -1.0) REQUIRE(value == -1.0);
        if (rho == 0.0) REQUIRE(value == 0.0);
        if (rho == 1.0) REQUIRE(value == 1.0);
        if (row[1] == "50" && rho == 0.5) REQUIRE(value > 0.99);
    }
}

TEST_CASE("cli: ldi backtest runs from a config file, deterministically") {
    TmpDir dir;
    REQUIRE(run_cli("synth --kind ldi --periods 160 --instruments 5 --factors 4 --seed 9 "
                    "--out-dir " + dir.file("data")) == 0);
    {
        std::ofstream cfg(dir.file("run.cfg"));
        cfg << "prices = " << dir.file("data/prices.csv") << "\n"
            << "cashflows = " << dir.file("data/cashflows.csv") << "\n"
            << "curves = " << dir.file("data/curves.csv") << "\n"
            << "k_list = 1, 10\n"
            << "lambda = 0.01\n"
            << "estimation_window = 120\n"
            << "cost_rate = 0.0004\n"
            << "seed = 9\n";
    }
    REQUIRE(run_cli("backtest-ldi --config " + dir.file("run.cfg") + " --out-dir " +
                    dir.file("out")) == 0);

    const auto report = read_rows(dir.file("out/ldi_report.csv"), "date,strategy,value,pnl,cost");
    REQUIRE(report.size() == 3 * (160 - 120 + 1));  // liability, ldi_k1, ldi_k10

    // Accounting identity straight off the emitted file.
    std::map<std::string, std::vector<std::array<double, 3>>> by_strategy;
    for (const auto& row : report)
        by_strategy[row[1]].push_back({num(row[2]), num(row[3]), num(row[4])});
    REQUIRE(by_strategy.size() == 3);
    for (const auto& [name, rows] : by_strategy) {
        for (std::size_t t = 1; t < rows.size(); ++t) {
            const double dv = rows[t][0] - rows[t - 1][0];
            REQUIRE(std::abs(dv - (rows[t][1] - rows[t][2])) <
                    1e-10 * (1.0 + std::abs(rows[t][0])));
        }
    }

    const nlohmann::json summary = nlohmann::json::parse(slurp(dir.file("out/ldi_summary.json")));
    REQUIRE(summary.at("strategies").contains("liability"));
    REQUIRE(summary.at("strategies").contains("ldi_k1"));
    REQUIRE(summary.at("strategies").contains("ldi_k10"));
    REQUIRE(summary.at("k_list") == "1,10");

    REQUIRE(run_cli("backtest-ldi --config " + dir.file("run.cfg") + " --out-dir " +
                    dir.file("out2")) == 0);
    for (const char* f : {"ldi_report.csv", "ldi_trades.csv", "ldi_weights.csv", "ldi_summary.json"})
        REQUIRE(slurp(dir.file(std::string("out/") + f)) ==
                slurp(dir.file(std::string("out2/") + f)));
}

TEST_CASE("cli: option backtest runs from flags, deterministically") {
    TmpDir dir;
    REQUIRE(run_cli("synth --kind options --trailing-days 60 --life-days 25 --jump-return -0.04 "
                    "--jump-day 10 --seed 21 --out-dir " + dir.file("data")) == 0);
    const std::string run = "backtest-options --quotes " + dir.file("data/quotes.csv") +
                            " --underlying " + dir.file("data/underlying.csv") +
                            " --estimation-window 40 --k-list 1,5 --vol-alpha 0.5 --vol-q=-0.5 "
                            "--cost-rate 0.0004 --out-dir ";
    REQUIRE(run_cli(run + dir.file("out")) == 0);

    const auto weights =
        read_rows(dir.file("out/option_weights.csv"), "strategy,instrument,weight");
    std::vector<std::string> strategies;
    for (const auto& row : weights) strategies.push_back(row[0]);
    for (const char* name : {"SYN/unhedged", "SYN/delta", "SYN/k1", "SYN/k5"})
        REQUIRE(std::find(strategies.begin(), strategies.end(), name) != strategies.end());

    const auto report =
        read_rows(dir.file("out/option_report.csv"), "date,strategy,value,pnl,cost");
    REQUIRE(report.size() == 4 * 26);  // four strategies, write date + 25 life days

    REQUIRE(run_cli(run + dir.file("out2")) == 0);
    for (const char* f : {"option_report.csv", "option_trades.csv", "option_weights.csv",
                          "option_summary.json"})
        REQUIRE(slurp(dir.file(std::string("out/") + f)) ==
                slurp(dir.file(std::string("out2/") + f)));
}

TEST_CASE("cli: failures exit nonzero with a diagnostic and no partial outputs") {
    TmpDir dir;

    SECTION("missing input file") {
        REQUIRE(run_cli("risk-report --prices " + dir.file("absent.csv") + " --out-dir " +
                        dir.file("out"), dir.file("err.txt")) == 1);
        REQUIRE(slurp(dir.file("err.txt")).rfind("xdldi: ", 0) == 0);
        REQUIRE(!fs::exists(dir.file("out")));
    }
    SECTION("degenerate series fails after parsing, still no partial outputs") {
        std::ofstream prices(dir.file("flat.csv"));
        prices << "date,instrument,close\n"
               << "2021-01-04,AAA,100\n2021-01-05,AAA,100\n2021-01-06,AAA,100\n";
        prices.close();
        REQUIRE(run_cli("risk-report --prices " + dir.file("flat.csv") + " --out-dir " +
                        dir.file("out")) == 1);
        REQUIRE(!fs::exists(dir.file("out")));
    }
    SECTION("unknown config key") {
        std::ofstream cfg(dir.file("bad.cfg"));
        cfg << "not_a_key = 1\n";
        cfg.close();
        REQUIRE(run_cli("risk-report --config " + dir.file("bad.cfg"), dir.file("err.txt")) == 1);
        REQUIRE(slurp(dir.file("err.txt")).find("unknown key") != std::string::npos);
    }
    SECTION("missing required inputs for the backtests") {
        REQUIRE(run_cli("backtest-ldi") == 1);
        REQUIRE(run_cli("backtest-options") == 1);
    }
    SECTION("command-line misuse") {
        REQUIRE(run_cli("") != 0);                       // a subcommand is required
        REQUIRE(run_cli("no-such-command") != 0);        // unknown subcommand
        REQUIRE(run_cli("risk-report --no-such-flag") != 0);
        REQUIRE(run_cli("synth --out-dir " + dir.file("x")) != 0);  // --kind is required
        REQUIRE(run_cli("synth --kind bogus --out-dir " + dir.file("x")) != 0);
    }
}

TEST_CASE("cli: help is available everywhere and exits cleanly") {
    REQUIRE(run_cli("--help") == 0);
    for (const char* sub : {"risk-report", "decompose", "profile", "backtest-ldi",
                            "backtest-options", "synth"})
        REQUIRE(run_cli(std::string(sub) + " --help") == 0);
}
