#pragma once

// Core data types and the error taxonomy shared by every module.

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace xdldi {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed argument values: bad orders, bad probability levels, bad config.
struct InvalidInputError : Error {
    using Error::Error;
};

// Series that must share a time axis do not.
struct AlignmentError : Error {
    using Error::Error;
};

// Structurally valid input on which the requested quantity is undefined
// (constant series, zero-variance panel, empty schedule, ...).
struct DegenerateInputError : Error {
    using Error::Error;
};

// Quoted option price outside static no-arbitrage bounds.
struct ArbitrageViolationError : Error {
    using Error::Error;
};

// File and schema problems; messages carry file:line context.
struct IoError : Error {
    using Error::Error;
};

// Run-configuration problems (unknown key, unparsable value).
struct ConfigError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Series and panels
// ---------------------------------------------------------------------------

// One instrument's per-period returns with ordered period labels.
// Labels are opaque strings compared lexicographically, so ISO dates and
// zero-padded indices both work.
struct ReturnSeries {
    std::vector<std::string> timestamps;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }

    void validate() const {
        if (values.size() < 2)
            throw InvalidInputError("ReturnSeries: need at least 2 observations, got " +
                                    std::to_string(values.size()));
        if (timestamps.size() != values.size())
            throw AlignmentError("ReturnSeries: " + std::to_string(timestamps.size()) +
                                 " timestamps vs " + std::to_string(values.size()) + " values");
        for (std::size_t i = 1; i < timestamps.size(); ++i)
            if (!(timestamps[i - 1] < timestamps[i]))
                throw InvalidInputError("ReturnSeries: timestamps not strictly increasing at index " +
                                        std::to_string(i) + " ('" + timestamps[i] + "')");
        for (double v : values)
            if (!std::isfinite(v)) throw InvalidInputError("ReturnSeries: non-finite value");
    }

    // Convenience for synthetic/test series: zero-padded index labels.
    static ReturnSeries from_values(std::vector<double> v) {
        ReturnSeries s;
        s.values = std::move(v);
        s.timestamps.reserve(s.values.size());
        char buf[16];
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "t%08zu", i);
            s.timestamps.emplace_back(buf);
        }
        return s;
    }
};

inline void require_aligned(const ReturnSeries& a, const ReturnSeries& b, const char* what) {
    if (a.size() != b.size())
        throw AlignmentError(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()) + ")");
    if (a.timestamps != b.timestamps)
        throw AlignmentError(std::string(what) + ": timestamp axes differ");
}

// Aligned multi-instrument returns; column j of `returns` belongs to assets[j].
struct ReturnPanel {
    std::vector<std::string> assets;
    std::vector<std::string> timestamps;
    Eigen::MatrixXd returns;  // rows: periods, cols: assets

    std::size_t periods() const { return static_cast<std::size_t>(returns.rows()); }
    std::size_t width() const { return static_cast<std::size_t>(returns.cols()); }

    void validate() const {
        if (returns.rows() < 2)
            throw InvalidInputError("ReturnPanel: need at least 2 periods, got " +
                                    std::to_string(returns.rows()));
        if (returns.cols() < 1) throw InvalidInputError("ReturnPanel: no instruments");
        if (assets.size() != width())
            throw AlignmentError("ReturnPanel: " + std::to_string(assets.size()) +
                                 " asset names vs " + std::to_string(width()) + " columns");
        if (timestamps.size() != periods())
            throw AlignmentError("ReturnPanel: " + std::to_string(timestamps.size()) +
                                 " timestamps vs " + std::to_string(periods()) + " rows");
        for (std::size_t i = 1; i < timestamps.size(); ++i)
            if (!(timestamps[i - 1] < timestamps[i]))
                throw InvalidInputError("ReturnPanel: timestamps not strictly increasing at index " +
                                        std::to_string(i));
        if (!returns.allFinite()) throw InvalidInputError("ReturnPanel: non-finite return");
    }

    ReturnSeries column(std::size_t j) const {
        ReturnSeries s;
        s.timestamps = timestamps;
        s.values.assign(returns.col(static_cast<Eigen::Index>(j)).data(),
                        returns.col(static_cast<Eigen::Index>(j)).data() + returns.rows());
        return s;
    }
};

}  // namespace xdldi
