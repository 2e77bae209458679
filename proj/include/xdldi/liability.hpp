#pragma once

// Liability valuation: fixed cashflow schedules discounted on dated zero
// curves, NPV paths and per-period liability returns.

#include "dates.hpp"
#include "series.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace xdldi {

struct Cashflow {
    double time_years = 0.0;  // from the schedule's reference date
    double amount = 0.0;
};

struct CashflowSchedule {
    std::vector<Cashflow> flows;  // times strictly increasing

    void validate() const {
        if (flows.empty()) throw DegenerateInputError("CashflowSchedule: empty schedule");
        for (std::size_t i = 0; i < flows.size(); ++i) {
            if (!(flows[i].time_years > 0.0) || !std::isfinite(flows[i].time_years))
                throw InvalidInputError("CashflowSchedule: times must be positive and finite");
            if (!std::isfinite(flows[i].amount))
                throw InvalidInputError("CashflowSchedule: non-finite amount");
            if (i > 0 && !(flows[i - 1].time_years < flows[i].time_years))
                throw InvalidInputError("CashflowSchedule: times not strictly increasing at index " +
                                        std::to_string(i));
        }
    }
};

// Continuously-compounded zero curve observed on one date. Rates are linearly
// interpolated in tenor and extrapolated flat beyond the pillars.
struct DatedCurve {
    std::string date;
    std::vector<double> tenors;      // years, strictly increasing, >= 2 pillars
    std::vector<double> zero_rates;  // same length

    void validate() const {
        if (tenors.size() < 2)
            throw InvalidInputError("DatedCurve " + date + ": need at least 2 pillars, got " +
                                    std::to_string(tenors.size()));
        if (zero_rates.size() != tenors.size())
            throw AlignmentError("DatedCurve " + date + ": pillar/rate count mismatch");
        for (std::size_t i = 0; i < tenors.size(); ++i) {
            if (!(tenors[i] > 0.0) || !std::isfinite(tenors[i]) || !std::isfinite(zero_rates[i]))
                throw InvalidInputError("DatedCurve " + date + ": bad pillar at index " +
                                        std::to_string(i));
            if (i > 0 && !(tenors[i - 1] < tenors[i]))
                throw InvalidInputError("DatedCurve " + date +
                                        ": tenors not strictly increasing at index " +
                                        std::to_string(i));
        }
    }

    double zero_rate(double t) const {
        if (t <= tenors.front()) return zero_rates.front();
        if (t >= tenors.back()) return zero_rates.back();
        const auto it = std::upper_bound(tenors.begin(), tenors.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - tenors.begin());
        const std::size_t lo = hi - 1;
        const double w = (t - tenors[lo]) / (tenors[hi] - tenors[lo]);
        return zero_rates[lo] + w * (zero_rates[hi] - zero_rates[lo]);
    }

    double discount(double t) const { return std::exp(-zero_rate(t) * t); }
};

// Present value of the schedule on `curve`. `elapsed_years` shifts the
// valuation date forward along the schedule: cashflows already paid
// (time <= elapsed) drop out, the rest discount over their remaining life.
inline double liability_npv(const CashflowSchedule& schedule, const DatedCurve& curve,
                            double elapsed_years = 0.0) {
    schedule.validate();
    curve.validate();
    double npv = 0.0;
    for (const Cashflow& cf : schedule.flows) {
        const double remaining = cf.time_years - elapsed_years;
        if (remaining <= 0.0) continue;
        npv += cf.amount * curve.discount(remaining);
    }
    return npv;
}

// Parallel-bump duration and convexity diagnostics (finite shift, default 1bp).
struct LiabilitySensitivity {
    double npv = 0.0;
    double duration = 0.0;   // -(1/NPV) dNPV/dshift
    double convexity = 0.0;  // (1/NPV) d2NPV/dshift2
};

inline LiabilitySensitivity liability_sensitivity(const CashflowSchedule& schedule,
                                                  const DatedCurve& curve, double shift = 1e-4) {
    if (!(shift > 0.0)) throw InvalidInputError("liability_sensitivity: shift must be positive");
    DatedCurve up = curve, down = curve;
    for (std::size_t i = 0; i < curve.zero_rates.size(); ++i) {
        up.zero_rates[i] += shift;
        down.zero_rates[i] -= shift;
    }
    LiabilitySensitivity s;
    s.npv = liability_npv(schedule, curve);
    if (s.npv == 0.0) throw DegenerateInputError("liability_sensitivity: zero NPV");
    const double pu = liability_npv(schedule, up);
    const double pd = liability_npv(schedule, down);
    s.duration = -(pu - pd) / (2.0 * shift * s.npv);
    s.convexity = (pu - 2.0 * s.npv + pd) / (shift * shift * s.npv);
    return s;
}

// NPV marked on every curve date. With `roll_valuation` the valuation date
// advances with the curve dates (cashflows age and roll down the curve);
// without it the schedule is frozen at its initial remaining life, isolating
// pure curve moves.
inline std::vector<double> liability_values(const CashflowSchedule& schedule,
                                            const std::vector<DatedCurve>& curves,
                                            bool roll_valuation = true) {
    if (curves.empty()) throw DegenerateInputError("liability_values: no curves");
    const long t0 = parse_date(curves.front().date);
    std::vector<double> values;
    values.reserve(curves.size());
    long prev = t0;
    for (const DatedCurve& c : curves) {
        const long tc = parse_date(c.date);
        if (tc < prev)
            throw InvalidInputError("liability_values: curve dates not nondecreasing at " + c.date);
        prev = tc;
        const double elapsed = roll_valuation ? static_cast<double>(tc - t0) / 365.0 : 0.0;
        values.push_back(liability_npv(schedule, c, elapsed));
    }
    return values;
}

// Per-period fractional NPV changes; element i spans curves[i] -> curves[i+1]
// and is stamped with the later date.
inline ReturnSeries liability_returns(const CashflowSchedule& schedule,
                                      const std::vector<DatedCurve>& curves,
                                      bool roll_valuation = true) {
    if (curves.size() < 2)
        throw InvalidInputError("liability_returns: need at least 2 curves, got " +
                                std::to_string(curves.size()));
    const std::vector<double> values = liability_values(schedule, curves, roll_valuation);
    ReturnSeries out;
    out.timestamps.reserve(curves.size() - 1);
    out.values.reserve(curves.size() - 1);
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i - 1] == 0.0)
            throw DegenerateInputError("liability_returns: zero NPV on " + curves[i - 1].date);
        out.timestamps.push_back(curves[i].date);
        out.values.push_back(values[i] / values[i - 1] - 1.0);
    }
    return out;
}

}  // namespace xdldi
