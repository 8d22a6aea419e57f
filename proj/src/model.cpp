#include "cogmac/model.hpp"

#include <cmath>
#include <string>

namespace cogmac {

double q(double x) {
    if (!std::isfinite(x)) throw DomainError("q: non-finite argument");
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

double q_inv(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("q_inv: p must lie in (0,1), got " + std::to_string(p));
    // q(-39) == 1 and q(39) == 0 in double precision
    double lo = -39.0, hi = 39.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(lo)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (q(mid) > p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double db_to_linear(double db) {
    if (!std::isfinite(db)) throw DomainError("db_to_linear: non-finite");
    return std::pow(10.0, db / 10.0);
}

double linear_to_db(double r) {
    if (!(r > 0.0)) throw DomainError("linear_to_db: ratio must be > 0");
    return 10.0 * std::log10(r);
}

long slots_of(double seconds, double slot) {
    if (!(slot > 0)) throw DomainError("slots_of: slot must be > 0");
    double n = seconds / slot;
    double r = std::round(n);
    if (std::fabs(n - r) > 1e-9 * std::max(1.0, std::fabs(n)))
        throw DomainError("slots_of: duration is not a whole number of slots");
    return static_cast<long>(r);
}

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(what) + ": probability outside [0,1]");
}

PuChannelStats PuChannelStats::from_idle(double p_idle) {
    check_probability(p_idle, "PuChannelStats.p_idle");
    return PuChannelStats{p_idle, 1.0 - p_idle, std::nullopt, std::nullopt};
}

PuChannelStats PuChannelStats::from_means(double mean_idle, double mean_active) {
    if (!(mean_idle > 0 && mean_active > 0)) throw DomainError("PuChannelStats: means must be > 0");
    double p0 = mean_idle / (mean_idle + mean_active);
    return PuChannelStats{p0, 1.0 - p0, mean_idle, mean_active};
}

void PuChannelStats::validate() const {
    check_probability(p_idle, "PuChannelStats.p_idle");
    check_probability(p_busy, "PuChannelStats.p_busy");
    if (std::fabs(p_idle + p_busy - 1.0) > 1e-12) throw DomainError("PuChannelStats: p_idle + p_busy != 1");
    if (mean_idle && !(*mean_idle > 0)) throw DomainError("PuChannelStats: mean_idle must be > 0");
    if (mean_active && !(*mean_active > 0)) throw DomainError("PuChannelStats: mean_active must be > 0");
}

SnrGrid::SnrGrid(int n_su_, int n_ch_, double fill) : n_su(n_su_), n_ch(n_ch_) {
    if (n_su < 1 || n_ch < 1) throw DomainError("SnrGrid: empty dimensions");
    values.assign(static_cast<size_t>(n_su) * n_ch, fill);
}

void SnrGrid::validate() const {
    if (n_su < 1 || n_ch < 1 || values.size() != static_cast<size_t>(n_su) * n_ch)
        throw DomainError("SnrGrid: inconsistent dimensions");
    for (double v : values)
        if (!(v > 0)) throw DomainError("SnrGrid: entries must be > 0");
}

void MacTiming::validate() const {
    for (double v : {slot, sifs, difs, pd, ack, rts, cts, packet, header, report_slot, cycle})
        if (!(v >= 0) || !std::isfinite(v)) throw DomainError("MacTiming: negative or non-finite field");
    if (!(packet > 0)) throw DomainError("MacTiming: packet must be > 0");
    if (!(slot > 0)) throw DomainError("MacTiming: slot must be > 0");
}

}  // namespace cogmac
