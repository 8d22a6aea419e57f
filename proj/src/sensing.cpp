#include "cogmac/sensing.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <string>

namespace cogmac {

void SensorSpec::validate() const {
    if (!(snr > 0)) throw DomainError("SensorSpec: snr must be > 0");
    if (!(sample_rate > 0)) throw DomainError("SensorSpec: sample_rate must be > 0");
    if (!(sense_time > 0)) throw DomainError("SensorSpec: sense_time must be > 0");
}

double energy_pd(const SensorSpec& s) {
    s.validate();
    if (!s.threshold) throw ContractError("energy_pd: threshold missing");
    double eps = *s.threshold;
    return q((eps - s.snr - 1.0) * std::sqrt(s.sense_time * s.sample_rate / (2.0 * s.snr + 1.0)));
}

double energy_pf(const SensorSpec& s) {
    s.validate();
    if (!s.threshold) throw ContractError("energy_pf: threshold missing");
    return q((*s.threshold - 1.0) * std::sqrt(s.sense_time * s.sample_rate));
}

double threshold_for_pd(double pd_target, const SensorSpec& s) {
    s.validate();
    if (!(pd_target > 0 && pd_target < 1)) throw DomainError("threshold_for_pd: target must lie in (0,1)");
    return 1.0 + s.snr + q_inv(pd_target) * std::sqrt((2.0 * s.snr + 1.0) / (s.sense_time * s.sample_rate));
}

double pf_for_target_pd(double pd_target, const SensorSpec& s) {
    s.validate();
    if (!(pd_target > 0 && pd_target < 1)) throw DomainError("pf_for_target_pd: target must lie in (0,1)");
    return q(std::sqrt(2.0 * s.snr + 1.0) * q_inv(pd_target) + std::sqrt(s.sense_time * s.sample_rate) * s.snr);
}

void FusionRule::validate() const {
    if (b < 1 || a < 1 || a > b) throw ContractError("FusionRule: need 1 <= a <= b");
}

namespace {

double tail_enumerate(std::span<const double> p, int a) {
    const int b = static_cast<int>(p.size());
    double total = 0.0;
    // walk all 2^b outcome vectors; weight built incrementally by depth-first recursion
    auto rec = [&](auto&& self, int k, int busy, double w) -> void {
        if (w == 0.0) return;
        if (busy + (b - k) < a) return;
        if (k == b) {
            total += w;
            return;
        }
        self(self, k + 1, busy + 1, w * p[k]);
        self(self, k + 1, busy, w * (1.0 - p[k]));
    };
    rec(rec, 0, 0, 1.0);
    return total;
}

double tail_dp(std::span<const double> p, int a) {
    std::vector<double> dist(p.size() + 1, 0.0);
    dist[0] = 1.0;
    for (size_t k = 0; k < p.size(); ++k)
        for (size_t l = k + 2; l-- > 0;) {
            double stay = dist[l] * (1.0 - p[k]);
            if (l > 0) stay += dist[l - 1] * p[k];
            dist[l] = stay;
        }
    double s = 0.0;
    for (size_t l = a; l < dist.size(); ++l) s += dist[l];
    return s;
}

}  // namespace

double at_least_a(std::span<const double> p, int a) { return tail_dp(p, a); }

double fuse_a_out_of_b(std::span<const double> per_sensor, FusionRule rule) {
    rule.validate();
    if (static_cast<int>(per_sensor.size()) != rule.b) throw ContractError("fuse_a_out_of_b: size != b");
    for (double v : per_sensor) check_probability(v, "fuse_a_out_of_b");
    double r = rule.b <= 20 ? tail_enumerate(per_sensor, rule.a) : tail_dp(per_sensor, rule.a);
    return std::min(1.0, std::max(0.0, r));
}

double per_sensor_for_fused(double fused_target, FusionRule rule) {
    rule.validate();
    if (!(fused_target > 0 && fused_target < 1)) throw DomainError("per_sensor_for_fused: target outside (0,1)");
    if (rule.b == 1) return fused_target;
    std::vector<double> v(rule.b);
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        std::fill(v.begin(), v.end(), mid);
        if (fuse_a_out_of_b(v, rule) < fused_target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

ReportErrorMatrix::ReportErrorMatrix(int n_su, double fill) : n(n_su) {
    p_err.assign(static_cast<size_t>(n) * n, fill);
    for (int i = 0; i < n; ++i) at(i, i) = 0.0;
}

bool ReportErrorMatrix::all_zero() const {
    for (double v : p_err)
        if (v != 0.0) return false;
    return true;
}

void ReportErrorMatrix::validate() const {
    if (p_err.size() != static_cast<size_t>(n) * n) throw ContractError("ReportErrorMatrix: bad shape");
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            double v = at(i, k);
            if (i == k && v != 0.0) throw DomainError("ReportErrorMatrix: diagonal must be 0");
            if (!(v >= 0.0 && v <= 0.5)) throw DomainError("ReportErrorMatrix: entries must lie in [0,0.5]");
        }
}

double apply_report_errors(double p_sender, double p_err) {
    check_probability(p_sender, "apply_report_errors.p_sender");
    check_probability(p_err, "apply_report_errors.p_err");
    return p_sender * (1.0 - p_err) + (1.0 - p_sender) * p_err;
}

double fuse_with_errors(int receiver, std::span<const int> sensors, std::span<const double> per_sensor,
                        const ReportErrorMatrix& errs, FusionRule rule) {
    if (sensors.size() != per_sensor.size()) throw ContractError("fuse_with_errors: sensors/probabilities mismatch");
    if (receiver < 0 || receiver >= errs.n) throw ContractError("fuse_with_errors: receiver out of range");
    std::vector<double> seen(per_sensor.size());
    for (size_t k = 0; k < sensors.size(); ++k) {
        int tx = sensors[k];
        if (tx < 0 || tx >= errs.n) throw ContractError("fuse_with_errors: sender out of range");
        seen[k] = tx == receiver ? per_sensor[k] : apply_report_errors(per_sensor[k], errs.at(receiver, tx));
    }
    return fuse_a_out_of_b(seen, rule);
}

void SelfInterference::validate() const {
    if (!(zeta >= 0)) throw DomainError("SelfInterference: zeta must be >= 0");
    if (!(xi >= 0 && xi <= 1)) throw DomainError("SelfInterference: xi must lie in [0,1]");
}

Power self_interference_power(Power p, const SelfInterference& si) {
    si.validate();
    if (!(p.linear >= 0)) throw DomainError("self_interference_power: negative power");
    if (si.zeta == 0.0) return Power{0.0};
    return Power{si.zeta * std::pow(p.linear, si.xi)};
}

double fd_pf00(double eps, double t_s, double f_s, Power p_sen, const SelfInterference& si) {
    if (!(t_s > 0)) throw DomainError("fd_pf00: t_s must be > 0");
    double noise = 1.0 + self_interference_power(p_sen, si).linear;
    return q((eps / noise - 1.0) * std::sqrt(f_s * t_s));
}

double fd_pd01(double eps, double t_s, double t_change, double f_s, Power p_sen, Power p_pu,
               const SelfInterference& si) {
    if (!(t_s > 0)) throw DomainError("fd_pd01: t_s must be > 0");
    if (!(t_change >= 0 && t_change <= t_s)) throw DomainError("fd_pd01: t_change outside [0, t_s]");
    double noise = 1.0 + self_interference_power(p_sen, si).linear;
    double g = p_pu.linear / noise;
    double w = (t_s - t_change) / t_s;
    double num = (eps / noise - w * g - 1.0) * std::sqrt(f_s * t_s);
    double den = std::sqrt(w * (g + 1.0) * (g + 1.0) + t_change / t_s);
    return q(num / den);
}

double fd_avg_pd(double eps, double t_s, const PuChannelStats& stats, double f_s, Power p_sen, Power p_pu,
                 const SelfInterference& si) {
    if (!stats.mean_idle || !(*stats.mean_idle > 0)) throw DomainError("fd_avg_pd: mean_idle required");
    if (!(t_s > 0)) throw DomainError("fd_avg_pd: t_s must be > 0");
    const double tau = *stats.mean_idle;
    const double norm = tau * -std::expm1(-t_s / tau);
    // integrate over u = t / T_S: the error estimate degrades badly on microsecond-wide intervals
    auto f = [&](double u) {
        const double t = std::min(u, 1.0) * t_s;
        return fd_pd01(eps, t_s, t, f_s, p_sen, p_pu, si) * std::exp(-t / tau) * t_s / norm;
    };
    double err = 0;
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 15, 1e-10, &err);
    if (!std::isfinite(v) || err > 1e-6) throw NumericError("fd_avg_pd: quadrature did not converge on [0, T_S]");
    return std::min(1.0, std::max(0.0, v));
}

double fd_threshold_for_target(double pd_target, double t_s, const PuChannelStats& stats, double f_s,
                               Power p_sen, Power p_pu, const SelfInterference& si) {
    if (!(pd_target > 0 && pd_target < 1)) throw DomainError("fd_threshold_for_target: target outside (0,1)");
    double noise = 1.0 + self_interference_power(p_sen, si).linear;
    double g = p_pu.linear / noise;
    double lo = 1e-3, hi = 1.0 + g + 20.0 / std::sqrt(f_s * t_s);
    auto h = [&](double x) { return fd_avg_pd(x * noise, t_s, stats, f_s, p_sen, p_pu, si) - pd_target; };
    double hlo = h(lo), hhi = h(hi);
    if (!(hlo > 0 && hhi < 0))
        throw NumericError("fd_threshold_for_target: no sign change in bracket [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "], residuals " + std::to_string(hlo) + " / " + std::to_string(hhi));
    while (hi - lo > 1e-12 * hi) {
        double mid = 0.5 * (lo + hi);
        if (h(mid) > 0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi) * noise;
}

double fd_pf_for_target(double pd_target, double t_s, const PuChannelStats& stats, double f_s, Power p_sen,
                        Power p_pu, const SelfInterference& si) {
    double eps = fd_threshold_for_target(pd_target, t_s, stats, f_s, p_sen, p_pu, si);
    return fd_pf00(eps, t_s, f_s, p_sen, si);
}

}  // namespace cogmac
