#include "cogmac/sdcss.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "cogmac/csma.hpp"
#include "cogmac/search.hpp"

namespace cogmac {

// ---------------------------------------------------------------- SensingSets

SensingSets::SensingSets(int n_su, int n_ch) {
    if (n_su < 1 || n_ch < 1) throw DomainError("SensingSets: n_su and n_ch must be >= 1");
    per_su_.assign(n_su, {});
    per_channel_.assign(n_ch, {});
    a.assign(n_ch, 0);
}

SensingSets SensingSets::from_code(int n_su, int n_ch, std::uint64_t code) {
    SensingSets s(n_su, n_ch);
    for (int i = 0; i < n_su; ++i)
        for (int j = 0; j < n_ch; ++j)
            if (code >> (i * n_ch + j) & 1u) s.add(i, j);
    return s;
}

void SensingSets::add(int su, int ch) {
    if (su < 0 || su >= n_su() || ch < 0 || ch >= n_ch()) throw ContractError("SensingSets::add: index out of range");
    if (has(su, ch)) return;
    auto& r = per_su_[su];
    r.insert(std::lower_bound(r.begin(), r.end(), ch), ch);
    auto& c = per_channel_[ch];
    c.insert(std::lower_bound(c.begin(), c.end(), su), su);
    if (a[ch] == 0) a[ch] = 1;
}

void SensingSets::remove(int su, int ch) {
    if (!has(su, ch)) return;
    auto& r = per_su_[su];
    r.erase(std::find(r.begin(), r.end(), ch));
    auto& c = per_channel_[ch];
    c.erase(std::find(c.begin(), c.end(), su));
    a[ch] = std::min(a[ch], b(ch));
}

bool SensingSets::has(int su, int ch) const {
    const auto& r = per_su_[su];
    return std::binary_search(r.begin(), r.end(), ch);
}

int SensingSets::pairs() const {
    int n = 0;
    for (const auto& r : per_su_) n += static_cast<int>(r.size());
    return n;
}

std::uint64_t SensingSets::code() const {
    if (n_su() * n_ch() > 64) throw ContractError("SensingSets::code: more than 64 pairs");
    std::uint64_t c = 0;
    for (int i = 0; i < n_su(); ++i)
        for (int j : per_su_[i]) c |= std::uint64_t{1} << (i * n_ch() + j);
    return c;
}

void SensingSets::validate() const {
    if (per_su_.empty() || per_channel_.empty()) throw ContractError("SensingSets: empty");
    if (static_cast<int>(a.size()) != n_ch()) throw ContractError("SensingSets: a must have one entry per channel");
    for (int j = 0; j < n_ch(); ++j) {
        if (b(j) == 0 && a[j] != 0) throw DomainError("SensingSets: a_j must be 0 on an unsensed channel");
        if (b(j) > 0 && (a[j] < 1 || a[j] > b(j))) throw DomainError("SensingSets: need 1 <= a_j <= b_j");
        for (int i : per_channel_[j])
            if (!has(i, j)) throw ContractError("SensingSets: per-SU and per-channel views disagree");
    }
}

// ---------------------------------------------------------------- params

double SdcssParams::total_sensing_time() const {
    double t = 0;
    for (const auto& row : tau) t = std::max(t, std::accumulate(row.begin(), row.end(), 0.0));
    return t;
}

void SdcssParams::validate(const SensingSets& sets) const {
    timing.validate();
    snr.validate();
    sets.validate();
    if (sets.n_su() != n_su() || sets.n_ch() != n_ch()) throw ContractError("SdcssParams: sets do not match the SNR grid");
    if (static_cast<int>(tau.size()) != n_su()) throw ContractError("SdcssParams: tau needs one row per SU");
    for (int i = 0; i < n_su(); ++i) {
        if (static_cast<int>(tau[i].size()) != n_ch()) throw ContractError("SdcssParams: tau row has the wrong width");
        for (int j = 0; j < n_ch(); ++j) {
            double t = tau[i][j];
            if (sets.has(i, j) ? !(t > 0) : t != 0.0)
                throw DomainError("SdcssParams: tau must be > 0 on sensed pairs and 0 elsewhere");
        }
    }
    if (!(p > 0 && p <= 1)) throw DomainError("SdcssParams: p must lie in (0, 1]");
    if (static_cast<int>(pd_targets.size()) != n_ch() || static_cast<int>(pu.size()) != n_ch())
        throw ContractError("SdcssParams: pd_targets and pu need one entry per channel");
    for (double v : pd_targets)
        if (!(v > 0 && v < 1)) throw DomainError("SdcssParams: detection targets must lie in (0,1)");
    for (const auto& s : pu) s.validate();
    if (!(timing.cycle > 0)) throw DomainError("SdcssParams: cycle must be > 0");
    if (!(f_s > 0)) throw DomainError("SdcssParams: f_s must be > 0");
}

MacTiming sdcss_default_timing() {
    MacTiming t;
    t.slot = 20e-6;
    t.packet = 450 * t.slot;
    t.pd = 1e-6;
    t.sifs = 2 * t.slot;
    t.difs = 10 * t.slot;
    t.ack = t.cts = t.rts = 20 * t.slot;
    t.report_slot = 80e-6;
    t.cycle = 100e-3;
    return t;
}

// ---------------------------------------------------------------- time model

namespace {

// seconds of contention before one success; +inf when nobody can ever win
double contention_time(double p, int n, const MacTiming& t) {
    if (p >= 1.0) return n == 1 ? t.difs + t.rts + t.cts + 2 * t.pd : std::numeric_limits<double>::infinity();
    return ppersist_contention_overhead(p, n, t);
}

// floor((T - tau - T_R) / (T_cont(n) + T_S)) * T_S / T for n = 1..N, and the binomial
// averages g[k] = E[T(n) 1(n>0)], n ~ Bin(N, 1/k)
struct TimeModel {
    int n_su = 0, n_ch = 0;
    double cycle = 0, t_r = 0, t_s = 0;
    std::vector<double> denom;              // index n
    std::vector<std::vector<double>> w;     // w[k][n]
    std::vector<double> tn, g;

    TimeModel(int n_su_, int n_ch_, const MacTiming& t) : n_su(n_su_), n_ch(n_ch_) {
        cycle = t.cycle;
        t_r = n_su * t.report_slot;
        t_s = ppersist_data_time(t);
        denom.assign(n_su + 1, 0.0);
        tn.assign(n_su + 1, 0.0);
        g.assign(n_ch + 1, 0.0);
        w.assign(n_ch + 1, std::vector<double>(n_su + 1, 0.0));
        for (int k = 1; k <= n_ch; ++k) {
            double q1 = 1.0 / k;
            for (int n = 0; n <= n_su; ++n) {
                double lc = std::lgamma(n_su + 1.0) - std::lgamma(n + 1.0) - std::lgamma(n_su - n + 1.0);
                double v = std::exp(lc);
                v *= std::pow(q1, n) * std::pow(1.0 - q1, n_su - n);
                w[k][n] = v;
            }
        }
    }

    void set_p(double p, const MacTiming& t) {
        for (int n = 1; n <= n_su; ++n) denom[n] = contention_time(p, n, t) + t_s;
    }

    double cond(int n, double tau_total) const {
        double room = cycle - tau_total - t_r;
        if (room <= 0 || !std::isfinite(denom[n])) return 0.0;
        return std::floor(room / denom[n] + 1e-12) * t_s / cycle;
    }

    void update(double tau_total) {
        for (int n = 1; n <= n_su; ++n) tn[n] = cond(n, tau_total);
        for (int k = 1; k <= n_ch; ++k) {
            double s = 0;
            for (int n = 1; n <= n_su; ++n) s += w[k][n] * tn[n];
            g[k] = s;
        }
    }
};

// sum over (k1 sensed-idle-and-idle, k2 misdetected) of Pr * k1/M * g[k1+k2]
double nt_from_channels(const std::vector<double>& ok, const std::vector<double>& miss, const std::vector<double>& g,
                        std::vector<double>& dist) {
    const int m = static_cast<int>(ok.size());
    const int d = m + 1;
    dist.assign(static_cast<size_t>(d) * d, 0.0);
    dist[0] = 1.0;
    for (int j = 0; j < m; ++j) {
        const double none = 1.0 - ok[j] - miss[j];
        for (int k1 = j; k1 >= 0; --k1)
            for (int k2 = j - k1; k2 >= 0; --k2) {
                double v = dist[k1 * d + k2];
                if (v == 0.0) continue;
                dist[k1 * d + k2] = v * none;
                dist[(k1 + 1) * d + k2] += v * ok[j];
                dist[k1 * d + k2 + 1] += v * miss[j];
            }
    }
    double nt = 0;
    for (int k1 = 1; k1 <= m; ++k1)
        for (int k2 = 0; k1 + k2 <= m; ++k2) nt += dist[k1 * d + k2] * k1 * g[k1 + k2];
    return nt / m;
}

double sensor_pf(double qinv_pd, double snr, double tau, double f_s) {
    return q(std::sqrt(2.0 * snr + 1.0) * qinv_pd + std::sqrt(tau * f_s) * snr);
}

double fused_equal(double per_sensor, int a, int b) {
    std::vector<double> v(b, per_sensor);
    return at_least_a(v, a);
}

}  // namespace

double channel_cond_throughput(int n, const SdcssParams& params) {
    if (n < 1) throw DomainError("channel_cond_throughput: n must be >= 1");
    params.timing.validate();
    if (!(params.p > 0 && params.p <= 1)) throw DomainError("channel_cond_throughput: p must lie in (0, 1]");
    if (!(params.timing.cycle > 0)) throw DomainError("channel_cond_throughput: cycle must be > 0");
    TimeModel tm(std::max(n, params.n_su()), 1, params.timing);
    tm.t_r = params.reporting_time();
    tm.set_p(params.p, params.timing);
    return tm.cond(n, params.total_sensing_time());
}

// ---------------------------------------------------------------- access vectors

std::vector<AccessVector> access_vector_pmf_ne(int k_e, int n_su) {
    if (k_e < 1) throw DomainError("access_vector_pmf_ne: k_e must be >= 1");
    if (n_su < 0) throw DomainError("access_vector_pmf_ne: negative SU count");
    std::vector<AccessVector> out;
    std::vector<int> cur(k_e, 0);
    const double log_share = -n_su * std::log(static_cast<double>(k_e));
    auto rec = [&](auto&& self, int j, int left, double log_coef) -> void {
        if (j == k_e - 1) {
            cur[j] = left;
            double lc = log_coef - std::lgamma(left + 1.0);
            out.push_back({cur, std::exp(lc + log_share)});
            return;
        }
        for (int v = left; v >= 0; --v) {
            cur[j] = v;
            self(self, j + 1, left - v, log_coef - std::lgamma(v + 1.0));
        }
    };
    rec(rec, 0, n_su, std::lgamma(n_su + 1.0));
    return out;
}

std::vector<AccessVector> access_vector_pmf_re(const std::vector<std::vector<int>>& avail, int n_ch) {
    if (n_ch < 1) throw DomainError("access_vector_pmf_re: n_ch must be >= 1");
    const int n = static_cast<int>(avail.size());
    if (n > 16) throw ContractError("access_vector_pmf_re: at most 16 SUs");
    // Psi_j^a: SUs that see channel j as available
    std::vector<unsigned> psi(n_ch, 0u);
    unsigned active = 0;
    double weight = 1.0;
    for (int i = 0; i < n; ++i) {
        for (int j : avail[i]) {
            if (j < 0 || j >= n_ch) throw ContractError("access_vector_pmf_re: channel out of range");
            psi[j] |= 1u << i;
        }
        if (!avail[i].empty()) {
            active |= 1u << i;
            weight /= static_cast<double>(avail[i].size());
        }
    }
    std::map<std::vector<int>, double> ways;
    std::vector<int> cur(n_ch, 0);
    // channel by channel: pick which of the still-unplaced eligible SUs take channel j
    auto rec = [&](auto&& self, int j, unsigned placed, double count) -> void {
        if (j == n_ch) {
            if (placed == active) ways[cur] += count;
            return;
        }
        unsigned eligible = psi[j] & ~placed;
        // every subset of the eligible SUs, including the empty one
        for (unsigned sub = eligible;; sub = (sub - 1) & eligible) {
            cur[j] = std::popcount(sub);
            self(self, j + 1, placed | sub, count);
            if (sub == 0) break;
        }
        cur[j] = 0;
    };
    rec(rec, 0, 0u, 1.0);
    std::vector<AccessVector> out;
    for (const auto& [vec, c] : ways) out.push_back({vec, c * weight});
    return out;
}

// ---------------------------------------------------------------- evaluators

ChannelDetection channel_detection(int ch, const SensingSets& sets, const SdcssParams& params) {
    ChannelDetection d;
    const auto& sensors = sets.of_channel(ch);
    const int b = static_cast<int>(sensors.size());
    if (b == 0) {
        // never sensed: treated as always busy
        d.pd = d.pf = 1.0;
        return d;
    }
    FusionRule rule{sets.a[ch], b};
    d.pd_sensor = per_sensor_for_fused(params.pd_targets[ch], rule);
    const double qi = q_inv(d.pd_sensor);
    for (int i : sensors) d.pf_sensor.push_back(sensor_pf(qi, params.snr.at(i, ch), params.tau[i][ch], params.f_s));
    d.pd = fused_equal(d.pd_sensor, rule.a, b);
    d.pf = at_least_a(d.pf_sensor, rule.a);
    return d;
}

double sdcss_nt_no_err(const SensingSets& sets, const SdcssParams& params) {
    params.validate(sets);
    const int m = params.n_ch();
    TimeModel tm(params.n_su(), m, params.timing);
    tm.set_p(params.p, params.timing);
    tm.update(params.total_sensing_time());
    std::vector<double> ok(m), miss(m), dist;
    for (int j = 0; j < m; ++j) {
        ChannelDetection d = channel_detection(j, sets, params);
        ok[j] = params.pu[j].p_idle * (1.0 - d.pf);
        miss[j] = params.pu[j].p_busy * (1.0 - d.pd);
    }
    return nt_from_channels(ok, miss, tm.g, dist);
}

double sdcss_nt_with_err(const SensingSets& sets, const SdcssParams& params, const ReportErrorMatrix& errs) {
    params.validate(sets);
    errs.validate();
    const int n = params.n_su(), m = params.n_ch();
    if (errs.n != n) throw ContractError("sdcss_nt_with_err: error matrix size differs from the SU count");
    if (n > kReportErrMaxSu || m > kReportErrMaxCh)
        throw ContractError("sdcss_nt_with_err: exact enumeration limited to N <= 4 and M <= 3; use sim_sdcss");
    TimeModel tm(n, m, params.timing);
    tm.set_p(params.p, params.timing);
    tm.update(params.total_sensing_time());

    std::vector<ChannelDetection> det;
    for (int j = 0; j < m; ++j) det.push_back(channel_detection(j, sets, params));

    // raw busy reports of every sensor, all channels flattened
    std::vector<int> off(m + 1, 0);
    for (int j = 0; j < m; ++j) off[j + 1] = off[j] + sets.b(j);
    const int bits = off[m];

    std::vector<double> avail(static_cast<size_t>(n) * m), pi(static_cast<size_t>(n) * m), seen, col(n);
    double total = 0;
    for (unsigned state = 0; state < (1u << m); ++state) {  // bit j set: channel j idle
        double p_state = 1.0;
        for (int j = 0; j < m; ++j) p_state *= (state >> j & 1u) ? params.pu[j].p_idle : params.pu[j].p_busy;
        if (p_state == 0.0) continue;
        for (unsigned long raw = 0; raw < (1ul << bits); ++raw) {  // bit set: sensor reports busy
            double p_raw = p_state;
            for (int j = 0; j < m && p_raw > 0; ++j) {
                const bool idle = state >> j & 1u;
                for (int k = 0; k < sets.b(j); ++k) {
                    double busy = idle ? det[j].pf_sensor[k] : det[j].pd_sensor;
                    p_raw *= (raw >> (off[j] + k) & 1ul) ? busy : 1.0 - busy;
                }
            }
            if (p_raw == 0.0) continue;
            // probability each receiver's fused decision says "available"
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    const auto& s = sets.of_channel(j);
                    if (s.empty()) {
                        avail[i * m + j] = 0.0;
                        continue;
                    }
                    seen.assign(s.size(), 0.0);
                    for (size_t k = 0; k < s.size(); ++k) {
                        bool busy = raw >> (off[j] + k) & 1ul;
                        double e = s[k] == i ? 0.0 : errs.at(i, s[k]);
                        seen[k] = busy ? 1.0 - e : e;
                    }
                    avail[i * m + j] = 1.0 - at_least_a(seen, sets.a[j]);
                }
            // each SU's choice marginal: uniform over its available set
            std::fill(pi.begin(), pi.end(), 0.0);
            for (int i = 0; i < n; ++i)
                for (unsigned sub = 1; sub < (1u << m); ++sub) {
                    double pr = 1.0;
                    for (int j = 0; j < m; ++j) pr *= (sub >> j & 1u) ? avail[i * m + j] : 1.0 - avail[i * m + j];
                    if (pr == 0.0) continue;
                    double share = pr / std::popcount(sub);
                    for (int j = 0; j < m; ++j)
                        if (sub >> j & 1u) pi[i * m + j] += share;
                }
            double cond = 0;
            for (int j = 0; j < m; ++j) {
                if (!(state >> j & 1u)) continue;
                // contender count on j: independent Bernoulli(pi_ij)
                std::vector<double> pmf(n + 1, 0.0);
                pmf[0] = 1.0;
                for (int i = 0; i < n; ++i) {
                    double x = pi[i * m + j];
                    for (int l = i + 1; l >= 0; --l) pmf[l] = pmf[l] * (1.0 - x) + (l > 0 ? pmf[l - 1] * x : 0.0);
                }
                for (int c = 1; c <= n; ++c) cond += pmf[c] * tm.tn[c];
            }
            total += p_raw * cond / m;
        }
    }
    return total;
}

// ---------------------------------------------------------------- scenario

SdcssParams SdcssScenario::params(const std::vector<std::vector<double>>& tau, double p) const {
    SdcssParams pr;
    pr.tau = tau;
    pr.p = p;
    pr.pd_targets = pd_targets;
    pr.timing = timing;
    pr.snr = snr;
    pr.pu = pu;
    pr.f_s = f_s;
    return pr;
}

void SdcssScenario::validate() const {
    if (n_su < 1 || n_ch < 1) throw DomainError("SdcssScenario: n_su and n_ch must be >= 1");
    snr.validate();
    if (snr.n_su != n_su || snr.n_ch != n_ch) throw ContractError("SdcssScenario: SNR grid shape mismatch");
    if (static_cast<int>(pu.size()) != n_ch || static_cast<int>(pd_targets.size()) != n_ch)
        throw ContractError("SdcssScenario: pu and pd_targets need one entry per channel");
    for (const auto& s : pu) s.validate();
    for (double v : pd_targets)
        if (!(v > 0 && v < 1)) throw DomainError("SdcssScenario: detection targets must lie in (0,1)");
    timing.validate();
    if (!(timing.cycle > 0)) throw DomainError("SdcssScenario: cycle must be > 0");
    if (!(f_s > 0)) throw DomainError("SdcssScenario: f_s must be > 0");
}

SdcssScenario sdcss_two_level_scenario(int n_su, int n_ch, const std::vector<std::pair<int, int>>& strong,
                                       double snr_hi_db, double snr_lo_db, double p_idle, double pd_target) {
    SdcssScenario sc;
    sc.n_su = n_su;
    sc.n_ch = n_ch;
    sc.snr = SnrGrid(n_su, n_ch, db_to_linear(snr_lo_db));
    for (auto [i, j] : strong) {
        if (i < 0 || i >= n_su || j < 0 || j >= n_ch) throw DomainError("sdcss_two_level_scenario: pair out of range");
        sc.snr.at(i, j) = db_to_linear(snr_hi_db);
    }
    sc.pu.assign(n_ch, PuChannelStats::from_idle(p_idle));
    sc.pd_targets.assign(n_ch, pd_target);
    sc.timing = sdcss_default_timing();
    return sc;
}

// ---------------------------------------------------------------- optimizer

std::vector<double> SenseAccessOptions::resolved_p_grid() const {
    if (!p_grid.empty()) {
        for (double p : p_grid)
            if (!(p > 0 && p <= 1)) throw DomainError("SenseAccessOptions: p grid values must lie in (0, 1]");
        return p_grid;
    }
    std::vector<double> g(60);
    for (int k = 0; k < 60; ++k) g[k] = std::exp(std::log(1e-4) + (std::log(0.5) - std::log(1e-4)) * k / 59.0);
    return g;
}

namespace {

// per-sensor P_d and fused P_d for (target, a, b), shared by all evaluations of one run
struct RuleCache {
    std::map<std::tuple<double, int, int>, std::pair<double, double>> memo;
    std::pair<double, double> get(double target, int a, int b) {
        auto key = std::make_tuple(target, a, b);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        double ps = per_sensor_for_fused(target, FusionRule{a, b});
        auto v = std::make_pair(q_inv(ps), fused_equal(ps, a, b));
        memo.emplace(key, v);
        return v;
    }
};

class Workspace {
public:
    Workspace(const SensingSets& sets, const SdcssScenario& sc, bool a_inner, RuleCache& rc)
        : sets_(sets), sc_(sc), a_inner_(a_inner), tm_(sc.n_su, sc.n_ch, sc.timing) {
        const int m = sc.n_ch;
        ok_.assign(m, 0.0);
        miss_.assign(m, 0.0);
        qinv_.assign(m, {});
        pdf_.assign(m, {});
        for (int j = 0; j < m; ++j) {
            int b = sets.b(j);
            qinv_[j].assign(b + 1, 0.0);
            pdf_[j].assign(b + 1, 0.0);
            for (int a = 1; a <= b; ++a) {
                auto [qi, pd] = rc.get(sc.pd_targets[j], a, b);
                qinv_[j][a] = qi;
                pdf_[j][a] = pd;
            }
        }
        a_ = sets.a;
        row_.assign(sc.n_su, 0.0);
        spf_.assign(m, {});
        for (int j = 0; j < m; ++j) spf_[j].assign(static_cast<size_t>(sets.b(j) + 1) * sets.b(j), 0.0);
    }

    void set_a(const std::vector<int>& a) { a_ = a; }
    const std::vector<int>& a() const { return a_; }
    void set_p(double p) { tm_.set_p(p, sc_.timing); }

    void set_tau(const std::vector<std::vector<double>>& tau) {
        tau_ = tau;
        for (int i = 0; i < sc_.n_su; ++i) row_[i] = std::accumulate(tau_[i].begin(), tau_[i].end(), 0.0);
        for (int j = 0; j < sc_.n_ch; ++j) {
            for (int i : sets_.of_channel(j)) refresh_sensor(i, j);
            refresh_fused(j);
        }
    }
    const std::vector<std::vector<double>>& tau() const { return tau_; }

    void set_pair(int i, int j, double t) {
        row_[i] += t - tau_[i][j];
        tau_[i][j] = t;
        refresh_sensor(i, j);
        refresh_fused(j);
    }

    double eval() {
        double tt = *std::max_element(row_.begin(), row_.end());
        tm_.update(tt);
        return nt_from_channels(ok_, miss_, tm_.g, dist_);
    }

private:
    bool active(int j, int a) const { return a_inner_ || a == a_[j]; }

    // per-sensor P_f of SU i on channel j for every rule in use
    void refresh_sensor(int i, int j) {
        const auto& s = sets_.of_channel(j);
        const int b = static_cast<int>(s.size());
        const int k = static_cast<int>(std::lower_bound(s.begin(), s.end(), i) - s.begin());
        const double snr = sc_.snr.at(i, j), t = tau_[i][j];
        for (int a = 1; a <= b; ++a)
            if (active(j, a)) spf_[j][a * b + k] = sensor_pf(qinv_[j][a], snr, t, sc_.f_s);
    }

    void refresh_fused(int j) {
        const int b = sets_.b(j);
        if (b == 0) {
            ok_[j] = miss_[j] = 0.0;
            return;
        }
        int best_a = a_[j];
        double pf = 2.0;
        for (int a = 1; a <= b; ++a) {
            if (!active(j, a)) continue;
            // every a meets the same detection target, so with a_inner the smallest fused P_f wins
            double v = tail_small(&spf_[j][a * b], b, a);
            if (v < pf) {
                pf = v;
                best_a = a;
            }
        }
        a_[j] = best_a;
        ok_[j] = sc_.pu[j].p_idle * (1.0 - pf);
        miss_[j] = sc_.pu[j].p_busy * (1.0 - pdf_[j][best_a]);
    }

    static double tail_small(const double* p, int b, int a) {
        if (b > 32) return at_least_a(std::span<const double>(p, b), a);
        double d[33] = {1.0};
        for (int k = 0; k < b; ++k)
            for (int l = k + 1; l >= 0; --l) d[l] = d[l] * (1.0 - p[k]) + (l > 0 ? d[l - 1] * p[k] : 0.0);
        double s = 0;
        for (int l = a; l <= b; ++l) s += d[l];
        return s;
    }

    const SensingSets& sets_;
    const SdcssScenario& sc_;
    bool a_inner_;
    TimeModel tm_;
    std::vector<double> ok_, miss_, dist_, row_;
    std::vector<std::vector<double>> qinv_, pdf_, tau_, spf_;
    std::vector<int> a_;
};

// one 1-D maximization; the current point is kept unless strictly beaten
template <class Set>
double line_max(Workspace& ws, double cur, double lo, double hi, double keep, Set&& set, const SenseAccessOptions& opt,
                int points) {
    if (!(hi > lo)) return cur;
    auto f = [&](double x) {
        set(x);
        return ws.eval();
    };
    Maximum mx = scan_then_golden(f, lo, hi, std::max(2, points - 1), opt.golden_tol);
    set(mx.f > cur ? mx.x : keep);
    return mx.f > cur ? ws.eval() : cur;
}

// block coordinate ascent. per SU: each tau_ij alone, then time moved between two of its
// channels at a fixed sum; after all SUs, one common rescaling of every tau. The floor in the
// cycle budget parks the SUs on a plateau edge where single-coordinate moves stall
double descend(Workspace& ws, const SensingSets& sets, const SdcssScenario& sc, const SenseAccessOptions& opt) {
    double cur = ws.eval();
    const double hi_tau = sc.timing.cycle - sc.n_su * sc.timing.report_slot;
    if (!(hi_tau > opt.tau_min)) return cur;
    const double lo = std::log(opt.tau_min), hi = std::log(hi_tau);
    const int split_points = std::max(3, opt.scan_points / 2);
    for (int round = 0; round < opt.max_rounds; ++round) {
        const double start = cur;
        for (int i = 0; i < sc.n_su; ++i) {
            const auto& mine = sets.of_su(i);
            for (int j : mine) {
                const double keep = std::log(ws.tau()[i][j]);
                cur = line_max(ws, cur, lo, hi, keep, [&](double x) { ws.set_pair(i, j, std::exp(x)); }, opt,
                               opt.scan_points);
            }
            for (size_t u = 0; u < mine.size(); ++u)
                for (size_t v = u + 1; v < mine.size(); ++v) {
                    const int j = mine[u], k = mine[v];
                    const double sum = ws.tau()[i][j] + ws.tau()[i][k];
                    const double eps = opt.tau_min / sum;
                    if (!(eps < 0.5)) continue;
                    const double keep = ws.tau()[i][j] / sum;
                    cur = line_max(ws, cur, eps, 1.0 - eps, keep,
                                   [&](double s) {
                                       ws.set_pair(i, j, s * sum);
                                       ws.set_pair(i, k, (1.0 - s) * sum);
                                   },
                                   opt, split_points);
                }
        }
        if (sets.pairs() > 1) {
            const auto base = ws.tau();
            double tmin = std::numeric_limits<double>::infinity(), rmax = 0;
            for (int i = 0; i < sc.n_su; ++i) {
                double r = 0;
                for (int j : sets.of_su(i)) {
                    tmin = std::min(tmin, base[i][j]);
                    r += base[i][j];
                }
                rmax = std::max(rmax, r);
            }
            const double slo = std::log(opt.tau_min / tmin), shi = std::log(hi_tau / rmax);
            auto scale = [&](double x) {
                const double f = std::exp(x);
                for (int i = 0; i < sc.n_su; ++i)
                    for (int j : sets.of_su(i)) ws.set_pair(i, j, base[i][j] * f);
            };
            cur = line_max(ws, cur, std::min(slo, 0.0), std::max(shi, 0.0), 0.0, scale, opt, opt.scan_points);
        }
        if (cur - start < opt.tol) break;
    }
    return cur;
}

std::vector<std::vector<int>> a_vectors(const SensingSets& sets, long cap) {
    const int m = sets.n_ch();
    long count = 1;
    for (int j = 0; j < m; ++j) {
        if (sets.b(j) > 0) count *= sets.b(j);
        if (count > cap) break;
    }
    std::vector<std::vector<int>> out;
    if (count <= cap) {
        std::vector<int> a(m, 0);
        for (int j = 0; j < m; ++j) a[j] = sets.b(j) > 0 ? 1 : 0;
        while (true) {
            out.push_back(a);
            int j = 0;
            for (; j < m; ++j) {
                if (sets.b(j) == 0) continue;
                if (a[j] < sets.b(j)) {
                    ++a[j];
                    break;
                }
                a[j] = 1;
            }
            if (j == m) break;
        }
        return out;
    }
    // OR, AND, majority applied to every channel
    for (int rule = 0; rule < 3; ++rule) {
        std::vector<int> a(m, 0);
        for (int j = 0; j < m; ++j) {
            int b = sets.b(j);
            if (b == 0) continue;
            a[j] = rule == 0 ? 1 : rule == 1 ? b : (b + 1) / 2;
        }
        if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    }
    return out;
}

}  // namespace

SdcssConfig optimize_sense_access(const SensingSets& sets_in, const SdcssScenario& sc, const SenseAccessOptions& opt,
                                  const std::vector<std::vector<double>>* tau_start) {
    sc.validate();
    sets_in.validate();
    if (sets_in.n_su() != sc.n_su || sets_in.n_ch() != sc.n_ch)
        throw ContractError("optimize_sense_access: sets do not match the scenario");
    if (!(opt.tau_min > 0) || !(opt.tau_init > 0)) throw DomainError("optimize_sense_access: tau bounds must be > 0");
    const std::vector<double> grid = opt.resolved_p_grid();

    std::vector<std::vector<double>> tau0(sc.n_su, std::vector<double>(sc.n_ch, 0.0));
    for (int i = 0; i < sc.n_su; ++i)
        for (int j : sets_in.of_su(i)) {
            double t = opt.tau_init;
            if (tau_start && (*tau_start)[i][j] > 0) t = (*tau_start)[i][j];
            tau0[i][j] = std::max(t, opt.tau_min);
        }

    std::vector<std::vector<int>> avecs = opt.a_inner ? std::vector<std::vector<int>>{sets_in.a} : a_vectors(sets_in, opt.a_cap);
    const int na = static_cast<int>(avecs.size()), np = static_cast<int>(grid.size());

    struct Cell {
        double nt = -1;
        std::vector<std::vector<double>> tau;
        std::vector<int> a;
    };
    std::vector<Cell> cells(static_cast<size_t>(na) * np);
    std::vector<RuleCache> caches(na);
    parallel_for(na, opt.jobs, [&](int ai) {
        Workspace ws(sets_in, sc, opt.a_inner, caches[ai]);
        ws.set_a(avecs[ai]);
        auto tau = tau0;
        for (int pi = 0; pi < np; ++pi) {
            ws.set_p(grid[pi]);
            ws.set_tau(tau);  // warm start from the previous p
            double nt = descend(ws, sets_in, sc, opt);
            tau = ws.tau();
            cells[static_cast<size_t>(ai) * np + pi] = {nt, tau, ws.a()};
        }
    });

    // p-major, then a-vector order; strict improvement keeps the earliest
    SdcssConfig best;
    best.nt = -1;
    for (int pi = 0; pi < np; ++pi)
        for (int ai = 0; ai < na; ++ai) {
            const Cell& c = cells[static_cast<size_t>(ai) * np + pi];
            if (c.nt > best.nt) {
                best.nt = c.nt;
                best.tau = c.tau;
                best.p = grid[pi];
                best.sets = sets_in;
                best.sets.a = c.a;
            }
        }
    if (!std::isfinite(best.nt)) throw NumericError("optimize_sense_access: non-finite throughput");
    return best;
}

// ---------------------------------------------------------------- Hungarian

std::vector<int> hungarian_min_cost(const std::vector<std::vector<double>>& cost) {
    const int n_su = static_cast<int>(cost.size());
    if (n_su == 0) throw ContractError("hungarian_min_cost: empty cost matrix");
    const int n_ch = static_cast<int>(cost[0].size());
    if (n_ch == 0) throw ContractError("hungarian_min_cost: no channels");
    double big = 1.0;
    for (const auto& r : cost) {
        if (static_cast<int>(r.size()) != n_ch) throw ContractError("hungarian_min_cost: ragged cost matrix");
        for (double v : r) {
            if (!std::isfinite(v)) throw DomainError("hungarian_min_cost: non-finite cost");
            big = std::max(big, std::fabs(v));
        }
    }
    // with more channels than SUs every SU is offered ceil(M/N) times
    const int copies = (n_ch + n_su - 1) / n_su;
    const int cols = n_su * copies;
    const int n = std::max(cols, n_ch);
    big *= 4.0 * n;
    // rows: channels (dummy rows beyond n_ch), columns: SU copies (dummy columns beyond cols)
    auto c = [&](int r, int k) -> double {
        if (r >= n_ch || k >= cols) return big;
        return cost[k % n_su][r];
    };
    // shortest augmenting path with potentials, 1-based
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int r = 1; r <= n; ++r) {
        p[0] = r;
        int k0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[k0] = 1;
            int r0 = p[k0], k1 = 0;
            double delta = inf;
            for (int k = 1; k <= n; ++k) {
                if (used[k]) continue;
                double cur = c(r0 - 1, k - 1) - u[r0] - v[k];
                if (cur < minv[k]) {
                    minv[k] = cur;
                    way[k] = k0;
                }
                if (minv[k] < delta) {
                    delta = minv[k];
                    k1 = k;
                }
            }
            for (int k = 0; k <= n; ++k) {
                if (used[k]) {
                    u[p[k]] += delta;
                    v[k] -= delta;
                } else {
                    minv[k] -= delta;
                }
            }
            k0 = k1;
        } while (p[k0] != 0);
        do {
            int k1 = way[k0];
            p[k0] = p[k1];
            k0 = k1;
        } while (k0);
    }
    std::vector<int> su_of(n_ch, -1);
    for (int k = 1; k <= n; ++k) {
        int r = p[k] - 1;
        if (r < n_ch && k - 1 < cols) su_of[r] = (k - 1) % n_su;
    }
    for (int x : su_of)
        if (x < 0) throw NumericError("hungarian_min_cost: a channel was left on a padding column");
    return su_of;
}

// ---------------------------------------------------------------- sensing-set search

GreedySetsResult greedy_sensing_sets(const SdcssScenario& sc, const SenseAccessOptions& opt, double delta_stop) {
    sc.validate();
    GreedySetsResult out;
    // seed: everybody senses everything, then one sensor per channel by least optimized sensing time
    SensingSets full(sc.n_su, sc.n_ch);
    for (int i = 0; i < sc.n_su; ++i)
        for (int j = 0; j < sc.n_ch; ++j) full.add(i, j);
    SdcssConfig all = optimize_sense_access(full, sc, opt);
    std::vector<int> owner = hungarian_min_cost(all.tau);
    SensingSets sets(sc.n_su, sc.n_ch);
    for (int j = 0; j < sc.n_ch; ++j) sets.add(owner[j], j);
    SdcssConfig cur = optimize_sense_access(sets, sc, opt);
    out.trace.push_back(cur.nt);

    while (true) {
        const double delta = delta_stop > 0 ? delta_stop : 1e-3 * cur.nt;
        SdcssConfig best_cand;
        double best_gain = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < sc.n_su; ++i)
            for (int j = 0; j < sc.n_ch; ++j) {
                if (cur.sets.has(i, j)) continue;
                SensingSets cand = cur.sets;
                cand.add(i, j);
                SdcssConfig r = optimize_sense_access(cand, sc, opt, &cur.tau);
                double gain = r.nt - cur.nt;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_cand = std::move(r);
                }
            }
        if (!(best_gain > delta)) break;
        cur = std::move(best_cand);
        out.trace.push_back(cur.nt);
    }
    out.best = cur;
    return out;
}

SdcssConfig brute_force_sensing_sets(const SdcssScenario& sc, const SenseAccessOptions& opt, int jobs) {
    sc.validate();
    const int pairs = sc.n_su * sc.n_ch;
    if (pairs > kBruteForceMaxPairs) throw ContractError("brute_force_sensing_sets: needs n_su * n_ch <= 16");
    const std::uint64_t total = std::uint64_t{1} << pairs;
    const int shards = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
    std::vector<SdcssConfig> best(shards);
    SenseAccessOptions inner = opt;
    inner.jobs = 1;
    parallel_for(shards, shards, [&](int s) {
        const std::uint64_t lo = total * s / shards, hi = total * (s + 1) / shards;
        best[s].nt = -1;
        for (std::uint64_t code = lo; code < hi; ++code) {
            SensingSets sets = SensingSets::from_code(sc.n_su, sc.n_ch, code);
            SdcssConfig r = optimize_sense_access(sets, sc, inner);
            if (r.nt > best[s].nt) best[s] = std::move(r);
        }
    });
    SdcssConfig out = best[0];
    for (int s = 1; s < shards; ++s)
        if (best[s].nt > out.nt) out = best[s];
    return out;
}

}  // namespace cogmac
