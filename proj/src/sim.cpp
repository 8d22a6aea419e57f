#include "cogmac/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace cogmac {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::mt19937_64 RngStreams::make(Stream purpose, std::uint32_t index) const {
    std::uint64_t s = seed_ ^ (static_cast<std::uint64_t>(purpose) << 56) ^ (static_cast<std::uint64_t>(index) << 20);
    std::uint64_t a = splitmix64(s), b = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                      static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

bool SimEstimate::agrees(double analytic, double rel) const {
    return std::fabs(analytic - mean) <= std::max(rel * std::fabs(analytic), half_ci95);
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& r) { return std::uniform_real_distribution<double>(0.0, 1.0)(r); }

bool bernoulli(Rng& r, double p) { return uniform(r) < p; }

// Welford accumulation of per-cycle samples
struct Moments {
    long n = 0;
    double mean = 0, m2 = 0;
    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    SimEstimate estimate(std::uint64_t seed) const {
        SimEstimate e;
        e.mean = mean;
        e.cycles = n;
        e.seed = seed;
        e.half_ci95 = n > 1 ? 1.959963984540054 * std::sqrt(m2 / (n - 1) / n) : 0.0;
        return e;
    }
};

void check_cycles(long cycles, const char* who) {
    if (cycles < kMinSimCycles)
        throw DomainError(std::string(who) + ": at least " + std::to_string(kMinSimCycles) + " cycles required");
}

// energy detector test statistic, Gaussian by the central limit theorem over tau*f_s samples,
// noise power 1. H0: mean 1, var 1/(tau f_s). H1: mean 1+snr, var (1+2 snr)/(tau f_s)
struct EnergyDetector {
    double thr = 0, sd0 = 0, sd1 = 0, snr = 0;

    // threshold meeting per-sensor detection probability pd exactly
    EnergyDetector(double snr_, double tau, double f_s, double pd) : snr(snr_) {
        double n = tau * f_s;
        sd0 = 1.0 / std::sqrt(n);
        sd1 = std::sqrt(1.0 + 2.0 * snr) / std::sqrt(n);
        thr = 1.0 + snr + q_inv(pd) * sd1;
    }
    // true: reports busy
    bool busy(Rng& r, bool pu_active) const {
        std::normal_distribution<double> z(0.0, 1.0);
        double stat = pu_active ? 1.0 + snr + sd1 * z(r) : 1.0 + sd0 * z(r);
        return stat > thr;
    }
};

// ------------------------------------------------------------------ PU process

class PuProcess {
public:
    PuProcess(const PuChannelStats& s, Rng rng) : rng_(std::move(rng)) {
        if (!s.mean_idle || !s.mean_active) throw DomainError("PU trace: mean idle and active times required");
        if (!(*s.mean_idle > 0 && *s.mean_active > 0)) throw DomainError("PU trace: means must be > 0");
        mean_[0] = *s.mean_idle;
        mean_[1] = *s.mean_active;
        double p_active = *s.mean_active / (*s.mean_idle + *s.mean_active);
        active_ = bernoulli(rng_, p_active);
        end_ = draw(active_);
    }
    // current interval [start_, end_)
    double start() const { return start_; }
    double end() const { return end_; }
    bool active() const { return active_; }
    void advance() {
        start_ = end_;
        active_ = !active_;
        end_ = start_ + draw(active_);
    }
    // move forward until t lies in the current interval
    void seek(double t) {
        while (end_ <= t) advance();
    }

private:
    double draw(bool active) { return std::exponential_distribution<double>(1.0 / mean_[active ? 1 : 0])(rng_); }
    Rng rng_;
    double mean_[2] = {1, 1};
    bool active_ = false;
    double start_ = 0, end_ = 0;
};

}  // namespace

std::vector<PuInterval> gen_pu_trace(const PuChannelStats& stats, double horizon, std::uint64_t seed) {
    stats.validate();
    if (!(horizon > 0)) throw DomainError("gen_pu_trace: horizon must be > 0");
    PuProcess pu(stats, RngStreams(seed).make(Stream::pu, 0));
    std::vector<PuInterval> out;
    for (;;) {
        out.push_back({pu.start(), std::min(pu.end(), horizon), pu.active()});
        if (pu.end() >= horizon) break;
        pu.advance();
    }
    return out;
}

// ------------------------------------------------------------------ half-duplex MAC

SimEstimate sim_hdmac(const HdScenario& sc, double tau, BackoffConfig cfg, long cycles, std::uint64_t seed,
                      std::ostream* trace) {
    sc.validate();
    cfg.validate();
    check_cycles(cycles, "sim_hdmac");
    const MacTiming& t = sc.timing;
    if (!(tau > 0 && tau <= t.cycle)) throw DomainError("sim_hdmac: tau must lie in (0, T]");
    const int n = sc.n_su, m = sc.n_ch;

    // busy periods of one generic slot
    double t_succ, t_coll, payload_at;
    if (sc.handshake == Handshake::basic) {
        t_succ = t.header + t.packet + t.sifs + 2 * t.pd + t.ack + t.difs;
        t_coll = t.header + t.packet + t.difs + t.pd;
        payload_at = t.header;
    } else {
        t_succ = t.rts + t.sifs + t.pd + t.cts + t.sifs + t.header + t.packet + t.sifs + t.pd + t.ack + t.difs;
        t_coll = t.rts + t.difs + t.pd + t.header;
        payload_at = t.rts + t.cts + 2 * t.sifs + t.pd + t.header;
    }
    const double room = t.cycle - tau;

    RngStreams rs(seed);
    std::vector<Rng> pu_rng, sense_rng, bo_rng;
    std::vector<EnergyDetector> det;
    for (int i = 0; i < n; ++i) {
        pu_rng.push_back(rs.make(Stream::pu, i));
        sense_rng.push_back(rs.make(Stream::sensing, i));
        bo_rng.push_back(rs.make(Stream::backoff, i));
        det.emplace_back(sc.links[i].snr, tau, sc.f_s, sc.links[i].pd_target);
    }

    std::vector<int> l(n), stage(n), counter(n), cont;
    std::string states;
    auto draw_counter = [&](int i) {
        int wi = cfg.w0 << std::min(stage[i], 30);
        counter[i] = std::uniform_int_distribution<int>(0, wi - 1)(bo_rng[i]);
    };

    Moments acc;
    for (long c = 0; c < cycles; ++c) {
        cont.clear();
        if (trace) states.clear();
        for (int i = 0; i < n; ++i) {
            l[i] = 0;
            for (int j = 0; j < m; ++j) {
                bool active = !bernoulli(pu_rng[i], sc.links[i].pu.p_idle);
                bool idle_seen = !det[i].busy(sense_rng[i], active);
                l[i] += idle_seen;
                if (trace) states.push_back(active ? '1' : '0');
            }
            if (l[i] > 0) {
                cont.push_back(i);
                stage[i] = 0;
                draw_counter(i);
            }
        }
        double now = 0.0, goodput = 0.0;
        int successes = 0;
        while (!cont.empty()) {
            int k = counter[cont[0]];
            for (int i : cont) k = std::min(k, counter[i]);
            now += k * t.slot;
            if (now >= room) break;
            int tx = -1, ntx = 0;
            for (int i : cont) {
                counter[i] -= k;
                if (counter[i] == 0) tx = i, ++ntx;
            }
            if (ntx == 1) {
                double got = std::clamp(room - (now + payload_at), 0.0, t.packet);
                goodput += got * l[tx];
                ++successes;
                now += t_succ;
            } else {
                now += t_coll;
            }
            // one backoff step per generic slot for everybody else
            for (int i : cont) {
                if (counter[i] == 0) {
                    stage[i] = ntx == 1 ? 0 : std::min(stage[i] + 1, cfg.m);
                    draw_counter(i);
                } else {
                    --counter[i];
                }
            }
            if (now >= room) break;
        }
        double x = goodput / (m * t.cycle);
        acc.add(x);
        if (trace) *trace << c << '\t' << states << '\t' << cont.size() << '\t' << successes << '\t' << x << '\n';
    }
    return acc.estimate(seed);
}

// ------------------------------------------------------------------ channel assignment MAC

AssignSimResult sim_assign(const AssignmentState& st, const AvailabilityMatrix& a, const SensingErrorMatrix* err, int w,
                           const AssignTiming& timing, long cycles, std::uint64_t seed, std::ostream* trace) {
    a.validate();
    st.validate();
    timing.validate();
    check_cycles(cycles, "sim_assign");
    if (st.n_su() != a.n_su() || st.n_ch() != a.n_ch()) throw ContractError("sim_assign: shape mismatch");
    if (err) err->validate(a.n_su(), a.n_ch());
    if (w < 1) throw DomainError("sim_assign: window must be >= 1");
    const int n = st.n_su();
    // fixed contention-phase budget charged to every contention winner
    const double overhead =
        ((w - 1) * timing.theta / 2.0 + timing.rts + timing.cts + 3.0 * timing.sifs + timing.sen + timing.syn) /
        timing.cycle;
    if (overhead > 1) throw DomainError("sim_assign: contention phase longer than the cycle");

    RngStreams rs(seed);
    std::vector<Rng> pu_rng, choice_rng, bo_rng;
    std::vector<std::vector<int>> sep(n), com(n);
    for (int i = 0; i < n; ++i) {
        pu_rng.push_back(rs.make(Stream::pu, i));
        choice_rng.push_back(rs.make(Stream::choice, i));
        bo_rng.push_back(rs.make(Stream::backoff, i));
        sep[i] = st.separate(i);
        com[i] = st.common(i);
    }

    std::vector<Moments> per(n);
    Moments tot;
    long coll_cycles = 0;
    std::vector<char> avail(static_cast<size_t>(n) * a.n_ch()), idle(avail.size());
    std::vector<int> pick(n), counter(n), cand;
    std::vector<char> out(n), claimed(a.n_ch());
    std::vector<double> x(n);
    std::vector<int> order;
    for (long c = 0; c < cycles; ++c) {
        for (int i = 0; i < n; ++i)
            for (int j : st.all_of(i)) {
                size_t k = static_cast<size_t>(i) * a.n_ch() + j;
                avail[k] = bernoulli(pu_rng[i], a.at(i, j));
                if (!err) idle[k] = avail[k];
                else idle[k] = !bernoulli(pu_rng[i], avail[k] ? err->pf[i][j] : err->pd[i][j]);
            }
        order.clear();
        for (int i = 0; i < n; ++i) {
            x[i] = 0;
            pick[i] = -1;
            for (int pass = 0; pass < 2 && pick[i] < 0; ++pass) {
                cand.clear();
                for (int j : pass == 0 ? sep[i] : com[i])
                    if (idle[static_cast<size_t>(i) * a.n_ch() + j]) cand.push_back(j);
                if (cand.empty()) continue;
                pick[i] = cand[std::uniform_int_distribution<int>(0, static_cast<int>(cand.size()) - 1)(choice_rng[i])];
                if (pass == 0) {
                    x[i] = avail[static_cast<size_t>(i) * a.n_ch() + pick[i]] ? 1.0 : 0.0;
                } else {
                    counter[i] = std::uniform_int_distribution<int>(0, w - 1)(bo_rng[i]);
                    order.push_back(i);
                }
            }
        }
        // contention on the control channel in backoff order; equal counters collide
        std::stable_sort(order.begin(), order.end(), [&](int u, int v) { return counter[u] < counter[v]; });
        std::fill(out.begin(), out.end(), 0);
        std::fill(claimed.begin(), claimed.end(), 0);
        bool collided = false;
        for (size_t s = 0; s < order.size();) {
            size_t e = s;
            while (e < order.size() && counter[order[e]] == counter[order[s]]) ++e;
            int live = 0, who = -1;
            for (size_t k = s; k < e; ++k) {
                int u = order[k];
                if (claimed[pick[u]]) out[u] = 1;  // overheard an earlier reservation of its channel
                if (!out[u]) ++live, who = u;
            }
            if (live == 1) {
                claimed[pick[who]] = 1;
                x[who] = avail[static_cast<size_t>(who) * a.n_ch() + pick[who]] ? 1.0 - overhead : 0.0;
            } else if (live > 1) {
                collided = true;
                for (size_t k = s; k < e; ++k) out[order[k]] = 1;
            }
            s = e;
        }
        coll_cycles += collided;
        double sum = 0;
        for (int i = 0; i < n; ++i) {
            per[i].add(x[i]);
            sum += x[i];
        }
        tot.add(sum);
        if (trace) {
            *trace << c << '\t';
            for (int i = 0; i < n; ++i) {
                if (i) *trace << ',';
                for (int j : st.all_of(i)) *trace << (avail[static_cast<size_t>(i) * a.n_ch() + j] ? '0' : '1');
            }
            *trace << '\t' << order.size() << '\t';
            bool first = true;
            for (int i = 0; i < n; ++i)
                if (x[i] > 0) *trace << (first ? "" : ",") << i, first = false;
            if (first) *trace << '-';
            *trace << '\t' << sum << '\n';
        }
    }
    AssignSimResult r;
    for (int i = 0; i < n; ++i) r.per_su.push_back(per[i].estimate(seed));
    r.total = tot.estimate(seed);
    r.collision_rate = static_cast<double>(coll_cycles) / cycles;
    return r;
}

// ------------------------------------------------------------------ cooperative sensing MAC

namespace {

double binom_tail(int b, int a, double x) {
    // P(Bin(b, x) >= a)
    double s = 0;
    for (int k = a; k <= b; ++k) {
        double lc = std::lgamma(b + 1.0) - std::lgamma(k + 1.0) - std::lgamma(b - k + 1.0);
        s += std::exp(lc + k * std::log(x) + (b - k) * std::log1p(-x));
    }
    return s;
}

// equal per-sensor detection probability meeting the fused target
double per_sensor_pd(double target, int a, int b) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        double mid = 0.5 * (lo + hi);
        (binom_tail(b, a, mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// slot-level p-persistent contention on one channel: completed data exchanges within `room`
struct PPersistChannel {
    double slot, t_hs, t_coll, t_data;

    int packets(double p, const std::vector<int>& who, std::vector<Rng>& rng, double room) const {
        if (who.empty() || room <= 0) return 0;
        std::geometric_distribution<long> g(p);
        double now = 0;
        int done = 0;
        const long cap = std::numeric_limits<long>::max() / 4;
        for (;;) {
            // every contender's next attempt slot; memoryless, so redrawn after each event
            long first = cap;
            int ties = 0;
            for (int i : who) {
                long s = p >= 1.0 ? 0 : std::min(g(rng[i]), cap);
                if (s < first) first = s, ties = 1;
                else if (s == first) ++ties;
            }
            now += first * slot;
            if (now >= room) break;
            if (ties == 1) {
                now += t_hs + t_data;
                if (now > room) break;
                ++done;
            } else {
                now += t_coll;
            }
        }
        return done;
    }
};

}  // namespace

SimEstimate sim_sdcss(const SensingSets& sets, const SdcssParams& prm, const ReportErrorMatrix* errs, long cycles,
                      std::uint64_t seed, std::ostream* trace) {
    sets.validate();
    prm.validate(sets);
    check_cycles(cycles, "sim_sdcss");
    const int n = prm.n_su(), m = prm.n_ch();
    if (errs) errs->validate();
    if (errs && errs->n != n) throw ContractError("sim_sdcss: report error matrix size differs from N");
    const MacTiming& t = prm.timing;

    double sense = 0;
    for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int j = 0; j < m; ++j) s += prm.tau[i][j];
        sense = std::max(sense, s);
    }
    const double room = t.cycle - sense - n * t.report_slot;
    const double t_data = t.packet + 2 * t.sifs + 2 * t.pd + t.ack;
    PPersistChannel ch{t.slot, t.difs + t.rts + t.cts + 2 * t.pd, t.rts + t.difs + t.pd, t_data};

    RngStreams rs(seed);
    std::vector<Rng> pu_rng, sense_rng, rep_rng, choice_rng, bo_rng;
    for (int j = 0; j < m; ++j) pu_rng.push_back(rs.make(Stream::pu, j));
    for (int i = 0; i < n; ++i) {
        sense_rng.push_back(rs.make(Stream::sensing, i));
        rep_rng.push_back(rs.make(Stream::report, i));
        choice_rng.push_back(rs.make(Stream::choice, i));
        bo_rng.push_back(rs.make(Stream::backoff, i));
    }
    // detectors[i][j], only on sensed pairs
    std::vector<std::vector<EnergyDetector>> det(n);
    for (int j = 0; j < m; ++j) {
        if (sets.b(j) == 0) continue;
        double pd = per_sensor_pd(prm.pd_targets[j], sets.a[j], sets.b(j));
        for (int i : sets.of_channel(j))
            if (det[i].empty()) det[i].resize(m, EnergyDetector(1.0, 1.0, 1.0, 0.5));
        for (int i : sets.of_channel(j)) det[i][j] = EnergyDetector(prm.snr.at(i, j), prm.tau[i][j], prm.f_s, pd);
    }

    std::vector<char> active(m);
    std::vector<std::vector<char>> vote(n, std::vector<char>(m, 0));
    std::vector<std::vector<int>> users(m);
    std::vector<int> cand;
    Moments acc;
    for (long c = 0; c < cycles; ++c) {
        for (int j = 0; j < m; ++j) active[j] = !bernoulli(pu_rng[j], prm.pu[j].p_idle);
        for (int i = 0; i < n; ++i)
            for (int j : sets.of_su(i)) vote[i][j] = det[i][j].busy(sense_rng[i], active[j]);
        for (auto& u : users) u.clear();
        for (int r = 0; r < n; ++r) {
            cand.clear();
            for (int j = 0; j < m; ++j) {
                if (sets.b(j) == 0) continue;  // nobody senses it: never accessed
                int busy = 0;
                for (int s : sets.of_channel(j)) {
                    bool v = vote[s][j];
                    if (errs && s != r && bernoulli(rep_rng[r], errs->at(r, s))) v = !v;
                    busy += v;
                }
                if (busy < sets.a[j]) cand.push_back(j);
            }
            if (cand.empty()) continue;
            int j = cand[std::uniform_int_distribution<int>(0, static_cast<int>(cand.size()) - 1)(choice_rng[r])];
            users[j].push_back(r);
        }
        double got = 0;
        for (int j = 0; j < m; ++j) {
            int k = ch.packets(prm.p, users[j], bo_rng, room);
            if (!active[j]) got += k * t_data;
        }
        double x = got / (t.cycle * m);
        acc.add(x);
        if (trace) {
            *trace << c << '\t';
            for (int j = 0; j < m; ++j) *trace << (active[j] ? '1' : '0');
            *trace << '\t';
            for (int j = 0; j < m; ++j) *trace << (j ? "," : "") << users[j].size();
            *trace << "\t-\t" << x << '\n';
        }
    }
    return acc.estimate(seed);
}

// ------------------------------------------------------------------ full-duplex MAC

namespace {

struct FdLocal {
    double noise = 1, g = 0;  // sensing-stage noise incl. self-interference, PU power relative to it
    double n_samples = 0;
    double thr = 0;

    // P(detect | PU active on a fraction w of the window), Gaussian statistic
    double pd_frac(double x, double w) const {
        double mean = 1.0 + w * g;
        double sd = std::sqrt((w * (1 + g) * (1 + g) + (1 - w)) / n_samples);
        return q((x - mean) / sd);
    }
    bool busy(Rng& r, double w) const {
        double sd = std::sqrt((w * (1 + g) * (1 + g) + (1 - w)) / n_samples);
        double stat = noise * (1.0 + w * g + sd * std::normal_distribution<double>(0.0, 1.0)(r));
        return stat > thr;
    }
};

FdLocal fd_detector(const FdcScenario& sc, double t_s, Power p_sen) {
    FdLocal d;
    d.noise = 1.0 + (sc.si.zeta == 0.0 ? 0.0 : sc.si.zeta * std::pow(p_sen.linear, sc.si.xi));
    d.g = sc.p_pu.linear / d.noise;
    d.n_samples = t_s * sc.f_s;
    // target: detection averaged over PU arrival instants within the window, arrival density
    // exponential with the mean idle time, truncated to [0, t_s]; Simpson with 400 panels
    const double tid = *sc.pu.mean_idle;
    auto avg = [&](double x) {
        const int k = 400;
        double h = t_s / k, s = 0, norm = 0;
        for (int i = 0; i <= k; ++i) {
            double u = i * h;
            double wgt = (i == 0 || i == k) ? 1 : (i % 2 ? 4 : 2);
            double dens = std::exp(-u / tid);
            s += wgt * dens * d.pd_frac(x, (t_s - u) / t_s);
            norm += wgt * dens;
        }
        return s / norm;
    };
    double lo = 0.0, hi = 2.0 + d.g + 40.0 / std::sqrt(d.n_samples);
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        double mid = 0.5 * (lo + hi);
        (avg(mid) > sc.pd_target ? lo : hi) = mid;
    }
    d.thr = 0.5 * (lo + hi) * d.noise;
    return d;
}

}  // namespace

SimEstimate sim_fdcmac(const FdcScenario& sc, double t_s, Power p_sen, long cycles, std::uint64_t seed,
                       std::ostream* trace) {
    sc.validate();
    check_cycles(cycles, "sim_fdcmac");
    const double T = sc.t_frame;
    if (!(t_s > 0 && t_s <= T * (1 + 1e-12))) throw DomainError("sim_fdcmac: t_s must lie in (0, T]");
    t_s = std::min(t_s, T);
    if (!(p_sen.linear >= 0 && p_sen.linear <= sc.p_max.linear * (1 + 1e-12)))
        throw DomainError("sim_fdcmac: p_sen must lie in [0, p_max]");
    const MacTiming& tm = sc.timing;

    const bool fd = sc.mode == FdMode::fdtx;
    const double flows_d = fd ? 2.0 : 1.0;
    auto si = [&](double p) { return sc.si.zeta == 0.0 ? 0.0 : sc.si.zeta * std::pow(p, sc.si.xi); };
    const double i_sen = sc.sensing_rate_with_si && fd ? si(p_sen.linear) : 0.0;
    const double flows_s = sc.sensing_rate_with_si ? flows_d : 1.0;
    const double i_dat = fd ? si(sc.p_max.linear) : 0.0;
    // bits/s/Hz with the PU off / on
    const double rs[2] = {flows_s * std::log2(1 + p_sen.linear / (1 + i_sen)),
                          flows_s * std::log2(1 + p_sen.linear / (1 + sc.p_pu.linear + i_sen))};
    const double rd[2] = {flows_d * std::log2(1 + sc.p_max.linear / (1 + i_dat)),
                          flows_d * std::log2(1 + sc.p_max.linear / (1 + sc.p_pu.linear + i_dat))};
    const FdLocal det = fd_detector(sc, t_s, p_sen);

    const double t_hs = tm.difs + tm.rts + tm.sifs + tm.cts + 2 * tm.pd;
    const double t_coll = tm.difs + tm.rts + tm.pd;
    const double t_tail = 2 * tm.sifs + 2 * tm.pd + tm.ack;

    RngStreams rs_(seed);
    PuProcess pu(sc.pu, rs_.make(Stream::pu, 0));
    Rng sense = rs_.make(Stream::sensing, 0);
    Rng cont = rs_.make(Stream::contention, 0);
    std::geometric_distribution<long> geo(sc.p_access);

    // integral of a two-level rate over [a, b), plus the PU-active time inside it
    auto integrate = [&](double a, double b, const double* rate, double* active_time) {
        double bits = 0, act = 0;
        pu.seek(a);
        double x = a;
        while (x < b) {
            double y = std::min(b, pu.end());
            bits += (y - x) * rate[pu.active() ? 1 : 0];
            if (pu.active()) act += y - x;
            x = y;
            if (x < b) pu.advance();
        }
        if (active_time) *active_time = act;
        return bits;
    };

    double now = 0, sum_bits = 0, sum_time = 0;
    Moments resid;
    std::vector<double> bits_c, dur_c;
    bits_c.reserve(cycles);
    dur_c.reserve(cycles);
    for (long c = 0; c < cycles; ++c) {
        const double start = now;
        // contention among n_su saturated users
        for (;;) {
            long first = std::numeric_limits<long>::max();
            int ties = 0;
            for (int i = 0; i < sc.n_su; ++i) {
                long s = geo(cont);
                if (s < first) first = s, ties = 1;
                else if (s == first) ++ties;
            }
            now += first * tm.slot;
            if (ties == 1) {
                now += t_hs;
                break;
            }
            now += t_coll;
        }
        now += t_tail;
        const double d0 = now;
        // reservation is useful only if the PU stayed idle throughout it
        pu.seek(start);
        bool clear = !pu.active() && pu.end() >= d0;
        double bits = 0;
        bool detected = false;
        if (clear) {
            double act = 0;
            bits += integrate(d0, d0 + t_s, rs, &act);
            detected = det.busy(sense, act / t_s);
            if (!detected && t_s < T) bits += integrate(d0 + t_s, d0 + T, rd, nullptr);
        }
        now = d0 + T;
        bits_c.push_back(bits);
        dur_c.push_back(now - start);
        sum_bits += bits;
        sum_time += now - start;
        if (trace)
            *trace << c << '\t' << (clear ? '0' : '1') << '\t' << sc.n_su << '\t' << (detected ? '-' : '+') << '\t'
                   << bits / (now - start) << '\n';
    }
    // ratio estimator with a delta-method interval
    SimEstimate e;
    e.cycles = cycles;
    e.seed = seed;
    e.mean = sum_bits / sum_time;
    const double mean_dur = sum_time / cycles;
    for (long c = 0; c < cycles; ++c) resid.add(bits_c[c] - e.mean * dur_c[c]);
    e.half_ci95 = resid.estimate(seed).half_ci95 / mean_dur;
    return e;
}

SimEstimate sim_ppersist_contention(double p, int n0, double slot, double t_succ_hs, double t_coll, long epochs,
                                    std::uint64_t seed) {
    if (!(p > 0 && p <= 1)) throw DomainError("sim_ppersist_contention: p must lie in (0, 1]");
    if (n0 < 1) throw DomainError("sim_ppersist_contention: n0 must be >= 1");
    if (p == 1.0 && n0 > 1) throw DomainError("sim_ppersist_contention: p = 1 with several users never succeeds");
    check_cycles(epochs, "sim_ppersist_contention");
    RngStreams rs(seed);
    std::vector<Rng> rng;
    for (int i = 0; i < n0; ++i) rng.push_back(rs.make(Stream::backoff, i));
    std::geometric_distribution<long> g(p);
    Moments acc;
    for (long e = 0; e < epochs; ++e) {
        double now = 0;
        for (;;) {
            long first = std::numeric_limits<long>::max();
            int ties = 0;
            for (int i = 0; i < n0; ++i) {
                long s = p >= 1.0 ? 0 : g(rng[i]);
                if (s < first) first = s, ties = 1;
                else if (s == first) ++ties;
            }
            now += first * slot;
            if (ties == 1) {
                now += t_succ_hs;
                break;
            }
            now += t_coll;
        }
        acc.add(now);
    }
    return acc.estimate(seed);
}

}  // namespace cogmac
