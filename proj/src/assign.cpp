#include "cogmac/assign.hpp"

#include <algorithm>
#include <cmath>

#include "cogmac/search.hpp"

namespace cogmac {

AvailabilityMatrix::AvailabilityMatrix(std::vector<std::vector<double>> rows) : p(std::move(rows)) { validate(); }

void AvailabilityMatrix::validate() const {
    if (p.empty() || p.front().empty()) throw ContractError("AvailabilityMatrix: empty");
    for (const auto& r : p) {
        if (r.size() != p.front().size()) throw ContractError("AvailabilityMatrix: ragged rows");
        for (double v : r) check_probability(v, "AvailabilityMatrix");
    }
}

void SensingErrorMatrix::validate(int n_su, int n_ch) const {
    auto shape = [&](const std::vector<std::vector<double>>& m, const char* what) {
        if (static_cast<int>(m.size()) != n_su) throw ContractError(std::string("SensingErrorMatrix: bad rows in ") + what);
        for (const auto& r : m) {
            if (static_cast<int>(r.size()) != n_ch)
                throw ContractError(std::string("SensingErrorMatrix: bad cols in ") + what);
            for (double v : r) check_probability(v, what);
        }
    };
    shape(pd, "pd");
    shape(pf, "pf");
}

double SensingErrorMatrix::p_idle(const AvailabilityMatrix& a, int i, int j) const {
    return (1.0 - pf[i][j]) * a.at(i, j) + (1.0 - pd[i][j]) * a.bar(i, j);
}

AssignmentState::AssignmentState(int n_su, int n_ch) : users_(n_su), owners_(n_ch) {
    if (n_su < 1 || n_ch < 1) throw DomainError("AssignmentState: need at least one SU and one channel");
}

void AssignmentState::add(int su, int ch) {
    if (su < 0 || su >= n_su() || ch < 0 || ch >= n_ch()) throw ContractError("AssignmentState::add: index out of range");
    auto& u = users_[su];
    auto it = std::lower_bound(u.begin(), u.end(), ch);
    if (it != u.end() && *it == ch) return;
    u.insert(it, ch);
    auto& o = owners_[ch];
    o.insert(std::lower_bound(o.begin(), o.end(), su), su);
}

void AssignmentState::remove(int su, int ch) {
    auto& u = users_[su];
    auto it = std::lower_bound(u.begin(), u.end(), ch);
    if (it == u.end() || *it != ch) return;
    u.erase(it);
    auto& o = owners_[ch];
    o.erase(std::lower_bound(o.begin(), o.end(), su));
}

bool AssignmentState::has(int su, int ch) const {
    return std::binary_search(users_[su].begin(), users_[su].end(), ch);
}

std::vector<int> AssignmentState::separate(int su) const {
    std::vector<int> out;
    for (int c : users_[su])
        if (owners_[c].size() == 1) out.push_back(c);
    return out;
}

std::vector<int> AssignmentState::common(int su) const {
    std::vector<int> out;
    for (int c : users_[su])
        if (owners_[c].size() >= 2) out.push_back(c);
    return out;
}

bool AssignmentState::has_overlap() const {
    for (const auto& o : owners_)
        if (o.size() >= 2) return true;
    return false;
}

void AssignmentState::validate() const {
    for (int s = 0; s < n_su(); ++s)
        for (int c : users_[s])
            if (!std::binary_search(owners_[c].begin(), owners_[c].end(), s))
                throw ContractError("AssignmentState: per-SU and per-channel views disagree");
}

double all_busy(const AvailabilityMatrix& a, int i, const std::vector<int>& chans) {
    double r = 1.0;
    for (int c : chans) r *= a.bar(i, c);
    return r;
}

double user_throughput_nonoverlap(const std::vector<int>& chans, const AvailabilityMatrix& a, int su) {
    return 1.0 - all_busy(a, su, chans);
}

AssignmentState greedy_nonoverlap(const AvailabilityMatrix& a) {
    a.validate();
    const int n = a.n_su(), m = a.n_ch();
    AssignmentState st(n, m);
    std::vector<bool> free(m, true);
    std::vector<double> busy(n, 1.0);
    for (int round = 0; round < m; ++round) {
        int bi = -1, bj = -1;
        double bg = -1;
        for (int i = 0; i < n; ++i) {
            int ji = -1;
            for (int j = 0; j < m; ++j)
                if (free[j] && (ji < 0 || a.at(i, j) > a.at(i, ji))) ji = j;
            double g = a.at(i, ji) * busy[i];
            if (g > bg) {
                bg = g;
                bi = i;
                bj = ji;
            }
        }
        st.add(bi, bj);
        free[bj] = false;
        busy[bi] *= a.bar(bi, bj);
    }
    return st;
}

double first_collision_given(int m, int w) {
    if (w < 2) throw DomainError("first_collision_given: window must be >= 2");
    if (m < 2) return 0.0;
    // inner binomial sum over j >= 2 in closed form for each backoff value i. the top value
    // w-1 is included: all m users landing there is a collision too
    const double W = w;
    double s = 0.0;
    for (int i = 0; i <= w - 1; ++i) {
        double hi = (W - i) / W, lo = (W - i - 1) / W;
        s += std::pow(hi, m) - std::pow(lo, m) - m / W * std::pow(lo, m - 1);
    }
    return std::clamp(s, 0.0, 1.0);
}

std::vector<double> contention_probs(const AvailabilityMatrix& a, const AssignmentState& st) {
    std::vector<double> out(st.n_su());
    for (int i = 0; i < st.n_su(); ++i)
        out[i] = all_busy(a, i, st.separate(i)) * (1.0 - all_busy(a, i, st.common(i)));
    return out;
}

namespace {

std::vector<double> poisson_binomial(const std::vector<double>& ps) {
    std::vector<double> pmf(ps.size() + 1, 0.0);
    pmf[0] = 1.0;
    for (size_t k = 0; k < ps.size(); ++k)
        for (size_t l = k + 2; l-- > 0;) {
            double v = pmf[l] * (1.0 - ps[k]);
            if (l > 0) v += pmf[l - 1] * ps[k];
            pmf[l] = v;
        }
    return pmf;
}

double pc_from_pmf(const std::vector<double>& pmf, int w) {
    double pc = 0.0;
    for (size_t m = 2; m < pmf.size(); ++m)
        if (pmf[m] > 0) pc += first_collision_given(static_cast<int>(m), w) * pmf[m];
    return pc;
}

}  // namespace

double first_collision_probability(int w, const AvailabilityMatrix& a, const AssignmentState& st) {
    return pc_from_pmf(poisson_binomial(contention_probs(a, st)), w);
}

int contention_window_for(double eps_p, const AvailabilityMatrix& a, const AssignmentState& st) {
    if (!(eps_p > 0 && eps_p <= 1)) throw DomainError("contention_window_for: eps_p must lie in (0, 1]");
    constexpr int kMin = 2, kCap = 1 << 16;
    const auto pmf = poisson_binomial(contention_probs(a, st));
    auto ok = [&](int w) { return pc_from_pmf(pmf, w) <= eps_p; };
    if (ok(kMin)) return kMin;
    int lo = kMin, hi = kMin;
    while (!ok(hi)) {
        lo = hi;
        if (hi >= kCap)
            throw NumericError("contention_window_for: no window up to 65536 meets eps_p = " + std::to_string(eps_p));
        hi = std::min(hi * 2, kCap);
    }
    // ok(hi), !ok(lo)
    while (hi - lo > 1) {
        int mid = lo + (hi - lo) / 2;
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

void AssignTiming::validate() const {
    if (theta < 0 || rts < 0 || cts < 0 || sifs < 0 || sen < 0 || syn < 0)
        throw DomainError("AssignTiming: negative duration");
    if (!(cycle > 0)) throw DomainError("AssignTiming: cycle must be > 0");
}

double mac_overhead(int w, const AssignTiming& t) {
    t.validate();
    if (w < 1) throw DomainError("mac_overhead: window must be >= 1");
    return ((w - 1) * t.theta / 2.0 + t.rts + t.cts + 3.0 * t.sifs + t.sen + t.syn) / t.cycle;
}

double estimate_overlap_gain(int i, int j, const AssignmentState& st, const AvailabilityMatrix& a, double delta) {
    const auto& us = st.users_of(j);
    const int ms = static_cast<int>(us.size());
    if (ms < 1) throw ContractError("estimate_overlap_gain: channel has no users");
    if (std::binary_search(us.begin(), us.end(), i)) throw ContractError("estimate_overlap_gain: SU already uses channel");
    const double pij = a.at(i, j);
    const double own_busy = all_busy(a, i, st.separate(i));
    const double com_busy = all_busy(a, i, st.common(i));
    double all_avail = 1.0, one_out = 0.0, others_served = 1.0;
    for (int k = 0; k < ms; ++k) {
        const int u = us[k];
        all_avail *= a.at(u, j);
        double t = a.bar(u, j);
        for (int q = 0; q < ms; ++q)
            if (q != k) t *= a.at(us[q], j);
        one_out += t;
        // separate set of the sharer without j itself
        std::vector<int> sep = st.separate(u);
        sep.erase(std::remove(sep.begin(), sep.end(), j), sep.end());
        others_served *= 1.0 - all_busy(a, u, sep);
    }
    const double f = (1.0 - 1.0 / ms) * (1.0 - delta);
    double d1 = f * pij * own_busy * (1.0 - com_busy) * one_out;
    double d2 = (1.0 - delta) * pij * own_busy * com_busy * all_avail * others_served;
    double d3 = f * pij * own_busy * (1.0 - com_busy) * all_avail * others_served;
    return std::max(0.0, d1 + d2 + d3);
}

double ThroughputBreakdown::min() const { return per_su.empty() ? 0.0 : *std::min_element(per_su.begin(), per_su.end()); }

namespace {

// per (SU, channel) sensing view: ok = available and sensed idle, miss = busy but sensed idle
struct SenseView {
    const AvailabilityMatrix& a;
    const SensingErrorMatrix* err;
    double ok(int i, int j) const { return err ? a.at(i, j) * (1.0 - err->pf[i][j]) : a.at(i, j); }
    double miss(int i, int j) const { return err ? a.bar(i, j) * (1.0 - err->pd[i][j]) : 0.0; }
    double idle(int i, int j) const { return err ? err->p_idle(a, i, j) : a.at(i, j); }
    double busy(int i, int j) const { return 1.0 - idle(i, j); }
    double all_busy(int i, const std::vector<int>& cs) const {
        double r = 1.0;
        for (int c : cs) r *= busy(i, c);
        return r;
    }
};

// E[1/(n+1)] with n = number of sensed-idle channels among cs
double mean_inv_choices(const SenseView& v, int i, const std::vector<int>& cs) {
    std::vector<double> ps;
    for (int c : cs) ps.push_back(v.idle(i, c));
    auto pmf = poisson_binomial(ps);
    double e = 0;
    for (size_t n = 0; n < pmf.size(); ++n) e += pmf[n] / (n + 1.0);
    return e;
}

struct GroupProbs {
    double g[4];
};

GroupProbs group_probs(const SenseView& v, const AssignmentState& st, int k, int j) {
    const double s = v.idle(k, j);
    const double b = v.all_busy(k, st.separate(k));
    std::vector<int> rest = st.common(k);
    rest.erase(std::remove(rest.begin(), rest.end(), j), rest.end());
    const double e = mean_inv_choices(v, k, rest);
    return {{s * (1.0 - b), 1.0 - s, s * b * (1.0 - e), s * b * e}};
}

}  // namespace

PartitionSum sharing_partition(int i, int j, const AssignmentState& st, const AvailabilityMatrix& a,
                               const SensingErrorMatrix* err) {
    const auto& us = st.users_of(j);
    if (static_cast<int>(us.size()) > kMaxSharing)
        throw ContractError("exact_throughput: channel shared by more than 8 SUs; use simulation");
    SenseView v{a, err};
    std::vector<GroupProbs> g;
    for (int k : us)
        if (k != i) g.push_back(group_probs(v, st, k, j));
    const int n = static_cast<int>(g.size());
    long total = 1;
    for (int k = 0; k < n; ++k) total *= 4;
    PartitionSum r;
    // every labelling of the other sharers with a group I..IV
    for (long code = 0; code < total; ++code) {
        long c = code;
        double w = 1.0;
        int a4 = 0;
        for (int k = 0; k < n; ++k) {
            int lab = static_cast<int>(c % 4);
            c /= 4;
            w *= g[k].g[lab];
            if (lab == 3) ++a4;
        }
        r.weight += w;
        r.value += w / (1.0 + a4);
    }
    return r;
}

namespace {

double user_throughput(int i, const AssignmentState& st, const SenseView& v, double delta) {
    const std::vector<int> sep = st.separate(i), com = st.common(i);
    if (static_cast<int>(sep.size()) > kMaxSetSize || static_cast<int>(com.size()) > kMaxSetSize)
        throw ContractError("exact_throughput: set larger than 8 channels; use simulation");
    double case1;
    if (!v.err) {
        case1 = 1.0 - v.all_busy(i, sep);
    } else {
        // each separate channel is ok / missed / sensed busy; pick uniformly among sensed idle
        case1 = 0.0;
        const int n = static_cast<int>(sep.size());
        long total = 1;
        for (int k = 0; k < n; ++k) total *= 3;
        for (long code = 0; code < total; ++code) {
            long c = code;
            double w = 1.0;
            int k2 = 0, k3 = 0;
            for (int k = 0; k < n; ++k) {
                int lab = static_cast<int>(c % 3);
                c /= 3;
                int ch = sep[k];
                if (lab == 0) w *= v.ok(i, ch), ++k2;
                else if (lab == 1) w *= v.miss(i, ch), ++k3;
                else w *= v.busy(i, ch);
            }
            if (k2 > 0) case1 += w * k2 / static_cast<double>(k2 + k3);
        }
    }
    if (com.empty()) return case1;
    const double theta_sep = v.all_busy(i, sep);
    std::vector<double> win(com.size());
    for (size_t k = 0; k < com.size(); ++k) win[k] = sharing_partition(i, com[k], st, v.a, v.err).value;
    // sensing pattern over the common set: chosen uniformly among sensed idle, success only on an ok channel
    const int n = static_cast<int>(com.size());
    long total = 1;
    for (int k = 0; k < n; ++k) total *= 3;
    double case2 = 0.0;
    std::vector<int> lab(n);
    for (long code = 0; code < total; ++code) {
        long c = code;
        double w = 1.0;
        int idle = 0;
        double good = 0.0;
        for (int k = 0; k < n; ++k) {
            lab[k] = static_cast<int>(c % 3);
            c /= 3;
            int ch = com[k];
            if (lab[k] == 0) w *= v.ok(i, ch), ++idle, good += win[k];
            else if (lab[k] == 1) w *= v.miss(i, ch), ++idle;
            else w *= v.busy(i, ch);
            if (w == 0.0) break;
        }
        if (w == 0.0 || idle == 0) continue;
        case2 += w * good / idle;
    }
    return case1 + (1.0 - delta) * theta_sep * case2;
}

ThroughputBreakdown evaluate(const AssignmentState& st, const AvailabilityMatrix& a, const SensingErrorMatrix* err,
                             double delta) {
    if (st.n_su() != a.n_su() || st.n_ch() != a.n_ch()) throw ContractError("exact_throughput: shape mismatch");
    if (!(delta >= 0 && delta <= 1)) throw DomainError("exact_throughput: delta must lie in [0, 1]");
    SenseView v{a, err};
    ThroughputBreakdown r;
    r.per_su.resize(st.n_su());
    for (int i = 0; i < st.n_su(); ++i) {
        r.per_su[i] = user_throughput(i, st, v, delta);
        r.total += r.per_su[i];
    }
    return r;
}

}  // namespace

ThroughputBreakdown exact_throughput(const AssignmentState& st, const AvailabilityMatrix& a, double delta) {
    return evaluate(st, a, nullptr, delta);
}

ThroughputBreakdown exact_throughput_imperfect(const AssignmentState& st, const AvailabilityMatrix& a,
                                               const SensingErrorMatrix& err, double delta) {
    err.validate(a.n_su(), a.n_ch());
    return evaluate(st, a, &err, delta);
}

OverlapResult with_overhead(const AssignmentState& st, const AvailabilityMatrix& a, const AssignConfig& cfg) {
    OverlapResult r;
    r.state = st;
    r.w = contention_window_for(cfg.eps_p, a, st);
    r.delta = mac_overhead(r.w, cfg.timing);
    return r;
}

OverlapResult greedy_overlap(const AvailabilityMatrix& a, const AssignConfig& cfg) {
    if (!(cfg.eps_delta > 0)) throw DomainError("greedy_overlap: eps_delta must be > 0");
    AssignmentState st = greedy_nonoverlap(a);
    OverlapResult cur = with_overhead(st, a, cfg);
    double delta0 = cur.delta;
    const double eps = cfg.eps >= 0 ? cfg.eps : 1e-3 * exact_throughput(st, a, delta0).total;
    const int n = a.n_su(), m = a.n_ch();
    const int h_max = std::min(n - 1, kMaxSharing - 1);
    for (int h = 1; h <= h_max; ++h) {
        bool refreshed = false;
        for (;;) {
            int bj = -1, bl = -1;
            double bg = 0.0;
            for (int j = 0; j < m; ++j) {
                const auto& us = st.users_of(j);
                if (static_cast<int>(us.size()) != h) continue;
                // keep at least one separate channel for the current sole owner
                if (h == 1 && st.separate(us.front()).size() <= 1) continue;
                for (int l = 0; l < n; ++l) {
                    if (st.has(l, j)) continue;
                    double g = estimate_overlap_gain(l, j, st, a, delta0);
                    if (g > bg) {
                        bg = g;
                        bj = j;
                        bl = l;
                    }
                }
            }
            if (bj < 0 || bg <= eps) break;
            AssignmentState tmp = st;
            tmp.add(bl, bj);
            OverlapResult ov = with_overhead(tmp, a, cfg);
            if (std::fabs(ov.delta - delta0) > cfg.eps_delta && !refreshed) {
                // overhead moved: re-rank candidates under the new delta first
                delta0 = ov.delta;
                refreshed = true;
                continue;
            }
            st = std::move(tmp);
            cur = ov;
            delta0 = ov.delta;
            refreshed = false;
        }
    }
    cur.state = st;
    return cur;
}

AssignmentState maxmin_greedy_nonoverlap(const AvailabilityMatrix& a) {
    a.validate();
    const int n = a.n_su(), m = a.n_ch();
    AssignmentState st(n, m);
    std::vector<bool> free(m, true);
    std::vector<double> busy(n, 1.0);
    for (int round = 0; round < m; ++round) {
        double tmin = 2.0;
        for (int i = 0; i < n; ++i) tmin = std::min(tmin, 1.0 - busy[i]);
        int bi = -1, bj = -1;
        double bg = -1;
        for (int i = 0; i < n; ++i) {
            if (1.0 - busy[i] > tmin + 1e-12) continue;
            for (int j = 0; j < m; ++j) {
                if (!free[j]) continue;
                double g = a.at(i, j) * busy[i];
                if (g > bg) {
                    bg = g;
                    bi = i;
                    bj = j;
                }
            }
        }
        st.add(bi, bj);
        free[bj] = false;
        busy[bi] *= a.bar(bi, bj);
    }
    return st;
}

OverlapResult maxmin_overlap(const AvailabilityMatrix& a, const AssignConfig& cfg) {
    const int n = a.n_su(), m = a.n_ch();
    if (n > 12) throw ContractError("maxmin_overlap: subset search limited to 12 SUs");
    OverlapResult cur = with_overhead(maxmin_greedy_nonoverlap(a), a, cfg);
    double cur_min = exact_throughput(cur.state, a, cur.delta).min();
    for (;;) {
        const ThroughputBreakdown tb = exact_throughput(cur.state, a, cur.delta);
        int istar = 0;
        for (int i = 1; i < n; ++i)
            if (tb.per_su[i] < tb.per_su[istar]) istar = i;
        const AssignmentState& st = cur.state;
        OverlapResult best = cur;
        double best_min = cur_min;
        bool found = false;
        auto consider = [&](AssignmentState cand) {
            for (int j = 0; j < m; ++j)
                if (static_cast<int>(cand.users_of(j).size()) > kMaxSharing) return;
            OverlapResult ov = with_overhead(cand, a, cfg);
            double mn = exact_throughput(ov.state, a, ov.delta).min();
            if (mn > best_min + 1e-12) {
                best = std::move(ov);
                best_min = mn;
                found = true;
            }
        };
        // channels held alone by another SU
        for (int j = 0; j < m; ++j) {
            const auto& us = st.users_of(j);
            if (us.size() != 1 || us.front() == istar) continue;
            const int owner = us.front();
            std::vector<int> pool;
            for (int k = 0; k < n; ++k)
                if (k != istar && k != owner) pool.push_back(k);
            for (unsigned mask = 0; mask < (1u << pool.size()); ++mask) {
                AssignmentState cand = st;
                cand.add(istar, j);
                for (size_t b = 0; b < pool.size(); ++b)
                    if (mask >> b & 1u) cand.add(pool[b], j);
                consider(std::move(cand));
            }
        }
        // channels already shared, not yet used by istar
        for (int j = 0; j < m; ++j) {
            const auto& us = st.users_of(j);
            if (us.size() < 2 || st.has(istar, j)) continue;
            std::vector<int> pool;
            for (int k = 0; k < n; ++k)
                if (k != istar && !st.has(k, j)) pool.push_back(k);
            for (unsigned mask = 0; mask < (1u << pool.size()); ++mask) {
                AssignmentState cand = st;
                cand.add(istar, j);
                for (size_t b = 0; b < pool.size(); ++b)
                    if (mask >> b & 1u) cand.add(pool[b], j);
                consider(std::move(cand));
            }
        }
        if (!found) break;
        cur = std::move(best);
        cur_min = best_min;
    }
    return cur;
}

BruteForceResult brute_force_assignment(const AvailabilityMatrix& a, Objective obj, const AssignConfig& cfg,
                                        int jobs) {
    a.validate();
    const int n = a.n_su(), m = a.n_ch();
    if (n * m > 18) throw ContractError("brute_force_assignment: N*M must be <= 18");
    if (n > kMaxSharing) throw ContractError("brute_force_assignment: more than 8 SUs exceeds the evaluator cap");
    const long total = 1L << (n * m);
    const long mask = (1L << n) - 1;
    const int shards = std::max(1, std::min<int>(jobs * 4, static_cast<int>(std::min<long>(total, 64))));
    std::vector<BruteForceResult> part(shards);
    std::vector<char> have(shards, 0);
    parallel_for(shards, jobs, [&](int s) {
        long lo = total * s / shards, hi = total * (s + 1) / shards;
        for (long code = lo; code < hi; ++code) {
            AssignmentState st(n, m);
            for (int j = 0; j < m; ++j) {
                long us = (code >> (n * j)) & mask;
                for (int i = 0; i < n; ++i)
                    if (us >> i & 1L) st.add(i, j);
            }
            OverlapResult ov = with_overhead(st, a, cfg);
            ThroughputBreakdown tb = exact_throughput(st, a, ov.delta);
            double v = obj == Objective::sum ? tb.total : tb.min();
            if (!have[s] || v > part[s].value) {
                part[s] = {std::move(ov), v};
                have[s] = 1;
            }
        }
    });
    BruteForceResult best = part[0];
    for (int s = 1; s < shards; ++s)
        if (have[s] && part[s].value > best.value) best = part[s];
    return best;
}

double throughput_error_bound(double eps_p, const AvailabilityMatrix& a, const AssignmentState& st) {
    if (!(eps_p >= 0 && eps_p <= 1)) throw DomainError("throughput_error_bound: eps_p must lie in [0, 1]");
    double s = 0.0;
    for (double pc : contention_probs(a, st)) s += pc;
    return eps_p * s;
}

}  // namespace cogmac
