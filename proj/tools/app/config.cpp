#include "app/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <toml.hpp>

#include "app/csv.hpp"
#include "cogmac/model.hpp"

namespace cogmac::app {

namespace {

enum class Kind { num, integer, flag, str, num_or_list, num_or_matrix, list, matrix };

struct KeySpec {
    const char* key;
    Kind kind;
};

const std::vector<KeySpec> kMacTimingKeys = {
    {"timing.slot", Kind::num},   {"timing.sifs", Kind::num},   {"timing.difs", Kind::num},
    {"timing.pd", Kind::num},     {"timing.ack", Kind::num},    {"timing.rts", Kind::num},
    {"timing.cts", Kind::num},    {"timing.packet", Kind::num}, {"timing.header", Kind::num},
    {"timing.report_slot", Kind::num}, {"timing.cycle", Kind::num},
};

std::vector<KeySpec> schema(Protocol p) {
    std::vector<KeySpec> s;
    switch (p) {
        case Protocol::hdmac_single:
        case Protocol::hdmac_multi:
            s = {{"n_su", Kind::integer},        {"n_ch", Kind::integer},     {"w", Kind::integer},
                 {"m", Kind::integer},           {"tau", Kind::num},          {"handshake", Kind::str},
                 {"f_s", Kind::num},             {"p_idle", Kind::num_or_list}, {"snr", Kind::num_or_list},
                 {"pd_target", Kind::num_or_list}, {"w_max", Kind::integer}};
            s.insert(s.end(), kMacTimingKeys.begin(), kMacTimingKeys.end());
            break;
        case Protocol::assign:
            s = {{"p", Kind::matrix},          {"n_su", Kind::integer},     {"n_ch", Kind::integer},
                 {"p_min", Kind::num},         {"p_max", Kind::num},        {"p_seed", Kind::integer},
                 {"pd", Kind::num_or_matrix},  {"pf", Kind::num_or_matrix}, {"algorithm", Kind::str},
                 {"eps_p", Kind::num},         {"eps_delta", Kind::num},    {"w", Kind::integer},
                 {"timing.theta", Kind::num},  {"timing.rts", Kind::num},   {"timing.cts", Kind::num},
                 {"timing.sifs", Kind::num},   {"timing.sen", Kind::num},   {"timing.syn", Kind::num},
                 {"timing.cycle", Kind::num}};
            break;
        case Protocol::sdcss:
            s = {{"n_su", Kind::integer},       {"n_ch", Kind::integer},       {"snr", Kind::num_or_matrix},
                 {"strong", Kind::matrix},      {"snr_hi", Kind::num},         {"snr_lo", Kind::num},
                 {"p_idle", Kind::num_or_list}, {"pd_target", Kind::num_or_list}, {"sets", Kind::matrix},
                 {"a", Kind::list},             {"tau", Kind::num_or_matrix},  {"p", Kind::num},
                 {"report_error", Kind::num_or_matrix}, {"search", Kind::str}, {"p_grid", Kind::list},
                 {"scan_points", Kind::integer}, {"a_inner", Kind::flag},      {"f_s", Kind::num}};
            s.insert(s.end(), kMacTimingKeys.begin(), kMacTimingKeys.end());
            break;
        case Protocol::fdcmac:
            s = {{"t_s", Kind::num},          {"p_sen", Kind::num},       {"p_sen_grid", Kind::list},
                 {"n_su", Kind::integer},     {"p_access", Kind::num},    {"t_frame", Kind::num},
                 {"t_eva", Kind::num},        {"mean_idle", Kind::num},   {"mean_active", Kind::num},
                 {"p_pu", Kind::num},         {"p_max", Kind::num},       {"zeta", Kind::num},
                 {"xi", Kind::num},           {"pd_target", Kind::num},   {"f_s", Kind::num},
                 {"mode", Kind::str},         {"sensing_rate_with_si", Kind::flag}};
            s.insert(s.end(), kMacTimingKeys.begin(), kMacTimingKeys.end());
            break;
        case Protocol::csma:
            s = {{"p", Kind::num}, {"n0", Kind::integer}};
            s.insert(s.end(), kMacTimingKeys.begin(), kMacTimingKeys.end());
            break;
    }
    return s;
}

const KeySpec* find_key(Protocol p, const std::string& key) {
    static thread_local std::vector<KeySpec> cache;
    cache = schema(p);
    for (const auto& k : cache)
        if (key == k.key) return &k;
    return nullptr;
}

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::num: return "a number";
        case Kind::integer: return "an integer";
        case Kind::flag: return "a boolean";
        case Kind::str: return "a string";
        case Kind::num_or_list: return "a number or a list of numbers";
        case Kind::num_or_matrix: return "a number or a matrix";
        case Kind::list: return "a list of numbers";
        case Kind::matrix: return "a matrix (list of number lists)";
    }
    return "?";
}

bool fits(const Value& v, Kind k) {
    const bool is_num = std::holds_alternative<double>(v);
    switch (k) {
        case Kind::num: return is_num;
        case Kind::integer: {
            if (!is_num) return false;
            double d = std::get<double>(v);
            return std::isfinite(d) && d == std::floor(d);
        }
        case Kind::flag: return std::holds_alternative<bool>(v);
        case Kind::str: return std::holds_alternative<std::string>(v);
        case Kind::num_or_list: return is_num || std::holds_alternative<std::vector<double>>(v);
        case Kind::num_or_matrix: return is_num || std::holds_alternative<std::vector<std::vector<double>>>(v);
        case Kind::list: return std::holds_alternative<std::vector<double>>(v);
        case Kind::matrix: return std::holds_alternative<std::vector<std::vector<double>>>(v);
    }
    return false;
}

[[noreturn]] void fail_at(const std::string& file, int line, const std::string& msg) {
    throw InputError(fmt::format("{}:{}: {}", file, line, msg));
}

int line_of(const toml::node& n) { return static_cast<int>(n.source().begin.line); }

std::optional<double> as_number(const toml::node& n) {
    if (auto i = n.as_integer()) return static_cast<double>(i->get());
    if (auto f = n.as_floating_point()) return f->get();
    return std::nullopt;
}

Value convert(const toml::node& n, const std::string& file, const std::string& what) {
    if (auto d = as_number(n)) return *d;
    if (auto b = n.as_boolean()) return b->get();
    if (auto s = n.as_string()) return s->get();
    if (auto arr = n.as_array()) {
        if (arr->empty()) fail_at(file, line_of(n), what + ": empty array");
        if (arr->front().is_array()) {
            std::vector<std::vector<double>> rows;
            for (const auto& r : *arr) {
                auto ra = r.as_array();
                if (!ra) fail_at(file, line_of(r), what + ": mixed matrix rows");
                std::vector<double> row;
                for (const auto& c : *ra) {
                    auto d = as_number(c);
                    if (!d) fail_at(file, line_of(c), what + ": matrix entries must be numbers");
                    row.push_back(*d);
                }
                if (!rows.empty() && row.size() != rows.front().size())
                    fail_at(file, line_of(r), what + ": ragged matrix");
                rows.push_back(std::move(row));
            }
            return rows;
        }
        std::vector<double> out;
        for (const auto& c : *arr) {
            auto d = as_number(c);
            if (!d) fail_at(file, line_of(c), what + ": list entries must be numbers");
            out.push_back(*d);
        }
        return out;
    }
    fail_at(file, line_of(n), what + ": unsupported value type");
}

Value db_convert(const Value& v) {
    if (auto d = std::get_if<double>(&v)) return db_to_linear(*d);
    if (auto l = std::get_if<std::vector<double>>(&v)) {
        std::vector<double> o;
        for (double x : *l) o.push_back(db_to_linear(x));
        return o;
    }
    if (auto m = std::get_if<std::vector<std::vector<double>>>(&v)) {
        std::vector<std::vector<double>> o;
        for (const auto& r : *m) {
            std::vector<double> row;
            for (double x : r) row.push_back(db_to_linear(x));
            o.push_back(std::move(row));
        }
        return o;
    }
    return v;
}

bool strip_db(std::string& key) {
    if (key.size() > 3 && key.compare(key.size() - 3, 3, "_db") == 0) {
        key.resize(key.size() - 3);
        return true;
    }
    return false;
}

void flatten(const toml::table& t, const std::string& prefix, ExperimentSpec& spec) {
    for (const auto& [k, node] : t) {
        std::string key = prefix + std::string(k.str());
        int line = line_of(node);
        if (auto sub = node.as_table()) {
            flatten(*sub, key + ".", spec);
            continue;
        }
        Value v = convert(node, spec.file, "scenario." + key);
        bool db = strip_db(key);
        if (db) {
            if (std::holds_alternative<std::string>(v) || std::holds_alternative<bool>(v))
                fail_at(spec.file, line, "scenario." + key + "_db: dB keys take numbers");
            v = db_convert(v);
        }
        if (spec.scenario.count(key))
            fail_at(spec.file, line, "scenario." + key + " given twice (plain and _db?)");
        spec.scenario[key] = Entry{std::move(v), line, db};
    }
}

std::string strip_scenario_prefix(std::string path) {
    const std::string pre = "scenario.";
    if (path.rfind(pre, 0) == 0) path = path.substr(pre.size());
    return path;
}

}  // namespace

const char* to_string(Protocol p) {
    switch (p) {
        case Protocol::hdmac_single: return "hdmac_single";
        case Protocol::hdmac_multi: return "hdmac_multi";
        case Protocol::assign: return "assign";
        case Protocol::sdcss: return "sdcss";
        case Protocol::fdcmac: return "fdcmac";
        case Protocol::csma: return "csma";
    }
    return "?";
}

const char* to_string(Mode m) {
    switch (m) {
        case Mode::analytic: return "analytic";
        case Mode::simulate: return "simulate";
        case Mode::both: return "both";
        case Mode::optimize: return "optimize";
    }
    return "?";
}

std::string value_text(const Value& v) {
    struct V {
        std::string operator()(double d) const { return format_number(d); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(const std::vector<double>& l) const {
            std::string o;
            for (size_t i = 0; i < l.size(); ++i) o += (i ? ";" : "") + format_number(l[i]);
            return o;
        }
        std::string operator()(const std::vector<std::vector<double>>& m) const {
            std::string o;
            for (size_t i = 0; i < m.size(); ++i) o += (i ? "|" : "") + (*this)(m[i]);
            return o;
        }
    };
    return std::visit(V{}, v);
}

ExperimentSpec parse_spec(const std::string& text, const std::string& name) {
    ExperimentSpec spec;
    spec.file = name;
    toml::table root;
    try {
        root = toml::parse(text, name);
    } catch (const toml::parse_error& e) {
        fail_at(name, static_cast<int>(e.source().begin.line), std::string(e.description()));
    }

    static const std::set<std::string> top = {"protocol", "mode", "seed", "cycles", "output", "scenario", "sweep"};
    for (const auto& [k, node] : root)
        if (!top.count(std::string(k.str())))
            fail_at(name, line_of(node), fmt::format("unknown top-level key '{}'", k.str()));

    auto proto = root["protocol"].value<std::string>();
    if (!proto) fail_at(name, 1, "missing required key 'protocol'");
    static const std::vector<Protocol> all = {Protocol::hdmac_single, Protocol::hdmac_multi, Protocol::assign,
                                              Protocol::sdcss,        Protocol::fdcmac,      Protocol::csma};
    bool found = false;
    for (Protocol p : all)
        if (*proto == to_string(p)) spec.protocol = p, found = true;
    if (!found) fail_at(name, line_of(*root.get("protocol")), fmt::format("unknown protocol '{}'", *proto));

    if (auto n = root.get("mode")) {
        auto m = n->value<std::string>();
        found = false;
        for (Mode md : {Mode::analytic, Mode::simulate, Mode::both, Mode::optimize})
            if (m && *m == to_string(md)) spec.mode = md, found = true;
        if (!found) fail_at(name, line_of(*n), "mode must be analytic, simulate, both or optimize");
    }
    if (auto n = root.get("seed")) {
        auto i = n->as_integer();
        if (!i || i->get() < 0) fail_at(name, line_of(*n), "seed must be a non-negative integer");
        spec.seed = static_cast<std::uint64_t>(i->get());
    }
    if (auto n = root.get("cycles")) {
        auto i = n->as_integer();
        if (!i || i->get() < 1) fail_at(name, line_of(*n), "cycles must be a positive integer");
        spec.cycles = static_cast<long>(i->get());
    }
    if (auto n = root.get("output")) {
        auto s = n->value<std::string>();
        if (!s) fail_at(name, line_of(*n), "output must be a string path");
        spec.output = *s;
    }
    if (auto n = root.get("scenario")) {
        auto t = n->as_table();
        if (!t) fail_at(name, line_of(*n), "scenario must be a table");
        spec.scenario_line = line_of(*n);
        flatten(*t, "", spec);
    }
    for (const auto& [key, e] : spec.scenario) {
        const KeySpec* ks = find_key(spec.protocol, key);
        if (!ks) fail_at(name, e.line, fmt::format("unknown key 'scenario.{}' for protocol {}", key, *proto));
        if (!fits(e.value, ks->kind))
            fail_at(name, e.line, fmt::format("scenario.{} must be {}", key, kind_name(ks->kind)));
    }

    if (auto n = root.get("sweep")) {
        auto arr = n->as_array();
        if (!arr || !arr->is_array_of_tables()) fail_at(name, line_of(*n), "sweep must be an array of tables ([[sweep]])");
        std::set<std::string> seen;
        for (const auto& item : *arr) {
            const auto& t = *item.as_table();
            int line = line_of(item);
            for (const auto& [k, node] : t)
                if (k.str() != "path" && k.str() != "values")
                    fail_at(name, line_of(node), fmt::format("unknown sweep key '{}'", k.str()));
            auto path = t["path"].value<std::string>();
            if (!path) fail_at(name, line, "sweep entry needs a string 'path'");
            auto vals = t["values"].as_array();
            if (!vals) fail_at(name, line, "sweep entry needs a 'values' array");
            if (vals->empty()) fail_at(name, line_of(*t.get("values")), "sweep grid for '" + *path + "' is empty");
            SweepAxis ax;
            ax.line = line;
            std::string key = strip_scenario_prefix(*path);
            bool db = strip_db(key);
            const KeySpec* ks = find_key(spec.protocol, key);
            if (!ks) fail_at(name, line, fmt::format("sweep path '{}' does not name a {} scenario key", *path, *proto));
            if (!seen.insert(key).second) fail_at(name, line, "sweep path '" + key + "' repeated");
            ax.path = db ? key + "_db" : key;
            for (const auto& v : *vals) {
                Value cv = convert(v, name, "sweep " + *path);
                ax.labels.push_back(value_text(cv));
                if (db) cv = db_convert(cv);
                if (!fits(cv, ks->kind))
                    fail_at(name, line_of(v), fmt::format("sweep values for '{}' must be {}", *path, kind_name(ks->kind)));
                ax.values.push_back(std::move(cv));
            }
            spec.sweep.push_back(std::move(ax));
        }
    }
    return spec;
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(fmt::format("{}: cannot open file", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str(), path);
}

std::map<std::string, Entry> apply_point(const ExperimentSpec& spec, const std::vector<size_t>& index) {
    auto values = spec.scenario;
    for (size_t a = 0; a < spec.sweep.size(); ++a) {
        const SweepAxis& ax = spec.sweep[a];
        std::string key = ax.path;
        bool db = strip_db(key);
        values[key] = Entry{ax.values.at(index.at(a)), ax.line, db};
    }
    return values;
}

Params::Params(const ExperimentSpec& spec, std::map<std::string, Entry> values)
    : spec_(spec), values_(std::move(values)) {}

void Params::fail(const std::string& key, const std::string& msg) const {
    auto it = values_.find(key);
    int line = it != values_.end() ? it->second.line : spec_.scenario_line;
    fail_at(spec_.file, line, fmt::format("scenario.{}: {}", key, msg));
}

const Entry& Params::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
        fail_at(spec_.file, spec_.scenario_line,
                fmt::format("missing required key 'scenario.{}' for {} in mode {}", key, to_string(spec_.protocol),
                            to_string(spec_.mode)));
    return it->second;
}

double Params::num(const std::string& key) const {
    const Entry& e = get(key);
    if (auto d = std::get_if<double>(&e.value)) return *d;
    fail(key, "expected a number");
}

double Params::num(const std::string& key, double def) const { return has(key) ? num(key) : def; }

long Params::integer(const std::string& key) const {
    double d = num(key);
    if (d != std::floor(d) || std::fabs(d) > 1e15) fail(key, "expected an integer");
    return static_cast<long>(d);
}

long Params::integer(const std::string& key, long def) const { return has(key) ? integer(key) : def; }

bool Params::flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    if (auto b = std::get_if<bool>(&get(key).value)) return *b;
    fail(key, "expected a boolean");
}

std::string Params::str(const std::string& key, const std::string& def) const {
    if (!has(key)) return def;
    if (auto s = std::get_if<std::string>(&get(key).value)) return *s;
    fail(key, "expected a string");
}

std::vector<double> Params::list(const std::string& key) const {
    const Entry& e = get(key);
    if (auto l = std::get_if<std::vector<double>>(&e.value)) return *l;
    fail(key, "expected a list of numbers");
}

std::vector<std::vector<double>> Params::matrix(const std::string& key) const {
    const Entry& e = get(key);
    if (auto m = std::get_if<std::vector<std::vector<double>>>(&e.value)) return *m;
    fail(key, "expected a matrix");
}

std::vector<double> Params::per(const std::string& key, int n, double def) const {
    if (!has(key)) return std::vector<double>(n, def);
    const Entry& e = get(key);
    if (auto d = std::get_if<double>(&e.value)) return std::vector<double>(n, *d);
    auto l = list(key);
    if (static_cast<int>(l.size()) != n) fail(key, fmt::format("expected {} entries, got {}", n, l.size()));
    return l;
}

std::vector<std::vector<double>> Params::grid(const std::string& key, int r, int c, double def) const {
    if (!has(key)) return std::vector<std::vector<double>>(r, std::vector<double>(c, def));
    const Entry& e = get(key);
    if (auto d = std::get_if<double>(&e.value)) return std::vector<std::vector<double>>(r, std::vector<double>(c, *d));
    auto m = matrix(key);
    if (static_cast<int>(m.size()) != r || static_cast<int>(m.front().size()) != c)
        fail(key, fmt::format("expected a {}x{} matrix, got {}x{}", r, c, m.size(), m.front().size()));
    return m;
}

}  // namespace cogmac::app
