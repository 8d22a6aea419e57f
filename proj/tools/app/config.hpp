#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace cogmac::app {

// bad file, bad key, bad value: exit code 2
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Protocol { hdmac_single, hdmac_multi, assign, sdcss, fdcmac, csma };
enum class Mode { analytic, simulate, both, optimize };

const char* to_string(Protocol p);
const char* to_string(Mode m);

// one scenario value after loading; numbers are doubles, matrices are rows of doubles
using Value = std::variant<double, bool, std::string, std::vector<double>, std::vector<std::vector<double>>>;

struct Entry {
    Value value;
    int line = 0;
    bool from_db = false;  // given as <key>_db and converted to linear
};

struct SweepAxis {
    std::string path;  // scenario key, optionally prefixed "scenario."
    std::vector<Value> values;       // linear after _db conversion
    std::vector<std::string> labels;  // as written, for the CSV column
    int line = 0;
};

struct ExperimentSpec {
    std::string file;  // for messages
    Protocol protocol = Protocol::hdmac_single;
    Mode mode = Mode::analytic;
    std::optional<std::uint64_t> seed;
    std::optional<long> cycles;
    std::optional<std::string> output;
    std::map<std::string, Entry> scenario;  // dotted keys, e.g. "timing.slot"; _db already folded
    int scenario_line = 0;
    std::vector<SweepAxis> sweep;
};

ExperimentSpec load_spec(const std::string& path);
ExperimentSpec parse_spec(const std::string& text, const std::string& name);

// typed, line-anchored access to one scenario point
class Params {
public:
    Params(const ExperimentSpec& spec, std::map<std::string, Entry> values);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    double num(const std::string& key) const;
    double num(const std::string& key, double def) const;
    long integer(const std::string& key) const;
    long integer(const std::string& key, long def) const;
    bool flag(const std::string& key, bool def) const;
    std::string str(const std::string& key, const std::string& def) const;
    std::vector<double> list(const std::string& key) const;
    std::vector<std::vector<double>> matrix(const std::string& key) const;
    // scalar broadcast to n entries, or a list of exactly n
    std::vector<double> per(const std::string& key, int n, double def) const;
    // scalar broadcast to r x c, or an r x c matrix
    std::vector<std::vector<double>> grid(const std::string& key, int r, int c, double def) const;

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const;
    const ExperimentSpec& spec() const { return spec_; }

private:
    const Entry& get(const std::string& key) const;
    const ExperimentSpec& spec_;
    std::map<std::string, Entry> values_;
};

// scenario values with one sweep combination applied
std::map<std::string, Entry> apply_point(const ExperimentSpec& spec, const std::vector<size_t>& index);

std::string value_text(const Value& v);

}  // namespace cogmac::app
