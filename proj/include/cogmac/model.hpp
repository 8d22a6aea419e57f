#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cogmac {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
// caller broke a precondition (shape, size, cap)
struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
// root finding / quadrature / iteration failures
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double q(double x);
double q_inv(double p);

double db_to_linear(double db);
double linear_to_db(double r);

// seconds -> integer slot count, rejects values that are not a whole number of slots
long slots_of(double seconds, double slot);

void check_probability(double p, const char* what);

struct PuChannelStats {
    double p_idle = 1.0;
    double p_busy = 0.0;
    std::optional<double> mean_idle;
    std::optional<double> mean_active;

    static PuChannelStats from_idle(double p_idle);
    // P(H0) = mean_idle / (mean_idle + mean_active)
    static PuChannelStats from_means(double mean_idle, double mean_active);
    void validate() const;
};

struct SnrGrid {
    int n_su = 0;
    int n_ch = 0;
    std::vector<double> values;  // row major (su, channel), linear

    SnrGrid() = default;
    SnrGrid(int n_su, int n_ch, double fill);
    double at(int su, int ch) const { return values[static_cast<size_t>(su) * n_ch + ch]; }
    double& at(int su, int ch) { return values[static_cast<size_t>(su) * n_ch + ch]; }
    void validate() const;
};

struct MacTiming {
    double slot = 20e-6;
    double sifs = 0, difs = 0, pd = 0, ack = 0, rts = 0, cts = 0;
    double packet = 0;
    double header = 0;
    double report_slot = 0;
    double cycle = 0;
    void validate() const;
};

struct Power {
    double linear = 0;
    static Power from_db(double db) { return Power{db_to_linear(db)}; }
    double db() const { return linear_to_db(linear); }
};

}  // namespace cogmac
