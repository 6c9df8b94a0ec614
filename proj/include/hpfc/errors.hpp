#pragma once

#include <stdexcept>
#include <string>

namespace hpfc {

// Bad arguments, ill-formed configs, violated preconditions.  CLI exit code 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Algorithm failure inside a numeric routine (singular solve, QR stall, ...).
// CLI exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Pole placement on a rank-deficient controllability matrix.
struct UncontrollableError : NumericError {
    int rank;  // achieved rank
    int n;     // state dimension
    UncontrollableError(const std::string& msg, int rank_, int n_)
        : NumericError(msg), rank(rank_), n(n_) {}
};

// Load pressure reached the supply limit, the orifice law is outside its domain.
struct PressureLimitError : NumericError {
    explicit PressureLimitError(const std::string& msg) : NumericError(msg) {}
};

// Non-finite value produced while integrating.  CLI exit code 4.
struct IntegrationError : std::runtime_error {
    double t;       // simulated time at failure [s]
    int component;  // index of the first non-finite state component
    IntegrationError(const std::string& msg, double t_, int component_)
        : std::runtime_error(msg), t(t_), component(component_) {}
};

// Warning sink.  Default prints to stderr; tests may swap it to capture output.
using WarnFn = void (*)(const std::string&);
void log_warning(const std::string& msg);
void set_warning_handler(WarnFn fn);  // nullptr restores the default

}  // namespace hpfc
