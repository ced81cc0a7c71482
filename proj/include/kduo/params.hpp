#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace kduo {

// Raised by parameter validation and config parsing; carries a message
// suitable for surfacing through the C API / CLI (exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Physical and numerical parameters of the coupled pair in center-of-mass
// form. Derived fields always satisfy M = 2m, mu = m/2, K = 2k.
struct ModelParams {
    double m = 0.5;       // constituent mass
    double M = 1.0;       // total mass, 2m
    double mu = 0.25;     // reduced mass, m/2
    double k = 2.5;       // per-particle kick strength
    double K = 5.0;       // center-of-mass kick strength, 2k
    double T = 1.0;       // kick period
    double hbar = 0.07;   // effective Planck constant
    double w = 0.5;       // half-width of the internal well, walls at +-w
    std::int64_t N_R = 16384;  // center-of-mass basis size (even)
    std::int64_t N_r = 256;    // internal basis size
    std::int64_t n_kicks = 500;
};

// Validates inputs and fills in the derived masses and kick strength.
// Rejects non-positive values, odd N_R, and w > pi (the internal separation
// would exceed one angular period).
ModelParams derive_params(double m, double k, double T, double hbar, double w,
                          std::int64_t N_R, std::int64_t N_r,
                          std::int64_t n_kicks);

// Re-validates a fully populated struct (used after config overrides).
void validate(const ModelParams& p);

// Infinite-well levels E_n = n^2 pi^2 hbar^2 / (8 mu w^2), n = 1..N_r.
std::vector<double> box_spectrum(const ModelParams& p);

// Plain key=value file: one pair per line, '#' starts a comment, blank lines
// ignored. Later keys override earlier ones. Throws ConfigError on malformed
// lines; key validation is the caller's job.
std::map<std::string, std::string> parse_kv_file(const std::string& path);
std::map<std::string, std::string> parse_kv_text(const std::string& text);

}  // namespace kduo
