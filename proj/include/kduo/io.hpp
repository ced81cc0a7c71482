#pragma once

#include <string>
#include <vector>

#include "kduo/hilbert.hpp"
#include "kduo/observables.hpp"

namespace kduo {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Checkpoint layout (little-endian):
//   magic "KDUO" | version u32 = 1 | N_R u64 | N_r u64 | rep u8 |
//   kick_count u64 | m M mu k K T hbar w n_kicks as 9 doubles |
//   N_R * N_r complex doubles, re/im interleaved, row-major [R][r].
// N_R and N_r live in the fixed header, so the params block carries the
// remaining numeric fields in declaration order.
void write_checkpoint(const std::string& path, const QuantumState& s);
QuantumState read_checkpoint(const std::string& path);

// Two-column CSV "P,f".
void write_distribution_csv(const std::string& path, const Distribution& d);

// Ensemble snapshot CSV with header "R,P,r,p", one particle per row.
void write_ensemble_csv(const std::string& path, const std::vector<double>& R,
                        const std::vector<double>& P,
                        const std::vector<double>& r,
                        const std::vector<double>& p);

void write_timeseries_csv(const std::string& path, const TimeSeries& ts);

std::string format_g17(double v);

}  // namespace kduo
