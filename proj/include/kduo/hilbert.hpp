#pragma once

#include <complex>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <vector>

#include "kduo/params.hpp"

namespace kduo {

using cplx = std::complex<double>;

enum class Rep : std::uint8_t { PosPos = 0, MomLevel = 1 };

// Raised on representation misuse and checkpoint mismatches.
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Grids {
    std::vector<double> R;        // R_j = 2 pi j / N_R, j = 0..N_R-1
    std::vector<std::int64_t> l;  // signed momentum index, FFT order
    std::vector<double> P;        // P_l = hbar * l
    std::vector<double> r;        // interior well points, walls excluded
};

Grids make_grids(const ModelParams& p);

// Product-space coefficient grid, row-major [R or l][r or n]; the buffer is
// 64-byte aligned so FFTW new-array execution stays on the aligned code path.
class QuantumState {
  public:
    QuantumState(const ModelParams& p, Rep rep);
    ModelParams params;
    Rep rep;
    std::int64_t kick_count = 0;

    cplx* data() { return data_.get(); }
    const cplx* data() const { return data_.get(); }
    std::size_t size() const { return n_; }
    cplx& at(std::int64_t i, std::int64_t j) { return data_[i * params.N_r + j]; }
    const cplx& at(std::int64_t i, std::int64_t j) const {
        return data_[i * params.N_r + j];
    }

    QuantumState(const QuantumState& other);
    QuantumState& operator=(const QuantumState& other);
    QuantumState(QuantumState&&) noexcept = default;
    QuantumState& operator=(QuantumState&&) noexcept = default;

  private:
    struct FreeDeleter {
        void operator()(cplx* p) const { std::free(p); }
    };
    std::size_t n_ = 0;
    std::unique_ptr<cplx[], FreeDeleter> data_;
};

// Squared norm with the representation's weight: plain sum of |c|^2 in
// MOM_LEVEL, quadrature weight (2pi/N_R)(2w/(N_r+1)) in POS_POS.
double norm_sq(const QuantumState& s);

// Uniform in R (pure l=0) x well ground state (pure n=1), in MOM_LEVEL.
QuantumState initial_state(const ModelParams& p);

// Unitary maps between representations for one fixed grid shape. Owns FFTW
// plans; plan creation is internally serialized. A Transformer may be shared
// across sequential calls but not across concurrent transform calls.
class Transformer {
  public:
    Transformer(std::int64_t N_R, std::int64_t N_r);
    ~Transformer();
    Transformer(const Transformer&) = delete;
    Transformer& operator=(const Transformer&) = delete;

    void to_mom_level(QuantumState& s) const;
    void to_pos_pos(QuantumState& s) const;

    std::int64_t N_R() const { return NR_; }
    std::int64_t N_r() const { return Nr_; }

  private:
    std::int64_t NR_, Nr_;
    void* fft_fwd_ = nullptr;   // fftw_plan, complex DFT along the R axis
    void* fft_bwd_ = nullptr;
    void* dst_ = nullptr;       // fftw_plan, RODFT00 along the r axis
    double scale_to_mom_, scale_to_pos_;
    void run_dst(cplx* base) const;
};

}  // namespace kduo
