#include "kduo/hilbert.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#include "kduo/reduce.hpp"

namespace kduo {

namespace {
// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

cplx* alloc_aligned(std::size_t count) {
    std::size_t bytes = (count * sizeof(cplx) + 63) / 64 * 64;
    void* p = std::aligned_alloc(64, bytes);
    if (!p) throw std::bad_alloc();
    return static_cast<cplx*>(p);
}
}  // namespace

Grids make_grids(const ModelParams& p) {
    Grids g;
    const auto NR = static_cast<std::size_t>(p.N_R);
    const auto Nr = static_cast<std::size_t>(p.N_r);
    g.R.resize(NR);
    g.l.resize(NR);
    g.P.resize(NR);
    g.r.resize(Nr);
    for (std::size_t j = 0; j < NR; ++j) {
        g.R[j] = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(NR);
        const auto sj = static_cast<std::int64_t>(j);
        g.l[j] = sj < p.N_R / 2 ? sj : sj - p.N_R;  // FFT index wrap
        g.P[j] = p.hbar * static_cast<double>(g.l[j]);
    }
    for (std::size_t j = 0; j < Nr; ++j)
        g.r[j] = -p.w + static_cast<double>(j + 1) * 2.0 * p.w /
                            static_cast<double>(p.N_r + 1);
    return g;
}

QuantumState::QuantumState(const ModelParams& p, Rep rep_) : params(p), rep(rep_) {
    n_ = static_cast<std::size_t>(p.N_R) * static_cast<std::size_t>(p.N_r);
    data_.reset(alloc_aligned(n_));
    std::memset(data_.get(), 0, n_ * sizeof(cplx));
}

QuantumState::QuantumState(const QuantumState& other)
    : params(other.params), rep(other.rep), kick_count(other.kick_count),
      n_(other.n_) {
    data_.reset(alloc_aligned(n_));
    std::memcpy(data_.get(), other.data_.get(), n_ * sizeof(cplx));
}

QuantumState& QuantumState::operator=(const QuantumState& other) {
    if (this == &other) return *this;
    if (n_ != other.n_) data_.reset(alloc_aligned(other.n_));
    params = other.params;
    rep = other.rep;
    kick_count = other.kick_count;
    n_ = other.n_;
    std::memcpy(data_.get(), other.data_.get(), n_ * sizeof(cplx));
    return *this;
}

double norm_sq(const QuantumState& s) {
    const cplx* d = s.data();
    double raw = pairwise_sum(s.size(), [d](std::size_t i) { return std::norm(d[i]); });
    if (s.rep == Rep::MomLevel) return raw;
    const double weight = (2.0 * std::numbers::pi / static_cast<double>(s.params.N_R)) *
                          (2.0 * s.params.w / static_cast<double>(s.params.N_r + 1));
    return weight * raw;
}

QuantumState initial_state(const ModelParams& p) {
    QuantumState s(p, Rep::MomLevel);
    s.at(0, 0) = 1.0;  // l = 0, n = 1
    return s;
}

Transformer::Transformer(std::int64_t N_R, std::int64_t N_r) : NR_(N_R), Nr_(N_r) {
    if (N_R <= 0 || N_r <= 0 || N_R % 2 != 0)
        throw ConfigError("Transformer: invalid grid shape");
    // Unitary normalizations, fixed by requiring that the discrete maps send
    // orthonormal grid samples to orthonormal coefficients:
    //   to MOM_LEVEL:  DST-I * sqrt(w)/(N_r+1), then FFT * sqrt(2pi)/N_R
    //   to POS_POS:    DST-I / (2 sqrt(w)),     then unnormalized IFFT / sqrt(2pi)
    // (w cancels in scale products used here; w enters only through norms.)
    scale_to_mom_ = std::sqrt(2.0 * std::numbers::pi) / static_cast<double>(NR_);
    scale_to_pos_ = 1.0 / std::sqrt(2.0 * std::numbers::pi);

    std::lock_guard<std::mutex> lock(plan_mutex());
    cplx* buf = alloc_aligned(static_cast<std::size_t>(NR_) * Nr_);
    auto* fbuf = reinterpret_cast<fftw_complex*>(buf);
    const int nR[1] = {static_cast<int>(NR_)};
    fft_fwd_ = fftw_plan_many_dft(1, nR, static_cast<int>(Nr_), fbuf, nullptr,
                                  static_cast<int>(Nr_), 1, fbuf, nullptr,
                                  static_cast<int>(Nr_), 1, FFTW_FORWARD,
                                  FFTW_ESTIMATE);
    fft_bwd_ = fftw_plan_many_dft(1, nR, static_cast<int>(Nr_), fbuf, nullptr,
                                  static_cast<int>(Nr_), 1, fbuf, nullptr,
                                  static_cast<int>(Nr_), 1, FFTW_BACKWARD,
                                  FFTW_ESTIMATE);
    // r-axis DST on the real and imaginary grids separately: stride 2 doubles,
    // executed once at the buffer base and once at base+1, hence UNALIGNED.
    const int nr[1] = {static_cast<int>(Nr_)};
    const fftw_r2r_kind kind[1] = {FFTW_RODFT00};
    auto* dbuf = reinterpret_cast<double*>(buf);
    dst_ = fftw_plan_many_r2r(1, nr, static_cast<int>(NR_), dbuf, nullptr, 2,
                              static_cast<int>(2 * Nr_), dbuf, nullptr, 2,
                              static_cast<int>(2 * Nr_), kind,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
    std::free(buf);
    if (!fft_fwd_ || !fft_bwd_ || !dst_)
        throw std::runtime_error("Transformer: FFTW plan creation failed");
}

Transformer::~Transformer() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    if (fft_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fft_fwd_));
    if (fft_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(fft_bwd_));
    if (dst_) fftw_destroy_plan(static_cast<fftw_plan>(dst_));
}

void Transformer::run_dst(cplx* base) const {
    auto plan = static_cast<fftw_plan>(dst_);
    auto* d = reinterpret_cast<double*>(base);
    fftw_execute_r2r(plan, d, d);          // real parts
    fftw_execute_r2r(plan, d + 1, d + 1);  // imaginary parts
}

void Transformer::to_mom_level(QuantumState& s) const {
    if (s.rep != Rep::MomLevel && s.rep != Rep::PosPos)
        throw StateError("to_mom_level: unknown representation");
    if (s.rep == Rep::MomLevel)
        throw StateError("to_mom_level: state already in MOM_LEVEL");
    if (s.params.N_R != NR_ || s.params.N_r != Nr_)
        throw StateError("to_mom_level: grid shape mismatch");
    run_dst(s.data());
    auto* fbuf = reinterpret_cast<fftw_complex*>(s.data());
    fftw_execute_dft(static_cast<fftw_plan>(fft_fwd_), fbuf, fbuf);
    const double scale = scale_to_mom_ * std::sqrt(s.params.w) /
                         static_cast<double>(Nr_ + 1);
    cplx* d = s.data();
    const std::int64_t n = static_cast<std::int64_t>(s.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) d[i] *= scale;
    s.rep = Rep::MomLevel;
}

void Transformer::to_pos_pos(QuantumState& s) const {
    if (s.rep != Rep::MomLevel)
        throw StateError("to_pos_pos: state not in MOM_LEVEL");
    if (s.params.N_R != NR_ || s.params.N_r != Nr_)
        throw StateError("to_pos_pos: grid shape mismatch");
    run_dst(s.data());
    auto* fbuf = reinterpret_cast<fftw_complex*>(s.data());
    fftw_execute_dft(static_cast<fftw_plan>(fft_bwd_), fbuf, fbuf);
    const double scale = scale_to_pos_ / (2.0 * std::sqrt(s.params.w));
    cplx* d = s.data();
    const std::int64_t n = static_cast<std::int64_t>(s.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) d[i] *= scale;
    s.rep = Rep::PosPos;
}

}  // namespace kduo
