#include "kduo/propagator.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "kduo/io.hpp"
#include "kduo/reduce.hpp"

namespace kduo {

namespace {
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

FreePhases make_free_phases(const ModelParams& p) {
    FreePhases f;
    f.com.resize(static_cast<std::size_t>(p.N_R));
    for (std::int64_t i = 0; i < p.N_R; ++i) {
        const double l = static_cast<double>(i < p.N_R / 2 ? i : i - p.N_R);
        f.com[static_cast<std::size_t>(i)] =
            std::polar(1.0, -p.hbar * l * l * p.T / (2.0 * p.M));
    }
    const auto energies = box_spectrum(p);
    f.internal.resize(energies.size());
    for (std::size_t j = 0; j < energies.size(); ++j)
        f.internal[j] = std::polar(1.0, -energies[j] * p.T / p.hbar);
    return f;
}

KickPhases make_kick_phases(const ModelParams& p, bool literal) {
    KickPhases k;
    k.N_R = p.N_R;
    k.N_r = p.N_r;
    k.phase.resize(static_cast<std::size_t>(p.N_R) * static_cast<std::size_t>(p.N_r));
    const Grids g = make_grids(p);
    const double strength = literal ? p.K : p.K / p.hbar;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < p.N_R; ++i) {
        const double cR = std::cos(g.R[static_cast<std::size_t>(i)]);
        for (std::int64_t j = 0; j < p.N_r; ++j)
            k.phase[static_cast<std::size_t>(i * p.N_r + j)] = std::polar(
                1.0, -strength * cR * std::cos(0.5 * g.r[static_cast<std::size_t>(j)]));
    }
    return k;
}

void check_guard(const QuantumState& s, const GuardConfig& g) {
    if (!g.enabled) return;
    if (s.rep != Rep::MomLevel) throw StateError("check_guard: not in MOM_LEVEL");
    const auto NR = s.params.N_R;
    const auto Nr = s.params.N_r;
    const auto cut = static_cast<std::int64_t>(g.window_frac * static_cast<double>(NR));
    const cplx* d = s.data();
    const double tail = pairwise_sum(static_cast<std::size_t>(NR), [&](std::size_t i) {
        const std::int64_t l = static_cast<std::int64_t>(i) < NR / 2
                                   ? static_cast<std::int64_t>(i)
                                   : static_cast<std::int64_t>(i) - NR;
        if (std::llabs(l) <= cut) return 0.0;
        const cplx* row = d + static_cast<std::int64_t>(i) * Nr;
        return pairwise_sum(static_cast<std::size_t>(Nr),
                            [row](std::size_t j) { return std::norm(row[j]); });
    });
    if (tail > g.tail_tol)
        throw NumericGuardError(
            "momentum support reached |l| > " + std::to_string(cut) + " of N_R=" +
            std::to_string(NR) + " (tail mass " + std::to_string(tail) +
            " > tol " + std::to_string(g.tail_tol) +
            ") at kick " + std::to_string(s.kick_count) +
            "; enlarge N_R or adjust the guard window");
}

void free_step(QuantumState& s, const Transformer& t, const FreePhases& f) {
    if (s.rep != Rep::MomLevel) t.to_mom_level(s);
    const auto NR = s.params.N_R;
    const auto Nr = s.params.N_r;
    cplx* d = s.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < NR; ++i) {
        const cplx ci = f.com[static_cast<std::size_t>(i)];
        cplx* row = d + i * Nr;
        for (std::int64_t j = 0; j < Nr; ++j)
            row[j] *= ci * f.internal[static_cast<std::size_t>(j)];
    }
}

void kick_step(QuantumState& s, const Transformer& t, const KickPhases& k) {
    if (s.rep != Rep::PosPos) t.to_pos_pos(s);
    cplx* d = s.data();
    const cplx* ph = k.phase.data();
    const auto n = static_cast<std::int64_t>(s.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) d[i] *= ph[i];
    ++s.kick_count;
}

void floquet_step(QuantumState& s, const Transformer& t, const FreePhases& f,
                  const KickPhases& k) {
    free_step(s, t, f);
    kick_step(s, t, k);
}

EvolveResult evolve(QuantumState& s, const Transformer& t, std::int64_t n,
                    const StateObserver& observer, const EvolveOptions& opts) {
    const FreePhases free = make_free_phases(s.params);
    const KickPhases kick = make_kick_phases(s.params);
    EvolveResult res;
    for (std::int64_t step = 0; step < n; ++step) {
        floquet_step(s, t, free, kick);
        ++res.kicks_done;
        const bool scheduled =
            opts.record_every > 0 && s.kick_count % opts.record_every == 0;
        if (scheduled || step == n - 1) {
            t.to_mom_level(s);  // records happen at n T + 0+, in MOM_LEVEL
            check_guard(s, opts.guard);
            if (scheduled && observer && !observer(s.kick_count, s)) break;
        }
        if (opts.interrupt && *opts.interrupt) {
            res.interrupted = true;
            if (s.rep != Rep::MomLevel) t.to_mom_level(s);
            if (opts.checkpoint_path) write_checkpoint(*opts.checkpoint_path, s);
            break;
        }
    }
    if (s.rep != Rep::MomLevel) t.to_mom_level(s);
    return res;
}

SingleRotor::SingleRotor(const ModelParams& p, bool literal) : p_(p) {
    com_.resize(static_cast<std::size_t>(p.N_R));
    kick_.resize(static_cast<std::size_t>(p.N_R));
    for (std::int64_t i = 0; i < p.N_R; ++i) {
        const double l = static_cast<double>(i < p.N_R / 2 ? i : i - p.N_R);
        com_[static_cast<std::size_t>(i)] =
            std::polar(1.0, -p.hbar * l * l * p.T / (2.0 * p.M));
        const double R = 2.0 * std::numbers::pi * static_cast<double>(i) /
                         static_cast<double>(p.N_R);
        const double strength = literal ? p.K : p.K / p.hbar;
        kick_[static_cast<std::size_t>(i)] = std::polar(1.0, -strength * std::cos(R));
    }
    std::lock_guard<std::mutex> lock(plan_mutex());
    std::vector<cplx> buf(static_cast<std::size_t>(p.N_R));
    auto* fb = reinterpret_cast<fftw_complex*>(buf.data());
    fwd_ = fftw_plan_dft_1d(static_cast<int>(p.N_R), fb, fb, FFTW_FORWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_1d(static_cast<int>(p.N_R), fb, fb, FFTW_BACKWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!fwd_ || !bwd_) throw std::runtime_error("SingleRotor: FFTW plan failed");
}

SingleRotor::~SingleRotor() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

std::vector<cplx> SingleRotor::initial() const {
    std::vector<cplx> a(static_cast<std::size_t>(p_.N_R), cplx{0.0, 0.0});
    a[0] = 1.0;
    return a;
}

void SingleRotor::step(std::vector<cplx>& amps) const {
    const auto NR = static_cast<std::size_t>(p_.N_R);
    if (amps.size() != NR) throw StateError("SingleRotor::step: size mismatch");
    for (std::size_t i = 0; i < NR; ++i) amps[i] *= com_[i];
    auto* fb = reinterpret_cast<fftw_complex*>(amps.data());
    // unnormalized backward FFT to the R grid, kick, forward back; the 1/N_R
    // rescale is folded into one pass
    fftw_execute_dft(static_cast<fftw_plan>(bwd_), fb, fb);
    for (std::size_t i = 0; i < NR; ++i) amps[i] *= kick_[i];
    fftw_execute_dft(static_cast<fftw_plan>(fwd_), fb, fb);
    const double scale = 1.0 / static_cast<double>(NR);
    for (std::size_t i = 0; i < NR; ++i) amps[i] *= scale;
}

EvolveResult SingleRotor::evolve(std::vector<cplx>& amps, std::int64_t n,
                                 const Observer& observer,
                                 const GuardConfig& guard,
                                 std::int64_t record_every) const {
    EvolveResult res;
    for (std::int64_t step = 1; step <= n; ++step) {
        this->step(amps);
        ++res.kicks_done;
        if (record_every > 0 && step % record_every == 0) {
            if (guard.enabled) {
                const auto NR = p_.N_R;
                const auto cut =
                    static_cast<std::int64_t>(guard.window_frac * static_cast<double>(NR));
                const double tail =
                    pairwise_sum(static_cast<std::size_t>(NR), [&](std::size_t i) {
                        const std::int64_t l = static_cast<std::int64_t>(i) < NR / 2
                                                   ? static_cast<std::int64_t>(i)
                                                   : static_cast<std::int64_t>(i) - NR;
                        return std::llabs(l) > cut ? std::norm(amps[i]) : 0.0;
                    });
                if (tail > guard.tail_tol)
                    throw NumericGuardError(
                        "single rotor momentum support exceeded |l| > " +
                        std::to_string(cut) + " at kick " + std::to_string(step));
            }
            if (observer && !observer(step, amps)) break;
        }
    }
    return res;
}

}  // namespace kduo
