#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kduo/hilbert.hpp"
#include "kduo/params.hpp"

namespace kduo {

// Raised when the momentum-support aliasing guard trips (exit code 3).
struct NumericGuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One-period phase factors. com[l] = exp(-i hbar l^2 T / 2M) on the FFT-ordered
// momentum grid, internal[n] = exp(-i E_n T / hbar).
struct FreePhases {
    std::vector<cplx> com;
    std::vector<cplx> internal;
};

// kick[j * N_r + j'] = exp(-i (K/hbar) cos(R_j) cos(r_j'/2)); literal mode
// drops the 1/hbar (the kick map exactly as printed, kept for comparison).
struct KickPhases {
    std::vector<cplx> phase;
    std::int64_t N_R = 0, N_r = 0;
};

FreePhases make_free_phases(const ModelParams& p);
KickPhases make_kick_phases(const ModelParams& p, bool literal = false);

// Mass beyond |l| > window_frac * N_R must stay below tail_tol; checked at
// record points. Wrap-around past the grid edge silently corrupts diffusion
// measurements, so violations abort the run.
struct GuardConfig {
    bool enabled = true;
    double window_frac = 0.25;
    double tail_tol = 1e-9;
};

void check_guard(const QuantumState& s, const GuardConfig& g);

// Split-operator pieces. free_step and kick_step convert representation as
// needed; kick_step increments kick_count.
void free_step(QuantumState& s, const Transformer& t, const FreePhases& f);
void kick_step(QuantumState& s, const Transformer& t, const KickPhases& k);
void floquet_step(QuantumState& s, const Transformer& t, const FreePhases& f,
                  const KickPhases& k);

// Observer invoked at scheduled kicks with the state in MOM_LEVEL (records at
// n T + 0+, i.e. after the kick). Returning false stops the evolution early.
using StateObserver = std::function<bool(std::int64_t n, const QuantumState&)>;

struct EvolveOptions {
    std::int64_t record_every = 1;
    GuardConfig guard;
    // Cooperative interrupt: when *interrupt becomes nonzero the loop stops
    // after the current step and, if checkpoint_path is set, writes the state
    // there before returning.
    const volatile int* interrupt = nullptr;
    std::optional<std::string> checkpoint_path;
};

struct EvolveResult {
    std::int64_t kicks_done = 0;
    bool interrupted = false;
};

// Applies floquet_step n times starting from the state's current kick_count.
EvolveResult evolve(QuantumState& s, const Transformer& t, std::int64_t n,
                    const StateObserver& observer, const EvolveOptions& opts);

// Standard quantum kicked rotor on the R grid alone (the w = 0 baseline).
class SingleRotor {
  public:
    SingleRotor(const ModelParams& p, bool literal = false);
    ~SingleRotor();
    SingleRotor(const SingleRotor&) = delete;
    SingleRotor& operator=(const SingleRotor&) = delete;

    // amps: N_R complex amplitudes over momentum index l (FFT order).
    void step(std::vector<cplx>& amps) const;
    std::vector<cplx> initial() const;  // pure l = 0

    using Observer = std::function<bool(std::int64_t n, const std::vector<cplx>&)>;
    EvolveResult evolve(std::vector<cplx>& amps, std::int64_t n,
                        const Observer& observer, const GuardConfig& guard,
                        std::int64_t record_every = 1) const;

    const ModelParams& params() const { return p_; }

  private:
    ModelParams p_;
    std::vector<cplx> com_, kick_;
    void* fwd_ = nullptr;  // fftw_plan
    void* bwd_ = nullptr;
};

}  // namespace kduo
