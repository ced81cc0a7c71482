#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "kduo/params.hpp"
#include "kduo/rng.hpp"

namespace kduo {

struct Particle {
    double R = 0.0;  // angle in [0, 2pi)
    double P = 0.0;
    double r = 0.0;  // separation in [-w, w]
    double p = 0.0;
};

// Structure-of-arrays ensemble; particle i is (R[i], P[i], r[i], p[i]).
struct ClassicalEnsemble {
    std::vector<double> R, P, r, p;
    std::uint64_t seed = 0;
    std::int64_t kick_count = 0;
    ModelParams params;

    std::size_t size() const { return R.size(); }
};

// R ~ U[0, 2pi), P = 0, r from density cos^2(pi r / 2w) / w via inverse CDF
// on a tabulated grid, p = +-p0 = +-pi hbar / (2w) with equal probability.
// Draw order per particle: R, then the CDF uniform, then the sign.
ClassicalEnsemble sample_ensemble(const ModelParams& p, std::size_t count,
                                  std::uint64_t seed);

// Free flight for one period: R advances mod 2pi; r bounces between the walls
// via the closed-form triangle fold (|p| conserved exactly, sign flips once
// per reflection).
Particle free_flight(Particle q, const ModelParams& p);

// Impulses from the kick potential K cos(R) cos(r/2):
// P += K sin(R) cos(r/2), p += (K/2) cos(R) sin(r/2).
Particle kick(Particle q, const ModelParams& p);

// free_flight then kick for every particle; increments kick_count.
void step_ensemble(ClassicalEnsemble& e);

// Observer runs after each scheduled kick; returning false stops early.
using EnsembleObserver =
    std::function<bool(std::int64_t n, const ClassicalEnsemble&)>;
void evolve_ensemble(ClassicalEnsemble& e, std::int64_t n,
                     const EnsembleObserver& observer,
                     std::int64_t record_every = 1);

// Single-rotor baseline (w -> 0): the standard map with the same ordering.
void standard_map_step(double& R, double& P, const ModelParams& p);

// R ~ U[0, 2pi), P = 0; one uniform draw per particle.
ClassicalEnsemble sample_standard_ensemble(const ModelParams& p,
                                           std::size_t count,
                                           std::uint64_t seed);
void step_standard_ensemble(ClassicalEnsemble& e);

// Pairwise-deterministic sample moments of an array.
double sample_mean(const std::vector<double>& v);
double sample_mean_sq(const std::vector<double>& v);

}  // namespace kduo
