#include "kduo/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kduo/reduce.hpp"

namespace kduo {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CDF of cos^2(pi r / 2w)/w on [-w, w]
struct CdfTable {
    std::vector<double> r, F;
    explicit CdfTable(double w, std::size_t nodes = 20001) {
        r.resize(nodes);
        F.resize(nodes);
        for (std::size_t i = 0; i < nodes; ++i) {
            const double x =
                -w + 2.0 * w * static_cast<double>(i) / static_cast<double>(nodes - 1);
            r[i] = x;
            F[i] = (x + w) / (2.0 * w) +
                   std::sin(std::numbers::pi * x / w) / kTwoPi;
        }
        F.front() = 0.0;
        F.back() = 1.0;
    }
    double invert(double u) const {
        auto it = std::upper_bound(F.begin(), F.end(), u);
        if (it == F.begin()) return r.front();
        if (it == F.end()) return r.back();
        const std::size_t j = static_cast<std::size_t>(it - F.begin());
        const double f0 = F[j - 1], f1 = F[j];
        const double t = f1 > f0 ? (u - f0) / (f1 - f0) : 0.0;
        return r[j - 1] + t * (r[j] - r[j - 1]);
    }
};
}  // namespace

ClassicalEnsemble sample_ensemble(const ModelParams& p, std::size_t count,
                                  std::uint64_t seed) {
    if (count < 1) throw ConfigError("ensemble count must be >= 1");
    validate(p);
    ClassicalEnsemble e;
    e.params = p;
    e.seed = seed;
    e.R.resize(count);
    e.P.assign(count, 0.0);
    e.r.resize(count);
    e.p.resize(count);
    const CdfTable table(p.w);
    const double p0 = std::numbers::pi * p.hbar / (2.0 * p.w);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        e.R[i] = kTwoPi * rng.uniform();
        e.r[i] = table.invert(rng.uniform());
        e.p[i] = rng.uniform() < 0.5 ? p0 : -p0;
    }
    return e;
}

Particle free_flight(Particle q, const ModelParams& p) {
    q.R = std::fmod(q.R + q.P * p.T / p.M, kTwoPi);
    if (q.R < 0.0) q.R += kTwoPi;
    const double L = 4.0 * p.w;  // full bounce period in the unfolded coordinate
    double x = q.r + p.w + q.p / p.mu * p.T;
    x = std::fmod(x, L);
    if (x < 0.0) x += L;
    if (x > 2.0 * p.w) {
        x = L - x;
        q.p = -q.p;
    }
    q.r = x - p.w;
    return q;
}

Particle kick(Particle q, const ModelParams& p) {
    q.P += p.K * std::sin(q.R) * std::cos(0.5 * q.r);
    q.p += 0.5 * p.K * std::cos(q.R) * std::sin(0.5 * q.r);
    return q;
}

void step_ensemble(ClassicalEnsemble& e) {
    const ModelParams& p = e.params;
    const auto n = static_cast<std::int64_t>(e.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        Particle q{e.R[static_cast<std::size_t>(i)], e.P[static_cast<std::size_t>(i)],
                   e.r[static_cast<std::size_t>(i)], e.p[static_cast<std::size_t>(i)]};
        q = kick(free_flight(q, p), p);
        e.R[static_cast<std::size_t>(i)] = q.R;
        e.P[static_cast<std::size_t>(i)] = q.P;
        e.r[static_cast<std::size_t>(i)] = q.r;
        e.p[static_cast<std::size_t>(i)] = q.p;
    }
    ++e.kick_count;
}

void evolve_ensemble(ClassicalEnsemble& e, std::int64_t n,
                     const EnsembleObserver& observer,
                     std::int64_t record_every) {
    for (std::int64_t step = 0; step < n; ++step) {
        step_ensemble(e);
        if (record_every > 0 && e.kick_count % record_every == 0)
            if (observer && !observer(e.kick_count, e)) break;
    }
}

void standard_map_step(double& R, double& P, const ModelParams& p) {
    R = std::fmod(R + P * p.T / p.M, kTwoPi);
    if (R < 0.0) R += kTwoPi;
    P += p.K * std::sin(R);
}

ClassicalEnsemble sample_standard_ensemble(const ModelParams& p,
                                           std::size_t count,
                                           std::uint64_t seed) {
    if (count < 1) throw ConfigError("ensemble count must be >= 1");
    ClassicalEnsemble e;
    e.params = p;
    e.seed = seed;
    e.R.resize(count);
    e.P.assign(count, 0.0);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) e.R[i] = kTwoPi * rng.uniform();
    return e;
}

void step_standard_ensemble(ClassicalEnsemble& e) {
    const ModelParams& p = e.params;
    const auto n = static_cast<std::int64_t>(e.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        standard_map_step(e.R[static_cast<std::size_t>(i)],
                          e.P[static_cast<std::size_t>(i)], p);
    ++e.kick_count;
}

double sample_mean(const std::vector<double>& v) {
    if (v.empty()) throw ConfigError("empty ensemble");
    return pairwise_sum(v.size(), [&](std::size_t i) { return v[i]; }) /
           static_cast<double>(v.size());
}

double sample_mean_sq(const std::vector<double>& v) {
    if (v.empty()) throw ConfigError("empty ensemble");
    return pairwise_sum(v.size(), [&](std::size_t i) { return v[i] * v[i]; }) /
           static_cast<double>(v.size());
}

}  // namespace kduo
