#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "kduo/hilbert.hpp"
#include "kduo/observables.hpp"
#include "kduo/propagator.hpp"
#include "kduo/rng.hpp"

using namespace kduo;

namespace {

constexpr double kPi = std::numbers::pi;

ModelParams mk(double hbar, double w, std::int64_t NR, std::int64_t Nr,
               std::int64_t n_kicks = 1, double k = 2.5) {
    return derive_params(0.5, k, 1.0, hbar, w, NR, Nr, n_kicks);
}

QuantumState random_mom_state(const ModelParams& p, std::uint64_t seed) {
    QuantumState s(p, Rep::MomLevel);
    SplitMix64 rng{seed};
    for (std::size_t i = 0; i < s.size(); ++i)
        s.data()[i] = cplx{rng.uniform() - 0.5, rng.uniform() - 0.5};
    const double n = std::sqrt(norm_sq(s));
    for (std::size_t i = 0; i < s.size(); ++i) s.data()[i] /= n;
    return s;
}

double bessel_j(std::int64_t l, double z) {
    const double j = std::cyl_bessel_j(static_cast<double>(std::llabs(l)), z);
    return (l < 0 && (l % 2) != 0) ? -j : j;
}

// Dense MOM_LEVEL one-period unitary built from quadrature matrices, kept
// independent of the FFT/DST code paths.
Eigen::MatrixXcd dense_floquet(const ModelParams& p) {
    const Grids g = make_grids(p);
    const auto NR = p.N_R;
    const auto Nr = p.N_r;
    const auto N = NR * Nr;
    const double wR = 2.0 * kPi / static_cast<double>(NR);
    const double wr = 2.0 * p.w / static_cast<double>(Nr + 1);
    auto phi = [&](std::int64_t n, double r) {
        return std::sin(static_cast<double>(n) * kPi * (r + p.w) / (2.0 * p.w)) /
               std::sqrt(p.w);
    };
    Eigen::MatrixXcd A(N, N), B(N, N);  // A: POS->MOM, B: MOM->POS
    for (std::int64_t li = 0; li < NR; ++li)
        for (std::int64_t n = 1; n <= Nr; ++n) {
            const auto row = li * Nr + (n - 1);
            const double l = static_cast<double>(g.l[static_cast<std::size_t>(li)]);
            for (std::int64_t j = 0; j < NR; ++j)
                for (std::int64_t jp = 0; jp < Nr; ++jp) {
                    const auto col = j * Nr + jp;
                    const cplx wave =
                        std::polar(1.0, -l * g.R[static_cast<std::size_t>(j)]) /
                        std::sqrt(2.0 * kPi);
                    const double box =
                        phi(n, g.r[static_cast<std::size_t>(jp)]);
                    A(row, col) = wR * wr * wave * box;
                    B(col, row) = std::conj(wave) * box;
                }
        }
    const FreePhases f = make_free_phases(p);
    Eigen::VectorXcd dfree(N), dkick(N);
    const KickPhases kp = make_kick_phases(p);
    for (std::int64_t i = 0; i < NR; ++i)
        for (std::int64_t j = 0; j < Nr; ++j) {
            dfree(i * Nr + j) = f.com[static_cast<std::size_t>(i)] *
                                f.internal[static_cast<std::size_t>(j)];
            dkick(i * Nr + j) = kp.phase[static_cast<std::size_t>(i * Nr + j)];
        }
    return A * dkick.asDiagonal() * B * dfree.asDiagonal();
}

}  // namespace

TEST_SUITE("propagator") {

TEST_CASE("phase tables are unit modulus") {
    const ModelParams p = mk(0.25, 0.5, 32, 8);
    const FreePhases f = make_free_phases(p);
    for (const cplx& c : f.com) CHECK(std::abs(std::abs(c) - 1.0) < 1e-15);
    for (const cplx& c : f.internal) CHECK(std::abs(std::abs(c) - 1.0) < 1e-15);
    const KickPhases k = make_kick_phases(p);
    for (const cplx& c : k.phase) CHECK(std::abs(std::abs(c) - 1.0) < 1e-15);
}

TEST_CASE("literal kick mode drops the 1/hbar") {
    const ModelParams p = mk(0.25, 0.5, 8, 4);
    const Grids g = make_grids(p);
    const KickPhases lit = make_kick_phases(p, true);
    const KickPhases phys = make_kick_phases(p, false);
    const cplx want_lit =
        std::polar(1.0, -p.K * std::cos(g.R[1]) * std::cos(0.5 * g.r[2]));
    const cplx want_phys = std::polar(
        1.0, -(p.K / p.hbar) * std::cos(g.R[1]) * std::cos(0.5 * g.r[2]));
    CHECK(std::abs(lit.phase[static_cast<std::size_t>(1 * p.N_r + 2)] - want_lit) <
          1e-14);
    CHECK(std::abs(phys.phase[static_cast<std::size_t>(1 * p.N_r + 2)] -
                   want_phys) < 1e-14);
}

TEST_CASE("free step leaves momentum moments untouched") {
    const ModelParams p = mk(0.25, 0.5, 64, 16);
    Transformer t(p.N_R, p.N_r);
    QuantumState s = random_mom_state(p, 7);
    const Moments before = momentum_moments(s);
    const FreePhases f = make_free_phases(p);
    free_step(s, t, f);
    const Moments after = momentum_moments(s);
    CHECK(after.P_mean == doctest::Approx(before.P_mean).epsilon(1e-14));
    CHECK(after.P2_mean == doctest::Approx(before.P2_mean).epsilon(1e-14));
}

TEST_CASE("K=0 evolution keeps the state pure and stationary in P") {
    const ModelParams p = mk(0.25, 0.5, 64, 16, 50, 0.0);
    Transformer t(p.N_R, p.N_r);
    QuantumState s = initial_state(p);
    EvolveOptions opts;
    double max_sl = 0.0;
    StateObserver obs = [&](std::int64_t, const QuantumState& st) {
        max_sl = std::max(max_sl, linear_entropy(gram(st)));
        const Moments m = momentum_moments(st);
        CHECK(std::abs(m.P2_mean) < 1e-20);
        return true;
    };
    evolve(s, t, p.n_kicks, obs, opts);
    CHECK(max_sl < 1e-13);
    CHECK(s.kick_count == 50);
}

TEST_CASE("one kick from rest reproduces the Bessel amplitudes") {
    // e^{-iz cos R} |l=0> has amplitudes (-i)^l J_l(z), z = K/hbar
    const ModelParams p = mk(0.25, 0.5, 256, 4, 1);
    SingleRotor rotor(p);
    auto amps = rotor.initial();
    rotor.step(amps);
    const double z = p.K / p.hbar;
    double max_err = 0.0;
    for (std::int64_t i = 0; i < p.N_R; ++i) {
        const std::int64_t l = i < p.N_R / 2 ? i : i - p.N_R;
        if (std::llabs(l) > 48) continue;  // J_l(20) below 1e-14 out there
        const cplx want = std::pow(cplx{0.0, -1.0}, static_cast<double>(l)) *
                          bessel_j(l, z);
        max_err = std::max(max_err,
                           std::abs(amps[static_cast<std::size_t>(i)] - want));
    }
    CHECK(max_err < 1e-12);
    // Bessel sum identity: <P^2> after one kick is K^2/2
    double p2 = 0.0;
    for (std::int64_t i = 0; i < p.N_R; ++i) {
        const std::int64_t l = i < p.N_R / 2 ? i : i - p.N_R;
        p2 += std::norm(amps[static_cast<std::size_t>(i)]) *
              (p.hbar * static_cast<double>(l)) * (p.hbar * static_cast<double>(l));
    }
    CHECK(p2 == doctest::Approx(p.K * p.K / 2.0).epsilon(1e-12));
}

TEST_CASE("coupled evolution matches the dense unitary for 3 steps") {
    const ModelParams p = mk(0.25, 0.5, 16, 4, 3);
    const Eigen::MatrixXcd U = dense_floquet(p);
    Transformer t(p.N_R, p.N_r);
    QuantumState s = random_mom_state(p, 99);
    Eigen::VectorXcd v(p.N_R * p.N_r);
    for (std::size_t i = 0; i < s.size(); ++i) v(static_cast<Eigen::Index>(i)) = s.data()[i];
    const FreePhases f = make_free_phases(p);
    const KickPhases k = make_kick_phases(p);
    for (int step = 0; step < 3; ++step) {
        floquet_step(s, t, f, k);
        v = U * v;
    }
    t.to_mom_level(s);
    double m = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        m = std::max(m, std::abs(s.data()[i] - v(static_cast<Eigen::Index>(i))));
    CHECK(m < 1e-12);
}

TEST_CASE("R-parity of the initial state survives the evolution") {
    const ModelParams p = mk(0.25, 0.5, 32, 8, 5);
    Transformer t(p.N_R, p.N_r);
    QuantumState s = initial_state(p);
    EvolveOptions opts;
    opts.guard.enabled = false;  // support wraps this tiny grid immediately
    evolve(s, t, 5, nullptr, opts);
    double m = 0.0;
    for (std::int64_t l = 1; l < p.N_R / 2; ++l)
        for (std::int64_t j = 0; j < p.N_r; ++j)
            m = std::max(m, std::abs(s.at(l, j) - s.at(p.N_R - l, j)));
    CHECK(m < 1e-13);
}

TEST_CASE("aliasing guard trips on a too-small grid and names the kick") {
    const ModelParams p = mk(0.25, 0.5, 32, 8, 50);
    Transformer t(p.N_R, p.N_r);
    QuantumState s = initial_state(p);
    EvolveOptions opts;  // guard on, tol 1e-9
    CHECK_THROWS_AS(evolve(s, t, p.n_kicks, nullptr, opts), NumericGuardError);
    QuantumState s2 = initial_state(p);
    EvolveOptions off;
    off.guard.enabled = false;
    CHECK_NOTHROW(evolve(s2, t, p.n_kicks, nullptr, off));
}

TEST_CASE("kick phases lose their r dependence as w -> 0") {
    const ModelParams p = mk(0.25, 1e-3, 16, 8);
    const KickPhases k = make_kick_phases(p);
    double m = 0.0;
    for (std::int64_t i = 0; i < p.N_R; ++i)
        for (std::int64_t j = 1; j < p.N_r; ++j)
            m = std::max(m, std::abs(k.phase[static_cast<std::size_t>(i * p.N_r + j)] -
                                     k.phase[static_cast<std::size_t>(i * p.N_r)]));
    CHECK(m < 1e-5);  // 1 - cos(w/2) ~ 1e-7 at w = 1e-3, times K/hbar
}

TEST_CASE("cooperative interrupt stops after the current kick") {
    const ModelParams p = mk(0.25, 0.5, 32, 8, 100);
    Transformer t(p.N_R, p.N_r);
    QuantumState s = initial_state(p);
    volatile int flag = 1;
    EvolveOptions opts;
    opts.guard.enabled = false;
    opts.interrupt = &flag;
    const EvolveResult res = evolve(s, t, p.n_kicks, nullptr, opts);
    CHECK(res.interrupted);
    CHECK(res.kicks_done == 1);
    CHECK(s.kick_count == 1);
    CHECK(s.rep == Rep::MomLevel);
}

TEST_CASE("single-rotor guard trips when localization length exceeds the grid") {
    const ModelParams p = mk(0.25, 0.5, 64, 4, 200);
    SingleRotor rotor(p);
    auto amps = rotor.initial();
    GuardConfig guard;  // (K/hbar)^2/2 = 200 localized states >> 64 modes
    CHECK_THROWS_AS(rotor.evolve(amps, p.n_kicks, nullptr, guard),
                    NumericGuardError);
}

}  // TEST_SUITE
