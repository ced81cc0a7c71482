#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "kduo/hilbert.hpp"
#include "kduo/io.hpp"
#include "kduo/observables.hpp"
#include "kduo/rng.hpp"

using namespace kduo;

namespace {

ModelParams mk(std::int64_t NR = 16, std::int64_t Nr = 8) {
    return derive_params(0.5, 2.5, 1.0, 0.25, 0.5, NR, Nr, 1);
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

}  // namespace

TEST_SUITE("observables") {

TEST_CASE("delta2 is the normalized variance") {
    const ModelParams p = mk();
    Moments m;
    m.P_mean = 1.0;
    m.P2_mean = 3.0;
    // 2 (3 - 1) / (1 * 25)
    CHECK(delta2(m, p) == doctest::Approx(0.16).epsilon(1e-15));
}

TEST_CASE("quantum momentum distribution integrates to one") {
    const ModelParams p = mk(32, 8);
    const QuantumState s = random_mom_state(p, 17);
    const Distribution d = momentum_distribution(s);
    REQUIRE(d.P.size() == 32);
    CHECK(d.P.front() == doctest::Approx(-p.hbar * 16).epsilon(1e-15));
    CHECK(d.P.back() == doctest::Approx(p.hbar * 15).epsilon(1e-15));
    double mass = 0.0;
    for (double f : d.f) mass += f * p.hbar;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("classical histogram: centers, mass, negative momenta") {
    const std::vector<double> samples{-0.6, -0.6, 0.1, 0.4, 0.9, 1.2};
    const Distribution d = momentum_distribution(samples, 0.5);
    // bins: [-1,-0.5) x2, [0,0.5) x2, [0.5,1) x1, [1,1.5) x1
    REQUIRE(d.P.size() == 5);
    CHECK(d.P[0] == doctest::Approx(-0.75).epsilon(1e-15));
    CHECK(d.P[1] == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(d.f[0] == doctest::Approx(2.0 / (6 * 0.5)).epsilon(1e-15));
    CHECK(d.f[1] == doctest::Approx(0.0).epsilon(1e-15));
    double mass = 0.0;
    for (double f : d.f) mass += f * 0.5;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gram matrix of a product state is rank one and pure") {
    const ModelParams p = mk(8, 4);
    QuantumState s(p, Rep::MomLevel);
    SplitMix64 rng{31};
    std::vector<cplx> a(8), b(4);
    double na = 0, nb = 0;
    for (auto& v : a) { v = cplx{rng.uniform() - 0.5, rng.uniform() - 0.5}; na += std::norm(v); }
    for (auto& v : b) { v = cplx{rng.uniform() - 0.5, rng.uniform() - 0.5}; nb += std::norm(v); }
    for (std::int64_t i = 0; i < 8; ++i)
        for (std::int64_t j = 0; j < 4; ++j)
            s.at(i, j) = a[static_cast<std::size_t>(i)] *
                         b[static_cast<std::size_t>(j)] / std::sqrt(na * nb);
    const GramMatrix g = gram(s);
    CHECK(linear_entropy(g) < 1e-13);
    CHECK(von_neumann_entropy(g) < 1e-10);
    const auto spec = gram_spectrum(g);
    CHECK(spec.back() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gram spectrum equals the direct partial-trace spectrum") {
    const ModelParams p = mk(16, 8);
    const QuantumState s = random_mom_state(p, 55);
    using RowMajor =
        Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMajor> A(s.data(), p.N_R, p.N_r);
    const Eigen::MatrixXcd rho = A * A.adjoint();  // N_R x N_R reduced matrix
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    const auto gs = gram_spectrum(gram(s));
    // both ascending; rho carries N_R - N_r extra zeros in front
    REQUIRE(gs.size() == 8);
    double trace = 0.0;
    for (std::size_t i = 0; i < gs.size(); ++i) {
        CHECK(std::abs(gs[i] - es.eigenvalues()(static_cast<Eigen::Index>(i + 8))) <
              1e-10);
        CHECK(gs[i] > -1e-12);
        trace += gs[i];
    }
    CHECK(trace == doctest::Approx(1.0).epsilon(1e-10));
    for (Eigen::Index i = 0; i < 8; ++i)
        CHECK(std::abs(es.eigenvalues()(i)) < 1e-12);
}

TEST_CASE("Schmidt-rank-2 state has the textbook entropies") {
    const ModelParams p = mk(8, 4);
    QuantumState s(p, Rep::MomLevel);
    for (std::size_t i = 0; i < s.size(); ++i) s.data()[i] = 0.0;
    s.at(0, 0) = std::sqrt(0.7);
    s.at(1, 1) = std::sqrt(0.3);
    const GramMatrix g = gram(s);
    CHECK(linear_entropy(g) ==
          doctest::Approx(1.0 - 0.7 * 0.7 - 0.3 * 0.3).epsilon(1e-13));
    CHECK(von_neumann_entropy(g) ==
          doctest::Approx(-0.7 * std::log(0.7) - 0.3 * std::log(0.3))
              .epsilon(1e-12));
}

TEST_CASE("maximally mixed embedding: entropies hit their ceilings") {
    const ModelParams p = mk(8, 4);
    QuantumState s(p, Rep::MomLevel);
    for (std::size_t i = 0; i < s.size(); ++i) s.data()[i] = 0.0;
    for (std::int64_t j = 0; j < 4; ++j) s.at(j, j) = 0.5;  // 1/sqrt(N_r)
    const GramMatrix g = gram(s);
    CHECK(linear_entropy(g) == doctest::Approx(1.0 - 0.25).epsilon(1e-13));
    CHECK(von_neumann_entropy(g) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("von Neumann entropy dominates the Renyi-2 lower bound") {
    for (std::uint64_t seed = 60; seed < 70; ++seed) {
        const QuantumState s = random_mom_state(mk(16, 8), seed);
        const GramMatrix g = gram(s);
        const double renyi2 = -std::log(1.0 - linear_entropy(g));
        CHECK(von_neumann_entropy(g) >= renyi2 - 1e-12);
    }
}

TEST_CASE("excess kurtosis of a symmetric two-point marginal is -2") {
    const ModelParams p = mk(8, 4);
    QuantumState s(p, Rep::MomLevel);
    for (std::size_t i = 0; i < s.size(); ++i) s.data()[i] = 0.0;
    s.at(1, 0) = std::sqrt(0.5);
    s.at(7, 0) = std::sqrt(0.5);  // l = -1 slot
    CHECK(excess_kurtosis(s) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("classical entropy counts occupied phase-space cells") {
    // R cells are 2pi/64 wide, P cells 5.0 wide
    const std::vector<double> one_cell_R{0.01, 0.02, 0.03};
    const std::vector<double> one_cell_P{0.1, 0.2, 0.3};
    CHECK(classical_entropy(one_cell_R, one_cell_P, 64, 5.0) ==
          doctest::Approx(0.0).epsilon(1e-15));
    const std::vector<double> four_R{0.01, 0.2, 0.4, 0.6};
    const std::vector<double> four_P{0.1, 0.1, 0.1, 0.1};
    CHECK(classical_entropy(four_R, four_P, 64, 5.0) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-13));
    // same R cell, momenta straddling 0 fall in different P cells
    const std::vector<double> two_R{0.01, 0.01};
    const std::vector<double> two_P{0.1, -0.1};
    CHECK(classical_entropy(two_R, two_P, 64, 5.0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("diffusion fit recovers an exact line and honours the window") {
    std::vector<std::int64_t> n;
    std::vector<double> p2;
    for (std::int64_t i = 0; i <= 100; ++i) {
        n.push_back(i);
        p2.push_back(i <= 50 ? 4.0 * static_cast<double>(i)
                             : 1000.0);  // garbage outside the window
    }
    const DiffusionFit fit = fit_diffusion(n, p2, 5, 50);
    CHECK(fit.D == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.residual_stderr < 1e-9);
    CHECK_THROWS_AS(fit_diffusion(n, p2, 200, 300), ConfigError);
    CHECK_THROWS_AS(fit_diffusion(n, p2, 50, 5), ConfigError);
}

TEST_CASE("time series CSV is stable, exact, and round-trips") {
    TimeSeries ts;
    TimeSeries::Row r0;
    r0.n = 1;
    r0.P_mean = 0.5;
    r0.P2_mean = 12.5;
    r0.delta2 = 1.0;
    TimeSeries::Row r1;
    r1.n = 2;
    r1.P2_mean = 0.1;
    r1.s_l = 0.25;
    ts.rows = {r0, r1};
    std::ostringstream out;
    ts.write_csv(out);
    CHECK(out.str() ==
          "n,P_mean,P2_mean,delta2,s_l,S_vn,S_cl\n"
          "1,0.5,12.5,1,,,\n"
          "2,,0.10000000000000001,,0.25,,\n");
    const std::string path = "observables_ts_roundtrip.tmp";
    write_timeseries_csv(path, ts);
    const TimeSeries back = TimeSeries::read_csv(path);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0].n == 1);
    CHECK(*back.rows[0].P2_mean == 12.5);
    CHECK(!back.rows[0].s_l.has_value());
    CHECK(*back.rows[1].P2_mean == 0.1);  // bit-exact through %.17g
    CHECK(*back.rows[1].s_l == 0.25);
    CHECK(!back.rows[1].S_cl.has_value());
    std::remove(path.c_str());
}

TEST_CASE("time series reader rejects foreign headers") {
    const std::string path = "observables_bad_header.tmp";
    {
        std::ofstream f(path);
        f << "n,foo\n1,2\n";
    }
    CHECK_THROWS_AS(TimeSeries::read_csv(path), ConfigError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(TimeSeries::read_csv("missing_series.csv"), ConfigError);
}

}  // TEST_SUITE
