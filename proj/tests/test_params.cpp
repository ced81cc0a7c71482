#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <Eigen/Dense>

#include "doctest.h"
#include "kduo/params.hpp"

using namespace kduo;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_SUITE("params") {

TEST_CASE("derived fields follow the center-of-mass reduction") {
    const ModelParams p = derive_params(0.5, 2.5, 1.0, 0.07, 0.5, 16384, 256, 500);
    CHECK(p.M == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.mu == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(p.K == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("validate accepts derived params and rejects tampered ones") {
    ModelParams p = derive_params(0.5, 2.5, 1.0, 0.07, 0.5, 2048, 64, 10);
    CHECK_NOTHROW(validate(p));
    ModelParams bad = p;
    bad.M = 3.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = p;
    bad.K = p.K * (1.0 + 1e-6);
    CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("derive_params rejects unusable inputs") {
    CHECK_THROWS_AS(derive_params(-0.5, 2.5, 1, 0.07, 0.5, 2048, 64, 10), ConfigError);
    CHECK_THROWS_AS(derive_params(0.5, 2.5, 1, 0.0, 0.5, 2048, 64, 10), ConfigError);
    CHECK_THROWS_AS(derive_params(0.5, 2.5, 1, 0.07, 3.5, 2048, 64, 10), ConfigError);
    CHECK_THROWS_AS(derive_params(0.5, 2.5, 1, 0.07, 0.5, 2047, 64, 10), ConfigError);
    CHECK_THROWS_AS(derive_params(0.5, 2.5, 1, 0.07, 0.5, 2048, 0, 10), ConfigError);
    CHECK_THROWS_AS(derive_params(0.5, 2.5, 1, 0.07, 0.5, 2048, 64, -1), ConfigError);
    CHECK_NOTHROW(derive_params(0.5, 2.5, 1, 0.07, kPi, 2048, 64, 10));
}

TEST_CASE("box spectrum: closed form, n^2 ladder, 1/w^2 scaling") {
    const ModelParams p = derive_params(0.5, 2.5, 1.0, 0.07, 0.5, 64, 16, 1);
    const auto E = box_spectrum(p);
    REQUIRE(E.size() == 16);
    // E_1 = pi^2 hbar^2 / (8 mu w^2) with the defaults
    const double E1 = kPi * kPi * 0.07 * 0.07 / (8.0 * 0.25 * 0.25);
    CHECK(E[0] == doctest::Approx(E1).epsilon(1e-14));
    for (std::size_t n = 1; n <= E.size(); ++n)
        CHECK(E[n - 1] == doctest::Approx(static_cast<double>(n * n) * E[0])
                              .epsilon(1e-12));
    const ModelParams half = derive_params(0.5, 2.5, 1.0, 0.07, 0.25, 64, 16, 1);
    CHECK(box_spectrum(half)[0] == doctest::Approx(4.0 * E[0]).epsilon(1e-12));
}

TEST_CASE("box spectrum matches a finite-difference well solver") {
    // independent check of the 8 mu w^2 denominator: discretize
    // -hbar^2/(2 mu) phi'' = E phi on (-w, w) with Dirichlet walls
    const ModelParams p = derive_params(0.5, 2.5, 1.0, 0.07, 0.5, 64, 16, 1);
    const int N = 600;
    const double h = 2.0 * p.w / (N + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N, N);
    const double t = p.hbar * p.hbar / (2.0 * p.mu * h * h);
    for (int i = 0; i < N; ++i) {
        H(i, i) = 2.0 * t;
        if (i > 0) H(i, i - 1) = -t;
        if (i + 1 < N) H(i, i + 1) = -t;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    const auto E = box_spectrum(p);
    for (int n = 0; n < 3; ++n)
        CHECK(es.eigenvalues()(n) ==
              doctest::Approx(E[static_cast<std::size_t>(n)]).epsilon(1e-4));
}

TEST_CASE("well eigenfunctions are orthonormal under the interior quadrature") {
    const double w = 0.5;
    const int Nr = 16;
    auto phi = [&](int n, double r) {
        return std::sin(static_cast<double>(n) * kPi * (r + w) / (2.0 * w)) /
               std::sqrt(w);
    };
    const double dw = 2.0 * w / (Nr + 1);
    for (int a = 1; a <= Nr; ++a)
        for (int b = a; b <= Nr; ++b) {
            double acc = 0.0;
            for (int j = 0; j < Nr; ++j) {
                const double r = -w + (j + 1) * dw;
                acc += phi(a, r) * phi(b, r) * dw;
            }
            CHECK(acc == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12));
        }
}

TEST_CASE("key=value parser: pairs, comments, overrides") {
    const auto kv = parse_kv_text(
        "# comment line\n"
        "m = 0.5\n"
        "\n"
        "k=2.5   # trailing comment\n"
        "w = 0.1\n"
        "w = 0.7\n");
    CHECK(kv.at("m") == "0.5");
    CHECK(kv.at("k") == "2.5");
    CHECK(kv.at("w") == "0.7");
    CHECK(kv.size() == 3);
}

TEST_CASE("key=value parser rejects malformed lines with the line number") {
    try {
        parse_kv_text("m = 0.5\nnot a pair\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_kv_text("= 0.5\n"), ConfigError);
}

TEST_CASE("key=value file parsing and missing-file error") {
    const std::string path = "params_test_config.tmp";
    {
        std::ofstream out(path);
        out << "hbar = 0.25\nN_R = 2048\n";
    }
    const auto kv = parse_kv_file(path);
    CHECK(kv.at("hbar") == "0.25");
    CHECK(kv.at("N_R") == "2048");
    std::remove(path.c_str());
    CHECK_THROWS_AS(parse_kv_file("definitely_missing_file.cfg"), ConfigError);
}

}  // TEST_SUITE
