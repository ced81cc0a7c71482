#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kduo/hilbert.hpp"
#include "kduo/params.hpp"

namespace kduo {

// Marginal |c|^2 over the internal index, on the FFT-ordered momentum grid.
std::vector<double> p_marginal(const QuantumState& s);

struct Moments {
    double P_mean = 0.0;
    double P2_mean = 0.0;
};

Moments momentum_moments(const QuantumState& s);

// Normalized variance 2(<P^2> - <P>^2) / (M K^2). Meaningless at K = 0.
double delta2(const Moments& m, const ModelParams& p);

// Hermitian N_r x N_r Gram matrix G = A^dagger A for the MOM_LEVEL coefficient
// matrix A; shares its nonzero spectrum with the reduced density matrix rho_R.
using GramMatrix = Eigen::MatrixXcd;

GramMatrix gram(const QuantumState& s);
std::vector<double> gram_spectrum(const GramMatrix& g);

// s_l = 1 - Tr G^2, clamped to [0, 1].
double linear_entropy(const GramMatrix& g);

// S_vn = -sum lambda ln lambda over eigenvalues above cutoff (natural log).
double von_neumann_entropy(const GramMatrix& g, double cutoff = 1e-14);

// Distribution on a momentum axis; sum(f) * bin width = 1.
struct Distribution {
    std::vector<double> P;  // bin centers (quantum: the exact P_l grid)
    std::vector<double> f;
};

// Quantum: exact marginal with f_l = q_l / hbar, sorted by P ascending.
Distribution momentum_distribution(const QuantumState& s);
// Classical: histogram of sample momenta with the given bin width.
Distribution momentum_distribution(const std::vector<double>& samples,
                                   double bin_width);

// Excess kurtosis mu4/mu2^2 - 3 of the quantum momentum marginal.
double excess_kurtosis(const QuantumState& s);

// Shannon entropy of occupation fractions on a fixed (R, P) cell grid:
// R_bins cells over [0, 2pi), P cells of width P_bin_width.
double classical_entropy(const std::vector<double>& R,
                         const std::vector<double>& P, int R_bins,
                         double P_bin_width);

struct DiffusionFit {
    double D = 0.0;              // half the fitted slope of <P^2> vs n
    double residual_stderr = 0.0;
};

DiffusionFit fit_diffusion(const std::vector<std::int64_t>& n,
                           const std::vector<double>& P2, std::int64_t n_lo,
                           std::int64_t n_hi);

// Per-kick observable records; absent quantities stay empty in the CSV.
struct TimeSeries {
    struct Row {
        std::int64_t n = 0;
        std::optional<double> P_mean, P2_mean, delta2, s_l, S_vn, S_cl;
    };
    std::vector<Row> rows;

    void write_csv(std::ostream& out) const;
    static TimeSeries read_csv(const std::string& path);
};

}  // namespace kduo
