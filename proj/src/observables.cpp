#include "kduo/observables.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "kduo/reduce.hpp"

namespace kduo {

std::vector<double> p_marginal(const QuantumState& s) {
    if (s.rep != Rep::MomLevel)
        throw StateError("p_marginal: state not in MOM_LEVEL");
    const auto NR = s.params.N_R;
    const auto Nr = s.params.N_r;
    std::vector<double> q(static_cast<std::size_t>(NR));
    const cplx* d = s.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < NR; ++i) {
        const cplx* row = d + i * Nr;
        q[static_cast<std::size_t>(i)] = pairwise_sum(
            static_cast<std::size_t>(Nr),
            [row](std::size_t j) { return std::norm(row[j]); });
    }
    return q;
}

namespace {
// signed momentum index for FFT-ordered slot i
inline double l_of(std::int64_t i, std::int64_t NR) {
    return static_cast<double>(i < NR / 2 ? i : i - NR);
}
}  // namespace

Moments momentum_moments(const QuantumState& s) {
    const auto q = p_marginal(s);
    const auto NR = s.params.N_R;
    const double hbar = s.params.hbar;
    Moments m;
    m.P_mean = pairwise_sum(q.size(), [&](std::size_t i) {
        return q[i] * hbar * l_of(static_cast<std::int64_t>(i), NR);
    });
    m.P2_mean = pairwise_sum(q.size(), [&](std::size_t i) {
        const double P = hbar * l_of(static_cast<std::int64_t>(i), NR);
        return q[i] * P * P;
    });
    return m;
}

double delta2(const Moments& m, const ModelParams& p) {
    return 2.0 * (m.P2_mean - m.P_mean * m.P_mean) / (p.M * p.K * p.K);
}

GramMatrix gram(const QuantumState& s) {
    if (s.rep != Rep::MomLevel) throw StateError("gram: state not in MOM_LEVEL");
    using RowMajor =
        Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMajor> A(s.data(), s.params.N_R, s.params.N_r);
    GramMatrix g = A.adjoint() * A;
    return g;
}

std::vector<double> gram_spectrum(const GramMatrix& g) {
    Eigen::SelfAdjointEigenSolver<GramMatrix> es(g, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

double linear_entropy(const GramMatrix& g) {
    const double s = 1.0 - g.squaredNorm();
    return std::clamp(s, 0.0, 1.0);
}

double von_neumann_entropy(const GramMatrix& g, double cutoff) {
    double S = 0.0;
    for (double lam : gram_spectrum(g))
        if (lam > cutoff) S -= lam * std::log(lam);
    return S;
}

Distribution momentum_distribution(const QuantumState& s) {
    const auto q = p_marginal(s);
    const auto NR = s.params.N_R;
    Distribution d;
    d.P.resize(q.size());
    d.f.resize(q.size());
    // reorder from FFT slots to ascending l in [-N_R/2, N_R/2)
    for (std::int64_t l = -NR / 2; l < NR / 2; ++l) {
        const std::int64_t slot = l >= 0 ? l : l + NR;
        const std::size_t out = static_cast<std::size_t>(l + NR / 2);
        d.P[out] = s.params.hbar * static_cast<double>(l);
        d.f[out] = q[static_cast<std::size_t>(slot)] / s.params.hbar;
    }
    return d;
}

Distribution momentum_distribution(const std::vector<double>& samples,
                                   double bin_width) {
    if (!(bin_width > 0.0)) throw ConfigError("bin width must be positive");
    if (samples.empty()) throw ConfigError("empty ensemble");
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const auto lo_bin = static_cast<std::int64_t>(std::floor(*lo_it / bin_width));
    const auto hi_bin = static_cast<std::int64_t>(std::floor(*hi_it / bin_width));
    Distribution d;
    const std::size_t nbins = static_cast<std::size_t>(hi_bin - lo_bin + 1);
    d.P.resize(nbins);
    d.f.assign(nbins, 0.0);
    for (double v : samples) {
        const auto b = static_cast<std::int64_t>(std::floor(v / bin_width)) - lo_bin;
        d.f[static_cast<std::size_t>(b)] += 1.0;
    }
    const double norm = 1.0 / (static_cast<double>(samples.size()) * bin_width);
    for (std::size_t i = 0; i < nbins; ++i) {
        d.P[i] = (static_cast<double>(lo_bin + static_cast<std::int64_t>(i)) + 0.5) *
                 bin_width;
        d.f[i] *= norm;
    }
    return d;
}

double excess_kurtosis(const QuantumState& s) {
    const auto q = p_marginal(s);
    const auto NR = s.params.N_R;
    const double hbar = s.params.hbar;
    const double m1 = pairwise_sum(q.size(), [&](std::size_t i) {
        return q[i] * hbar * l_of(static_cast<std::int64_t>(i), NR);
    });
    const double m2 = pairwise_sum(q.size(), [&](std::size_t i) {
        const double d = hbar * l_of(static_cast<std::int64_t>(i), NR) - m1;
        return q[i] * d * d;
    });
    const double m4 = pairwise_sum(q.size(), [&](std::size_t i) {
        const double d = hbar * l_of(static_cast<std::int64_t>(i), NR) - m1;
        return q[i] * d * d * d * d;
    });
    return m4 / (m2 * m2) - 3.0;
}

double classical_entropy(const std::vector<double>& R,
                         const std::vector<double>& P, int R_bins,
                         double P_bin_width) {
    if (R_bins <= 0 || !(P_bin_width > 0.0))
        throw ConfigError("classical_entropy: non-positive bin parameters");
    if (R.empty() || R.size() != P.size())
        throw ConfigError("classical_entropy: empty or mismatched ensemble");
    const double Rcell = 2.0 * std::numbers::pi / R_bins;
    std::vector<std::int64_t> keys(R.size());
    for (std::size_t i = 0; i < R.size(); ++i) {
        auto iR = static_cast<std::int64_t>(std::floor(R[i] / Rcell));
        iR = std::clamp<std::int64_t>(iR, 0, R_bins - 1);
        const auto iP = static_cast<std::int64_t>(std::floor(P[i] / P_bin_width));
        keys[i] = iR * (std::int64_t{1} << 40) + iP;  // |iP| << 2^39, no overlap
    }
    std::sort(keys.begin(), keys.end());  // sorted run-length => deterministic
    const double N = static_cast<double>(keys.size());
    double S = 0.0;
    std::size_t i = 0;
    while (i < keys.size()) {
        std::size_t j = i;
        while (j < keys.size() && keys[j] == keys[i]) ++j;
        const double q = static_cast<double>(j - i) / N;
        S -= q * std::log(q);
        i = j;
    }
    return S;
}

DiffusionFit fit_diffusion(const std::vector<std::int64_t>& n,
                           const std::vector<double>& P2, std::int64_t n_lo,
                           std::int64_t n_hi) {
    if (n.size() != P2.size()) throw ConfigError("fit_diffusion: length mismatch");
    if (n_hi <= n_lo) throw ConfigError("fit_diffusion: degenerate window");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n.size(); ++i)
        if (n[i] >= n_lo && n[i] <= n_hi) {
            xs.push_back(static_cast<double>(n[i]));
            ys.push_back(P2[i]);
        }
    const std::size_t m = xs.size();
    if (m < 3) throw ConfigError("fit_diffusion: window has fewer than 3 samples");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < m; ++i) sx += xs[i], sy += ys[i];
    const double mx = sx / static_cast<double>(m), my = sy / static_cast<double>(m);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double icept = my - slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = ys[i] - (slope * xs[i] + icept);
        ss += r * r;
    }
    DiffusionFit fit;
    fit.D = 0.5 * slope;
    fit.residual_stderr = std::sqrt(ss / static_cast<double>(m - 2));
    return fit;
}

namespace {
void put_opt(std::ostream& out, const std::optional<double>& v) {
    out << ',';
    if (v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", *v);
        out << buf;
    }
}
}  // namespace

void TimeSeries::write_csv(std::ostream& out) const {
    out << "n,P_mean,P2_mean,delta2,s_l,S_vn,S_cl\n";
    for (const auto& r : rows) {
        out << r.n;
        put_opt(out, r.P_mean);
        put_opt(out, r.P2_mean);
        put_opt(out, r.delta2);
        put_opt(out, r.s_l);
        put_opt(out, r.S_vn);
        put_opt(out, r.S_cl);
        out << '\n';
    }
}

TimeSeries TimeSeries::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open time series: " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "n,P_mean,P2_mean,delta2,s_l,S_vn,S_cl")
        throw ConfigError("bad time series header in " + path);
    TimeSeries ts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Row row;
        std::size_t pos = 0;
        int field = 0;
        std::optional<double> Row::* fields[] = {&Row::P_mean,  &Row::P2_mean,
                                                 &Row::delta2,  &Row::s_l,
                                                 &Row::S_vn,    &Row::S_cl};
        while (true) {
            auto comma = line.find(',', pos);
            std::string tok = line.substr(
                pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (field == 0) {
                row.n = std::strtoll(tok.c_str(), nullptr, 10);
            } else if (field <= 6) {
                if (!tok.empty()) row.*fields[field - 1] = std::strtod(tok.c_str(), nullptr);
            } else {
                throw ConfigError("too many columns in " + path);
            }
            ++field;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (field != 7) throw ConfigError("wrong column count in " + path);
        ts.rows.push_back(row);
    }
    return ts;
}

}  // namespace kduo
