#include "kduo/params.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace kduo {

ModelParams derive_params(double m, double k, double T, double hbar, double w,
                          std::int64_t N_R, std::int64_t N_r,
                          std::int64_t n_kicks) {
    ModelParams p;
    p.m = m;
    p.k = k;
    p.T = T;
    p.hbar = hbar;
    p.w = w;
    p.N_R = N_R;
    p.N_r = N_r;
    p.n_kicks = n_kicks;
    p.M = 2.0 * m;
    p.mu = 0.5 * m;
    p.K = 2.0 * k;
    validate(p);
    return p;
}

void validate(const ModelParams& p) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string(name) + " must be positive and finite");
    };
    positive(p.m, "m");
    positive(p.T, "T");
    positive(p.hbar, "hbar");
    positive(p.w, "w");
    if (p.k < 0.0 || !std::isfinite(p.k))
        throw ConfigError("k must be non-negative and finite");
    if (p.w > std::numbers::pi)
        throw ConfigError("w must not exceed pi");
    if (p.N_R <= 0 || p.N_r <= 0)
        throw ConfigError("N_R and N_r must be positive");
    if (p.N_R % 2 != 0)
        throw ConfigError("N_R must be even");
    if (p.n_kicks < 0)
        throw ConfigError("n_kicks must be non-negative");
    // derived-field consistency
    auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b));
    };
    if (!close(p.M, 2.0 * p.m) || !close(p.mu, 0.5 * p.m) || !close(p.K, 2.0 * p.k))
        throw ConfigError("derived fields inconsistent: require M=2m, mu=m/2, K=2k");
}

std::vector<double> box_spectrum(const ModelParams& p) {
    validate(p);
    std::vector<double> e(static_cast<std::size_t>(p.N_r));
    const double pref =
        std::numbers::pi * std::numbers::pi * p.hbar * p.hbar / (8.0 * p.mu * p.w * p.w);
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        e[i] = pref * n * n;
    }
    return e;
}

static std::map<std::string, std::string> parse_kv_stream(std::istream& in,
                                                          const std::string& origin) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r\n");
        std::string body = line.substr(first, last - first + 1);
        auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected key=value, got '" + body + "'");
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t");
            auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(body.substr(0, eq));
        std::string val = trim(body.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        kv[key] = val;
    }
    return kv;
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_kv_stream(in, path);
}

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
    std::istringstream in(text);
    return parse_kv_stream(in, "<inline>");
}

}  // namespace kduo
