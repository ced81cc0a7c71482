#include "kduo/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace kduo {

namespace {
constexpr char kMagic[4] = {'K', 'D', 'U', 'O'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const char* what) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw IoError(std::string("checkpoint truncated reading ") + what);
    return v;
}
}  // namespace

void write_checkpoint(const std::string& path, const QuantumState& s) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path);
    out.write(kMagic, 4);
    put(out, kVersion);
    put(out, static_cast<std::uint64_t>(s.params.N_R));
    put(out, static_cast<std::uint64_t>(s.params.N_r));
    put(out, static_cast<std::uint8_t>(s.rep));
    put(out, static_cast<std::uint64_t>(s.kick_count));
    const ModelParams& p = s.params;
    for (double v : {p.m, p.M, p.mu, p.k, p.K, p.T, p.hbar, p.w,
                     static_cast<double>(p.n_kicks)})
        put(out, v);
    out.write(reinterpret_cast<const char*>(s.data()),
              static_cast<std::streamsize>(s.size() * sizeof(cplx)));
    if (!out) throw IoError("checkpoint write failed: " + path);
}

QuantumState read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("not a checkpoint file: " + path);
    const auto version = get<std::uint32_t>(in, "version");
    if (version != kVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version));
    const auto N_R = static_cast<std::int64_t>(get<std::uint64_t>(in, "N_R"));
    const auto N_r = static_cast<std::int64_t>(get<std::uint64_t>(in, "N_r"));
    const auto rep_tag = get<std::uint8_t>(in, "rep");
    if (rep_tag > 1) throw IoError("bad representation tag in " + path);
    const auto kick_count = static_cast<std::int64_t>(get<std::uint64_t>(in, "kick_count"));
    double fields[9];
    for (int i = 0; i < 9; ++i) fields[i] = get<double>(in, "params");
    ModelParams p;
    p.m = fields[0];
    p.M = fields[1];
    p.mu = fields[2];
    p.k = fields[3];
    p.K = fields[4];
    p.T = fields[5];
    p.hbar = fields[6];
    p.w = fields[7];
    p.n_kicks = static_cast<std::int64_t>(fields[8]);
    p.N_R = N_R;
    p.N_r = N_r;
    validate(p);
    QuantumState s(p, static_cast<Rep>(rep_tag));
    s.kick_count = kick_count;
    in.read(reinterpret_cast<char*>(s.data()),
            static_cast<std::streamsize>(s.size() * sizeof(cplx)));
    if (!in) throw IoError("checkpoint truncated reading state: " + path);
    return s;
}

std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_distribution_csv(const std::string& path, const Distribution& d) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "P,f\n";
    for (std::size_t i = 0; i < d.P.size(); ++i)
        out << format_g17(d.P[i]) << ',' << format_g17(d.f[i]) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

void write_ensemble_csv(const std::string& path, const std::vector<double>& R,
                        const std::vector<double>& P,
                        const std::vector<double>& r,
                        const std::vector<double>& p) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "R,P,r,p\n";
    for (std::size_t i = 0; i < R.size(); ++i)
        out << format_g17(R[i]) << ',' << format_g17(P[i]) << ','
            << format_g17(r[i]) << ',' << format_g17(p[i]) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

void write_timeseries_csv(const std::string& path, const TimeSeries& ts) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    ts.write_csv(out);
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace kduo
