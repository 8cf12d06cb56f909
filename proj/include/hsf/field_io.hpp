#pragma once

// Field snapshots: a flat binary file plus a sidecar text `.meta` file, and
// CSV export of 1-D slices.
//
// Binary layout (all little-endian):
//   int64 header[7] = { n, rank, nx, nn, nt, normal_extent, time_extent }
//   float64 values[...] in (t, x_n, x', component) row-major order

#include <bit>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "hsf/field.hpp"

namespace hsf {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void write_meta(const Field& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path);
    const auto& s = f.grid().spec();
    os << std::setprecision(17);
    os << "dim = " << s.dim << "\n"
       << "rank = " << int(f.rank()) << "\n"
       << "L = " << s.L << "\nnx = " << s.nx << "\n"
       << "H = " << s.H << "\nnn = " << s.nn << "\n"
       << "T = " << s.T << "\nnt = " << s.nt << "\n"
       << "normal_spacing = " << (s.normal_spacing == Spacing::uniform ? "uniform" : "graded") << "\n"
       << "time_spacing = " << (s.time_spacing == Spacing::uniform ? "uniform" : "graded") << "\n"
       << "grading = " << s.grading << "\n"
       << "normal_extent = " << to_string(f.normal_extent()) << "\n"
       << "time_extent = " << to_string(f.time_extent()) << "\n"
       << "layout = t,x_n,x',component\n";
}

inline void write_snapshot(const Field& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path);
    const auto& s = f.grid().spec();
    const std::int64_t hdr[7] = {s.dim, std::int64_t(f.rank()), s.nx, s.nn, s.nt,
                                 std::int64_t(f.normal_extent()), std::int64_t(f.time_extent())};
    os.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
    auto v = f.values();
    os.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
    write_meta(f, path + ".meta");
}

inline std::map<std::string, std::string> read_key_values(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string x) {
            const auto a = x.find_first_not_of(" \t\r");
            const auto b = x.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : x.substr(a, b - a + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline Field read_snapshot(const std::string& path) {
    auto kv = read_key_values(path + ".meta");
    auto get = [&](const char* k) {
        auto it = kv.find(k);
        if (it == kv.end()) throw IoError(std::string("snapshot meta missing ") + k);
        return it->second;
    };
    GridSpec s;
    s.dim = std::stoi(get("dim"));
    s.L = std::stod(get("L"));
    s.nx = std::stoi(get("nx"));
    s.H = std::stod(get("H"));
    s.nn = std::stoi(get("nn"));
    s.T = std::stod(get("T"));
    s.nt = std::stoi(get("nt"));
    s.normal_spacing = get("normal_spacing") == "graded" ? Spacing::graded : Spacing::uniform;
    s.time_spacing = get("time_spacing") == "graded" ? Spacing::graded : Spacing::uniform;
    s.grading = std::stod(get("grading"));

    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    std::int64_t hdr[7];
    is.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
    if (!is || hdr[0] != s.dim || hdr[2] != s.nx || hdr[3] != s.nn || hdr[4] != s.nt)
        throw IoError("snapshot header disagrees with meta: " + path);
    if (hdr[1] < 0 || hdr[1] > 2 || hdr[5] < 0 || hdr[5] > 2 || hdr[6] < 0 || hdr[6] > 2)
        throw IoError("snapshot header has invalid enums: " + path);
    Field f{Grid(s), Rank(hdr[1]), NormalExtent(hdr[5]), TimeExtent(hdr[6])};
    auto v = f.values();
    is.read(reinterpret_cast<char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
    if (!is) throw IoError("snapshot truncated: " + path);
    return f;
}

/// Which coordinate a 1-D slice runs along.
enum class SliceAxis { tangential, normal, time };

/// Writes `coord,c0,c1,...` for the slice through (m, k, p) along `axis`.
inline void write_slice_csv(const Field& f, SliceAxis axis, std::size_t m, std::size_t k, std::size_t p,
                            const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path);
    os << std::setprecision(17);
    const int C = f.components();
    os << (axis == SliceAxis::tangential ? "x1" : axis == SliceAxis::normal ? "xn" : "t");
    for (int c = 0; c < C; ++c) os << ",c" << c;
    os << "\n";
    auto row = [&](double coord, std::size_t mm, std::size_t kk, std::size_t pp) {
        os << coord;
        for (int c = 0; c < C; ++c) os << "," << f(mm, kk, pp, c);
        os << "\n";
    };
    switch (axis) {
        case SliceAxis::tangential: {
            // run along x1 keeping the other tangential index of p
            const std::size_t nx = std::size_t(f.grid().nx());
            const std::size_t stride = f.dim() == 3 ? nx : 1;
            const std::size_t base = f.dim() == 3 ? p % nx : 0;
            for (std::size_t i = 0; i < nx; ++i) row(f.x(base + i * stride, 0), m, k, base + i * stride);
            break;
        }
        case SliceAxis::normal:
            for (std::size_t kk = 0; kk < f.nz_nodes(); ++kk) row(f.z(kk), m, kk, p);
            break;
        case SliceAxis::time:
            for (std::size_t mm = 0; mm < f.nt_nodes(); ++mm) row(f.t(mm), mm, k, p);
            break;
    }
}

}  // namespace hsf
