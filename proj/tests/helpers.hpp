#pragma once

// Shared fixtures for the test suite: synthetic data generators, filesystem
// scratch areas, and small numeric utilities.

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "riskpipe/matrix.hpp"
#include "riskpipe/rng.hpp"

namespace testutil {

/// Fresh scratch directory under the system temp root, cleared on entry.
inline std::string scratch_dir(const std::string& name) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "riskpipe_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline bool bits_equal(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

/// Standard normal via Box-Muller on the library generator.
inline double gauss(riskpipe::Rng& rng) {
    double u = 0.0;
    do { u = rng.uniform01(); } while (u <= 1e-300);
    const double v = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
}

struct Blobs {
    riskpipe::Matrix X;
    std::vector<double> y;  // blob index per row
};

/// `per_blob` points around each center, isotropic Gaussian noise `sigma`.
inline Blobs make_blobs(const std::vector<std::vector<double>>& centers, std::size_t per_blob,
                        double sigma, std::uint64_t seed) {
    riskpipe::Rng rng(seed);
    const std::size_t p = centers.front().size();
    Blobs out;
    out.X = riskpipe::Matrix(centers.size() * per_blob, p);
    std::size_t r = 0;
    for (std::size_t c = 0; c < centers.size(); ++c)
        for (std::size_t i = 0; i < per_blob; ++i, ++r) {
            for (std::size_t j = 0; j < p; ++j)
                out.X(r, j) = centers[c][j] + sigma * gauss(rng);
            out.y.push_back(static_cast<double>(c));
        }
    return out;
}

/// Regression set y = X w + noise.
struct RegData {
    riskpipe::Matrix X;
    std::vector<double> y;
};

inline RegData make_regression(std::size_t n, const std::vector<double>& w, double noise,
                               std::uint64_t seed) {
    riskpipe::Rng rng(seed);
    RegData out;
    out.X = riskpipe::Matrix(n, w.size());
    out.y.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        double t = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            out.X(r, j) = gauss(rng);
            t += w[j] * out.X(r, j);
        }
        out.y[r] = t + noise * gauss(rng);
    }
    return out;
}

/// The end-to-end corpus matching the bundled configuration fixtures:
/// columns Sample (id), Type (3-value text label), A and B (dropped),
/// C and D (categorical), x1..x3 (numeric, correlated with Type).
/// A few cells are blanked to exercise imputation.
inline std::string e2e_csv(std::size_t n_rows, std::uint64_t seed) {
    riskpipe::Rng rng(seed);
    std::ostringstream out;
    out << "Sample,Type,A,B,C,D,x1,x2,x3\n";
    const char* types[3] = {"alpha", "beta", "gamma"};
    const char* cs[3] = {"red", "green", "blue"};
    const char* dsv[2] = {"yes", "no"};
    for (std::size_t r = 0; r < n_rows; ++r) {
        const std::size_t t = rng.uniform_int(3);
        out << (r + 1) << "," << types[t] << ",junk," << rng.uniform01() << ","
            << cs[rng.uniform_int(3)] << ",";
        if (rng.uniform01() < 0.1)
            out << "";  // missing categorical cell
        else
            out << dsv[rng.uniform_int(2)];
        for (int j = 0; j < 3; ++j) {
            out << ",";
            if (rng.uniform01() < 0.05) continue;  // missing numeric cell
            const double v = static_cast<double>(t) * 2.0 + gauss(rng) * 0.5 +
                             (j == 2 ? 10.0 : 0.0);
            out << v;
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace testutil
