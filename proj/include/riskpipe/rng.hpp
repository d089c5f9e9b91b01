#pragma once

#include <cstdint>
#include <vector>

namespace riskpipe {

/// Deterministic splitmix64 generator. The standard library engines are
/// portable but the distributions are not, so every random draw in the
/// library goes through this type to keep results identical across
/// platforms and compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Unbiased uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

/// Derive an independent stream seed from a base seed and up to two tags.
/// Used so that parallel-safe components (forest members, CV folds, SMOTE
/// samples, ...) draw from streams that do not depend on scheduling order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    Rng r(base ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL));
    return r.next_u64();
}

/// FNV-1a hash, used to derive stable per-column seed tags from names.
inline std::uint64_t fnv1a(const char* data, std::size_t n) {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 1099511628211ULL;
    }
    return h;
}

/// Fixed domain tags so each pipeline stage draws from its own stream.
namespace seed_domain {
inline constexpr std::uint64_t split = 1;
inline constexpr std::uint64_t impute = 2;
inline constexpr std::uint64_t smote = 3;
inline constexpr std::uint64_t model = 4;
inline constexpr std::uint64_t cv = 5;
inline constexpr std::uint64_t shap = 6;
}  // namespace seed_domain

}  // namespace riskpipe
