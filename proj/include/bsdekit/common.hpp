#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsdekit {

// Thrown for invalid configuration / model input (CLI exit code 2).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown for numeric failures: non-finite values, overflow windows,
// degenerate fits (CLI exit code 3).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an iterative solver exhausts its budget (CLI exit code 3).
struct SolverError : NumericError {
    using NumericError::NumericError;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// |v|^p with an exact fast path for p == 2 (keeps the x -> 2x cost
// homogeneity test bit-exact: scaling by a power of two commutes with
// squaring in IEEE arithmetic).
inline double pow_abs(double v, double p) {
    double a = std::fabs(v);
    if (p == 2.0) return a * a;
    if (p == 1.0) return a;
    return std::pow(a, p);
}

// sign(v) * |v|^p, same fast paths.
inline double pow_signed(double v, double p) {
    double m = pow_abs(v, p);
    return v < 0 ? -m : m;
}

// Node-indexed value table: (n_slices) time slices x (n_points) state nodes.
struct Field {
    std::size_t n_slices = 0;
    std::size_t n_points = 0;
    std::vector<double> v;

    Field() = default;
    Field(std::size_t slices, std::size_t points, double fill = 0.0)
        : n_slices(slices), n_points(points), v(slices * points, fill) {}

    double& at(std::size_t i, std::size_t j) { return v[i * n_points + j]; }
    double at(std::size_t i, std::size_t j) const { return v[i * n_points + j]; }
    double* slice(std::size_t i) { return v.data() + i * n_points; }
    const double* slice(std::size_t i) const { return v.data() + i * n_points; }
    bool same_shape(const Field& o) const {
        return n_slices == o.n_slices && n_points == o.n_points;
    }
};

// Splittable counter-based RNG; one independent stream per simulated path.
struct SplitMix64 {
    std::uint64_t s;
    explicit SplitMix64(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        s += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

inline SplitMix64 path_stream(std::uint64_t seed, std::uint64_t path_index) {
    return SplitMix64(seed + (path_index + 1) * 0x9E3779B97F4A7C15ull);
}

} // namespace bsdekit
