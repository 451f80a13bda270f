#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fragpes {

// Error categories map onto CLI exit codes: config/usage -> 1,
// data -> 2, numeric -> 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr double kHartreeToKcalPerMol = 627.5094740631;

// ---------------------------------------------------------------------------
// Deterministic random numbers.
//
// All randomness in the library flows through Rng. We avoid the standard
// distributions on purpose: their output is implementation-defined, and the
// pipeline promises byte-identical artifacts for a fixed seed.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_{} {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t u64() {
        // xoshiro256**
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, n)
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(u64() % n); }

    // uniform in [0, 1)
    double real01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * real01(); }

    double normal() {
        // Box-Muller; one value per call keeps the stream simple to reason about.
        double u1 = real01();
        double u2 = real01();
        while (u1 <= 1e-300) u1 = real01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> s_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derive an independent seed for a named sub-task of a run.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) {
    std::uint64_t st = master ^ fnv1a64(stream);
    return splitmix64(st);
}

// ---------------------------------------------------------------------------
// Text formatting. %.17g round-trips doubles exactly, which the artifact
// determinism contract relies on.

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(std::string_view tok) {
    std::string s(tok);
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw DataError("not a number: '" + s + "'");
    return v;
}

inline long parse_long(std::string_view tok) {
    std::string s(tok);
    char* end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw DataError("not an integer: '" + s + "'");
    return v;
}

std::vector<std::string> split_ws(std::string_view line);
std::string trim(std::string_view s);

// ---------------------------------------------------------------------------
// Dense row-major matrix of doubles; the common currency for descriptor
// batches, centroids and network weights.

class DataMatrix {
public:
    DataMatrix() = default;
    DataMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return cols_ == 0 ? 0 : data_.size() / cols_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }
    std::span<const double> row_span(std::size_t i) const { return {row(i), cols_}; }
    std::span<double> row_span(std::size_t i) { return {row(i), cols_}; }

    double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    void set_cols(std::size_t c) {
        if (!data_.empty() && cols_ != c)
            throw DataError("DataMatrix: cannot change column count of non-empty matrix");
        cols_ = c;
    }

    void push_row(std::span<const double> r) {
        if (cols_ == 0) cols_ = r.size();
        if (r.size() != cols_) throw DataError("DataMatrix: row width mismatch");
        data_.insert(data_.end(), r.begin(), r.end());
    }

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

private:
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Worker pool. FRAGPES_THREADS caps the thread count. Chunked results must be
// written by index; reductions happen serially afterwards so that artifacts
// do not depend on the thread count.

std::size_t worker_count();
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk_fn);

}  // namespace fragpes
