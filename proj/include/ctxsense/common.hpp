#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctxsense {

// ---------------------------------------------------------------------------
// Error taxonomy. The CLI maps these onto exit codes: input/format -> 2,
// model -> 3, alignment -> 4.
// ---------------------------------------------------------------------------

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct format_error : error {
    using error::error;
};

struct corrupt_input_error : error {
    using error::error;
};

struct precondition_error : error {
    using error::error;
};

// Feature schema mismatch between a model and its input.
struct schema_error : error {
    using error::error;
};

struct model_error : error {
    using error::error;
};

struct alignment_error : error {
    using error::error;
};

struct validation_error : error {
    using error::error;
};

// Optimizer failed to reach its tolerance; carries the residual for diagnosis.
struct convergence_error : error {
    double residual;
    convergence_error(const std::string& what, double r) : error(what), residual(r) {}
};

// ---------------------------------------------------------------------------
// Small numeric types
// ---------------------------------------------------------------------------

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline double magnitude(const Vec3& v) {
    return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
}

// Dense row-major matrix, just big enough for transition/connection matrices.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    // y = M * x
    std::vector<double> apply(const std::vector<double>& x) const {
        if (x.size() != cols_) throw precondition_error("Mat::apply: dimension mismatch");
        std::vector<double> y(rows_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * x[c];
            y[r] = acc;
        }
        return y;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Probability-vector helpers
// ---------------------------------------------------------------------------

inline void normalize_in_place(std::vector<double>& p) {
    double s = std::accumulate(p.begin(), p.end(), 0.0);
    if (!(s > 0.0)) throw precondition_error("normalize: total mass is zero");
    for (double& v : p) v /= s;
}

inline std::vector<double> normalized(std::vector<double> p) {
    normalize_in_place(p);
    return p;
}

// Ties break toward the lowest index.
inline std::size_t argmax_index(const std::vector<double>& p) {
    if (p.empty()) throw precondition_error("argmax of empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i] > p[best]) best = i;
    return best;
}

inline bool is_distribution(const std::vector<double>& p, double tol = 1e-9) {
    double s = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v)) return false;
        s += v;
    }
    return std::abs(s - 1.0) <= tol;
}

// ---------------------------------------------------------------------------
// Deterministic random numbers. The standard distributions are
// implementation-defined, so synthesis rolls its own transforms to keep
// generated corpora byte-stable across toolchains.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        // xorshift* variant; fixed here independent of the standard library.
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dULL;
    }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [lo, hi] inclusive
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    double normal(double mean = 0.0, double sigma = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + sigma * spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return mean + sigma * r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace ctxsense
