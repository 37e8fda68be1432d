#ifndef KGE_LINALG_HPP_
#define KGE_LINALG_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace kge {

using Vec = std::vector<double>;

// Row-major dense matrix: entry (i, j) lives at data[i * cols + j].
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

// Order-3 tensor: entry (i, j, k) lives at ((i * d2) + j) * d3 + k.
struct Tensor3 {
    std::size_t d1 = 0, d2 = 0, d3 = 0;
    Vec data;

    Tensor3() = default;
    Tensor3(std::size_t a, std::size_t b, std::size_t c, double fill = 0.0)
        : d1(a), d2(b), d3(c), data(a * b * c, fill) {}

    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return data[(i * d2 + j) * d3 + k];
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return data[(i * d2 + j) * d3 + k];
    }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(norm2(a)); }

inline Vec mat_vec(const Mat& m, std::span<const double> v) {
    if (m.cols != v.size())
        throw std::invalid_argument("mat_vec: dimension mismatch");
    Vec out(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) s += m.at(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

// w ×₁ a ×₂ b ×₃ c = Σ_{ijk} w_ijk a_i b_j c_k
inline double tucker_trilinear(const Tensor3& w, std::span<const double> a,
                               std::span<const double> b,
                               std::span<const double> c) {
    if (w.d1 != a.size() || w.d2 != b.size() || w.d3 != c.size())
        throw std::invalid_argument("tucker_trilinear: dimension mismatch");
    double s = 0.0;
    const double* p = w.data.data();
    for (std::size_t i = 0; i < w.d1; ++i) {
        double si = 0.0;
        for (std::size_t j = 0; j < w.d2; ++j) {
            double sj = 0.0;
            for (std::size_t k = 0; k < w.d3; ++k) sj += *p++ * c[k];
            si += sj * b[j];
        }
        s += si * a[i];
    }
    return s;
}

// Relation-mode mixing: M_ik = Σ_j w_ijk b_j, the relation-specific matrix.
inline Mat mode3_mix(const Tensor3& w, std::span<const double> b) {
    if (w.d2 != b.size())
        throw std::invalid_argument("mode3_mix: dimension mismatch");
    Mat m(w.d1, w.d3);
    const double* p = w.data.data();
    for (std::size_t i = 0; i < w.d1; ++i)
        for (std::size_t j = 0; j < w.d2; ++j)
            for (std::size_t k = 0; k < w.d3; ++k)
                m.at(i, k) += *p++ * b[j];
    return m;
}

}  // namespace kge

#endif
