#ifndef KGE_POINCARE_HPP_
#define KGE_POINCARE_HPP_

#include <cmath>
#include <stdexcept>

#include "kge/linalg.hpp"

namespace kge {

// Retraction margin: every ball point keeps ‖x‖ ≤ (1 − kBallEps)/√c, so
// atanh arguments stay strictly below 1.
inline constexpr double kBallEps = 1e-5;

// Point in the open Poincaré ball of curvature −c (c > 0).
struct BallPoint {
    Vec coords;
    double c = 1.0;
};

struct TangentVec {
    Vec coords;
    BallPoint basepoint;
};

namespace detail {

inline double safe_atanh(double z) {
    const double cap = 1.0 - 1e-15;
    if (z > cap) z = cap;
    if (z < -cap) z = -cap;
    return std::atanh(z);
}

inline void check_compat(const BallPoint& x, const BallPoint& y) {
    if (x.coords.size() != y.coords.size())
        throw std::invalid_argument("ball: dimension mismatch");
    if (x.c != y.c) throw std::invalid_argument("ball: curvature mismatch");
}

}  // namespace detail

inline BallPoint project_to_ball(Vec v, double c) {
    double n2 = norm2(v);
    double cap = (1.0 - kBallEps) / std::sqrt(c);
    if (c * n2 >= cap * cap * c) {
        double scale = cap / std::sqrt(n2);
        for (double& x : v) x *= scale;
    }
    return BallPoint{std::move(v), c};
}

// λ_x^c = 2 / (1 − c‖x‖²)
inline double conformal_factor(const BallPoint& x) {
    return 2.0 / (1.0 - x.c * norm2(x.coords));
}

inline BallPoint mobius_add(const BallPoint& x, const BallPoint& y) {
    detail::check_compat(x, y);
    const double c = x.c;
    double xx = norm2(x.coords);
    double yy = norm2(y.coords);
    double xy = dot(x.coords, y.coords);
    double a = 1.0 + 2.0 * c * xy + c * yy;
    double b = 1.0 - c * xx;
    double den = 1.0 + 2.0 * c * xy + c * c * xx * yy;
    Vec out(x.coords.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (a * x.coords[i] + b * y.coords[i]) / den;
    return project_to_ball(std::move(out), c);
}

inline BallPoint negate(const BallPoint& x) {
    Vec out(x.coords.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -x.coords[i];
    return BallPoint{std::move(out), x.c};
}

// d_B(x, y) = (2/√c) atanh(√c ‖(−x) ⊕ y‖)
inline double distance(const BallPoint& x, const BallPoint& y) {
    detail::check_compat(x, y);
    double sc = std::sqrt(x.c);
    BallPoint m = mobius_add(negate(x), y);
    return 2.0 / sc * detail::safe_atanh(sc * norm(m.coords));
}

inline BallPoint exp_map(const BallPoint& x, const TangentVec& v) {
    double c = x.c;
    double sc = std::sqrt(c);
    double nv = norm(v.coords);
    if (nv < 1e-300) return x;
    double lam = conformal_factor(x);
    double scale = std::tanh(sc * lam * nv / 2.0) / (sc * nv);
    Vec step(v.coords.size());
    for (std::size_t i = 0; i < step.size(); ++i) step[i] = scale * v.coords[i];
    return mobius_add(x, BallPoint{std::move(step), c});
}

inline TangentVec log_map(const BallPoint& x, const BallPoint& y) {
    detail::check_compat(x, y);
    double c = x.c;
    double sc = std::sqrt(c);
    BallPoint m = mobius_add(negate(x), y);
    double nm = norm(m.coords);
    if (nm < 1e-300) return TangentVec{Vec(x.coords.size(), 0.0), x};
    double lam = conformal_factor(x);
    double scale = 2.0 / (sc * lam) * detail::safe_atanh(sc * nm) / nm;
    Vec out(m.coords.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * m.coords[i];
    return TangentVec{std::move(out), x};
}

// M ⊗_c x = exp_0(M log_0(x))
inline BallPoint mobius_matvec(const Mat& m, const BallPoint& x) {
    if (m.cols != x.coords.size())
        throw std::invalid_argument("mobius_matvec: dimension mismatch");
    BallPoint origin{Vec(x.coords.size(), 0.0), x.c};
    TangentVec t = log_map(origin, x);
    Vec mapped = mat_vec(m, t.coords);
    BallPoint origin_out{Vec(mapped.size(), 0.0), x.c};
    return exp_map(origin_out, TangentVec{std::move(mapped), origin_out});
}

}  // namespace kge

#endif
