#ifndef KGE_MODELS_HPP_
#define KGE_MODELS_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kge/linalg.hpp"
#include "kge/poincare.hpp"
#include "kge/rng.hpp"

namespace kge {

enum class ModelKind { TransE, DistMult, ComplEx, TuckER, MuRE, MuRP, HypER };

inline const char* model_name(ModelKind k) {
    switch (k) {
        case ModelKind::TransE: return "transe";
        case ModelKind::DistMult: return "distmult";
        case ModelKind::ComplEx: return "complex";
        case ModelKind::TuckER: return "tucker";
        case ModelKind::MuRE: return "mure";
        case ModelKind::MuRP: return "murp";
        case ModelKind::HypER: return "hyper";
    }
    return "?";
}

inline ModelKind model_from_name(const std::string& s) {
    for (ModelKind k : {ModelKind::TransE, ModelKind::DistMult,
                        ModelKind::ComplEx, ModelKind::TuckER, ModelKind::MuRE,
                        ModelKind::MuRP, ModelKind::HypER})
        if (s == model_name(k)) return k;
    throw std::invalid_argument("unknown model: " + s);
}

// Parameter block. Which members are populated depends on the kind:
//   TransE/DistMult  entity (n_e×d_e), relation (n_r×d_e)
//   ComplEx          entity (n_e×2d_e), relation (n_r×2d_e); first half real
//   TuckER           entity (n_e×d_e), relation (n_r×d_r), core (d_e×d_r×d_e)
//   MuRE             entity, relation (offsets), rel_diag, bias_s, bias_o
//   MuRP             as MuRE, entity rows and relation offsets live on the
//                    Poincaré ball of curvature −c
//   HypER            entity, relation (n_r×d_r), hyper_h (d_r×l_f·n_f),
//                    hyper_w (l_m·n_f×d_e) with l_m = d_e − l_f + 1
struct ModelParams {
    ModelKind kind = ModelKind::DistMult;
    std::size_t n_e = 0, n_r = 0;
    std::size_t d_e = 0, d_r = 0;
    std::size_t l_f = 0, n_f = 0;
    double curvature = 1.0;

    Mat entity;
    Mat relation;
    Mat rel_diag;
    Vec bias_s, bias_o;
    Tensor3 core;
    Mat hyper_h, hyper_w;

    std::size_t entity_dim() const {
        return kind == ModelKind::ComplEx ? 2 * d_e : d_e;
    }
    std::size_t feature_map_len() const { return d_e - l_f + 1; }

    std::span<const double> entity_row(std::uint32_t i) const {
        return {entity.data.data() + i * entity.cols, entity.cols};
    }
    std::span<const double> relation_row(std::uint32_t i) const {
        return {relation.data.data() + i * relation.cols, relation.cols};
    }
    std::span<const double> rel_diag_row(std::uint32_t i) const {
        return {rel_diag.data.data() + i * rel_diag.cols, rel_diag.cols};
    }
};

enum class ParamArray : std::uint8_t {
    Entity,
    Relation,
    RelDiag,
    BiasS,
    BiasO,
    Core,
    HyperH,
    HyperW
};

// Gradient for one parameter slot: a row of an embedding matrix, a scalar
// bias (length-1 vector), or a whole block (Core/HyperH/HyperW, row = 0).
struct SlotGrad {
    ParamArray array;
    std::uint32_t row;
    Vec g;
};

struct ScoreGrad {
    double score = 0.0;
    std::vector<SlotGrad> grads;
};

inline double sigmoid(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

// ---------------------------------------------------------------------------
// score functions

inline double score_transe(const ModelParams& p, std::uint32_t s,
                           std::uint32_t r, std::uint32_t o) {
    auto es = p.entity_row(s), eo = p.entity_row(o), rv = p.relation_row(r);
    double acc = 0.0;
    for (std::size_t i = 0; i < es.size(); ++i) {
        double d = es[i] + rv[i] - eo[i];
        acc += d * d;
    }
    return -acc;
}

inline double score_distmult(const ModelParams& p, std::uint32_t s,
                             std::uint32_t r, std::uint32_t o) {
    auto es = p.entity_row(s), eo = p.entity_row(o), rv = p.relation_row(r);
    double acc = 0.0;
    for (std::size_t i = 0; i < es.size(); ++i) acc += es[i] * rv[i] * eo[i];
    return acc;
}

inline double score_complex(const ModelParams& p, std::uint32_t s,
                            std::uint32_t r, std::uint32_t o) {
    auto es = p.entity_row(s), eo = p.entity_row(o), rv = p.relation_row(r);
    std::size_t d = p.d_e;
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double rs = es[i], is = es[d + i];
        double rw = rv[i], iw = rv[d + i];
        double ro = eo[i], io = eo[d + i];
        acc += rs * rw * ro + is * rw * io + rs * iw * io - is * iw * ro;
    }
    return acc;
}

inline double score_tucker(const ModelParams& p, std::uint32_t s,
                           std::uint32_t r, std::uint32_t o) {
    return tucker_trilinear(p.core, p.entity_row(s), p.relation_row(r),
                            p.entity_row(o));
}

inline double score_mure(const ModelParams& p, std::uint32_t s,
                         std::uint32_t r, std::uint32_t o) {
    auto es = p.entity_row(s), eo = p.entity_row(o);
    auto rv = p.relation_row(r), rd = p.rel_diag_row(r);
    double acc = 0.0;
    for (std::size_t i = 0; i < es.size(); ++i) {
        double d = rd[i] * es[i] - (eo[i] + rv[i]);
        acc += d * d;
    }
    return -acc + p.bias_s[s] + p.bias_o[o];
}

namespace detail {

// Möbius scalings at the origin for the diagonal matvec: exp_0 applies
// tanh(√c ρ)/(√c ρ), log_0 applies atanh(√c ρ)/(√c ρ).
inline double exp0_scale(double c, double rho) {
    double x = std::sqrt(c) * rho;
    if (x < 1e-3) return 1.0 - x * x / 3.0;
    return std::tanh(x) / x;
}

inline double log0_scale(double c, double rho) {
    double x = std::sqrt(c) * rho;
    if (x < 1e-3) return 1.0 + x * x / 3.0;
    return safe_atanh(x) / x;
}

// d/dρ of the above scalings, divided by ρ (the rank-one Jacobian weight)
inline double exp0_scale_dr(double c, double rho) {
    double x = std::sqrt(c) * rho;
    if (x < 1e-3) return c * (-2.0 / 3.0 + 8.0 * x * x / 15.0);
    double th = std::tanh(x);
    double sech2 = 1.0 - th * th;
    return c * (x * sech2 - th) / (x * x * x);
}

inline double log0_scale_dr(double c, double rho) {
    double x = std::sqrt(c) * rho;
    if (x < 1e-3) return c * (2.0 / 3.0 + 4.0 * x * x / 5.0);
    return c * (x / (1.0 - x * x) - safe_atanh(x)) / (x * x * x);
}

inline Vec murp_log0(double c, std::span<const double> x) {
    double scale = log0_scale(c, norm(x));
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale * x[i];
    return out;
}

inline Vec murp_exp0(double c, std::span<const double> v) {
    double scale = exp0_scale(c, norm(v));
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = scale * v[i];
    return out;
}

inline Vec murp_mobius_add(double c, std::span<const double> a,
                           std::span<const double> b) {
    double aa = norm2(a), bb = norm2(b), ab = dot(a, b);
    double alpha = 1.0 + 2.0 * c * ab + c * bb;
    double beta = 1.0 - c * aa;
    double den = 1.0 + 2.0 * c * ab + c * c * aa * bb;
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = (alpha * a[i] + beta * b[i]) / den;
    return out;
}

inline double murp_dist(double c, std::span<const double> x,
                        std::span<const double> y) {
    Vec nx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) nx[i] = -x[i];
    Vec m = murp_mobius_add(c, nx, y);
    double sc = std::sqrt(c);
    return 2.0 / sc * safe_atanh(sc * norm(m));
}

}  // namespace detail

inline double score_murp(const ModelParams& p, std::uint32_t s, std::uint32_t r,
                         std::uint32_t o) {
    double c = p.curvature;
    auto hs = p.entity_row(s), ho = p.entity_row(o);
    auto rv = p.relation_row(r), rd = p.rel_diag_row(r);
    Vec t = detail::murp_log0(c, hs);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] *= rd[i];
    Vec u = detail::murp_exp0(c, t);
    Vec v = detail::murp_mobius_add(c, ho, rv);
    double d = detail::murp_dist(c, u, v);
    return -d * d + p.bias_s[s] + p.bias_o[o];
}

// F_r = reshape(w_r H) to l_f×n_f, row-major: F_r[u, f] = (w_r H)[u·n_f + f]
inline Mat hyper_filters(const ModelParams& p, std::uint32_t r) {
    auto w = p.relation_row(r);
    Mat f(p.l_f, p.n_f);
    for (std::size_t u = 0; u < p.l_f; ++u)
        for (std::size_t c = 0; c < p.n_f; ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < p.d_r; ++j)
                acc += w[j] * p.hyper_h.at(j, u * p.n_f + c);
            f.at(u, c) = acc;
        }
    return f;
}

// Stride-1, no-padding 1D convolution: M[t, f] = Σ_u e_s[t+u]·F[u, f]
inline Mat hyper_feature_map(std::span<const double> es, const Mat& filters) {
    std::size_t l_f = filters.rows, n_f = filters.cols;
    if (es.size() < l_f)
        throw std::invalid_argument("hyper: filter longer than embedding");
    std::size_t l_m = es.size() - l_f + 1;
    Mat m(l_m, n_f);
    for (std::size_t t = 0; t < l_m; ++t)
        for (std::size_t f = 0; f < n_f; ++f) {
            double acc = 0.0;
            for (std::size_t u = 0; u < l_f; ++u)
                acc += es[t + u] * filters.at(u, f);
            m.at(t, f) = acc;
        }
    return m;
}

inline double score_hyper(const ModelParams& p, std::uint32_t s,
                          std::uint32_t r, std::uint32_t o) {
    if (p.l_f > p.d_e) throw std::invalid_argument("hyper: l_f > d_e");
    Mat fm = hyper_feature_map(p.entity_row(s), hyper_filters(p, r));
    // z = vec(M_r)·W, then ReLU, then inner product with e_o
    auto eo = p.entity_row(o);
    double acc = 0.0;
    for (std::size_t q = 0; q < p.d_e; ++q) {
        double z = 0.0;
        for (std::size_t pidx = 0; pidx < fm.data.size(); ++pidx)
            z += fm.data[pidx] * p.hyper_w.at(pidx, q);
        if (z > 0.0) acc += z * eo[q];
    }
    return acc;
}

// The sparse tensor equivalent of the relation-specific convolution:
// T[i, t, f] = F_r[i−t, f] when 0 ≤ i−t < l_f, else 0, so that
// vec(M_r)[t·n_f+f] = Σ_i e_s[i]·T[i, t, f].
inline Tensor3 hyper_as_sparse_tensor(const ModelParams& p, std::uint32_t r) {
    Mat f = hyper_filters(p, r);
    std::size_t l_m = p.feature_map_len();
    Tensor3 t3(p.d_e, l_m, p.n_f);
    for (std::size_t t = 0; t < l_m; ++t)
        for (std::size_t u = 0; u < p.l_f; ++u)
            for (std::size_t c = 0; c < p.n_f; ++c)
                t3.at(t + u, t, c) = f.at(u, c);
    return t3;
}

inline double score(const ModelParams& p, std::uint32_t s, std::uint32_t r,
                    std::uint32_t o) {
    switch (p.kind) {
        case ModelKind::TransE: return score_transe(p, s, r, o);
        case ModelKind::DistMult: return score_distmult(p, s, r, o);
        case ModelKind::ComplEx: return score_complex(p, s, r, o);
        case ModelKind::TuckER: return score_tucker(p, s, r, o);
        case ModelKind::MuRE: return score_mure(p, s, r, o);
        case ModelKind::MuRP: return score_murp(p, s, r, o);
        case ModelKind::HypER: return score_hyper(p, s, r, o);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// analytic gradients

namespace detail {

// Backward pass through out = a ⊕_c b given the upstream gradient g.
inline void mobius_add_backward(double c, std::span<const double> a,
                                std::span<const double> b,
                                std::span<const double> g, Vec& ga, Vec& gb) {
    std::size_t n = a.size();
    double aa = norm2(a), bb = norm2(b), ab = dot(a, b);
    double alpha = 1.0 + 2.0 * c * ab + c * bb;
    double beta = 1.0 - c * aa;
    double den = 1.0 + 2.0 * c * ab + c * c * aa * bb;
    Vec numer(n);
    for (std::size_t i = 0; i < n; ++i) numer[i] = alpha * a[i] + beta * b[i];
    double ag = dot(a, g), bg = dot(b, g), ng = dot(numer, g);

    ga.assign(n, 0.0);
    gb.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        // d(numer)/da = alpha·I + 2c·a bᵀ − 2c·b aᵀ ; d(den)/da = 2c·b + 2c²‖b‖²·a
        ga[i] = (alpha * g[i] + 2.0 * c * b[i] * ag - 2.0 * c * a[i] * bg) / den -
                (2.0 * c * b[i] + 2.0 * c * c * bb * a[i]) * ng / (den * den);
        // d(numer)/db = a(2c·a + 2c·b)ᵀ + beta·I ; d(den)/db = 2c·a + 2c²‖a‖²·b
        gb[i] = (beta * g[i] + (2.0 * c * a[i] + 2.0 * c * b[i]) * ag) / den -
                (2.0 * c * a[i] + 2.0 * c * c * aa * b[i]) * ng / (den * den);
    }
}

// Backward through u = exp_0(w): J = s·I + (s'(ρ)/ρ)·w wᵀ (symmetric)
inline Vec exp0_backward(double c, std::span<const double> w,
                         std::span<const double> g) {
    double rho = norm(w);
    double s = exp0_scale(c, rho);
    double sd = exp0_scale_dr(c, rho);
    double wg = dot(w, g);
    Vec out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = s * g[i] + sd * wg * w[i];
    return out;
}

inline Vec log0_backward(double c, std::span<const double> x,
                         std::span<const double> g) {
    double rho = norm(x);
    double s = log0_scale(c, rho);
    double sd = log0_scale_dr(c, rho);
    double xg = dot(x, g);
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = s * g[i] + sd * xg * x[i];
    return out;
}

}  // namespace detail

// Score plus Euclidean gradients of the score with respect to every parameter
// it touches. For MuRP these are plain Euclidean gradients; the Riemannian
// rescaling happens in the optimizer.
inline ScoreGrad score_and_grad(const ModelParams& p, std::uint32_t s,
                                std::uint32_t r, std::uint32_t o) {
    ScoreGrad out;
    std::size_t dim = p.entity_dim();
    switch (p.kind) {
        case ModelKind::TransE: {
            auto es = p.entity_row(s), eo = p.entity_row(o),
                 rv = p.relation_row(r);
            Vec gs(dim), go(dim), gr(dim);
            double acc = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                double d = es[i] + rv[i] - eo[i];
                acc += d * d;
                gs[i] = -2.0 * d;
                gr[i] = -2.0 * d;
                go[i] = 2.0 * d;
            }
            out.score = -acc;
            out.grads = {{ParamArray::Entity, s, std::move(gs)},
                         {ParamArray::Relation, r, std::move(gr)},
                         {ParamArray::Entity, o, std::move(go)}};
            break;
        }
        case ModelKind::DistMult: {
            auto es = p.entity_row(s), eo = p.entity_row(o),
                 rv = p.relation_row(r);
            Vec gs(dim), go(dim), gr(dim);
            double acc = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                acc += es[i] * rv[i] * eo[i];
                gs[i] = rv[i] * eo[i];
                gr[i] = es[i] * eo[i];
                go[i] = es[i] * rv[i];
            }
            out.score = acc;
            out.grads = {{ParamArray::Entity, s, std::move(gs)},
                         {ParamArray::Relation, r, std::move(gr)},
                         {ParamArray::Entity, o, std::move(go)}};
            break;
        }
        case ModelKind::ComplEx: {
            auto es = p.entity_row(s), eo = p.entity_row(o),
                 rv = p.relation_row(r);
            std::size_t d = p.d_e;
            Vec gs(2 * d), go(2 * d), gr(2 * d);
            double acc = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                double rs = es[i], is = es[d + i];
                double rw = rv[i], iw = rv[d + i];
                double ro = eo[i], io = eo[d + i];
                acc += rs * rw * ro + is * rw * io + rs * iw * io - is * iw * ro;
                gs[i] = rw * ro + iw * io;
                gs[d + i] = rw * io - iw * ro;
                gr[i] = rs * ro + is * io;
                gr[d + i] = rs * io - is * ro;
                go[i] = rs * rw - is * iw;
                go[d + i] = is * rw + rs * iw;
            }
            out.score = acc;
            out.grads = {{ParamArray::Entity, s, std::move(gs)},
                         {ParamArray::Relation, r, std::move(gr)},
                         {ParamArray::Entity, o, std::move(go)}};
            break;
        }
        case ModelKind::TuckER: {
            auto a = p.entity_row(s), b = p.relation_row(r), c = p.entity_row(o);
            Mat m = mode3_mix(p.core, b);  // d_e × d_e
            Vec ga = mat_vec(m, c);
            Vec gc(p.d_e, 0.0);
            for (std::size_t i = 0; i < p.d_e; ++i)
                for (std::size_t k = 0; k < p.d_e; ++k)
                    gc[k] += a[i] * m.at(i, k);
            Vec gb(p.d_r, 0.0);
            Vec gcore(p.core.data.size());
            const double* w = p.core.data.data();
            double* gw = gcore.data();
            for (std::size_t i = 0; i < p.d_e; ++i)
                for (std::size_t j = 0; j < p.d_r; ++j) {
                    double sj = 0.0;
                    for (std::size_t k = 0; k < p.d_e; ++k) {
                        sj += *w++ * c[k];
                        *gw++ = a[i] * b[j] * c[k];
                    }
                    gb[j] += a[i] * sj;
                }
            out.score = dot(a, ga);  // same contraction, reuse ga
            out.grads = {{ParamArray::Entity, s, std::move(ga)},
                         {ParamArray::Relation, r, std::move(gb)},
                         {ParamArray::Entity, o, std::move(gc)},
                         {ParamArray::Core, 0, std::move(gcore)}};
            break;
        }
        case ModelKind::MuRE: {
            auto es = p.entity_row(s), eo = p.entity_row(o);
            auto rv = p.relation_row(r), rd = p.rel_diag_row(r);
            Vec gs(dim), go(dim), gr(dim), gd(dim);
            double acc = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                double d = rd[i] * es[i] - (eo[i] + rv[i]);
                acc += d * d;
                gs[i] = -2.0 * d * rd[i];
                gd[i] = -2.0 * d * es[i];
                go[i] = 2.0 * d;
                gr[i] = 2.0 * d;
            }
            out.score = -acc + p.bias_s[s] + p.bias_o[o];
            out.grads = {{ParamArray::Entity, s, std::move(gs)},
                         {ParamArray::Relation, r, std::move(gr)},
                         {ParamArray::RelDiag, r, std::move(gd)},
                         {ParamArray::Entity, o, std::move(go)},
                         {ParamArray::BiasS, s, Vec{1.0}},
                         {ParamArray::BiasO, o, Vec{1.0}}};
            break;
        }
        case ModelKind::MuRP: {
            double c = p.curvature;
            auto hs = p.entity_row(s), ho = p.entity_row(o);
            auto rv = p.relation_row(r), rd = p.rel_diag_row(r);
            // forward
            Vec t = detail::murp_log0(c, hs);
            Vec w(dim);
            for (std::size_t i = 0; i < dim; ++i) w[i] = rd[i] * t[i];
            Vec u = detail::murp_exp0(c, w);
            Vec v = detail::murp_mobius_add(c, ho, rv);
            Vec nu(dim);
            for (std::size_t i = 0; i < dim; ++i) nu[i] = -u[i];
            Vec m = detail::murp_mobius_add(c, nu, v);
            double nm = norm(m);
            double sc = std::sqrt(c);
            double d = 2.0 / sc * detail::safe_atanh(sc * nm);
            out.score = -d * d + p.bias_s[s] + p.bias_o[o];

            // backward: grad of −d² wrt m
            Vec gm(dim);
            double f = nm < 1e-12 ? 8.0 : 4.0 * d / (nm * (1.0 - c * nm * nm));
            for (std::size_t i = 0; i < dim; ++i) gm[i] = -f * m[i];

            Vec g_nu, g_v;
            detail::mobius_add_backward(c, nu, v, gm, g_nu, g_v);
            Vec g_u(dim);
            for (std::size_t i = 0; i < dim; ++i) g_u[i] = -g_nu[i];
            Vec g_ho, g_rv;
            detail::mobius_add_backward(c, ho, rv, g_v, g_ho, g_rv);
            Vec g_w = detail::exp0_backward(c, w, g_u);
            Vec g_rd(dim), g_t(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                g_rd[i] = t[i] * g_w[i];
                g_t[i] = rd[i] * g_w[i];
            }
            Vec g_hs = detail::log0_backward(c, hs, g_t);
            out.grads = {{ParamArray::Entity, s, std::move(g_hs)},
                         {ParamArray::Relation, r, std::move(g_rv)},
                         {ParamArray::RelDiag, r, std::move(g_rd)},
                         {ParamArray::Entity, o, std::move(g_ho)},
                         {ParamArray::BiasS, s, Vec{1.0}},
                         {ParamArray::BiasO, o, Vec{1.0}}};
            break;
        }
        case ModelKind::HypER: {
            auto es = p.entity_row(s), eo = p.entity_row(o);
            auto wr = p.relation_row(r);
            std::size_t l_m = p.feature_map_len();
            Mat filt = hyper_filters(p, r);
            Mat fm = hyper_feature_map(es, filt);
            Vec z(p.d_e, 0.0), relu(p.d_e, 0.0);
            for (std::size_t q = 0; q < p.d_e; ++q) {
                double zq = 0.0;
                for (std::size_t pi = 0; pi < fm.data.size(); ++pi)
                    zq += fm.data[pi] * p.hyper_w.at(pi, q);
                z[q] = zq;
                relu[q] = zq > 0.0 ? zq : 0.0;
            }
            out.score = dot(relu, eo);

            Vec g_eo = relu;
            Vec gz(p.d_e);
            for (std::size_t q = 0; q < p.d_e; ++q)
                gz[q] = z[q] > 0.0 ? eo[q] : 0.0;
            Vec g_w(p.hyper_w.data.size());
            Vec g_vecm(fm.data.size(), 0.0);
            for (std::size_t pi = 0; pi < fm.data.size(); ++pi)
                for (std::size_t q = 0; q < p.d_e; ++q) {
                    g_w[pi * p.d_e + q] = fm.data[pi] * gz[q];
                    g_vecm[pi] += p.hyper_w.at(pi, q) * gz[q];
                }
            Vec g_es(p.d_e, 0.0);
            Mat g_filt(p.l_f, p.n_f);
            for (std::size_t t = 0; t < l_m; ++t)
                for (std::size_t f = 0; f < p.n_f; ++f) {
                    double gmf = g_vecm[t * p.n_f + f];
                    for (std::size_t u = 0; u < p.l_f; ++u) {
                        g_es[t + u] += gmf * filt.at(u, f);
                        g_filt.at(u, f) += gmf * es[t + u];
                    }
                }
            Vec g_wr(p.d_r, 0.0);
            Vec g_h(p.hyper_h.data.size(), 0.0);
            for (std::size_t u = 0; u < p.l_f; ++u)
                for (std::size_t f = 0; f < p.n_f; ++f) {
                    double gf = g_filt.at(u, f);
                    for (std::size_t j = 0; j < p.d_r; ++j) {
                        g_wr[j] += gf * p.hyper_h.at(j, u * p.n_f + f);
                        g_h[j * p.hyper_h.cols + u * p.n_f + f] += gf * wr[j];
                    }
                }
            out.grads = {{ParamArray::Entity, s, std::move(g_es)},
                         {ParamArray::Relation, r, std::move(g_wr)},
                         {ParamArray::Entity, o, std::move(g_eo)},
                         {ParamArray::HyperH, 0, std::move(g_h)},
                         {ParamArray::HyperW, 0, std::move(g_w)}};
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// special-case cores and reference scorers

enum class CoreKind { DistMult, ComplEx, SimplE };

inline Tensor3 build_special_case_core(CoreKind kind, std::size_t d_e) {
    if (d_e < 1) throw std::invalid_argument("core: d_e must be >= 1");
    switch (kind) {
        case CoreKind::DistMult: {
            Tensor3 w(d_e, d_e, d_e);
            for (std::size_t i = 0; i < d_e; ++i) w.at(i, i, i) = 1.0;
            return w;
        }
        case CoreKind::ComplEx: {
            std::size_t n = 2 * d_e;
            Tensor3 w(n, n, n);
            for (std::size_t i = 0; i < d_e; ++i) {
                w.at(i, i, i) = 1.0;
                w.at(d_e + i, i, d_e + i) = 1.0;
                w.at(i, d_e + i, d_e + i) = 1.0;
                w.at(d_e + i, d_e + i, i) = -1.0;
            }
            return w;
        }
        case CoreKind::SimplE: {
            std::size_t n = 2 * d_e;
            Tensor3 w(n, n, n);
            for (std::size_t i = 0; i < d_e; ++i) {
                w.at(i, i, d_e + i) = 0.5;
                w.at(d_e + i, d_e + i, i) = 0.5;
            }
            return w;
        }
    }
    throw std::invalid_argument("unknown core kind");
}

struct RescalParams {
    Mat entity;                // n_e × d_e
    std::vector<Mat> relation; // n_r full d_e × d_e matrices
};

inline double score_rescal(const RescalParams& p, std::uint32_t s,
                           std::uint32_t r, std::uint32_t o) {
    std::span<const double> es{p.entity.data.data() + s * p.entity.cols,
                               p.entity.cols};
    std::span<const double> eo{p.entity.data.data() + o * p.entity.cols,
                               p.entity.cols};
    return dot(es, mat_vec(p.relation[r], eo));
}

struct SimpleParams {
    Mat head, tail;        // n_e × d_e each
    Mat relation, inverse; // n_r × d_e each
};

// ½(⟨h_s, w_r, t_o⟩ + ⟨h_o, w_r⁻¹, t_s⟩)
inline double score_simple(const SimpleParams& p, std::uint32_t s,
                           std::uint32_t r, std::uint32_t o) {
    std::size_t d = p.head.cols;
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        acc += p.head.at(s, i) * p.relation.at(r, i) * p.tail.at(o, i);
        acc += p.head.at(o, i) * p.inverse.at(r, i) * p.tail.at(s, i);
    }
    return 0.5 * acc;
}

// Constructive full-expressiveness witness: one-hot embeddings with core
// entries +1 for true facts and −1 otherwise, so sign(score) reproduces the
// ground truth exactly.
inline ModelParams build_fully_expressive_tucker(
    const std::vector<std::vector<std::vector<bool>>>& truth) {
    std::size_t n_e = truth.size();
    if (n_e == 0 || truth[0].empty())
        throw std::invalid_argument("truth table must be non-empty");
    std::size_t n_r = truth[0].size();
    ModelParams p;
    p.kind = ModelKind::TuckER;
    p.n_e = n_e;
    p.n_r = n_r;
    p.d_e = n_e;
    p.d_r = n_r;
    p.entity = Mat::identity(n_e);
    p.relation = Mat::identity(n_r);
    p.core = Tensor3(n_e, n_r, n_e);
    for (std::size_t i = 0; i < n_e; ++i)
        for (std::size_t j = 0; j < n_r; ++j)
            for (std::size_t k = 0; k < n_e; ++k)
                p.core.at(i, j, k) = truth[i][j][k] ? 1.0 : -1.0;
    return p;
}

// ---------------------------------------------------------------------------
// initialisation

inline ModelParams init_params(ModelKind kind, std::size_t n_e,
                               std::size_t n_r, std::size_t d_e,
                               std::size_t d_r, Rng& rng, std::size_t l_f = 9,
                               std::size_t n_f = 32, double curvature = 1.0) {
    ModelParams p;
    p.kind = kind;
    p.n_e = n_e;
    p.n_r = n_r;
    p.d_e = d_e;
    p.d_r = d_r;
    p.curvature = curvature;
    auto fill_uniform = [&rng](Mat& m, double lo, double hi) {
        for (double& x : m.data) x = rng.uniform(lo, hi);
    };
    std::size_t dim = kind == ModelKind::ComplEx ? 2 * d_e : d_e;
    p.entity = Mat(n_e, dim);
    switch (kind) {
        case ModelKind::TransE:
        case ModelKind::DistMult:
        case ModelKind::ComplEx:
            p.relation = Mat(n_r, dim);
            fill_uniform(p.entity, -0.05, 0.05);
            fill_uniform(p.relation, -0.05, 0.05);
            break;
        case ModelKind::TuckER: {
            p.relation = Mat(n_r, d_r);
            fill_uniform(p.entity, -0.05, 0.05);
            fill_uniform(p.relation, -0.05, 0.05);
            p.core = Tensor3(d_e, d_r, d_e);
            double scale =
                1.0 / std::sqrt(static_cast<double>(d_e) * static_cast<double>(d_r));
            for (double& x : p.core.data) x = rng.uniform(-1.0, 1.0) * scale;
            break;
        }
        case ModelKind::MuRE:
            p.relation = Mat(n_r, d_e);
            p.rel_diag = Mat(n_r, d_e);
            fill_uniform(p.entity, -0.05, 0.05);
            fill_uniform(p.relation, -0.05, 0.05);
            fill_uniform(p.rel_diag, -0.05, 0.05);
            p.bias_s.assign(n_e, 0.0);
            p.bias_o.assign(n_e, 0.0);
            break;
        case ModelKind::MuRP: {
            // ball parameters start near the origin, norm ≤ 1e-3
            double cap = 1e-3 / std::sqrt(static_cast<double>(d_e));
            p.relation = Mat(n_r, d_e);
            p.rel_diag = Mat(n_r, d_e);
            fill_uniform(p.entity, -cap, cap);
            fill_uniform(p.relation, -cap, cap);
            fill_uniform(p.rel_diag, -0.05, 0.05);
            p.bias_s.assign(n_e, 0.0);
            p.bias_o.assign(n_e, 0.0);
            break;
        }
        case ModelKind::HypER: {
            if (l_f > d_e) throw std::invalid_argument("hyper: l_f > d_e");
            p.l_f = l_f;
            p.n_f = n_f;
            p.relation = Mat(n_r, d_r);
            p.hyper_h = Mat(d_r, l_f * n_f);
            p.hyper_w = Mat((d_e - l_f + 1) * n_f, d_e);
            fill_uniform(p.entity, -0.05, 0.05);
            fill_uniform(p.relation, -0.05, 0.05);
            fill_uniform(p.hyper_h, -0.05, 0.05);
            fill_uniform(p.hyper_w, -0.05, 0.05);
            break;
        }
    }
    return p;
}

}  // namespace kge

#endif
