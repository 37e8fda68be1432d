#ifndef KGE_TRAINING_HPP_
#define KGE_TRAINING_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "kge/kg_data.hpp"
#include "kge/models.hpp"

namespace kge {

enum class Regime { NegativeSampling, OneVsAll };
enum class OptimizerKind { Sgd, Adam, RsgdMixed };

struct TrainConfig {
    Regime regime = Regime::NegativeSampling;
    std::size_t negatives = 50;
    double lr = 0.01;
    double lr_decay = 1.0;
    std::size_t epochs = 100;
    std::size_t batch_size = 128;
    double label_smoothing = 0.0;           // 1-N regime only
    std::map<std::string, double> dropout;  // site -> rate
    OptimizerKind optimizer = OptimizerKind::Sgd;
    std::uint64_t seed = 1;

    double dropout_rate(const std::string& site) const {
        auto it = dropout.find(site);
        return it == dropout.end() ? 0.0 : it->second;
    }

    void validate() const {
        if (lr < 0.0) throw std::invalid_argument("lr must be non-negative");
        if (label_smoothing < 0.0 || label_smoothing >= 1.0)
            throw std::invalid_argument("label_smoothing must be in [0,1)");
        for (const auto& [site, rate] : dropout)
            if (rate < 0.0 || rate >= 1.0)
                throw std::invalid_argument("dropout rate must be in [0,1): " +
                                            site);
        if (batch_size == 0) throw std::invalid_argument("batch_size must be > 0");
    }
};

inline double clamp_prob(double p) {
    return std::min(1.0 - 1e-12, std::max(1e-12, p));
}

inline double bce_loss(const std::vector<double>& p,
                       const std::vector<double>& y) {
    if (p.size() != y.size())
        throw std::invalid_argument("bce_loss: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double pi = clamp_prob(p[i]);
        acc += y[i] * std::log(pi) + (1.0 - y[i]) * std::log(1.0 - pi);
    }
    return -acc / static_cast<double>(p.size());
}

// y' = (1−ε)y + ε/n_e
inline std::vector<double> smooth_labels(std::vector<double> y, double eps,
                                         std::size_t n_e) {
    if (eps < 0.0 || eps >= 1.0)
        throw std::invalid_argument("label smoothing must be in [0,1)");
    for (double& v : y) v = (1.0 - eps) * v + eps / static_cast<double>(n_e);
    return y;
}

// Inverted dropout: at training time zero each entry with probability `rate`
// and scale survivors by 1/(1−rate); identity at inference.
inline std::vector<double> dropout_mask(std::size_t n, double rate, Rng& rng,
                                        bool training) {
    std::vector<double> mask(n, 1.0);
    if (!training || rate == 0.0) return mask;
    double keep = 1.0 / (1.0 - rate);
    for (double& m : mask) m = rng.next_double() < rate ? 0.0 : keep;
    return mask;
}

inline Vec apply_dropout(const Vec& v, double rate, Rng& rng, bool training) {
    auto mask = dropout_mask(v.size(), rate, rng, training);
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * mask[i];
    return out;
}

// ---------------------------------------------------------------------------
// optimizer primitives

inline void sgd_step(std::span<double> param, std::span<const double> grad,
                     double lr) {
    for (std::size_t i = 0; i < param.size(); ++i) param[i] -= lr * grad[i];
}

struct AdamSlot {
    Vec m, v;
};

// Bias-corrected Adam on one parameter slot; `t` is the global step count
// (already incremented for this step).
inline void adam_step(std::span<double> param, std::span<const double> grad,
                      AdamSlot& slot, std::uint64_t t, double lr,
                      double beta1 = 0.9, double beta2 = 0.999,
                      double eps = 1e-8) {
    if (slot.m.size() != param.size()) {
        slot.m.assign(param.size(), 0.0);
        slot.v.assign(param.size(), 0.0);
    }
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        slot.m[i] = beta1 * slot.m[i] + (1.0 - beta1) * grad[i];
        slot.v[i] = beta2 * slot.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        double mhat = slot.m[i] / bc1;
        double vhat = slot.v[i] / bc2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

// Riemannian SGD on a ball-valued row: rescale the Euclidean gradient by the
// inverse metric, step along the exponential map, re-project.
inline void rsgd_step(std::span<double> param, std::span<const double> grad,
                      double lr, double c) {
    double lam = 2.0 / (1.0 - c * norm2(param));
    double scale = -lr / (lam * lam);
    Vec step(param.size());
    for (std::size_t i = 0; i < param.size(); ++i) step[i] = scale * grad[i];
    BallPoint x{Vec(param.begin(), param.end()), c};
    BallPoint moved = exp_map(x, TangentVec{std::move(step), x});
    std::copy(moved.coords.begin(), moved.coords.end(), param.begin());
}

struct OptimizerState {
    bool lr_initialized = false;
    double current_lr = 0.0;
    std::uint64_t adam_t = 0;
    // lazily sized Adam moments per parameter row / block
    std::unordered_map<std::uint64_t, AdamSlot> adam;

    AdamSlot& adam_slot(ParamArray a, std::uint32_t row) {
        std::uint64_t key =
            (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(row);
        return adam[key];
    }
};

// ---------------------------------------------------------------------------
// gradient accumulation

class GradBuffer {
public:
    explicit GradBuffer(const ModelParams& p)
        : entity_(p.entity.rows, p.entity.cols),
          relation_(p.relation.rows, p.relation.cols),
          rel_diag_(p.rel_diag.rows, p.rel_diag.cols),
          bias_s_(p.bias_s.size(), 0.0),
          bias_o_(p.bias_o.size(), 0.0),
          core_(p.core.data.size(), 0.0),
          hyper_h_(p.hyper_h.data.size(), 0.0),
          hyper_w_(p.hyper_w.data.size(), 0.0),
          entity_flag_(p.entity.rows, 0),
          relation_flag_(p.relation.rows, 0),
          rel_diag_flag_(p.rel_diag.rows, 0),
          bias_s_flag_(p.bias_s.size(), 0),
          bias_o_flag_(p.bias_o.size(), 0) {}

    void add(const ScoreGrad& sg, double weight) {
        for (const SlotGrad& g : sg.grads) add(g.array, g.row, g.g, weight);
    }

    void add(ParamArray array, std::uint32_t row, std::span<const double> g,
             double weight) {
        switch (array) {
            case ParamArray::Entity:
                add_row(entity_, entity_flag_, entity_rows_, row, g, weight);
                break;
            case ParamArray::Relation:
                add_row(relation_, relation_flag_, relation_rows_, row, g,
                        weight);
                break;
            case ParamArray::RelDiag:
                add_row(rel_diag_, rel_diag_flag_, rel_diag_rows_, row, g,
                        weight);
                break;
            case ParamArray::BiasS:
                if (!bias_s_flag_[row]) {
                    bias_s_flag_[row] = 1;
                    bias_s_rows_.push_back(row);
                }
                bias_s_[row] += weight * g[0];
                break;
            case ParamArray::BiasO:
                if (!bias_o_flag_[row]) {
                    bias_o_flag_[row] = 1;
                    bias_o_rows_.push_back(row);
                }
                bias_o_[row] += weight * g[0];
                break;
            case ParamArray::Core:
                core_touched_ = true;
                axpy(core_, g, weight);
                break;
            case ParamArray::HyperH:
                hyper_h_touched_ = true;
                axpy(hyper_h_, g, weight);
                break;
            case ParamArray::HyperW:
                hyper_w_touched_ = true;
                axpy(hyper_w_, g, weight);
                break;
        }
    }

    // Applies the accumulated gradients and resets the buffer. Ball-valued
    // slots of MuRP always take Riemannian steps; everything else follows
    // the configured optimizer.
    void apply(ModelParams& p, const TrainConfig& cfg, OptimizerState& opt) {
        double lr = opt.current_lr;
        if (lr == 0.0) {  // zero-lr epochs must leave parameters bit-identical
            clear();
            return;
        }
        bool hyperbolic = p.kind == ModelKind::MuRP;
        if (cfg.optimizer == OptimizerKind::Adam) ++opt.adam_t;

        auto euclid = [&](ParamArray a, std::uint32_t row, std::span<double> param,
                          std::span<const double> grad) {
            if (cfg.optimizer == OptimizerKind::Adam)
                adam_step(param, grad, opt.adam_slot(a, row), opt.adam_t, lr);
            else
                sgd_step(param, grad, lr);
        };

        std::sort(entity_rows_.begin(), entity_rows_.end());
        for (auto row : entity_rows_) {
            std::span<double> param{p.entity.data.data() + row * p.entity.cols,
                                    p.entity.cols};
            std::span<const double> grad{entity_.data.data() + row * entity_.cols,
                                         entity_.cols};
            if (hyperbolic)
                rsgd_step(param, grad, lr, p.curvature);
            else
                euclid(ParamArray::Entity, row, param, grad);
        }
        std::sort(relation_rows_.begin(), relation_rows_.end());
        for (auto row : relation_rows_) {
            std::span<double> param{
                p.relation.data.data() + row * p.relation.cols, p.relation.cols};
            std::span<const double> grad{
                relation_.data.data() + row * relation_.cols, relation_.cols};
            if (hyperbolic)
                rsgd_step(param, grad, lr, p.curvature);
            else
                euclid(ParamArray::Relation, row, param, grad);
        }
        std::sort(rel_diag_rows_.begin(), rel_diag_rows_.end());
        for (auto row : rel_diag_rows_) {
            std::span<double> param{
                p.rel_diag.data.data() + row * p.rel_diag.cols, p.rel_diag.cols};
            std::span<const double> grad{
                rel_diag_.data.data() + row * rel_diag_.cols, rel_diag_.cols};
            euclid(ParamArray::RelDiag, row, param, grad);
        }
        std::sort(bias_s_rows_.begin(), bias_s_rows_.end());
        for (auto row : bias_s_rows_)
            euclid(ParamArray::BiasS, row, {&p.bias_s[row], 1}, {&bias_s_[row], 1});
        std::sort(bias_o_rows_.begin(), bias_o_rows_.end());
        for (auto row : bias_o_rows_)
            euclid(ParamArray::BiasO, row, {&p.bias_o[row], 1}, {&bias_o_[row], 1});
        if (core_touched_) euclid(ParamArray::Core, 0, p.core.data, core_);
        if (hyper_h_touched_)
            euclid(ParamArray::HyperH, 0, p.hyper_h.data, hyper_h_);
        if (hyper_w_touched_)
            euclid(ParamArray::HyperW, 0, p.hyper_w.data, hyper_w_);
        clear();
    }

    void clear() {
        auto zero_rows = [](Mat& m, std::vector<char>& flag,
                            std::vector<std::uint32_t>& rows) {
            for (auto row : rows) {
                std::fill_n(m.data.begin() + row * m.cols, m.cols, 0.0);
                flag[row] = 0;
            }
            rows.clear();
        };
        zero_rows(entity_, entity_flag_, entity_rows_);
        zero_rows(relation_, relation_flag_, relation_rows_);
        zero_rows(rel_diag_, rel_diag_flag_, rel_diag_rows_);
        for (auto row : bias_s_rows_) {
            bias_s_[row] = 0.0;
            bias_s_flag_[row] = 0;
        }
        bias_s_rows_.clear();
        for (auto row : bias_o_rows_) {
            bias_o_[row] = 0.0;
            bias_o_flag_[row] = 0;
        }
        bias_o_rows_.clear();
        if (core_touched_) std::fill(core_.begin(), core_.end(), 0.0);
        if (hyper_h_touched_) std::fill(hyper_h_.begin(), hyper_h_.end(), 0.0);
        if (hyper_w_touched_) std::fill(hyper_w_.begin(), hyper_w_.end(), 0.0);
        core_touched_ = hyper_h_touched_ = hyper_w_touched_ = false;
    }

private:
    static void axpy(Vec& dst, std::span<const double> g, double w) {
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += w * g[i];
    }

    void add_row(Mat& m, std::vector<char>& flag,
                 std::vector<std::uint32_t>& rows, std::uint32_t row,
                 std::span<const double> g, double weight) {
        if (!flag[row]) {
            flag[row] = 1;
            rows.push_back(row);
        }
        double* dst = m.data.data() + row * m.cols;
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += weight * g[i];
    }

    Mat entity_, relation_, rel_diag_;
    Vec bias_s_, bias_o_, core_, hyper_h_, hyper_w_;
    std::vector<char> entity_flag_, relation_flag_, rel_diag_flag_,
        bias_s_flag_, bias_o_flag_;
    std::vector<std::uint32_t> entity_rows_, relation_rows_, rel_diag_rows_,
        bias_s_rows_, bias_o_rows_;
    bool core_touched_ = false, hyper_h_touched_ = false,
         hyper_w_touched_ = false;
};

// ---------------------------------------------------------------------------
// epoch loop

namespace detail {

inline double bce_score_grad(double score, double y, double inv_n,
                             double& loss_acc) {
    double p = sigmoid(score);
    double pc = clamp_prob(p);
    loss_acc -= y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc);
    if (p <= 1e-12 || p >= 1.0 - 1e-12) return 0.0;  // clamp acts as a stop
    return (p - y) * inv_n;
}

// Efficient masked 1-N forward/backward for TuckER:
//   q = m2 ⊙ ((m0 ⊙ e_s)ᵀ (M ⊙ mask1)),  M = mode3_mix(core, w_r)
//   score_o = q · e_o
inline void tucker_pair_pass(const ModelParams& p, std::uint32_t s,
                             std::uint32_t r,
                             const std::vector<double>& targets,
                             const TrainConfig& cfg, double inv_n, Rng& rng,
                             bool training, GradBuffer& gb, double& loss_acc) {
    std::size_t d = p.d_e;
    auto m0 = dropout_mask(d, cfg.dropout_rate("input"), rng, training);
    auto m1 = dropout_mask(d * d, cfg.dropout_rate("hidden1"), rng, training);
    auto m2 = dropout_mask(d, cfg.dropout_rate("hidden2"), rng, training);

    auto es = p.entity_row(s);
    auto wr = p.relation_row(r);
    Vec x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = m0[i] * es[i];
    Mat m = mode3_mix(p.core, wr);
    for (std::size_t i = 0; i < d * d; ++i) m.data[i] *= m1[i];
    Vec q(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) q[k] += x[i] * m.at(i, k);
    for (std::size_t k = 0; k < d; ++k) q[k] *= m2[k];

    Vec gq(d, 0.0);
    for (std::uint32_t o = 0; o < p.n_e; ++o) {
        auto eo = p.entity_row(o);
        double sc = dot(q, eo);
        double g = bce_score_grad(sc, targets[o], inv_n, loss_acc);
        if (g == 0.0) continue;
        for (std::size_t k = 0; k < d; ++k) gq[k] += g * eo[k];
        Vec geo(d);
        for (std::size_t k = 0; k < d; ++k) geo[k] = g * q[k];
        gb.add(ParamArray::Entity, o, geo, 1.0);
    }
    for (std::size_t k = 0; k < d; ++k) gq[k] *= m2[k];
    // backprop through q = xᵀ M
    Vec gx(d, 0.0);
    Mat gm(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            gx[i] += m.at(i, k) * gq[k];
            gm.at(i, k) = x[i] * gq[k] * m1[i * d + k];
        }
    Vec ges(d);
    for (std::size_t i = 0; i < d; ++i) ges[i] = m0[i] * gx[i];
    gb.add(ParamArray::Entity, s, ges, 1.0);
    // M = Σ_j core[:,j,:]·w_r[j]
    Vec gwr(p.d_r, 0.0);
    Vec gcore(p.core.data.size());
    const double* cw = p.core.data.data();
    double* gc = gcore.data();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < p.d_r; ++j)
            for (std::size_t k = 0; k < d; ++k) {
                gwr[j] += *cw++ * gm.at(i, k);
                *gc++ = wr[j] * gm.at(i, k);
            }
    gb.add(ParamArray::Relation, r, gwr, 1.0);
    gb.add(ParamArray::Core, 0, gcore, 1.0);
}

// Masked 1-N pass for HypER:
//   a = m2 ⊙ ReLU((m1 ⊙ vec(conv(m0 ⊙ e_s, F_r)))ᵀ W),  score_o = a · e_o
inline void hyper_pair_pass(const ModelParams& p, std::uint32_t s,
                            std::uint32_t r,
                            const std::vector<double>& targets,
                            const TrainConfig& cfg, double inv_n, Rng& rng,
                            bool training, GradBuffer& gb, double& loss_acc) {
    std::size_t d = p.d_e, l_m = p.feature_map_len();
    auto m0 = dropout_mask(d, cfg.dropout_rate("input"), rng, training);
    auto m1 = dropout_mask(l_m * p.n_f, cfg.dropout_rate("hidden1"), rng,
                           training);
    auto m2 = dropout_mask(d, cfg.dropout_rate("hidden2"), rng, training);

    auto es_raw = p.entity_row(s);
    auto wr = p.relation_row(r);
    Vec es(d);
    for (std::size_t i = 0; i < d; ++i) es[i] = m0[i] * es_raw[i];
    Mat filt = hyper_filters(p, r);
    Mat fm = hyper_feature_map(es, filt);
    for (std::size_t i = 0; i < fm.data.size(); ++i) fm.data[i] *= m1[i];
    Vec z(d, 0.0), a(d);
    for (std::size_t q = 0; q < d; ++q) {
        double zq = 0.0;
        for (std::size_t pi = 0; pi < fm.data.size(); ++pi)
            zq += fm.data[pi] * p.hyper_w.at(pi, q);
        z[q] = zq;
        a[q] = zq > 0.0 ? m2[q] * zq : 0.0;
    }

    Vec ga(d, 0.0);
    for (std::uint32_t o = 0; o < p.n_e; ++o) {
        auto eo = p.entity_row(o);
        double sc = dot(a, eo);
        double g = bce_score_grad(sc, targets[o], inv_n, loss_acc);
        if (g == 0.0) continue;
        for (std::size_t q = 0; q < d; ++q) ga[q] += g * eo[q];
        Vec geo(d);
        for (std::size_t q = 0; q < d; ++q) geo[q] = g * a[q];
        gb.add(ParamArray::Entity, o, geo, 1.0);
    }
    Vec gz(d);
    for (std::size_t q = 0; q < d; ++q)
        gz[q] = z[q] > 0.0 ? m2[q] * ga[q] : 0.0;
    Vec gw(p.hyper_w.data.size());
    Vec gvm(fm.data.size(), 0.0);
    for (std::size_t pi = 0; pi < fm.data.size(); ++pi)
        for (std::size_t q = 0; q < d; ++q) {
            gw[pi * d + q] = fm.data[pi] * gz[q];
            gvm[pi] += p.hyper_w.at(pi, q) * gz[q];
        }
    gb.add(ParamArray::HyperW, 0, gw, 1.0);
    for (std::size_t i = 0; i < gvm.size(); ++i) gvm[i] *= m1[i];
    Vec ges(d, 0.0);
    Mat gfilt(p.l_f, p.n_f);
    for (std::size_t t = 0; t < l_m; ++t)
        for (std::size_t f = 0; f < p.n_f; ++f) {
            double gmf = gvm[t * p.n_f + f];
            for (std::size_t u = 0; u < p.l_f; ++u) {
                ges[t + u] += gmf * filt.at(u, f);
                gfilt.at(u, f) += gmf * es[t + u];
            }
        }
    for (std::size_t i = 0; i < d; ++i) ges[i] *= m0[i];
    gb.add(ParamArray::Entity, s, ges, 1.0);
    Vec gwr(p.d_r, 0.0);
    Vec gh(p.hyper_h.data.size(), 0.0);
    for (std::size_t u = 0; u < p.l_f; ++u)
        for (std::size_t f = 0; f < p.n_f; ++f) {
            double gf = gfilt.at(u, f);
            for (std::size_t j = 0; j < p.d_r; ++j) {
                gwr[j] += gf * p.hyper_h.at(j, u * p.n_f + f);
                gh[j * p.hyper_h.cols + u * p.n_f + f] += gf * wr[j];
            }
        }
    gb.add(ParamArray::Relation, r, gwr, 1.0);
    gb.add(ParamArray::HyperH, 0, gh, 1.0);
}

inline void check_finite_loss(double loss, const ModelParams& p,
                              std::size_t batch_index) {
    if (std::isfinite(loss)) return;
    std::ostringstream msg;
    msg << "non-finite loss in batch " << batch_index
        << "; entity norm=" << norm(p.entity.data)
        << " relation norm=" << norm(p.relation.data);
    throw std::runtime_error(msg.str());
}

}  // namespace detail

// One full pass over the train split in shuffled mini-batches. Returns the
// mean per-sample BCE loss over the epoch.
inline double train_epoch(ModelParams& p, const TripleStore& st,
                          const TrainConfig& cfg, OptimizerState& opt,
                          Rng& rng) {
    cfg.validate();
    if (!opt.lr_initialized) {
        opt.current_lr = cfg.lr;
        opt.lr_initialized = true;
    }
    GradBuffer gb(p);
    double loss_sum = 0.0;
    std::size_t sample_count = 0;

    if (cfg.regime == Regime::OneVsAll) {
        if (!st.reciprocal)
            throw std::runtime_error("1-N training requires reciprocal store");
        // (s, r) pairs in first-appearance order, then shuffled
        std::unordered_map<std::uint64_t, std::size_t> pair_index;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
        std::vector<std::vector<double>> targets;
        for (const Triple& t : st.train) {
            std::uint64_t key =
                (static_cast<std::uint64_t>(t.s) << 32) | t.r;
            auto [it, fresh] = pair_index.emplace(key, pairs.size());
            if (fresh) {
                pairs.emplace_back(t.s, t.r);
                targets.emplace_back(st.n_entities(), 0.0);
            }
            targets[it->second][t.o] = 1.0;
        }
        std::vector<std::size_t> order(pairs.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.next_below(i)]);

        for (std::size_t start = 0; start < order.size();
             start += cfg.batch_size) {
            std::size_t end = std::min(order.size(), start + cfg.batch_size);
            double inv_n =
                1.0 / (static_cast<double>(end - start) *
                       static_cast<double>(st.n_entities()));
            double batch_loss = 0.0;
            for (std::size_t idx = start; idx < end; ++idx) {
                auto [s, r] = pairs[order[idx]];
                std::vector<double> y = smooth_labels(
                    targets[order[idx]], cfg.label_smoothing, st.n_entities());
                if (p.kind == ModelKind::TuckER) {
                    detail::tucker_pair_pass(p, s, r, y, cfg, inv_n, rng, true,
                                             gb, batch_loss);
                } else if (p.kind == ModelKind::HypER) {
                    detail::hyper_pair_pass(p, s, r, y, cfg, inv_n, rng, true,
                                            gb, batch_loss);
                } else {
                    for (std::uint32_t o = 0; o < st.n_entities(); ++o) {
                        ScoreGrad sg = score_and_grad(p, s, r, o);
                        double g = detail::bce_score_grad(sg.score, y[o], inv_n,
                                                          batch_loss);
                        if (g != 0.0) gb.add(sg, g);
                    }
                }
            }
            detail::check_finite_loss(batch_loss, p, start / cfg.batch_size);
            gb.apply(p, cfg, opt);
            loss_sum += batch_loss;
            sample_count += (end - start) * st.n_entities();
        }
    } else {
        std::vector<std::size_t> order(st.train.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.next_below(i)]);

        for (std::size_t start = 0; start < order.size();
             start += cfg.batch_size) {
            std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<Triple> positives;
            positives.reserve(end - start);
            for (std::size_t i = start; i < end; ++i)
                positives.push_back(st.train[order[i]]);
            NegBatch nb = sample_negatives(st, positives, cfg.negatives, rng);
            double inv_n = 1.0 / (static_cast<double>(positives.size()) *
                                  (1.0 + static_cast<double>(cfg.negatives)));
            double batch_loss = 0.0;
            auto accumulate = [&](const Triple& t, double y) {
                ScoreGrad sg = score_and_grad(p, t.s, t.r, t.o);
                double g = detail::bce_score_grad(sg.score, y, inv_n, batch_loss);
                if (g != 0.0) gb.add(sg, g);
            };
            for (const Triple& t : nb.positives) accumulate(t, 1.0);
            for (const Triple& t : nb.negatives) accumulate(t, 0.0);
            detail::check_finite_loss(batch_loss, p, start / cfg.batch_size);
            gb.apply(p, cfg, opt);
            loss_sum += batch_loss;
            sample_count += positives.size() * (1 + cfg.negatives);
        }
    }

    opt.current_lr *= cfg.lr_decay;
    return sample_count == 0 ? 0.0 : loss_sum / static_cast<double>(sample_count);
}

}  // namespace kge

#endif
