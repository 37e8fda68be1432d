#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kge/training.hpp"
#include "support/planted.hpp"

using namespace kge;

TEST_CASE("bce loss on hand-computed probabilities") {
    // -(log 0.8 + log(1-0.3))/2
    double expected = -(std::log(0.8) + std::log(0.7)) / 2.0;
    CHECK(bce_loss({0.8, 0.3}, {1.0, 0.0}) ==
          doctest::Approx(expected).epsilon(1e-12));
    // clamp keeps the loss finite at the endpoints
    CHECK(std::isfinite(bce_loss({0.0, 1.0}, {1.0, 0.0})));
    CHECK_THROWS_AS(bce_loss({0.5}, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("label smoothing formula") {
    auto y = smooth_labels({1.0, 0.0}, 0.1, 10);
    CHECK(y[0] == doctest::Approx(0.9 + 0.01));
    CHECK(y[1] == doctest::Approx(0.01));
    CHECK_THROWS_AS(smooth_labels({1.0}, 1.0, 10), std::invalid_argument);
}

TEST_CASE("inverted dropout: identity off, unbiased on") {
    Rng rng(1);
    auto off = dropout_mask(100, 0.0, rng, true);
    for (double m : off) CHECK(m == 1.0);
    auto eval_mode = dropout_mask(100, 0.5, rng, false);
    for (double m : eval_mode) CHECK(m == 1.0);

    double sum = 0.0;
    int zeros = 0;
    const int n = 100000;
    auto mask = dropout_mask(n, 0.3, rng, true);
    for (double m : mask) {
        sum += m;
        if (m == 0.0) ++zeros;
        else CHECK(m == doctest::Approx(1.0 / 0.7));
    }
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.02));  // E[mask] = 1
    CHECK(static_cast<double>(zeros) / n == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("sgd step is param -= lr*grad") {
    Vec p{1.0, 2.0}, g{0.5, -1.0};
    sgd_step(p, g, 0.1);
    CHECK(p[0] == doctest::Approx(0.95));
    CHECK(p[1] == doctest::Approx(2.1));
}

TEST_CASE("adam matches a scalar oracle over several steps") {
    Vec p{1.0};
    AdamSlot slot;
    double m = 0.0, v = 0.0, oracle = 1.0;
    const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    Vec grads{0.4, -0.2, 0.7, 0.1};
    for (std::uint64_t t = 1; t <= grads.size(); ++t) {
        double g = grads[t - 1];
        adam_step(p, Vec{g}, slot, t, lr);
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        double mhat = m / (1 - std::pow(b1, static_cast<double>(t)));
        double vhat = v / (1 - std::pow(b2, static_cast<double>(t)));
        oracle -= lr * mhat / (std::sqrt(vhat) + eps);
        CHECK(p[0] == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("rsgd step at the origin reduces to a scaled sgd step") {
    // at x = 0 the conformal factor is 2, so the Riemannian gradient is g/4
    // and exp_0 of a small step is nearly the step itself
    Vec p{0.0, 0.0};
    Vec g{0.4, -0.2};
    rsgd_step(p, g, 0.01, 1.0);
    double sx = -0.01 * 0.4 / 4.0, sy = -0.01 * -0.2 / 4.0;
    double nv = std::sqrt(sx * sx + sy * sy);
    double scale = std::tanh(nv) / nv;
    CHECK(p[0] == doctest::Approx(scale * sx).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(scale * sy).epsilon(1e-12));
    // result stays in the ball even for a huge step
    Vec q{0.9, 0.0};
    rsgd_step(q, Vec{-100.0, 0.0}, 10.0, 1.0);
    CHECK(q[0] * q[0] + q[1] * q[1] < 1.0);
}

TEST_CASE("config validation") {
    TrainConfig c;
    c.lr = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.lr = 0.0;  // zero is allowed: freezes parameters
    c.validate();
    c.dropout["input"] = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.dropout["input"] = 0.5;
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

namespace {

TripleStore tiny_store() {
    std::vector<RawTriple> train = {{"a", "r", "b"}, {"b", "r", "c"},
                                    {"c", "r", "d"}, {"d", "r", "a"},
                                    {"a", "s", "c"}, {"b", "s", "d"}};
    return build_store(train, {}, {});
}

}  // namespace

TEST_CASE("identical seeds give bit-identical parameters") {
    for (Regime regime : {Regime::NegativeSampling, Regime::OneVsAll}) {
        TripleStore st = tiny_store();
        if (regime == Regime::OneVsAll) st = add_reciprocals(st);
        TrainConfig cfg;
        cfg.regime = regime;
        cfg.optimizer = OptimizerKind::Adam;
        cfg.lr = 0.01;
        cfg.negatives = 3;
        cfg.seed = 99;
        cfg.dropout["input"] = 0.1;

        auto run = [&] {
            Rng rng(cfg.seed);
            ModelParams p = init_params(ModelKind::DistMult, st.n_entities(),
                                        st.n_relations(), 4, 4, rng);
            OptimizerState opt;
            for (int e = 0; e < 3; ++e) train_epoch(p, st, cfg, opt, rng);
            return p;
        };
        ModelParams a = run(), b = run();
        REQUIRE(a.entity.data.size() == b.entity.data.size());
        for (std::size_t i = 0; i < a.entity.data.size(); ++i)
            CHECK(a.entity.data[i] == b.entity.data[i]);
        for (std::size_t i = 0; i < a.relation.data.size(); ++i)
            CHECK(a.relation.data[i] == b.relation.data[i]);
    }
}

TEST_CASE("zero learning rate leaves parameters bit-identical") {
    TripleStore st = tiny_store();
    TrainConfig cfg;
    cfg.lr = 0.0;
    cfg.negatives = 2;
    Rng rng(5);
    ModelParams p = init_params(ModelKind::MuRE, st.n_entities(),
                                st.n_relations(), 4, 4, rng);
    ModelParams before = p;
    OptimizerState opt;
    train_epoch(p, st, cfg, opt, rng);
    for (std::size_t i = 0; i < p.entity.data.size(); ++i)
        CHECK(p.entity.data[i] == before.entity.data[i]);
    for (std::size_t i = 0; i < p.relation.data.size(); ++i)
        CHECK(p.relation.data[i] == before.relation.data[i]);
    for (std::size_t i = 0; i < p.rel_diag.data.size(); ++i)
        CHECK(p.rel_diag.data[i] == before.rel_diag.data[i]);
}

TEST_CASE("a single repeated triple is driven to high confidence") {
    std::vector<RawTriple> train = {{"a", "r", "b"}, {"b", "r", "a"}};
    TripleStore st = build_store(train, {}, {});
    TrainConfig cfg;
    cfg.regime = Regime::NegativeSampling;
    cfg.negatives = 1;
    cfg.optimizer = OptimizerKind::Adam;
    cfg.lr = 0.05;
    cfg.epochs = 200;
    Rng rng(3);
    ModelParams p =
        init_params(ModelKind::DistMult, st.n_entities(), st.n_relations(), 4,
                    4, rng);
    OptimizerState opt;
    for (std::size_t e = 0; e < cfg.epochs; ++e)
        train_epoch(p, st, cfg, opt, rng);
    CHECK(sigmoid(score(p, 0, 0, 1)) > 0.9);
    CHECK(sigmoid(score(p, 1, 0, 0)) > 0.9);
}

TEST_CASE("loss decreases on the planted hierarchy for every regime") {
    TripleStore st = testsupport::planted_hierarchy();

    SUBCASE("negative sampling + adam (distmult)") {
        TrainConfig cfg;
        cfg.negatives = 10;
        cfg.optimizer = OptimizerKind::Adam;
        cfg.lr = 0.01;
        Rng rng(1);
        ModelParams p = init_params(ModelKind::DistMult, st.n_entities(),
                                    st.n_relations(), 10, 10, rng);
        OptimizerState opt;
        double first = train_epoch(p, st, cfg, opt, rng);
        double last = 0.0;
        for (int e = 0; e < 10; ++e) last = train_epoch(p, st, cfg, opt, rng);
        CHECK(last < first);
    }

    SUBCASE("1-N + adam (tucker)") {
        TripleStore aug = add_reciprocals(st);
        TrainConfig cfg;
        cfg.regime = Regime::OneVsAll;
        cfg.optimizer = OptimizerKind::Adam;
        cfg.lr = 0.005;
        cfg.label_smoothing = 0.1;
        Rng rng(1);
        ModelParams p = init_params(ModelKind::TuckER, aug.n_entities(),
                                    aug.n_relations(), 8, 8, rng);
        OptimizerState opt;
        double first = train_epoch(p, aug, cfg, opt, rng);
        double last = 0.0;
        for (int e = 0; e < 10; ++e) last = train_epoch(p, aug, cfg, opt, rng);
        CHECK(last < first);
    }

    SUBCASE("riemannian sgd (murp) keeps the ball invariant") {
        TrainConfig cfg;
        cfg.negatives = 10;
        cfg.optimizer = OptimizerKind::RsgdMixed;
        cfg.lr = 10.0;
        Rng rng(1);
        ModelParams p = init_params(ModelKind::MuRP, st.n_entities(),
                                    st.n_relations(), 10, 10, rng);
        OptimizerState opt;
        double first = train_epoch(p, st, cfg, opt, rng);
        double last = 0.0;
        for (int e = 0; e < 10; ++e) last = train_epoch(p, st, cfg, opt, rng);
        CHECK(last < first);
        for (std::uint32_t i = 0; i < p.n_e; ++i)
            CHECK(norm2(p.entity_row(i)) < 1.0);
        for (std::uint32_t r = 0; r < p.n_r; ++r)
            CHECK(norm2(p.relation_row(r)) < 1.0);
    }
}

TEST_CASE("learning rate decay compounds per epoch") {
    TripleStore st = tiny_store();
    TrainConfig cfg;
    cfg.lr = 1.0;
    cfg.lr_decay = 0.5;
    cfg.negatives = 1;
    Rng rng(2);
    ModelParams p = init_params(ModelKind::TransE, st.n_entities(),
                                st.n_relations(), 3, 3, rng);
    OptimizerState opt;
    train_epoch(p, st, cfg, opt, rng);
    CHECK(opt.current_lr == doctest::Approx(0.5));
    train_epoch(p, st, cfg, opt, rng);
    CHECK(opt.current_lr == doctest::Approx(0.25));
}

TEST_CASE("1-N training demands a reciprocal store") {
    TripleStore st = tiny_store();
    TrainConfig cfg;
    cfg.regime = Regime::OneVsAll;
    Rng rng(1);
    ModelParams p = init_params(ModelKind::TuckER, st.n_entities(),
                                st.n_relations(), 4, 4, rng);
    OptimizerState opt;
    CHECK_THROWS_AS(train_epoch(p, st, cfg, opt, rng), std::runtime_error);
}
