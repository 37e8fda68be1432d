#ifndef KGE_EVALUATION_HPP_
#define KGE_EVALUATION_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "kge/kg_data.hpp"
#include "kge/models.hpp"

namespace kge {

struct RankEntry {
    Triple triple;       // the original (pre-reciprocal) test triple
    bool subject_side;   // true: rank over subjects via the inverse relation
    double rank;         // ties averaged
};

struct MetricBlock {
    std::size_t count = 0;   // number of ranks aggregated
    std::size_t triples = 0; // number of test triples covered
    double mr = 0.0;
    double mrr = 0.0;
    double hits1 = 0.0, hits3 = 0.0, hits10 = 0.0;
};

struct RankingReport {
    std::vector<RankEntry> ranks;
    MetricBlock overall;
    std::map<std::string, MetricBlock> per_relation;  // keyed by base relation
};

struct RelationClassStats {
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double other_per_pair = 0.0;
    std::size_t train_count = 0;
    std::size_t test_count = 0;
    std::size_t pair_count = 0;
};

struct ClassificationReport {
    std::map<std::string, RelationClassStats> per_relation;
};

inline Vec score_all_objects(const ModelParams& p, std::uint32_t s,
                             std::uint32_t r) {
    Vec out(p.n_e);
    for (std::uint32_t o = 0; o < p.n_e; ++o) out[o] = score(p, s, r, o);
    return out;
}

// Filtered rank of `o` among all object candidates for (s, r, ·). Known-true
// candidates other than the test triple are masked to −∞ (index stays equal
// to entity id). Ties contribute half a rank each.
inline double rank_object(const ModelParams& p, std::uint32_t s,
                          std::uint32_t r, std::uint32_t o,
                          const FilterIndex& filter, bool raw = false) {
    Vec scores = score_all_objects(p, s, r);
    double target = scores[o];
    double rank = 1.0;
    for (std::uint32_t cand = 0; cand < scores.size(); ++cand) {
        if (cand == o) continue;
        if (!raw && filter.contains(Triple{s, r, cand})) continue;
        if (scores[cand] > target)
            rank += 1.0;
        else if (scores[cand] == target)
            rank += 0.5;
    }
    return rank;
}

// Both-direction filtered ranks of a base triple; the subject side goes
// through the inverse relation when the store is reciprocal-augmented,
// otherwise through a direct scan over subject candidates.
inline std::pair<double, double> rank_triple(const ModelParams& p,
                                             const TripleStore& st,
                                             const Triple& t,
                                             const FilterIndex& filter,
                                             bool raw = false) {
    double object_rank = rank_object(p, t.s, t.r, t.o, filter, raw);
    double subject_rank;
    if (st.reciprocal) {
        auto r_inv = static_cast<std::uint32_t>(t.r + st.n_base_relations());
        subject_rank = rank_object(p, t.o, r_inv, t.s, filter, raw);
    } else {
        double target = score(p, t.s, t.r, t.o);
        subject_rank = 1.0;
        for (std::uint32_t cand = 0; cand < st.n_entities(); ++cand) {
            if (cand == t.s) continue;
            if (!raw && filter.contains(Triple{cand, t.r, t.o})) continue;
            double sc = score(p, cand, t.r, t.o);
            if (sc > target)
                subject_rank += 1.0;
            else if (sc == target)
                subject_rank += 0.5;
        }
    }
    return {object_rank, subject_rank};
}

namespace detail {

inline void finish_metrics(MetricBlock& m) {
    if (m.count == 0) return;
    auto n = static_cast<double>(m.count);
    m.mr /= n;
    m.mrr /= n;
    m.hits1 /= n;
    m.hits3 /= n;
    m.hits10 /= n;
}

inline void tally(MetricBlock& m, double rank) {
    ++m.count;
    m.mr += rank;
    m.mrr += 1.0 / rank;
    if (rank <= 1.0) m.hits1 += 1.0;
    if (rank <= 3.0) m.hits3 += 1.0;
    if (rank <= 10.0) m.hits10 += 1.0;
}

}  // namespace detail

// Filtered ranking evaluation over a split. Only base-relation triples are
// iterated; each contributes an object-side and a subject-side rank, both
// folded into the base relation's row.
inline RankingReport evaluate_ranking(const ModelParams& p,
                                      const TripleStore& st,
                                      const FilterIndex& filter,
                                      const std::vector<Triple>& split,
                                      bool raw = false,
                                      std::size_t threads = 1) {
    std::size_t n_base = st.n_base_relations();
    std::vector<Triple> base;
    for (const Triple& t : split)
        if (t.r < n_base) base.push_back(t);
    if (base.empty()) throw std::runtime_error("evaluation split is empty");

    std::vector<std::pair<double, double>> ranks(base.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < base.size(); ++i)
            ranks[i] = rank_triple(p, st, base[i], filter, raw);
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (base.size() + threads - 1) / threads;
        for (std::size_t w = 0; w < threads; ++w) {
            std::size_t lo = w * chunk;
            std::size_t hi = std::min(base.size(), lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                for (std::size_t i = lo; i < hi; ++i)
                    ranks[i] = rank_triple(p, st, base[i], filter, raw);
            });
        }
        for (auto& th : pool) th.join();
    }

    RankingReport rep;
    rep.ranks.reserve(2 * base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        const Triple& t = base[i];
        const std::string& rel = st.relation_names[t.r];
        MetricBlock& pr = rep.per_relation[rel];
        ++pr.triples;
        ++rep.overall.triples;
        for (bool subject_side : {false, true}) {
            double rank = subject_side ? ranks[i].second : ranks[i].first;
            rep.ranks.push_back(RankEntry{t, subject_side, rank});
            detail::tally(rep.overall, rank);
            detail::tally(pr, rank);
        }
    }
    detail::finish_metrics(rep.overall);
    for (auto& [rel, m] : rep.per_relation) detail::finish_metrics(m);
    return rep;
}

// Classification protocol: for every (s, r) pair in the test split, score all
// objects; σ(score) > threshold is a positive prediction. Accuracy is
// reported separately over known-true train and known-true valid/test
// instances; positives outside the known set count as "other".
inline ClassificationReport classify(const ModelParams& p,
                                     const TripleStore& st,
                                     const FilterIndex& filter,
                                     double threshold = 0.5) {
    std::unordered_set<std::uint64_t> train_set, eval_set;
    for (const Triple& t : st.train) train_set.insert(detail::pack(t));
    for (const Triple& t : st.valid) eval_set.insert(detail::pack(t));
    for (const Triple& t : st.test) eval_set.insert(detail::pack(t));
    (void)filter;

    struct Acc {
        std::size_t train_total = 0, train_hit = 0;
        std::size_t eval_total = 0, eval_hit = 0;
        std::size_t other = 0, pairs = 0;
    };
    std::map<std::string, Acc> acc;
    std::unordered_set<std::uint64_t> seen_pairs;
    for (const Triple& t : st.test) {
        std::uint64_t key = (static_cast<std::uint64_t>(t.s) << 32) | t.r;
        if (!seen_pairs.insert(key).second) continue;
        std::string rel = st.relation_names[t.r % std::max<std::size_t>(
                                                st.n_base_relations(), 1)];
        Acc& a = acc[rel];
        ++a.pairs;
        for (std::uint32_t o = 0; o < st.n_entities(); ++o) {
            bool predicted = sigmoid(score(p, t.s, t.r, o)) > threshold;
            Triple cand{t.s, t.r, o};
            std::uint64_t ck = detail::pack(cand);
            if (train_set.count(ck)) {
                ++a.train_total;
                if (predicted) ++a.train_hit;
            } else if (eval_set.count(ck)) {
                ++a.eval_total;
                if (predicted) ++a.eval_hit;
            } else if (predicted) {
                ++a.other;
            }
        }
    }

    ClassificationReport rep;
    for (const auto& [rel, a] : acc) {
        RelationClassStats s;
        s.train_count = a.train_total;
        s.test_count = a.eval_total;
        s.pair_count = a.pairs;
        s.train_accuracy = a.train_total
                               ? static_cast<double>(a.train_hit) / a.train_total
                               : 0.0;
        s.test_accuracy = a.eval_total
                              ? static_cast<double>(a.eval_hit) / a.eval_total
                              : 0.0;
        s.other_per_pair =
            a.pairs ? static_cast<double>(a.other) / a.pairs : 0.0;
        rep.per_relation[rel] = s;
    }
    return rep;
}

}  // namespace kge

#endif
