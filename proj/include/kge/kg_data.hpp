#ifndef KGE_KG_DATA_HPP_
#define KGE_KG_DATA_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kge/rng.hpp"

namespace kge {

struct Triple {
    std::uint32_t s = 0;
    std::uint32_t r = 0;
    std::uint32_t o = 0;

    bool operator==(const Triple&) const = default;
};

using RawTriple = std::array<std::string, 3>;

struct TripleStore {
    std::vector<std::string> entity_names;
    std::vector<std::string> relation_names;
    std::unordered_map<std::string, std::uint32_t> entity_ids;
    std::unordered_map<std::string, std::uint32_t> relation_ids;
    std::vector<Triple> train, valid, test;
    bool reciprocal = false;
    std::size_t duplicates_dropped = 0;

    std::size_t n_entities() const { return entity_names.size(); }
    std::size_t n_relations() const { return relation_names.size(); }
    // relation count before reciprocal augmentation
    std::size_t n_base_relations() const {
        return reciprocal ? relation_names.size() / 2 : relation_names.size();
    }
};

namespace detail {

// ids are kept below 2^21 so a triple packs into one 64-bit key
inline constexpr std::uint64_t kIdBits = 21;

inline std::uint64_t pack(const Triple& t) {
    return (static_cast<std::uint64_t>(t.s) << (2 * kIdBits)) |
           (static_cast<std::uint64_t>(t.r) << kIdBits) |
           static_cast<std::uint64_t>(t.o);
}

}  // namespace detail

struct FilterIndex {
    std::unordered_set<std::uint64_t> known;
    std::size_t cross_split_duplicates = 0;

    bool contains(const Triple& t) const {
        return known.count(detail::pack(t)) != 0;
    }
    std::size_t size() const { return known.size(); }
};

struct NegBatch {
    std::vector<Triple> positives;
    std::vector<Triple> negatives;  // k per positive, grouped
    std::size_t k = 0;
};

inline std::vector<RawTriple> load_triples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open triple file: " + path);
    std::vector<RawTriple> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos ||
            line.find('\t', t2 + 1) != std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 3 tab-separated fields");
        out.push_back({line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1),
                       line.substr(t2 + 1)});
    }
    return out;
}

inline TripleStore build_store(const std::vector<RawTriple>& train,
                               const std::vector<RawTriple>& valid,
                               const std::vector<RawTriple>& test) {
    TripleStore st;
    auto intern = [](std::unordered_map<std::string, std::uint32_t>& ids,
                     std::vector<std::string>& names, const std::string& name,
                     bool allow_new, const char* kind) {
        auto it = ids.find(name);
        if (it != ids.end()) return it->second;
        if (!allow_new)
            throw std::runtime_error(std::string("unseen ") + kind +
                                     " in valid/test: " + name);
        auto id = static_cast<std::uint32_t>(names.size());
        if (id >= (1u << detail::kIdBits))
            throw std::runtime_error("too many entities/relations for id space");
        ids.emplace(name, id);
        names.push_back(name);
        return id;
    };
    auto encode = [&](const std::vector<RawTriple>& raw, bool allow_new,
                      std::vector<Triple>& out) {
        std::unordered_set<std::uint64_t> seen;
        for (const auto& rt : raw) {
            Triple t;
            t.s = intern(st.entity_ids, st.entity_names, rt[0], allow_new,
                         "entity");
            t.r = intern(st.relation_ids, st.relation_names, rt[1], allow_new,
                         "relation");
            t.o = intern(st.entity_ids, st.entity_names, rt[2], allow_new,
                         "entity");
            if (!seen.insert(detail::pack(t)).second) {
                ++st.duplicates_dropped;  // in-split duplicate, dropped
                continue;
            }
            out.push_back(t);
        }
    };
    encode(train, true, st.train);
    encode(valid, false, st.valid);
    encode(test, false, st.test);
    return st;
}

inline TripleStore add_reciprocals(TripleStore st) {
    if (st.reciprocal)
        throw std::runtime_error("store already reciprocal-augmented");
    auto base = static_cast<std::uint32_t>(st.n_relations());
    for (std::uint32_t r = 0; r < base; ++r) {
        std::string name = st.relation_names[r] + "_reverse";
        st.relation_ids.emplace(name, base + r);
        st.relation_names.push_back(std::move(name));
    }
    auto mirror = [&](std::vector<Triple>& split) {
        std::size_t n = split.size();
        split.reserve(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            const Triple& t = split[i];
            split.push_back(Triple{t.o, t.r + base, t.s});
        }
    };
    mirror(st.train);
    mirror(st.valid);
    mirror(st.test);
    st.reciprocal = true;
    return st;
}

inline FilterIndex build_filter_index(const TripleStore& st) {
    FilterIndex idx;
    for (const auto* split : {&st.train, &st.valid, &st.test})
        for (const Triple& t : *split)
            if (!idx.known.insert(detail::pack(t)).second)
                ++idx.cross_split_duplicates;
    return idx;
}

// Each negative differs from its positive in exactly one of {s, o}. A draw
// that reproduces the positive is retried up to 100 times, then kept with
// label 0 (rare false negatives are tolerated).
inline NegBatch sample_negatives(const TripleStore& st,
                                 const std::vector<Triple>& positives,
                                 std::size_t k, Rng& rng) {
    if (k < 1) throw std::invalid_argument("sample_negatives: k must be >= 1");
    NegBatch nb;
    nb.positives = positives;
    nb.k = k;
    nb.negatives.reserve(positives.size() * k);
    auto n_e = static_cast<std::uint64_t>(st.n_entities());
    for (const Triple& pos : positives) {
        for (std::size_t j = 0; j < k; ++j) {
            bool corrupt_object = rng.next_double() < 0.5;
            Triple neg = pos;
            for (int attempt = 0; attempt < 100; ++attempt) {
                auto e = static_cast<std::uint32_t>(rng.next_below(n_e));
                if (corrupt_object)
                    neg.o = e;
                else
                    neg.s = e;
                if (!(neg == pos)) break;
            }
            nb.negatives.push_back(neg);
        }
    }
    return nb;
}

// 1-N labels for a (subject, relation) pair: y_o = 1 iff (s, r, o) ∈ train.
inline std::vector<double> one_vs_all_targets(const TripleStore& st,
                                              std::uint32_t s,
                                              std::uint32_t r) {
    if (!st.reciprocal)
        throw std::runtime_error(
            "one_vs_all_targets requires a reciprocal-augmented store");
    std::vector<double> y(st.n_entities(), 0.0);
    for (const Triple& t : st.train)
        if (t.s == s && t.r == r) y[t.o] = 1.0;
    return y;
}

inline TripleStore resplit_random(const TripleStore& st, std::size_t valid_size,
                                  std::size_t test_size, Rng& rng) {
    std::vector<Triple> all;
    for (const auto* split : {&st.train, &st.valid, &st.test})
        all.insert(all.end(), split->begin(), split->end());
    if (all.size() <= valid_size + test_size)
        throw std::runtime_error("resplit: requested sizes exceed triple count");

    // Fisher-Yates with our deterministic generator
    for (std::size_t i = all.size(); i > 1; --i) {
        std::size_t j = rng.next_below(i);
        std::swap(all[i - 1], all[j]);
    }

    TripleStore out = st;
    out.duplicates_dropped = 0;
    out.test.assign(all.begin(), all.begin() + test_size);
    out.valid.assign(all.begin() + test_size,
                     all.begin() + test_size + valid_size);
    out.train.assign(all.begin() + test_size + valid_size, all.end());

    // every valid/test relation must appear in train: swap violators back
    for (int pass = 0; pass < 100; ++pass) {
        std::vector<std::size_t> train_rel_count(st.n_relations(), 0);
        for (const Triple& t : out.train) ++train_rel_count[t.r];
        bool ok = true;
        for (auto* split : {&out.valid, &out.test}) {
            for (Triple& t : *split) {
                if (train_rel_count[t.r] > 0) continue;
                ok = false;
                std::size_t j = rng.next_below(out.train.size());
                ++train_rel_count[t.r];
                --train_rel_count[out.train[j].r];
                std::swap(t, out.train[j]);
            }
        }
        if (ok) return out;
    }
    throw std::runtime_error("resplit: could not satisfy relation coverage");
}

// Keep a random subset of relations: `keep_hierarchical` with Khs above the
// threshold and `keep_other` below it; drop all triples of other relations.
// Remaining splits are re-encoded with compact ids.
inline TripleStore filter_relations_by_khs(
    const TripleStore& st, const std::vector<double>& khs_per_relation,
    double threshold, std::size_t keep_hierarchical, std::size_t keep_other,
    Rng& rng) {
    if (threshold < 0.0 || threshold > 1.0)
        throw std::invalid_argument("khs threshold must be in [0,1]");
    if (khs_per_relation.size() != st.n_relations())
        throw std::invalid_argument("khs vector size mismatch");
    std::vector<std::uint32_t> hier, other;
    for (std::uint32_t r = 0; r < st.n_relations(); ++r)
        (khs_per_relation[r] >= threshold ? hier : other).push_back(r);
    if (hier.size() < keep_hierarchical)
        throw std::runtime_error("not enough hierarchical relations to keep");
    if (other.size() < keep_other)
        throw std::runtime_error("not enough non-hierarchical relations to keep");

    auto choose = [&](std::vector<std::uint32_t>& pool, std::size_t n) {
        for (std::size_t i = pool.size(); i > 1; --i)
            std::swap(pool[i - 1], pool[rng.next_below(i)]);
        pool.resize(n);
    };
    choose(hier, keep_hierarchical);
    choose(other, keep_other);
    std::vector<bool> keep(st.n_relations(), false);
    for (auto r : hier) keep[r] = true;
    for (auto r : other) keep[r] = true;

    auto decode = [&](const std::vector<Triple>& split) {
        std::vector<RawTriple> raw;
        for (const Triple& t : split)
            if (keep[t.r])
                raw.push_back({st.entity_names[t.s], st.relation_names[t.r],
                               st.entity_names[t.o]});
        return raw;
    };
    auto raw_train = decode(st.train);
    auto raw_valid = decode(st.valid);
    auto raw_test = decode(st.test);

    // drop valid/test triples whose entity/relation no longer occurs in train
    std::unordered_set<std::string> seen_e, seen_r;
    for (const auto& rt : raw_train) {
        seen_e.insert(rt[0]);
        seen_e.insert(rt[2]);
        seen_r.insert(rt[1]);
    }
    auto prune = [&](std::vector<RawTriple>& raw) {
        std::erase_if(raw, [&](const RawTriple& rt) {
            return !seen_e.count(rt[0]) || !seen_r.count(rt[1]) ||
                   !seen_e.count(rt[2]);
        });
    };
    prune(raw_valid);
    prune(raw_test);
    return build_store(raw_train, raw_valid, raw_test);
}

}  // namespace kge

#endif
