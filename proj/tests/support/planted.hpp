#ifndef TESTS_SUPPORT_PLANTED_HPP_
#define TESTS_SUPPORT_PLANTED_HPP_

// Synthetic hierarchy dataset: a balanced binary tree of 63 entities with a
// transitive "above" relation (every ancestor/descendant pair) and a
// symmetric "sibling" relation between children of the same parent. A
// fraction of the edges is held out into valid/test such that every entity
// and relation still occurs in train.

#include <string>
#include <vector>

#include "kge/kg_data.hpp"
#include "kge/rng.hpp"

namespace testsupport {

inline kge::TripleStore planted_hierarchy(std::uint64_t seed = 7,
                                          double holdout = 0.2,
                                          int depth = 6) {
    using kge::RawTriple;
    std::size_t n = (1u << depth) - 1;  // 63 for depth 6
    auto name = [](std::size_t i) { return "n" + std::to_string(i); };

    std::vector<RawTriple> edges;
    // transitive closure of the ancestor relation
    for (std::size_t child = 1; child < n; ++child) {
        std::size_t anc = child;
        while (anc != 0) {
            anc = (anc - 1) / 2;
            edges.push_back({name(anc), "above", name(child)});
        }
    }
    // symmetric sibling relation
    for (std::size_t parent = 0; 2 * parent + 2 < n; ++parent) {
        std::string l = name(2 * parent + 1), r = name(2 * parent + 2);
        edges.push_back({l, "sibling", r});
        edges.push_back({r, "sibling", l});
    }

    kge::Rng rng(seed);
    for (std::size_t i = edges.size(); i > 1; --i)
        std::swap(edges[i - 1], edges[rng.next_below(i)]);

    // greedy holdout keeping every entity/relation covered in train
    std::unordered_map<std::string, std::size_t> ent_left, rel_left;
    for (const auto& e : edges) {
        ++ent_left[e[0]];
        ++ent_left[e[2]];
        ++rel_left[e[1]];
    }
    std::size_t want = static_cast<std::size_t>(holdout * edges.size());
    std::vector<RawTriple> train, held;
    for (const auto& e : edges) {
        bool can_hold = held.size() < want && ent_left[e[0]] > 1 &&
                        ent_left[e[2]] > 1 && rel_left[e[1]] > 1;
        if (can_hold) {
            held.push_back(e);
            --ent_left[e[0]];
            --ent_left[e[2]];
            --rel_left[e[1]];
        } else {
            train.push_back(e);
        }
    }
    std::size_t half = held.size() / 2;
    std::vector<RawTriple> valid(held.begin(), held.begin() + half);
    std::vector<RawTriple> test(held.begin() + half, held.end());
    return kge::build_store(train, valid, test);
}

}  // namespace testsupport

#endif
