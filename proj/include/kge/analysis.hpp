#ifndef KGE_ANALYSIS_HPP_
#define KGE_ANALYSIS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kge/kg_data.hpp"
#include "kge/models.hpp"

namespace kge {

// Directed entity graph of a single relation; parallel edges collapsed.
struct RelationGraph {
    std::vector<std::uint32_t> nodes;  // entity ids present in the graph
    std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> adjacency;

    void add_edge(std::uint32_t s, std::uint32_t o) {
        auto& out = adjacency[s];
        if (std::find(out.begin(), out.end(), o) == out.end()) out.push_back(o);
        touch(s);
        touch(o);
    }

private:
    std::unordered_set<std::uint32_t> seen_;
    void touch(std::uint32_t n) {
        if (seen_.insert(n).second) nodes.push_back(n);
    }
};

// Per-relation graphs from the train split, pre-reciprocal relations only
// (inverse relations would force every pair to be mutually reachable).
inline std::map<std::string, RelationGraph> relation_graphs(
    const TripleStore& st) {
    std::map<std::string, RelationGraph> out;
    std::size_t n_base = st.n_base_relations();
    for (const Triple& t : st.train)
        if (t.r < n_base) out[st.relation_names[t.r]].add_edge(t.s, t.o);
    return out;
}

namespace detail {

// BFS reachability (paths of length >= 1) from one node, as local indices.
inline std::vector<std::uint32_t> bfs_dist(
    const RelationGraph& g,
    const std::unordered_map<std::uint32_t, std::uint32_t>& index,
    std::uint32_t start) {
    std::vector<std::uint32_t> dist(g.nodes.size(), 0);  // 0 = unreached
    std::deque<std::uint32_t> queue{start};
    while (!queue.empty()) {
        std::uint32_t cur = queue.front();
        queue.pop_front();
        auto it = g.adjacency.find(cur);
        if (it == g.adjacency.end()) continue;
        std::uint32_t base = dist[index.at(cur)];
        for (std::uint32_t next : it->second) {
            std::uint32_t& d = dist[index.at(next)];
            if (d == 0) {
                d = base + 1;
                queue.push_back(next);
            }
        }
    }
    return dist;
}

}  // namespace detail

// Khs = #{ordered pairs with a path i→j but none j→i} / #{pairs with i→j},
// over ordered pairs of distinct nodes; 0 when nothing is reachable.
inline double krackhardt_score(const RelationGraph& g) {
    std::size_t n = g.nodes.size();
    if (n == 0) return 0.0;
    std::unordered_map<std::uint32_t, std::uint32_t> index;
    for (std::uint32_t i = 0; i < n; ++i) index[g.nodes[i]] = i;
    // reach[i] holds a bitset row of nodes reachable from i
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::uint32_t i = 0; i < n; ++i) {
        auto dist = detail::bfs_dist(g, index, g.nodes[i]);
        for (std::uint32_t j = 0; j < n; ++j)
            if (dist[j] > 0) reach[i][j] = true;
    }
    std::size_t reachable = 0, one_way = 0;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) {
            if (i == j || !reach[i][j]) continue;
            ++reachable;
            if (!reach[j][i]) ++one_way;
        }
    if (reachable == 0) return 0.0;
    return static_cast<double>(one_way) / static_cast<double>(reachable);
}

// Shortest-path statistics over reachable ordered pairs (x ≠ y).
inline std::pair<std::size_t, double> path_stats(const RelationGraph& g) {
    std::size_t n = g.nodes.size();
    if (n == 0) return {0, 0.0};
    std::unordered_map<std::uint32_t, std::uint32_t> index;
    for (std::uint32_t i = 0; i < n; ++i) index[g.nodes[i]] = i;
    std::size_t max_path = 0, pairs = 0;
    double total = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
        auto dist = detail::bfs_dist(g, index, g.nodes[i]);
        for (std::uint32_t j = 0; j < n; ++j) {
            if (j == i || dist[j] == 0) continue;
            ++pairs;
            total += dist[j];
            max_path = std::max<std::size_t>(max_path, dist[j]);
        }
    }
    return {max_path, pairs ? total / static_cast<double>(pairs) : 0.0};
}

// Hubert–Baker symmetry statistic over off-diagonal entries; 1 for symmetric
// matrices, −1 for anti-symmetric ones. Undefined (nullopt) when all
// off-diagonal entries are equal.
inline std::optional<double> symmetry_score(const Mat& m) {
    if (m.rows != m.cols || m.rows < 2)
        throw std::invalid_argument("symmetry_score: need a square matrix, n >= 2");
    double n = static_cast<double>(m.rows);
    double cross = 0.0, sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) {
            if (i == j) continue;
            double v = m.at(i, j);
            cross += v * m.at(j, i);
            sum += v;
            sumsq += v * v;
        }
    double correction = sum * sum / (n * (n - 1.0));
    double denom = sumsq - correction;
    if (std::abs(denom) < 1e-15 * std::max(1.0, sumsq)) return std::nullopt;
    return (cross - correction) / denom;
}

// Euclidean norm of each relation's translation vector.
inline std::map<std::string, double> vector_norms(
    const ModelParams& p, const std::vector<std::string>& relation_names) {
    if (p.kind != ModelKind::TransE && p.kind != ModelKind::MuRE &&
        p.kind != ModelKind::MuRP)
        throw std::invalid_argument(
            "vector_norms: model has no additive relation offsets");
    std::map<std::string, double> out;
    for (std::uint32_t r = 0; r < p.n_r; ++r)
        out[relation_names[r]] = norm(p.relation_row(r));
    return out;
}

struct Spectrum {
    Vec magnitudes;  // sorted descending, scaled so the leading value is 1
    bool degenerate = false;
};

// |diag| sorted descending and scaled relative to the largest magnitude.
inline std::map<std::string, Spectrum> spectrum_diagonal(
    const ModelParams& p, const std::vector<std::string>& relation_names) {
    if (p.kind != ModelKind::DistMult && p.kind != ModelKind::MuRE &&
        p.kind != ModelKind::MuRP)
        throw std::invalid_argument(
            "spectrum_diagonal: relation matrix is not diagonal for this "
            "model; use symmetry_score on the full matrix instead");
    std::map<std::string, Spectrum> out;
    for (std::uint32_t r = 0; r < p.n_r; ++r) {
        auto row = p.kind == ModelKind::DistMult ? p.relation_row(r)
                                                 : p.rel_diag_row(r);
        Spectrum s;
        s.magnitudes.assign(row.begin(), row.end());
        for (double& v : s.magnitudes) v = std::abs(v);
        std::sort(s.magnitudes.begin(), s.magnitudes.end(),
                  std::greater<double>());
        double lead = s.magnitudes.empty() ? 0.0 : s.magnitudes.front();
        if (lead == 0.0)
            s.degenerate = true;
        else
            for (double& v : s.magnitudes) v /= lead;
        out[relation_names[r]] = std::move(s);
    }
    return out;
}

// Projects objects to 2-D preserving each object's norm and its angle to the
// subject: x = (subject/‖subject‖)·e, y = √(‖e‖² − x²).
inline std::vector<std::pair<double, double>> project_2d(
    const Vec& subject, const std::vector<Vec>& objects) {
    double ns = norm(subject);
    if (ns == 0.0) throw std::invalid_argument("project_2d: zero subject");
    std::vector<std::pair<double, double>> out;
    out.reserve(objects.size());
    for (const Vec& e : objects) {
        double x = dot(subject, e) / ns;
        double rad = norm2(e) - x * x;
        out.emplace_back(x, std::sqrt(std::max(0.0, rad)));
    }
    return out;
}

}  // namespace kge

#endif
