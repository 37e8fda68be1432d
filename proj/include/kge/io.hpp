#ifndef KGE_IO_HPP_
#define KGE_IO_HPP_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kge/analysis.hpp"
#include "kge/evaluation.hpp"
#include "kge/kg_data.hpp"
#include "kge/models.hpp"

namespace kge {

// File framing shared by checkpoints and prepared stores:
//   magic "KGE1" | u32 LE header length | JSON header | binary payload
// Checkpoints carry 64-bit LE floats in manifest order; prepared stores
// carry per-split 32-bit LE id columns (all s, then all r, then all o).

namespace detail {

inline constexpr char kMagic[4] = {'K', 'G', 'E', '1'};

inline void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_f64(std::ostream& out, const double* data, std::size_t n) {
    // doubles are written little-endian; this build targets LE hosts
    static_assert(sizeof(double) == 8);
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(8 * n));
}

inline void read_f64(std::istream& in, double* data, std::size_t n) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(8 * n));
    if (!in) throw std::runtime_error("checkpoint payload truncated");
}

inline nlohmann::json read_framed_header(std::istream& in,
                                         const std::string& expect_kind) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("bad magic: not a KGE1 file");
    std::uint32_t len = read_u32(in);
    std::string header(len, '\0');
    in.read(header.data(), len);
    if (!in) throw std::runtime_error("truncated header");
    auto j = nlohmann::json::parse(header);
    if (j.value("kind", "") != expect_kind)
        throw std::runtime_error("unexpected file kind: " +
                                 j.value("kind", std::string("?")));
    return j;
}

inline void write_framed_header(std::ostream& out, const nlohmann::json& j) {
    std::string header = j.dump();
    out.write(kMagic, 4);
    write_u32(out, static_cast<std::uint32_t>(header.size()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const ModelParams& p) {
    nlohmann::json manifest = nlohmann::json::array();
    std::vector<std::pair<const double*, std::size_t>> blocks;
    auto add = [&](const char* name, const double* data, std::size_t n,
                   std::vector<std::size_t> shape) {
        if (n == 0) return;
        manifest.push_back({{"name", name}, {"shape", shape}});
        blocks.emplace_back(data, n);
    };
    add("entity", p.entity.data.data(), p.entity.data.size(),
        {p.entity.rows, p.entity.cols});
    add("relation", p.relation.data.data(), p.relation.data.size(),
        {p.relation.rows, p.relation.cols});
    add("rel_diag", p.rel_diag.data.data(), p.rel_diag.data.size(),
        {p.rel_diag.rows, p.rel_diag.cols});
    add("bias_s", p.bias_s.data(), p.bias_s.size(), {p.bias_s.size()});
    add("bias_o", p.bias_o.data(), p.bias_o.size(), {p.bias_o.size()});
    add("core", p.core.data.data(), p.core.data.size(),
        {p.core.d1, p.core.d2, p.core.d3});
    add("hyper_h", p.hyper_h.data.data(), p.hyper_h.data.size(),
        {p.hyper_h.rows, p.hyper_h.cols});
    add("hyper_w", p.hyper_w.data.data(), p.hyper_w.data.size(),
        {p.hyper_w.rows, p.hyper_w.cols});

    nlohmann::json header = {
        {"kind", "checkpoint"}, {"model", model_name(p.kind)},
        {"n_e", p.n_e},         {"n_r", p.n_r},
        {"d_e", p.d_e},         {"d_r", p.d_r},
        {"l_f", p.l_f},         {"n_f", p.n_f},
        {"curvature", p.curvature}, {"manifest", manifest}};

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    detail::write_framed_header(out, header);
    for (auto [data, n] : blocks) detail::write_f64(out, data, n);
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

inline ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    auto j = detail::read_framed_header(in, "checkpoint");
    ModelParams p;
    p.kind = model_from_name(j.at("model"));
    p.n_e = j.at("n_e");
    p.n_r = j.at("n_r");
    p.d_e = j.at("d_e");
    p.d_r = j.at("d_r");
    p.l_f = j.at("l_f");
    p.n_f = j.at("n_f");
    p.curvature = j.at("curvature");
    for (const auto& entry : j.at("manifest")) {
        std::string name = entry.at("name");
        std::vector<std::size_t> shape =
            entry.at("shape").get<std::vector<std::size_t>>();
        std::size_t n = 1;
        for (auto d : shape) n *= d;
        double* dst = nullptr;
        if (name == "entity") {
            p.entity = Mat(shape.at(0), shape.at(1));
            dst = p.entity.data.data();
        } else if (name == "relation") {
            p.relation = Mat(shape.at(0), shape.at(1));
            dst = p.relation.data.data();
        } else if (name == "rel_diag") {
            p.rel_diag = Mat(shape.at(0), shape.at(1));
            dst = p.rel_diag.data.data();
        } else if (name == "bias_s") {
            p.bias_s.assign(n, 0.0);
            dst = p.bias_s.data();
        } else if (name == "bias_o") {
            p.bias_o.assign(n, 0.0);
            dst = p.bias_o.data();
        } else if (name == "core") {
            p.core = Tensor3(shape.at(0), shape.at(1), shape.at(2));
            dst = p.core.data.data();
        } else if (name == "hyper_h") {
            p.hyper_h = Mat(shape.at(0), shape.at(1));
            dst = p.hyper_h.data.data();
        } else if (name == "hyper_w") {
            p.hyper_w = Mat(shape.at(0), shape.at(1));
            dst = p.hyper_w.data.data();
        } else {
            throw std::runtime_error("unknown manifest entry: " + name);
        }
        detail::read_f64(in, dst, n);
    }
    return p;
}

inline void save_store(const std::string& path, const TripleStore& st) {
    nlohmann::json header = {
        {"kind", "store"},
        {"entities", st.entity_names},
        {"relations", st.relation_names},
        {"reciprocal", st.reciprocal},
        {"splits",
         {{"train", st.train.size()},
          {"valid", st.valid.size()},
          {"test", st.test.size()}}}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write store: " + path);
    detail::write_framed_header(out, header);
    for (const auto* split : {&st.train, &st.valid, &st.test}) {
        for (const Triple& t : *split) detail::write_u32(out, t.s);
        for (const Triple& t : *split) detail::write_u32(out, t.r);
        for (const Triple& t : *split) detail::write_u32(out, t.o);
    }
    if (!out) throw std::runtime_error("store write failed: " + path);
}

inline TripleStore load_store(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open store: " + path);
    auto j = detail::read_framed_header(in, "store");
    TripleStore st;
    st.entity_names = j.at("entities").get<std::vector<std::string>>();
    st.relation_names = j.at("relations").get<std::vector<std::string>>();
    for (std::uint32_t i = 0; i < st.entity_names.size(); ++i)
        st.entity_ids.emplace(st.entity_names[i], i);
    for (std::uint32_t i = 0; i < st.relation_names.size(); ++i)
        st.relation_ids.emplace(st.relation_names[i], i);
    st.reciprocal = j.at("reciprocal");
    auto read_split = [&](std::vector<Triple>& split, std::size_t n) {
        split.resize(n);
        for (Triple& t : split) t.s = detail::read_u32(in);
        for (Triple& t : split) t.r = detail::read_u32(in);
        for (Triple& t : split) t.o = detail::read_u32(in);
        if (!in) throw std::runtime_error("store payload truncated");
    };
    read_split(st.train, j.at("splits").at("train"));
    read_split(st.valid, j.at("splits").at("valid"));
    read_split(st.test, j.at("splits").at("test"));
    return st;
}

// ---------------------------------------------------------------------------
// report serialization

inline nlohmann::json metrics_to_json(const MetricBlock& m) {
    return {{"count", m.count},   {"triples", m.triples}, {"mr", m.mr},
            {"mrr", m.mrr},       {"hits1", m.hits1},     {"hits3", m.hits3},
            {"hits10", m.hits10}};
}

inline nlohmann::json ranking_report_to_json(const RankingReport& rep) {
    nlohmann::json per_rel = nlohmann::json::object();
    for (const auto& [rel, m] : rep.per_relation)
        per_rel[rel] = metrics_to_json(m);
    return {{"overall", metrics_to_json(rep.overall)},
            {"per_relation", per_rel}};
}

inline std::string ranking_report_to_csv(const RankingReport& rep) {
    std::string out = "relation,triples,ranks,mr,mrr,hits1,hits3,hits10\n";
    auto row = [&](const std::string& name, const MetricBlock& m) {
        out += name + "," + std::to_string(m.triples) + "," +
               std::to_string(m.count) + "," + std::to_string(m.mr) + "," +
               std::to_string(m.mrr) + "," + std::to_string(m.hits1) + "," +
               std::to_string(m.hits3) + "," + std::to_string(m.hits10) + "\n";
    };
    row("__overall__", rep.overall);
    for (const auto& [rel, m] : rep.per_relation) row(rel, m);
    return out;
}

inline nlohmann::json classification_report_to_json(
    const ClassificationReport& rep) {
    nlohmann::json per_rel = nlohmann::json::object();
    for (const auto& [rel, s] : rep.per_relation)
        per_rel[rel] = {{"train_accuracy", s.train_accuracy},
                        {"test_accuracy", s.test_accuracy},
                        {"other_per_pair", s.other_per_pair},
                        {"train_count", s.train_count},
                        {"test_count", s.test_count},
                        {"pair_count", s.pair_count}};
    return {{"per_relation", per_rel}};
}

}  // namespace kge

#endif
