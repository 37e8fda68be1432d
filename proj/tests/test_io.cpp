#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "kge/io.hpp"
#include "kge/models.hpp"

using namespace kge;

namespace {

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

bool bits_equal(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) return false;
    return a.empty() ||
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("checkpoint round trip is bit-exact for every model kind") {
    Rng rng(77);
    for (ModelKind kind :
         {ModelKind::TransE, ModelKind::DistMult, ModelKind::ComplEx,
          ModelKind::TuckER, ModelKind::MuRE, ModelKind::MuRP,
          ModelKind::HypER}) {
        for (int rep = 0; rep < 5; ++rep) {
            std::size_t d_e = 4 + rng.next_below(6);
            ModelParams p = init_params(kind, 5, 3, d_e, d_e, rng, 2, 3, 1.0);
            std::string path = tmp_path("kge_ckpt_test.bin");
            save_checkpoint(path, p);
            ModelParams q = load_checkpoint(path);
            CHECK(q.kind == p.kind);
            CHECK(q.n_e == p.n_e);
            CHECK(q.n_r == p.n_r);
            CHECK(q.d_e == p.d_e);
            CHECK(q.d_r == p.d_r);
            CHECK(q.l_f == p.l_f);
            CHECK(q.n_f == p.n_f);
            CHECK(q.curvature == p.curvature);
            CHECK(bits_equal(q.entity.data, p.entity.data));
            CHECK(bits_equal(q.relation.data, p.relation.data));
            CHECK(bits_equal(q.rel_diag.data, p.rel_diag.data));
            CHECK(bits_equal(q.bias_s, p.bias_s));
            CHECK(bits_equal(q.bias_o, p.bias_o));
            CHECK(bits_equal(q.core.data, p.core.data));
            CHECK(bits_equal(q.hyper_h.data, p.hyper_h.data));
            CHECK(bits_equal(q.hyper_w.data, p.hyper_w.data));
            CHECK(q.entity.rows == p.entity.rows);
            CHECK(q.entity.cols == p.entity.cols);
            std::remove(path.c_str());
        }
    }
}

TEST_CASE("saving twice produces identical files") {
    Rng rng(78);
    ModelParams p = init_params(ModelKind::TuckER, 4, 2, 5, 3, rng);
    std::string a = tmp_path("kge_ckpt_a.bin"), b = tmp_path("kge_ckpt_b.bin");
    save_checkpoint(a, p);
    save_checkpoint(b, p);
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    std::string ca((std::istreambuf_iterator<char>(fa)), {});
    std::string cb((std::istreambuf_iterator<char>(fb)), {});
    CHECK(ca == cb);
    CHECK(!ca.empty());
    CHECK(ca.substr(0, 4) == "KGE1");
    std::remove(a.c_str());
    std::remove(b.c_str());
}

TEST_CASE("store round trip preserves dictionaries, splits and ids") {
    auto st = add_reciprocals(build_store(
        {{{"a", "r1", "b"}, {"b", "r2", "c"}}}, {{{"a", "r2", "b"}}},
        {{{"c", "r1", "a"}}}));
    std::string path = tmp_path("kge_store_test.bin");
    save_store(path, st);
    TripleStore q = load_store(path);
    CHECK(q.entity_names == st.entity_names);
    CHECK(q.relation_names == st.relation_names);
    CHECK(q.reciprocal == st.reciprocal);
    CHECK(q.train == st.train);
    CHECK(q.valid == st.valid);
    CHECK(q.test == st.test);
    CHECK(q.entity_ids.at("b") == st.entity_ids.at("b"));
    CHECK(q.n_base_relations() == st.n_base_relations());
    std::remove(path.c_str());
}

TEST_CASE("corrupt and mismatched files are rejected") {
    std::string path = tmp_path("kge_bad.bin");
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOPE garbage";
    }
    CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_checkpoint("/no/such/ckpt.bin"), std::runtime_error);

    // a store is not a checkpoint
    auto st = build_store({{{"a", "r", "b"}}}, {}, {});
    save_store(path, st);
    CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("truncated payload is detected") {
    Rng rng(79);
    ModelParams p = init_params(ModelKind::DistMult, 4, 2, 5, 5, rng);
    std::string path = tmp_path("kge_trunc.bin");
    save_checkpoint(path, p);
    auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size - 16);
    CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("report serialization carries all metric fields") {
    RankingReport rep;
    rep.overall.count = 4;
    rep.overall.triples = 2;
    rep.overall.mr = 6.75;
    rep.overall.mrr = 0.45;
    rep.overall.hits1 = 0.25;
    rep.overall.hits3 = 0.5;
    rep.overall.hits10 = 0.75;
    rep.per_relation["r"] = rep.overall;
    auto j = ranking_report_to_json(rep);
    CHECK(j["overall"]["mr"] == 6.75);
    CHECK(j["per_relation"]["r"]["hits10"] == 0.75);
    auto csv = ranking_report_to_csv(rep);
    CHECK(csv.find("relation,triples,ranks,mr,mrr,hits1,hits3,hits10") == 0);
    CHECK(csv.find("__overall__") != std::string::npos);
    CHECK(csv.find("\nr,") != std::string::npos);
}
