// Batch frontend: dataset preparation, training, evaluation, analysis.
// Exit codes: 0 ok, 2 usage/input error, 3 numerical failure, 4 incompatibility.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kge/analysis.hpp"
#include "kge/evaluation.hpp"
#include "kge/io.hpp"
#include "kge/kg_data.hpp"
#include "kge/models.hpp"
#include "kge/training.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIncompatible = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IncompatibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Relative input paths fall back to $KGE_DATA_DIR when not found locally.
std::string resolve_input(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::exists(path)) return path;
    if (!fs::path(path).is_absolute()) {
        if (const char* root = std::getenv("KGE_DATA_DIR")) {
            fs::path candidate = fs::path(root) / path;
            if (fs::exists(candidate)) return candidate.string();
        }
    }
    return path;
}

// ---------------------------------------------------------------------------
// run configuration: flat key=value file, same-named flags override

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "regime",        "negatives",       "lr",
        "lr_decay",      "epochs",          "batch_size",
        "label_smoothing", "dropout_input", "dropout_hidden1",
        "dropout_hidden2", "optimizer",     "seed",
        "d_e",           "d_r",             "l_f",
        "n_f",           "curvature",       "eval_every"};
    return keys;
}

std::string valid_key_list() {
    std::string out;
    for (const auto& k : config_keys()) {
        if (!out.empty()) out += ", ";
        out += k;
    }
    return out;
}

std::map<std::string, std::string> model_defaults(kge::ModelKind kind) {
    std::map<std::string, std::string> c = {
        {"regime", "neg_sampling"}, {"negatives", "50"},
        {"lr", "0.001"},            {"lr_decay", "1.0"},
        {"epochs", "100"},          {"batch_size", "128"},
        {"label_smoothing", "0"},   {"dropout_input", "0"},
        {"dropout_hidden1", "0"},   {"dropout_hidden2", "0"},
        {"optimizer", "adam"},      {"seed", "1"},
        {"d_e", "40"},              {"d_r", "40"},
        {"l_f", "9"},               {"n_f", "32"},
        {"curvature", "1.0"},       {"eval_every", "10"}};
    using kge::ModelKind;
    switch (kind) {
        case ModelKind::TransE:
            c["optimizer"] = "sgd";
            c["lr"] = "0.01";
            break;
        case ModelKind::DistMult:
        case ModelKind::ComplEx:
            break;
        case ModelKind::TuckER:
            c["regime"] = "one_vs_all";
            c["lr"] = "0.005";
            c["label_smoothing"] = "0.1";
            c["dropout_input"] = "0.2";
            c["dropout_hidden1"] = "0.2";
            c["dropout_hidden2"] = "0.3";
            c["d_r"] = "30";
            break;
        case ModelKind::HypER:
            c["regime"] = "one_vs_all";
            c["lr"] = "0.001";
            c["label_smoothing"] = "0.1";
            c["dropout_input"] = "0.2";
            c["dropout_hidden1"] = "0.2";
            c["dropout_hidden2"] = "0.3";
            break;
        case ModelKind::MuRE:
            c["optimizer"] = "sgd";
            c["lr"] = "50";
            break;
        case ModelKind::MuRP:
            c["optimizer"] = "rsgd";
            c["lr"] = "50";
            break;
    }
    return c;
}

void apply_config_file(std::map<std::string, std::string>& cfg,
                       const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto strip = [](std::string s) {
            auto b = s.find_first_not_of(" \t");
            auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        if (strip(line).empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(lineno) +
                             ": expected key=value");
        std::string key = strip(line.substr(0, eq));
        std::string value = strip(line.substr(eq + 1));
        if (!cfg.count(key))
            throw UsageError(path + ":" + std::to_string(lineno) +
                             ": unknown key '" + key +
                             "'; valid keys: " + valid_key_list());
        cfg[key] = value;
    }
}

double to_double(const std::map<std::string, std::string>& c,
                 const std::string& key) {
    try {
        return std::stod(c.at(key));
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "' is not a number: " +
                         c.at(key));
    }
}

std::size_t to_size(const std::map<std::string, std::string>& c,
                    const std::string& key) {
    try {
        return static_cast<std::size_t>(std::stoull(c.at(key)));
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "' is not an integer: " +
                         c.at(key));
    }
}

kge::TrainConfig to_train_config(const std::map<std::string, std::string>& c) {
    kge::TrainConfig tc;
    const std::string& regime = c.at("regime");
    if (regime == "neg_sampling")
        tc.regime = kge::Regime::NegativeSampling;
    else if (regime == "one_vs_all")
        tc.regime = kge::Regime::OneVsAll;
    else
        throw UsageError("regime must be neg_sampling or one_vs_all, got " +
                         regime);
    const std::string& opt = c.at("optimizer");
    if (opt == "sgd")
        tc.optimizer = kge::OptimizerKind::Sgd;
    else if (opt == "adam")
        tc.optimizer = kge::OptimizerKind::Adam;
    else if (opt == "rsgd")
        tc.optimizer = kge::OptimizerKind::RsgdMixed;
    else
        throw UsageError("optimizer must be sgd, adam or rsgd, got " + opt);
    tc.negatives = to_size(c, "negatives");
    tc.lr = to_double(c, "lr");
    tc.lr_decay = to_double(c, "lr_decay");
    tc.epochs = to_size(c, "epochs");
    tc.batch_size = to_size(c, "batch_size");
    tc.label_smoothing = to_double(c, "label_smoothing");
    tc.dropout["input"] = to_double(c, "dropout_input");
    tc.dropout["hidden1"] = to_double(c, "dropout_hidden1");
    tc.dropout["hidden2"] = to_double(c, "dropout_hidden2");
    tc.seed = to_size(c, "seed");
    return tc;
}

// ---------------------------------------------------------------------------
// prepare

int cmd_prepare(const std::string& train_path, const std::string& valid_path,
                const std::string& test_path, const std::string& exclude_path,
                const std::vector<std::size_t>& resplit, std::uint64_t seed,
                const std::string& out) {
    auto raw_train = kge::load_triples(resolve_input(train_path));
    auto raw_valid = kge::load_triples(resolve_input(valid_path));
    auto raw_test = kge::load_triples(resolve_input(test_path));

    if (!exclude_path.empty()) {
        std::ifstream in(resolve_input(exclude_path));
        if (!in)
            throw UsageError("cannot open exclusion list: " + exclude_path);
        std::unordered_set<std::string> excluded;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) excluded.insert(line);
        }
        auto drop = [&](std::vector<kge::RawTriple>& raw) {
            std::erase_if(raw, [&](const kge::RawTriple& rt) {
                return excluded.count(rt[1]) != 0;
            });
        };
        drop(raw_train);
        drop(raw_valid);
        drop(raw_test);
    }

    kge::TripleStore st = kge::build_store(raw_train, raw_valid, raw_test);
    if (!resplit.empty()) {
        kge::Rng rng(seed);
        st = kge::resplit_random(st, resplit[0], resplit[1], rng);
    }
    kge::save_store(out, st);
    std::cout << "entities: " << st.n_entities()
              << ", relations: " << st.n_relations() << "\n"
              << "train: " << st.train.size() << ", valid: " << st.valid.size()
              << ", test: " << st.test.size() << "\n";
    if (st.duplicates_dropped)
        std::cout << "duplicates dropped: " << st.duplicates_dropped << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const std::string& data, const std::string& model,
              const std::map<std::string, std::string>& cfg_map,
              const std::string& out) {
    kge::ModelKind kind = kge::model_from_name(model);
    kge::TrainConfig tc = to_train_config(cfg_map);
    tc.validate();
    std::size_t d_e = to_size(cfg_map, "d_e");
    std::size_t d_r = to_size(cfg_map, "d_r");
    std::size_t l_f = to_size(cfg_map, "l_f");
    std::size_t n_f = to_size(cfg_map, "n_f");
    double curvature = to_double(cfg_map, "curvature");
    std::size_t eval_every = to_size(cfg_map, "eval_every");

    kge::TripleStore st = kge::load_store(data);
    if (tc.regime == kge::Regime::OneVsAll && !st.reciprocal)
        st = kge::add_reciprocals(std::move(st));
    kge::FilterIndex filter = kge::build_filter_index(st);

    kge::Rng rng(tc.seed);
    kge::ModelParams p =
        kge::init_params(kind, st.n_entities(), st.n_relations(), d_e, d_r,
                         rng, l_f, n_f, curvature);
    kge::OptimizerState opt;

    bool can_eval = false;
    for (const kge::Triple& t : st.valid)
        if (t.r < st.n_base_relations()) can_eval = true;

    double best_mrr = -1.0;
    std::string best_path = out + ".best";
    try {
        for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
            double loss = kge::train_epoch(p, st, tc, opt, rng);
            nlohmann::json line = {
                {"epoch", epoch}, {"loss", loss}, {"lr", opt.current_lr}};
            if (eval_every > 0 && can_eval &&
                (epoch % eval_every == 0 || epoch == tc.epochs)) {
                auto rep = kge::evaluate_ranking(p, st, filter, st.valid);
                line["valid_mrr"] = rep.overall.mrr;
                line["valid_hits10"] = rep.overall.hits10;
                if (rep.overall.mrr > best_mrr) {
                    best_mrr = rep.overall.mrr;
                    kge::save_checkpoint(best_path, p);
                    line["best"] = true;
                }
            }
            std::cout << line.dump() << "\n";
        }
    } catch (const std::runtime_error& e) {
        std::cerr << "error: training aborted: " << e.what() << "\n";
        return kExitNumerical;
    }
    kge::save_checkpoint(out, p);
    if (best_mrr < 0.0) kge::save_checkpoint(best_path, p);
    return 0;
}

// ---------------------------------------------------------------------------
// eval

kge::TripleStore load_store_for_checkpoint(const std::string& data,
                                           const kge::ModelParams& p) {
    kge::TripleStore st = kge::load_store(data);
    if (p.n_e != st.n_entities())
        throw IncompatibleError(
            "entity count mismatch: checkpoint has " + std::to_string(p.n_e) +
            ", store has " + std::to_string(st.n_entities()));
    if (p.n_r == 2 * st.n_relations() && !st.reciprocal)
        st = kge::add_reciprocals(std::move(st));
    if (p.n_r != st.n_relations())
        throw IncompatibleError(
            "relation count mismatch: checkpoint has " + std::to_string(p.n_r) +
            ", store has " + std::to_string(st.n_relations()));
    return st;
}

int cmd_eval(const std::string& data, const std::string& ckpt,
             const std::string& split, bool classify_flag,
             const std::string& out, std::size_t threads) {
    kge::ModelParams p = kge::load_checkpoint(ckpt);
    kge::TripleStore st = load_store_for_checkpoint(data, p);
    const std::vector<kge::Triple>& triples =
        split == "valid" ? st.valid : st.test;
    if (triples.empty())
        throw IncompatibleError("evaluation split '" + split + "' is empty");
    kge::FilterIndex filter = kge::build_filter_index(st);

    auto rep = kge::evaluate_ranking(p, st, filter, triples, false, threads);
    nlohmann::json j = kge::ranking_report_to_json(rep);
    {
        std::ofstream jf(out);
        if (!jf) throw UsageError("cannot write report: " + out);
        jf << j.dump(2) << "\n";
    }
    std::filesystem::path csv_path(out);
    csv_path.replace_extension(".csv");
    {
        std::ofstream cf(csv_path);
        cf << kge::ranking_report_to_csv(rep);
    }
    if (classify_flag) {
        auto crep = kge::classify(p, st, filter);
        std::filesystem::path cls_path(out);
        cls_path.replace_extension(".classification.json");
        std::ofstream kf(cls_path);
        kf << kge::classification_report_to_json(crep).dump(2) << "\n";
    }
    std::cout << "mr: " << rep.overall.mr << ", mrr: " << rep.overall.mrr
              << ", hits@1: " << rep.overall.hits1
              << ", hits@3: " << rep.overall.hits3
              << ", hits@10: " << rep.overall.hits10 << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// analyze

int cmd_analyze(const std::string& data, const std::string& ckpt,
                const std::string& metrics_arg, const std::string& out_dir,
                const std::string& subject, const std::string& relation) {
    std::vector<std::string> metrics;
    for (std::size_t pos = 0; pos < metrics_arg.size();) {
        std::size_t comma = metrics_arg.find(',', pos);
        if (comma == std::string::npos) comma = metrics_arg.size();
        if (comma > pos) metrics.push_back(metrics_arg.substr(pos, comma - pos));
        pos = comma + 1;
    }
    const std::vector<std::string> valid = {"khs",   "paths",    "symmetry",
                                            "norms", "spectrum", "project"};
    for (const auto& m : metrics)
        if (std::find(valid.begin(), valid.end(), m) == valid.end())
            throw UsageError(
                "unknown metric '" + m +
                "'; valid metrics: khs, paths, symmetry, norms, spectrum, "
                "project");
    if (metrics.empty()) throw UsageError("no metrics requested");

    kge::TripleStore st = kge::load_store(data);
    std::filesystem::create_directories(out_dir);
    auto out_path = [&](const std::string& name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    std::optional<kge::ModelParams> params;
    auto need_ckpt = [&](const std::string& metric) -> kge::ModelParams& {
        if (!params) {
            if (ckpt.empty())
                throw UsageError("metric '" + metric + "' requires --ckpt");
            params = kge::load_checkpoint(ckpt);
            if (params->n_e != st.n_entities())
                throw IncompatibleError(
                    "entity count mismatch: checkpoint has " +
                    std::to_string(params->n_e) + ", store has " +
                    std::to_string(st.n_entities()));
        }
        return *params;
    };
    // relation names indexed like checkpoint relation rows
    auto rel_names = [&](const kge::ModelParams& p) {
        std::vector<std::string> names = st.relation_names;
        if (p.n_r == 2 * names.size())
            for (std::size_t r = 0, n = names.size(); r < n; ++r)
                names.push_back(names[r] + "_reverse");
        if (p.n_r != names.size())
            throw IncompatibleError(
                "relation count mismatch: checkpoint has " +
                std::to_string(p.n_r) + ", store has " +
                std::to_string(st.relation_names.size()));
        return names;
    };

    auto graphs = kge::relation_graphs(st);
    for (const auto& metric : metrics) {
        if (metric == "khs") {
            std::ofstream f(out_path("khs.csv"));
            f << "relation,khs\n";
            for (const auto& [rel, g] : graphs)
                f << rel << "," << kge::krackhardt_score(g) << "\n";
        } else if (metric == "paths") {
            std::ofstream f(out_path("paths.csv"));
            f << "relation,max_path,avg_path\n";
            for (const auto& [rel, g] : graphs) {
                auto [mx, avg] = kge::path_stats(g);
                f << rel << "," << mx << "," << avg << "\n";
            }
        } else if (metric == "symmetry") {
            kge::ModelParams& p = need_ckpt(metric);
            if (p.kind != kge::ModelKind::TuckER)
                throw UsageError(
                    "symmetry needs a model with full relation matrices "
                    "(tucker); use spectrum for diagonal models");
            auto names = rel_names(p);
            std::ofstream f(out_path("symmetry.csv"));
            f << "relation,symmetry\n";
            for (std::uint32_t r = 0; r < p.n_r; ++r) {
                kge::Mat m = kge::mode3_mix(p.core, p.relation_row(r));
                auto s = kge::symmetry_score(m);
                f << names[r] << ",";
                if (s)
                    f << *s << "\n";
                else
                    f << "undefined\n";
            }
        } else if (metric == "norms") {
            kge::ModelParams& p = need_ckpt(metric);
            std::ofstream f(out_path("norms.csv"));
            f << "relation,norm\n";
            for (const auto& [rel, v] : kge::vector_norms(p, rel_names(p)))
                f << rel << "," << v << "\n";
        } else if (metric == "spectrum") {
            kge::ModelParams& p = need_ckpt(metric);
            nlohmann::json j = nlohmann::json::object();
            for (const auto& [rel, s] :
                 kge::spectrum_diagonal(p, rel_names(p)))
                j[rel] = {{"magnitudes", s.magnitudes},
                          {"degenerate", s.degenerate}};
            std::ofstream f(out_path("spectrum.json"));
            f << j.dump(2) << "\n";
        } else if (metric == "project") {
            kge::ModelParams& p = need_ckpt(metric);
            if (subject.empty() || relation.empty())
                throw UsageError(
                    "project requires --subject and --relation");
            auto se = st.entity_ids.find(subject);
            if (se == st.entity_ids.end())
                throw UsageError("unknown entity: " + subject);
            if (!st.relation_ids.count(relation))
                throw UsageError("unknown relation: " + relation);
            std::uint32_t rid = st.relation_ids.at(relation);
            kge::Vec subj(p.entity_row(se->second).begin(),
                          p.entity_row(se->second).end());
            if (p.kind == kge::ModelKind::TransE)
                for (std::size_t i = 0; i < subj.size(); ++i)
                    subj[i] += p.relation_row(rid)[i];
            std::vector<kge::Vec> objects;
            objects.reserve(p.n_e);
            for (std::uint32_t e = 0; e < p.n_e; ++e)
                objects.emplace_back(p.entity_row(e).begin(),
                                     p.entity_row(e).end());
            auto pts = kge::project_2d(subj, objects);
            std::ofstream f(out_path("project.csv"));
            f << "entity,x,y\n";
            for (std::uint32_t e = 0; e < p.n_e; ++e)
                f << st.entity_names[e] << "," << pts[e].first << ","
                  << pts[e].second << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"knowledge graph embedding toolkit"};
    app.require_subcommand(1);

    // prepare
    auto* prep = app.add_subcommand("prepare", "encode TSV splits into a store");
    std::string train_path, valid_path, test_path, exclude_path, prep_out;
    std::vector<std::size_t> resplit;
    std::uint64_t prep_seed = 1;
    prep->add_option("--train", train_path)->required();
    prep->add_option("--valid", valid_path)->required();
    prep->add_option("--test", test_path)->required();
    prep->add_option("--exclude-relations", exclude_path);
    prep->add_option("--resplit", resplit)->expected(2);
    prep->add_option("--seed", prep_seed);
    prep->add_option("--out", prep_out)->required();

    // train
    auto* train = app.add_subcommand("train", "train a model on a store");
    std::string train_data, model, config_path, train_out;
    std::map<std::string, std::string> overrides;
    train->add_option("--data", train_data)->required();
    train->add_option("--model", model)->required();
    train->add_option("--config", config_path);
    train->add_option("--out", train_out)->required();
    for (const auto& key : config_keys())
        train->add_option("--" + key, overrides[key]);

    // eval
    auto* eval = app.add_subcommand("eval", "rank a checkpoint on a split");
    std::string eval_data, eval_ckpt, eval_split = "test", eval_out;
    std::size_t threads = 1;
    bool classify_flag = false;
    eval->add_option("--data", eval_data)->required();
    eval->add_option("--ckpt", eval_ckpt)->required();
    eval->add_option("--split", eval_split)
        ->check(CLI::IsMember({"test", "valid"}));
    eval->add_flag("--classify", classify_flag);
    eval->add_option("--threads", threads);
    eval->add_option("--out", eval_out)->required();

    // analyze
    auto* analyze = app.add_subcommand("analyze", "graph and embedding stats");
    std::string an_data, an_ckpt, an_metrics, an_out, an_subject, an_relation;
    analyze->add_option("--data", an_data)->required();
    analyze->add_option("--ckpt", an_ckpt);
    analyze->add_option("--metrics", an_metrics)->required();
    analyze->add_option("--out", an_out)->required();
    analyze->add_option("--subject", an_subject);
    analyze->add_option("--relation", an_relation);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (prep->parsed())
            return cmd_prepare(train_path, valid_path, test_path, exclude_path,
                               resplit, prep_seed, prep_out);
        if (train->parsed()) {
            std::map<std::string, std::string> cfg =
                model_defaults(kge::model_from_name(model));
            if (!config_path.empty())
                apply_config_file(cfg, resolve_input(config_path));
            for (const auto& key : config_keys()) {
                auto* opt = train->get_option("--" + key);
                if (opt->count() > 0) cfg[key] = overrides[key];
            }
            return cmd_train(train_data, model, cfg, train_out);
        }
        if (eval->parsed())
            return cmd_eval(eval_data, eval_ckpt, eval_split, classify_flag,
                            eval_out, threads);
        if (analyze->parsed())
            return cmd_analyze(an_data, an_ckpt, an_metrics, an_out,
                               an_subject, an_relation);
    } catch (const IncompatibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIncompatible;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
