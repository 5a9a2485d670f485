#include "rptrees/serialize.hpp"

#include <fstream>

namespace rpt {

namespace {

json node_to_json(const TreeNode& n) {
    json j;
    j["feature"] = n.feature;
    j["n"] = n.n_samples;
    if (n.is_leaf()) {
        j["value"] = n.value;
    } else {
        j["threshold"] = n.threshold;
        j["left"] = n.left;
        j["right"] = n.right;
        j["wid"] = n.weighted_impurity_decrease;
    }
    return j;
}

TreeNode node_from_json(const json& j) {
    TreeNode n;
    n.feature = j.at("feature").get<index_t>();
    n.n_samples = j.value("n", index_t{0});
    if (n.is_leaf()) {
        n.value = j.at("value").get<std::vector<double>>();
    } else {
        n.threshold = j.at("threshold").get<double>();
        n.left = j.at("left").get<index_t>();
        n.right = j.at("right").get<index_t>();
        n.weighted_impurity_decrease = j.value("wid", 0.0);
    }
    return n;
}

const char* impurity_name(ImpurityKind k) {
    switch (k) {
        case ImpurityKind::Gini: return "gini";
        case ImpurityKind::Entropy: return "entropy";
        case ImpurityKind::Variance: return "variance";
    }
    return "variance";
}

ImpurityKind impurity_from_name(const std::string& s) {
    if (s == "gini") return ImpurityKind::Gini;
    if (s == "entropy") return ImpurityKind::Entropy;
    if (s == "variance") return ImpurityKind::Variance;
    throw Error("unknown impurity '" + s + "'");
}

const char* loss_name(LossKind k) {
    switch (k) {
        case LossKind::Square: return "square";
        case LossKind::Absolute: return "absolute";
        case LossKind::Logistic: return "logistic";
        case LossKind::L2Multi: return "l2-multi";
        case LossKind::L1Multi: return "l1-multi";
        case LossKind::LogisticMulti: return "logistic-multi";
    }
    return "square";
}

LossKind loss_from_name(const std::string& s) {
    if (s == "square") return LossKind::Square;
    if (s == "absolute") return LossKind::Absolute;
    if (s == "logistic") return LossKind::Logistic;
    if (s == "l2-multi") return LossKind::L2Multi;
    if (s == "l1-multi") return LossKind::L1Multi;
    if (s == "logistic-multi") return LossKind::LogisticMulti;
    throw Error("unknown loss '" + s + "'");
}

json projection_kind_to_json(const ProjectionKind& k) {
    json j;
    switch (k.variant) {
        case ProjectionVariant::Gaussian: j["variant"] = "gaussian"; break;
        case ProjectionVariant::Rademacher:
            j["variant"] = "rademacher";
            j["s"] = k.s;
            break;
        case ProjectionVariant::OutputSubsample: j["variant"] = "subsample"; break;
    }
    return j;
}

ProjectionKind projection_kind_from_json(const json& j) {
    const std::string v = j.at("variant").get<std::string>();
    if (v == "gaussian") return ProjectionKind::gaussian();
    if (v == "rademacher") return ProjectionKind::rademacher(j.value("s", 1.0));
    if (v == "subsample") return ProjectionKind::subsample();
    throw Error("unknown projection variant '" + v + "'");
}

const char* task_name(Task t) {
    switch (t) {
        case Task::Regression: return "regression";
        case Task::BinaryClassification: return "binary";
        case Task::Multilabel: return "multilabel";
    }
    return "regression";
}

Task task_from_name(const std::string& s) {
    if (s == "regression") return Task::Regression;
    if (s == "binary") return Task::BinaryClassification;
    if (s == "multilabel") return Task::Multilabel;
    throw Error("unknown task '" + s + "'");
}

void check_format(const json& j, const std::string& expected) {
    if (j.value("format", "") != expected)
        throw Error("expected container format '" + expected + "'");
    if (j.value("version", 0) != 1) throw Error("unsupported container version");
}

}  // namespace

json to_json(const Tree& tree) {
    json j;
    j["format"] = "rptrees.tree";
    j["version"] = 1;
    j["d"] = tree.d;
    j["p"] = tree.p;
    json nodes = json::array();
    for (const auto& n : tree.nodes) nodes.push_back(node_to_json(n));
    j["nodes"] = std::move(nodes);
    return j;
}

Tree tree_from_json(const json& j) {
    check_format(j, "rptrees.tree");
    Tree t;
    t.d = j.at("d").get<index_t>();
    t.p = j.at("p").get<index_t>();
    for (const auto& nj : j.at("nodes")) t.nodes.push_back(node_from_json(nj));
    return t;
}

json to_json(const GrowthParams& p) {
    json j;
    j["max_depth"] = p.max_depth;
    j["min_samples_split"] = p.min_samples_split;
    j["max_leaves"] = p.max_leaves;
    j["features_per_split"] = p.features_per_split;
    j["splitter"] = p.splitter == SplitterKind::Exhaustive ? "exhaustive" : "random-threshold";
    j["impurity"] = impurity_name(p.impurity);
    j["seed"] = p.seed;
    return j;
}

GrowthParams growth_params_from_json(const json& j) {
    GrowthParams p;
    p.max_depth = j.value("max_depth", index_t{-1});
    p.min_samples_split = j.value("min_samples_split", index_t{2});
    p.max_leaves = j.value("max_leaves", index_t{-1});
    p.features_per_split = j.value("features_per_split", index_t{-1});
    const std::string splitter = j.value("splitter", "exhaustive");
    if (splitter == "exhaustive")
        p.splitter = SplitterKind::Exhaustive;
    else if (splitter == "random-threshold")
        p.splitter = SplitterKind::RandomThreshold;
    else
        throw Error("unknown splitter '" + splitter + "'");
    p.impurity = impurity_from_name(j.value("impurity", "variance"));
    p.seed = j.value("seed", std::uint64_t{0});
    return p;
}

json to_json(const ForestParams& p) {
    json j;
    j["n_trees"] = p.n_trees;
    j["tree"] = to_json(p.tree_params);
    j["bootstrap"] = p.bootstrap;
    j["seed"] = p.seed;
    if (p.projection) {
        j["projection"] = projection_kind_to_json(p.projection->kind);
        j["projection"]["q"] = p.projection->q;
        j["projection"]["shared"] = p.projection->shared;
    }
    return j;
}

ForestParams forest_params_from_json(const json& j) {
    ForestParams p;
    p.n_trees = j.value("n_trees", index_t{100});
    if (j.contains("tree")) p.tree_params = growth_params_from_json(j.at("tree"));
    p.bootstrap = j.value("bootstrap", false);
    p.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("projection")) {
        ForestProjection proj;
        proj.kind = projection_kind_from_json(j.at("projection"));
        proj.q = j.at("projection").value("q", index_t{1});
        proj.shared = j.at("projection").value("shared", false);
        p.projection = proj;
    }
    return p;
}

json to_json(const Forest& forest) {
    json j;
    j["format"] = "rptrees.forest";
    j["version"] = 1;
    j["task"] = task_name(forest.task);
    j["params"] = to_json(forest.params);
    json trees = json::array();
    for (const auto& t : forest.trees) trees.push_back(to_json(t));
    j["trees"] = std::move(trees);
    return j;
}

Forest forest_from_json(const json& j) {
    check_format(j, "rptrees.forest");
    Forest f;
    f.task = task_from_name(j.value("task", "regression"));
    f.params = forest_params_from_json(j.at("params"));
    for (const auto& tj : j.at("trees")) f.trees.push_back(tree_from_json(tj));
    return f;
}

json to_json(const BoostParams& p) {
    json j;
    j["n_stages"] = p.n_stages;
    j["mu"] = p.mu;
    j["loss"] = loss_name(p.loss.kind);
    j["weak"] = to_json(p.weak);
    j["projection"] = projection_kind_to_json(p.projection);
    j["q"] = p.q;
    j["seed"] = p.seed;
    return j;
}

BoostParams boost_params_from_json(const json& j) {
    BoostParams p;
    p.n_stages = j.value("n_stages", index_t{100});
    p.mu = j.value("mu", 0.1);
    p.loss.kind = loss_from_name(j.value("loss", "square"));
    if (j.contains("weak")) p.weak = growth_params_from_json(j.at("weak"));
    if (j.contains("projection")) p.projection = projection_kind_from_json(j.at("projection"));
    p.q = j.value("q", index_t{1});
    p.seed = j.value("seed", std::uint64_t{0});
    return p;
}

json to_json(const GBModel& model) {
    json j;
    j["format"] = "rptrees.gb";
    j["version"] = 1;
    j["rho0"] = model.rho0;
    j["mu"] = model.mu;
    j["loss"] = loss_name(model.loss.kind);
    j["d"] = model.d;
    switch (model.mode) {
        case GBMode::SingleTarget: j["mode"] = "single-target"; break;
        case GBMode::MultiOutput: j["mode"] = "mo"; break;
        case GBMode::Rpo: j["mode"] = "rpo"; break;
        case GBMode::RelabelRpo: j["mode"] = "relabel-rpo"; break;
    }
    json stages = json::array();
    for (const auto& s : model.stages) {
        json sj;
        sj["tree"] = to_json(s.tree);
        sj["rho"] = s.rho;
        if (!s.subsampled.empty()) sj["subsampled"] = s.subsampled;
        if (!s.phi.empty()) {
            sj["phi"] = s.phi;
            sj["phi_q"] = s.phi_q;
        }
        stages.push_back(std::move(sj));
    }
    j["stages"] = std::move(stages);
    return j;
}

GBModel gb_model_from_json(const json& j) {
    check_format(j, "rptrees.gb");
    GBModel m;
    m.rho0 = j.at("rho0").get<std::vector<double>>();
    m.mu = j.at("mu").get<double>();
    m.loss.kind = loss_from_name(j.at("loss").get<std::string>());
    m.d = j.at("d").get<index_t>();
    m.loss.d = m.d;
    const std::string mode = j.value("mode", "single-target");
    if (mode == "single-target")
        m.mode = GBMode::SingleTarget;
    else if (mode == "mo")
        m.mode = GBMode::MultiOutput;
    else if (mode == "rpo")
        m.mode = GBMode::Rpo;
    else if (mode == "relabel-rpo")
        m.mode = GBMode::RelabelRpo;
    else
        throw Error("unknown gb mode '" + mode + "'");
    for (const auto& sj : j.at("stages")) {
        GBStage s;
        s.tree = tree_from_json(sj.at("tree"));
        s.rho = sj.at("rho").get<std::vector<double>>();
        if (sj.contains("subsampled"))
            s.subsampled = sj.at("subsampled").get<std::vector<index_t>>();
        if (sj.contains("phi")) {
            s.phi = sj.at("phi").get<std::vector<double>>();
            s.phi_q = sj.value("phi_q", index_t{1});
        }
        m.stages.push_back(std::move(s));
    }
    return m;
}

json to_json(const CompressedForest& model) {
    json j;
    j["format"] = "rptrees.compressed";
    j["version"] = 1;
    j["intercept"] = model.intercept;
    j["task"] = task_name(model.task);
    j["p"] = model.p;
    json trees = json::array();
    for (const auto& tree : model.trees) {
        json nodes = json::array();
        for (const auto& n : tree) {
            json nj;
            nj["feature"] = n.feature;
            nj["weight"] = n.weight;
            if (n.feature >= 0) {
                nj["threshold"] = n.threshold;
                nj["left"] = n.left;
                nj["right"] = n.right;
            }
            nodes.push_back(std::move(nj));
        }
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j;
}

CompressedForest compressed_from_json(const json& j) {
    check_format(j, "rptrees.compressed");
    CompressedForest m;
    m.intercept = j.at("intercept").get<double>();
    m.task = task_from_name(j.value("task", "regression"));
    m.p = j.value("p", index_t{0});
    for (const auto& tj : j.at("trees")) {
        std::vector<CompressedNode> nodes;
        for (const auto& nj : tj) {
            CompressedNode n;
            n.feature = nj.at("feature").get<index_t>();
            n.weight = nj.at("weight").get<double>();
            if (n.feature >= 0) {
                n.threshold = nj.at("threshold").get<double>();
                n.left = nj.at("left").get<index_t>();
                n.right = nj.at("right").get<index_t>();
            }
            nodes.push_back(n);
        }
        m.trees.push_back(std::move(nodes));
    }
    return m;
}

void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

ModelKind model_kind(const json& j) {
    const std::string fmt = j.value("format", "");
    if (fmt == "rptrees.tree") return ModelKind::Tree;
    if (fmt == "rptrees.forest") return ModelKind::Forest;
    if (fmt == "rptrees.gb") return ModelKind::GB;
    if (fmt == "rptrees.compressed") return ModelKind::Compressed;
    throw Error("unrecognized model container format '" + fmt + "'");
}

}  // namespace rpt
