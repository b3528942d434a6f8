#include "tcsim/app/cli.hpp"

#include <CLI11.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tcsim/app/pipeline.hpp"
#include "tcsim/app/plot.hpp"
#include "tcsim/app/workspace.hpp"
#include "tcsim/error.hpp"
#include "tcsim/io.hpp"

namespace tcsim::app {

namespace {

struct Options {
    std::string workspace = "tcsim-workspace";
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;

    std::string corpus;
    std::string format;

    std::string backend = "word2vec";
    std::string pretrained;
    std::string input;

    std::string algorithm;
    std::optional<std::size_t> k;
    bool sweep = false;
    std::string gt;
    std::vector<std::string> members;

    std::string technique;
    std::optional<double> threshold;
    std::string clustering;

    std::string artifact;
    std::string sweep_artifact;
    std::string plot_out;
};

Settings load_run_settings(const Options& o) {
    Settings s = o.config.empty() ? Settings{} : load_settings(o.config);
    if (o.seed) s.seed = *o.seed;
    if (o.threads) {
        if (*o.threads == 0) throw ConfigError("--threads must be at least 1");
        s.threads = *o.threads;
    }
    return s;
}

std::optional<std::filesystem::path> optional_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
}

std::string print(const Json& j) { return j.dump(2) + "\n"; }

int cmd_ingest(const Options& o, Pipeline& p, std::ostream& out) {
    std::optional<CorpusFormat> format;
    if (!o.format.empty()) {
        format = parse_corpus_format(o.format);
        if (!format) throw ConfigError("unknown corpus format '" + o.format + "' (expected jsonl or csv)");
    }
    auto s = p.ingest(o.corpus, format);
    Json j;
    j["cases"] = s.cases;
    j["steps"] = s.steps;
    j["vocabulary"] = s.vocabulary;
    j["empty_steps"] = s.empty_steps;
    j["artifact_sha256"] = s.sha256;
    j["cached"] = s.cached;
    out << print(j);
    return 0;
}

int cmd_embed(const Options& o, Pipeline& p, std::ostream& out) {
    auto s = p.embed(parse_backend(o.backend), optional_path(o.pretrained), optional_path(o.input));
    Json j;
    j["backend"] = s.backend;
    j["dim"] = s.dim;
    j["entries"] = s.entries;
    j["artifact_sha256"] = s.sha256;
    j["cached"] = s.cached;
    out << print(j);
    return 0;
}

int cmd_cluster(const Options& o, Pipeline& p, std::ostream& out) {
    ClusterRequest r;
    r.backend = parse_backend(o.backend);
    r.algorithm = parse_algorithm(o.algorithm);
    r.k = o.k;
    r.sweep = o.sweep;
    r.gt = optional_path(o.gt);
    r.members = o.members;
    auto res = p.cluster(r);
    Json j;
    j["artifact"] = res.artifact;
    j["items"] = res.clustering.size();
    j["clusters"] = res.clustering.k();
    j["cached"] = res.cached;
    if (res.sweep) {
        j["best_k"] = res.sweep->best_k;
        j["best_f"] = res.sweep->best_f;
        j["evaluated"] = res.sweep->evaluated.size();
    } else if (r.gt) {
        auto c = confusion(res.clustering, load_ground_truth(*r.gt));
        j["f_score"] = f_score(c);
    }
    out << print(j);
    return 0;
}

int cmd_similar(const Options& o, Pipeline& p, std::ostream& out) {
    CaseRequest r;
    r.technique = parse_technique(o.technique);
    r.threshold = o.threshold;
    r.sweep = o.sweep;
    r.gt = optional_path(o.gt);
    if (!o.clustering.empty()) r.clustering = o.clustering;
    auto res = p.similar_cases(r);
    Json j;
    j["artifact"] = res.artifact;
    j["technique"] = technique_name(res.report.technique);
    j["threshold"] = res.report.threshold;
    j["pairs"] = res.report.pairs.size();
    j["groups"] = res.report.stats.group_count;
    j["cases_with_match_fraction"] = res.report.stats.cases_with_match_fraction;
    if (res.sweep) {
        j["best_threshold"] = res.sweep->best_threshold;
        j["best_f"] = res.sweep->best_f;
    } else if (r.gt) {
        std::set<std::pair<std::string, std::string>> flagged;
        for (const auto& pr : res.report.pairs)
            flagged.emplace(res.report.case_ids[pr.a], res.report.case_ids[pr.b]);
        auto gt = load_ground_truth(*r.gt);
        auto c = confusion(
            [&](std::size_t i, std::size_t k) {
                const auto &a = gt.items()[i], &b = gt.items()[k];
                return flagged.count({a, b}) > 0 || flagged.count({b, a}) > 0;
            },
            gt);
        j["f_score"] = f_score(c);
    }
    out << print(j);
    return 0;
}

/// Flagged pairs of a similarity report JSON, checked against `gt`.
PairwiseConfusion evaluate_report(std::string_view text, const GroundTruth& gt) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw ParseError(std::string("similarity report: ") + e.what());
    }
    if (!j.contains("pairs") || !j["pairs"].is_array()) throw FormatError("similarity report has no 'pairs' array");
    std::set<std::pair<std::string, std::string>> flagged;
    for (const auto& pr : j["pairs"]) {
        auto a = pr.at("a").get<std::string>(), b = pr.at("b").get<std::string>();
        flagged.emplace(a, b);
        flagged.emplace(b, a);
    }
    return confusion([&](std::size_t i, std::size_t k) { return flagged.count({gt.items()[i], gt.items()[k]}) > 0; },
                     gt);
}

int cmd_evaluate(const Options& o, Pipeline& p, Workspace& ws, std::ostream& out) {
    auto gt = load_ground_truth(o.gt);
    PairwiseConfusion c;
    if (o.artifact.starts_with("clusters/") && ws.find(o.artifact)) {
        c = confusion(p.clustering(o.artifact), gt);
    } else if (o.artifact.starts_with("cases/") && ws.find(o.artifact)) {
        c = evaluate_report(ws.load(o.artifact), gt);
    } else if (std::filesystem::exists(o.artifact)) {
        auto text = io::read_file(o.artifact);
        if (std::filesystem::path(o.artifact).extension() == ".json")
            c = evaluate_report(text, gt);
        else
            c = confusion(parse_clustering(text), gt);
    } else {
        throw WorkspaceError("no artifact or file named '" + o.artifact + "'");
    }
    out << evaluation_json(c);
    return 0;
}

int cmd_plot(const Options& o, Workspace& ws, std::ostream& out) {
    std::string text;
    std::string stem;
    if (ws.find(o.sweep_artifact)) {
        text = ws.load(o.sweep_artifact);
        stem = o.sweep_artifact;
        for (auto& ch : stem)
            if (ch == '/') ch = '_';
    } else if (std::filesystem::exists(o.sweep_artifact)) {
        text = io::read_file(o.sweep_artifact);
        stem = std::filesystem::path(o.sweep_artifact).stem().string();
    } else {
        throw WorkspaceError("no sweep artifact or file named '" + o.sweep_artifact + "'");
    }
    auto curve = parse_curve(text);
    std::filesystem::path prefix = o.plot_out.empty() ? ws.path("plots/" + stem) : std::filesystem::path(o.plot_out);
    if (!prefix.parent_path().empty()) std::filesystem::create_directories(prefix.parent_path());
    auto csv_path = prefix;
    csv_path += ".csv";
    auto svg_path = prefix;
    svg_path += ".svg";
    io::write_file_atomic(csv_path, curve_csv(curve));
    io::write_file_atomic(svg_path, curve_svg(curve, "F-score by " + curve.x_label));
    Json j;
    j["csv"] = csv_path.string();
    j["svg"] = svg_path.string();
    j["points"] = curve.x.size();
    j["best_" + curve.x_label] = curve.x[curve.best];
    j["best_f"] = curve.f[curve.best];
    out << print(j);
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Find similar test steps and test cases in natural-language test suites"};
    app.name("tcsim");
    app.require_subcommand(1);
    app.add_option("--workspace,-w", o.workspace, "Workspace directory")->capture_default_str();
    app.add_option("--config,-c", o.config, "Settings file (key = value)");
    app.add_option("--seed", o.seed, "Random seed (overrides the config)");
    app.add_option("--threads", o.threads, "Worker threads (overrides the config)");

    auto* ingest = app.add_subcommand("ingest", "Load and preprocess a corpus");
    ingest->add_option("corpus,--corpus", o.corpus, "Corpus file (.jsonl or .csv)")->required();
    ingest->add_option("--format", o.format, "jsonl or csv (default: from the extension)");

    auto* embed = app.add_subcommand("embed", "Build or import an embedding table");
    embed->add_option("--backend,-b", o.backend, "tfidf, word2vec or external:<tag>")->required();
    embed->add_option("--pretrained", o.pretrained, "word2vec binary file used as initialization");
    embed->add_option("--input", o.input, "EMBX file for an external backend");

    auto* cluster = app.add_subcommand("cluster-steps", "Cluster test steps");
    cluster->add_option("--backend,-b", o.backend, "tfidf, word2vec or external:<tag>")->capture_default_str();
    cluster->add_option("--algorithm,-a", o.algorithm, "hac, kmeans, ensemble, baseline-exact or baseline-wmd0")
        ->required();
    cluster->add_option("--k,-k", o.k, "Number of clusters");
    cluster->add_flag("--sweep", o.sweep, "Sweep k and keep the best F-score (needs --gt)");
    cluster->add_option("--gt", o.gt, "Step ground truth CSV (item_id,label)");
    cluster->add_option("--members", o.members, "Clustering artifacts combined by the ensemble")->delimiter(',');

    auto* similar = app.add_subcommand("similar-cases", "Score test-case similarity and group similar cases");
    similar->add_option("--technique,-t", o.technique,
                        "overlap, jaccard, cosine, combined, baseline-same-steps or baseline-same-name")
        ->required();
    similar->add_option("--threshold", o.threshold, "Similarity threshold in (0, 1]");
    similar->add_flag("--sweep", o.sweep, "Sweep the threshold and keep the best F-score (needs --gt)");
    similar->add_option("--gt", o.gt, "Case ground truth CSV (item_id,label)");
    similar->add_option("--clustering", o.clustering, "Step clustering artifact (default: the latest)");

    auto* evaluate = app.add_subcommand("evaluate", "Pairwise confusion and F-score of an artifact");
    evaluate->add_option("--artifact", o.artifact, "Clustering or report artifact name, or a file")->required();
    evaluate->add_option("--gt", o.gt, "Ground truth CSV (item_id,label)")->required();

    auto* plot = app.add_subcommand("plot", "Write a sweep curve as CSV and SVG");
    plot->add_option("--sweep", o.sweep_artifact, "Sweep artifact name or CSV file")->required();
    plot->add_option("--out", o.plot_out, "Output path prefix (default: <workspace>/plots/<name>)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error[usage]: " << e.what() << "\n";
        return usage_exit_code;
    }

    try {
        auto settings = load_run_settings(o);
        Workspace ws(o.workspace);
        Pipeline pipeline(ws, settings, err);
        if (ingest->parsed()) return cmd_ingest(o, pipeline, out);
        if (embed->parsed()) return cmd_embed(o, pipeline, out);
        if (cluster->parsed()) return cmd_cluster(o, pipeline, out);
        if (similar->parsed()) return cmd_similar(o, pipeline, out);
        if (evaluate->parsed()) return cmd_evaluate(o, pipeline, ws, out);
        if (plot->parsed()) return cmd_plot(o, ws, out);
    } catch (const Error& e) {
        err << "error[" << error_code_name(e.code()) << "]: " << e.what() << "\n";
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        err << "error[internal]: " << e.what() << "\n";
        return internal_exit_code;
    }
    return usage_exit_code;
}

}  // namespace tcsim::app
