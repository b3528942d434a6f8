// Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "tcsim/app/cli.hpp"
#include "tcsim/app/pipeline.hpp"
#include "tcsim/app/workspace.hpp"
#include "tcsim/casesim.hpp"
#include "tcsim/cbow.hpp"
#include "tcsim/clustering.hpp"
#include "tcsim/config.hpp"
#include "tcsim/corpus.hpp"
#include "tcsim/embedding.hpp"
#include "tcsim/eval.hpp"
#include "tcsim/io.hpp"
#include "tcsim/similarity.hpp"
#include "tcsim/transport.hpp"

using namespace tcsim;
namespace fs = std::filesystem;

namespace {

const fs::path source_dir = TCSIM_SOURCE_DIR;
const fs::path fixture_dir = source_dir / "tests" / "data" / "fixture";

/// Collects the first few failed expectations of a criterion.
class Checks {
public:
    bool expect(bool ok, const std::string& what) {
        if (!ok) {
            ++failed_;
            if (failed_ <= 3) notes_ << (failed_ > 1 ? "; " : "") << what;
        }
        return ok;
    }
    [[nodiscard]] bool ok() const { return failed_ == 0; }
    [[nodiscard]] std::string summary() const {
        return notes_.str() + (failed_ > 3 ? " (+" + std::to_string(failed_ - 3) + " more)" : "");
    }

private:
    int failed_ = 0;
    std::ostringstream notes_;
};

std::string str(double v) {
    std::ostringstream o;
    o.precision(17);
    o << v;
    return o.str();
}

class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("tcsim-accept-" + tag + "-" + std::to_string(rd()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;
    [[nodiscard]] const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::vector<std::string> ids_of(std::size_t n, const std::string& prefix = "i") {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
    return ids;
}

WordEmbeddingTable random_words(std::mt19937_64& gen, std::size_t count, std::size_t dim) {
    std::normal_distribution<float> z(0.0f, 1.0f);
    WordEmbeddingTable t(dim);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<float> v(dim);
        for (auto& x : v) x = z(gen);
        t.add("w" + std::to_string(i), v);
    }
    return t;
}

std::vector<std::string> random_bag(std::mt19937_64& gen, std::size_t vocab, std::size_t max_distinct,
                                    std::size_t offset = 0) {
    std::vector<std::size_t> pool(vocab);
    std::iota(pool.begin(), pool.end(), offset);
    std::shuffle(pool.begin(), pool.end(), gen);
    std::size_t distinct = 1 + gen() % max_distinct;
    std::vector<std::string> bag;
    for (std::size_t d = 0; d < distinct; ++d)
        for (std::uint64_t c = 0; c <= gen() % 3; ++c) bag.push_back("w" + std::to_string(pool[d]));
    std::shuffle(bag.begin(), bag.end(), gen);
    return bag;
}

// ---------------------------------------------------------------------------

void running_example(Checks& c) {
    CaseSignature tc1("TC1", 5, {0, 1, 2, 0}), tc2("TC2", 5, {0, 3, 4, 1, 4});
    c.expect(tc1.count_vec() == std::vector<int>{2, 1, 1, 0, 0}, "TC1 signature");
    c.expect(tc2.count_vec() == std::vector<int>{1, 1, 0, 1, 2}, "TC2 signature");
    c.expect(overlap(tc1, tc2) == 0.5, "overlap " + str(overlap(tc1, tc2)));
    c.expect(std::abs(jaccard(tc1, tc2) - 0.4) <= 1e-12, "jaccard " + str(jaccard(tc1, tc2)));
    double cos = cosine_counts(tc1, tc2);
    c.expect(std::abs(cos - 3.0 / std::sqrt(42.0)) <= 1e-9, "cosine " + str(cos));

    // The same signatures reached from clustered steps.
    Clustering steps({"TC1.1", "TC1.2", "TC1.3", "TC1.4", "TC2.1", "TC2.2", "TC2.3", "TC2.4", "TC2.5"},
                     {1, 2, 3, 1, 1, 4, 5, 2, 5});
    auto sigs = signatures({"TC1", "TC2"},
                           {{"TC1.1", "TC1.2", "TC1.3", "TC1.4"}, {"TC2.1", "TC2.2", "TC2.3", "TC2.4", "TC2.5"}},
                           steps);
    c.expect(sigs[0].count_vec() == tc1.count_vec() && sigs[1].count_vec() == tc2.count_vec(),
             "signatures from a step clustering");
}

void wmd_oracle(Checks& c) {
    std::mt19937_64 gen(20240501);
    auto words = random_words(gen, 10, 6);
    for (int trial = 0; trial < 500; ++trial) {
        // Disjoint vocabularies keep the supports at their drawn sizes.
        auto a = nbow(random_bag(gen, 5, 5, 0), words);
        auto b = nbow(random_bag(gen, 5, 5, 5), words);
        std::vector<double> cost;
        for (auto i : a.words)
            for (auto j : b.words) cost.push_back(euclidean(words.vector(i), words.vector(j)));
        double expected = oracle::transport_by_vertices(a.weights, b.weights, cost);
        double got = wmd(a, b, words);
        c.expect(std::abs(got - expected) <= 1e-7,
                 "instance " + std::to_string(trial) + ": " + str(got) + " vs " + str(expected));
    }
}

void wmd_axioms(Checks& c) {
    std::mt19937_64 gen(77);
    auto words = random_words(gen, 20, 5);
    for (int trial = 0; trial < 1000; ++trial) {
        auto xa = random_bag(gen, 20, 6), xb = random_bag(gen, 20, 6), xc = random_bag(gen, 20, 6);
        auto a = nbow(xa, words), b = nbow(xb, words), cc = nbow(xc, words);
        double ab = wmd(a, b, words), ba = wmd(b, a, words);
        c.expect(std::abs(ab - ba) <= 1e-9, "symmetry " + std::to_string(trial));
        c.expect(wmd(a, cc, words) <= ab + wmd(b, cc, words) + 1e-7, "triangle " + std::to_string(trial));
        auto shuffled = xa;
        std::shuffle(shuffled.begin(), shuffled.end(), gen);
        c.expect(std::abs(wmd(a, nbow(shuffled, words), words)) <= 1e-9, "identity " + std::to_string(trial));
    }
}

void hac_oracle(Checks& c) {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (int trial = 0; trial < 50; ++trial) {
        DistanceMatrix dm(ids_of(8));
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = i + 1; j < 8; ++j) dm.set(i, j, u(gen));
        std::vector<std::vector<double>> rows(8, std::vector<double>(8));
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = 0; j < 8; ++j) rows[i][j] = dm(i, j);
        auto got = hac_average_merges(dm);
        auto want = oracle::upgma(rows);
        bool same = got.size() == want.size();
        for (std::size_t s = 0; same && s < got.size(); ++s)
            same = got[s].a == want[s].a && got[s].b == want[s].b && got[s].distance == want[s].distance &&
                   got[s].size == want[s].size;
        c.expect(same, "matrix " + std::to_string(trial));
    }
}

PointSet points_1d(const std::vector<double>& xs) {
    PointSet p;
    p.ids = ids_of(xs.size());
    p.dim = 1;
    p.values = xs;
    return p;
}

void kmeans_properties(Checks& c) {
    std::mt19937_64 gen(12);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 50; ++trial) {
        PointSet p;
        p.ids = ids_of(80);
        p.dim = 4;
        p.values.resize(80 * 4);
        for (auto& v : p.values) v = z(gen);
        std::vector<std::vector<double>> init;
        for (std::size_t k = 0; k < 7; ++k) init.emplace_back(p.point(k).begin(), p.point(k).end());
        KMeansOptions opt;
        opt.tol = 0.0;
        auto r = kmeans(p, init, opt);
        for (std::size_t i = 1; i < r.objective.size(); ++i)
            c.expect(r.objective[i] <= r.objective[i - 1], "objective rose in trial " + std::to_string(trial));
    }
    auto fixed = kmeans(points_1d({1, 4, 9}), {{1}, {4}, {9}});
    c.expect(fixed.iterations == 1 && fixed.converged, "fixed point took " + std::to_string(fixed.iterations));
    auto hand = kmeans(points_1d({0, 0.1, 10, 10.1}), {{0}, {10}});
    c.expect(hand.clustering.labels() == std::vector<int>{0, 0, 1, 1}, "1-D example partition");
}

void f_score_oracle(Checks& c) {
    GroundTruth gt({"a", "b", "c", "d"}, {"x", "x", "y", "y"});
    auto hand = confusion(Clustering({"a", "b", "c", "d"}, {0, 0, 0, 1}), gt);
    c.expect(hand == PairwiseConfusion{1, 2, 2, 1}, "4-item counts");
    c.expect(f_score(hand) == 0.4, "4-item F " + str(f_score(hand)));
    std::mt19937_64 gen(404);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t m = 2 + gen() % 40;
        auto ids = ids_of(m, "s");
        std::vector<int> pred(m), truth(m);
        std::vector<std::string> labels(m);
        std::uint64_t kp = 1 + gen() % 8, kt = 1 + gen() % 8;
        for (std::size_t i = 0; i < m; ++i) {
            pred[i] = static_cast<int>(gen() % kp);
            truth[i] = static_cast<int>(gen() % kt);
            labels[i] = "L" + std::to_string(truth[i]);
        }
        auto got = confusion(Clustering(ids, pred), GroundTruth(ids, labels));
        auto want = oracle::count_pairs(pred, truth);
        c.expect(got.tp == want.tp && got.fp == want.fp && got.tn == want.tn && got.fn == want.fn,
                 "counts in case " + std::to_string(trial));
        c.expect(std::abs(f_score(got) - oracle::f_from_counts(want)) <= 1e-15, "F in case " + std::to_string(trial));
    }
}

void ensemble_properties(Checks& c) {
    std::mt19937_64 gen(55);
    auto ids = ids_of(20);
    auto random_clustering = [&](int max_k) {
        std::vector<int> labels(ids.size());
        for (auto& l : labels) l = static_cast<int>(gen() % static_cast<std::uint64_t>(max_k));
        return Clustering(ids, labels);
    };
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Clustering> in;
        for (int i = 0; i < 5; ++i) in.push_back(random_clustering(2 + trial % 5));
        auto base = ensemble_majority(in, 3);

        // Relabeled copies of one clustering give that clustering back.
        std::vector<Clustering> same;
        for (int shift = 0; shift < 5; ++shift) {
            std::vector<int> l;
            for (int x : in[0].labels()) l.push_back(x * 7 + shift * 100);
            same.push_back(Clustering(ids, l));
        }
        c.expect(ensemble_majority(same, 3) == in[0], "identity in trial " + std::to_string(trial));

        auto shuffled = in;
        std::shuffle(shuffled.begin(), shuffled.end(), gen);
        c.expect(ensemble_majority(shuffled, 3) == base, "permutation in trial " + std::to_string(trial));

        // Every co-clustered pair is joined by a chain of pairs with >= 3 votes,
        // so an output cluster never spans two vote components.
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                int votes = 0;
                for (const auto& x : in) votes += x.labels()[i] == x.labels()[j];
                if (votes >= 3) edges.emplace_back(i, j);
            }
        auto components = connected_components(ids.size(), edges);
        c.expect(Clustering(ids, components) == base, "vote components in trial " + std::to_string(trial));
    }
    // Two of five votes never merge.
    auto four = ids_of(4);
    Clustering together(four, {0, 0, 1, 2}), apart(four, {0, 1, 2, 3});
    c.expect(ensemble_majority({together, together, apart, apart, apart}, 3).k() == 4, "below-quorum merge");
}

// ---------------------------------------------------------------------------
// Fixture runs

Settings fixture_settings() { return load_settings(fixture_dir / "fixture.conf"); }

void sweep_correctness(Checks& c) {
    ScratchDir dir("sweep");
    std::ostringstream log;
    app::Workspace ws(dir.path() / "ws");
    auto settings = fixture_settings();
    app::Pipeline p(ws, settings, log);
    p.ingest(fixture_dir / "corpus.jsonl", CorpusFormat::jsonl);
    auto steps_gt = load_ground_truth(fixture_dir / "steps_gt.csv");
    auto cases_gt = load_ground_truth(fixture_dir / "cases_gt.csv");

    app::ClusterRequest sweep_req;
    sweep_req.algorithm = app::Algorithm::kmeans;
    sweep_req.sweep = true;
    sweep_req.gt = fixture_dir / "steps_gt.csv";
    auto swept = p.cluster(sweep_req);
    const auto& sk = *swept.sweep;

    // Re-evaluate every grid k on its own.
    std::size_t best_k = 0;
    double best_f = -1.0;
    std::size_t grid_points = 0;
    for (std::size_t k = settings.k_min; k <= settings.k_max; k += settings.k_step) {
        if (k > p.corpus().steps.size()) break;
        app::ClusterRequest one;
        one.algorithm = app::Algorithm::kmeans;
        one.k = k;
        double f = f_score(confusion(p.cluster(one).clustering, steps_gt));
        if (grid_points < sk.evaluated.size())
            c.expect(sk.evaluated[grid_points].k == k && sk.evaluated[grid_points].f_score == f,
                     "k=" + std::to_string(k) + " re-evaluated to " + str(f));
        ++grid_points;
        if (f > best_f) {
            best_f = f;
            best_k = k;
        }
    }
    c.expect(grid_points == sk.evaluated.size(), "k grid size");
    c.expect(sk.best_k == best_k && sk.best_f == best_f,
             "sweep_k picked " + std::to_string(sk.best_k) + ", exhaustive " + std::to_string(best_k));

    // The winning clustering feeds the threshold sweep.
    swept = p.cluster(sweep_req);
    app::CaseRequest case_sweep;
    case_sweep.technique = Technique::combined;
    case_sweep.sweep = true;
    case_sweep.gt = fixture_dir / "cases_gt.csv";
    case_sweep.clustering = swept.artifact;
    auto cs = *p.similar_cases(case_sweep).sweep;

    double best_t = 0.0;
    best_f = -1.0;
    auto grid = threshold_values(settings.t_grid());
    c.expect(grid.size() == cs.curve.size(), "threshold grid size");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        app::CaseRequest one;
        one.technique = Technique::combined;
        one.threshold = grid[i];
        one.clustering = swept.artifact;
        auto r = p.similar_cases(one).report;
        std::set<std::pair<std::string, std::string>> flagged;
        for (const auto& pr : r.pairs) {
            flagged.emplace(r.case_ids[pr.a], r.case_ids[pr.b]);
            flagged.emplace(r.case_ids[pr.b], r.case_ids[pr.a]);
        }
        double f = f_score(confusion(
            [&](std::size_t a, std::size_t b) { return flagged.count({cases_gt.items()[a], cases_gt.items()[b]}) > 0; },
            cases_gt));
        if (i < cs.curve.size())
            c.expect(cs.curve[i].threshold == grid[i] && cs.curve[i].f_score == f,
                     "t=" + str(grid[i]) + " re-evaluated to " + str(f));
        if (f >= best_f) {
            best_f = f;
            best_t = grid[i];
        }
    }
    c.expect(cs.best_threshold == best_t && cs.best_f == best_f,
             "sweep_threshold picked " + str(cs.best_threshold) + ", exhaustive " + str(best_t));

    // Constructed ties: the smallest k and the largest threshold win.
    auto ids = ids_of(6);
    Clustering constant(ids, {0, 0, 1, 1, 2, 2});
    GroundTruth gt6(ids, {"a", "a", "a", "b", "b", "c"});
    auto tie_k = sweep_k([&](std::size_t) { return constant; }, 6, gt6, {2, 6, 2});
    c.expect(tie_k.best_k == 2, "k tie went to " + std::to_string(tie_k.best_k));
    ScoreTable flat({"a", "b", "c"});
    flat.set(0, 1, 0.5);
    flat.set(0, 2, 0.0);
    flat.set(1, 2, 0.0);
    auto tie_t = sweep_threshold(flat, GroundTruth({"a", "b", "c"}, {"x", "x", "y"}));
    c.expect(tie_t.best_threshold == 0.5 && tie_t.best_f == 1.0, "threshold tie went to " + str(tie_t.best_threshold));
}

int run_cli(const fs::path& ws, std::vector<std::string> args, std::string* out_text = nullptr) {
    std::vector<std::string> full{"tcsim", "--workspace", ws.string(), "--config", (fixture_dir / "fixture.conf").string(),
                                  "--threads", "1"};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : full) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = app::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (code != 0) std::cerr << err.str();
    return code;
}

void fixture_end_to_end(Checks& c) {
    const auto golden = fixture_dir / "golden";
    // golden file -> workspace file
    const std::vector<std::pair<std::string, std::string>> files{
        {"clusters.word2vec.kmeans.csv", "clusters/word2vec.kmeans.csv"},
        {"sweep.word2vec.kmeans.csv", "sweeps/word2vec.kmeans.csv"},
        {"sweep.word2vec.kmeans.json", "sweeps/word2vec.kmeans.json"},
        {"cases.combined.json", "cases/combined.json"},
        {"cases.combined.txt", "cases/combined.txt"},
        {"cases.combined.sweep.csv", "cases/combined.sweep.csv"},
        {"cases.combined.sweep.json", "cases/combined.sweep.json"},
    };
    std::vector<std::pair<std::string, std::string>> digests;
    {
        std::istringstream sums(io::read_file(golden / "SHA256SUMS"));
        std::string sha, file;
        while (sums >> sha >> file) digests.emplace_back(file, sha);
    }
    c.expect(digests.size() == 3, "SHA256SUMS entries");

    for (int round = 0; round < 2; ++round) {
        ScratchDir dir("e2e");
        auto ws = dir.path() / "ws";
        std::string label = "run " + std::to_string(round + 1) + ": ";
        c.expect(run_cli(ws, {"ingest", (fixture_dir / "corpus.jsonl").string()}) == 0, label + "ingest");
        c.expect(run_cli(ws, {"embed", "--backend", "word2vec"}) == 0, label + "embed");
        c.expect(run_cli(ws, {"cluster-steps", "--algorithm", "kmeans", "--sweep", "--gt",
                              (fixture_dir / "steps_gt.csv").string()}) == 0,
                 label + "cluster-steps");
        std::string summary;
        c.expect(run_cli(ws,
                         {"similar-cases", "--technique", "combined", "--sweep", "--gt",
                          (fixture_dir / "cases_gt.csv").string()},
                         &summary) == 0,
                 label + "similar-cases");
        for (const auto& [g, w] : files)
            c.expect(fs::exists(ws / w) && io::read_file(ws / w) == io::read_file(golden / g), label + w + " differs");
        for (const auto& [file, sha] : digests)
            c.expect(fs::exists(ws / file) && io::sha256_hex(io::read_file(ws / file)) == sha,
                     label + file + " digest differs");
        auto report = nlohmann::json::parse(io::read_file(ws / "cases" / "combined.json"));
        c.expect(report["groups"].size() == 4, label + std::to_string(report["groups"].size()) + " groups");
        // Each group lies inside one planted family.
        auto cases_gt = load_ground_truth(fixture_dir / "cases_gt.csv");
        std::map<std::string, std::string> family;
        for (std::size_t i = 0; i < cases_gt.size(); ++i) family[cases_gt.items()[i]] = cases_gt.label_of(i);
        std::set<std::string> seen;
        for (const auto& g : report["groups"]) {
            std::set<std::string> fams;
            for (const auto& id : g) fams.insert(family[id.get<std::string>()]);
            c.expect(fams.size() == 1, label + "group mixes families");
            seen.insert(*fams.begin());
        }
        c.expect(seen.size() == 4, label + "groups do not cover 4 families");
    }
}

void word2vec_format(Checks& c) {
    auto ref = load_word2vec_binary(source_dir / "tests" / "data" / "reference.w2v.bin");
    const std::vector<std::vector<float>> expected{{0.5f, -1.25f, 2.0f, 0.125f}, {1, 0, -0.5f, 3.75f}, {-2, 0.25f, 0, 1.5f}};
    c.expect(ref.size() == 3 && ref.dim() == 4, "reference header");
    c.expect(ref.words() == std::vector<std::string>{"game", "hat", "wand"}, "reference words");
    for (std::size_t i = 0; i < std::min<std::size_t>(ref.size(), 3); ++i) {
        auto v = ref.vector(i);
        c.expect(std::equal(v.begin(), v.end(), expected[i].begin(), expected[i].end()), "reference vector " + ref.word(i));
    }

    std::mt19937_64 gen(3);
    auto table = random_words(gen, 200, 37);
    // Include awkward values: signed zero, subnormal and extremes.
    auto v0 = table.mutable_vector(0);
    v0[0] = -0.0f;
    v0[1] = std::numeric_limits<float>::denorm_min();
    v0[2] = std::numeric_limits<float>::max();
    v0[3] = std::numeric_limits<float>::lowest();
    auto bytes = serialize_word2vec_binary(table);
    auto back = parse_word2vec_binary(bytes);
    c.expect(back == table, "round trip payload");
    c.expect(serialize_word2vec_binary(back) == bytes, "round trip bytes");
    c.expect(std::signbit(back.vector(0)[0]), "negative zero sign");

    ScratchDir dir("w2v");
    save_word2vec_binary(table, dir.path() / "t.bin");
    c.expect(load_word2vec_binary(dir.path() / "t.bin") == table, "file round trip");
}

void default_config_wiring(Checks& c) {
    auto s = load_settings(source_dir / "config" / "default.conf");
    c.expect(s.threshold_overlap == 0.70 && s.threshold_jaccard == 0.60 && s.threshold_cosine == 0.85 &&
                 s.threshold_combined == 0.75,
             "thresholds");
    c.expect(s.w_name == 0.5 && s.dim == 300 && s.window == 2 && s.quorum == 3, "w_name/dim/window/quorum");
    c.expect(s.k_min == 50 && s.k_max == 15000 && s.k_step == 50, "k grid");

    // Thresholds: a report without an explicit threshold uses the shipped one.
    {
        ScratchDir dir("cfg");
        std::ostringstream log;
        app::Workspace ws(dir.path() / "ws");
        auto run_settings = s;
        run_settings.k_min = 10;  // the sweep grid is checked separately below
        run_settings.dim = 40;
        app::Pipeline p(ws, run_settings, log);
        p.ingest(fixture_dir / "corpus.jsonl", CorpusFormat::jsonl);
        app::ClusterRequest cr;
        cr.algorithm = app::Algorithm::hac;
        cr.k = 50;
        p.cluster(cr);
        for (auto t : {Technique::overlap, Technique::jaccard, Technique::cosine_counts, Technique::combined}) {
            app::CaseRequest req;
            req.technique = t;
            auto r = p.similar_cases(req).report;
            c.expect(r.threshold == s.threshold_for(t), std::string(technique_name(t)) + " threshold not applied");
            for (const auto& pr : r.pairs) c.expect(pr.score >= r.threshold, "pair below threshold");
        }
    }

    // dim and window reach the trainer.
    auto cbow = s.cbow();
    c.expect(cbow.dim == 300 && cbow.window == 2, "cbow config");
    auto small = cbow;
    small.epochs = 1;
    auto table = train_cbow({{"open", "world", "map"}, {"map", "travel", "forest", "catch", "firefly", "net"}}, small);
    c.expect(table.dim() == 300, "trained dim " + std::to_string(table.dim()));

    // The k grid reaches the sweep: 50, 100, ..., 15000.
    std::vector<std::size_t> seen;
    auto ids = ids_of(20000);
    std::vector<std::string> labels(ids.size(), "x");
    GroundTruth one_label(ids, labels);
    Clustering all(ids, std::vector<int>(ids.size(), 0));
    std::mutex m;
    sweep_k(
        [&](std::size_t k) {
            std::lock_guard<std::mutex> lock(m);
            seen.push_back(k);
            return all;
        },
        ids.size(), one_label, s.k_grid());
    std::sort(seen.begin(), seen.end());
    c.expect(seen.size() == 300 && seen.front() == 50 && seen.back() == 15000, "sweep grid");

    // Quorum 3 of 5.
    auto four = ids_of(4);
    Clustering together(four, {0, 0, 1, 2}), apart(four, {0, 1, 2, 3});
    c.expect(ensemble_majority({together, together, together, apart, apart}, s.quorum).k() == 3, "quorum 3 merges");
    c.expect(ensemble_majority({together, together, apart, apart, apart}, s.quorum).k() == 4, "quorum 3 holds");

    // w_name weights the name score.
    c.expect(combined(0.2, 1.0, s.w_name) == 0.6, "w_name blend");
}

struct Criterion {
    const char* name;
    std::function<void(Checks&)> run;
    double limit_seconds;  // 0: no limit
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"running example signatures and scores", running_example, 1.0},
        {"WMD matches LP vertex oracle (500 instances)", wmd_oracle, 30.0},
        {"WMD metric axioms (1000 triples)", wmd_axioms, 0.0},
        {"HAC matches naive UPGMA (50 matrices)", hac_oracle, 0.0},
        {"k-means properties", kmeans_properties, 0.0},
        {"pairwise F-score oracle", f_score_oracle, 0.0},
        {"ensemble properties (100 quintuples)", ensemble_properties, 0.0},
        {"sweep argmax and tie-breaks on the fixture", sweep_correctness, 0.0},
        {"fixture end-to-end against goldens", fixture_end_to_end, 60.0},
        {"word2vec binary format", word2vec_format, 0.0},
        {"default configuration wiring", default_config_wiring, 0.0},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& cr = criteria[i];
        Checks checks;
        auto start = std::chrono::steady_clock::now();
        try {
            cr.run(checks);
        } catch (const std::exception& e) {
            checks.expect(false, std::string("exception: ") + e.what());
        }
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (cr.limit_seconds > 0)
            checks.expect(seconds < cr.limit_seconds, "took " + str(seconds) + " s, limit " + str(cr.limit_seconds));
        bool ok = checks.ok();
        failures += !ok;
        std::printf("%s [%2zu] %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", i + 1, cr.name, seconds, ok ? "" : ": ",
                    ok ? "" : checks.summary().c_str());
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
    return failures == 0 ? 0 : 1;
}
