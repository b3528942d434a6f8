#include "tcsim/app/pipeline.hpp"

#include <algorithm>
#include <set>

#include "tcsim/cbow.hpp"
#include "tcsim/csv.hpp"
#include "tcsim/error.hpp"
#include "tcsim/io.hpp"
#include "tcsim/tfidf.hpp"

namespace tcsim::app {

// ---------------------------------------------------------------------------
// Corpus store

std::string serialize_corpus(const Corpus& corpus) {
    Json cases = Json::array();
    for (const auto& rec : corpus.cases) {
        Json c;
        c["case_id"] = rec.raw.case_id;
        c["name"] = rec.raw.name;
        c["type"] = rec.raw.case_type ? Json(*rec.raw.case_type) : Json(nullptr);
        c["name_tokens"] = rec.name_tokens;
        c["type_tokens"] = rec.type_tokens;
        Json steps = Json::array();
        for (auto s : rec.step_indices) {
            const auto& st = corpus.steps[s];
            Json j;
            j["step_id"] = st.step_id;
            j["ordinal"] = st.ordinal;
            j["raw_text"] = st.raw_text;
            j["tokens"] = st.tokens;
            j["empty"] = st.empty_after_preprocessing;
            steps.push_back(std::move(j));
        }
        c["steps"] = std::move(steps);
        cases.push_back(std::move(c));
    }
    Json root;
    root["cases"] = std::move(cases);
    return root.dump(1) + "\n";
}

Corpus parse_corpus(std::string_view text) {
    Corpus corpus;
    try {
        auto root = Json::parse(text);
        for (const auto& c : root.at("cases")) {
            CaseRecord rec;
            rec.raw.case_id = c.at("case_id").get<std::string>();
            rec.raw.name = c.at("name").get<std::string>();
            if (!c.at("type").is_null()) rec.raw.case_type = c.at("type").get<std::string>();
            rec.name_tokens = c.at("name_tokens").get<std::vector<std::string>>();
            rec.type_tokens = c.at("type_tokens").get<std::vector<std::string>>();
            for (const auto& s : c.at("steps")) {
                TestStep st;
                st.step_id = s.at("step_id").get<std::string>();
                st.case_id = rec.raw.case_id;
                st.ordinal = s.at("ordinal").get<int>();
                st.raw_text = s.at("raw_text").get<std::string>();
                st.tokens = s.at("tokens").get<std::vector<std::string>>();
                st.empty_after_preprocessing = s.at("empty").get<bool>();
                rec.raw.steps.push_back(st.raw_text);
                rec.step_indices.push_back(corpus.steps.size());
                corpus.steps.push_back(std::move(st));
            }
            corpus.cases.push_back(std::move(rec));
        }
    } catch (const Json::exception& e) {
        throw WorkspaceError(std::string("corrupt corpus artifact: ") + e.what());
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// Names

std::string Backend::name() const {
    switch (kind) {
        case BackendKind::tfidf: return "tfidf";
        case BackendKind::word2vec: return "word2vec";
        case BackendKind::external: return "external:" + tag;
    }
    return {};
}

std::string Backend::file_stem() const {
    return kind == BackendKind::external ? "external-" + tag : name();
}

Backend parse_backend(std::string_view text) {
    if (text == "tfidf") return {BackendKind::tfidf, {}};
    if (text == "word2vec") return {BackendKind::word2vec, {}};
    if (text.substr(0, 9) == "external:") {
        std::string tag(text.substr(9));
        bool ok = !tag.empty() && std::all_of(tag.begin(), tag.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        });
        if (!ok) throw ConfigError("external backend tag must be non-empty and use only [A-Za-z0-9._-]");
        return {BackendKind::external, tag};
    }
    throw ConfigError("unknown backend '" + std::string(text) + "' (expected tfidf, word2vec or external:<tag>)");
}

std::string_view algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::hac: return "hac";
        case Algorithm::kmeans: return "kmeans";
        case Algorithm::ensemble: return "ensemble";
        case Algorithm::baseline_exact: return "baseline-exact";
        case Algorithm::baseline_wmd0: return "baseline-wmd0";
    }
    return {};
}

Algorithm parse_algorithm(std::string_view text) {
    for (auto a : {Algorithm::hac, Algorithm::kmeans, Algorithm::ensemble, Algorithm::baseline_exact,
                   Algorithm::baseline_wmd0})
        if (algorithm_name(a) == text) return a;
    throw ConfigError("unknown algorithm '" + std::string(text) +
                      "' (expected hac, kmeans, ensemble, baseline-exact or baseline-wmd0)");
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* raw_artifact = "corpus.raw";
constexpr const char* corpus_artifact = "corpus";

std::string file_sha(const std::filesystem::path& p) { return io::sha256_hex(io::read_file(p)); }

std::vector<RawTestCase> parse_raw(std::string_view bytes, CorpusFormat format) {
    return format == CorpusFormat::jsonl ? parse_corpus_jsonl(bytes) : parse_corpus_csv(bytes);
}

std::string format_name(CorpusFormat f) { return f == CorpusFormat::jsonl ? "jsonl" : "csv"; }

SweepResult parse_sweep(std::string_view csv_text, std::string_view summary) {
    SweepResult r;
    auto rows = csv::parse(csv_text);
    for (std::size_t i = 1; i < rows.size(); ++i)
        r.evaluated.push_back({std::stoul(rows[i].fields.at(0)), std::stod(rows[i].fields.at(1))});
    auto j = Json::parse(summary);
    r.best_k = j.at("best_k").get<std::size_t>();
    r.best_f = j.at("best_f").get<double>();
    return r;
}

}  // namespace

Pipeline::Pipeline(Workspace& ws, Settings settings, std::ostream& log)
    : ws_(ws), settings_(std::move(settings)), log_(log) {}

std::string Pipeline::stage_settings_key(std::string_view stage, Json inputs) {
    return artifact_key(stage, inputs);
}

std::string Pipeline::gt_sha(const std::filesystem::path& path) { return file_sha(path); }

// ---------------------------------------------------------------------------
// Stage 1: corpus

std::string Pipeline::corpus_key() {
    if (corpus_key_) return *corpus_key_;
    auto raw = ws_.find(raw_artifact);
    if (!raw) throw WorkspaceError("no corpus has been ingested into " + ws_.root().string() + "; run 'ingest' first");
    Json in;
    in["raw"] = raw->sha256;
    in["prune_singletons"] = settings_.prune_singletons;
    in["lemmatize_verbs"] = settings_.lemmatize_verbs;
    in["drop_numbers"] = settings_.drop_numbers;
    in["stopwords"] = settings_.stopwords_file.empty() ? "builtin" : file_sha(settings_.stopwords_file);
    in["misspellings"] = settings_.misspelling_file.empty() ? "none" : file_sha(settings_.misspelling_file);
    corpus_key_ = stage_settings_key("corpus", in);
    return *corpus_key_;
}

Pipeline::IngestStats Pipeline::ingest(const std::filesystem::path& corpus_path, std::optional<CorpusFormat> format) {
    if (!format) format = corpus_format_from_path(corpus_path);
    if (!format) throw ConfigError("cannot infer the corpus format of " + corpus_path.string() + "; pass --format");
    auto bytes = io::read_file(corpus_path);
    auto raw = parse_raw(bytes, *format);
    if (raw.empty()) throw ValidationError("corpus " + corpus_path.string() + " contains no test cases");
    validate_corpus(raw);

    auto raw_sha = io::sha256_hex(bytes);
    auto existing = ws_.find(raw_artifact);
    Json params;
    params["format"] = format_name(*format);
    params["source"] = corpus_path.string();
    if (!existing || existing->sha256 != raw_sha || !ws_.fresh(raw_artifact, raw_sha))
        ws_.store(raw_artifact, "corpus/raw." + format_name(*format), bytes, raw_sha, params);
    corpus_key_.reset();
    corpus_.reset();

    IngestStats stats;
    stats.cached = ws_.fresh(corpus_artifact, corpus_key());
    const auto& c = corpus();
    stats.cases = c.cases.size();
    stats.steps = c.steps.size();
    stats.vocabulary = c.vocabulary_size();
    stats.empty_steps = c.empty_step_count();
    stats.sha256 = ws_.find(corpus_artifact)->sha256;
    return stats;
}

const Corpus& Pipeline::corpus() {
    if (corpus_) return *corpus_;
    auto key = corpus_key();
    if (ws_.fresh(corpus_artifact, key)) {
        corpus_ = parse_corpus(ws_.load(corpus_artifact));
        return *corpus_;
    }
    if (ws_.find(corpus_artifact)) log_ << "note: rebuilding stale artifact '" << corpus_artifact << "'\n";
    auto raw = ws_.find(raw_artifact);
    auto format = raw->params.value("format", "jsonl") == "csv" ? CorpusFormat::csv : CorpusFormat::jsonl;
    auto cases = parse_raw(ws_.load(raw_artifact), format);
    corpus_ = prepare_corpus(std::move(cases), settings_.preprocess());
    ws_.store(corpus_artifact, "corpus/prepared.json", serialize_corpus(*corpus_), key);
    return *corpus_;
}

// ---------------------------------------------------------------------------
// Stage 2a: embeddings

std::string Pipeline::embedding_key(const Backend& backend) {
    auto name = "embedding/" + backend.file_stem();
    if (auto it = embedding_keys_.find(name); it != embedding_keys_.end()) return it->second;
    Json in;
    in["corpus"] = corpus_key();
    switch (backend.kind) {
        case BackendKind::tfidf: break;
        case BackendKind::word2vec: {
            in["dim"] = settings_.dim;
            in["window"] = settings_.window;
            in["negative_samples"] = settings_.negative_samples;
            in["epochs"] = settings_.epochs;
            in["learning_rate"] = settings_.learning_rate;
            in["min_learning_rate"] = settings_.min_learning_rate;
            in["seed"] = settings_.seed;
            in["pretrained"] = nullptr;
            auto params = word2vec_params();
            if (params.contains("pretrained")) {
                std::filesystem::path p = params["pretrained"].get<std::string>();
                in["pretrained"] = std::filesystem::exists(p) ? file_sha(p) : params.value("pretrained_sha", "");
            }
            break;
        }
        case BackendKind::external: {
            auto input = ws_.find("input/" + backend.file_stem());
            if (!input)
                throw WorkspaceError("no embeddings imported for backend '" + backend.name() +
                                     "'; run 'embed --backend " + backend.name() + " --input FILE' first");
            in["input"] = input->sha256;
            break;
        }
    }
    auto key = stage_settings_key(name, in);
    embedding_keys_[name] = key;
    return key;
}

Pipeline::EmbedStats Pipeline::embed(const Backend& backend, const std::optional<std::filesystem::path>& pretrained,
                                     const std::optional<std::filesystem::path>& input) {
    const auto name = "embedding/" + backend.file_stem();
    EmbedStats stats;
    stats.backend = backend.name();
    if (pretrained && backend.kind != BackendKind::word2vec)
        throw ConfigError("--pretrained applies to the word2vec backend only");
    if (input && backend.kind != BackendKind::external)
        throw ConfigError("--input applies to external:<tag> backends only");

    switch (backend.kind) {
        case BackendKind::tfidf: {
            stats.cached = ws_.fresh(name, embedding_key(backend));
            const auto& t = step_vectors(backend);
            stats.dim = t.dim();
            stats.entries = t.size();
            break;
        }
        case BackendKind::word2vec: {
            // The flags of an explicit embed call define how the table is built.
            auto existing = ws_.find(name);
            Json params = Json::object();
            if (pretrained) {
                params["pretrained"] = std::filesystem::absolute(*pretrained).string();
                params["pretrained_sha"] = file_sha(*pretrained);
            }
            bool same_params = existing && existing->params == params;
            word2vec_params_ = params;
            words_.reset();
            step_vectors_.erase(name);
            embedding_keys_.erase(name);
            stats.cached = same_params && ws_.fresh(name, embedding_key(backend));
            const auto& w = word_vectors();
            stats.dim = w.dim();
            stats.entries = w.size();
            break;
        }
        case BackendKind::external: {
            if (!input) {
                if (!ws_.find("input/" + backend.file_stem()))
                    throw ConfigError("backend '" + backend.name() + "' needs --input <EMBX file>");
            } else {
                auto bytes = io::read_file(*input);
                auto table = parse_step_embeddings(bytes, backend.name());
                table.require_coverage(corpus().step_ids());
                Json params;
                params["source"] = input->string();
                auto sha = io::sha256_hex(bytes);
                ws_.store("input/" + backend.file_stem(), "input/" + backend.file_stem() + ".embx", bytes, sha, params);
                embedding_keys_.erase(name);
            }
            stats.cached = ws_.fresh(name, embedding_key(backend));
            const auto& t = step_vectors(backend);
            stats.dim = t.dim();
            stats.entries = t.size();
            break;
        }
    }
    stats.sha256 = ws_.find(name)->sha256;
    return stats;
}

const WordEmbeddingTable& Pipeline::word_vectors() {
    if (words_) return *words_;
    const std::string name = "embedding/word2vec";
    const Backend backend{BackendKind::word2vec, {}};
    auto key = embedding_key(backend);
    if (ws_.fresh(name, key)) {
        words_ = std::make_unique<WordEmbeddingTable>(parse_word2vec_binary(ws_.load(name)));
        return *words_;
    }
    auto existing = ws_.find(name);
    Json params = word2vec_params();
    if (!existing && !word2vec_params_) log_ << "note: no word2vec embeddings yet; training from scratch\n";
    if (existing && !word2vec_params_) log_ << "note: rebuilding stale artifact '" << name << "'\n";

    const auto& c = corpus();
    auto sentences = training_sentences(c);
    auto cfg = settings_.cbow();
    if (params.contains("pretrained")) {
        std::filesystem::path p = params["pretrained"].get<std::string>();
        if (!std::filesystem::exists(p))
            throw WorkspaceError("pretrained vectors " + p.string() + " used by '" + name + "' are no longer available");
        auto pre = load_word2vec_binary(p);
        if (pre.dim() != cfg.dim)
            throw ConfigError("pretrained vectors have dimension " + std::to_string(pre.dim()) +
                              " but word2vec.dim is " + std::to_string(cfg.dim));
        std::set<std::string> vocab;
        for (const auto& s : sentences) vocab.insert(s.begin(), s.end());
        auto init = init_with_pretrained(vocab, pre, settings_.seed);
        words_ = std::make_unique<WordEmbeddingTable>(train_cbow(sentences, cfg, &init));
        words_->set_provenance(Provenance::mixed);
        params["pretrained_sha"] = file_sha(p);
    } else {
        words_ = std::make_unique<WordEmbeddingTable>(train_cbow(sentences, cfg));
    }
    ws_.store(name, "embedding/word2vec.bin", serialize_word2vec_binary(*words_), key, params);
    return *words_;
}

const StepEmbeddingTable& Pipeline::step_vectors(const Backend& backend) {
    const auto name = "embedding/" + backend.file_stem();
    if (auto it = step_vectors_.find(name); it != step_vectors_.end()) return it->second;
    const auto& c = corpus();
    switch (backend.kind) {
        case BackendKind::word2vec: {
            auto pooled = pool_steps(c.steps, word_vectors());
            return step_vectors_.emplace(name, std::move(pooled)).first->second;
        }
        case BackendKind::tfidf: {
            auto key = embedding_key(backend);
            if (ws_.fresh(name, key))
                return step_vectors_.emplace(name, parse_step_embeddings(ws_.load(name), "tfidf")).first->second;
            if (ws_.find(name)) log_ << "note: rebuilding stale artifact '" << name << "'\n";
            auto table = fit_tfidf(c.steps);
            ws_.store(name, name + ".embx", serialize_step_embeddings(table), key);
            return step_vectors_.emplace(name, std::move(table)).first->second;
        }
        case BackendKind::external: {
            auto key = embedding_key(backend);
            if (ws_.fresh(name, key))
                return step_vectors_.emplace(name, parse_step_embeddings(ws_.load(name), backend.name()))
                    .first->second;
            auto bytes = ws_.load("input/" + backend.file_stem());
            auto table = parse_step_embeddings(bytes, backend.name());
            table.require_coverage(c.step_ids());
            ws_.store(name, name + ".embx", bytes, key);
            return step_vectors_.emplace(name, std::move(table)).first->second;
        }
    }
    throw std::logic_error("unhandled backend");
}

Json Pipeline::word2vec_params() const {
    if (word2vec_params_) return *word2vec_params_;
    if (auto a = ws_.find("embedding/word2vec")) return a->params;
    return Json::object();
}

// ---------------------------------------------------------------------------
// Stage 2b: distance matrices

std::string Pipeline::matrix_key(const Backend& backend) {
    Json in;
    in["embedding"] = embedding_key(backend);
    in["metric"] = backend.kind == BackendKind::word2vec ? (settings_.relaxed_wmd ? "rwmd" : "wmd") : "cosine";
    in["empty_penalty"] = settings_.empty_penalty;
    return stage_settings_key("matrix", in);
}

const DistanceMatrix& Pipeline::distance_matrix(const Backend& backend) {
    const auto name = "matrix/" + backend.file_stem();
    if (auto it = matrices_.find(name); it != matrices_.end()) return it->second;
    auto key = matrix_key(backend);
    if (ws_.fresh(name, key)) return matrices_.emplace(name, parse_distance_matrix(ws_.load(name))).first->second;
    if (ws_.find(name)) log_ << "note: rebuilding stale artifact '" << name << "'\n";
    const auto& c = corpus();
    auto opts = settings_.matrix();
    DistanceMatrix dm = backend.kind == BackendKind::word2vec
                            ? build_wmd_matrix(c.steps, word_vectors(), opts, settings_.relaxed_wmd)
                            : build_cosine_matrix(c.steps, step_vectors(backend), opts);
    ws_.store(name, name + ".dmat", serialize_distance_matrix(dm), key);
    return matrices_.emplace(name, std::move(dm)).first->second;
}

// ---------------------------------------------------------------------------
// Stage 2c: step clusterings

std::string Pipeline::cluster_artifact_name(const ClusterRequest& r) {
    switch (r.algorithm) {
        case Algorithm::hac:
        case Algorithm::kmeans: return "clusters/" + r.backend.file_stem() + "." + std::string(algorithm_name(r.algorithm));
        default: return "clusters/" + std::string(algorithm_name(r.algorithm));
    }
}

Json Pipeline::request_params(const ClusterRequest& r) {
    Json p;
    p["backend"] = r.backend.name();
    p["algorithm"] = algorithm_name(r.algorithm);
    p["k"] = r.k ? Json(*r.k) : Json(nullptr);
    p["sweep"] = r.sweep;
    p["gt"] = r.gt ? Json(r.gt->string()) : Json(nullptr);
    p["members"] = r.members;
    return p;
}

ClusterRequest Pipeline::request_from_params(const Json& p) {
    ClusterRequest r;
    r.backend = parse_backend(p.at("backend").get<std::string>());
    r.algorithm = parse_algorithm(p.at("algorithm").get<std::string>());
    if (!p.at("k").is_null()) r.k = p.at("k").get<std::size_t>();
    r.sweep = p.at("sweep").get<bool>();
    if (!p.at("gt").is_null()) r.gt = p.at("gt").get<std::string>();
    r.members = p.at("members").get<std::vector<std::string>>();
    return r;
}

std::string Pipeline::cluster_key(const ClusterRequest& r) {
    Json in;
    in["algorithm"] = algorithm_name(r.algorithm);
    switch (r.algorithm) {
        case Algorithm::hac: in["matrix"] = matrix_key(r.backend); break;
        case Algorithm::kmeans:
            in["matrix"] = matrix_key(r.backend);
            in["embedding"] = embedding_key(r.backend);
            in["max_iter"] = settings_.kmeans_max_iter;
            in["tol"] = settings_.kmeans_tol;
            break;
        case Algorithm::baseline_exact: in["corpus"] = corpus_key(); break;
        case Algorithm::baseline_wmd0: in["matrix"] = matrix_key(r.backend); break;
        case Algorithm::ensemble: {
            Json members = Json::array();
            for (const auto& m : r.members) {
                clustering(m);  // rebuilds the member if it is stale
                members.push_back(ws_.find(m)->key);
            }
            in["members"] = std::move(members);
            in["quorum"] = settings_.quorum;
            break;
        }
    }
    if (r.sweep) {
        in["k_min"] = settings_.k_min;
        in["k_max"] = settings_.k_max;
        in["k_step"] = settings_.k_step;
        in["gt"] = gt_sha(ws_.path(r.gt->string()));
    } else if (r.k) {
        in["k"] = *r.k;
    }
    return stage_settings_key("clustering", in);
}

std::function<Clustering(std::size_t)> Pipeline::k_builder(const ClusterRequest& r) {
    const auto& dm = distance_matrix(r.backend);
    const auto mkey = "matrix/" + r.backend.file_stem();
    auto it = merges_.find(mkey);
    if (it == merges_.end()) it = merges_.emplace(mkey, hac_average_merges(dm)).first;
    const auto* merges = &it->second;
    if (r.algorithm == Algorithm::hac) {
        const auto* ids = &dm.ids();
        return [ids, merges](std::size_t k) { return cut_dendrogram(*ids, *merges, k); };
    }
    const auto& c = corpus();
    auto points = std::make_shared<PointSet>(PointSet::from_table(step_vectors(r.backend), c.step_ids()));
    std::vector<std::string> empty_ids;
    for (const auto& s : c.steps)
        if (s.empty_after_preprocessing) empty_ids.push_back(s.step_id);
    auto opts = settings_.kmeans();
    return [points, merges, opts, empty_ids = std::move(empty_ids)](std::size_t k) {
        return kmeans_from_hac(*points, *merges, k, opts, empty_ids);
    };
}

Clustering Pipeline::build_clustering(const ClusterRequest& r, std::optional<SweepResult>& sweep) {
    const auto& c = corpus();
    switch (r.algorithm) {
        case Algorithm::hac:
        case Algorithm::kmeans: {
            auto builder = k_builder(r);
            if (r.sweep) {
                auto gt = load_ground_truth(ws_.path(r.gt->string()));
                sweep = sweep_k(builder, c.steps.size(), gt, settings_.k_grid(), settings_.threads);
                return builder(sweep->best_k);
            }
            return builder(*r.k);
        }
        case Algorithm::ensemble: {
            std::vector<Clustering> inputs;
            for (const auto& m : r.members) inputs.push_back(clustering(m));
            return ensemble_majority(inputs, settings_.quorum);
        }
        case Algorithm::baseline_exact: return baseline_exact(c.steps);
        case Algorithm::baseline_wmd0: return baseline_wmd_zero(distance_matrix(r.backend));
    }
    throw std::logic_error("unhandled algorithm");
}

ClusterOutcome Pipeline::cluster(const ClusterRequest& request) {
    ClusterRequest r = request;
    if (r.gt) {
        auto bytes = io::read_file(*r.gt);
        load_ground_truth(*r.gt);  // validate before storing
        auto sha = io::sha256_hex(bytes);
        auto rel = "input/gt-" + sha.substr(0, 16) + ".csv";
        ws_.store("input/gt-" + sha.substr(0, 16), rel, bytes, sha);
        r.gt = rel;
    }
    auto out = materialize(r);
    ws_.set_note("latest_clustering", out.artifact);
    return out;
}

ClusterOutcome Pipeline::materialize(const ClusterRequest& request) {
    ClusterRequest r = request;
    const bool needs_k = r.algorithm == Algorithm::hac || r.algorithm == Algorithm::kmeans;
    if (r.k && *r.k == 0) throw ConfigError("--k must be a positive integer");
    if (needs_k && r.k.has_value() == r.sweep) throw ConfigError("pass exactly one of --k or --sweep");
    if (!needs_k && (r.k || r.sweep))
        throw ConfigError(std::string(algorithm_name(r.algorithm)) + " takes neither --k nor --sweep");
    if (r.sweep && !r.gt) throw ConfigError("--sweep needs --gt <step ground truth CSV>");
    if (r.algorithm == Algorithm::baseline_wmd0 && r.backend.kind != BackendKind::word2vec)
        throw ConfigError("baseline-wmd0 needs the word2vec backend");
    if (r.algorithm == Algorithm::ensemble && r.members.empty())
        throw ConfigError("ensemble needs --members <clustering artifacts>");
    if (r.algorithm == Algorithm::ensemble)
        for (const auto& m : r.members)
            if (!ws_.find(m)) throw WorkspaceError("ensemble member '" + m + "' is not in the workspace");
    if (!needs_k && r.algorithm != Algorithm::baseline_wmd0) r.backend = Backend{BackendKind::word2vec, {}};
    if (r.k && *r.k > corpus().steps.size())
        throw ConfigError("--k " + std::to_string(*r.k) + " exceeds the number of steps (" +
                          std::to_string(corpus().steps.size()) + ")");

    ClusterOutcome out;
    out.artifact = cluster_artifact_name(r);
    const auto key = cluster_key(r);
    const auto sweep_name = "sweeps/" + out.artifact.substr(std::string("clusters/").size());
    const auto params = request_params(r);
    auto existing = ws_.find(out.artifact);
    bool cached = existing && existing->params == params && ws_.fresh(out.artifact, key) &&
                  (!r.sweep || (ws_.fresh(sweep_name, key) && ws_.fresh(sweep_name + ".summary", key)));
    if (cached) {
        out.cached = true;
        out.clustering = parse_clustering(ws_.load(out.artifact));
        if (r.sweep) out.sweep = parse_sweep(ws_.load(sweep_name), ws_.load(sweep_name + ".summary"));
    } else {
        out.clustering = build_clustering(r, out.sweep);
        ws_.store(out.artifact, out.artifact + ".csv", serialize_clustering(out.clustering), key, params);
        if (out.sweep) {
            ws_.store(sweep_name, sweep_name + ".csv", serialize_sweep_csv(*out.sweep), key);
            ws_.store(sweep_name + ".summary", sweep_name + ".json", serialize_sweep_summary(*out.sweep), key);
        }
    }
    return out;
}

Clustering Pipeline::clustering(const std::string& artifact) {
    auto a = ws_.find(artifact);
    if (!a || !artifact.starts_with("clusters/"))
        throw WorkspaceError("workspace has no clustering named '" + artifact + "'");
    auto request = request_from_params(a->params);
    auto key = cluster_key(request);
    if (ws_.fresh(artifact, key)) return parse_clustering(ws_.load(artifact));
    log_ << "note: rebuilding stale artifact '" << artifact << "'\n";
    return materialize(request).clustering;
}

// ---------------------------------------------------------------------------
// Stage 3: case similarity

CaseOutcome Pipeline::similar_cases(const CaseRequest& request) {
    if (request.sweep && request.threshold) throw ConfigError("pass at most one of --threshold or --sweep");
    if (request.sweep && !request.gt) throw ConfigError("--sweep needs --gt <case ground truth CSV>");
    if (request.threshold) validate_threshold(*request.threshold);
    const auto& c = corpus();
    const auto t = request.technique;
    const bool step_based = t != Technique::same_steps && t != Technique::same_name;

    Json in;
    in["technique"] = technique_name(t);
    in["corpus"] = corpus_key();
    std::vector<CaseSignature> sigs;
    if (step_based) {
        auto name = request.clustering ? *request.clustering : ws_.note("latest_clustering").value_or("");
        if (name.empty()) throw WorkspaceError("no step clustering in the workspace; run 'cluster-steps' first");
        auto steps = clustering(name);
        in["clustering"] = ws_.find(name)->key;
        sigs = signatures(c, steps);
    }
    const WordEmbeddingTable* words = nullptr;
    if (t == Technique::combined) {
        words = &word_vectors();
        in["names"] = embedding_key(Backend{BackendKind::word2vec, {}});
        in["w_name"] = settings_.w_name;
        in["name_mode"] = settings_.name_mode == NameMode::wmd ? "wmd" : "pooled_cosine";
    }
    ScoreOptions opts;
    opts.technique = t;
    opts.w_name = settings_.w_name;
    opts.name_mode = settings_.name_mode;
    opts.threads = settings_.threads;
    auto scores = score_cases(c, sigs, opts, words);

    CaseOutcome out;
    const std::string base = "cases/" + std::string(technique_name(t));
    out.artifact = base;
    double threshold = request.threshold.value_or(settings_.threshold_for(t));
    if (request.sweep) {
        auto gt = load_ground_truth(*request.gt);
        out.sweep = sweep_threshold(scores, gt, settings_.t_grid());
        threshold = out.sweep->best_threshold;
        Json sin = in;
        sin["gt"] = gt_sha(*request.gt);
        sin["t_min"] = settings_.t_min;
        sin["t_max"] = settings_.t_max;
        sin["t_step"] = settings_.t_step;
        auto skey = stage_settings_key("case-sweep", sin);
        ws_.store(base + ".sweep", base + ".sweep.csv", serialize_threshold_curve(*out.sweep), skey);
        ws_.store(base + ".sweep.summary", base + ".sweep.json", serialize_threshold_summary(*out.sweep), skey);
        in["sweep"] = skey;
    }
    in["threshold"] = threshold;
    out.report = report(scores, t, threshold);
    auto key = stage_settings_key("case-report", in);
    ws_.store(base, base + ".json", report_json(out.report), key);
    ws_.store(base + ".text", base + ".txt", report_text(out.report, c), key);
    return out;
}

}  // namespace tcsim::app
