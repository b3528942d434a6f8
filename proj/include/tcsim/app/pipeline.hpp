#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tcsim/app/workspace.hpp"
#include "tcsim/casesim.hpp"
#include "tcsim/clustering.hpp"
#include "tcsim/config.hpp"
#include "tcsim/corpus.hpp"
#include "tcsim/embedding.hpp"
#include "tcsim/eval.hpp"
#include "tcsim/similarity.hpp"

namespace tcsim::app {

/// Preprocessed corpus as stored in the workspace (JSON).
std::string serialize_corpus(const Corpus& corpus);
Corpus parse_corpus(std::string_view text);

enum class BackendKind { tfidf, word2vec, external };

struct Backend {
    BackendKind kind = BackendKind::word2vec;
    std::string tag;  // external only

    [[nodiscard]] std::string name() const;       // "tfidf", "word2vec", "external:<tag>"
    [[nodiscard]] std::string file_stem() const;  // "tfidf", "word2vec", "external-<tag>"
};

/// Throws ConfigError for anything but tfidf, word2vec or external:<tag>.
Backend parse_backend(std::string_view text);

enum class Algorithm { hac, kmeans, ensemble, baseline_exact, baseline_wmd0 };
std::string_view algorithm_name(Algorithm a);
Algorithm parse_algorithm(std::string_view text);

struct ClusterRequest {
    Backend backend;
    Algorithm algorithm = Algorithm::hac;
    std::optional<std::size_t> k;
    bool sweep = false;
    std::optional<std::filesystem::path> gt;  // step ground truth, required by sweep
    std::vector<std::string> members;         // ensemble inputs (artifact names)
};

struct ClusterOutcome {
    std::string artifact;  // manifest name of the clustering
    Clustering clustering;
    std::optional<SweepResult> sweep;
    bool cached = false;
};

struct CaseRequest {
    Technique technique = Technique::combined;
    std::optional<double> threshold;
    bool sweep = false;
    std::optional<std::filesystem::path> gt;  // case ground truth
    std::optional<std::string> clustering;    // artifact name; default: latest
};

struct CaseOutcome {
    std::string artifact;
    SimilarityReport report;
    std::optional<ThresholdSweep> sweep;
};

/// Builds artifacts on demand, reusing cached ones whose key still matches
/// and rebuilding stale ones from the inputs recorded in the manifest.
class Pipeline {
public:
    Pipeline(Workspace& ws, Settings settings, std::ostream& log);

    struct IngestStats {
        std::size_t cases = 0;
        std::size_t steps = 0;
        std::size_t vocabulary = 0;
        std::size_t empty_steps = 0;
        std::string sha256;
        bool cached = false;
    };
    IngestStats ingest(const std::filesystem::path& corpus_path, std::optional<CorpusFormat> format);

    struct EmbedStats {
        std::string backend;
        std::size_t dim = 0;
        std::size_t entries = 0;
        std::string sha256;
        bool cached = false;
    };
    EmbedStats embed(const Backend& backend, const std::optional<std::filesystem::path>& pretrained,
                     const std::optional<std::filesystem::path>& input);

    ClusterOutcome cluster(const ClusterRequest& request);
    CaseOutcome similar_cases(const CaseRequest& request);

    const Corpus& corpus();
    const WordEmbeddingTable& word_vectors();
    const StepEmbeddingTable& step_vectors(const Backend& backend);
    const DistanceMatrix& distance_matrix(const Backend& backend);
    /// Loads (rebuilding if stale) a clustering artifact by name.
    Clustering clustering(const std::string& artifact);

    [[nodiscard]] const Settings& settings() const { return settings_; }

private:
    std::string corpus_key();
    std::string embedding_key(const Backend& backend);
    std::string matrix_key(const Backend& backend);
    std::string gt_sha(const std::filesystem::path& path);
    std::string stage_settings_key(std::string_view stage, Json inputs);

    ClusterOutcome materialize(const ClusterRequest& request);
    [[nodiscard]] Json word2vec_params() const;
    Clustering build_clustering(const ClusterRequest& request, std::optional<SweepResult>& sweep);
    std::string cluster_key(const ClusterRequest& request);
    static std::string cluster_artifact_name(const ClusterRequest& request);
    static Json request_params(const ClusterRequest& request);
    static ClusterRequest request_from_params(const Json& params);
    std::function<Clustering(std::size_t)> k_builder(const ClusterRequest& request);

    Workspace& ws_;
    Settings settings_;
    std::ostream& log_;

    std::optional<Corpus> corpus_;
    std::optional<std::string> corpus_key_;
    std::unique_ptr<WordEmbeddingTable> words_;
    std::map<std::string, StepEmbeddingTable> step_vectors_;
    std::map<std::string, DistanceMatrix> matrices_;
    std::map<std::string, std::vector<Merge>> merges_;
    std::map<std::string, std::string> embedding_keys_;
    std::optional<Json> word2vec_params_;  // set by an explicit embed call
};

}  // namespace tcsim::app
