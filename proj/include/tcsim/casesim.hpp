#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tcsim/corpus.hpp"
#include "tcsim/embedding.hpp"

namespace tcsim {

class Clustering;
class GroundTruth;

/// A test case represented over k step clusters. Stored sparsely as the
/// sorted cluster ids the case touches and the number of its steps in each.
class CaseSignature {
public:
    CaseSignature() = default;
    /// `step_clusters` lists the cluster of every step of the case.
    CaseSignature(std::string case_id, std::size_t k, const std::vector<int>& step_clusters);

    [[nodiscard]] const std::string& case_id() const { return case_id_; }
    [[nodiscard]] std::size_t k() const { return k_; }
    [[nodiscard]] const std::vector<int>& cluster_ids() const { return ids_; }
    [[nodiscard]] const std::vector<int>& counts() const { return counts_; }  // parallel to cluster_ids
    [[nodiscard]] std::vector<int> bool_vec() const;
    [[nodiscard]] std::vector<int> count_vec() const;
    [[nodiscard]] std::size_t step_count() const;

private:
    std::string case_id_;
    std::size_t k_ = 0;
    std::vector<int> ids_;
    std::vector<int> counts_;
};

/// One signature per case, from the clusters of its steps. Throws
/// LookupError if a step has no cluster.
std::vector<CaseSignature> signatures(const std::vector<std::string>& case_ids,
                                      const std::vector<std::vector<std::string>>& case_step_ids,
                                      const Clustering& step_clustering);
std::vector<CaseSignature> signatures(const Corpus& corpus, const Clustering& step_clustering);

/// |A ∩ B| / max(|A|, |B|) over cluster-id sets; 1 when both are empty.
double overlap(const CaseSignature& a, const CaseSignature& b);
/// |A ∩ B| / |A ∪ B| over boolean supports; 1 when both are empty.
double jaccard(const CaseSignature& a, const CaseSignature& b);
/// Cosine of the count vectors; 0 when either is zero.
double cosine_counts(const CaseSignature& a, const CaseSignature& b);

enum class NameMode {
    wmd,            // 1 / (1 + WMD) between name bags
    pooled_cosine,  // cosine of mean-pooled name vectors, clamped at 0
};

/// Similarity of two preprocessed case names in [0, 1]. Two empty names
/// score 1, one empty name scores 0.
double name_similarity(std::span<const std::string> a, std::span<const std::string> b,
                       const WordEmbeddingTable& words, NameMode mode = NameMode::wmd);

/// (1 - w_name) * step_score + w_name * name_score.
double combined(double cosine_counts_score, double name_score, double w_name = 0.5);

enum class Technique { overlap, jaccard, cosine_counts, combined, same_steps, same_name };

std::string_view technique_name(Technique t);
/// Accepts the names above plus "cosine" for cosine_counts. Throws
/// ConfigError otherwise.
Technique parse_technique(std::string_view name);

/// All pairwise case scores (upper triangle) in corpus order.
class ScoreTable {
public:
    ScoreTable() = default;
    explicit ScoreTable(std::vector<std::string> ids);

    [[nodiscard]] std::size_t size() const { return ids_.size(); }
    [[nodiscard]] const std::vector<std::string>& ids() const { return ids_; }
    /// Requires i != j.
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return scores_[offset(i, j)]; }
    void set(std::size_t i, std::size_t j, double score) { scores_[offset(i, j)] = score; }

private:
    [[nodiscard]] std::size_t offset(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        return i * (2 * ids_.size() - i - 1) / 2 + (j - i - 1);
    }
    std::vector<std::string> ids_;
    std::vector<double> scores_;
};

struct ScoreOptions {
    Technique technique = Technique::combined;
    double w_name = 0.5;
    NameMode name_mode = NameMode::wmd;
    std::size_t threads = 1;
};

/// Scores every pair of cases. `words` is required for the combined
/// technique only.
ScoreTable score_cases(const Corpus& corpus, const std::vector<CaseSignature>& sigs, const ScoreOptions& options,
                       const WordEmbeddingTable* words = nullptr);

/// Pairs of case indices (i < j) with identical ordered step token lists.
std::vector<std::pair<std::size_t, std::size_t>> case_baseline_same_steps(const Corpus& corpus);
/// Pairs of case indices (i < j) whose raw names match after lowercasing
/// and collapsing whitespace.
std::vector<std::pair<std::size_t, std::size_t>> case_baseline_same_name(const Corpus& corpus);
/// Score table with 1 on the given pairs and 0 elsewhere.
ScoreTable score_table_from_pairs(std::vector<std::string> ids,
                                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

// ---------------------------------------------------------------------------

struct ThresholdGrid {
    double t_min = 0.1;
    double t_max = 1.0;
    double step = 0.05;
};

/// Grid values rounded to 1e-12. Throws ConfigError for an invalid grid.
std::vector<double> threshold_values(const ThresholdGrid& grid);

struct ThresholdPoint {
    double threshold = 0.0;
    double f_score = 0.0;
};

struct ThresholdSweep {
    std::vector<ThresholdPoint> curve;
    double best_threshold = 0.0;
    double best_f = 0.0;
};

/// Flags pairs scoring >= t for every grid t and keeps the best pairwise
/// F-score against the case ground truth (largest t on ties).
ThresholdSweep sweep_threshold(const ScoreTable& scores, const GroundTruth& gt, const ThresholdGrid& grid = {});

/// CSV with header `threshold,f_score`.
std::string serialize_threshold_curve(const ThresholdSweep& sweep);
/// {"best_threshold": ..., "best_f": ...}
std::string serialize_threshold_summary(const ThresholdSweep& sweep);

/// Throws ValidationError unless 0 < t <= 1.
void validate_threshold(double t);

// ---------------------------------------------------------------------------

struct CasePair {
    std::size_t a = 0;
    std::size_t b = 0;
    double score = 0.0;
};

struct ReportStats {
    double cases_with_match_fraction = 0.0;
    std::size_t group_count = 0;
    double group_size_mean = 0.0;
    double group_size_std = 0.0;  // population
};

struct SimilarityReport {
    Technique technique = Technique::combined;
    double threshold = 0.0;
    std::vector<std::string> case_ids;
    std::vector<CasePair> pairs;                   // i < j, corpus order
    std::vector<std::vector<std::size_t>> groups;  // ordered by first member
    ReportStats stats;
};

/// Lists every pair scoring >= threshold and groups the flagged cases into
/// connected components.
SimilarityReport report(const ScoreTable& scores, Technique technique, double threshold);

/// {technique, threshold, pairs: [{a, b, score}], groups: [[id, ...]], stats}
std::string report_json(const SimilarityReport& r);
/// Human-readable listing of each group with case names and step texts.
std::string report_text(const SimilarityReport& r, const Corpus& corpus);

}  // namespace tcsim
