#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tcsim/corpus.hpp"
#include "tcsim/embedding.hpp"
#include "tcsim/similarity.hpp"

namespace tcsim {

class GroundTruth;

/// Total assignment of items to clusters 0..k-1. Labels are canonical:
/// cluster ids are numbered by first appearance in item order, so two
/// clusterings that differ only by relabeling compare equal.
class Clustering {
public:
    Clustering() = default;
    /// `labels` may be arbitrary integers; they are renumbered. Throws
    /// ValidationError on size mismatch or duplicate ids.
    Clustering(std::vector<std::string> ids, const std::vector<int>& labels);

    [[nodiscard]] std::size_t size() const { return ids_.size(); }
    [[nodiscard]] int k() const { return k_; }
    [[nodiscard]] const std::vector<std::string>& ids() const { return ids_; }
    [[nodiscard]] const std::vector<int>& labels() const { return labels_; }
    [[nodiscard]] bool contains(std::string_view id) const;
    /// Throws LookupError for an unknown item.
    [[nodiscard]] int cluster_of(std::string_view id) const;
    /// Member indices per cluster, each ascending.
    [[nodiscard]] std::vector<std::vector<std::size_t>> members() const;

    friend bool operator==(const Clustering& a, const Clustering& b) {
        return a.ids_ == b.ids_ && a.labels_ == b.labels_;
    }

private:
    std::vector<std::string> ids_;
    std::vector<int> labels_;
    std::unordered_map<std::string, std::size_t> index_;
    int k_ = 0;
};

/// Clustering CSV with header `item_id,cluster_id`.
std::string serialize_clustering(const Clustering& c);
Clustering parse_clustering(std::string_view text);
void save_clustering(const Clustering& c, const std::filesystem::path& path);
Clustering load_clustering(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Average-linkage (UPGMA) agglomerative clustering

/// One agglomeration step. Clusters are named by their smallest original
/// member index; merging a and b (a < b) keeps the name a.
struct Merge {
    std::size_t a = 0;
    std::size_t b = 0;
    double distance = 0.0;
    std::size_t size = 0;  // members of the merged cluster

    friend bool operator==(const Merge&, const Merge&) = default;
};

/// Full merge sequence (n - 1 merges). At each step the pair of active
/// clusters with the smallest mean cross-pair distance is merged; ties go to
/// the lexicographically smallest (a, b).
std::vector<Merge> hac_average_merges(const DistanceMatrix& dm);

/// Applies the first n - k merges. Throws ConfigError unless 1 <= k <= n.
Clustering cut_dendrogram(const std::vector<std::string>& ids, const std::vector<Merge>& merges, std::size_t k);

/// hac_average_merges followed by cut_dendrogram.
Clustering hac_average(const DistanceMatrix& dm, std::size_t k);

// ---------------------------------------------------------------------------
// K-means

/// Row-major point set.
struct PointSet {
    std::vector<std::string> ids;
    std::size_t dim = 0;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const { return ids.size(); }
    [[nodiscard]] std::span<const double> point(std::size_t i) const { return {values.data() + i * dim, dim}; }

    static PointSet from_table(const StepEmbeddingTable& table, const std::vector<std::string>& ids);
};

/// Per-cluster arithmetic means, indexed by cluster id. Throws LookupError
/// when an item of the clustering has no vector.
std::vector<std::vector<double>> centroids(const Clustering& c, const PointSet& points);

struct KMeansOptions {
    std::size_t max_iter = 300;
    double tol = 1e-6;
};

struct KMeansResult {
    Clustering clustering;
    std::vector<std::vector<double>> centroids;
    std::size_t iterations = 0;
    bool converged = false;
    /// Sum of squared distances to the assigned centroid after each iteration.
    std::vector<double> objective;
};

/// Lloyd's algorithm from the given centroids. Points go to the nearest
/// centroid (lowest index on ties); an emptied cluster is reseeded with the
/// point farthest from its centroid. Stops when no assignment changes, the
/// largest centroid shift is below tol, or after max_iter iterations.
/// Throws ConfigError if k exceeds the number of points or the initial
/// centroids are not distinct or of the wrong dimension.
KMeansResult kmeans(const PointSet& points, const std::vector<std::vector<double>>& init,
                    const KMeansOptions& options = {});

/// K-means seeded with the centroids of an HAC cut. Empty steps (if given)
/// are kept out of the point set and returned as singleton clusters.
/// Duplicate seed centroids are collapsed, so the result may have fewer
/// than k clusters.
Clustering kmeans_from_hac(const PointSet& points, const std::vector<Merge>& merges, std::size_t k,
                           const KMeansOptions& options = {}, const std::vector<std::string>& empty_ids = {});

// ---------------------------------------------------------------------------
// Cluster-count sweep

struct SweepGrid {
    std::size_t k_min = 50;
    std::size_t k_max = 15000;
    std::size_t k_step = 50;
};

struct SweepPoint {
    std::size_t k = 0;
    double f_score = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> evaluated;  // strictly increasing k
    std::size_t best_k = 0;
    double best_f = 0.0;
};

/// Evaluates builder(k) for every grid k <= n_items against the ground
/// truth and keeps the best F-score (smallest k on ties). Builders may run
/// on several threads; results do not depend on the thread count.
SweepResult sweep_k(const std::function<Clustering(std::size_t)>& builder, std::size_t n_items, const GroundTruth& gt,
                    const SweepGrid& grid = {}, std::size_t threads = 1);

/// CSV with header `k,f_score`.
std::string serialize_sweep_csv(const SweepResult& r);
/// {"best_k": ..., "best_f": ...}
std::string serialize_sweep_summary(const SweepResult& r);

// ---------------------------------------------------------------------------
// Ensemble and baselines

/// Co-clusters two items when at least `quorum` input clusterings do, then
/// returns the connected components of that vote graph. Inputs must cover
/// the same item set (order may differ); the output follows the first
/// input's item order.
Clustering ensemble_majority(const std::vector<Clustering>& clusterings, std::size_t quorum = 3);

/// Steps with identical preprocessed token lists share a cluster. Empty
/// steps share a cluster only with byte-identical empty steps.
Clustering baseline_exact(const std::vector<TestStep>& steps);

/// Connected components of the graph with an edge wherever the WMD matrix
/// entry is <= 1e-9.
Clustering baseline_wmd_zero(const DistanceMatrix& dm);

/// Connected components over n items given an edge list.
std::vector<int> connected_components(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

}  // namespace tcsim
