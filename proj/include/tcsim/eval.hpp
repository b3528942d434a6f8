#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace tcsim {

class Clustering;

/// Human labels for a sampled subset of items.
class GroundTruth {
public:
    GroundTruth() = default;
    /// Throws ValidationError on duplicate item ids.
    GroundTruth(std::vector<std::string> items, std::vector<std::string> labels);

    [[nodiscard]] std::size_t size() const { return items_.size(); }
    [[nodiscard]] bool empty() const { return items_.empty(); }
    [[nodiscard]] const std::vector<std::string>& items() const { return items_; }
    [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
    [[nodiscard]] const std::string& label_of(std::size_t i) const { return labels_[i]; }

private:
    std::vector<std::string> items_;
    std::vector<std::string> labels_;
};

/// CSV with header `item_id,label`.
GroundTruth parse_ground_truth(std::string_view text);
GroundTruth load_ground_truth(const std::filesystem::path& path);
std::string serialize_ground_truth(const GroundTruth& gt);

struct PairwiseConfusion {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    [[nodiscard]] std::uint64_t total() const { return tp + fp + tn + fn; }
    [[nodiscard]] double precision() const;
    [[nodiscard]] double recall() const;
    friend bool operator==(const PairwiseConfusion&, const PairwiseConfusion&) = default;
};

/// Counts over all unordered pairs of labeled items. Items of the clustering
/// without a label are ignored; labeled items missing from the clustering
/// raise a LookupError listing them. Runs in time linear in the number of
/// labeled items.
PairwiseConfusion confusion(const Clustering& predicted, const GroundTruth& gt);

/// Same counts for an arbitrary pair predicate over ground-truth item
/// indices (i < j). Quadratic.
PairwiseConfusion confusion(const std::function<bool(std::size_t, std::size_t)>& flagged, const GroundTruth& gt);

/// Harmonic mean of pairwise precision and recall; 0 whenever a quotient
/// is undefined.
double f_score(const PairwiseConfusion& c);

/// {"tp", "fp", "tn", "fn", "precision", "recall", "f_score"}
std::string evaluation_json(const PairwiseConfusion& c);

}  // namespace tcsim
