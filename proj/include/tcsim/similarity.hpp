#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tcsim/corpus.hpp"
#include "tcsim/embedding.hpp"

namespace tcsim {

/// Normalized bag of words over word indices of a WordEmbeddingTable.
struct NBow {
    std::vector<std::size_t> words;  // distinct, ascending
    std::vector<double> weights;     // count / |tokens|, parallel to words

    friend bool operator==(const NBow&, const NBow&) = default;
};

/// Throws ValidationError for an empty token list and LookupError for a
/// token missing from the table.
NBow nbow(std::span<const std::string> tokens, const WordEmbeddingTable& words);
NBow nbow(const TestStep& step, const WordEmbeddingTable& words);

/// Word Mover's Distance: optimal transport between the two bags with
/// Euclidean distances between word vectors as ground cost. Exact.
double wmd(const NBow& a, const NBow& b, const WordEmbeddingTable& words);

/// Relaxed WMD lower bound: the larger of the two one-sided relaxations.
double rwmd(const NBow& a, const NBow& b, const WordEmbeddingTable& words);

double euclidean(std::span<const float> a, std::span<const float> b);
double euclidean(std::span<const double> a, std::span<const double> b);

/// u.v / (|u| |v|), or 0 when either vector is zero. Throws ValidationError
/// on a dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

/// Symmetric item x item distance matrix with a zero diagonal, stored as a
/// dense row-major float32 array.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::vector<std::string> ids);

    [[nodiscard]] std::size_t size() const { return ids_.size(); }
    [[nodiscard]] const std::vector<std::string>& ids() const { return ids_; }
    [[nodiscard]] float operator()(std::size_t i, std::size_t j) const { return entries_[i * ids_.size() + j]; }
    /// Sets both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, float value);

    /// Checks symmetry, zero diagonal and finite non-negative entries.
    void validate() const;

    friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

private:
    std::vector<std::string> ids_;
    std::vector<float> entries_;
};

enum class StepMetric { wmd, rwmd, cosine_distance };

struct MatrixOptions {
    std::size_t max_items = 20000;
    std::size_t threads = 1;
    /// WMD/RWMD distance between an empty step and any other non-identical
    /// step. Negative means "twice the largest non-empty distance, or 1 if
    /// that is zero".
    double empty_penalty = -1.0;
};

/// WMD (or RWMD) matrix over word-level embeddings.
DistanceMatrix build_wmd_matrix(const std::vector<TestStep>& steps, const WordEmbeddingTable& words,
                                const MatrixOptions& options = {}, bool relaxed = false);

/// 1 - cosine over sentence vectors keyed by step id (clamped at 0).
/// Empty steps sit at distance 1 from everything but byte-identical empty
/// steps.
DistanceMatrix build_cosine_matrix(const std::vector<TestStep>& steps, const StepEmbeddingTable& vectors,
                                   const MatrixOptions& options = {});

/// Generic builder over n items: evaluates `distance(i, j)` on the upper
/// triangle (possibly on several threads) and mirrors it.
DistanceMatrix build_distance_matrix(std::vector<std::string> ids,
                                     const std::function<double(std::size_t, std::size_t)>& distance,
                                     const MatrixOptions& options = {});

/// Binary persistence: ASCII line `DMAT 1 <n>\n`, n ids as uint32 LE length
/// + UTF-8 bytes, then the n(n-1)/2 upper-triangle float32 LE values in row
/// order.
std::string serialize_distance_matrix(const DistanceMatrix& dm);
DistanceMatrix parse_distance_matrix(std::string_view bytes);
void save_distance_matrix(const DistanceMatrix& dm, const std::filesystem::path& path);
DistanceMatrix load_distance_matrix(const std::filesystem::path& path);

}  // namespace tcsim
