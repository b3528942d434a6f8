#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tcsim/corpus.hpp"

namespace tcsim {

enum class Provenance { trained, pretrained, mixed };

std::string_view provenance_name(Provenance p);

/// Word -> dense float vector map. Insertion order is preserved and defines
/// word indices.
class WordEmbeddingTable {
public:
    explicit WordEmbeddingTable(std::size_t dim, Provenance provenance = Provenance::trained);

    /// Throws ValidationError on a dimension mismatch, a non-finite entry or
    /// a duplicate word.
    void add(std::string word, std::span<const float> vector);

    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] std::size_t size() const { return words_.size(); }
    [[nodiscard]] bool contains(std::string_view word) const;
    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view word) const;
    [[nodiscard]] const std::string& word(std::size_t index) const { return words_[index]; }
    [[nodiscard]] const std::vector<std::string>& words() const { return words_; }

    [[nodiscard]] std::span<const float> vector(std::size_t index) const;
    std::span<float> mutable_vector(std::size_t index);
    /// Throws LookupError naming the word.
    [[nodiscard]] std::span<const float> at(std::string_view word) const;

    [[nodiscard]] Provenance provenance() const { return provenance_; }
    void set_provenance(Provenance p) { provenance_ = p; }

    /// Bitwise comparison of dims, words (in order) and vector payloads.
    friend bool operator==(const WordEmbeddingTable& a, const WordEmbeddingTable& b);

private:
    std::size_t dim_;
    Provenance provenance_;
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<float> data_;
};

/// Item id (step id or case id) -> dense vector.
class StepEmbeddingTable {
public:
    explicit StepEmbeddingTable(std::size_t dim, std::string backend_tag = {});

    void add(std::string id, std::vector<double> vector);

    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] std::size_t size() const { return ids_.size(); }
    [[nodiscard]] const std::string& backend_tag() const { return backend_tag_; }
    void set_backend_tag(std::string tag) { backend_tag_ = std::move(tag); }
    [[nodiscard]] const std::vector<std::string>& ids() const { return ids_; }
    [[nodiscard]] bool contains(std::string_view id) const;
    /// Throws LookupError for an unknown id.
    [[nodiscard]] std::span<const double> at(std::string_view id) const;
    [[nodiscard]] std::span<const double> vector(std::size_t index) const;

    /// Throws LookupError listing every id in `ids` that has no vector.
    void require_coverage(const std::vector<std::string>& ids) const;

private:
    std::size_t dim_;
    std::string backend_tag_;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// word2vec binary format: "<count> <dim>\n", then per word the word bytes,
// a space, dim little-endian float32 values and an optional newline.

WordEmbeddingTable parse_word2vec_binary(std::string_view bytes);
WordEmbeddingTable load_word2vec_binary(const std::filesystem::path& path);
std::string serialize_word2vec_binary(const WordEmbeddingTable& table);
void save_word2vec_binary(const WordEmbeddingTable& table, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Embedding Exchange Format (EMBX): a header line `EMBX 1 <dim>` followed by
// `<id>\t<f1> <f2> ... <f_dim>` lines. Lines starting with '#' are comments.

StepEmbeddingTable parse_step_embeddings(std::string_view text, std::string backend_tag = "external");
StepEmbeddingTable load_step_embeddings(const std::filesystem::path& path, std::string backend_tag = "external");
/// Shortest round-trip decimal representation of every value.
std::string serialize_step_embeddings(const StepEmbeddingTable& table);
void save_step_embeddings(const StepEmbeddingTable& table, const std::filesystem::path& path);

// ---------------------------------------------------------------------------

/// Arithmetic mean of the token vectors; empty input gives the zero vector.
/// Throws LookupError naming the first token missing from the table.
std::vector<double> pool_mean(std::span<const std::string> tokens, const WordEmbeddingTable& words);
std::vector<double> pool_mean(const TestStep& step, const WordEmbeddingTable& words);

/// Pooled vectors for every step, keyed by step id.
StepEmbeddingTable pool_steps(const std::vector<TestStep>& steps, const WordEmbeddingTable& words);

}  // namespace tcsim
