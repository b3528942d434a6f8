#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "tcsim/embedding.hpp"

namespace tcsim {

/// Word2Vec continuous bag-of-words with negative sampling.
struct CbowConfig {
    std::size_t dim = 300;
    std::size_t window = 2;  // context words on each side
    std::size_t negative_samples = 5;
    std::size_t epochs = 15;
    double initial_learning_rate = 0.025;
    double min_learning_rate = 1e-4;
    std::size_t min_count = 1;
    std::uint64_t seed = 1;
};

void validate_cbow_config(const CbowConfig& cfg);

/// Trains one vector per vocabulary word. The context of a position is the
/// mean of the input vectors of up to `window` words on each side; the
/// target and `negative_samples` noise words drawn from the unigram^0.75
/// distribution are scored with a logistic loss. The learning rate decays
/// linearly over all epochs. Words present in `init` start from its vectors,
/// others from uniform(-0.5, 0.5) / dim. Single-threaded and deterministic
/// for a fixed seed.
///
/// Vocabulary order: descending frequency, ties broken alphabetically.
WordEmbeddingTable train_cbow(const std::vector<std::vector<std::string>>& sentences, const CbowConfig& cfg,
                              const WordEmbeddingTable* init = nullptr);

/// Copies vectors of `vocab` words found in `pretrained` and draws each
/// component j of the remaining words from Normal(mean_j, std_j), where the
/// moments are taken over the copied vectors. Throws LookupError when no
/// vocabulary word is covered.
WordEmbeddingTable init_with_pretrained(const std::set<std::string>& vocab, const WordEmbeddingTable& pretrained,
                                        std::uint64_t seed);

}  // namespace tcsim
