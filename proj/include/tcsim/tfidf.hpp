#pragma once

#include <string>
#include <vector>

#include "tcsim/corpus.hpp"
#include "tcsim/embedding.hpp"

namespace tcsim {

/// Sentence vectors over the step vocabulary (sorted lexicographically).
/// Weight of word w in step s is count(w, s) * (ln((1 + N) / (1 + df(w))) + 1),
/// with N the number of steps and df(w) the number of steps containing w.
/// Non-empty step vectors are L2-normalized; empty steps get the zero vector.
/// Throws ConfigError when no step has any token.
StepEmbeddingTable fit_tfidf(const std::vector<TestStep>& steps);

/// Vocabulary used by fit_tfidf, in column order.
std::vector<std::string> tfidf_vocabulary(const std::vector<TestStep>& steps);

}  // namespace tcsim
