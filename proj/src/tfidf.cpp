#include "tcsim/tfidf.hpp"

#include <cmath>
#include <map>
#include <set>

#include "tcsim/error.hpp"

namespace tcsim {

std::vector<std::string> tfidf_vocabulary(const std::vector<TestStep>& steps) {
    std::set<std::string> vocab;
    for (const auto& s : steps) vocab.insert(s.tokens.begin(), s.tokens.end());
    return {vocab.begin(), vocab.end()};
}

StepEmbeddingTable fit_tfidf(const std::vector<TestStep>& steps) {
    auto vocab = tfidf_vocabulary(steps);
    if (vocab.empty()) throw ConfigError("tf-idf: empty vocabulary (every step is empty after preprocessing)");

    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < vocab.size(); ++i) column.emplace(vocab[i], i);

    std::vector<std::size_t> df(vocab.size(), 0);
    for (const auto& s : steps) {
        std::set<std::string_view> seen(s.tokens.begin(), s.tokens.end());
        for (auto w : seen) ++df[column.at(std::string(w))];
    }
    const double n = static_cast<double>(steps.size());
    std::vector<double> idf(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i)
        idf[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[i]))) + 1.0;

    StepEmbeddingTable table(vocab.size(), "tfidf");
    for (const auto& s : steps) {
        std::vector<double> v(vocab.size(), 0.0);
        for (const auto& t : s.tokens) v[column.at(t)] += 1.0;
        double norm = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] *= idf[i];
            norm += v[i] * v[i];
        }
        if (norm > 0.0) {
            norm = std::sqrt(norm);
            for (auto& x : v) x /= norm;
        }
        table.add(s.step_id, std::move(v));
    }
    return table;
}

}  // namespace tcsim
