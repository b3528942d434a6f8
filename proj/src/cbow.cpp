#include "tcsim/cbow.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "tcsim/error.hpp"
#include "tcsim/random.hpp"

namespace tcsim {

void validate_cbow_config(const CbowConfig& cfg) {
    if (cfg.dim == 0) throw ConfigError("cbow: dim must be positive");
    if (cfg.window < 1) throw ConfigError("cbow: window must be at least 1");
    if (!(cfg.initial_learning_rate > 0.0) || !(cfg.min_learning_rate >= 0.0) ||
        cfg.min_learning_rate > cfg.initial_learning_rate)
        throw ConfigError("cbow: need 0 <= min_learning_rate <= initial_learning_rate, initial > 0");
    if (cfg.min_count < 1) throw ConfigError("cbow: min_count must be at least 1");
}

namespace {

constexpr double kUnigramPower = 0.75;
constexpr float kMaxExp = 6.0f;

struct Vocabulary {
    std::vector<std::string> words;
    std::vector<std::size_t> counts;
    std::unordered_map<std::string, std::size_t> index;
};

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& sentences, std::size_t min_count) {
    std::map<std::string, std::size_t> freq;
    for (const auto& s : sentences)
        for (const auto& w : s) ++freq[w];
    std::vector<std::pair<std::string, std::size_t>> entries;
    for (auto& [w, c] : freq)
        if (c >= min_count) entries.emplace_back(w, c);
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocabulary v;
    for (auto& [w, c] : entries) {
        v.index.emplace(w, v.words.size());
        v.words.push_back(w);
        v.counts.push_back(c);
    }
    return v;
}

/// Samples word indices proportionally to count^0.75.
class NoiseDistribution {
public:
    explicit NoiseDistribution(const std::vector<std::size_t>& counts) {
        cumulative_.reserve(counts.size());
        double total = 0.0;
        for (auto c : counts) {
            total += std::pow(static_cast<double>(c), kUnigramPower);
            cumulative_.push_back(total);
        }
        for (auto& x : cumulative_) x /= total;
    }

    std::size_t sample(Rng& rng) const {
        double u = rng.uniform();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) --it;
        return static_cast<std::size_t>(it - cumulative_.begin());
    }

private:
    std::vector<double> cumulative_;
};

}  // namespace

WordEmbeddingTable train_cbow(const std::vector<std::vector<std::string>>& sentences, const CbowConfig& cfg,
                              const WordEmbeddingTable* init) {
    validate_cbow_config(cfg);
    if (init && init->dim() != cfg.dim)
        throw ConfigError("cbow: initial table has dim " + std::to_string(init->dim()) + ", config dim is " +
                          std::to_string(cfg.dim));

    Vocabulary vocab = build_vocabulary(sentences, cfg.min_count);
    const std::size_t V = vocab.words.size();
    if (V < cfg.negative_samples + 1)
        throw ConfigError("cbow: vocabulary of " + std::to_string(V) + " words is smaller than negative_samples + 1 = " +
                          std::to_string(cfg.negative_samples + 1));

    const std::size_t dim = cfg.dim;
    Rng rng(cfg.seed);
    std::vector<float> input(V * dim);
    std::vector<float> output(V * dim, 0.0f);
    std::size_t covered = 0;
    for (std::size_t w = 0; w < V; ++w) {
        float* row = input.data() + w * dim;
        std::optional<std::size_t> src = init ? init->index_of(vocab.words[w]) : std::nullopt;
        if (src) {
            auto v = init->vector(*src);
            std::copy(v.begin(), v.end(), row);
            ++covered;
        } else {
            for (std::size_t j = 0; j < dim; ++j)
                row[j] = static_cast<float>((rng.uniform() - 0.5) / static_cast<double>(dim));
        }
    }

    // Sentences as index lists; out-of-vocabulary words (below min_count) are dropped.
    std::vector<std::vector<std::size_t>> corpus;
    std::size_t total_tokens = 0;
    for (const auto& s : sentences) {
        std::vector<std::size_t> ids;
        for (const auto& w : s)
            if (auto it = vocab.index.find(w); it != vocab.index.end()) ids.push_back(it->second);
        total_tokens += ids.size();
        corpus.push_back(std::move(ids));
    }

    NoiseDistribution noise(vocab.counts);
    const double total_work = static_cast<double>(total_tokens * cfg.epochs);
    std::size_t processed = 0;
    std::vector<float> hidden(dim);
    std::vector<float> grad(dim);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const auto& sent : corpus) {
            for (std::size_t pos = 0; pos < sent.size(); ++pos, ++processed) {
                double lr = cfg.initial_learning_rate -
                            (cfg.initial_learning_rate - cfg.min_learning_rate) * static_cast<double>(processed) / total_work;
                lr = std::max(lr, cfg.min_learning_rate);

                std::size_t lo = pos >= cfg.window ? pos - cfg.window : 0;
                std::size_t hi = std::min(sent.size() - 1, pos + cfg.window);
                std::size_t context = 0;
                std::fill(hidden.begin(), hidden.end(), 0.0f);
                for (std::size_t c = lo; c <= hi; ++c) {
                    if (c == pos) continue;
                    const float* row = input.data() + sent[c] * dim;
                    for (std::size_t j = 0; j < dim; ++j) hidden[j] += row[j];
                    ++context;
                }
                if (context == 0) continue;
                for (auto& h : hidden) h /= static_cast<float>(context);
                std::fill(grad.begin(), grad.end(), 0.0f);

                const std::size_t target = sent[pos];
                for (std::size_t d = 0; d <= cfg.negative_samples; ++d) {
                    std::size_t word = target;
                    float label = 1.0f;
                    if (d > 0) {
                        word = noise.sample(rng);
                        if (word == target) continue;
                        label = 0.0f;
                    }
                    float* out = output.data() + word * dim;
                    float f = 0.0f;
                    for (std::size_t j = 0; j < dim; ++j) f += hidden[j] * out[j];
                    float g;
                    if (f > kMaxExp)
                        g = (label - 1.0f) * static_cast<float>(lr);
                    else if (f < -kMaxExp)
                        g = label * static_cast<float>(lr);
                    else
                        g = (label - 1.0f / (1.0f + std::exp(-f))) * static_cast<float>(lr);
                    for (std::size_t j = 0; j < dim; ++j) grad[j] += g * out[j];
                    for (std::size_t j = 0; j < dim; ++j) out[j] += g * hidden[j];
                }
                for (std::size_t c = lo; c <= hi; ++c) {
                    if (c == pos) continue;
                    float* row = input.data() + sent[c] * dim;
                    for (std::size_t j = 0; j < dim; ++j) row[j] += grad[j];
                }
            }
        }
    }

    Provenance prov = Provenance::trained;
    if (covered == V && cfg.epochs == 0)
        prov = init->provenance();
    else if (covered > 0)
        prov = Provenance::mixed;
    WordEmbeddingTable table(dim, prov);
    for (std::size_t w = 0; w < V; ++w)
        table.add(vocab.words[w], std::span<const float>(input.data() + w * dim, dim));
    return table;
}

WordEmbeddingTable init_with_pretrained(const std::set<std::string>& vocab, const WordEmbeddingTable& pretrained,
                                        std::uint64_t seed) {
    const std::size_t dim = pretrained.dim();
    std::vector<const std::string*> oov;
    std::vector<double> mean(dim, 0.0);
    std::size_t covered = 0;
    for (const auto& w : vocab) {
        if (auto idx = pretrained.index_of(w)) {
            auto v = pretrained.vector(*idx);
            for (std::size_t j = 0; j < dim; ++j) mean[j] += v[j];
            ++covered;
        } else {
            oov.push_back(&w);
        }
    }
    if (covered == 0) throw LookupError("init_with_pretrained: no vocabulary word is present in the pretrained table");
    for (auto& m : mean) m /= static_cast<double>(covered);

    std::vector<double> stddev(dim, 0.0);
    for (const auto& w : vocab) {
        if (auto idx = pretrained.index_of(w)) {
            auto v = pretrained.vector(*idx);
            for (std::size_t j = 0; j < dim; ++j) stddev[j] += (v[j] - mean[j]) * (v[j] - mean[j]);
        }
    }
    for (auto& s : stddev) s = std::sqrt(s / static_cast<double>(covered));

    // OOV rows are drawn in vocabulary (sorted) order, component by component.
    Rng rng(seed);
    std::unordered_map<const std::string*, std::vector<float>> drawn;
    for (const auto* w : oov) {
        std::vector<float> v(dim);
        for (std::size_t j = 0; j < dim; ++j) v[j] = static_cast<float>(mean[j] + stddev[j] * rng.normal());
        drawn.emplace(w, std::move(v));
    }

    WordEmbeddingTable table(dim, oov.empty() ? Provenance::pretrained : Provenance::mixed);
    for (const auto& w : vocab) {
        if (auto idx = pretrained.index_of(w))
            table.add(w, pretrained.vector(*idx));
        else
            table.add(w, drawn.at(&w));
    }
    return table;
}

}  // namespace tcsim
