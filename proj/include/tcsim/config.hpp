#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "tcsim/casesim.hpp"
#include "tcsim/cbow.hpp"
#include "tcsim/clustering.hpp"
#include "tcsim/corpus.hpp"
#include "tcsim/similarity.hpp"

namespace tcsim {

/// Every tunable of the pipeline. Defaults are the values shipped in
/// config/default.conf.
struct Settings {
    std::uint64_t seed = 1;
    std::size_t threads = 1;

    // preprocessing
    bool prune_singletons = true;
    bool lemmatize_verbs = false;
    bool drop_numbers = true;
    std::filesystem::path stopwords_file;    // empty: built-in list
    std::filesystem::path misspelling_file;  // empty: no corrections

    // word2vec
    std::size_t dim = 300;
    std::size_t window = 2;
    std::size_t negative_samples = 5;
    std::size_t epochs = 15;
    double learning_rate = 0.025;
    double min_learning_rate = 1e-4;

    // distance matrices
    std::size_t max_items = 20000;
    double empty_penalty = -1.0;  // negative: automatic
    bool relaxed_wmd = false;

    // step clustering
    std::size_t k_min = 50;
    std::size_t k_max = 15000;
    std::size_t k_step = 50;
    std::size_t quorum = 3;
    std::size_t kmeans_max_iter = 300;
    double kmeans_tol = 1e-6;

    // case similarity
    double threshold_overlap = 0.70;
    double threshold_jaccard = 0.60;
    double threshold_cosine = 0.85;
    double threshold_combined = 0.75;
    double w_name = 0.5;
    NameMode name_mode = NameMode::wmd;
    double t_min = 0.1;
    double t_max = 1.0;
    double t_step = 0.05;

    [[nodiscard]] CbowConfig cbow() const;
    [[nodiscard]] SweepGrid k_grid() const;
    [[nodiscard]] ThresholdGrid t_grid() const;
    [[nodiscard]] KMeansOptions kmeans() const;
    [[nodiscard]] MatrixOptions matrix() const;
    /// Loads the stopword and misspelling files when set.
    [[nodiscard]] PreprocessConfig preprocess() const;
    /// Default threshold of a technique (1 for the baselines).
    [[nodiscard]] double threshold_for(Technique t) const;
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys and
/// malformed values raise ConfigError naming the line. Relative file paths
/// are resolved against `base_dir`.
Settings parse_settings(std::string_view text, const std::filesystem::path& base_dir = {});
Settings load_settings(const std::filesystem::path& path);

/// Applies one assignment; throws ConfigError for an unknown key or bad value.
void apply_setting(Settings& s, std::string_view key, std::string_view value,
                   const std::filesystem::path& base_dir = {});

/// Canonical key -> value text for every setting, sorted by key. Used for
/// hashing and for `config/default.conf`.
std::map<std::string, std::string> settings_map(const Settings& s);
std::string serialize_settings(const Settings& s);

}  // namespace tcsim
