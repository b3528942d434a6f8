#include "tcsim/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include "tcsim/error.hpp"
#include "tcsim/io.hpp"

namespace tcsim {

CbowConfig Settings::cbow() const {
    CbowConfig c;
    c.dim = dim;
    c.window = window;
    c.negative_samples = negative_samples;
    c.epochs = epochs;
    c.initial_learning_rate = learning_rate;
    c.min_learning_rate = min_learning_rate;
    c.seed = seed;
    return c;
}

SweepGrid Settings::k_grid() const { return {k_min, k_max, k_step}; }

ThresholdGrid Settings::t_grid() const { return {t_min, t_max, t_step}; }

KMeansOptions Settings::kmeans() const { return {kmeans_max_iter, kmeans_tol}; }

MatrixOptions Settings::matrix() const {
    MatrixOptions m;
    m.max_items = max_items;
    m.threads = threads;
    m.empty_penalty = empty_penalty;
    return m;
}

PreprocessConfig Settings::preprocess() const {
    auto cfg = PreprocessConfig::defaults();
    cfg.prune_singletons = prune_singletons;
    cfg.lemmatize_verbs = lemmatize_verbs;
    cfg.drop_numbers = drop_numbers;
    if (!stopwords_file.empty()) cfg.stopword_list = load_stopwords(stopwords_file);
    if (!misspelling_file.empty()) cfg.misspelling_map = load_misspelling_map(misspelling_file);
    validate_preprocess_config(cfg);
    return cfg;
}

double Settings::threshold_for(Technique t) const {
    switch (t) {
        case Technique::overlap: return threshold_overlap;
        case Technique::jaccard: return threshold_jaccard;
        case Technique::cosine_counts: return threshold_cosine;
        case Technique::combined: return threshold_combined;
        default: return 1.0;
    }
}

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::size_t to_size(std::string_view key, std::string_view v) {
    std::size_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || v.empty())
        throw ConfigError("setting '" + std::string(key) + "': expected a non-negative integer, got '" +
                          std::string(v) + "'");
    return out;
}

double to_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || v.empty() || !std::isfinite(out))
        throw ConfigError("setting '" + std::string(key) + "': expected a number, got '" + std::string(v) + "'");
    return out;
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("setting '" + std::string(key) + "': expected true or false, got '" + std::string(v) + "'");
}

std::string format_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, p);
}

using Setter = std::function<void(Settings&, std::string_view, std::string_view, const std::filesystem::path&)>;

template <typename T>
Setter size_field(T Settings::*field) {
    return [field](Settings& s, std::string_view k, std::string_view v, const std::filesystem::path&) {
        s.*field = static_cast<T>(to_size(k, v));
    };
}

Setter double_field(double Settings::*field) {
    return [field](Settings& s, std::string_view k, std::string_view v, const std::filesystem::path&) {
        s.*field = to_double(k, v);
    };
}

Setter bool_field(bool Settings::*field) {
    return [field](Settings& s, std::string_view k, std::string_view v, const std::filesystem::path&) {
        s.*field = to_bool(k, v);
    };
}

Setter path_field(std::filesystem::path Settings::*field) {
    return [field](Settings& s, std::string_view, std::string_view v, const std::filesystem::path& base) {
        if (v.empty()) {
            s.*field = std::filesystem::path{};
            return;
        }
        std::filesystem::path p{std::string(v)};
        s.*field = p.is_absolute() || base.empty() ? p : base / p;
    };
}

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"seed", size_field(&Settings::seed)},
        {"threads", size_field(&Settings::threads)},
        {"preprocess.prune_singletons", bool_field(&Settings::prune_singletons)},
        {"preprocess.lemmatize_verbs", bool_field(&Settings::lemmatize_verbs)},
        {"preprocess.drop_numbers", bool_field(&Settings::drop_numbers)},
        {"preprocess.stopwords", path_field(&Settings::stopwords_file)},
        {"preprocess.misspellings", path_field(&Settings::misspelling_file)},
        {"word2vec.dim", size_field(&Settings::dim)},
        {"word2vec.window", size_field(&Settings::window)},
        {"word2vec.negative_samples", size_field(&Settings::negative_samples)},
        {"word2vec.epochs", size_field(&Settings::epochs)},
        {"word2vec.learning_rate", double_field(&Settings::learning_rate)},
        {"word2vec.min_learning_rate", double_field(&Settings::min_learning_rate)},
        {"matrix.max_items", size_field(&Settings::max_items)},
        {"matrix.empty_penalty", double_field(&Settings::empty_penalty)},
        {"matrix.relaxed_wmd", bool_field(&Settings::relaxed_wmd)},
        {"cluster.k_min", size_field(&Settings::k_min)},
        {"cluster.k_max", size_field(&Settings::k_max)},
        {"cluster.k_step", size_field(&Settings::k_step)},
        {"cluster.quorum", size_field(&Settings::quorum)},
        {"kmeans.max_iter", size_field(&Settings::kmeans_max_iter)},
        {"kmeans.tol", double_field(&Settings::kmeans_tol)},
        {"cases.threshold.overlap", double_field(&Settings::threshold_overlap)},
        {"cases.threshold.jaccard", double_field(&Settings::threshold_jaccard)},
        {"cases.threshold.cosine", double_field(&Settings::threshold_cosine)},
        {"cases.threshold.combined", double_field(&Settings::threshold_combined)},
        {"cases.w_name", double_field(&Settings::w_name)},
        {"cases.name_mode",
         [](Settings& s, std::string_view k, std::string_view v, const std::filesystem::path&) {
             if (v == "wmd")
                 s.name_mode = NameMode::wmd;
             else if (v == "pooled_cosine")
                 s.name_mode = NameMode::pooled_cosine;
             else
                 throw ConfigError("setting '" + std::string(k) + "': expected wmd or pooled_cosine");
         }},
        {"cases.t_min", double_field(&Settings::t_min)},
        {"cases.t_max", double_field(&Settings::t_max)},
        {"cases.t_step", double_field(&Settings::t_step)},
    };
    return table;
}

}  // namespace

void apply_setting(Settings& s, std::string_view key, std::string_view value, const std::filesystem::path& base_dir) {
    auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown setting '" + std::string(key) + "'");
    it->second(s, key, value, base_dir);
}

Settings parse_settings(std::string_view text, const std::filesystem::path& base_dir) {
    Settings s;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto content = trim(line);
        if (content.empty()) {
            if (end == text.size()) break;
            continue;
        }
        auto eq = content.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        try {
            apply_setting(s, trim(content.substr(0, eq)), trim(content.substr(eq + 1)), base_dir);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
        if (end == text.size()) break;
    }
    return s;
}

Settings load_settings(const std::filesystem::path& path) {
    return parse_settings(io::read_file(path), path.parent_path());
}

std::map<std::string, std::string> settings_map(const Settings& s) {
    auto b = [](bool v) { return std::string(v ? "true" : "false"); };
    return {
        {"seed", std::to_string(s.seed)},
        {"threads", std::to_string(s.threads)},
        {"preprocess.prune_singletons", b(s.prune_singletons)},
        {"preprocess.lemmatize_verbs", b(s.lemmatize_verbs)},
        {"preprocess.drop_numbers", b(s.drop_numbers)},
        {"preprocess.stopwords", s.stopwords_file.string()},
        {"preprocess.misspellings", s.misspelling_file.string()},
        {"word2vec.dim", std::to_string(s.dim)},
        {"word2vec.window", std::to_string(s.window)},
        {"word2vec.negative_samples", std::to_string(s.negative_samples)},
        {"word2vec.epochs", std::to_string(s.epochs)},
        {"word2vec.learning_rate", format_double(s.learning_rate)},
        {"word2vec.min_learning_rate", format_double(s.min_learning_rate)},
        {"matrix.max_items", std::to_string(s.max_items)},
        {"matrix.empty_penalty", format_double(s.empty_penalty)},
        {"matrix.relaxed_wmd", b(s.relaxed_wmd)},
        {"cluster.k_min", std::to_string(s.k_min)},
        {"cluster.k_max", std::to_string(s.k_max)},
        {"cluster.k_step", std::to_string(s.k_step)},
        {"cluster.quorum", std::to_string(s.quorum)},
        {"kmeans.max_iter", std::to_string(s.kmeans_max_iter)},
        {"kmeans.tol", format_double(s.kmeans_tol)},
        {"cases.threshold.overlap", format_double(s.threshold_overlap)},
        {"cases.threshold.jaccard", format_double(s.threshold_jaccard)},
        {"cases.threshold.cosine", format_double(s.threshold_cosine)},
        {"cases.threshold.combined", format_double(s.threshold_combined)},
        {"cases.w_name", format_double(s.w_name)},
        {"cases.name_mode", s.name_mode == NameMode::wmd ? "wmd" : "pooled_cosine"},
        {"cases.t_min", format_double(s.t_min)},
        {"cases.t_max", format_double(s.t_max)},
        {"cases.t_step", format_double(s.t_step)},
    };
}

std::string serialize_settings(const Settings& s) {
    std::ostringstream out;
    for (const auto& [k, v] : settings_map(s)) out << k << " = " << v << "\n";
    return out.str();
}

}  // namespace tcsim
