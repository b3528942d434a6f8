#include "tcsim/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "tcsim/csv.hpp"
#include "tcsim/error.hpp"
#include "tcsim/io.hpp"

namespace tcsim {

namespace {

using nlohmann::json;

bool is_ascii_alnum(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_word_byte(unsigned char c) { return c >= 0x80 || is_ascii_alnum(c); }

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string plural_to_singular(std::string_view w) {
    std::string word(w);
    if (word.size() <= 3 || !ends_with(word, "s")) return word;
    if (ends_with(word, "ss") || ends_with(word, "us") || ends_with(word, "is")) return word;
    if (ends_with(word, "ies")) {
        if (word.size() > 4) return word.substr(0, word.size() - 3) + "y";
        return word.substr(0, word.size() - 1);
    }
    if (ends_with(word, "sses") || ends_with(word, "xes") || ends_with(word, "ches") || ends_with(word, "shes") ||
        ends_with(word, "zzes"))
        return word.substr(0, word.size() - 2);
    return word.substr(0, word.size() - 1);
}

// Short consonant-vowel-consonant stems take back a final "e" (mak -> make).
bool is_short_cvc(std::string_view s) {
    if (s.size() != 3) return false;
    char last = s[2];
    return !is_vowel(s[0]) && is_vowel(s[1]) && !is_vowel(last) && last != 'w' && last != 'x' && last != 'y';
}

std::string restore_stem(std::string stem) {
    std::size_t n = stem.size();
    if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
        stem[n - 1] != 's' && stem[n - 1] != 'z') {
        stem.pop_back();
        return stem;
    }
    if (is_short_cvc(stem)) stem.push_back('e');
    return stem;
}

bool has_vowel(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return is_vowel(c) || c == 'y'; });
}

std::string strip_verb_suffix(const std::string& word) {
    if (ends_with(word, "ied") && word.size() > 4) return word.substr(0, word.size() - 3) + "y";
    if (ends_with(word, "ing") && word.size() >= 6) {
        std::string stem = word.substr(0, word.size() - 3);
        if (has_vowel(stem)) return restore_stem(std::move(stem));
    }
    if (ends_with(word, "ed") && word.size() >= 5) {
        std::string stem = word.substr(0, word.size() - 2);
        if (has_vowel(stem)) return restore_stem(std::move(stem));
    }
    return word;
}

RawTestCase case_from_json(const json& obj, std::size_t line) {
    auto fail = [line](const std::string& msg) {
        return ParseError("corpus jsonl: line " + std::to_string(line) + ": " + msg);
    };
    if (!obj.is_object()) throw fail("record is not an object");
    RawTestCase tc;
    auto id = obj.find("case_id");
    if (id == obj.end() || !id->is_string()) throw fail("missing string field case_id");
    tc.case_id = id->get<std::string>();
    auto name = obj.find("name");
    if (name == obj.end() || !name->is_string()) throw fail("missing string field name");
    tc.name = name->get<std::string>();
    if (auto type = obj.find("type"); type != obj.end() && !type->is_null()) {
        if (!type->is_string()) throw fail("field type must be a string or null");
        tc.case_type = type->get<std::string>();
    }
    auto steps = obj.find("steps");
    if (steps == obj.end() || !steps->is_array()) throw fail("missing array field steps");
    for (const auto& s : *steps) {
        if (!s.is_string()) throw fail("steps must contain strings");
        tc.steps.push_back(s.get<std::string>());
    }
    return tc;
}

}  // namespace

std::optional<CorpusFormat> parse_corpus_format(std::string_view name) {
    if (name == "jsonl") return CorpusFormat::jsonl;
    if (name == "csv") return CorpusFormat::csv;
    return std::nullopt;
}

std::optional<CorpusFormat> corpus_format_from_path(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".jsonl" || ext == ".json") return CorpusFormat::jsonl;
    if (ext == ".csv") return CorpusFormat::csv;
    return std::nullopt;
}

std::vector<RawTestCase> parse_corpus_jsonl(std::string_view text) {
    std::vector<RawTestCase> cases;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("corpus jsonl: line " + std::to_string(line_no) + ": " + e.what());
        }
        cases.push_back(case_from_json(obj, line_no));
    }
    validate_corpus(cases);
    return cases;
}

std::vector<RawTestCase> parse_corpus_csv(std::string_view text) {
    const std::vector<std::string> header{"case_id", "name", "type", "step_ordinal", "step_text"};
    auto rows = csv::parse(text);
    if (rows.empty()) return {};
    if (rows.front().fields != header) throw ParseError("corpus csv: line 1: expected header " + csv::join_row(header));

    std::vector<RawTestCase> cases;
    std::unordered_set<std::string> closed;  // case ids whose row group has ended
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto where = "corpus csv: line " + std::to_string(row.line) + ": ";
        if (row.fields.size() != header.size())
            throw ParseError(where + "expected 5 fields, got " + std::to_string(row.fields.size()));
        const auto& f = row.fields;
        int ordinal = 0;
        auto [ptr, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), ordinal);
        if (ec != std::errc{} || ptr != f[3].data() + f[3].size())
            throw ParseError(where + "step_ordinal is not an integer: '" + f[3] + "'");

        if (cases.empty() || cases.back().case_id != f[0]) {
            if (!cases.empty()) closed.insert(cases.back().case_id);
            if (closed.count(f[0]))
                throw ValidationError(where + "duplicate case_id '" + f[0] + "' (rows must be grouped by case)");
            RawTestCase tc;
            tc.case_id = f[0];
            tc.name = f[1];
            if (!f[2].empty()) tc.case_type = f[2];
            cases.push_back(std::move(tc));
        }
        auto& tc = cases.back();
        if (ordinal != static_cast<int>(tc.steps.size()) + 1)
            throw ParseError(where + "step_ordinal " + f[3] + " out of sequence for case '" + tc.case_id + "'");
        tc.steps.push_back(f[4]);
    }
    validate_corpus(cases);
    return cases;
}

std::vector<RawTestCase> load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    auto text = io::read_file(path);
    auto cases = format == CorpusFormat::jsonl ? parse_corpus_jsonl(text) : parse_corpus_csv(text);
    validate_corpus(cases);
    return cases;
}

void validate_corpus(const std::vector<RawTestCase>& cases) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& tc = cases[i];
        if (tc.case_id.empty()) throw ValidationError("record " + std::to_string(i + 1) + ": empty case_id");
        if (!seen.insert(tc.case_id).second) throw ValidationError("duplicate case_id '" + tc.case_id + "'");
        if (tc.steps.empty()) throw ValidationError("case '" + tc.case_id + "' has no steps");
    }
}

std::string make_step_id(std::string_view case_id, int ordinal) {
    return std::string(case_id) + "." + std::to_string(ordinal);
}

// ---------------------------------------------------------------------------

const std::set<std::string>& default_stopwords() {
    static const std::set<std::string> words{
        "i",       "me",      "my",         "myself",   "we",       "our",     "ours",   "ourselves", "you",
        "your",    "yours",   "yourself",   "yourselves", "he",     "him",     "his",    "himself",   "she",
        "her",     "hers",    "herself",    "it",       "its",      "itself",  "they",   "them",      "their",
        "theirs",  "themselves", "what",    "which",    "who",      "whom",    "this",   "that",      "these",
        "those",   "am",      "is",         "are",      "was",      "were",    "be",     "been",      "being",
        "have",    "has",     "had",        "having",   "do",       "does",    "did",    "doing",     "a",
        "an",      "the",     "and",        "but",      "if",       "or",      "because", "as",       "until",
        "while",   "of",      "at",         "by",       "for",      "with",    "about",  "against",   "between",
        "into",    "through", "during",     "before",   "after",    "above",   "below",  "to",        "from",
        "up",      "down",    "in",         "out",      "on",       "off",     "over",   "under",     "again",
        "further", "then",    "once",       "here",     "there",    "when",    "where",  "why",       "how",
        "all",     "any",     "both",       "each",     "few",      "more",    "most",   "other",     "some",
        "such",    "no",      "nor",        "not",      "only",     "own",     "same",   "so",        "than",
        "too",     "very",    "s",          "t",        "can",      "will",    "just",   "don",       "should",
        "now"};
    return words;
}

const std::map<std::string, std::string>& default_lemma_exceptions() {
    static const std::map<std::string, std::string> table{
        {"children", "child"}, {"men", "man"},         {"women", "woman"},     {"people", "person"},
        {"mice", "mouse"},     {"feet", "foot"},       {"teeth", "tooth"},     {"geese", "goose"},
        {"data", "data"},      {"news", "news"},       {"series", "series"},   {"species", "species"},
        {"lives", "life"},     {"leaves", "leaf"},     {"wolves", "wolf"},     {"knives", "knife"},
        {"wives", "wife"},     {"shelves", "shelf"},   {"halves", "half"},     {"heroes", "hero"},
        {"potatoes", "potato"}, {"gas", "gas"},        {"bus", "bus"},         {"status", "status"},
        {"caches", "cache"},   {"quizzes", "quiz"},
    };
    return table;
}

PreprocessConfig PreprocessConfig::defaults() {
    PreprocessConfig cfg;
    cfg.stopword_list = default_stopwords();
    cfg.lemma_exceptions = default_lemma_exceptions();
    return cfg;
}

void validate_preprocess_config(const PreprocessConfig& cfg) {
    std::map<std::string, std::string> map;
    for (const auto& [bad, good] : cfg.misspelling_map) {
        if (bad.empty()) throw ConfigError("misspelling map: empty misspelled word");
        if (bad == good) throw ConfigError("misspelling map: '" + bad + "' maps to itself");
        if (!map.emplace(bad, good).second) throw ConfigError("misspelling map: duplicate entry for '" + bad + "'");
    }
    for (const auto& [bad, good] : map) {
        std::set<std::string> visited{bad};
        std::string cur = good;
        while (map.count(cur)) {
            if (!visited.insert(cur).second) throw ConfigError("misspelling map: cycle through '" + bad + "'");
            cur = map.at(cur);
        }
    }
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
    auto text = io::read_file(path);
    std::set<std::string> words;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        line = line.substr(first);
        std::transform(line.begin(), line.end(), line.begin(), [](unsigned char c) { return std::tolower(c); });
        words.insert(line);
    }
    return words;
}

std::vector<std::pair<std::string, std::string>> load_misspelling_map(const std::filesystem::path& path) {
    auto rows = csv::read_with_header(path, {"misspelled", "fixed"});
    std::vector<std::pair<std::string, std::string>> out;
    for (auto& r : rows) {
        auto lower = [](std::string s) {
            std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
            return s;
        };
        out.emplace_back(lower(r.fields[0]), lower(r.fields[1]));
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (is_word_byte(c)) {
            cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::string lemmatize(std::string_view word, const PreprocessConfig& cfg) {
    if (auto it = cfg.lemma_exceptions.find(std::string(word)); it != cfg.lemma_exceptions.end()) return it->second;
    std::string lemma = plural_to_singular(word);
    if (cfg.lemmatize_verbs && lemma == word) lemma = strip_verb_suffix(lemma);
    return lemma;
}

TextNormalizer::TextNormalizer(const PreprocessConfig& cfg) : cfg_(cfg) {
    validate_preprocess_config(cfg_);
    std::map<std::string, std::string> direct(cfg_.misspelling_map.begin(), cfg_.misspelling_map.end());
    for (const auto& [bad, good] : direct) {
        std::string cur = good;
        while (direct.count(cur)) cur = direct.at(cur);
        fixes_.emplace(bad, cur);
    }
}

bool is_number_token(std::string_view token) {
    std::size_t i = 0;
    while (i < token.size() && token[i] >= '0' && token[i] <= '9') ++i;
    if (i == 0) return false;
    auto rest = token.substr(i);
    return rest.empty() || rest == "st" || rest == "nd" || rest == "rd" || rest == "th";
}

std::optional<std::string> TextNormalizer::normalize_token(std::string token) const {
    auto fix = [this](std::string& t) {
        if (auto it = fixes_.find(t); it != fixes_.end()) t = it->second;
    };
    fix(token);
    if (cfg_.stopword_list.count(token)) return std::nullopt;
    if (cfg_.drop_numbers && is_number_token(token)) return std::nullopt;
    std::string lemma = lemmatize(token, cfg_);
    if (lemma != token) {
        // The lemma is itself subject to the map and the stopword list.
        fix(lemma);
        if (lemma.empty() || cfg_.stopword_list.count(lemma)) return std::nullopt;
    }
    return lemma;
}

std::vector<std::string> TextNormalizer::operator()(std::string_view text) const {
    std::vector<std::string> out;
    for (auto& tok : tokenize(text)) {
        if (auto norm = normalize_token(std::move(tok))) out.push_back(std::move(*norm));
    }
    return out;
}

std::vector<TestStep> preprocess(const std::vector<RawTestCase>& corpus, const PreprocessConfig& cfg) {
    TextNormalizer normalize(cfg);
    std::vector<TestStep> steps;
    for (const auto& tc : corpus) {
        for (std::size_t i = 0; i < tc.steps.size(); ++i) {
            TestStep step;
            step.case_id = tc.case_id;
            step.ordinal = static_cast<int>(i) + 1;
            step.step_id = make_step_id(tc.case_id, step.ordinal);
            step.raw_text = tc.steps[i];
            step.tokens = normalize(step.raw_text);
            steps.push_back(std::move(step));
        }
    }
    if (cfg.prune_singletons) {
        std::unordered_map<std::string, std::size_t> freq;
        for (const auto& s : steps)
            for (const auto& t : s.tokens) ++freq[t];
        for (auto& s : steps) {
            std::erase_if(s.tokens, [&](const std::string& t) { return freq[t] == 1; });
        }
    }
    for (auto& s : steps) s.empty_after_preprocessing = s.tokens.empty();
    return steps;
}

std::size_t Corpus::vocabulary_size() const {
    std::unordered_set<std::string> vocab;
    for (const auto& s : steps) vocab.insert(s.tokens.begin(), s.tokens.end());
    return vocab.size();
}

std::size_t Corpus::empty_step_count() const {
    return static_cast<std::size_t>(
        std::count_if(steps.begin(), steps.end(), [](const TestStep& s) { return s.empty_after_preprocessing; }));
}

std::vector<std::string> Corpus::step_ids() const {
    std::vector<std::string> ids;
    ids.reserve(steps.size());
    for (const auto& s : steps) ids.push_back(s.step_id);
    return ids;
}

std::vector<std::string> Corpus::case_ids() const {
    std::vector<std::string> ids;
    ids.reserve(cases.size());
    for (const auto& c : cases) ids.push_back(c.raw.case_id);
    return ids;
}

Corpus prepare_corpus(std::vector<RawTestCase> cases, const PreprocessConfig& cfg) {
    validate_corpus(cases);
    Corpus corpus;
    corpus.steps = preprocess(cases, cfg);
    TextNormalizer normalize(cfg);
    std::size_t next = 0;
    for (auto& tc : cases) {
        CaseRecord rec;
        rec.name_tokens = normalize(tc.name);
        if (tc.case_type) rec.type_tokens = normalize(*tc.case_type);
        for (std::size_t i = 0; i < tc.steps.size(); ++i) rec.step_indices.push_back(next++);
        rec.raw = std::move(tc);
        corpus.cases.push_back(std::move(rec));
    }
    return corpus;
}

namespace {

std::vector<std::vector<std::string>> assemble_sentences(
    const std::vector<TestStep>& steps,
    const std::unordered_map<std::string, std::vector<std::string>>& prefix_by_case) {
    std::vector<std::vector<std::string>> sentences;
    sentences.reserve(steps.size());
    for (const auto& s : steps) {
        auto it = prefix_by_case.find(s.case_id);
        if (it == prefix_by_case.end()) throw LookupError("step '" + s.step_id + "' refers to unknown case '" + s.case_id + "'");
        std::vector<std::string> sentence = it->second;
        sentence.insert(sentence.end(), s.tokens.begin(), s.tokens.end());
        sentences.push_back(std::move(sentence));
    }
    return sentences;
}

}  // namespace

std::vector<std::vector<std::string>> training_sentences(const std::vector<TestStep>& steps,
                                                         const std::vector<RawTestCase>& cases,
                                                         const PreprocessConfig& cfg) {
    TextNormalizer normalize(cfg);
    std::unordered_map<std::string, std::vector<std::string>> prefix;
    for (const auto& tc : cases) {
        std::vector<std::string> p;
        if (tc.case_type) p = normalize(*tc.case_type);
        auto name = normalize(tc.name);
        p.insert(p.end(), name.begin(), name.end());
        prefix.emplace(tc.case_id, std::move(p));
    }
    return assemble_sentences(steps, prefix);
}

std::vector<std::vector<std::string>> training_sentences(const Corpus& corpus) {
    std::unordered_map<std::string, std::vector<std::string>> prefix;
    for (const auto& c : corpus.cases) {
        std::vector<std::string> p = c.type_tokens;
        p.insert(p.end(), c.name_tokens.begin(), c.name_tokens.end());
        prefix.emplace(c.raw.case_id, std::move(p));
    }
    return assemble_sentences(corpus.steps, prefix);
}

}  // namespace tcsim
