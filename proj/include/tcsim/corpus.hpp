#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tcsim {

/// A test case as written by a tester: a name, an optional type and the
/// ordered natural-language steps.
struct RawTestCase {
    std::string case_id;
    std::string name;
    std::optional<std::string> case_type;
    std::vector<std::string> steps;
};

struct TestStep {
    std::string step_id;
    std::string case_id;
    int ordinal = 0;  // 1-based position within the owning case
    std::string raw_text;
    std::vector<std::string> tokens;
    /// Set when preprocessing removed every token. Such steps are kept so
    /// that step ids stay stable for ground-truth joins.
    bool empty_after_preprocessing = false;
};

enum class CorpusFormat { jsonl, csv };

std::optional<CorpusFormat> parse_corpus_format(std::string_view name);
/// Guesses the format from the file extension (.jsonl/.json or .csv).
std::optional<CorpusFormat> corpus_format_from_path(const std::filesystem::path& path);

/// Loads raw test cases. JSONL: one object per line with keys case_id,
/// name, type (string or null) and steps. CSV: header
/// `case_id,name,type,step_ordinal,step_text`, rows grouped by case with
/// ordinals 1..n ascending. The result is checked with validate_corpus.
std::vector<RawTestCase> load_corpus(const std::filesystem::path& path, CorpusFormat format);
std::vector<RawTestCase> parse_corpus_jsonl(std::string_view text);
std::vector<RawTestCase> parse_corpus_csv(std::string_view text);

/// Throws ValidationError on empty/duplicate case ids or a case without steps.
void validate_corpus(const std::vector<RawTestCase>& cases);

/// Step ids are `<case_id>.<ordinal>`.
std::string make_step_id(std::string_view case_id, int ordinal);

// ---------------------------------------------------------------------------
// Preprocessing

struct PreprocessConfig {
    /// (misspelled, fixed) pairs applied token by token.
    std::vector<std::pair<std::string, std::string>> misspelling_map;
    std::set<std::string> stopword_list;
    /// Overrides for the rule-based lemmatizer (irregular forms).
    std::map<std::string, std::string> lemma_exceptions;
    bool prune_singletons = true;
    /// Also strip -ing/-ed verb inflections. Off by default: plural
    /// reduction alone reproduces forms such as "playing" and "completed"
    /// being kept as-is.
    bool lemmatize_verbs = false;
    /// Drop numbers and numeric ordinals such as "2" or "1st".
    bool drop_numbers = true;

    /// Built-in English stopword list and lemma exceptions, no misspellings.
    static PreprocessConfig defaults();
};

/// Throws ConfigError if the misspelling map has duplicate left entries,
/// self-mappings or cycles.
void validate_preprocess_config(const PreprocessConfig& cfg);

const std::set<std::string>& default_stopwords();
const std::map<std::string, std::string>& default_lemma_exceptions();

std::set<std::string> load_stopwords(const std::filesystem::path& path);
std::vector<std::pair<std::string, std::string>> load_misspelling_map(const std::filesystem::path& path);

/// Lowercases ASCII letters and splits on every maximal run of
/// non-alphanumeric ASCII characters. Bytes >= 0x80 are kept inside words.
std::vector<std::string> tokenize(std::string_view text);

/// Rule-based English lemmatizer: plural reduction (and optionally verb
/// suffixes), with the exception table taking precedence.
std::string lemmatize(std::string_view word, const PreprocessConfig& cfg);

/// Digits, optionally followed by st/nd/rd/th.
bool is_number_token(std::string_view token);

/// Text pipeline without singleton pruning:
/// lowercase -> tokenize -> fix misspellings -> drop stopwords -> lemmatize.
/// Used directly for case names and types.
class TextNormalizer {
public:
    explicit TextNormalizer(const PreprocessConfig& cfg);

    [[nodiscard]] std::vector<std::string> operator()(std::string_view text) const;
    [[nodiscard]] const PreprocessConfig& config() const { return cfg_; }

private:
    [[nodiscard]] std::optional<std::string> normalize_token(std::string token) const;

    PreprocessConfig cfg_;
    std::map<std::string, std::string> fixes_;  // chains resolved to their end
};

/// Full step pipeline. Singleton pruning counts words over the step token
/// lists of the whole corpus only.
std::vector<TestStep> preprocess(const std::vector<RawTestCase>& corpus, const PreprocessConfig& cfg);

/// A case together with its preprocessed name/type and its steps.
struct CaseRecord {
    RawTestCase raw;
    std::vector<std::string> name_tokens;
    std::vector<std::string> type_tokens;
    std::vector<std::size_t> step_indices;  // into Corpus::steps, ordinal order
};

struct Corpus {
    std::vector<CaseRecord> cases;
    std::vector<TestStep> steps;

    [[nodiscard]] std::size_t vocabulary_size() const;
    [[nodiscard]] std::size_t empty_step_count() const;
    [[nodiscard]] std::vector<std::string> step_ids() const;
    [[nodiscard]] std::vector<std::string> case_ids() const;
};

/// Validates, preprocesses steps and normalizes names/types.
Corpus prepare_corpus(std::vector<RawTestCase> cases, const PreprocessConfig& cfg);

/// Embedding-training input: per step, type tokens + name tokens + step
/// tokens of the owning case. Step tokens themselves are not modified.
std::vector<std::vector<std::string>> training_sentences(const std::vector<TestStep>& steps,
                                                         const std::vector<RawTestCase>& cases,
                                                         const PreprocessConfig& cfg);
std::vector<std::vector<std::string>> training_sentences(const Corpus& corpus);

}  // namespace tcsim
