#include "tcsim/embedding.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>

#include "tcsim/error.hpp"
#include "tcsim/io.hpp"

namespace tcsim {

static_assert(std::numeric_limits<float>::is_iec559 && sizeof(float) == 4);

std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::trained: return "trained";
        case Provenance::pretrained: return "pretrained";
        case Provenance::mixed: return "mixed";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// WordEmbeddingTable

WordEmbeddingTable::WordEmbeddingTable(std::size_t dim, Provenance provenance)
    : dim_(dim), provenance_(provenance) {
    if (dim == 0) throw ValidationError("word embedding table: dim must be positive");
}

void WordEmbeddingTable::add(std::string word, std::span<const float> vector) {
    if (vector.size() != dim_)
        throw ValidationError("word '" + word + "': vector has " + std::to_string(vector.size()) + " entries, expected " +
                              std::to_string(dim_));
    if (!std::all_of(vector.begin(), vector.end(), [](float x) { return std::isfinite(x); }))
        throw ValidationError("word '" + word + "': non-finite vector entry");
    if (!index_.emplace(word, words_.size()).second) throw ValidationError("duplicate word '" + word + "'");
    words_.push_back(std::move(word));
    data_.insert(data_.end(), vector.begin(), vector.end());
}

bool WordEmbeddingTable::contains(std::string_view word) const { return index_.count(std::string(word)) > 0; }

std::optional<std::size_t> WordEmbeddingTable::index_of(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const float> WordEmbeddingTable::vector(std::size_t index) const {
    return {data_.data() + index * dim_, dim_};
}

std::span<float> WordEmbeddingTable::mutable_vector(std::size_t index) { return {data_.data() + index * dim_, dim_}; }

std::span<const float> WordEmbeddingTable::at(std::string_view word) const {
    auto idx = index_of(word);
    if (!idx) throw LookupError("word '" + std::string(word) + "' has no embedding vector");
    return vector(*idx);
}

bool operator==(const WordEmbeddingTable& a, const WordEmbeddingTable& b) {
    if (a.dim_ != b.dim_ || a.words_ != b.words_ || a.data_.size() != b.data_.size()) return false;
    return std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(float)) == 0;
}

// ---------------------------------------------------------------------------
// StepEmbeddingTable

StepEmbeddingTable::StepEmbeddingTable(std::size_t dim, std::string backend_tag)
    : dim_(dim), backend_tag_(std::move(backend_tag)) {
    if (dim == 0) throw ValidationError("step embedding table: dim must be positive");
}

void StepEmbeddingTable::add(std::string id, std::vector<double> vector) {
    if (vector.size() != dim_)
        throw ValidationError("id '" + id + "': vector has " + std::to_string(vector.size()) + " entries, expected " +
                              std::to_string(dim_));
    if (!std::all_of(vector.begin(), vector.end(), [](double x) { return std::isfinite(x); }))
        throw ValidationError("id '" + id + "': non-finite vector entry");
    if (!index_.emplace(id, ids_.size()).second) throw ValidationError("duplicate id '" + id + "'");
    ids_.push_back(std::move(id));
    data_.insert(data_.end(), vector.begin(), vector.end());
}

bool StepEmbeddingTable::contains(std::string_view id) const { return index_.count(std::string(id)) > 0; }

std::span<const double> StepEmbeddingTable::at(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw LookupError("id '" + std::string(id) + "' has no embedding vector");
    return vector(it->second);
}

std::span<const double> StepEmbeddingTable::vector(std::size_t index) const {
    return {data_.data() + index * dim_, dim_};
}

void StepEmbeddingTable::require_coverage(const std::vector<std::string>& ids) const {
    std::vector<std::string> missing;
    for (const auto& id : ids)
        if (!contains(id)) missing.push_back(id);
    if (missing.empty()) return;
    std::string msg = std::to_string(missing.size()) + " id(s) missing from embedding table '" + backend_tag_ + "':";
    for (const auto& id : missing) msg += " " + id;
    throw LookupError(msg);
}

// ---------------------------------------------------------------------------
// word2vec binary

namespace {

FormatError w2v_error(std::size_t offset, const std::string& msg) {
    return FormatError("word2vec binary: byte " + std::to_string(offset) + ": " + msg);
}

template <typename Int>
Int parse_int(std::string_view s, std::size_t offset, const char* what) {
    Int value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw w2v_error(offset, std::string("invalid ") + what + " '" + std::string(s) + "'");
    return value;
}

}  // namespace

WordEmbeddingTable parse_word2vec_binary(std::string_view bytes) {
    auto nl = bytes.find('\n');
    if (nl == std::string_view::npos) throw w2v_error(0, "missing header line");
    std::string_view header = bytes.substr(0, nl);
    if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
    auto sp = header.find(' ');
    if (sp == std::string_view::npos) throw w2v_error(0, "header must be '<vocab_count> <dim>'");
    auto count = parse_int<std::size_t>(header.substr(0, sp), 0, "vocab count");
    auto dim = parse_int<std::size_t>(header.substr(sp + 1), sp + 1, "dim");
    if (dim == 0) throw w2v_error(sp + 1, "dim must be positive");

    WordEmbeddingTable table(dim, Provenance::pretrained);
    std::vector<float> vec(dim);
    std::size_t pos = nl + 1;
    for (std::size_t w = 0; w < count; ++w) {
        while (pos < bytes.size() && (bytes[pos] == '\n' || bytes[pos] == '\r')) ++pos;
        std::size_t word_start = pos;
        auto space = bytes.find(' ', pos);
        if (space == std::string_view::npos)
            throw w2v_error(word_start, "truncated file: expected word " + std::to_string(w + 1) + " of " +
                                            std::to_string(count));
        if (space == word_start) throw w2v_error(word_start, "empty word");
        std::string word(bytes.substr(word_start, space - word_start));
        pos = space + 1;
        if (bytes.size() - pos < dim * 4)
            throw w2v_error(pos, "truncated vector for word '" + word + "'");
        for (std::size_t j = 0; j < dim; ++j) {
            std::uint32_t bits = 0;
            for (int b = 3; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(bytes[pos + j * 4 + b]);
            vec[j] = std::bit_cast<float>(bits);
            if (!std::isfinite(vec[j])) throw w2v_error(pos + j * 4, "non-finite value for word '" + word + "'");
        }
        pos += dim * 4;
        if (table.contains(word)) throw w2v_error(word_start, "duplicate word '" + word + "'");
        table.add(std::move(word), vec);
    }
    while (pos < bytes.size() && (bytes[pos] == '\n' || bytes[pos] == '\r')) ++pos;
    if (pos != bytes.size())
        throw w2v_error(pos, "trailing data after " + std::to_string(count) + " entries (header count mismatch)");
    return table;
}

WordEmbeddingTable load_word2vec_binary(const std::filesystem::path& path) {
    return parse_word2vec_binary(io::read_file(path));
}

std::string serialize_word2vec_binary(const WordEmbeddingTable& table) {
    std::string out = std::to_string(table.size()) + " " + std::to_string(table.dim()) + "\n";
    out.reserve(out.size() + table.size() * (table.dim() * 4 + 16));
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& word = table.word(i);
        if (word.empty() || word.find_first_of(" \n\r") != std::string::npos)
            throw FormatError("word2vec binary: word '" + word + "' cannot be stored (empty or contains whitespace)");
        out += word;
        out.push_back(' ');
        for (float x : table.vector(i)) {
            auto bits = std::bit_cast<std::uint32_t>(x);
            for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
        }
        out.push_back('\n');
    }
    return out;
}

void save_word2vec_binary(const WordEmbeddingTable& table, const std::filesystem::path& path) {
    io::write_file_atomic(path, serialize_word2vec_binary(table));
}

// ---------------------------------------------------------------------------
// EMBX

namespace {

FormatError embx_error(std::size_t line, const std::string& msg) {
    return FormatError("embx: line " + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

}  // namespace

StepEmbeddingTable parse_step_embeddings(std::string_view text, std::string backend_tag) {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    std::optional<StepEmbeddingTable> table;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (!table) {
            auto h = trim(line);
            if (h.substr(0, 7) != "EMBX 1 ") throw embx_error(line_no, "expected header 'EMBX 1 <dim>'");
            std::size_t dim = 0;
            auto d = h.substr(7);
            auto [ptr, ec] = std::from_chars(d.data(), d.data() + d.size(), dim);
            if (ec != std::errc{} || ptr != d.data() + d.size() || dim == 0)
                throw embx_error(line_no, "invalid dim '" + std::string(d) + "'");
            table.emplace(dim, backend_tag);
            continue;
        }
        if (trim(line).empty() || line.front() == '#') continue;

        auto tab = line.find('\t');
        if (tab == std::string_view::npos || tab == 0) throw embx_error(line_no, "expected '<id>\\t<values>'");
        std::string id(line.substr(0, tab));
        std::vector<double> values;
        values.reserve(table->dim());
        std::string_view rest = line.substr(tab + 1);
        while (true) {
            rest = trim(rest);
            if (rest.empty()) break;
            auto sp = rest.find(' ');
            auto tok = rest.substr(0, sp);
            double v = 0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc{} || ptr != tok.data() + tok.size())
                throw embx_error(line_no, "invalid number '" + std::string(tok) + "'");
            if (!std::isfinite(v)) throw embx_error(line_no, "non-finite value for id '" + id + "'");
            values.push_back(v);
            if (sp == std::string_view::npos) break;
            rest = rest.substr(sp + 1);
        }
        if (values.size() != table->dim())
            throw embx_error(line_no, "id '" + id + "' has " + std::to_string(values.size()) +
                                          " values, header declares dim " + std::to_string(table->dim()));
        if (table->contains(id)) throw ValidationError("embx: line " + std::to_string(line_no) + ": duplicate id '" + id + "'");
        table->add(std::move(id), std::move(values));
    }
    if (!table) throw embx_error(1, "empty file, expected header 'EMBX 1 <dim>'");
    return std::move(*table);
}

StepEmbeddingTable load_step_embeddings(const std::filesystem::path& path, std::string backend_tag) {
    return parse_step_embeddings(io::read_file(path), std::move(backend_tag));
}

std::string serialize_step_embeddings(const StepEmbeddingTable& table) {
    std::string out = "EMBX 1 " + std::to_string(table.dim()) + "\n";
    char buf[64];
    for (std::size_t i = 0; i < table.size(); ++i) {
        out += table.ids()[i];
        out.push_back('\t');
        auto v = table.vector(i);
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (j) out.push_back(' ');
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v[j]);
            out.append(buf, ptr);
        }
        out.push_back('\n');
    }
    return out;
}

void save_step_embeddings(const StepEmbeddingTable& table, const std::filesystem::path& path) {
    io::write_file_atomic(path, serialize_step_embeddings(table));
}

// ---------------------------------------------------------------------------

std::vector<double> pool_mean(std::span<const std::string> tokens, const WordEmbeddingTable& words) {
    std::vector<double> mean(words.dim(), 0.0);
    if (tokens.empty()) return mean;
    for (const auto& t : tokens) {
        auto v = words.at(t);
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += v[j];
    }
    for (auto& x : mean) x /= static_cast<double>(tokens.size());
    return mean;
}

std::vector<double> pool_mean(const TestStep& step, const WordEmbeddingTable& words) {
    try {
        return pool_mean(std::span<const std::string>(step.tokens), words);
    } catch (const LookupError& e) {
        throw LookupError("step '" + step.step_id + "': " + e.what());
    }
}

StepEmbeddingTable pool_steps(const std::vector<TestStep>& steps, const WordEmbeddingTable& words) {
    StepEmbeddingTable table(words.dim(), "word2vec-mean");
    for (const auto& s : steps) table.add(s.step_id, pool_mean(s, words));
    return table;
}

}  // namespace tcsim
