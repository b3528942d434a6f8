#include "tcsim/similarity.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <exception>
#include <map>
#include <thread>

#include "tcsim/error.hpp"
#include "tcsim/io.hpp"
#include "tcsim/transport.hpp"

namespace tcsim {

NBow nbow(std::span<const std::string> tokens, const WordEmbeddingTable& words) {
    if (tokens.empty()) throw ValidationError("nbow: empty token list");
    std::map<std::size_t, std::size_t> counts;
    for (const auto& t : tokens) {
        auto idx = words.index_of(t);
        if (!idx) throw LookupError("word '" + t + "' has no embedding vector");
        ++counts[*idx];
    }
    NBow bag;
    const double total = static_cast<double>(tokens.size());
    for (auto [w, c] : counts) {
        bag.words.push_back(w);
        bag.weights.push_back(static_cast<double>(c) / total);
    }
    return bag;
}

NBow nbow(const TestStep& step, const WordEmbeddingTable& words) {
    if (step.tokens.empty()) throw ValidationError("nbow: step '" + step.step_id + "' has no tokens");
    return nbow(std::span<const std::string>(step.tokens), words);
}

double euclidean(std::span<const float> a, std::span<const float> b) {
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double d = static_cast<double>(a[j]) - static_cast<double>(b[j]);
        sum += d * d;
    }
    return std::sqrt(sum);
}

double euclidean(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) sum += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(sum);
}

namespace {

std::vector<double> ground_costs(const NBow& a, const NBow& b, const WordEmbeddingTable& words) {
    std::vector<double> cost(a.words.size() * b.words.size());
    for (std::size_t i = 0; i < a.words.size(); ++i)
        for (std::size_t j = 0; j < b.words.size(); ++j)
            cost[i * b.words.size() + j] =
                a.words[i] == b.words[j] ? 0.0 : euclidean(words.vector(a.words[i]), words.vector(b.words[j]));
    return cost;
}

void check_bag(const NBow& bag, const WordEmbeddingTable& words) {
    for (auto w : bag.words)
        if (w >= words.size()) throw LookupError("nbow word index " + std::to_string(w) + " is outside the table");
}

}  // namespace

double wmd(const NBow& a, const NBow& b, const WordEmbeddingTable& words) {
    check_bag(a, words);
    check_bag(b, words);
    if (a == b) return 0.0;
    auto cost = ground_costs(a, b, words);
    return std::max(0.0, solve_transport(a.weights, b.weights, cost).cost);
}

double rwmd(const NBow& a, const NBow& b, const WordEmbeddingTable& words) {
    check_bag(a, words);
    check_bag(b, words);
    if (a == b) return 0.0;
    auto cost = ground_costs(a, b, words);
    const std::size_t n = b.words.size();
    double left = 0.0, right = 0.0;
    for (std::size_t i = 0; i < a.words.size(); ++i)
        left += a.weights[i] * *std::min_element(cost.begin() + i * n, cost.begin() + (i + 1) * n);
    for (std::size_t j = 0; j < n; ++j) {
        double best = cost[j];
        for (std::size_t i = 1; i < a.words.size(); ++i) best = std::min(best, cost[i * n + j]);
        right += b.weights[j] * best;
    }
    return std::max(left, right);
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw ValidationError("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                              std::to_string(v.size()) + ")");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        dot += u[j] * v[j];
        nu += u[j] * u[j];
        nv += v[j] * v[j];
    }
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

// ---------------------------------------------------------------------------

DistanceMatrix::DistanceMatrix(std::vector<std::string> ids)
    : ids_(std::move(ids)), entries_(ids_.size() * ids_.size(), 0.0f) {}

void DistanceMatrix::set(std::size_t i, std::size_t j, float value) {
    entries_[i * ids_.size() + j] = value;
    entries_[j * ids_.size() + i] = value;
}

void DistanceMatrix::validate() const {
    const std::size_t n = ids_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if ((*this)(i, i) != 0.0f) throw ValidationError("distance matrix: non-zero diagonal at " + ids_[i]);
        for (std::size_t j = 0; j < n; ++j) {
            float d = (*this)(i, j);
            if (!std::isfinite(d) || d < 0.0f)
                throw ValidationError("distance matrix: invalid entry (" + ids_[i] + ", " + ids_[j] + ")");
            if (std::abs(d - (*this)(j, i)) > 1e-9)
                throw ValidationError("distance matrix: asymmetric entry (" + ids_[i] + ", " + ids_[j] + ")");
        }
    }
}

namespace {

void check_capacity(std::size_t n, const MatrixOptions& options) {
    if (n > options.max_items)
        throw ConfigError("distance matrix: " + std::to_string(n) + " items exceed the cap of " +
                          std::to_string(options.max_items) +
                          " (a dense float matrix needs n^2 * 4 bytes); raise matrix.max_items if memory allows");
}

// Fills the upper triangle with fn(i, j). Rows are striped across threads;
// every cell is written by exactly one thread.
DistanceMatrix fill_upper(std::vector<std::string> ids, const std::function<double(std::size_t, std::size_t)>& fn,
                          std::size_t threads) {
    DistanceMatrix dm(std::move(ids));
    const std::size_t n = dm.size();
    threads = std::max<std::size_t>(1, std::min(threads, n));
    auto work = [&](std::size_t t) {
        for (std::size_t i = t; i < n; i += threads)
            for (std::size_t j = i + 1; j < n; ++j) dm.set(i, j, static_cast<float>(fn(i, j)));
    };
    if (threads == 1) {
        work(0);
        return dm;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                try {
                    work(t);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return dm;
}

std::vector<std::string> ids_of(const std::vector<TestStep>& steps) {
    std::vector<std::string> ids;
    ids.reserve(steps.size());
    for (const auto& s : steps) ids.push_back(s.step_id);
    return ids;
}

}  // namespace

DistanceMatrix build_distance_matrix(std::vector<std::string> ids,
                                     const std::function<double(std::size_t, std::size_t)>& distance,
                                     const MatrixOptions& options) {
    check_capacity(ids.size(), options);
    auto dm = fill_upper(std::move(ids), distance, options.threads);
    dm.validate();
    return dm;
}

DistanceMatrix build_wmd_matrix(const std::vector<TestStep>& steps, const WordEmbeddingTable& words,
                                const MatrixOptions& options, bool relaxed) {
    check_capacity(steps.size(), options);
    std::vector<NBow> bags(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i)
        if (!steps[i].tokens.empty()) bags[i] = nbow(steps[i], words);

    constexpr double kPending = -1.0;
    auto dm = fill_upper(
        ids_of(steps),
        [&](std::size_t i, std::size_t j) {
            if (steps[i].tokens.empty() || steps[j].tokens.empty()) return kPending;
            return relaxed ? rwmd(bags[i], bags[j], words) : wmd(bags[i], bags[j], words);
        },
        options.threads);

    double penalty = options.empty_penalty;
    if (penalty < 0.0) {
        double largest = 0.0;
        for (std::size_t i = 0; i < dm.size(); ++i)
            for (std::size_t j = i + 1; j < dm.size(); ++j) largest = std::max(largest, static_cast<double>(dm(i, j)));
        penalty = largest > 0.0 ? 2.0 * largest : 1.0;
    }
    for (std::size_t i = 0; i < dm.size(); ++i) {
        for (std::size_t j = i + 1; j < dm.size(); ++j) {
            if (dm(i, j) != static_cast<float>(kPending)) continue;
            bool twins = steps[i].tokens.empty() && steps[j].tokens.empty() && steps[i].raw_text == steps[j].raw_text;
            dm.set(i, j, twins ? 0.0f : static_cast<float>(penalty));
        }
    }
    dm.validate();
    return dm;
}

DistanceMatrix build_cosine_matrix(const std::vector<TestStep>& steps, const StepEmbeddingTable& vectors,
                                   const MatrixOptions& options) {
    check_capacity(steps.size(), options);
    std::vector<std::span<const double>> rows;
    rows.reserve(steps.size());
    for (const auto& s : steps) rows.push_back(vectors.at(s.step_id));
    auto dm = fill_upper(
        ids_of(steps),
        [&](std::size_t i, std::size_t j) {
            bool ei = steps[i].tokens.empty(), ej = steps[j].tokens.empty();
            if (ei || ej) return (ei && ej && steps[i].raw_text == steps[j].raw_text) ? 0.0 : 1.0;
            if (std::equal(rows[i].begin(), rows[i].end(), rows[j].begin(), rows[j].end())) return 0.0;
            return std::max(0.0, 1.0 - cosine(rows[i], rows[j]));
        },
        options.threads);
    dm.validate();
    return dm;
}

// ---------------------------------------------------------------------------

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t pos) {
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(bytes[pos + b]);
    return v;
}

FormatError dmat_error(std::size_t offset, const std::string& msg) {
    return FormatError("dmat: byte " + std::to_string(offset) + ": " + msg);
}

}  // namespace

std::string serialize_distance_matrix(const DistanceMatrix& dm) {
    const std::size_t n = dm.size();
    std::string out = "DMAT 1 " + std::to_string(n) + "\n";
    for (const auto& id : dm.ids()) {
        put_u32(out, static_cast<std::uint32_t>(id.size()));
        out += id;
    }
    if (n > 1) out.reserve(out.size() + n * (n - 1) * 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) put_u32(out, std::bit_cast<std::uint32_t>(dm(i, j)));
    return out;
}

DistanceMatrix parse_distance_matrix(std::string_view bytes) {
    auto nl = bytes.find('\n');
    if (nl == std::string_view::npos || bytes.substr(0, 7) != "DMAT 1 ") throw dmat_error(0, "expected header 'DMAT 1 <n>'");
    std::size_t n = 0;
    auto num = bytes.substr(7, nl - 7);
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), n);
    if (ec != std::errc{} || ptr != num.data() + num.size()) throw dmat_error(7, "invalid item count");
    std::size_t pos = nl + 1;
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (bytes.size() - pos < 4) throw dmat_error(pos, "truncated id table");
        auto len = get_u32(bytes, pos);
        pos += 4;
        if (bytes.size() - pos < len) throw dmat_error(pos, "truncated id");
        ids.emplace_back(bytes.substr(pos, len));
        pos += len;
    }
    DistanceMatrix dm(std::move(ids));
    const std::size_t expected = n * (n > 0 ? n - 1 : 0) / 2 * 4;
    if (bytes.size() - pos != expected)
        throw dmat_error(pos, "expected " + std::to_string(expected) + " payload bytes, found " +
                                  std::to_string(bytes.size() - pos));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j, pos += 4) dm.set(i, j, std::bit_cast<float>(get_u32(bytes, pos)));
    dm.validate();
    return dm;
}

void save_distance_matrix(const DistanceMatrix& dm, const std::filesystem::path& path) {
    io::write_file_atomic(path, serialize_distance_matrix(dm));
}

DistanceMatrix load_distance_matrix(const std::filesystem::path& path) {
    return parse_distance_matrix(io::read_file(path));
}

}  // namespace tcsim
