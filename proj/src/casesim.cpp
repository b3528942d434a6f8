#include "tcsim/casesim.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tcsim/clustering.hpp"
#include "tcsim/csv.hpp"
#include "tcsim/error.hpp"
#include "tcsim/eval.hpp"
#include "tcsim/similarity.hpp"

namespace tcsim {

CaseSignature::CaseSignature(std::string case_id, std::size_t k, const std::vector<int>& step_clusters)
    : case_id_(std::move(case_id)), k_(k) {
    std::map<int, int> counts;
    for (int c : step_clusters) {
        if (c < 0 || static_cast<std::size_t>(c) >= k)
            throw ValidationError("signature of '" + case_id_ + "': cluster id " + std::to_string(c) +
                                  " is outside [0, " + std::to_string(k) + ")");
        ++counts[c];
    }
    for (auto [c, n] : counts) {
        ids_.push_back(c);
        counts_.push_back(n);
    }
}

std::vector<int> CaseSignature::bool_vec() const {
    std::vector<int> v(k_, 0);
    for (int c : ids_) v[static_cast<std::size_t>(c)] = 1;
    return v;
}

std::vector<int> CaseSignature::count_vec() const {
    std::vector<int> v(k_, 0);
    for (std::size_t i = 0; i < ids_.size(); ++i) v[static_cast<std::size_t>(ids_[i])] = counts_[i];
    return v;
}

std::size_t CaseSignature::step_count() const {
    std::size_t n = 0;
    for (int c : counts_) n += static_cast<std::size_t>(c);
    return n;
}

std::vector<CaseSignature> signatures(const std::vector<std::string>& case_ids,
                                      const std::vector<std::vector<std::string>>& case_step_ids,
                                      const Clustering& step_clustering) {
    if (case_ids.size() != case_step_ids.size()) throw ValidationError("signatures: case and step list counts differ");
    std::vector<std::string> missing;
    std::vector<CaseSignature> out;
    out.reserve(case_ids.size());
    const auto k = static_cast<std::size_t>(step_clustering.k());
    for (std::size_t c = 0; c < case_ids.size(); ++c) {
        std::vector<int> clusters;
        for (const auto& sid : case_step_ids[c]) {
            if (!step_clustering.contains(sid)) {
                missing.push_back(sid);
                continue;
            }
            clusters.push_back(step_clustering.cluster_of(sid));
        }
        out.emplace_back(case_ids[c], k, clusters);
    }
    if (!missing.empty()) {
        std::string msg = std::to_string(missing.size()) + " step(s) have no cluster:";
        for (const auto& id : missing) msg += " " + id;
        throw LookupError(msg);
    }
    return out;
}

std::vector<CaseSignature> signatures(const Corpus& corpus, const Clustering& step_clustering) {
    std::vector<std::string> ids;
    std::vector<std::vector<std::string>> steps;
    for (const auto& rec : corpus.cases) {
        ids.push_back(rec.raw.case_id);
        auto& list = steps.emplace_back();
        for (auto s : rec.step_indices) list.push_back(corpus.steps[s].step_id);
    }
    return signatures(ids, steps, step_clustering);
}

namespace {

std::size_t intersection_size(const CaseSignature& a, const CaseSignature& b) {
    const auto& x = a.cluster_ids();
    const auto& y = b.cluster_ids();
    std::size_t i = 0, j = 0, n = 0;
    while (i < x.size() && j < y.size()) {
        if (x[i] < y[j]) {
            ++i;
        } else if (y[j] < x[i]) {
            ++j;
        } else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

}  // namespace

double overlap(const CaseSignature& a, const CaseSignature& b) {
    std::size_t denom = std::max(a.cluster_ids().size(), b.cluster_ids().size());
    if (denom == 0) return 1.0;
    return static_cast<double>(intersection_size(a, b)) / static_cast<double>(denom);
}

double jaccard(const CaseSignature& a, const CaseSignature& b) {
    std::size_t inter = intersection_size(a, b);
    std::size_t uni = a.cluster_ids().size() + b.cluster_ids().size() - inter;
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double cosine_counts(const CaseSignature& a, const CaseSignature& b) {
    const auto &xi = a.cluster_ids(), &xc = a.counts();
    const auto &yi = b.cluster_ids(), &yc = b.counts();
    long long dot = 0, na = 0, nb = 0;
    for (int c : xc) na += static_cast<long long>(c) * c;
    for (int c : yc) nb += static_cast<long long>(c) * c;
    if (na == 0 || nb == 0) return 0.0;
    std::size_t i = 0, j = 0;
    while (i < xi.size() && j < yi.size()) {
        if (xi[i] < yi[j]) {
            ++i;
        } else if (yi[j] < xi[i]) {
            ++j;
        } else {
            dot += static_cast<long long>(xc[i]) * yc[j];
            ++i;
            ++j;
        }
    }
    double v = static_cast<double>(dot) / std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
    return std::min(1.0, v);
}

double name_similarity(std::span<const std::string> a, std::span<const std::string> b,
                       const WordEmbeddingTable& words, NameMode mode) {
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    if (mode == NameMode::wmd) return 1.0 / (1.0 + wmd(nbow(a, words), nbow(b, words), words));
    auto u = pool_mean(a, words);
    auto v = pool_mean(b, words);
    return std::max(0.0, cosine(u, v));
}

double combined(double cosine_counts_score, double name_score, double w_name) {
    return (1.0 - w_name) * cosine_counts_score + w_name * name_score;
}

std::string_view technique_name(Technique t) {
    switch (t) {
        case Technique::overlap: return "overlap";
        case Technique::jaccard: return "jaccard";
        case Technique::cosine_counts: return "cosine_counts";
        case Technique::combined: return "combined";
        case Technique::same_steps: return "same_steps";
        case Technique::same_name: return "same_name";
    }
    return "unknown";
}

Technique parse_technique(std::string_view name) {
    if (name == "overlap") return Technique::overlap;
    if (name == "jaccard") return Technique::jaccard;
    if (name == "cosine" || name == "cosine_counts") return Technique::cosine_counts;
    if (name == "combined") return Technique::combined;
    if (name == "same_steps" || name == "baseline-same-steps") return Technique::same_steps;
    if (name == "same_name" || name == "baseline-same-name") return Technique::same_name;
    throw ConfigError("unknown technique '" + std::string(name) +
                      "' (expected overlap, jaccard, cosine, combined, baseline-same-steps or baseline-same-name)");
}

ScoreTable::ScoreTable(std::vector<std::string> ids)
    : ids_(std::move(ids)), scores_(ids_.size() > 1 ? ids_.size() * (ids_.size() - 1) / 2 : 0, 0.0) {}

ScoreTable score_cases(const Corpus& corpus, const std::vector<CaseSignature>& sigs, const ScoreOptions& options,
                       const WordEmbeddingTable* words) {
    const std::size_t n = corpus.cases.size();
    if (sigs.size() != n) throw ValidationError("score_cases: signature count does not match the corpus");
    if (options.w_name < 0.0 || options.w_name > 1.0) throw ConfigError("w_name must lie in [0, 1]");
    if (options.technique == Technique::same_steps)
        return score_table_from_pairs(corpus.case_ids(), case_baseline_same_steps(corpus));
    if (options.technique == Technique::same_name)
        return score_table_from_pairs(corpus.case_ids(), case_baseline_same_name(corpus));
    if (options.technique == Technique::combined && words == nullptr)
        throw ConfigError("the combined technique needs a word embedding table for case names");

    ScoreTable table(corpus.case_ids());
    auto score = [&](std::size_t i, std::size_t j) {
        switch (options.technique) {
            case Technique::overlap: return overlap(sigs[i], sigs[j]);
            case Technique::jaccard: return jaccard(sigs[i], sigs[j]);
            case Technique::cosine_counts: return cosine_counts(sigs[i], sigs[j]);
            default: break;
        }
        double names = name_similarity(corpus.cases[i].name_tokens, corpus.cases[j].name_tokens, *words,
                                       options.name_mode);
        return combined(cosine_counts(sigs[i], sigs[j]), names, options.w_name);
    };

    const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(n, 1));
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](std::size_t t) {
        try {
            for (std::size_t i = t; i < n; i += threads)
                for (std::size_t j = i + 1; j < n; ++j) table.set(i, j, score(i, j));
        } catch (...) {
            errors[t] = std::current_exception();
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return table;
}

std::vector<std::pair<std::size_t, std::size_t>> case_baseline_same_steps(const Corpus& corpus) {
    auto tokens_of = [&](const CaseRecord& rec) {
        std::vector<std::vector<std::string>> out;
        for (auto s : rec.step_indices) out.push_back(corpus.steps[s].tokens);
        return out;
    };
    std::vector<std::vector<std::vector<std::string>>> lists;
    for (const auto& rec : corpus.cases) lists.push_back(tokens_of(rec));
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < lists.size(); ++i)
        for (std::size_t j = i + 1; j < lists.size(); ++j)
            if (lists[i] == lists[j]) pairs.emplace_back(i, j);
    return pairs;
}

namespace {

std::string normalize_name(std::string_view name) {
    std::string out;
    bool pending_space = false;
    for (char ch : name) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> case_baseline_same_name(const Corpus& corpus) {
    std::vector<std::string> names;
    for (const auto& rec : corpus.cases) names.push_back(normalize_name(rec.raw.name));
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = i + 1; j < names.size(); ++j)
            if (names[i] == names[j]) pairs.emplace_back(i, j);
    return pairs;
}

ScoreTable score_table_from_pairs(std::vector<std::string> ids,
                                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    ScoreTable table(std::move(ids));
    for (auto [i, j] : pairs) table.set(i, j, 1.0);
    return table;
}

// ---------------------------------------------------------------------------

std::vector<double> threshold_values(const ThresholdGrid& grid) {
    if (!(grid.step > 0.0) || !(grid.t_min > 0.0) || !(grid.t_max <= 1.0) || grid.t_max < grid.t_min)
        throw ConfigError("threshold grid must satisfy 0 < t_min <= t_max <= 1 and step > 0");
    std::vector<double> values;
    for (std::size_t i = 0;; ++i) {
        double t = std::round((grid.t_min + static_cast<double>(i) * grid.step) * 1e12) / 1e12;
        if (t > grid.t_max + 1e-12) break;
        values.push_back(t);
    }
    return values;
}

ThresholdSweep sweep_threshold(const ScoreTable& scores, const GroundTruth& gt, const ThresholdGrid& grid) {
    if (gt.empty()) throw ValidationError("threshold sweep: ground truth is empty");
    auto ts = threshold_values(grid);

    std::map<std::string, std::size_t> row;
    for (std::size_t i = 0; i < scores.size(); ++i) row.emplace(scores.ids()[i], i);
    std::vector<std::size_t> gt_row;
    std::vector<std::string> missing;
    for (const auto& id : gt.items()) {
        auto it = row.find(id);
        if (it == row.end())
            missing.push_back(id);
        else
            gt_row.push_back(it->second);
    }
    if (!missing.empty()) {
        std::string msg = std::to_string(missing.size()) + " ground-truth case(s) are not in the corpus:";
        for (const auto& id : missing) msg += " " + id;
        throw LookupError(msg);
    }

    ThresholdSweep sweep;
    for (double t : ts) {
        auto flagged = [&](std::size_t i, std::size_t j) { return scores(gt_row[i], gt_row[j]) >= t; };
        double f = f_score(confusion(flagged, gt));
        sweep.curve.push_back({t, f});
        if (sweep.curve.size() == 1 || f >= sweep.best_f) {
            sweep.best_f = f;
            sweep.best_threshold = t;
        }
    }
    return sweep;
}

std::string serialize_threshold_curve(const ThresholdSweep& sweep) {
    std::ostringstream out;
    out << "threshold,f_score\n";
    for (const auto& p : sweep.curve) out << csv::number(p.threshold) << ',' << csv::number(p.f_score) << '\n';
    return out.str();
}

std::string serialize_threshold_summary(const ThresholdSweep& sweep) {
    nlohmann::ordered_json j;
    j["best_threshold"] = sweep.best_threshold;
    j["best_f"] = sweep.best_f;
    return j.dump(2) + "\n";
}

void validate_threshold(double t) {
    if (!(t > 0.0 && t <= 1.0)) {
        std::ostringstream msg;
        msg << "threshold " << t << " is outside (0, 1]";
        throw ValidationError(msg.str());
    }
}

// ---------------------------------------------------------------------------

SimilarityReport report(const ScoreTable& scores, Technique technique, double threshold) {
    validate_threshold(threshold);
    SimilarityReport r;
    r.technique = technique;
    r.threshold = threshold;
    r.case_ids = scores.ids();
    const std::size_t n = scores.size();
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<bool> matched(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = scores(i, j);
            if (s < threshold) continue;
            r.pairs.push_back({i, j, s});
            edges.emplace_back(i, j);
            matched[i] = matched[j] = true;
        }
    }
    auto labels = connected_components(n, edges);
    std::map<int, std::vector<std::size_t>> by_root;
    for (std::size_t i = 0; i < n; ++i)
        if (matched[i]) by_root[labels[i]].push_back(i);
    for (auto& [root, members] : by_root) r.groups.push_back(std::move(members));
    std::sort(r.groups.begin(), r.groups.end());

    std::size_t matched_count = static_cast<std::size_t>(std::count(matched.begin(), matched.end(), true));
    r.stats.cases_with_match_fraction = n == 0 ? 0.0 : static_cast<double>(matched_count) / static_cast<double>(n);
    r.stats.group_count = r.groups.size();
    if (!r.groups.empty()) {
        double mean = static_cast<double>(matched_count) / static_cast<double>(r.groups.size());
        double var = 0.0;
        for (const auto& g : r.groups) var += (static_cast<double>(g.size()) - mean) * (static_cast<double>(g.size()) - mean);
        r.stats.group_size_mean = mean;
        r.stats.group_size_std = std::sqrt(var / static_cast<double>(r.groups.size()));
    }
    return r;
}

std::string report_json(const SimilarityReport& r) {
    nlohmann::ordered_json j;
    j["technique"] = technique_name(r.technique);
    j["threshold"] = r.threshold;
    auto pairs = nlohmann::ordered_json::array();
    for (const auto& p : r.pairs) {
        nlohmann::ordered_json e;
        e["a"] = r.case_ids[p.a];
        e["b"] = r.case_ids[p.b];
        e["score"] = p.score;
        pairs.push_back(std::move(e));
    }
    j["pairs"] = std::move(pairs);
    auto groups = nlohmann::ordered_json::array();
    for (const auto& g : r.groups) {
        auto ids = nlohmann::ordered_json::array();
        for (auto i : g) ids.push_back(r.case_ids[i]);
        groups.push_back(std::move(ids));
    }
    j["groups"] = std::move(groups);
    nlohmann::ordered_json stats;
    stats["cases_with_match_fraction"] = r.stats.cases_with_match_fraction;
    stats["group_count"] = r.stats.group_count;
    stats["group_size_mean"] = r.stats.group_size_mean;
    stats["group_size_std"] = r.stats.group_size_std;
    j["stats"] = std::move(stats);
    return j.dump(2) + "\n";
}

std::string report_text(const SimilarityReport& r, const Corpus& corpus) {
    std::ostringstream out;
    out << "technique: " << technique_name(r.technique) << "\n";
    out << "threshold: " << r.threshold << "\n";
    out << "flagged pairs: " << r.pairs.size() << "\n";
    out << "groups: " << r.stats.group_count << "\n";
    out << "cases with a similar case: " << r.stats.cases_with_match_fraction * 100.0 << "%\n";
    for (std::size_t g = 0; g < r.groups.size(); ++g) {
        out << "\n== group " << g + 1 << " (" << r.groups[g].size() << " cases) ==\n";
        for (auto i : r.groups[g]) {
            const auto& rec = corpus.cases[i];
            out << "[" << rec.raw.case_id << "] " << rec.raw.name;
            if (rec.raw.case_type) out << " (" << *rec.raw.case_type << ")";
            out << "\n";
            for (auto s : rec.step_indices) out << "    " << corpus.steps[s].ordinal << ". " << corpus.steps[s].raw_text << "\n";
        }
    }
    return out.str();
}

}  // namespace tcsim
