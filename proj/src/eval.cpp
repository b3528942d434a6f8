#include "tcsim/eval.hpp"

#include <map>
#include <unordered_set>

#include <json.hpp>

#include "tcsim/clustering.hpp"
#include "tcsim/csv.hpp"
#include "tcsim/error.hpp"
#include "tcsim/io.hpp"

namespace tcsim {

GroundTruth::GroundTruth(std::vector<std::string> items, std::vector<std::string> labels)
    : items_(std::move(items)), labels_(std::move(labels)) {
    if (items_.size() != labels_.size()) throw ValidationError("ground truth: item and label counts differ");
    std::unordered_set<std::string> seen;
    for (const auto& id : items_)
        if (!seen.insert(id).second) throw ValidationError("ground truth: duplicate item id '" + id + "'");
}

GroundTruth parse_ground_truth(std::string_view text) {
    auto rows = csv::parse(text);
    if (rows.empty() || rows[0].fields != std::vector<std::string>{"item_id", "label"})
        throw ParseError("ground truth CSV: expected header 'item_id,label'");
    std::vector<std::string> items, labels;
    std::unordered_set<std::string> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        if (f.size() != 2)
            throw ParseError("ground truth CSV line " + std::to_string(rows[r].line) + ": expected 2 fields");
        if (f[0].empty()) throw ParseError("ground truth CSV line " + std::to_string(rows[r].line) + ": empty item id");
        if (!seen.insert(f[0]).second)
            throw ValidationError("ground truth CSV line " + std::to_string(rows[r].line) + ": duplicate item id '" +
                                  f[0] + "'");
        items.push_back(f[0]);
        labels.push_back(f[1]);
    }
    return GroundTruth(std::move(items), std::move(labels));
}

GroundTruth load_ground_truth(const std::filesystem::path& path) { return parse_ground_truth(io::read_file(path)); }

std::string serialize_ground_truth(const GroundTruth& gt) {
    std::string out = "item_id,label\n";
    for (std::size_t i = 0; i < gt.size(); ++i) out += csv::join_row({gt.items()[i], gt.labels()[i]}) + "\n";
    return out;
}

double PairwiseConfusion::precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp); }
double PairwiseConfusion::recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn); }

namespace {

std::uint64_t pairs(std::uint64_t m) { return m * (m > 0 ? m - 1 : 0) / 2; }

}  // namespace

PairwiseConfusion confusion(const Clustering& predicted, const GroundTruth& gt) {
    std::vector<std::string> missing;
    std::map<std::pair<int, std::string>, std::uint64_t> cells;
    std::map<int, std::uint64_t> per_cluster;
    std::map<std::string, std::uint64_t> per_label;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        const auto& id = gt.items()[i];
        if (!predicted.contains(id)) {
            missing.push_back(id);
            continue;
        }
        int c = predicted.cluster_of(id);
        ++cells[{c, gt.label_of(i)}];
        ++per_cluster[c];
        ++per_label[gt.label_of(i)];
    }
    if (!missing.empty()) {
        std::string msg = std::to_string(missing.size()) + " ground-truth item(s) missing from the prediction:";
        for (const auto& id : missing) msg += " " + id;
        throw LookupError(msg);
    }
    PairwiseConfusion c;
    std::uint64_t flagged = 0, colabeled = 0;
    for (const auto& [key, n] : cells) c.tp += pairs(n);
    for (const auto& [key, n] : per_cluster) flagged += pairs(n);
    for (const auto& [key, n] : per_label) colabeled += pairs(n);
    c.fp = flagged - c.tp;
    c.fn = colabeled - c.tp;
    c.tn = pairs(gt.size()) - c.tp - c.fp - c.fn;
    return c;
}

PairwiseConfusion confusion(const std::function<bool(std::size_t, std::size_t)>& flagged, const GroundTruth& gt) {
    PairwiseConfusion c;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        for (std::size_t j = i + 1; j < gt.size(); ++j) {
            bool same = gt.label_of(i) == gt.label_of(j);
            bool flag = flagged(i, j);
            if (flag && same)
                ++c.tp;
            else if (flag)
                ++c.fp;
            else if (same)
                ++c.fn;
            else
                ++c.tn;
        }
    }
    return c;
}

double f_score(const PairwiseConfusion& c) {
    if (c.tp + c.fp == 0 || c.tp + c.fn == 0) return 0.0;
    // Equal to 2PR / (P + R) with a single rounding.
    return static_cast<double>(2 * c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
}

std::string evaluation_json(const PairwiseConfusion& c) {
    nlohmann::ordered_json j;
    j["tp"] = c.tp;
    j["fp"] = c.fp;
    j["tn"] = c.tn;
    j["fn"] = c.fn;
    j["precision"] = c.precision();
    j["recall"] = c.recall();
    j["f_score"] = f_score(c);
    return j.dump(2) + "\n";
}

}  // namespace tcsim
