#include "tcsim/clustering.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tcsim/csv.hpp"
#include "tcsim/error.hpp"
#include "tcsim/eval.hpp"
#include "tcsim/io.hpp"

namespace tcsim {

Clustering::Clustering(std::vector<std::string> ids, const std::vector<int>& labels) : ids_(std::move(ids)) {
    if (ids_.size() != labels.size())
        throw ValidationError("clustering: " + std::to_string(ids_.size()) + " items but " +
                              std::to_string(labels.size()) + " labels");
    std::map<int, int> renumber;
    labels_.reserve(labels.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!index_.emplace(ids_[i], i).second) throw ValidationError("clustering: duplicate item id '" + ids_[i] + "'");
        auto [it, inserted] = renumber.emplace(labels[i], static_cast<int>(renumber.size()));
        labels_.push_back(it->second);
    }
    k_ = static_cast<int>(renumber.size());
}

bool Clustering::contains(std::string_view id) const { return index_.count(std::string(id)) > 0; }

int Clustering::cluster_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw LookupError("item '" + std::string(id) + "' is not in the clustering");
    return labels_[it->second];
}

std::vector<std::vector<std::size_t>> Clustering::members() const {
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(k_));
    for (std::size_t i = 0; i < labels_.size(); ++i) out[static_cast<std::size_t>(labels_[i])].push_back(i);
    return out;
}

std::string serialize_clustering(const Clustering& c) {
    std::string out = "item_id,cluster_id\n";
    for (std::size_t i = 0; i < c.size(); ++i)
        out += csv::join_row({c.ids()[i], std::to_string(c.labels()[i])}) + "\n";
    return out;
}

Clustering parse_clustering(std::string_view text) {
    auto rows = csv::parse(text);
    if (rows.empty() || rows[0].fields != std::vector<std::string>{"item_id", "cluster_id"})
        throw ParseError("clustering CSV: expected header 'item_id,cluster_id'");
    std::vector<std::string> ids;
    std::vector<int> labels;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        if (f.size() != 2) throw ParseError("clustering CSV line " + std::to_string(rows[r].line) + ": expected 2 fields");
        int label = 0;
        auto [p, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), label);
        if (ec != std::errc{} || p != f[1].data() + f[1].size() || label < 0)
            throw ParseError("clustering CSV line " + std::to_string(rows[r].line) + ": bad cluster id '" + f[1] + "'");
        ids.push_back(f[0]);
        labels.push_back(label);
    }
    return Clustering(std::move(ids), labels);
}

void save_clustering(const Clustering& c, const std::filesystem::path& path) {
    io::write_file_atomic(path, serialize_clustering(c));
}

Clustering load_clustering(const std::filesystem::path& path) { return parse_clustering(io::read_file(path)); }

// ---------------------------------------------------------------------------

namespace {

// Packed strict upper triangle.
class TriangleStore {
public:
    explicit TriangleStore(std::size_t n) : n_(n), data_(n > 1 ? n * (n - 1) / 2 : 0, 0.0) {}
    double& at(std::size_t i, std::size_t j) {
        if (i > j) std::swap(i, j);
        return data_[offset(i) + (j - i - 1)];
    }

private:
    [[nodiscard]] std::size_t offset(std::size_t i) const { return i * (2 * n_ - i - 1) / 2; }
    std::size_t n_;
    std::vector<double> data_;
};

}  // namespace

std::vector<Merge> hac_average_merges(const DistanceMatrix& dm) {
    const std::size_t n = dm.size();
    std::vector<Merge> merges;
    if (n < 2) return merges;
    merges.reserve(n - 1);

    // Linkage is tracked as the sum of cross-pair distances, so averages are
    // exact sums over original entries divided by the pair count.
    TriangleStore sum(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) sum.at(i, j) = static_cast<double>(dm(i, j));
    std::vector<std::size_t> size(n, 1);
    std::vector<bool> active(n, true);
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> nn(n, none);
    std::vector<double> nn_dist(n, std::numeric_limits<double>::infinity());

    auto linkage = [&](std::size_t i, std::size_t j) {
        return sum.at(i, j) / static_cast<double>(size[i] * size[j]);
    };
    // Nearest active partner with a larger id; lowest id wins ties.
    auto refresh = [&](std::size_t i) {
        nn[i] = none;
        nn_dist[i] = std::numeric_limits<double>::infinity();
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!active[j]) continue;
            double d = linkage(i, j);
            if (d < nn_dist[i]) {
                nn_dist[i] = d;
                nn[i] = j;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t a = none;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i] && nn[i] != none && (a == none || nn_dist[i] < nn_dist[a])) a = i;
        const std::size_t b = nn[a];
        merges.push_back({a, b, nn_dist[a], size[a] + size[b]});

        active[b] = false;
        for (std::size_t c = 0; c < n; ++c) {
            if (!active[c] || c == a) continue;
            sum.at(a, c) += sum.at(b, c);
        }
        size[a] += size[b];

        for (std::size_t c = 0; c < n; ++c) {
            if (!active[c]) continue;
            if (c == a || nn[c] == a || nn[c] == b) {
                refresh(c);
            } else if (c < a) {
                // Row c only gained a changed entry at a.
                double d = linkage(c, a);
                if (d < nn_dist[c] || (d == nn_dist[c] && a < nn[c])) {
                    nn_dist[c] = d;
                    nn[c] = a;
                }
            }
        }
    }
    return merges;
}

Clustering cut_dendrogram(const std::vector<std::string>& ids, const std::vector<Merge>& merges, std::size_t k) {
    const std::size_t n = ids.size();
    if (k < 1 || k > n)
        throw ConfigError("cluster count k=" + std::to_string(k) + " is outside [1, " + std::to_string(n) + "]");
    if (n > 0 && merges.size() + 1 < n) throw ValidationError("dendrogram has too few merges for its item count");
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t m = 0; m < n - k; ++m) parent[find(merges[m].b)] = find(merges[m].a);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(find(i));
    return Clustering(ids, labels);
}

Clustering hac_average(const DistanceMatrix& dm, std::size_t k) {
    if (k < 1 || k > dm.size())
        throw ConfigError("cluster count k=" + std::to_string(k) + " is outside [1, " + std::to_string(dm.size()) + "]");
    return cut_dendrogram(dm.ids(), hac_average_merges(dm), k);
}

// ---------------------------------------------------------------------------

PointSet PointSet::from_table(const StepEmbeddingTable& table, const std::vector<std::string>& ids) {
    table.require_coverage(ids);
    PointSet ps;
    ps.ids = ids;
    ps.dim = table.dim();
    ps.values.reserve(ids.size() * table.dim());
    for (const auto& id : ids) {
        auto v = table.at(id);
        ps.values.insert(ps.values.end(), v.begin(), v.end());
    }
    return ps;
}

std::vector<std::vector<double>> centroids(const Clustering& c, const PointSet& points) {
    std::unordered_map<std::string, std::size_t> row;
    for (std::size_t i = 0; i < points.size(); ++i) row.emplace(points.ids[i], i);
    std::vector<std::vector<double>> out(static_cast<std::size_t>(c.k()), std::vector<double>(points.dim, 0.0));
    std::vector<std::size_t> count(out.size(), 0);
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < c.size(); ++i) {
        auto it = row.find(c.ids()[i]);
        if (it == row.end()) {
            missing.push_back(c.ids()[i]);
            continue;
        }
        auto label = static_cast<std::size_t>(c.labels()[i]);
        auto p = points.point(it->second);
        for (std::size_t d = 0; d < points.dim; ++d) out[label][d] += p[d];
        ++count[label];
    }
    if (!missing.empty()) {
        std::string msg = "no vector for " + std::to_string(missing.size()) + " item(s):";
        for (const auto& id : missing) msg += " " + id;
        throw LookupError(msg);
    }
    for (std::size_t c_i = 0; c_i < out.size(); ++c_i)
        for (auto& x : out[c_i]) x /= static_cast<double>(count[c_i]);
    return out;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
    return s;
}

}  // namespace

KMeansResult kmeans(const PointSet& points, const std::vector<std::vector<double>>& init, const KMeansOptions& options) {
    const std::size_t n = points.size(), k = init.size();
    if (k == 0) throw ConfigError("kmeans: at least one initial centroid is required");
    if (k > n)
        throw ConfigError("kmeans: k=" + std::to_string(k) + " exceeds the number of points (" + std::to_string(n) + ")");
    if (options.max_iter == 0) throw ConfigError("kmeans: max_iter must be positive");
    for (const auto& c : init)
        if (c.size() != points.dim) throw ConfigError("kmeans: initial centroid dimension does not match the points");
    {
        auto sorted = init;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw ConfigError("kmeans: initial centroids are not distinct");
    }

    KMeansResult result;
    auto cent = init;
    std::vector<std::size_t> assign(n, 0), previous;
    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        result.iterations = it;
        for (std::size_t i = 0; i < n; ++i) {
            auto p = points.point(i);
            std::size_t best = 0;
            double best_d = squared_distance(p, cent[0]);
            for (std::size_t c = 1; c < k; ++c) {
                double d = squared_distance(p, cent[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            assign[i] = best;
        }

        // Reseed empty clusters with the point farthest from its own centroid,
        // taken only from clusters that keep at least one other member.
        std::vector<std::size_t> count(k, 0);
        for (auto a : assign) ++count[a];
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] != 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (count[assign[i]] < 2) continue;
                double d = squared_distance(points.point(i), cent[assign[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --count[assign[far]];
            assign[far] = c;
            count[c] = 1;
        }

        std::vector<std::vector<double>> next(k, std::vector<double>(points.dim, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            auto p = points.point(i);
            for (std::size_t d = 0; d < points.dim; ++d) next[assign[i]][d] += p[d];
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            for (auto& x : next[c]) x /= static_cast<double>(count[c]);
            shift = std::max(shift, std::sqrt(squared_distance(next[c], cent[c])));
        }
        cent = std::move(next);

        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) objective += squared_distance(points.point(i), cent[assign[i]]);
        result.objective.push_back(objective);

        bool unchanged = !previous.empty() && previous == assign;
        previous = assign;
        if (unchanged || shift < options.tol) {
            result.converged = true;
            break;
        }
    }
    std::vector<int> labels(assign.begin(), assign.end());
    result.clustering = Clustering(points.ids, labels);
    // Reorder centroids to follow the canonical cluster numbering.
    result.centroids.assign(static_cast<std::size_t>(result.clustering.k()), {});
    for (std::size_t i = 0; i < n; ++i)
        result.centroids[static_cast<std::size_t>(result.clustering.labels()[i])] = cent[assign[i]];
    return result;
}

Clustering kmeans_from_hac(const PointSet& points, const std::vector<Merge>& merges, std::size_t k,
                           const KMeansOptions& options, const std::vector<std::string>& empty_ids) {
    auto hac = cut_dendrogram(points.ids, merges, k);
    std::unordered_map<std::string, bool> is_empty;
    for (const auto& id : empty_ids) is_empty[id] = true;

    PointSet dense;
    dense.dim = points.dim;
    std::vector<int> dense_hac_labels;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (is_empty.count(points.ids[i])) continue;
        dense.ids.push_back(points.ids[i]);
        auto p = points.point(i);
        dense.values.insert(dense.values.end(), p.begin(), p.end());
        dense_hac_labels.push_back(hac.labels()[i]);
    }

    std::vector<int> labels(points.size(), -1);
    int next_label = 0;
    if (dense.size() > 0) {
        Clustering seed(dense.ids, dense_hac_labels);
        auto init = centroids(seed, dense);
        std::vector<std::vector<double>> distinct;
        for (auto& c : init)
            if (std::find(distinct.begin(), distinct.end(), c) == distinct.end()) distinct.push_back(std::move(c));
        auto km = kmeans(dense, distinct, options);
        std::size_t d = 0;
        for (std::size_t i = 0; i < points.size(); ++i)
            if (!is_empty.count(points.ids[i])) labels[i] = km.clustering.labels()[d++];
        next_label = km.clustering.k();
    }
    for (std::size_t i = 0; i < points.size(); ++i)
        if (labels[i] < 0) labels[i] = next_label++;
    return Clustering(points.ids, labels);
}

// ---------------------------------------------------------------------------

SweepResult sweep_k(const std::function<Clustering(std::size_t)>& builder, std::size_t n_items, const GroundTruth& gt,
                    const SweepGrid& grid, std::size_t threads) {
    if (gt.empty()) throw ValidationError("sweep: ground truth is empty");
    if (grid.k_min < 1 || grid.k_step < 1 || grid.k_max < grid.k_min)
        throw ConfigError("sweep: invalid k grid (min " + std::to_string(grid.k_min) + ", max " +
                          std::to_string(grid.k_max) + ", step " + std::to_string(grid.k_step) + ")");
    std::vector<std::size_t> ks;
    for (std::size_t k = grid.k_min; k <= grid.k_max && k <= n_items; k += grid.k_step) ks.push_back(k);
    if (ks.empty())
        throw ConfigError("sweep: no grid value of k is <= the item count (" + std::to_string(n_items) + ")");

    std::vector<double> f(ks.size(), 0.0);
    std::vector<std::exception_ptr> errors(ks.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t idx = next++; idx < ks.size(); idx = next++) {
            try {
                f[idx] = f_score(confusion(builder(ks[idx]), gt));
            } catch (...) {
                errors[idx] = std::current_exception();
            }
        }
    };
    threads = std::clamp<std::size_t>(threads, 1, ks.size());
    if (threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    SweepResult r;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        r.evaluated.push_back({ks[i], f[i]});
        if (i == 0 || f[i] > r.best_f) {
            r.best_f = f[i];
            r.best_k = ks[i];
        }
    }
    return r;
}

std::string serialize_sweep_csv(const SweepResult& r) {
    std::ostringstream out;
    out << "k,f_score\n";
    for (const auto& p : r.evaluated) out << p.k << ',' << csv::number(p.f_score) << '\n';
    return out.str();
}

std::string serialize_sweep_summary(const SweepResult& r) {
    nlohmann::ordered_json j;
    j["best_k"] = r.best_k;
    j["best_f"] = r.best_f;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

std::vector<int> connected_components(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (auto [a, b] : edges) {
        auto ra = find(a), rb = find(b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(find(i));
    return labels;
}

Clustering ensemble_majority(const std::vector<Clustering>& clusterings, std::size_t quorum) {
    if (clusterings.empty()) throw ConfigError("ensemble: no input clusterings");
    if (quorum < 1 || quorum > clusterings.size())
        throw ConfigError("ensemble: quorum " + std::to_string(quorum) + " is outside [1, " +
                          std::to_string(clusterings.size()) + "]");
    const auto& ids = clusterings.front().ids();
    const std::size_t n = ids.size();

    // labels[c][i]: cluster of item i (first input's order) in input c.
    std::vector<std::vector<int>> labels(clusterings.size(), std::vector<int>(n));
    std::vector<std::vector<std::vector<std::size_t>>> members(clusterings.size());
    for (std::size_t c = 0; c < clusterings.size(); ++c) {
        const auto& cl = clusterings[c];
        if (cl.size() != n) throw ValidationError("ensemble: input " + std::to_string(c) + " covers a different item set");
        for (std::size_t i = 0; i < n; ++i) {
            if (!cl.contains(ids[i]))
                throw ValidationError("ensemble: item '" + ids[i] + "' is missing from input " + std::to_string(c));
            labels[c][i] = cl.cluster_of(ids[i]);
        }
        members[c].assign(static_cast<std::size_t>(cl.k()), {});
        for (std::size_t i = 0; i < n; ++i) members[c][static_cast<std::size_t>(labels[c][i])].push_back(i);
    }

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<std::size_t> votes(n, 0);
    std::vector<std::size_t> touched;
    for (std::size_t i = 0; i < n; ++i) {
        touched.clear();
        for (std::size_t c = 0; c < clusterings.size(); ++c) {
            for (std::size_t j : members[c][static_cast<std::size_t>(labels[c][i])]) {
                if (j <= i) continue;
                if (votes[j]++ == 0) touched.push_back(j);
            }
        }
        for (std::size_t j : touched) {
            if (votes[j] >= quorum) edges.emplace_back(i, j);
            votes[j] = 0;
        }
    }
    return Clustering(ids, connected_components(n, edges));
}

Clustering baseline_exact(const std::vector<TestStep>& steps) {
    std::map<std::string, int> classes;
    std::vector<std::string> ids;
    std::vector<int> labels;
    for (const auto& s : steps) {
        std::string key;
        if (s.tokens.empty()) {
            key = "E" + s.raw_text;
        } else {
            key = "T";
            for (const auto& t : s.tokens) key += t + '\x1f';
        }
        auto [it, inserted] = classes.emplace(key, static_cast<int>(classes.size()));
        ids.push_back(s.step_id);
        labels.push_back(it->second);
    }
    return Clustering(std::move(ids), labels);
}

Clustering baseline_wmd_zero(const DistanceMatrix& dm) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < dm.size(); ++i)
        for (std::size_t j = i + 1; j < dm.size(); ++j)
            if (dm(i, j) <= 1e-9f) edges.emplace_back(i, j);
    return Clustering(dm.ids(), connected_components(dm.size(), edges));
}

}  // namespace tcsim
