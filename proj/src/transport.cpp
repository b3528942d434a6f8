#include "tcsim/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "tcsim/error.hpp"

namespace tcsim {

namespace {

class TransportSimplex {
public:
    TransportSimplex(std::span<const double> supply, std::span<const double> demand, std::span<const double> cost)
        : m_(supply.size()), n_(demand.size()), cost_(cost), flow_(m_ * n_, 0.0), basic_(m_ * n_, false) {
        double max_cost = 1.0;
        for (double c : cost) max_cost = std::max(max_cost, std::abs(c));
        eps_ = 1e-12 * max_cost;
        northwest_corner(supply, demand);
    }

    TransportSolution solve() {
        const std::size_t limit = 10000 + 100 * m_ * n_;
        std::size_t pivots = 0;
        while (true) {
            compute_potentials();
            auto entering = find_entering();
            if (!entering) break;
            if (++pivots > limit) throw std::logic_error("transport simplex: pivot limit exceeded");
            pivot(*entering);
        }
        TransportSolution sol;
        sol.rows = m_;
        sol.cols = n_;
        sol.pivots = pivots;
        for (std::size_t k = 0; k < flow_.size(); ++k)
            if (basic_[k]) sol.cost += flow_[k] * cost_[k];
        sol.flow = std::move(flow_);
        return sol;
    }

private:
    // Tree nodes: rows are 0..m-1, columns are m..m+n-1.
    void northwest_corner(std::span<const double> supply, std::span<const double> demand) {
        std::vector<double> s(supply.begin(), supply.end());
        std::vector<double> d(demand.begin(), demand.end());
        std::size_t i = 0, j = 0;
        while (true) {
            double x = std::min(s[i], d[j]);
            set_basic(i, j, x);
            s[i] -= x;
            d[j] -= x;
            if (i == m_ - 1 && j == n_ - 1) break;
            if (i == m_ - 1)
                ++j;
            else if (j == n_ - 1)
                ++i;
            else if (s[i] == 0.0)
                ++i;
            else
                ++j;
        }
    }

    void set_basic(std::size_t i, std::size_t j, double x) {
        flow_[i * n_ + j] = x;
        basic_[i * n_ + j] = true;
    }

    void build_adjacency() {
        adj_.assign(m_ + n_, {});
        for (std::size_t k = 0; k < basic_.size(); ++k) {
            if (!basic_[k]) continue;
            std::size_t i = k / n_, j = k % n_;
            adj_[i].push_back(m_ + j);
            adj_[m_ + j].push_back(i);
        }
    }

    void compute_potentials() {
        build_adjacency();
        potential_.assign(m_ + n_, 0.0);
        std::vector<bool> seen(m_ + n_, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            std::size_t node = stack.back();
            stack.pop_back();
            for (std::size_t next : adj_[node]) {
                if (seen[next]) continue;
                seen[next] = true;
                // u_i + v_j = c_ij on every basic cell.
                std::size_t i = node < m_ ? node : next;
                std::size_t j = (node < m_ ? next : node) - m_;
                potential_[next] = cost_[i * n_ + j] - potential_[node];
                stack.push_back(next);
            }
        }
    }

    std::optional<std::size_t> find_entering() const {
        for (std::size_t k = 0; k < basic_.size(); ++k) {
            if (basic_[k]) continue;
            std::size_t i = k / n_, j = k % n_;
            double reduced = cost_[k] - potential_[i] - potential_[m_ + j];
            if (reduced < -eps_) return k;
        }
        return std::nullopt;
    }

    // Cells of the tree path from row i to column j, in path order.
    std::vector<std::size_t> tree_path(std::size_t i, std::size_t j) const {
        const std::size_t target = m_ + j;
        std::vector<std::size_t> parent(m_ + n_, std::numeric_limits<std::size_t>::max());
        std::vector<std::size_t> queue{i};
        parent[i] = i;
        for (std::size_t q = 0; q < queue.size() && parent[target] == std::numeric_limits<std::size_t>::max(); ++q) {
            std::size_t node = queue[q];
            for (std::size_t next : adj_[node]) {
                if (parent[next] != std::numeric_limits<std::size_t>::max()) continue;
                parent[next] = node;
                queue.push_back(next);
            }
        }
        std::vector<std::size_t> cells;
        for (std::size_t node = target; node != i; node = parent[node]) {
            std::size_t prev = parent[node];
            std::size_t r = node < m_ ? node : prev;
            std::size_t c = (node < m_ ? prev : node) - m_;
            cells.push_back(r * n_ + c);
        }
        std::reverse(cells.begin(), cells.end());
        return cells;
    }

    void pivot(std::size_t entering) {
        std::size_t i = entering / n_, j = entering % n_;
        auto path = tree_path(i, j);
        // Along the path from row i the cycle signs alternate -, +, -, ...
        double theta = std::numeric_limits<double>::infinity();
        std::size_t leaving = std::numeric_limits<std::size_t>::max();
        for (std::size_t p = 0; p < path.size(); p += 2) {
            double x = flow_[path[p]];
            if (x < theta || (x == theta && path[p] < leaving)) {
                theta = x;
                leaving = path[p];
            }
        }
        for (std::size_t p = 0; p < path.size(); ++p) flow_[path[p]] += (p % 2 == 0) ? -theta : theta;
        flow_[leaving] = 0.0;
        basic_[leaving] = false;
        set_basic(i, j, theta);
    }

    std::size_t m_, n_;
    std::span<const double> cost_;
    std::vector<double> flow_;
    std::vector<bool> basic_;
    std::vector<std::vector<std::size_t>> adj_;
    std::vector<double> potential_;
    double eps_ = 0.0;
};

}  // namespace

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost) {
    const std::size_t m = supply.size(), n = demand.size();
    if (m == 0 || n == 0) throw ValidationError("transport: empty supply or demand");
    if (cost.size() != m * n) throw ValidationError("transport: cost matrix size does not match supply x demand");
    for (double s : supply)
        if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("transport: supplies must be finite and non-negative");
    for (double d : demand)
        if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("transport: demands must be finite and non-negative");
    for (double c : cost)
        if (!std::isfinite(c)) throw ValidationError("transport: costs must be finite");

    double total_supply = std::accumulate(supply.begin(), supply.end(), 0.0);
    double total_demand = std::accumulate(demand.begin(), demand.end(), 0.0);
    if (std::abs(total_supply - total_demand) > 1e-9 * std::max(1.0, total_supply))
        throw ValidationError("transport: supply and demand totals differ");
    if (total_supply == 0.0) {
        TransportSolution sol;
        sol.rows = m;
        sol.cols = n;
        sol.flow.assign(m * n, 0.0);
        return sol;
    }
    std::vector<double> balanced(demand.begin(), demand.end());
    if (total_demand != total_supply)
        for (auto& d : balanced) d *= total_supply / total_demand;

    return TransportSimplex(supply, balanced, cost).solve();
}

}  // namespace tcsim
