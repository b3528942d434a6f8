#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tcsim {

/// Optimal plan of a dense transportation problem.
struct TransportSolution {
    double cost = 0.0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> flow;  // rows x cols, row-major
    std::size_t pivots = 0;
};

/// Exact solver for
///     min sum_ij flow_ij * cost_ij
///     s.t. sum_j flow_ij = supply_i, sum_i flow_ij = demand_j, flow >= 0
/// using the transportation (network) simplex method: a northwest-corner
/// spanning-tree basis, node potentials for reduced costs, and Bland's rule
/// for entering/leaving cells so degenerate pivots cannot cycle.
///
/// `cost` is row-major with supply.size() rows. Supplies and demands must be
/// non-negative with (numerically) equal totals; the demand side is rescaled
/// to the supply total before solving.
TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost);

}  // namespace tcsim
