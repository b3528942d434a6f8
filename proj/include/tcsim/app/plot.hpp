#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tcsim::app {

/// A sweep curve: x is either k or a similarity threshold.
struct Curve {
    std::string x_label;  // "k" or "threshold"
    std::vector<double> x;
    std::vector<double> f;
    std::size_t best = 0;  // index of the marked maximum
};

/// Reads a sweep CSV (`k,f_score` or `threshold,f_score`). The maximum is
/// the first one for k curves (smallest k) and the last one for threshold
/// curves (largest threshold), matching the sweep tie-breaks.
Curve parse_curve(std::string_view csv_text);

/// `<x_label>,f_score` rows, one per grid point.
std::string curve_csv(const Curve& c);

/// Line chart of F-score against x with the maximum marked.
std::string curve_svg(const Curve& c, std::string_view title);

}  // namespace tcsim::app
