#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fwdrd/policies.hpp"

namespace fwdrd::plot {

/// Line chart, one labeled polyline per curve, linear axes.
void write_mrc_svg(const std::vector<Mrc>& curves, std::ostream& out,
                   const std::string& title = "Miss ratio curves");

/// Scatter chart with one marker (<circle>) per point.
void write_scatter_svg(const std::vector<std::pair<double, double>>& points, std::ostream& out,
                       const std::string& title, const std::string& x_label, const std::string& y_label);

}  // namespace fwdrd::plot
