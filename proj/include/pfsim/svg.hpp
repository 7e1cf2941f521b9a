#pragma once

#include <string>
#include <vector>

#include "pfsim/correlation.hpp"

namespace pfsim {

// Minimal hand-rolled SVG output: a heat map for correlation matrices and a
// polyline plot for profiles. Enough for quick-look figures, nothing more.
std::string svg_heatmap(const CorrelationMap& map, const std::string& title);
std::string svg_profile(const Profile& profile, const std::string& title);

void save_svg(const std::string& svg, const std::string& path);

}  // namespace pfsim
