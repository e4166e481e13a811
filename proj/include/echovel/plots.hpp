#pragma once

#include <string>
#include <vector>

namespace echovel {

// Overlaid histograms of two speed samples with a box summary strip under
// each, written as a standalone SVG document. Bin count is chosen from the
// pooled sample size; output is deterministic.
std::string histogram_svg(const std::vector<double>& a, const std::vector<double>& b,
                          const std::string& label_a, const std::string& label_b);

}  // namespace echovel
