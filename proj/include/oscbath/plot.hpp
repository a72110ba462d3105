#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "oscbath/entanglement.hpp"

namespace oscbath {

/// Static SVG with two panels: η_j against t, and the best combined
/// variance against t with the separability line at 1.
void write_svg_plot(std::ostream& out, const std::vector<EntanglementReport>& reports, const std::string& title);

}  // namespace oscbath
