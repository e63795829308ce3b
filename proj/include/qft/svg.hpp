#pragma once

// Self-contained SVG Nichols chart (phase -360..0 deg on x, gain dB on y).

#include <string>
#include <vector>

#include "qft/lti.hpp"

namespace qft {

struct NicholsSeries {
  std::string label;
  std::string color;
  std::vector<NicholsPoint> points;
  bool closed = false;
  bool dashed = false;
};

struct NicholsMarker {
  NicholsPoint at;
  std::string label;
  std::string css_class;
  std::string color;
};

struct NicholsChart {
  std::string title;
  std::vector<NicholsSeries> series;
  std::vector<NicholsMarker> markers;
};

/// Polylines break where the phase jumps by more than 180 deg between
/// neighbours or where the gain is not finite. Element order follows the
/// input order.
std::string emit_nichols_svg(const NicholsChart& chart);

} // namespace qft
