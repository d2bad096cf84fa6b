#pragma once

// Standalone SVG line charts: stacked panels sharing a time axis, one
// <rect class="band"> per marked timestep spanning every panel.

#include "turbohse/common.hpp"

#include <string>
#include <vector>

namespace turbohse::svg {

struct Series {
  std::string label;
  Vec values;  // NaN entries break the line
  bool dashed = false;
  std::string color;  // empty = palette
};

struct Panel {
  std::string title;
  std::vector<Series> series;
};

struct Chart {
  std::string title;
  std::vector<Panel> panels;
  /// Timesteps drawn as vertical bands (maintenance events).
  std::vector<int> bands;
  int width = 900;
  int panel_height = 160;
};

std::string render(const Chart& chart);

}  // namespace turbohse::svg
