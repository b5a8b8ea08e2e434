#pragma once

#include <string>
#include <vector>

#include "deckforge/deck.hpp"

namespace deckforge::docgen {

enum class Theme { kLight, kDark };

struct RenderOptions {
  Theme theme = Theme::kLight;
  int page_width = 960;
  int page_height = 540;
  /// Adds each chart's data as a JSON script block next to the SVG.
  bool embed_data = false;

  /// Throws Error(kValidation) unless both dimensions are positive.
  void validate() const;
};

/// Sweep of each piechart wedge in degrees, proportional to the values.
/// Throws Error(kDegenerateData) when every value is zero.
std::vector<double> wedge_angles(const ChartSpec& chart);

/// Standalone SVG 1.1 for one chart: one path per pie wedge, one rect per
/// bar, one polyline per line series, a grid of text cells for tables.
std::string render_chart_svg(const ChartSpec& chart, const RenderOptions& opts);

/// Self-contained HTML5 page: a header, then one section per slide holding its
/// charts as inline SVG, tables and insight bullets.
std::string render_html(const Deck& deck, const RenderOptions& opts);

std::string escape_xml(std::string_view text);

}  // namespace deckforge::docgen
