#include "deckforge/docgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "deckforge/error.hpp"
#include "deckforge/json_io.hpp"

namespace deckforge::docgen {

namespace {

struct Palette {
  const char* background;
  const char* foreground;
  const char* muted;
  const char* panel;
};

Palette palette(Theme theme) {
  if (theme == Theme::kDark) return {"#1e1f24", "#e8e8ea", "#9a9ca5", "#2a2c33"};
  return {"#ffffff", "#1d1d1f", "#6e6e73", "#f5f5f7"};
}

constexpr const char* kSeriesColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                         "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* color(std::size_t i) { return kSeriesColors[i % std::size(kSeriesColors)]; }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string svg_open(int w, int h, const Palette& pal) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) + "\">" +
         "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" + std::to_string(w) + "\" height=\"" + std::to_string(h) +
         "\" fill=\"" + pal.panel + "\"/>";
}

std::string text_el(double x, double y, const std::string& body, const Palette& pal, const char* anchor = "start",
                    int size = 12) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) + "\" fill=\"" +
         pal.foreground + "\" text-anchor=\"" + anchor + "\">" + escape_xml(body) + "</text>";
}

std::string legend(const ChartSpec& chart, double x, double y, const Palette& pal) {
  std::string out = "<g class=\"legend\">";
  for (std::size_t i = 0; i < chart.series().size(); ++i) {
    const double yy = y + 18.0 * static_cast<double>(i);
    out += "<rect x=\"" + num(x) + "\" y=\"" + num(yy - 10) + "\" width=\"10\" height=\"10\" fill=\"" + color(i) + "\"/>";
    out += text_el(x + 14, yy, chart.series()[i].label, pal);
  }
  return out + "</g>";
}

std::string render_pie(const ChartSpec& chart, int w, int h, const Palette& pal) {
  const auto angles = wedge_angles(chart);
  const double cx = w * 0.4, cy = h * 0.55, r = std::min(w, h) * 0.35;
  std::string out = "<g class=\"pie\">";
  double start = 0;
  const auto point = [&](double deg) {
    const double rad = (deg - 90.0) * std::numbers::pi / 180.0;
    return std::pair{cx + r * std::cos(rad), cy + r * std::sin(rad)};
  };
  const auto& labels = chart.x_labels();
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double sweep = angles[i];
    std::string d;
    if (sweep >= 360.0 - 1e-9) {
      // a full circle cannot be one arc: draw two halves
      const auto [x0, y0] = point(0);
      const auto [x1, y1] = point(180);
      d = "M " + num(x0) + " " + num(y0) + " A " + num(r) + " " + num(r) + " 0 1 1 " + num(x1) + " " + num(y1) +
          " A " + num(r) + " " + num(r) + " 0 1 1 " + num(x0) + " " + num(y0) + " Z";
    } else {
      const auto [x0, y0] = point(start);
      const auto [x1, y1] = point(start + sweep);
      d = "M " + num(cx) + " " + num(cy) + " L " + num(x0) + " " + num(y0) + " A " + num(r) + " " + num(r) + " 0 " +
          (sweep > 180.0 ? "1" : "0") + " 1 " + num(x1) + " " + num(y1) + " Z";
    }
    out += "<path class=\"wedge\" data-angle=\"" + num(sweep) + "\" data-label=\"" + escape_xml(labels[i]) + "\" d=\"" +
           d + "\" fill=\"" + color(i) + "\"/>";
    start += sweep;
  }
  out += "</g><g class=\"legend\">";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double yy = 40.0 + 18.0 * static_cast<double>(i);
    out += "<rect x=\"" + num(w * 0.78) + "\" y=\"" + num(yy - 10) + "\" width=\"10\" height=\"10\" fill=\"" +
           color(i) + "\"/>";
    out += text_el(w * 0.78 + 14, yy, labels[i], pal);
  }
  return out + "</g>";
}

struct Frame {
  double left, top, width, height;
};

std::pair<double, double> value_range(const ChartSpec& chart) {
  double lo = 0, hi = 0;
  for (const auto& s : chart.series()) {
    for (double v : s.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi == lo) hi = lo + 1.0;
  return {lo, hi};
}

std::string render_bars(const ChartSpec& chart, int w, int h, const Palette& pal) {
  const Frame f{50, 40, w * 0.72, h - 90.0};
  const auto [lo, hi] = value_range(chart);
  const double scale = f.height / (hi - lo);
  const double baseline = f.top + hi * scale;
  const std::size_t groups = chart.x_labels().size();
  const std::size_t per = std::max<std::size_t>(1, chart.series().size());
  const double group_w = groups == 0 ? 0 : f.width / static_cast<double>(groups);
  const double bar_w = group_w * 0.8 / static_cast<double>(per);
  std::string out = "<line class=\"axis\" x1=\"" + num(f.left) + "\" y1=\"" + num(baseline) + "\" x2=\"" +
                    num(f.left + f.width) + "\" y2=\"" + num(baseline) + "\" stroke=\"" + pal.muted + "\"/>";
  out += "<g class=\"bars\">";
  for (std::size_t s = 0; s < chart.series().size(); ++s) {
    const auto& values = chart.series()[s].values;
    for (std::size_t g = 0; g < groups; ++g) {
      const double v = values[g];
      const double height = std::abs(v) * scale;
      const double x = f.left + group_w * static_cast<double>(g) + group_w * 0.1 + bar_w * static_cast<double>(s);
      const double y = v >= 0 ? baseline - height : baseline;
      out += "<rect class=\"bar\" data-value=\"" + num(v) + "\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
             num(bar_w) + "\" height=\"" + num(height) + "\" fill=\"" + color(s) + "\"/>";
    }
  }
  out += "</g>";
  if (groups > 0 && groups <= 16) {
    for (std::size_t g = 0; g < groups; ++g) {
      out += text_el(f.left + group_w * (static_cast<double>(g) + 0.5), f.top + f.height + 16, chart.x_labels()[g], pal,
                     "middle", 9);
    }
  }
  return out + legend(chart, w * 0.8, 40, pal);
}

std::string render_lines(const ChartSpec& chart, int w, int h, const Palette& pal) {
  const Frame f{50, 40, w * 0.72, h - 90.0};
  double lo = 0, hi = 0;
  bool first = true;
  for (const auto& s : chart.series()) {
    for (double v : s.values) {
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  }
  if (hi == lo) {
    hi += 1.0;
    lo -= 1.0;
  }
  const std::size_t n = chart.x_labels().size();
  const auto x_at = [&](std::size_t i) {
    return n <= 1 ? f.left + f.width / 2 : f.left + f.width * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  const auto y_at = [&](double v) { return f.top + f.height * (hi - v) / (hi - lo); };
  std::string out = "<line class=\"axis\" x1=\"" + num(f.left) + "\" y1=\"" + num(f.top + f.height) + "\" x2=\"" +
                    num(f.left + f.width) + "\" y2=\"" + num(f.top + f.height) + "\" stroke=\"" + pal.muted + "\"/>";
  out += text_el(f.left - 6, f.top + 4, num(hi), pal, "end", 9);
  out += text_el(f.left - 6, f.top + f.height, num(lo), pal, "end", 9);
  for (std::size_t s = 0; s < chart.series().size(); ++s) {
    std::string pts;
    const auto& values = chart.series()[s].values;
    for (std::size_t i = 0; i < values.size(); ++i) pts += (i ? " " : "") + num(x_at(i)) + "," + num(y_at(values[i]));
    out += "<polyline class=\"series-line\" data-series=\"" + escape_xml(chart.series()[s].label) + "\" points=\"" +
           pts + "\" fill=\"none\" stroke=\"" + color(s) + "\" stroke-width=\"2\"/>";
  }
  if (n > 0) {
    out += text_el(f.left, f.top + f.height + 16, chart.x_labels().front(), pal, "start", 9);
    out += text_el(f.left + f.width, f.top + f.height + 16, chart.x_labels().back(), pal, "end", 9);
  }
  return out + legend(chart, w * 0.8, 40, pal);
}

std::string render_grid(const ChartSpec& chart, int w, const Palette& pal) {
  std::string out = "<g class=\"grid\">";
  const double col_w = w / static_cast<double>(chart.series().size() + 1);
  out += text_el(10, 40, "", pal);
  for (std::size_t s = 0; s < chart.series().size(); ++s) {
    out += text_el(col_w * static_cast<double>(s + 1), 40, chart.series()[s].label, pal);
  }
  for (std::size_t r = 0; r < chart.x_labels().size(); ++r) {
    const double y = 60 + 18.0 * static_cast<double>(r);
    out += text_el(10, y, chart.x_labels()[r], pal);
    for (std::size_t s = 0; s < chart.series().size(); ++s) {
      out += text_el(col_w * static_cast<double>(s + 1), y, num(chart.series()[s].values[r]), pal);
    }
  }
  return out + "</g>";
}

std::string render_table(const Table& t) {
  std::string out = "<table class=\"data-table\"><thead><tr>";
  for (const auto& c : t.columns) out += "<th>" + escape_xml(c) + "</th>";
  out += "</tr></thead><tbody>";
  for (const auto& row : t.rows) {
    out += "<tr>";
    for (const auto& cell : row) out += "<td>" + escape_xml(cell) + "</td>";
    out += "</tr>";
  }
  return out + "</tbody></table>";
}

std::string embedded_json(const ChartSpec& chart) {
  std::string text = to_json(chart).dump();
  std::string safe;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '<') {
      safe += "\\u003c";
    } else {
      safe += text[i];
    }
  }
  return "<script type=\"application/json\" class=\"chart-data\">" + safe + "</script>";
}

}  // namespace

void RenderOptions::validate() const {
  if (page_width <= 0 || page_height <= 0) throw Error(ErrorCode::kValidation, "page size must be positive");
}

std::string escape_xml(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<double> wedge_angles(const ChartSpec& chart) {
  if (chart.kind() != ChartKind::kPie) throw Error(ErrorCode::kValidation, "wedge angles need a piechart");
  const auto& values = chart.series().front().values;
  double total = 0;
  for (double v : values) total += v;
  if (!(total > 0)) throw Error(ErrorCode::kDegenerateData, "piechart values are all zero");
  std::vector<double> angles;
  angles.reserve(values.size());
  for (double v : values) angles.push_back(360.0 * v / total);
  return angles;
}

std::string render_chart_svg(const ChartSpec& chart, const RenderOptions& opts) {
  opts.validate();
  const Palette pal = palette(opts.theme);
  const int w = opts.page_width;
  const int h = std::max(200, opts.page_height * 2 / 3);
  std::string out = svg_open(w, h, pal);
  out += text_el(12, 22, chart.title(), pal, "start", 14);
  switch (chart.kind()) {
    case ChartKind::kPie: out += render_pie(chart, w, h, pal); break;
    case ChartKind::kBar: out += render_bars(chart, w, h, pal); break;
    case ChartKind::kLine: out += render_lines(chart, w, h, pal); break;
    case ChartKind::kTable: out += render_grid(chart, w, pal); break;
  }
  return out + "</svg>";
}

std::string render_html(const Deck& deck, const RenderOptions& opts) {
  opts.validate();
  const Palette pal = palette(opts.theme);
  std::string out = "<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\"/><title>" + escape_xml(deck.name) +
                    "</title><style>";
  out += std::string("body{margin:0;font-family:Helvetica,Arial,sans-serif;background:") + pal.background +
         ";color:" + pal.foreground + "}";
  out += "header{padding:16px 24px}section.slide{width:" + std::to_string(opts.page_width) +
         "px;min-height:" + std::to_string(opts.page_height) + "px;margin:16px auto;padding:16px;background:" +
         pal.panel + ";box-sizing:border-box}";
  out += std::string(".date{color:") + pal.muted + "}table.data-table{border-collapse:collapse}" +
         "table.data-table td,table.data-table th{border:1px solid " + pal.muted + ";padding:4px 8px}";
  out += "</style></head><body><header><h1>" + escape_xml(deck.name) + "</h1><p class=\"parameters\">";
  std::string firms;
  for (const auto& f : deck.parameters.comparable_firms) firms += (firms.empty() ? "" : ", ") + f;
  out += "Comparable firms: " + escape_xml(firms) + " | Horizon: " + std::to_string(deck.parameters.horizon_months) +
         " months | Metric: " + std::string(to_string(deck.parameters.aggregation_metric));
  out += "</p></header>";
  for (std::size_t i = 0; i < deck.slides.size(); ++i) {
    const Slide& slide = deck.slides[i];
    out += "<section class=\"slide\" id=\"slide-" + std::to_string(i + 1) + "\"><h2>" + escape_xml(slide.title()) +
           "</h2><p class=\"date\">" + format_iso_date(slide.date()) + "</p>";
    for (const auto& object : slide.objects()) {
      if (const auto* chart = std::get_if<ChartSpec>(&object)) {
        out += "<figure class=\"chart\">";
        try {
          out += render_chart_svg(*chart, opts);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kDegenerateData) throw;
          out += "<p class=\"empty-chart\">" + escape_xml(chart->title()) + ": no data to plot</p>";
        }
        if (opts.embed_data) out += embedded_json(*chart);
        out += "</figure>";
      } else if (const auto* block = std::get_if<InsightBlock>(&object)) {
        out += "<ul class=\"insights\">";
        for (const auto& line : block->lines) out += "<li>" + escape_xml(line) + "</li>";
        out += "</ul>";
      } else {
        out += render_table(std::get<Table>(object));
      }
    }
    out += "</section>";
  }
  return out + "</body></html>\n";
}

}  // namespace deckforge::docgen
