#include <doctest.h>

#include <random>
#include <regex>
#include <set>

#include "deckforge/docgen.hpp"
#include "fixtures.hpp"

using namespace deckforge;
using namespace deckforge::docgen;
using fixtures::code_of;
using fixtures::day;

namespace {

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

std::vector<double> attr_values(const std::string& text, const std::string& attr) {
  std::vector<double> out;
  const std::regex re(attr + "=\"([-0-9.eE+]+)\"");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
    out.push_back(std::stod((*it)[1]));
  }
  return out;
}

// Every opened element is closed in order. Void elements, self-closing tags,
// the doctype and script bodies are handled; anything else unbalanced fails.
bool balanced(const std::string& html, std::string* why) {
  static const std::set<std::string> kVoid{"meta", "br", "hr", "img", "link", "input"};
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = html.find('<', i)) != std::string::npos) {
    const auto end = html.find('>', i);
    if (end == std::string::npos) {
      *why = "unterminated tag";
      return false;
    }
    std::string tag = html.substr(i + 1, end - i - 1);
    i = end + 1;
    if (tag.starts_with("!")) continue;
    const bool closing = tag.starts_with("/");
    const bool self = tag.ends_with("/");
    std::string name = tag.substr(closing ? 1 : 0);
    name = name.substr(0, name.find_first_of(" /"));
    if (closing) {
      if (stack.empty() || stack.back() != name) {
        *why = "unexpected </" + name + ">";
        return false;
      }
      stack.pop_back();
    } else if (!self && !kVoid.count(name)) {
      stack.push_back(name);
      if (name == "script" || name == "style") {
        const auto close = html.find("</" + name + ">", i);
        if (close == std::string::npos) {
          *why = "unclosed " + name;
          return false;
        }
        if (html.substr(i, close - i).find('<') != std::string::npos && name == "script") {
          *why = "raw < inside script";
          return false;
        }
        i = close;
      }
    }
  }
  if (!stack.empty()) {
    *why = "unclosed <" + stack.back() + ">";
    return false;
  }
  return true;
}

Deck random_deck(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> val(-50, 500);
  const std::vector<std::string> nasty{"a<b", "x&y", "\"quoted\"", "it's", "</script>", "plain", "ü-umlaut", ""};
  const auto pick = [&] { return nasty[rng() % nasty.size()]; };
  Deck d;
  d.name = "deck " + pick();
  const int slides = static_cast<int>(rng() % 6);
  for (int s = 0; s < slides; ++s) {
    std::vector<SlideObject> objs;
    const int n_obj = 1 + static_cast<int>(rng() % 3);
    for (int o = 0; o < n_obj; ++o) {
      const std::size_t n = rng() % 8;
      std::vector<std::string> labels;
      for (std::size_t i = 0; i < n; ++i) labels.push_back(pick() + std::to_string(i));
      std::vector<double> a(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = std::abs(val(rng)) * (rng() % 4 == 0 ? 0 : 1);
        b[i] = val(rng);
      }
      switch (rng() % 5) {
        case 0: objs.emplace_back(ChartSpec(ChartKind::kPie, pick(), {{pick(), a}}, labels)); break;
        case 1: objs.emplace_back(ChartSpec(ChartKind::kBar, pick(), {{pick(), a}, {pick(), b}}, labels)); break;
        case 2: objs.emplace_back(ChartSpec(ChartKind::kLine, pick(), {{pick(), b}}, labels)); break;
        case 3: objs.emplace_back(Table{{pick(), pick()}, {{pick(), pick()}}}); break;
        default: objs.emplace_back(InsightBlock{{pick(), pick()}}); break;
      }
    }
    d.slides.emplace_back("slide " + pick(), day("2024-05-01"), std::move(objs));
  }
  return d;
}

}  // namespace

TEST_CASE("wedge angles are proportional") {
  const ChartSpec pie(ChartKind::kPie, "p", {{"v", {2, 3, 5}}}, {"a", "b", "c"});
  const auto a = wedge_angles(pie);
  REQUIRE(a.size() == 3);
  CHECK(a[0] == doctest::Approx(72));
  CHECK(a[1] == doctest::Approx(108));
  CHECK(a[2] == doctest::Approx(180));
  const ChartSpec zero(ChartKind::kPie, "p", {{"v", {0, 0}}}, {"a", "b"});
  CHECK(code_of([&] { wedge_angles(zero); }) == ErrorCode::kDegenerateData);
  const ChartSpec one(ChartKind::kPie, "p", {{"v", {4}}}, {"a"});
  CHECK(wedge_angles(one)[0] == doctest::Approx(360));
}

TEST_CASE("pie svg has one wedge per value") {
  const ChartSpec pie(ChartKind::kPie, "p", {{"v", {2, 3, 5, 0}}}, {"a", "b", "c", "d"});
  const auto svg = render_chart_svg(pie, RenderOptions{});
  CHECK(svg.starts_with("<svg"));
  CHECK(count_of(svg, "class=\"wedge\"") == 4);
  const auto angles = attr_values(svg, "data-angle");
  REQUIRE(angles.size() == 4);
  CHECK(angles[0] == doctest::Approx(72).epsilon(1e-3));
  CHECK(angles[2] == doctest::Approx(180).epsilon(1e-3));
  CHECK(angles[3] == 0);
}

TEST_CASE("bar heights scale with values from one baseline") {
  const ChartSpec bar(ChartKind::kBar, "b", {{"s", {1, 2, 4, -2}}}, {"w", "x", "y", "z"});
  const auto svg = render_chart_svg(bar, RenderOptions{});
  CHECK(count_of(svg, "class=\"bar\"") == 4);
  std::vector<double> bars, bar_y;
  const std::regex re("class=\"bar\"[^>]* y=\"([-0-9.]+)\"[^>]* height=\"([-0-9.]+)\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
    bar_y.push_back(std::stod((*it)[1]));
    bars.push_back(std::stod((*it)[2]));
  }
  REQUIRE(bars.size() == 4);
  CHECK(bars[1] / bars[0] == doctest::Approx(2).epsilon(1e-3));
  CHECK(bars[2] / bars[0] == doctest::Approx(4).epsilon(1e-3));
  CHECK(bars[3] == doctest::Approx(bars[1]).epsilon(1e-3));
  // Positive bars end at the baseline; the negative bar starts there.
  CHECK(bar_y[0] + bars[0] == doctest::Approx(bar_y[3]).epsilon(1e-3));
}

TEST_CASE("line svg has one polyline per series") {
  const ChartSpec line(ChartKind::kLine, "l", {{"a", {1, 2, 3}}, {"b", {3, 2, 1}}}, {"x", "y", "z"});
  const auto svg = render_chart_svg(line, RenderOptions{});
  CHECK(count_of(svg, "<polyline class=\"series-line\"") == 2);
}

TEST_CASE("render options validate") {
  RenderOptions o;
  o.page_width = 0;
  CHECK(code_of([&] { o.validate(); }) == ErrorCode::kValidation);
  CHECK(code_of([&] { render_html(Deck{"x", {}, {}}, o); }) == ErrorCode::kValidation);
}

TEST_CASE("escape_xml") {
  CHECK(escape_xml("a<b & \"c\" 'd'>") == "a&lt;b &amp; &quot;c&quot; &#39;d&#39;&gt;");
  CHECK(escape_xml("plain") == "plain");
}

TEST_CASE("html page structure") {
  Deck d{"demo", {}, {}};
  d.slides.emplace_back("Pie", day("2024-05-01"),
                        std::vector<SlideObject>{ChartSpec(ChartKind::kPie, "p", {{"v", {1, 1}}}, {"a", "b"}),
                                                 InsightBlock{{"one", "two"}}});
  d.slides.emplace_back("Empty", day("2024-05-01"),
                        std::vector<SlideObject>{ChartSpec(ChartKind::kPie, "z", {{"v", {0}}}, {"a"}),
                                                 Table{{"c"}, {{"1"}}}});
  RenderOptions o;
  const auto html = render_html(d, o);
  CHECK(html.starts_with("<!DOCTYPE html>"));
  CHECK(html.find("<meta charset=\"utf-8\"/>") != std::string::npos);
  CHECK(count_of(html, "<section class=\"slide\"") == 2);
  CHECK(html.find("id=\"slide-2\"") != std::string::npos);
  CHECK(count_of(html, "<ul class=\"insights\">") == 1);
  CHECK(html.find("class=\"empty-chart\"") != std::string::npos);
  CHECK(html.find("<table class=\"data-table\">") != std::string::npos);
  CHECK(html.find("chart-data") == std::string::npos);
  o.embed_data = true;
  CHECK(render_html(d, o).find("class=\"chart-data\"") != std::string::npos);
  o.theme = Theme::kDark;
  CHECK(render_html(d, o) != render_html(d, RenderOptions{o.theme, o.page_width, o.page_height, false}));
  std::string why;
  CHECK(balanced(html, &why));
}

TEST_CASE("random decks render to balanced html") {
  std::mt19937_64 rng(1234);
  int failures = 0;
  std::string first_why;
  for (int i = 0; i < 1000; ++i) {
    const Deck d = random_deck(rng);
    RenderOptions o;
    o.embed_data = i % 2 == 0;
    o.theme = i % 3 == 0 ? Theme::kDark : Theme::kLight;
    std::string why;
    if (!balanced(render_html(d, o), &why)) {
      if (failures++ == 0) first_why = why;
    }
  }
  INFO(first_why);
  CHECK(failures == 0);
}

TEST_CASE("the balance checker itself rejects broken markup") {
  std::string why;
  CHECK(!balanced("<div><p></div></p>", &why));
  CHECK(!balanced("<div>", &why));
  CHECK(balanced("<!DOCTYPE html><div><br><img/></div>", &why));
}
