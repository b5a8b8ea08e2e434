// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures (capped).

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "deckforge/deck.hpp"
#include "deckforge/insights.hpp"
#include "deckforge/kb.hpp"
#include "deckforge/parser.hpp"
#include "deckforge/service.hpp"
#include "deckforge/sim.hpp"
#include "deckforge/skills.hpp"

using namespace deckforge;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

template <typename F>
void criterion(const std::string& name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail << " threw: " << e.what();
  }
  const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail << " [" << std::fixed;
  detail.precision(1);
  detail << secs << "s]";
  report(name, ok, detail.str());
}

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("deckforge_accept_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

// --- simulation -------------------------------------------------------------

sim::ExperimentConfig figure_config() {
  sim::ExperimentConfig c;
  c.repetitions = 10;
  c.slides = 3000;
  c.episode_size = 10;
  c.smoothing_window = 20;
  return c;
}

const std::vector<sim::PdfShape> kPdfs{sim::PdfShape::kInvLog, sim::PdfShape::kInvN, sim::PdfShape::kInvN2};

bool grid_dominance(std::ostream& out) {
  const std::vector<double> alphas{0.4, 0.6, 0.8, 1.0};
  const std::vector<std::size_t> ns{5, 50, 200, 1000};
  const auto grid = sim::run_grid(figure_config(), alphas, ns, kPdfs);
  int bad = 0;
  double worst_p = 0, min_diff = std::numeric_limits<double>::infinity();
  for (const auto& cell : grid) {
    bool ok;
    if (cell.alpha < 1.0) {
      ok = cell.mean_diff > 0 && cell.p_value < 0.05;
      worst_p = std::max(worst_p, cell.p_value);
    } else {
      ok = cell.mean_diff >= -0.1;
    }
    min_diff = std::min(min_diff, cell.mean_diff);
    if (!ok) {
      ++bad;
      out << " bad cell alpha=" << cell.alpha << " N=" << cell.vocab_size << " pdf=" << sim::to_string(cell.pdf)
          << " diff=" << cell.mean_diff << " p=" << cell.p_value << ";";
    }
  }
  out << grid.size() << " cells, " << bad << " failing, min diff " << min_diff << ", worst p (alpha<=0.8) " << worst_p;
  return bad == 0 && grid.size() == 48;
}

std::map<sim::PdfShape, sim::ExperimentResult> fig2_runs() {
  std::map<sim::PdfShape, sim::ExperimentResult> out;
  for (auto pdf : kPdfs) {
    auto c = figure_config();
    c.alpha = 0.6;
    c.vocab_size = 50;
    c.pdf = pdf;
    out.emplace(pdf, sim::run_experiment(c));
  }
  return out;
}

bool faster_learning(const std::map<sim::PdfShape, sim::ExperimentResult>& runs, std::ostream& out) {
  bool ok = true;
  for (const auto& [pdf, r] : runs) {
    // Smoothing recomputed here from the raw curves.
    const auto& rn = r.learning_curve.at(kb::Variant::kRobust);
    const auto& nn = r.learning_curve.at(kb::Variant::kNaive);
    const auto smooth = [](const std::vector<double>& v) {
      std::vector<double> s(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t lo = i + 1 >= 20 ? i + 1 - 20 : 0;
        double sum = 0;
        for (std::size_t j = lo; j <= i; ++j) sum += v[j];
        s[i] = sum / static_cast<double>(i + 1 - lo);
      }
      return s;
    };
    const auto rs = smooth(rn), ns = smooth(nn);
    const std::size_t burn = (rs.size() + 9) / 10;
    std::size_t good = 0;
    for (std::size_t i = burn; i < rs.size(); ++i) good += rs[i] >= ns[i] ? 1 : 0;
    const double frac = static_cast<double>(good) / static_cast<double>(rs.size() - burn);
    out << sim::to_string(pdf) << " " << frac << "; ";
    ok = ok && frac >= 0.9;
  }
  out << "(fraction of post-burn-in indices with RKB >= NKB, need >= 0.9)";
  return ok;
}

bool diversity(const std::map<sim::PdfShape, sim::ExperimentResult>& runs, std::ostream& out) {
  std::map<sim::PdfShape, std::size_t> t;
  for (const auto& [pdf, r] : runs) {
    const auto& curve = r.learning_curve_smoothed.at(kb::Variant::kRobust);
    // Plateau: mean of the last 10% of points; first index reaching 90% of it.
    const std::size_t tail = std::max<std::size_t>(1, curve.size() / 10);
    double plateau = 0;
    for (std::size_t i = curve.size() - tail; i < curve.size(); ++i) plateau += curve[i];
    plateau /= static_cast<double>(tail);
    std::size_t idx = curve.size();
    for (std::size_t i = 0; i < curve.size(); ++i) {
      if (curve[i] >= 0.9 * plateau) {
        idx = i;
        break;
      }
    }
    t[pdf] = idx;
    out << sim::to_string(pdf) << "=" << idx << " (lib " << sim::time_to_plateau_fraction(curve) << ") ";
  }
  return t[sim::PdfShape::kInvN2] < t[sim::PdfShape::kInvN] && t[sim::PdfShape::kInvN] < t[sim::PdfShape::kInvLog];
}

bool user_study(std::ostream& out) {
  const auto r = sim::nkb_user_study(18, 5, sim::PdfShape::kInvN, 50, 20, 2021);
  double first = 0, last = 0;
  for (int i = 0; i < 6; ++i) first += r.clarifications_per_user[i];
  for (int i = 12; i < 18; ++i) last += r.clarifications_per_user[i];
  first /= 6;
  last /= 6;
  out << "mean clarifications first 6 users " << first << ", last 6 users " << last << " ("
      << (first > 0 ? 100.0 * (first - last) / first : 0.0) << "% lower)";
  return r.clarifications_per_user.size() == 18 && last < first;
}

// --- knowledge base ---------------------------------------------------------

bool belief_arithmetic(std::ostream& out) {
  double worst_closed = 0;
  for (const std::string old_sub : {"barchart", "piechart", "table"}) {
    kb::RobustKB k;
    const std::string new_sub = "linechart";
    k.observe("object", "w", old_sub);
    worst_closed = std::max(worst_closed, std::abs(k.belief("object", old_sub, "w") - 1.0));
    for (int m = 1; m <= 500; ++m) {
      k.observe("object", "w", new_sub);
      worst_closed = std::max(worst_closed, std::abs(k.belief("object", old_sub, "w") - 1.0 / (m + 1)));
      worst_closed = std::max(worst_closed, std::abs(k.belief("object", new_sub, "w") - double(m) / (m + 1)));
    }
  }
  // Random sequences against a running-average oracle: after l updates the
  // belief in s is (# of updates naming s) / l.
  std::mt19937_64 rng(99);
  const auto subs_set = kb::Ontology::default_ontology().sub_concepts("object");
  const std::vector<std::string> subs(subs_set.begin(), subs_set.end());
  double worst_norm = 0, worst_oracle = 0;
  for (int seq = 0; seq < 10000; ++seq) {
    kb::RobustKB k;
    std::map<std::string, int> counts;
    const int len = 1 + static_cast<int>(rng() % 40);
    for (int i = 1; i <= len; ++i) {
      const auto& s = subs[rng() % subs.size()];
      k.observe("object", "w", s);
      ++counts[s];
    }
    double sum = 0;
    for (const auto& s : subs) {
      const double b = k.belief("object", s, "w");
      sum += b;
      const double expect = counts.count(s) ? double(counts[s]) / len : 0.0;
      worst_oracle = std::max(worst_oracle, std::abs(b - expect));
    }
    worst_norm = std::max(worst_norm, std::abs(sum - 1.0));
  }
  out << "closed-form error " << worst_closed << " (tol 1e-12), normalization error " << worst_norm
      << " (tol 1e-9), oracle error " << worst_oracle;
  return worst_closed <= 1e-12 && worst_norm <= 1e-9 && worst_oracle <= 1e-9;
}

// --- parser -----------------------------------------------------------------

double oracle_score(const parser::CrfModel& m, const parser::EncodedSequence& seq, const std::vector<int>& y) {
  double s = 0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    for (int f : seq.features[t]) s += m.state_weight(f, y[t]);
    if (t > 0) s += m.transition_weight(y[t - 1], y[t]);
  }
  return s;
}

bool parser_quality(std::ostream& out) {
  using namespace parser;
  const auto corpus = synthetic_corpus(7, 75);
  const std::vector<TaggedCommand> train(corpus.begin(), corpus.begin() + 50);
  const std::vector<TaggedCommand> test(corpus.begin() + 50, corpus.end());
  const auto model = train_tagger(train, TrainOptions{});
  const auto s = evaluate_tagger(model, test);
  out << "F1 " << s.macro_f1 << " P " << s.precision << " R " << s.recall << "; ";
  bool ok = s.macro_f1 >= 0.85 && s.precision >= 0.85 && s.recall >= 0.85;

  // Gradient against central differences.
  CrfModel g = CrfModel::with_features_from(synthetic_corpus(8, 12), 0.1);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> w(0.0, 0.3);
  for (auto& p : g.mutable_params()) p = w(rng);
  std::vector<EncodedSequence> data;
  for (const auto& c : synthetic_corpus(8, 12)) data.push_back(g.encode(c));
  std::vector<double> grad;
  g.objective(data, &grad);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < g.num_params(); i += std::max<std::size_t>(1, g.num_params() / 300)) {
    CrfModel m = g;
    m.mutable_params()[i] += 1e-5;
    const double up = m.objective(data, nullptr);
    m.mutable_params()[i] -= 2e-5;
    const double fd = (up - m.objective(data, nullptr)) / 2e-5;
    num += (fd - grad[i]) * (fd - grad[i]);
    den += fd * fd + grad[i] * grad[i];
  }
  const double rel = std::sqrt(num) / std::sqrt(den);
  out << "gradient rel err " << rel << "; ";
  ok = ok && rel < 1e-4;

  // Viterbi against enumeration of every labeling.
  int mismatches = 0, cases = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    for (int t = 0; t < (n <= 6 ? 5 : 2); ++t) {
      CrfModel m = g;
      for (auto& p : m.mutable_params()) p = w(rng) * 3;
      TaggedCommand cmd;
      while (cmd.tokens.size() < n) {
        const auto& c = corpus[rng() % corpus.size()];
        const std::size_t i = rng() % c.tokens.size();
        cmd.tokens.push_back(c.tokens[i]);
        cmd.labels.push_back(c.labels[i]);
      }
      const auto seq = m.encode(cmd);
      std::vector<int> y(n, 0), arg;
      double best = -std::numeric_limits<double>::infinity();
      while (true) {
        const double sc = oracle_score(m, seq, y);
        if (sc > best) {
          best = sc;
          arg = y;
        }
        std::size_t i = 0;
        while (i < n && ++y[i] == kNumLabels) y[i++] = 0;
        if (i == n) break;
      }
      ++cases;
      if (m.viterbi(seq) != arg) ++mismatches;
    }
  }
  out << "viterbi mismatches " << mismatches << "/" << cases;
  return ok && mismatches == 0;
}

// --- skills -----------------------------------------------------------------

bool macro_equivalence(const fs::path& workspace, std::ostream& out) {
  const auto catalog = skills::DataCatalog::from_directory(workspace / "datasets");
  skills::ExecutionContext ctx;
  ctx.data = &catalog;
  ctx.today = std::chrono::year{2025} / 5 / 20;
  skills::SkillLibrary lib;
  std::mt19937_64 rng(17);
  const std::vector<std::string> objs{"piechart", "barchart", "linechart", "table"};
  const std::vector<std::string> data{"Energy", "Finance", "TSLA", "AAPL", "GM", "NIO"};
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ResolvedIntent> history;
    std::vector<std::pair<std::string, std::string>> live;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      const int pick = static_cast<int>(rng() % 4);
      if (pick == 0 && !live.empty()) {
        const auto [o, d] = live[rng() % live.size()];
        history.push_back({"update", o, d, "target", {}});
      } else if (pick == 1 && !live.empty()) {
        const auto idx = rng() % live.size();
        history.push_back({"delete", live[idx].first, live[idx].second, "target", {}});
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(idx));
      } else {
        const std::string o = objs[rng() % objs.size()], d = data[rng() % data.size()];
        history.push_back({"create", o, d, "target", {}});
        live.emplace_back(o, d);
      }
    }
    const std::string name = "macro_" + std::to_string(trial);
    lib.record_macro(history, name);
    const Deck via_macro = lib.execute(ResolvedIntent{"create", name, "", "target", {}}, Deck{"target", {}, {}}, ctx);
    Deck stepwise{"target", {}, {}};
    for (const auto& step : history) stepwise = lib.execute_atomic(step, stepwise, ctx);
    if (serialize_deck(via_macro) != serialize_deck(stepwise)) ++mismatches;
  }
  out << "100 random macros, " << mismatches << " differ from stepwise replay";
  return mismatches == 0;
}

// --- insights ---------------------------------------------------------------

bool insight_selection(std::ostream& out) {
  using namespace insights;
  std::mt19937_64 rng(4242);
  const std::vector<std::string> subjects{"AAPL", "F", "GM", "NIO", "TSLA"};
  const std::vector<PrimitiveKind> kinds{PrimitiveKind::kMinimum,        PrimitiveKind::kMaximum,
                                         PrimitiveKind::kRollingAverage, PrimitiveKind::kVolatility,
                                         PrimitiveKind::kDistanceToMean, PrimitiveKind::kComparativeFactor};
  const std::vector<std::string> scorers{"magnitude", "peer", "prev_period"};
  int mismatches = 0, over_k = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    ScoringConfig cfg;
    cfg.k = 1 + rng() % 6;
    for (const auto& s : scorers) cfg.weights[s] = static_cast<double>(rng() % 5) / 2.0;
    cfg.weights["peer"] += 0.5;
    std::vector<Insight> in;
    std::vector<std::pair<int, int>> pairs;
    for (int s = 0; s < 5; ++s)
      for (int k = 0; k < 6; ++k) pairs.emplace_back(s, k);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    pairs.resize(rng() % 16);
    for (auto [s, k] : pairs) {
      Insight i;
      i.subject = subjects[s];
      i.primitive = {kinds[k]};
      for (const auto& name : scorers) i.utility_scores[name] = static_cast<double>(rng() % 5) * 0.25;
      in.push_back(i);
    }
    std::vector<std::tuple<double, std::string, std::string>> keys;
    for (const auto& i : in) {
      double a = 0;
      for (const auto& [name, wt] : cfg.weights) a += wt * i.utility_scores.at(name);
      keys.emplace_back(-a, i.subject, std::string(to_string(i.primitive.kind)));
    }
    std::sort(keys.begin(), keys.end());
    if (keys.size() > cfg.k) keys.resize(cfg.k);
    const auto got = rank_and_select(in, cfg);
    if (got.size() > cfg.k) ++over_k;
    bool same = got.size() == keys.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      same = got[i].subject == std::get<1>(keys[i]) && to_string(got[i].primitive.kind) == std::get<2>(keys[i]) &&
             std::abs(got[i].aggregate + std::get<0>(keys[i])) < 1e-12;
    }
    if (!same) ++mismatches;
  }
  out << "10000 inputs, " << mismatches << " differ from sort-truncate, " << over_k << " exceed k";
  return mismatches == 0 && over_k == 0;
}

// --- briefing flow ----------------------------------------------------------

struct Bar {
  Date date;
  double close;
};

std::vector<Bar> read_closes(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<Bar> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    const int y = std::stoi(f[0].substr(0, 4));
    const unsigned m = std::stoul(f[0].substr(5, 2)), d = std::stoul(f[0].substr(8, 2));
    out.push_back({std::chrono::year{y} / m / d, std::stod(f[4])});
  }
  return out;
}

std::string iso(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(d.year()), unsigned(d.month()), unsigned(d.day()));
  return buf;
}

// Weekly medians of closes in (last - 6 months, last], keyed by Monday.
std::pair<std::vector<std::string>, std::vector<double>> six_month_weekly_median(const std::vector<Bar>& bars) {
  const Date anchor = bars.back().date;
  Date from = anchor - std::chrono::months(6);
  if (!from.ok()) from = from.year() / from.month() / std::chrono::last;
  std::map<std::chrono::sys_days, std::vector<double>> weeks;
  for (const auto& b : bars) {
    if (!(b.date > from && b.date <= anchor)) continue;
    const std::chrono::sys_days sd{b.date};
    const auto monday = sd - (std::chrono::weekday{sd} - std::chrono::Monday);
    weeks[monday].push_back(b.close);
  }
  std::vector<std::string> labels;
  std::vector<double> values;
  for (auto& [monday, closes] : weeks) {
    std::sort(closes.begin(), closes.end());
    const std::size_t n = closes.size();
    labels.push_back(iso(Date{monday}));
    values.push_back(n % 2 ? closes[n / 2] : (closes[n / 2 - 1] + closes[n / 2]) / 2);
  }
  return {labels, values};
}

bool briefing_flow(const fs::path& root, std::ostream& out) {
  service::WorkspaceOptions opts;
  opts.clock = skills::fixed_clock(std::chrono::year{2025} / 5 / 20);
  service::Workspace ws(root, opts);
  const auto sid = ws.create_session();
  const auto ask = ws.handle_message(sid, "create a briefing deck about Tesla Motor");
  if (!ask.clarification || ask.reply_text.find("ticker") == std::string::npos) {
    out << "no ticker clarification: " << ask.reply_text;
    return false;
  }
  ws.handle_message(sid, "TSLA");
  const auto first = ws.handle_message(sid, "Run the analysis");
  const auto deck1 = ws.deck(first.deck);
  if (!deck1 || deck1->slides.size() != 10) {
    out << "first run did not produce 10 slides: " << first.reply_text;
    return false;
  }
  ws.handle_message(sid, "change time horizon to 6 months");
  ws.handle_message(sid, "use the Median");
  const auto second = ws.handle_message(sid, "Run the analysis");
  const auto deck2 = ws.deck(second.deck);
  if (!deck2 || deck2->slides.size() != 10 || second.deck_version != first.deck_version + 1) {
    out << "second run failed: " << second.reply_text;
    return false;
  }

  const auto [labels, values] = six_month_weekly_median(read_closes(root / "datasets" / "TSLA.csv"));
  const ChartSpec* chart = nullptr;
  for (const auto& obj : deck2->slides[0].objects()) {
    if (const auto* c = std::get_if<ChartSpec>(&obj)) chart = c;
  }
  const Series* tsla = nullptr;
  if (chart) {
    for (const auto& s : chart->series()) {
      if (s.label == "TSLA") tsla = &s;
    }
  }
  if (!tsla) {
    out << "slide 1 has no TSLA series";
    return false;
  }
  double worst = 0;
  const bool same_len = tsla->values.size() == values.size() && chart->x_labels() == labels;
  for (std::size_t i = 0; same_len && i < values.size(); ++i) {
    worst = std::max(worst, std::abs(tsla->values[i] - values[i]));
  }
  std::size_t max_insights = 0;
  for (const auto& slide : deck2->slides) {
    for (const auto& obj : slide.objects()) {
      if (const auto* b = std::get_if<InsightBlock>(&obj)) max_insights = std::max(max_insights, b->lines.size());
    }
  }
  out << "10 slides, deck_version " << first.deck_version << " -> " << second.deck_version << ", " << values.size()
      << " weekly medians, labels " << (same_len ? "match" : "differ") << ", max abs error " << worst
      << ", max insights per slide " << max_insights;
  return same_len && worst <= 1e-9 && max_insights <= insights::ScoringConfig::defaults().k;
}

// --- no secondary component -------------------------------------------------

bool direct_http(const fs::path& root, std::ostream& out) {
  service::Workspace ws(root);
  service::HttpServer server(ws);
  const int port = server.bind("127.0.0.1", 0);
  std::thread serving([&] { server.listen(); });
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(60, 0);
  bool ok = false;
  auto s = cli.Post("/sessions", "", "application/json");
  if (s && s->status == 201) {
    const std::string sid = Json::parse(s->body)["session_id"];
    auto m = cli.Post("/sessions/" + sid + "/messages", R"({"text":"create a piechart of Energy"})", "application/json");
    if (m && m->status == 200) {
      const std::string deck = Json::parse(m->body)["deck"];
      auto d = cli.Get("/decks/" + deck + "/html");
      ok = d && d->status == 200 && d->body.find("class=\"wedge\"") != std::string::npos;
      out << "plain HTTP session created deck '" << deck << "' and rendered it";
    }
  }
  ws.shutdown();
  server.stop();
  serving.join();
  return ok;
}

}  // namespace

int main() {
  std::cout.setf(std::ios::boolalpha);
  ScratchDir dir("ws");
  service::init_demo_workspace(dir.path);

  criterion("rkb_dominates_nkb_grid", grid_dominance);
  const auto runs = fig2_runs();
  criterion("rkb_learns_faster", [&](std::ostream& o) { return faster_learning(runs, o); });
  criterion("smaller_vocabulary_learns_faster", [&](std::ostream& o) { return diversity(runs, o); });
  criterion("belief_arithmetic", belief_arithmetic);
  criterion("parser_quality", parser_quality);
  criterion("macro_equivalence", [&](std::ostream& o) { return macro_equivalence(dir.path, o); });
  criterion("briefing_flow", [&](std::ostream& o) { return briefing_flow(dir.path, o); });
  criterion("insight_selection", insight_selection);
  criterion("nkb_user_study", user_study);
  criterion("runs_without_chat_ui", [&](std::ostream& o) { return direct_http(dir.path, o); });

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return std::min(failures, 100);
}
