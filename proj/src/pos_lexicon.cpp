#include <cctype>
#include <string>
#include <string_view>
#include <unordered_map>

#include "deckforge/parser.hpp"

namespace deckforge::parser {

namespace {

struct Entry {
  std::string_view word;
  PosTag tag;
};

constexpr PosTag N = PosTag::kNoun;
constexpr PosTag V = PosTag::kVerb;
constexpr PosTag D = PosTag::kDeterminer;
constexpr PosTag P = PosTag::kPreposition;
constexpr PosTag A = PosTag::kAdjective;
constexpr PosTag R = PosTag::kAdverb;
constexpr PosTag PR = PosTag::kPronoun;
constexpr PosTag C = PosTag::kConjunction;
constexpr PosTag NUM = PosTag::kNumber;
constexpr PosTag PT = PosTag::kParticle;

// Command-domain vocabulary. Lookup is on the lowercased token.
constexpr Entry kLexicon[] = {
    // determiners
    {"a", D}, {"an", D}, {"the", D}, {"this", D}, {"that", D}, {"these", D}, {"those", D},
    {"each", D}, {"every", D}, {"some", D}, {"any", D}, {"all", D}, {"both", D}, {"no", D},
    {"another", D}, {"my", D}, {"our", D}, {"your", D}, {"their", D}, {"its", D}, {"his", D},
    {"her", D}, {"which", D}, {"what", D}, {"whose", D}, {"either", D}, {"neither", D},
    // prepositions
    {"in", P}, {"on", P}, {"at", P}, {"to", P}, {"into", P}, {"onto", P}, {"from", P},
    {"with", P}, {"without", P}, {"about", P}, {"for", P}, {"of", P}, {"by", P}, {"using", P},
    {"via", P}, {"over", P}, {"under", P}, {"between", P}, {"among", P}, {"across", P},
    {"through", P}, {"during", P}, {"after", P}, {"before", P}, {"since", P}, {"until", P},
    {"within", P}, {"per", P}, {"versus", P}, {"vs", P}, {"against", P}, {"like", P},
    {"inside", P}, {"towards", P}, {"toward", P}, {"upon", P}, {"regarding", P}, {"than", P},
    {"instead", R}, {"along", P}, {"around", P}, {"behind", P}, {"below", P}, {"above", P},
    // conjunctions
    {"and", C}, {"or", C}, {"but", C}, {"nor", C}, {"so", C}, {"yet", C}, {"if", C},
    {"because", C}, {"while", C}, {"when", C}, {"then", R}, {"also", R}, {"as", C},
    {"whether", C}, {"unless", C}, {"although", C},
    // pronouns
    {"i", PR}, {"me", PR}, {"we", PR}, {"us", PR}, {"you", PR}, {"it", PR}, {"they", PR},
    {"them", PR}, {"he", PR}, {"him", PR}, {"she", PR}, {"one", PR}, {"mine", PR},
    {"ours", PR}, {"yours", PR}, {"something", PR}, {"everything", PR}, {"anything", PR},
    {"myself", PR}, {"itself", PR}, {"yourself", PR}, {"who", PR}, {"whom", PR},
    // particles and modals
    {"not", PT}, {"please", R}, {"up", PT}, {"out", PT}, {"off", PT}, {"down", PT},
    {"can", V}, {"could", V}, {"would", V}, {"should", V}, {"will", V}, {"shall", V},
    {"may", V}, {"might", V}, {"must", V},
    // adverbs
    {"now", R}, {"again", R}, {"here", R}, {"there", R}, {"just", R}, {"only", R}, {"very", R},
    {"too", R}, {"quickly", R}, {"soon", R}, {"today", R}, {"tomorrow", R}, {"yesterday", R},
    {"already", R}, {"still", R}, {"always", R}, {"never", R}, {"maybe", R}, {"later", R},
    {"weekly", A}, {"daily", A}, {"monthly", A}, {"quarterly", A}, {"yearly", A},
    {"annually", R}, {"together", R}, {"instead", R}, {"back", R}, {"once", R},
    {"twice", R}, {"everywhere", R}, {"ago", R}, {"currently", R}, {"recently", R},
    // verbs: commands and auxiliaries
    {"create", V}, {"make", V}, {"generate", V}, {"build", V}, {"add", V}, {"update", V},
    {"refresh", V}, {"modify", V}, {"change", V}, {"edit", V}, {"delete", V}, {"remove", V},
    {"drop", V}, {"erase", V}, {"prepare", V}, {"produce", V}, {"draw", V}, {"plot", V},
    {"show", V}, {"display", V}, {"put", V}, {"insert", V}, {"include", V}, {"append", V},
    {"save", V}, {"store", V}, {"use", V}, {"run", V}, {"launch", V}, {"start", V},
    {"stop", V}, {"open", V}, {"close", V}, {"give", V}, {"get", V}, {"need", V}, {"want", V},
    {"like", V}, {"let", V}, {"set", V}, {"replace", V}, {"compare", V}, {"rebuild", V},
    {"redo", V}, {"render", V}, {"export", V}, {"send", V}, {"share", V}, {"summarize", V},
    {"analyze", V}, {"analyse", V}, {"chart", N}, {"graph", N}, {"visualize", V},
    {"represent", V}, {"illustrate", V}, {"design", V}, {"draft", V}, {"compose", V},
    {"assemble", V}, {"compile", V}, {"construct", V}, {"fix", V}, {"adjust", V},
    {"revise", V}, {"rename", V}, {"move", V}, {"copy", V}, {"duplicate", V}, {"clear", V},
    {"do", V}, {"does", V}, {"did", V}, {"done", V}, {"be", V}, {"is", V}, {"are", V},
    {"was", V}, {"were", V}, {"been", V}, {"am", V}, {"have", V}, {"has", V}, {"had", V},
    {"go", V}, {"see", V}, {"look", V}, {"looks", V}, {"keep", V}, {"try", V}, {"find", V},
    {"tell", V}, {"take", V}, {"bring", V}, {"attach", V}, {"place", V}, {"list", V},
    {"track", V}, {"highlight", V}, {"explain", V}, {"describe", V}, {"report", N},
    {"record", V}, {"replay", V}, {"reuse", V}, {"load", V}, {"import", V}, {"pull", V},
    {"fetch", V}, {"print", V}, {"shows", V}, {"made", V}, {"created", V}, {"updated", V},
    {"thanks", N}, {"thank", V}, {"ok", R}, {"okay", R}, {"yes", R}, {"great", A},
    // adjectives
    {"new", A}, {"old", A}, {"latest", A}, {"last", A}, {"first", A}, {"second", A},
    {"next", A}, {"previous", A}, {"current", A}, {"final", A}, {"full", A}, {"whole", A},
    {"same", A}, {"other", A}, {"big", A}, {"small", A}, {"large", A}, {"simple", A},
    {"nice", A}, {"good", A}, {"better", A}, {"best", A}, {"clean", A}, {"detailed", A},
    {"quick", A}, {"short", A}, {"long", A}, {"high", A}, {"low", A}, {"main", A},
    {"annual", A}, {"financial", A}, {"internal", A}, {"external", A}, {"key", A},
    {"total", A}, {"average", A}, {"median", A}, {"mean", A}, {"relative", A},
    {"comparable", A}, {"recent", A}, {"historical", A}, {"quarterly", A}, {"fiscal", A},
    {"regional", A}, {"global", A}, {"domestic", A}, {"public", A}, {"private", A},
    {"separate", A}, {"single", A}, {"multiple", A}, {"several", A}, {"few", A},
    {"many", A}, {"more", A}, {"most", A}, {"less", A}, {"least", A}, {"own", A},
    {"ready", A}, {"blue", A}, {"red", A}, {"green", A}, {"entire", A},
    // domain nouns
    {"piechart", N}, {"barchart", N}, {"linechart", N}, {"histogram", N}, {"barplot", N},
    {"piegraph", N}, {"pizzachart", N}, {"pizzagraph", N}, {"pie", N}, {"bar", N},
    {"line", N}, {"table", N}, {"plot", N}, {"diagram", N}, {"figure", N}, {"visual", N},
    {"visualization", N}, {"slide", N}, {"slides", N}, {"deck", N}, {"decks", N},
    {"presentation", N}, {"presentations", N}, {"pitchbook", N}, {"document", N},
    {"file", N}, {"files", N}, {"page", N}, {"pages", N}, {"summary", N}, {"review", N},
    {"update", V}, {"briefing", N}, {"memo", N}, {"brief", N}, {"overview", N},
    {"analysis", N}, {"data", N}, {"dataset", N}, {"datasets", N}, {"set", N},
    {"numbers", N}, {"figures", N}, {"prices", N}, {"price", N}, {"volume", N},
    {"volumes", N}, {"returns", N}, {"return", N}, {"revenue", N}, {"revenues", N},
    {"sales", N}, {"profit", N}, {"profits", N}, {"earnings", N}, {"cost", N}, {"costs", N},
    {"market", N}, {"markets", N}, {"stock", N}, {"stocks", N}, {"share", N}, {"shares", N},
    {"performance", N}, {"performances", N}, {"ticker", N}, {"company", N}, {"companies", N},
    {"firm", N}, {"firms", N}, {"client", N}, {"clients", N}, {"peer", N}, {"peers", N},
    {"sector", N}, {"sectors", N}, {"industry", N}, {"energy", N}, {"finance", N},
    {"retail", N}, {"healthcare", N}, {"technology", N}, {"utilities", N}, {"banking", N},
    {"insurance", N}, {"telecom", N}, {"materials", N}, {"transport", N}, {"cash", N},
    {"flow", N}, {"flows", N}, {"risk", N}, {"horizon", N}, {"period", N}, {"month", N},
    {"months", N}, {"week", N}, {"weeks", N}, {"year", N}, {"years", N}, {"day", N},
    {"days", N}, {"quarter", N}, {"quarters", N}, {"time", N}, {"trend", N}, {"trends", N},
    {"metric", N}, {"metrics", N}, {"kpi", N}, {"kpis", N}, {"insight", N}, {"insights", N},
    {"commentary", N}, {"title", N}, {"date", N}, {"template", N}, {"templates", N},
    {"skill", N}, {"skills", N}, {"macro", N}, {"macros", N}, {"list", N}, {"lists", N},
    {"name", N}, {"version", N}, {"copy", N}, {"board", N}, {"team", N}, {"meeting", N},
    {"pitch", N}, {"book", N}, {"review", N}, {"results", N}, {"result", N}, {"index", N},
    {"ohlc", N}, {"ohlcv", N}, {"usage", N}, {"growth", N}, {"margin", N}, {"margins", N},
    {"breakdown", N}, {"split", N}, {"mix", N}, {"distribution", N}, {"comparison", N},
    {"spreadsheet", N}, {"csv", N}, {"excel", N}, {"powerpoint", N}, {"web", N},
    {"thing", N}, {"stuff", N}, {"way", N}, {"lot", N}, {"bit", N}, {"end", N},
    {"q1", N}, {"q2", N}, {"q3", N}, {"q4", N}, {"fy", N}, {"ytd", N}, {"mtd", N},
    // number words
    {"two", NUM}, {"three", NUM}, {"four", NUM}, {"five", NUM}, {"six", NUM},
    {"seven", NUM}, {"eight", NUM}, {"nine", NUM}, {"ten", NUM}, {"twelve", NUM},
    {"twenty", NUM}, {"hundred", NUM},
};

}  // namespace

PosTag lookup_pos(std::string_view token) {
  static const auto* table = [] {
    auto* m = new std::unordered_map<std::string_view, PosTag>();
    for (const auto& e : kLexicon) m->emplace(e.word, e.tag);  // first entry wins
    return m;
  }();

  if (token.empty()) return PosTag::kNoun;
  bool all_punct = true;
  bool all_digit = true;
  for (unsigned char c : token) {
    if (std::isalnum(c)) all_punct = false;
    if (!std::isdigit(c) && c != '.' && c != ',' && c != '%') all_digit = false;
  }
  if (all_punct) return PosTag::kPunctuation;
  if (all_digit) return PosTag::kNumber;

  std::string lower(token);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (auto it = table->find(lower); it != table->end()) return it->second;

  const bool capitalized = std::isupper(static_cast<unsigned char>(token.front()));
  if (capitalized) return PosTag::kNoun;
  if (lower.size() > 3 && lower.ends_with("ly")) return PosTag::kAdverb;
  if (lower.size() > 4 && lower.ends_with("ing")) return PosTag::kVerb;
  return PosTag::kNoun;
}

}  // namespace deckforge::parser
