#include "rldf/grammar.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>

#include "rldf/error.hpp"

namespace rldf {

namespace {

const std::vector<std::string>& standard_production() {
  static const std::vector<std::string> kProduction = {"P", "frequency", "noun", "verb", "F",
                                                       "density", "H", "C", "scene"};
  return kProduction;
}

AxisRole default_role(std::string_view name) {
  if (name == "scene") return AxisRole::scene;
  if (name == "frequency" || name == "density") return AxisRole::count;
  return AxisRole::object;
}

}  // namespace

std::string_view to_string(AxisRole role) {
  switch (role) {
    case AxisRole::object: return "object";
    case AxisRole::count: return "count";
    case AxisRole::scene: return "scene";
    case AxisRole::attribute: return "attribute";
  }
  return "object";
}

AxisRole axis_role_from_string(std::string_view text) {
  if (text == "object") return AxisRole::object;
  if (text == "count") return AxisRole::count;
  if (text == "scene") return AxisRole::scene;
  if (text == "attribute") return AxisRole::attribute;
  throw ConfigError("grammar: unknown axis role '" + std::string(text) + "'");
}

std::optional<int> SemanticAxis::index_of(std::string_view term) const {
  auto it = std::find(vocabulary.begin(), vocabulary.end(), term);
  if (it == vocabulary.end()) return std::nullopt;
  return static_cast<int>(it - vocabulary.begin());
}

std::optional<LocalityGroup> SemanticAxis::group_of(int index) const {
  for (const auto& g : locality_groups) {
    if (g.lo <= index && index <= g.hi) return g;
  }
  return std::nullopt;
}

Grammar::Grammar(std::vector<SemanticAxis> axes, std::map<std::string, std::string> fixed_terminals,
                 std::vector<std::string> production)
    : axes_(std::move(axes)),
      fixed_terminals_(std::move(fixed_terminals)),
      production_(std::move(production)) {
  if (axes_.empty()) throw ConfigError("grammar: at least one axis is required");

  std::set<std::string> names;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const auto& axis = axes_[i];
    if (axis.name.empty()) throw ConfigError("grammar: axis name must be non-empty");
    if (!names.insert(axis.name).second) {
      throw ConfigError("grammar: duplicate axis '" + axis.name + "'");
    }
    if (fixed_terminals_.count(axis.name) != 0) {
      throw ConfigError("grammar: axis '" + axis.name + "' collides with a fixed terminal");
    }
    if (axis.vocabulary.empty()) {
      throw ConfigError("grammar: axis '" + axis.name + "' has an empty vocabulary");
    }
    std::set<std::string> terms(axis.vocabulary.begin(), axis.vocabulary.end());
    if (terms.size() != axis.vocabulary.size()) {
      throw ConfigError("grammar: axis '" + axis.name + "' has duplicate terms");
    }
    for (const auto& g : axis.locality_groups) {
      if (g.lo < 0 || g.hi < g.lo || g.hi >= axis.size()) {
        throw ConfigError("grammar: axis '" + axis.name + "' has an out-of-bounds locality group");
      }
    }
    if (axis.role == AxisRole::scene) {
      if (scene_axis_) throw ConfigError("grammar: more than one scene axis");
      scene_axis_ = i;
    }
    if (state_count_ > std::numeric_limits<std::uint64_t>::max() / axis.vocabulary.size()) {
      throw ConfigError("grammar: state count overflows 64 bits");
    }
    state_count_ *= axis.vocabulary.size();
  }

  std::vector<int> seen(axes_.size(), 0);
  for (const auto& symbol : production_) {
    if (auto axis = find_axis(symbol)) {
      ++seen[*axis];
    } else if (fixed_terminals_.count(symbol) == 0) {
      throw ConfigError("grammar: production symbol '" + symbol +
                        "' is neither an axis nor a fixed terminal");
    }
  }
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (seen[i] != 1) {
      throw ConfigError("grammar: axis '" + axes_[i].name +
                        "' must appear exactly once in the production");
    }
  }

  // Count axes bind to the next symbol when it is an object axis or a fixed
  // terminal; otherwise they are reported on their own.
  for (std::size_t p = 0; p < production_.size(); ++p) {
    auto axis = find_axis(production_[p]);
    if (!axis) continue;
    const AxisRole role = axes_[*axis].role;
    if (role == AxisRole::object) {
      const bool bound = p > 0 && find_axis(production_[p - 1]) &&
                         axes_[*find_axis(production_[p - 1])].role == AxisRole::count;
      if (!bound) object_slots_.push_back({{{axis, {}}}, {*axis}});
    } else if (role == AxisRole::count) {
      ObjectSlot slot{{{axis, {}}}, {*axis}};
      if (p + 1 < production_.size()) {
        const auto& next = production_[p + 1];
        if (auto next_axis = find_axis(next)) {
          if (axes_[*next_axis].role == AxisRole::object) {
            slot.parts.push_back({next_axis, {}});
            slot.axes.push_back(*next_axis);
          }
        } else {
          slot.parts.push_back({std::nullopt, fixed_terminals_.at(next)});
        }
      }
      object_slots_.push_back(std::move(slot));
    }
  }
}

Grammar Grammar::from_json(const nlohmann::json& doc) {
  try {
    const bool include_verb = doc.value("include_verb_axis", false);
    std::vector<SemanticAxis> axes;
    for (const auto& a : doc.at("axes")) {
      SemanticAxis axis;
      axis.name = a.at("name").get<std::string>();
      if (axis.name == "verb" && !include_verb) continue;
      axis.vocabulary = a.at("vocabulary").get<std::vector<std::string>>();
      if (a.contains("locality_groups")) {
        for (const auto& g : a.at("locality_groups")) {
          if (!g.is_array() || g.size() != 2) {
            throw ConfigError("grammar: locality group of axis '" + axis.name +
                              "' must be a [lo, hi] pair");
          }
          axis.locality_groups.push_back({g.at(0).get<int>(), g.at(1).get<int>()});
        }
      }
      axis.role = a.contains("role") ? axis_role_from_string(a.at("role").get<std::string>())
                                     : default_role(axis.name);
      axes.push_back(std::move(axis));
    }
    if (include_verb &&
        std::none_of(axes.begin(), axes.end(), [](const auto& x) { return x.name == "verb"; })) {
      throw ConfigError("grammar: include_verb_axis is set but no 'verb' axis is defined");
    }

    std::map<std::string, std::string> fixed;
    if (doc.contains("fixed_terminals")) {
      fixed = doc.at("fixed_terminals").get<std::map<std::string, std::string>>();
    } else {
      fixed = {{"P", "a photo of"}, {"F", "and"}, {"H", "people"}, {"C", "in"}};
    }

    std::vector<std::string> production;
    if (doc.contains("production")) {
      production = doc.at("production").get<std::vector<std::string>>();
    } else {
      // Standard template; axis slots without a defined axis are skipped.
      for (const auto& symbol : standard_production()) {
        const bool is_axis_slot = fixed.count(symbol) == 0;
        const bool defined = std::any_of(axes.begin(), axes.end(),
                                         [&](const auto& x) { return x.name == symbol; });
        if (!is_axis_slot || defined) production.push_back(symbol);
      }
      for (const auto& axis : axes) {
        if (std::find(production.begin(), production.end(), axis.name) == production.end()) {
          throw ConfigError("grammar: axis '" + axis.name +
                            "' is not in the standard template; supply a 'production' list");
        }
      }
    }
    return Grammar(std::move(axes), std::move(fixed), std::move(production));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("grammar: ") + e.what());
  }
}

Grammar Grammar::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("grammar file not found: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("grammar file " + path + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json Grammar::to_json() const {
  nlohmann::json doc;
  doc["axes"] = nlohmann::json::array();
  for (const auto& axis : axes_) {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : axis.locality_groups) groups.push_back({g.lo, g.hi});
    doc["axes"].push_back({{"name", axis.name},
                           {"vocabulary", axis.vocabulary},
                           {"locality_groups", groups},
                           {"role", std::string(to_string(axis.role))}});
  }
  doc["fixed_terminals"] = fixed_terminals_;
  doc["include_verb_axis"] = verb_enabled();
  doc["production"] = production_;
  return doc;
}

std::optional<std::size_t> Grammar::find_axis(std::string_view name) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Grammar::axis_index(std::string_view name) const {
  if (auto i = find_axis(name)) return *i;
  throw ConfigError("grammar: unknown axis '" + std::string(name) + "'");
}

std::uint64_t Grammar::index_of(const EncodedState& state) const {
  check(state);
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    index = index * axes_[i].vocabulary.size() + static_cast<std::uint64_t>(state.coords[i]);
  }
  return index;
}

EncodedState Grammar::state_at(std::uint64_t index) const {
  if (index >= state_count_) {
    throw EncodingBoundsError("grammar: state index " + std::to_string(index) +
                              " out of range");
  }
  EncodedState state{std::vector<int>(axes_.size())};
  for (std::size_t i = axes_.size(); i-- > 0;) {
    const auto n = axes_[i].vocabulary.size();
    state.coords[i] = static_cast<int>(index % n);
    index /= n;
  }
  return state;
}

bool Grammar::is_valid(const EncodedState& state) const noexcept {
  if (state.coords.size() != axes_.size()) return false;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (state.coords[i] < 0 || state.coords[i] >= axes_[i].size()) return false;
  }
  return true;
}

void Grammar::check(const EncodedState& state) const {
  if (state.coords.size() != axes_.size()) {
    throw EncodingBoundsError("encoding has " + std::to_string(state.coords.size()) +
                              " coordinates, grammar has " + std::to_string(axes_.size()) +
                              " axes");
  }
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (state.coords[i] < 0 || state.coords[i] >= axes_[i].size()) {
      throw EncodingBoundsError("coordinate " + std::to_string(state.coords[i]) + " of axis '" +
                                axes_[i].name + "' is outside [0, " +
                                std::to_string(axes_[i].size()) + ")");
    }
  }
}

std::string Grammar::object_label(const ObjectSlot& slot, const EncodedState& state) const {
  std::string label;
  for (const auto& part : slot.parts) {
    if (!label.empty()) label += ' ';
    label += part.axis ? axes_[*part.axis].vocabulary[state.coords[*part.axis]] : part.fixed_text;
  }
  return label;
}

nlohmann::json default_grammar_document() {
  return nlohmann::json::parse(R"({
  "comment": "Default vocabulary. Non-canonical: chosen for semantic locality, 480 states.",
  "axes": [
    {"name": "frequency", "role": "count",
     "vocabulary": ["one", "two", "many"],
     "locality_groups": [[0, 1]]},
    {"name": "noun", "role": "object",
     "vocabulary": ["banana", "apple", "orange", "dog", "cat", "monkey", "horse", "cow"],
     "locality_groups": [[0, 2], [3, 4], [5, 7]]},
    {"name": "verb", "role": "attribute",
     "vocabulary": ["playing baseball", "playing tennis", "cycling", "running", "eating"],
     "locality_groups": [[0, 1], [2, 3]]},
    {"name": "density", "role": "count",
     "vocabulary": ["no", "one", "few", "many"],
     "locality_groups": [[2, 3]]},
    {"name": "scene", "role": "scene",
     "vocabulary": ["farm", "vegetable garden", "park", "playground", "train station platform"],
     "locality_groups": [[0, 2], [3, 4]]}
  ],
  "fixed_terminals": {"P": "a photo of", "F": "and", "H": "people", "C": "in"},
  "include_verb_axis": false
})");
}

const Grammar& default_grammar() {
  static const Grammar kGrammar = Grammar::from_json(default_grammar_document());
  return kGrammar;
}

RawState decode(const EncodedState& state, const Grammar& grammar) {
  grammar.check(state);
  RawState raw;
  for (const auto& symbol : grammar.production()) {
    if (!raw.text.empty()) raw.text += ' ';
    if (auto axis = grammar.find_axis(symbol)) {
      raw.text += grammar.axis(*axis).vocabulary[state.coords[*axis]];
    } else {
      raw.text += grammar.fixed_terminals().at(symbol);
    }
  }
  return raw;
}

EncodedState encode(const std::map<std::string, std::string>& semantics, const Grammar& grammar) {
  for (const auto& [axis, term] : semantics) {
    if (!grammar.find_axis(axis)) throw ConfigError("encode: unknown axis '" + axis + "'");
  }
  EncodedState state{std::vector<int>(grammar.axis_count())};
  for (std::size_t i = 0; i < grammar.axis_count(); ++i) {
    const auto& axis = grammar.axis(i);
    auto it = semantics.find(axis.name);
    if (it == semantics.end()) throw ConfigError("encode: no term supplied for axis '" + axis.name + "'");
    auto index = axis.index_of(it->second);
    if (!index) throw VocabularyMissError(axis.name, it->second);
    state.coords[i] = *index;
  }
  return state;
}

int semantic_distance(const EncodedState& a, const EncodedState& b) {
  if (a.coords.size() != b.coords.size()) {
    throw EncodingBoundsError("semantic_distance: dimensionality mismatch (" +
                              std::to_string(a.coords.size()) + " vs " +
                              std::to_string(b.coords.size()) + ")");
  }
  int d = 0;
  for (std::size_t i = 0; i < a.coords.size(); ++i) d += std::abs(a.coords[i] - b.coords[i]);
  return d;
}

EncodedState slide(const EncodedState& state, const Grammar& grammar, std::size_t axis, int delta) {
  if (axis >= grammar.axis_count()) {
    throw ConfigError("slide: axis index " + std::to_string(axis) + " out of range");
  }
  EncodedState out = state;
  const long long moved = static_cast<long long>(state.coords[axis]) + delta;
  out.coords[axis] = static_cast<int>(std::clamp<long long>(moved, 0, grammar.axis(axis).size() - 1));
  return out;
}

EncodedState slide(const EncodedState& state, const Grammar& grammar, std::string_view axis,
                   int delta) {
  return slide(state, grammar, grammar.axis_index(axis), delta);
}

std::string format_coords(const EncodedState& state) {
  std::string out = "[";
  for (std::size_t i = 0; i < state.coords.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(state.coords[i]);
  }
  return out + "]";
}

}  // namespace rldf
