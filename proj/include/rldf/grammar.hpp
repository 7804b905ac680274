#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace rldf {

/// How an axis is reported by the feedback oracle.
///  - object: its term is a recognized entity.
///  - count: qualifies the symbol that follows it in the production
///    ("one" + "banana" -> "one banana", "no" + "people" -> "no people").
///  - scene: the coarse scene label. At most one per grammar.
///  - attribute: rendered in the prompt, not recognized.
enum class AxisRole { object, count, scene, attribute };

std::string_view to_string(AxisRole role);
AxisRole axis_role_from_string(std::string_view text);

struct LocalityGroup {
  int lo = 0;
  int hi = 0;  // inclusive
};

struct SemanticAxis {
  std::string name;
  std::vector<std::string> vocabulary;
  std::vector<LocalityGroup> locality_groups;
  AxisRole role = AxisRole::object;

  int size() const noexcept { return static_cast<int>(vocabulary.size()); }
  std::optional<int> index_of(std::string_view term) const;
  /// Group containing `index`, if any.
  std::optional<LocalityGroup> group_of(int index) const;
};

/// Lattice point: one vocabulary index per axis, in grammar axis order.
struct EncodedState {
  std::vector<int> coords;

  friend bool operator==(const EncodedState&, const EncodedState&) = default;
  friend auto operator<=>(const EncodedState&, const EncodedState&) = default;
};

struct RawState {
  std::string text;
};

/// One recognizable object phrase: production symbols whose expansions are
/// joined to form the label. Each entry is an axis index or a fixed terminal.
struct ObjectSlot {
  struct Part {
    std::optional<std::size_t> axis;
    std::string fixed_text;
  };
  std::vector<Part> parts;
  std::vector<std::size_t> axes;  // axis indices appearing in parts
};

/// Context-free prompt grammar S -> P NP [VP] A DP I LC, flattened into a
/// production template of fixed terminals and axis slots.
class Grammar {
 public:
  Grammar(std::vector<SemanticAxis> axes, std::map<std::string, std::string> fixed_terminals,
          std::vector<std::string> production);

  /// Parses the vocabulary document. Axes named "verb" are dropped unless
  /// include_verb_axis is true.
  static Grammar from_json(const nlohmann::json& doc);
  static Grammar load(const std::string& path);
  nlohmann::json to_json() const;

  const std::vector<SemanticAxis>& axes() const noexcept { return axes_; }
  std::size_t axis_count() const noexcept { return axes_.size(); }
  const SemanticAxis& axis(std::size_t i) const { return axes_.at(i); }
  std::optional<std::size_t> find_axis(std::string_view name) const;
  std::size_t axis_index(std::string_view name) const;  // throws ConfigError
  std::optional<std::size_t> scene_axis() const noexcept { return scene_axis_; }

  const std::map<std::string, std::string>& fixed_terminals() const noexcept {
    return fixed_terminals_;
  }
  const std::vector<std::string>& production() const noexcept { return production_; }
  const std::vector<ObjectSlot>& object_slots() const noexcept { return object_slots_; }
  bool verb_enabled() const noexcept { return find_axis("verb").has_value(); }

  std::uint64_t state_count() const noexcept { return state_count_; }
  /// Mixed-radix index, last axis fastest.
  std::uint64_t index_of(const EncodedState& state) const;
  EncodedState state_at(std::uint64_t index) const;

  bool is_valid(const EncodedState& state) const noexcept;
  void check(const EncodedState& state) const;  // throws EncodingBoundsError

  /// Label of `slot` for a valid state.
  std::string object_label(const ObjectSlot& slot, const EncodedState& state) const;

 private:
  std::vector<SemanticAxis> axes_;
  std::map<std::string, std::string> fixed_terminals_;
  std::vector<std::string> production_;
  std::vector<ObjectSlot> object_slots_;
  std::optional<std::size_t> scene_axis_;
  std::uint64_t state_count_ = 1;
};

/// Shipped vocabulary (non-canonical): frequency x noun x density x scene =
/// 3 x 8 x 4 x 5 = 480 states, with a disabled verb axis.
nlohmann::json default_grammar_document();
const Grammar& default_grammar();

RawState decode(const EncodedState& state, const Grammar& grammar);

/// Inverse of decode on the per-axis terms. Every axis must be supplied.
EncodedState encode(const std::map<std::string, std::string>& semantics, const Grammar& grammar);

/// L1 distance on the lattice.
int semantic_distance(const EncodedState& a, const EncodedState& b);

/// Shifts one coordinate by delta, clamped to the vocabulary bounds.
EncodedState slide(const EncodedState& state, const Grammar& grammar, std::size_t axis, int delta);
EncodedState slide(const EncodedState& state, const Grammar& grammar, std::string_view axis,
                   int delta);

std::string format_coords(const EncodedState& state);

}  // namespace rldf
