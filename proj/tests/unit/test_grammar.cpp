#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "rldf/error.hpp"
#include "rldf/grammar.hpp"
#include "rldf/random.hpp"
#include "test_support.hpp"

namespace rldf {
namespace {

using nlohmann::json;

EncodedState S(std::vector<int> c) { return EncodedState{std::move(c)}; }

TEST(Grammar, DefaultHas480States) {
  const auto& g = default_grammar();
  EXPECT_EQ(g.state_count(), 480u);
  ASSERT_EQ(g.axis_count(), 4u);
  EXPECT_EQ(g.axis(0).name, "frequency");
  EXPECT_EQ(g.axis(1).name, "noun");
  EXPECT_EQ(g.axis(2).name, "density");
  EXPECT_EQ(g.axis(3).name, "scene");
  EXPECT_FALSE(g.verb_enabled());
}

TEST(Grammar, ShippedFileMatchesBuiltInDefault) {
  const auto from_file = Grammar::load((testing::source_dir() / "data" / "default_grammar.json").string());
  EXPECT_EQ(from_file.to_json(), default_grammar().to_json());
}

TEST(Decode, BananaFarm) {
  const auto& g = default_grammar();
  const auto s = encode({{"frequency", "one"}, {"noun", "banana"}, {"density", "no"}, {"scene", "farm"}}, g);
  EXPECT_EQ(s, S({0, 0, 0, 0}));
  EXPECT_EQ(decode(s, g).text, "a photo of one banana and no people in farm");
}

TEST(Decode, ManyMonkeyPlayground) {
  const auto& g = default_grammar();
  // Hand expansion: P="a photo of", NP="many monkey", F="and", DP="one people", C="in", LC="playground".
  EXPECT_EQ(decode(S({2, 5, 1, 3}), g).text, "a photo of many monkey and one people in playground");
}

TEST(Decode, SingleEntryGrammarHasOneSentence) {
  const auto g = Grammar::from_json(json{{"axes",
                                          {{{"name", "frequency"}, {"vocabulary", {"one"}}},
                                           {{"name", "noun"}, {"vocabulary", {"cat"}}},
                                           {{"name", "density"}, {"vocabulary", {"no"}}},
                                           {{"name", "scene"}, {"vocabulary", {"farm"}}}}}});
  EXPECT_EQ(g.state_count(), 1u);
  EXPECT_EQ(decode(S({0, 0, 0, 0}), g).text, "a photo of one cat and no people in farm");
}

TEST(Decode, VerbAxisFollowsNounPhrase) {
  const auto g = Grammar::from_json(json{{"include_verb_axis", true},
                                         {"axes",
                                          {{{"name", "frequency"}, {"vocabulary", {"one"}}},
                                           {{"name", "noun"}, {"vocabulary", {"man"}}},
                                           {{"name", "verb"}, {"role", "attribute"}, {"vocabulary", {"playing baseball"}}},
                                           {{"name", "density"}, {"vocabulary", {"no"}}},
                                           {{"name", "scene"}, {"vocabulary", {"stadium"}}}}}});
  EXPECT_TRUE(g.verb_enabled());
  EXPECT_EQ(decode(S({0, 0, 0, 0, 0}), g).text, "a photo of one man playing baseball and no people in stadium");
}

TEST(Decode, VerbAxisDroppedUnlessEnabled) {
  auto doc = default_grammar_document();
  EXPECT_EQ(Grammar::from_json(doc).axis_count(), 4u);
  doc["include_verb_axis"] = true;
  const auto g = Grammar::from_json(doc);
  EXPECT_EQ(g.axis_count(), 5u);
  EXPECT_EQ(g.state_count(), 480u * 5u);
  EXPECT_EQ(decode(S({0, 0, 0, 0, 0}), g).text, "a photo of one banana playing baseball and no people in farm");
}

TEST(Decode, OutOfRangeIsBoundsError) {
  const auto& g = default_grammar();
  EXPECT_THROW(decode(S({0, 8, 0, 0}), g), EncodingBoundsError);
  EXPECT_THROW(decode(S({0, -1, 0, 0}), g), EncodingBoundsError);
  EXPECT_THROW(decode(S({0, 0, 0}), g), EncodingBoundsError);
}

TEST(Decode, IsDeterministicAndInjective) {
  const auto& g = default_grammar();
  std::set<std::string> texts;
  for (std::uint64_t i = 0; i < g.state_count(); ++i) {
    const auto s = g.state_at(i);
    const auto text = decode(s, g).text;
    EXPECT_EQ(text, decode(s, g).text);
    texts.insert(text);
  }
  EXPECT_EQ(texts.size(), g.state_count());
}

TEST(Encode, UnknownTermNamesAxisAndTerm) {
  const auto& g = default_grammar();
  try {
    encode({{"frequency", "one"}, {"noun", "spaceship"}, {"density", "no"}, {"scene", "farm"}}, g);
    FAIL() << "expected VocabularyMissError";
  } catch (const VocabularyMissError& e) {
    EXPECT_EQ(e.axis(), "noun");
    EXPECT_EQ(e.term(), "spaceship");
    EXPECT_NE(std::string(e.what()).find("spaceship"), std::string::npos);
  }
}

TEST(Encode, MissingOrUnknownAxisIsConfigError) {
  const auto& g = default_grammar();
  EXPECT_THROW(encode({{"frequency", "one"}, {"noun", "banana"}, {"density", "no"}}, g), ConfigError);
  EXPECT_THROW(encode({{"frequency", "one"}, {"noun", "banana"}, {"density", "no"}, {"scene", "farm"}, {"colour", "red"}}, g),
               ConfigError);
}

TEST(RoundTrip, ExhaustiveTwoAxisGrammar) {
  const auto g = Grammar::from_json(json{{"axes",
                                          {{{"name", "noun"}, {"vocabulary", {"a", "b", "c", "d", "e", "f", "g"}}},
                                           {{"name", "scene"}, {"vocabulary", {"x", "y", "z", "w", "v"}}}}}});
  ASSERT_EQ(g.state_count(), 35u);
  int checked = 0;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 5; ++j) {
      const auto s = S({i, j});
      std::map<std::string, std::string> terms{{"noun", g.axis(0).vocabulary[i]}, {"scene", g.axis(1).vocabulary[j]}};
      EXPECT_EQ(encode(terms, g), s);
      EXPECT_EQ(g.state_at(g.index_of(s)), s);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 35);
}

TEST(RoundTrip, RandomDefaultStates) {
  const auto& g = default_grammar();
  Rng rng(2024);
  for (int k = 0; k < 10000; ++k) {
    EncodedState s;
    for (const auto& axis : g.axes()) s.coords.push_back(static_cast<int>(uniform_index(rng, axis.size())));
    std::map<std::string, std::string> terms;
    for (std::size_t i = 0; i < g.axis_count(); ++i) terms[g.axis(i).name] = g.axis(i).vocabulary[s.coords[i]];
    ASSERT_EQ(encode(terms, g), s);
  }
}

TEST(Index, LastAxisVariesFastest) {
  const auto& g = default_grammar();
  EXPECT_EQ(g.index_of(S({0, 0, 0, 1})), 1u);
  EXPECT_EQ(g.index_of(S({0, 0, 1, 0})), 5u);
  EXPECT_EQ(g.index_of(S({2, 7, 3, 4})), 479u);
  for (std::uint64_t i = 0; i < g.state_count(); ++i) EXPECT_EQ(g.index_of(g.state_at(i)), i);
}

TEST(Distance, Examples) {
  EXPECT_EQ(semantic_distance(S({1, 2, 3}), S({1, 2, 3})), 0);
  EXPECT_EQ(semantic_distance(S({1, 2, 3}), S({1, 3, 3})), 1);
  EXPECT_EQ(semantic_distance(S({0, 0}), S({2, 3})), 5);
  EXPECT_THROW(semantic_distance(S({0, 0}), S({0, 0, 0})), EncodingBoundsError);
}

TEST(Distance, IsAMetricOnRandomTriples) {
  const auto& g = default_grammar();
  Rng rng(7);
  auto draw = [&] { return g.state_at(uniform_index(rng, g.state_count())); };
  for (int k = 0; k < 2000; ++k) {
    const auto a = draw(), b = draw(), c = draw();
    EXPECT_EQ(semantic_distance(a, b), semantic_distance(b, a));
    EXPECT_EQ(semantic_distance(a, b) == 0, a == b);
    EXPECT_GE(semantic_distance(a, b), 0);
    EXPECT_LE(semantic_distance(a, c), semantic_distance(a, b) + semantic_distance(b, c));
  }
}

TEST(Locality, ParkIsCloserToVegetableGardenThanToTrainStation) {
  const auto& g = default_grammar();
  const auto at = [&](const char* scene) {
    return encode({{"frequency", "one"}, {"noun", "banana"}, {"density", "no"}, {"scene", scene}}, g);
  };
  const int near = semantic_distance(at("park"), at("vegetable garden"));
  const int far = semantic_distance(at("park"), at("train station platform"));
  EXPECT_EQ(near, 1);
  EXPECT_EQ(far, 2);
  EXPECT_LT(near, far);
}

TEST(Slide, ZeroIsIdentity) {
  const auto& g = default_grammar();
  EXPECT_EQ(slide(S({1, 4, 2, 3}), g, "noun", 0), S({1, 4, 2, 3}));
}

TEST(Slide, ClampsAtBothEnds) {
  const auto& g = default_grammar();
  EXPECT_EQ(slide(S({1, 4, 2, 3}), g, "noun", 100), S({1, 7, 2, 3}));
  EXPECT_EQ(slide(S({1, 4, 2, 3}), g, "noun", -100), S({1, 0, 2, 3}));
  EXPECT_EQ(slide(S({2, 0, 0, 0}), g, std::size_t{0}, 1), S({2, 0, 0, 0}));
}

TEST(Slide, SceneStepFollowsVocabularyOrder) {
  const auto& g = default_grammar();
  const auto farm = S({0, 0, 0, 0});
  const auto next = slide(farm, g, "scene", 1);
  EXPECT_EQ(g.axis(3).vocabulary[next.coords[3]], "vegetable garden");
  ASSERT_TRUE(g.axis(3).group_of(0).has_value());
  EXPECT_EQ(g.axis(3).group_of(0)->hi, 2);  // farm, vegetable garden and park share a group
  EXPECT_THROW(slide(farm, g, "colour", 1), ConfigError);
}

TEST(GrammarValidation, RejectsMalformedVocabularies) {
  auto axes = [](json a) { return json{{"axes", std::move(a)}}; };
  EXPECT_THROW(Grammar::from_json(axes({{{"name", "noun"}, {"vocabulary", json::array()}}})), ConfigError);
  EXPECT_THROW(Grammar::from_json(axes({{{"name", "noun"}, {"vocabulary", {"a", "a"}}}})), ConfigError);
  EXPECT_THROW(Grammar::from_json(axes({{{"name", "noun"}, {"vocabulary", {"a", "b"}}, {"locality_groups", {{0, 2}}}}})),
               ConfigError);
  EXPECT_THROW(Grammar::from_json(axes({{{"name", "noun"}, {"vocabulary", {"a", "b"}}, {"locality_groups", {{1, 0}}}}})),
               ConfigError);
  EXPECT_THROW(Grammar::from_json(axes({{{"name", "noun"}, {"vocabulary", {"a"}}}, {{"name", "noun"}, {"vocabulary", {"b"}}}})),
               ConfigError);
  EXPECT_THROW(Grammar::from_json(axes({{{"name", "colour"}, {"vocabulary", {"red"}}}})), ConfigError);
  EXPECT_THROW(Grammar::from_json(json{{"include_verb_axis", true}, {"axes", {{{"name", "noun"}, {"vocabulary", {"a"}}}}}}),
               ConfigError);
  EXPECT_THROW(Grammar::from_json(json{{"axes", {{{"name", "noun"}, {"vocabulary", {"a"}}}}},
                                       {"production", {"P", "noun", "noun"}}}),
               ConfigError);
}

TEST(GrammarValidation, CustomProductionAndAxes) {
  const auto g = Grammar::from_json(json{{"axes",
                                          {{{"name", "colour"}, {"role", "attribute"}, {"vocabulary", {"red", "blue"}}},
                                           {{"name", "noun"}, {"vocabulary", {"car", "bus"}}}}},
                                         {"fixed_terminals", {{"P", "a"}}},
                                         {"production", {"P", "colour", "noun"}}});
  EXPECT_EQ(decode(S({1, 0}), g).text, "a blue car");
}

TEST(ObjectLabels, CountsBindToFollowingSymbol) {
  const auto& g = default_grammar();
  ASSERT_EQ(g.object_slots().size(), 2u);
  const auto s = S({2, 5, 1, 3});
  EXPECT_EQ(g.object_label(g.object_slots()[0], s), "many monkey");
  EXPECT_EQ(g.object_label(g.object_slots()[1], s), "one people");
}

}  // namespace
}  // namespace rldf
