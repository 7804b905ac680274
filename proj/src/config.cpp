#include "rldf/config.hpp"

#include <fstream>
#include <set>

#include "rldf/error.hpp"

namespace rldf {

namespace {

using json = nlohmann::json;

/// Typed access to one section with "section.field" diagnostics.
class Section {
 public:
  Section(const json& doc, std::string name, std::set<std::string> known)
      : name_(std::move(name)) {
    if (doc.contains(name_)) {
      node_ = doc.at(name_);
      if (!node_.is_object()) throw ConfigError(name_ + ": section must be a JSON object");
    } else {
      node_ = json::object();
    }
    for (const auto& [key, _] : node_.items()) {
      if (known.count(key) == 0) throw ConfigError(name_ + "." + key + ": unknown field");
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }
  const json& raw(const std::string& key) const { return node_.at(key); }
  std::string path(const std::string& key) const { return name_ + "." + key; }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!node_.contains(key)) return fallback;
    try {
      return node_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path(key) + ": expected " + type_name<T>() + ", got " + node_.at(key).dump());
    }
  }

 private:
  template <typename T>
  static std::string type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else if constexpr (std::is_same_v<T, std::string>) return "a string";
    else return "a list";
  }

  std::string name_;
  json node_;
};

std::uint64_t get_seed(const Section& s, std::uint64_t fallback) {
  if (!s.has("seed")) return fallback;
  const auto& v = s.raw("seed");
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError(s.path("seed") + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

json grammar_document(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.contains("grammar")) return default_grammar_document();
  const auto& g = doc.at("grammar");
  if (g.is_object()) return g;
  if (g.is_string()) {
    std::filesystem::path p = g.get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    std::ifstream in(p);
    if (!in) throw ConfigError("grammar: file not found: " + p.string());
    try {
      return json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("grammar: " + p.string() + ": " + e.what());
    }
  }
  throw ConfigError("grammar: expected an inline document or a file path");
}

json state_to_json(const EncodedState& s) { return s.coords; }

}  // namespace

void SweepGrid::validate() const {
  if (agents.empty()) throw ConfigError("sweep.agents: grid axis is empty");
  if (rewards.empty()) throw ConfigError("sweep.rewards: grid axis is empty");
  if (epsilons.empty()) throw ConfigError("sweep.epsilons: grid axis is empty");
  if (seeds.empty()) throw ConfigError("sweep.seeds: seed list is empty");
  for (double e : epsilons) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("sweep.epsilons: values must be in [0, 1]");
  }
}

SweepGrid SweepGrid::standard(std::vector<std::uint64_t> seeds) {
  return {{Algorithm::q_learning, Algorithm::random, Algorithm::sarsa},
          {RewardKind::multi_semantic, RewardKind::partial_semantic, RewardKind::clip},
          {0.01, 0.10},
          std::move(seeds)};
}

EncodedState parse_state(const json& value, const Grammar& grammar, std::string_view field) {
  const std::string where(field);
  try {
    if (value.is_array()) {
      EncodedState s{value.get<std::vector<int>>()};
      if (!grammar.is_valid(s)) {
        throw ConfigError(where + ": encoding " + format_coords(s) + " is not valid under the grammar");
      }
      return s;
    }
    if (value.is_object()) {
      return encode(value.get<std::map<std::string, std::string>>(), grammar);
    }
  } catch (const json::exception&) {
  } catch (const VocabularyMissError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const ConfigError& e) {
    if (std::string_view(e.what()).rfind(where, 0) == 0) throw;
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": expected a coordinate list or an axis -> term map");
}

RunConfiguration RunConfiguration::from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::set<std::string> kTop = {"grammar", "environment", "oracle", "reward", "agent",
                                             "ndg", "sweep", "output_dir", "verbosity", "comment"};
  for (const auto& [key, _] : doc.items()) {
    if (kTop.count(key) == 0) throw ConfigError(key + ": unknown section");
  }

  RunConfiguration cfg;
  cfg.grammar = std::make_shared<const Grammar>(Grammar::from_json(grammar_document(doc, base_dir)));
  const Grammar& g = *cfg.grammar;

  {
    Section s(doc, "environment", {"terminal", "max_steps_per_episode", "terminal_stops_episode",
                                   "seed", "penalty_states", "penalty_reward"});
    if (!s.has("terminal")) throw ConfigError("environment.terminal: required field is missing");
    cfg.environment.terminal_state = parse_state(s.raw("terminal"), g, "environment.terminal");
    cfg.environment.max_steps_per_episode = s.get<int>("max_steps_per_episode", 100);
    cfg.environment.terminal_stops_episode = s.get<bool>("terminal_stops_episode", false);
    cfg.environment.rng_seed = get_seed(s, 0);
    if (s.has("penalty_states")) {
      if (!s.raw("penalty_states").is_array()) {
        throw ConfigError("environment.penalty_states: expected a list of encodings");
      }
      for (const auto& p : s.raw("penalty_states")) {
        cfg.environment.penalty_states.push_back(parse_state(p, g, "environment.penalty_states"));
      }
    }
    cfg.environment.penalty_reward = s.get<double>("penalty_reward", -1.0);
  }
  {
    Section s(doc, "oracle", {"kind", "seed", "noise_drop_prob", "noise_swap_prob", "embedding_dim",
                              "locality_bandwidth", "external"});
    const auto kind = s.get<std::string>("kind", "simulated");
    if (kind == "simulated") cfg.oracle.kind = OracleKind::simulated;
    else if (kind == "external") cfg.oracle.kind = OracleKind::external;
    else throw ConfigError("oracle.kind: expected 'simulated' or 'external', got '" + kind + "'");
    cfg.oracle.seed = get_seed(s, 0);
    cfg.oracle.noise_drop_prob = s.get<double>("noise_drop_prob", 0.0);
    cfg.oracle.noise_swap_prob = s.get<double>("noise_swap_prob", 0.0);
    cfg.oracle.embedding_dim = s.get<int>("embedding_dim", 64);
    cfg.oracle.locality_bandwidth = s.get<double>("locality_bandwidth", 1.0);
    if (s.has("external")) {
      Section e(json{{"oracle.external", s.raw("external")}}, "oracle.external",
                {"transport", "command", "host", "port", "timeout_seconds", "options"});
      const auto transport = e.get<std::string>("transport", "process");
      if (transport == "process") cfg.oracle.external.transport = Transport::process;
      else if (transport == "tcp") cfg.oracle.external.transport = Transport::tcp;
      else throw ConfigError("oracle.external.transport: expected 'process' or 'tcp'");
      cfg.oracle.external.command = e.get<std::vector<std::string>>("command", {});
      cfg.oracle.external.host = e.get<std::string>("host", "127.0.0.1");
      cfg.oracle.external.port = e.get<int>("port", 0);
      cfg.oracle.external.timeout_seconds = e.get<double>("timeout_seconds", 120.0);
      cfg.oracle.external.options = e.get<std::map<std::string, std::string>>("options", {});
    }
  }
  {
    Section s(doc, "reward", {"kind", "object_match_constant", "scene_match_constant", "scene_matching"});
    if (s.has("kind")) {
      const auto& k = s.raw("kind");
      cfg.reward.kind = reward_kind_from_string(k.is_number() ? std::to_string(k.get<int>())
                                                              : s.get<std::string>("kind", ""));
    }
    cfg.reward.object_match_constant = s.get<double>("object_match_constant", 1.0);
    cfg.reward.scene_match_constant = s.get<double>("scene_match_constant", 0.5);
    const auto matching = s.get<std::string>("scene_matching", "strict");
    if (matching == "strict") cfg.reward.scene_matching = SceneMatching::strict;
    else if (matching == "locality_group") cfg.reward.scene_matching = SceneMatching::locality_group;
    else throw ConfigError("reward.scene_matching: expected 'strict' or 'locality_group'");
  }
  {
    Section s(doc, "agent", {"algorithm", "epsilon", "learning_rate", "discount", "q_init", "seed",
                             "episodes"});
    cfg.agent.algorithm = algorithm_from_string(s.get<std::string>("algorithm", "q_learning"));
    cfg.agent.epsilon = s.get<double>("epsilon", 0.1);
    cfg.agent.discount = s.get<double>("discount", 0.9);
    cfg.agent.seed = get_seed(s, 0);
    cfg.agent.episodes = s.get<int>("episodes", 500);
    if (s.has("learning_rate")) {
      Section lr(json{{"agent.learning_rate", s.raw("learning_rate")}}, "agent.learning_rate",
                 {"schedule", "alpha"});
      const auto schedule = lr.get<std::string>("schedule", "visit_count");
      if (schedule == "visit_count") cfg.agent.learning_rate.schedule = LearningRate::Schedule::visit_count;
      else if (schedule == "constant") cfg.agent.learning_rate.schedule = LearningRate::Schedule::constant;
      else throw ConfigError("agent.learning_rate.schedule: expected 'visit_count' or 'constant'");
      cfg.agent.learning_rate.alpha = lr.get<double>("alpha", 0.1);
    }
    if (s.has("q_init")) {
      Section qi(json{{"agent.q_init", s.raw("q_init")}}, "agent.q_init", {"kind", "lo", "hi", "value"});
      const auto kind = qi.get<std::string>("kind", "uniform");
      if (kind == "uniform") {
        cfg.agent.q_init = {QInit::Kind::uniform, qi.get<double>("lo", 0.0), qi.get<double>("hi", 0.01)};
      } else if (kind == "constant") {
        const double v = qi.get<double>("value", 0.0);
        cfg.agent.q_init = {QInit::Kind::constant, v, v};
      } else {
        throw ConfigError("agent.q_init.kind: expected 'uniform' or 'constant'");
      }
    }
  }
  {
    Section s(doc, "ndg", {"max_iterations", "probe_step", "plateau_patience", "stop_at_goal", "seed",
                           "start"});
    cfg.ndg.max_iterations = s.get<int>("max_iterations", 200);
    cfg.ndg.probe_step = s.get<int>("probe_step", 1);
    cfg.ndg.plateau_patience = s.get<int>("plateau_patience", 3);
    cfg.ndg.stop_at_goal = s.get<bool>("stop_at_goal", true);
    cfg.ndg.seed = get_seed(s, 0);
    if (s.has("start")) cfg.ndg_start = parse_state(s.raw("start"), g, "ndg.start");
  }
  if (doc.contains("sweep")) {
    Section s(doc, "sweep", {"agents", "rewards", "epsilons", "seeds"});
    for (const auto& a : s.get<std::vector<std::string>>("agents", {})) {
      cfg.sweep.agents.push_back(algorithm_from_string(a));
    }
    if (s.has("rewards")) {
      for (const auto& r : s.raw("rewards")) {
        cfg.sweep.rewards.push_back(
            reward_kind_from_string(r.is_number() ? std::to_string(r.get<int>()) : r.get<std::string>()));
      }
    }
    cfg.sweep.epsilons = s.get<std::vector<double>>("epsilons", {});
    cfg.sweep.seeds = s.get<std::vector<std::uint64_t>>("seeds", {});
  }
  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string()) throw ConfigError("output_dir: expected a string");
    cfg.output_dir = doc.at("output_dir").get<std::string>();
  }
  if (doc.contains("verbosity")) {
    if (!doc.at("verbosity").is_number_integer()) throw ConfigError("verbosity: expected an integer");
    cfg.verbosity = doc.at("verbosity").get<int>();
  }
  cfg.validate();
  return cfg;
}

void RunConfiguration::validate() const {
  if (!grammar) throw ConfigError("grammar: missing");
  environment.validate(*grammar);
  oracle.validate();
  reward.validate();
  agent.validate();
  ndg.validate();
  if (ndg_start && !grammar->is_valid(*ndg_start)) throw ConfigError("ndg.start: invalid encoding");
  if (oracle.kind == OracleKind::simulated) {
    const int needed = required_embedding_dim(*grammar, oracle.locality_bandwidth);
    if (needed > oracle.embedding_dim) {
      throw ConfigError("oracle.embedding_dim: " + std::to_string(oracle.embedding_dim) +
                        " is too small; the grammar needs " + std::to_string(needed) +
                        " dimensions at locality_bandwidth " + std::to_string(oracle.locality_bandwidth));
    }
  }
}

void RunConfiguration::set_seed(std::uint64_t seed) {
  environment.rng_seed = seed;
  oracle.seed = seed;
  agent.seed = seed;
  ndg.seed = seed;
}

json RunConfiguration::to_json() const {
  json doc;
  doc["grammar"] = grammar->to_json();

  json penalties = json::array();
  for (const auto& p : environment.penalty_states) penalties.push_back(state_to_json(p));
  doc["environment"] = {{"terminal", state_to_json(environment.terminal_state)},
                        {"max_steps_per_episode", environment.max_steps_per_episode},
                        {"terminal_stops_episode", environment.terminal_stops_episode},
                        {"seed", environment.rng_seed},
                        {"penalty_states", penalties},
                        {"penalty_reward", environment.penalty_reward}};

  json oracle_doc = {{"kind", oracle.kind == OracleKind::simulated ? "simulated" : "external"},
                     {"seed", oracle.seed},
                     {"noise_drop_prob", oracle.noise_drop_prob},
                     {"noise_swap_prob", oracle.noise_swap_prob},
                     {"embedding_dim", oracle.embedding_dim},
                     {"locality_bandwidth", oracle.locality_bandwidth}};
  if (oracle.kind == OracleKind::external) {
    oracle_doc["external"] = {{"transport", oracle.external.transport == Transport::process ? "process" : "tcp"},
                              {"command", oracle.external.command},
                              {"host", oracle.external.host},
                              {"port", oracle.external.port},
                              {"timeout_seconds", oracle.external.timeout_seconds},
                              {"options", oracle.external.options}};
  }
  doc["oracle"] = oracle_doc;

  doc["reward"] = {{"kind", std::string(to_string(reward.kind))},
                   {"object_match_constant", reward.object_match_constant},
                   {"scene_match_constant", reward.scene_match_constant},
                   {"scene_matching", reward.scene_matching == SceneMatching::strict ? "strict" : "locality_group"}};

  json lr = {{"schedule", agent.learning_rate.schedule == LearningRate::Schedule::constant ? "constant"
                                                                                          : "visit_count"}};
  if (agent.learning_rate.schedule == LearningRate::Schedule::constant) lr["alpha"] = agent.learning_rate.alpha;
  json qi = agent.q_init.kind == QInit::Kind::uniform
                ? json{{"kind", "uniform"}, {"lo", agent.q_init.lo}, {"hi", agent.q_init.hi}}
                : json{{"kind", "constant"}, {"value", agent.q_init.lo}};
  doc["agent"] = {{"algorithm", std::string(to_string(agent.algorithm))},
                  {"epsilon", agent.epsilon},
                  {"learning_rate", lr},
                  {"discount", agent.discount},
                  {"q_init", qi},
                  {"seed", agent.seed},
                  {"episodes", agent.episodes}};

  doc["ndg"] = {{"max_iterations", ndg.max_iterations},
                {"probe_step", ndg.probe_step},
                {"plateau_patience", ndg.plateau_patience},
                {"stop_at_goal", ndg.stop_at_goal},
                {"seed", ndg.seed}};
  if (ndg_start) doc["ndg"]["start"] = state_to_json(*ndg_start);

  if (!sweep.agents.empty() || !sweep.rewards.empty() || !sweep.epsilons.empty() || !sweep.seeds.empty()) {
    json agents = json::array(), rewards = json::array();
    for (auto a : sweep.agents) agents.push_back(std::string(to_string(a)));
    for (auto r : sweep.rewards) rewards.push_back(static_cast<int>(r));
    doc["sweep"] = {{"agents", agents}, {"rewards", rewards}, {"epsilons", sweep.epsilons}, {"seeds", sweep.seeds}};
  }
  doc["output_dir"] = output_dir;
  doc["verbosity"] = verbosity;
  return doc;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("--set expects KEY=VALUE, got '" + std::string(assignment) + "'");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--set: malformed key '" + key + "'");
    if (!node->is_object()) throw ConfigError("--set: '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

void apply_seed(json& doc, std::uint64_t seed) {
  for (const char* section : {"environment", "oracle", "agent", "ndg"}) {
    if (!doc.contains(section)) doc[section] = json::object();
    doc[section]["seed"] = seed;
  }
}

RunConfiguration load_run_configuration(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides,
                                        std::optional<std::uint64_t> seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config not found: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  if (seed) apply_seed(doc, *seed);
  for (const auto& o : overrides) apply_override(doc, o);
  return RunConfiguration::from_json(doc, path.parent_path());
}

}  // namespace rldf
