#include "rldf/io.hpp"

#include <fmt/format.h>

#include <istream>
#include <ostream>

#include "rldf/error.hpp"

namespace rldf {

namespace {

using json = nlohmann::json;

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    out << csv_field(fields[i]);
  }
  out << '\n';
}

std::vector<std::string> statistics_fields(const RunStatistics& s) {
  return {format_number(s.d_t),      format_number(s.d_max),      format_number(s.d_min),
          format_number(s.rho),      format_number(s.sigma_sq),   format_number(s.conv),
          format_number(s.f_semantic), format_number(s.c_semantic)};
}

EncodedState state_from(const json& j) { return EncodedState{j.get<std::vector<int>>()}; }

}  // namespace

std::string format_number(double value) { return fmt::format("{}", value); }

const std::vector<std::string>& statistics_columns() {
  static const std::vector<std::string> columns = {
      "Agent", "Reward", "ε", "D_T", "D_max", "D_min", "ρ", "σ²", "Conv.", "F Semantic", "C Semantic",
      "seed", "oracle_calls"};
  return columns;
}

void write_statistics_csv(std::ostream& out, const std::vector<StatisticsRow>& rows) {
  write_row(out, statistics_columns());
  for (const auto& r : rows) {
    std::vector<std::string> f = {r.agent, std::to_string(static_cast<int>(r.reward)), format_number(r.epsilon)};
    for (auto& x : statistics_fields(r.statistics)) f.push_back(std::move(x));
    f.push_back(std::to_string(r.seed));
    f.push_back(format_number(r.statistics.oracle_calls));
    write_row(out, f);
  }
}

void write_summary_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  auto columns = statistics_columns();
  columns[columns.size() - 2] = "seeds";
  write_row(out, columns);
  for (const auto& r : rows) {
    std::vector<std::string> f = {std::string(table_label(r.agent)), std::to_string(static_cast<int>(r.reward)),
                                  format_number(r.epsilon)};
    if (r.seeds > 0) {
      for (auto& x : statistics_fields(r.mean)) f.push_back(std::move(x));
    } else {
      f.resize(f.size() + 8);
    }
    f.push_back(std::to_string(r.seeds));
    f.push_back(r.seeds > 0 ? format_number(r.mean.oracle_calls) : "");
    write_row(out, f);
  }
}

void write_failures_csv(std::ostream& out, const std::vector<CellResult>& results) {
  write_row(out, {"ordinal", "Agent", "Reward", "ε", "seed", "error"});
  for (const auto& r : results) {
    if (r.ok()) continue;
    write_row(out, {std::to_string(r.cell.ordinal), std::string(table_label(r.cell.agent)),
                    std::to_string(static_cast<int>(r.cell.reward)), format_number(r.cell.epsilon),
                    std::to_string(r.cell.seed), r.error});
  }
}

json to_json(const RunStatistics& s) {
  return {{"d_t", s.d_t},           {"d_max", s.d_max},
          {"d_min", s.d_min},       {"rho", s.rho},
          {"sigma_sq", s.sigma_sq}, {"conv", s.conv},
          {"f_semantic", s.f_semantic}, {"c_semantic", s.c_semantic},
          {"oracle_calls", s.oracle_calls}};
}

RunStatistics statistics_from_json(const json& j) {
  RunStatistics s;
  s.d_t = j.at("d_t").get<double>();
  s.d_max = j.at("d_max").get<double>();
  s.d_min = j.at("d_min").get<double>();
  s.rho = j.at("rho").get<double>();
  s.sigma_sq = j.at("sigma_sq").get<double>();
  s.conv = j.at("conv").get<double>();
  s.f_semantic = j.at("f_semantic").get<double>();
  s.c_semantic = j.at("c_semantic").get<double>();
  s.oracle_calls = j.at("oracle_calls").get<double>();
  return s;
}

void write_trajectory_log(std::ostream& out, const TrajectoryLog& log) {
  nlohmann::ordered_json header;
  header["type"] = "header";
  header["agent"] = log.header.agent;
  header["reward"] = log.header.reward;
  header["epsilon"] = log.header.epsilon;
  header["seed"] = log.header.seed;
  header["terminal"] = log.header.terminal.coords;
  header["axes"] = log.header.axes;
  out << header.dump() << '\n';

  for (const auto& ep : log.episodes) {
    nlohmann::ordered_json rec;
    rec["type"] = "episode";
    rec["episode"] = ep.episode;
    rec["start"] = ep.start.coords;
    rec["reached_terminal"] = ep.reached_terminal;
    auto steps = nlohmann::ordered_json::array();
    for (const auto& s : ep.steps) {
      nlohmann::ordered_json j;
      j["state"] = s.state.coords;
      j["action"] = s.action;
      j["reward"] = s.reward;
      j["objects_mask"] = s.observation.objects_mask;
      j["objects_matched"] = s.observation.objects_matched();
      j["scene_matched"] = s.observation.scene_matched;
      j["next_state"] = s.next_state.coords;
      j["distance"] = s.distance;
      steps.push_back(std::move(j));
    }
    rec["steps"] = std::move(steps);
    out << rec.dump() << '\n';
  }

  nlohmann::ordered_json summary;
  summary["type"] = "summary";
  summary["conv"] = log.conv;
  summary["oracle_calls"] = log.oracle_calls;
  summary["episodes"] = log.episodes.size();
  out << summary.dump() << '\n';
}

TrajectoryLog read_trajectory_log(std::istream& in) {
  TrajectoryLog log;
  bool have_header = false;
  bool have_summary = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = "trajectory log line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
    try {
      const auto type = j.at("type").get<std::string>();
      if (type == "header") {
        log.header.agent = j.at("agent").get<std::string>();
        log.header.reward = j.at("reward").get<int>();
        log.header.epsilon = j.at("epsilon").get<double>();
        log.header.seed = j.at("seed").get<std::uint64_t>();
        log.header.terminal = state_from(j.at("terminal"));
        log.header.axes = j.at("axes").get<std::vector<std::string>>();
        have_header = true;
      } else if (type == "episode") {
        if (!have_header) throw ConfigError(where + ": episode before header");
        TrajectoryRecord rec;
        rec.episode = j.at("episode").get<int>();
        rec.start = state_from(j.at("start"));
        rec.reached_terminal = j.at("reached_terminal").get<bool>();
        for (const auto& s : j.at("steps")) {
          TrajectoryStep step;
          step.state = state_from(s.at("state"));
          step.action = s.at("action").get<std::size_t>();
          step.reward = s.at("reward").get<double>();
          step.observation.objects_mask = s.at("objects_mask").get<std::uint64_t>();
          step.observation.scene_matched = s.at("scene_matched").get<bool>();
          step.next_state = state_from(s.at("next_state"));
          step.distance = semantic_distance(step.next_state, log.header.terminal);
          if (step.distance != s.at("distance").get<int>()) {
            throw InvariantError(where + ": logged distance disagrees with next_state");
          }
          rec.steps.push_back(std::move(step));
        }
        log.episodes.push_back(std::move(rec));
      } else if (type == "summary") {
        log.conv = j.at("conv").get<int>();
        log.oracle_calls = j.at("oracle_calls").get<std::uint64_t>();
        if (j.at("episodes").get<std::size_t>() != log.episodes.size()) {
          throw ConfigError(where + ": summary episode count does not match the log");
        }
        have_summary = true;
      } else {
        throw ConfigError(where + ": unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  if (!have_header) throw ConfigError("trajectory log has no header record");
  if (!have_summary) throw ConfigError("trajectory log has no summary record");
  return log;
}

std::optional<RunStatistics> replay_statistics(const TrajectoryLog& log) {
  if (log.episodes.empty()) return std::nullopt;
  auto s = summarize_episode(log.episodes.back());
  if (s) {
    s->conv = log.conv;
    s->oracle_calls = static_cast<double>(log.oracle_calls);
  }
  return s;
}

void write_qtable_csv(std::ostream& out, const QTable& q, const Grammar& grammar) {
  std::vector<std::string> header;
  for (const auto& axis : grammar.axes()) header.push_back(axis.name);
  header.insert(header.end(), {"action", "q", "visits"});
  write_row(out, header);

  std::vector<std::string> names;
  for (const auto& a : action_set(grammar)) names.push_back(action_name(grammar, a));
  for (std::size_t s = 0; s < q.state_count(); ++s) {
    const auto coords = grammar.state_at(s).coords;
    for (std::size_t a = 0; a < q.action_count(); ++a) {
      std::vector<std::string> row;
      for (int c : coords) row.push_back(std::to_string(c));
      row.push_back(names[a]);
      row.push_back(format_number(q.value(s, a)));
      row.push_back(std::to_string(q.visits(s, a)));
      write_row(out, row);
    }
  }
}

nlohmann::ordered_json to_json(const NdgRun& run, const Grammar& grammar) {
  nlohmann::ordered_json moves = nlohmann::ordered_json::array();
  for (const auto& m : run.result.trajectory) {
    nlohmann::ordered_json j;
    j["from"] = m.from.coords;
    j["action"] = action_name(grammar, Action{m.axis, m.direction});
    j["to"] = m.to.coords;
    j["reward"] = m.reward;
    moves.push_back(std::move(j));
  }
  nlohmann::ordered_json j;
  j["status"] = std::string(to_string(run.result.status));
  j["iterations"] = run.result.iterations;
  j["start"] = run.start.coords;
  j["start_prompt"] = decode(run.start, grammar).text;
  j["final_state"] = run.result.final_state.coords;
  j["final_prompt"] = decode(run.result.final_state, grammar).text;
  j["final_reward"] = run.result.final_reward;
  j["passed_goal"] = run.result.passed_goal;
  j["oracle_calls"] = run.oracle_generations;
  j["moves"] = std::move(moves);
  return j;
}

}  // namespace rldf
