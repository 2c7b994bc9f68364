#include "zsmg/store.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace zsmg {

namespace {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json load_json_file(const std::filesystem::path& path,
                    const std::string& expected_format) {
  std::ifstream in(path);
  if (!in) throw StoreError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw StoreError(path.string() + ": " + e.what());
  }
  if (j.value("format", "") != expected_format)
    throw StoreError(path.string() + ": expected format '" + expected_format +
                     "', found '" + j.value("format", "<missing>") + "'");
  if (j.value("version", 0) != 1)
    throw StoreError(path.string() + ": unsupported version " +
                     std::to_string(j.value("version", 0)));
  return j;
}

}  // namespace

void write_corpus(const std::filesystem::path& path,
                  const SampleCorpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StoreError("cannot open " + path.string() + " for writing");
  json header = {{"format", "zsmg-corpus"},
                 {"version", 1},
                 {"env", corpus.env_id},
                 {"n_agent_actions", corpus.n_agent_actions},
                 {"n_opp_actions", corpus.n_opp_actions},
                 {"seed", corpus.seed},
                 {"episodes", corpus.episodes},
                 {"cap", corpus.sample_cap}};
  out << header.dump() << "\n";
  for (const auto& s : corpus.samples) {
    out << s.state << ',' << s.agent_action << ',' << s.opp_action << ','
        << format_double(s.reward) << ',' << s.next_state << ','
        << (s.terminal ? 1 : 0) << "\n";
  }
  if (!out) throw StoreError("write failed: " + path.string());
}

SampleCorpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw StoreError(path.string() + ": empty file");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw StoreError(path.string() + ": bad header: " + e.what());
  }
  if (header.value("format", "") != "zsmg-corpus")
    throw StoreError(path.string() + ": not a zsmg-corpus file");
  if (header.value("version", 0) != 1)
    throw StoreError(path.string() + ": unsupported corpus version");

  SampleCorpus corpus;
  corpus.env_id = header.value("env", "");
  corpus.n_agent_actions = header.value("n_agent_actions", 0);
  corpus.n_opp_actions = header.value("n_opp_actions", 0);
  corpus.seed = header.value("seed", std::uint64_t{0});
  corpus.episodes = header.value("episodes", 0);
  corpus.sample_cap = header.value("cap", 0LL);

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    GameSample s;
    int terminal = 0;
    char c1, c2, c3, c4, c5;
    std::istringstream fields(line);
    fields >> s.state >> c1 >> s.agent_action >> c2 >> s.opp_action >> c3 >>
        s.reward >> c4 >> s.next_state >> c5 >> terminal;
    if (!fields || c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',' ||
        c5 != ',' || (terminal != 0 && terminal != 1))
      throw StoreError(path.string() + ": malformed record at line " +
                       std::to_string(line_no));
    s.terminal = terminal == 1;
    corpus.samples.push_back(s);
  }
  return corpus;
}

void write_weights(const std::filesystem::path& path, const WeightVector& w) {
  json j = {{"format", "zsmg-weights"}, {"version", 1},
            {"features", w.features}, {"gamma", w.gamma},
            {"env", w.env},           {"k", w.w.size()}};
  j["w"] = std::vector<double>(w.w.data(), w.w.data() + w.w.size());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StoreError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
}

WeightVector read_weights(const std::filesystem::path& path) {
  const json j = load_json_file(path, "zsmg-weights");
  WeightVector w;
  w.features = j.value("features", "");
  w.gamma = j.value("gamma", 0.0);
  w.env = j.value("env", "");
  const auto values = j.at("w").get<std::vector<double>>();
  if (j.value("k", -1) != static_cast<int>(values.size()))
    throw StoreError(path.string() + ": field 'k' disagrees with |w|");
  w.w = Eigen::Map<const Vector>(values.data(), values.size());
  return w;
}

void write_game(const std::filesystem::path& path, const TabularGame& game) {
  json j = {{"format", "zsmg-game"},
            {"version", 1},
            {"n_states", game.n_states},
            {"n_agent_actions", game.n_agent_actions},
            {"n_opp_actions", game.n_opp_actions},
            {"gamma", game.discount},
            {"terminal", game.terminal},
            {"rewards", game.rewards}};
  json transitions = json::array();
  for (const auto& row : game.transitions) {
    json entries = json::array();
    for (const auto& t : row) entries.push_back({t.state, t.prob});
    transitions.push_back(std::move(entries));
  }
  j["transitions"] = std::move(transitions);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StoreError("cannot open " + path.string() + " for writing");
  out << j.dump() << "\n";
}

TabularGame read_game(const std::filesystem::path& path) {
  const json j = load_json_file(path, "zsmg-game");
  TabularGame game;
  try {
    game.n_states = j.at("n_states").get<int>();
    game.n_agent_actions = j.at("n_agent_actions").get<int>();
    game.n_opp_actions = j.at("n_opp_actions").get<int>();
    game.discount = j.at("gamma").get<double>();
    game.terminal = j.at("terminal").get<std::vector<std::uint8_t>>();
    game.rewards = j.at("rewards").get<std::vector<double>>();
    for (const auto& row : j.at("transitions")) {
      std::vector<Transition> entries;
      for (const auto& t : row)
        entries.push_back({t.at(0).get<int>(), t.at(1).get<double>()});
      game.transitions.push_back(std::move(entries));
    }
  } catch (const json::exception& e) {
    throw StoreError(path.string() + ": " + e.what());
  }
  game.validate();
  return game;
}

void append_results_row(const std::filesystem::path& path,
                        const ResultsRow& row) {
  const bool exists = std::filesystem::exists(path) &&
                      std::filesystem::file_size(path) > 0;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw StoreError("cannot open " + path.string() + " for writing");
  if (!exists)
    out << "experiment,corpus_games,repetition,wins,draws,losses,"
           "discounted_score,ci_halfwidth\n";
  out << row.experiment << ',' << row.corpus_games << ',' << row.repetition
      << ',' << format_double(row.wins) << ',' << format_double(row.draws)
      << ',' << format_double(row.losses) << ','
      << format_double(row.discounted_score) << ','
      << format_double(row.ci_halfwidth) << "\n";
}

std::vector<ResultsRow> read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw StoreError(path.string() + ": empty results file");
  std::vector<ResultsRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ResultsRow row;
    std::istringstream fields(line);
    std::string cell;
    auto next_cell = [&]() -> std::string {
      if (!std::getline(fields, cell, ','))
        throw StoreError(path.string() + ": short row at line " +
                         std::to_string(line_no));
      return cell;
    };
    row.experiment = next_cell();
    row.corpus_games = std::stoi(next_cell());
    row.repetition = std::stoi(next_cell());
    row.wins = std::stod(next_cell());
    row.draws = std::stod(next_cell());
    row.losses = std::stod(next_cell());
    row.discounted_score = std::stod(next_cell());
    row.ci_halfwidth = std::stod(next_cell());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace zsmg
