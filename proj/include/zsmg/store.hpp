#pragma once

#include <filesystem>

#include "zsmg/game.hpp"
#include "zsmg/lspi.hpp"

namespace zsmg {

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Corpus file: one JSON header line, then one CSV record per sample
/// (state,a,o,reward,next_state,terminal) with rewards at 17 significant
/// digits; write/read round trips are byte-identical.
void write_corpus(const std::filesystem::path& path, const SampleCorpus& corpus);
SampleCorpus read_corpus(const std::filesystem::path& path);

void write_weights(const std::filesystem::path& path, const WeightVector& w);
WeightVector read_weights(const std::filesystem::path& path);

void write_game(const std::filesystem::path& path, const TabularGame& game);
TabularGame read_game(const std::filesystem::path& path);

struct ResultsRow {
  std::string experiment;
  int corpus_games = 0;
  int repetition = 0;
  double wins = 0, draws = 0, losses = 0;
  double discounted_score = 0;
  double ci_halfwidth = 0;
};

/// CSV append with header-once semantics.
void append_results_row(const std::filesystem::path& path, const ResultsRow& row);
std::vector<ResultsRow> read_results(const std::filesystem::path& path);

}  // namespace zsmg
