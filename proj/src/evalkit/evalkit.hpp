#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "encoder/encoder.hpp"
#include "json.hpp"
#include "pooling/pooling.hpp"
#include "synth/types.hpp"
#include "trainer/trainer.hpp"

namespace mgh::eval {

using synth::TrainingTriplet;

// Frozen model plus pooling; embeds one text at a time.
struct Embedder {
  const enc::Encoder* model = nullptr;
  pool::PoolingSpec pooling;

  std::vector<double> operator()(const std::string& text) const;
};

struct RetrievalTask {
  std::vector<std::string> queries;
  std::vector<std::size_t> gold;  // corpus index per query
  std::vector<std::string> corpus;

  void validate() const;
};

// Queries (optionally instruction-wrapped) against the corpus of positives.
RetrievalTask desk_retrieval_task(const std::vector<TrainingTriplet>& triplets, bool instruct);

std::vector<std::size_t> gold_ranks(const RetrievalTask& task, const Embedder& embed);
double recall_at_k(const RetrievalTask& task, const Embedder& embed, std::size_t k);
double ndcg_at_k(const RetrievalTask& task, const Embedder& embed, std::size_t k);

// Spearman between cosine(query, text) and planted labels: 1 for the
// positive, 1 − p_k for negative level k, where p_k is the share of words
// the synthetic backend replaces at that level.
double sts_proxy_spearman(const std::vector<TrainingTriplet>& triplets, const Embedder& embed,
                          bool instruct);

struct LevelStat {
  int level = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

struct GranularityReport {
  std::vector<LevelStat> levels;

  bool strictly_decreasing() const;
  nlohmann::json to_json() const;
  std::string to_tsv() const;
};

// Mean cosine(query, N_k) per level over the dataset.
GranularityReport granularity_stats(const std::vector<TrainingTriplet>& triplets,
                                    const Embedder& embed, bool instruct);

struct DeskReport {
  std::size_t queries = 0;
  double recall_at_1 = 0.0;
  double recall_at_10 = 0.0;
  double ndcg_at_10 = 0.0;
  double spearman = 0.0;
  GranularityReport granularity;

  nlohmann::json to_json() const;
};

DeskReport evaluate_desk(const std::vector<TrainingTriplet>& eval_set, const Embedder& embed,
                         bool instruct);

struct AblationRow {
  std::string pooling;
  double final_loss = 0.0;
  DeskReport report;
};

// Trains one model per pooling spec from the same config, seed and data,
// then scores each on the same eval set.
std::vector<AblationRow> pooling_ablation(const train::TrainConfig& base,
                                          const std::vector<pool::PoolingSpec>& poolings,
                                          const std::vector<TrainingTriplet>& train_set,
                                          const std::vector<TrainingTriplet>& eval_set);
std::string ablation_tsv(const std::vector<AblationRow>& rows);

struct TokenWeight {
  std::size_t position = 0;
  std::string token;
  double raw = 0.0;
  double normalized = 0.0;
};

struct WeightReport {
  std::vector<TokenWeight> rows;
  num::Tensor attention_sum;  // [K × K], summed over heads

  std::string to_tsv(bool with_attention) const;
  nlohmann::json to_json() const;
};

WeightReport inspect_weights(const enc::Encoder& model, const std::string& text,
                             pool::AtaDirection direction = pool::AtaDirection::incoming);

}  // namespace mgh::eval
