#include "evalkit/evalkit.hpp"

#include <cmath>
#include <cstdio>

#include "common/errors.hpp"
#include "evalkit/metrics.hpp"
#include "objective/objective.hpp"
#include "synth/mock_backend.hpp"

namespace mgh::eval {
namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::vector<double> Embedder::operator()(const std::string& text) const {
  if (model == nullptr) throw ContractError("embedder has no model");
  num::Tape tape;
  const auto tokens = enc::tokenize(text, static_cast<std::size_t>(model->config().max_seq_len));
  const auto v = pool::pool(enc::encode(*model, tokens, tape), pooling);
  return v.value().values();
}

void RetrievalTask::validate() const {
  if (queries.empty()) throw ContractError("retrieval task has no queries");
  if (gold.size() != queries.size()) throw ContractError("retrieval task: one gold id per query");
  for (auto g : gold) {
    if (g >= corpus.size()) throw ContractError("retrieval task: gold id outside the corpus");
  }
}

RetrievalTask desk_retrieval_task(const std::vector<TrainingTriplet>& triplets, bool instruct) {
  RetrievalTask task;
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    task.queries.push_back(train::wrap_query(triplets[i].task, triplets[i].query, instruct));
    task.gold.push_back(i);
    task.corpus.push_back(triplets[i].positive);
  }
  return task;
}

std::vector<std::size_t> gold_ranks(const RetrievalTask& task, const Embedder& embed) {
  task.validate();
  std::vector<std::vector<double>> docs;
  docs.reserve(task.corpus.size());
  for (const auto& d : task.corpus) docs.push_back(embed(d));
  std::vector<std::size_t> ranks;
  std::vector<double> scores(docs.size());
  for (std::size_t q = 0; q < task.queries.size(); ++q) {
    const auto qv = embed(task.queries[q]);
    for (std::size_t j = 0; j < docs.size(); ++j) scores[j] = obj::cosine(qv, docs[j]);
    ranks.push_back(gold_rank(scores, task.gold[q]));
  }
  return ranks;
}

double recall_at_k(const RetrievalTask& task, const Embedder& embed, std::size_t k) {
  return eval::recall_at_k(gold_ranks(task, embed), k);
}

double ndcg_at_k(const RetrievalTask& task, const Embedder& embed, std::size_t k) {
  return eval::ndcg_at_k(gold_ranks(task, embed), k);
}

double sts_proxy_spearman(const std::vector<TrainingTriplet>& triplets, const Embedder& embed,
                          bool instruct) {
  std::vector<double> predicted, labels;
  for (const auto& t : triplets) {
    const auto q = embed(train::wrap_query(t.task, t.query, instruct));
    predicted.push_back(obj::cosine(q, embed(t.positive)));
    labels.push_back(1.0);
    for (std::size_t k = 0; k < t.negatives.size(); ++k) {
      predicted.push_back(obj::cosine(q, embed(t.negatives[k])));
      labels.push_back(1.0 - synth::mock::corruption_percent(k + 1, t.negatives.size()) / 100.0);
    }
  }
  return spearman(predicted, labels);
}

bool GranularityReport::strictly_decreasing() const {
  for (std::size_t k = 1; k < levels.size(); ++k) {
    if (!(levels[k].mean < levels[k - 1].mean)) return false;
  }
  return !levels.empty();
}

nlohmann::json GranularityReport::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& l : levels) {
    out.push_back({{"level", l.level}, {"mean", l.mean}, {"stddev", l.stddev}, {"count", l.count}});
  }
  return out;
}

std::string GranularityReport::to_tsv() const {
  std::string out = "level\tmean_cosine\tstddev\tcount\n";
  for (const auto& l : levels) {
    out += std::to_string(l.level) + "\t" + fmt(l.mean) + "\t" + fmt(l.stddev) + "\t" +
           std::to_string(l.count) + "\n";
  }
  return out;
}

GranularityReport granularity_stats(const std::vector<TrainingTriplet>& triplets,
                                    const Embedder& embed, bool instruct) {
  if (triplets.empty()) throw ContractError("granularity_stats: empty dataset");
  const std::size_t levels = triplets.front().negatives.size();
  std::vector<std::vector<double>> sims(levels);
  for (const auto& t : triplets) {
    if (t.negatives.size() != levels) throw ContractError("granularity_stats: incomplete triplet");
    const auto q = embed(train::wrap_query(t.task, t.query, instruct));
    for (std::size_t k = 0; k < levels; ++k) sims[k].push_back(obj::cosine(q, embed(t.negatives[k])));
  }
  GranularityReport report;
  for (std::size_t k = 0; k < levels; ++k) {
    const double n = static_cast<double>(sims[k].size());
    double mean = 0.0;
    for (double s : sims[k]) mean += s;
    mean /= n;
    double var = 0.0;
    for (double s : sims[k]) var += (s - mean) * (s - mean);
    report.levels.push_back({static_cast<int>(k + 1), mean, std::sqrt(var / n), sims[k].size()});
  }
  return report;
}

nlohmann::json DeskReport::to_json() const {
  return {{"queries", queries},         {"recall@1", recall_at_1},
          {"recall@10", recall_at_10},  {"ndcg@10", ndcg_at_10},
          {"spearman", spearman},       {"granularity", granularity.to_json()}};
}

DeskReport evaluate_desk(const std::vector<TrainingTriplet>& eval_set, const Embedder& embed,
                         bool instruct) {
  const auto task = desk_retrieval_task(eval_set, instruct);
  const auto ranks = gold_ranks(task, embed);
  DeskReport r;
  r.queries = ranks.size();
  r.recall_at_1 = eval::recall_at_k(ranks, 1);
  r.recall_at_10 = eval::recall_at_k(ranks, 10);
  r.ndcg_at_10 = eval::ndcg_at_k(ranks, 10);
  r.spearman = sts_proxy_spearman(eval_set, embed, instruct);
  r.granularity = granularity_stats(eval_set, embed, instruct);
  return r;
}

std::vector<AblationRow> pooling_ablation(const train::TrainConfig& base,
                                          const std::vector<pool::PoolingSpec>& poolings,
                                          const std::vector<TrainingTriplet>& train_set,
                                          const std::vector<TrainingTriplet>& eval_set) {
  if (poolings.size() < 2) throw ConfigError("pooling ablation needs at least two pooling methods");
  std::vector<AblationRow> rows;
  for (const auto& spec : poolings) {
    train::TrainConfig cfg = base;
    cfg.pooling = spec;
    auto result = train::train(cfg, train_set);
    AblationRow row;
    row.pooling = pool::to_string(spec.kind);
    row.final_loss = result.manifest.losses.back().loss;
    row.report = evaluate_desk(eval_set, Embedder{&result.model, spec}, cfg.instruct);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_tsv(const std::vector<AblationRow>& rows) {
  std::string out = "pooling\tfinal_loss\trecall@1\trecall@10\tndcg@10\tspearman\n";
  for (const auto& r : rows) {
    out += r.pooling + "\t" + fmt(r.final_loss) + "\t" + fmt(r.report.recall_at_1) + "\t" +
           fmt(r.report.recall_at_10) + "\t" + fmt(r.report.ndcg_at_10) + "\t" +
           fmt(r.report.spearman) + "\n";
  }
  return out;
}

std::string WeightReport::to_tsv(bool with_attention) const {
  std::string out = "position\ttoken\traw\tnormalized\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "\t%.9f\t%.9f\n", r.raw, r.normalized);
    out += std::to_string(r.position) + "\t" + r.token + buf;
  }
  if (with_attention) {
    const std::size_t k = rows.size();
    out += "\n# attention summed over heads: row = query position, column = key position\n";
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        std::snprintf(buf, sizeof buf, "%s%.6f", j ? "\t" : "", attention_sum.at(i, j));
        out += buf;
      }
      out += "\n";
    }
  }
  return out;
}

nlohmann::json WeightReport::to_json() const {
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto& r : rows) {
    tokens.push_back({{"position", r.position}, {"token", r.token}, {"raw", r.raw},
                      {"normalized", r.normalized}});
  }
  nlohmann::json map = nlohmann::json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = attention_sum.row(i);
    map.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"tokens", tokens}, {"attention_sum", map}};
}

WeightReport inspect_weights(const enc::Encoder& model, const std::string& text,
                             pool::AtaDirection direction) {
  const auto tokens = enc::tokenize(text, static_cast<std::size_t>(model.config().max_seq_len));
  num::Tape tape;
  const auto out = enc::encode(model, tokens, tape);
  const num::Tensor& att = out.attention.value();
  const auto w = pool::ata_weights(att, direction);
  const std::size_t heads = att.dim(0), k = att.dim(1);
  WeightReport report;
  for (std::size_t t = 0; t < k; ++t) {
    report.rows.push_back({t, enc::render_token(tokens.ids[t]), w.raw[t], w.normalized[t]});
  }
  report.attention_sum = num::Tensor({k, k});
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) report.attention_sum.at(i, j) += att.at(h, i, j);
    }
  }
  return report;
}

}  // namespace mgh::eval
