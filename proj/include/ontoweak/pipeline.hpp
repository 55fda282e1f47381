#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ontoweak/checkpoint.hpp"
#include "ontoweak/config.hpp"
#include "ontoweak/dataset.hpp"
#include "ontoweak/gradcheck.hpp"
#include "ontoweak/metrics.hpp"
#include "ontoweak/models.hpp"

namespace ontoweak {

using LogSink = std::function<void(std::string_view line)>;

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Holds out whole clips: a clip goes to validation when the FNV-1a hash of
/// its id falls in the lowest `val_fraction` of the hash range.
Split split_by_clip(const Corpus& corpus, double val_fraction);

/// Label sets over the combined node graph (subclasses, then superclasses).
std::vector<std::vector<std::size_t>> node_label_sets(std::span<const Instance> instances,
                                                      std::span<const std::size_t> rows,
                                                      const Ontology& ontology);

struct CorrelationBuild {
  /// Binarized adjacency before re-weighting.
  Matrix binary;
  CorrelationMatrix corr;
};

/// Co-occurrence statistics come from `rows` of `instances`; the two
/// ontology methods ignore the data.
CorrelationBuild build_correlation(CorrMethod method, double t, double p,
                                   const Ontology& ontology, std::span<const Instance> instances,
                                   std::span<const std::size_t> rows);

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  std::optional<double> val_sub_ap;
  std::optional<double> val_super_ap;
  std::optional<double> val_sub_auc;
  std::optional<double> val_super_auc;
};

struct TrainResult {
  /// Parameters of the best validation epoch (the last epoch without a
  /// validation split).
  Model model;
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  Split split;
  CorpusStats train_stats;
  std::vector<std::string> warnings;
};

/// Minibatch Adam over the training split; deterministic for a fixed seed.
/// Throws TrainingError on a non-finite loss.
TrainResult train_model(const RunConfig& config, const Corpus& corpus, const Ontology& ontology,
                        const LogSink& log = {});

Checkpoint make_checkpoint(const RunConfig& config, const Model& model, const Ontology& ontology,
                           const CorpusStats& train_stats, std::size_t best_epoch);

struct RestoredModel {
  RunConfig config;
  Model model;
  CorpusStats train_stats;
};

/// Rebuilds a model; ConfigError if the checkpoint's label space differs
/// from `ontology`.
RestoredModel restore_model(const Checkpoint& ckpt, const Ontology& ontology);

/// Eval-mode probabilities for the selected rows, in chunks.
Predictions predict_rows(const Model& model, std::span<const Instance> instances,
                         std::span<const std::size_t> rows);

/// Scores the corpus; weights come from `train_stats`. With clip pooling the
/// frame probabilities of each clip are averaged first.
EvalReport evaluate_model(const Model& model, const Corpus& corpus, const Ontology& ontology,
                          const CorpusStats& train_stats, bool clip_pooling);
EvalReport evaluate(const Checkpoint& ckpt, const Corpus& corpus, const Ontology& ontology,
                    bool clip_pooling);

// Command runners behind the CLI and the C API. Each writes into
// config.out_dir and reports progress through `log`.

/// ontology.json, train.{features,features.index,labels}, optional test.*,
/// manifest.txt and corpus.cfg.
void run_synth_data(const RunConfig& config, const LogSink& log = {});

struct CorrelationAudit {
  std::size_t nodes = 0;
  std::size_t binary_nonzeros = 0;
  double min_row_sum = 0.0;
  double max_row_sum = 0.0;
};

CorrelationAudit run_build_corr(const RunConfig& config, const std::filesystem::path& out_path,
                                const LogSink& log = {});

/// checkpoint.bin, config.resolved and train.log.
TrainResult run_train(const RunConfig& config, const LogSink& log = {});

/// report.json and report.txt.
EvalReport run_eval(const RunConfig& config, const LogSink& log = {});

}  // namespace ontoweak
