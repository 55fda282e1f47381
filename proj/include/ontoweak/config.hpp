#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "ontoweak/dataset.hpp"
#include "ontoweak/models.hpp"
#include "ontoweak/ontology.hpp"

namespace ontoweak {

/// Flat key=value settings. Later assignments win, so a config file can be
/// loaded first and command-line overrides applied on top.
class ConfigMap {
 public:
  void set(std::string key, std::string value);
  std::optional<std::string> get(std::string_view key) const;
  bool contains(std::string_view key) const { return get(key).has_value(); }
  /// '#' starts a comment; blank lines are skipped.
  void parse(std::string_view text);
  /// Relative paths in the file are taken relative to the file itself.
  void load_file(const std::filesystem::path& path);
  const std::map<std::string, std::string, std::less<>>& entries() const { return values_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

/// Every setting a command can use, with defaults resolved.
struct RunConfig {
  ModelKind model = ModelKind::kMlp;
  LossWeights lambda;
  double lr = 2e-3;
  double weight_decay = 1e-4;
  std::size_t epochs = 73;
  std::size_t batch_size = 64;
  double dropout = kDefaultDropout;
  PairingPolicy pairing = PairingPolicy::kExact;
  CorrMethod corr_method = CorrMethod::kCooccurrence;
  double t = 0.08;
  double p = 0.2;
  HeadActivation head_activation = HeadActivation::kSigmoid;
  bool gcn_final_activation = true;
  std::uint64_t seed = 42;
  std::size_t feature_dim = kFeatureDim;
  double val_fraction = 0.2;
  bool clip_pooling = false;
  bool deterministic = false;

  std::filesystem::path ontology;
  std::filesystem::path features;
  std::filesystem::path labels;
  std::filesystem::path index;
  std::filesystem::path out_dir = ".";
  std::filesystem::path checkpoint;

  SynthSpec synth;

  /// Applies per-model defaults for anything `map` leaves unset, then
  /// validates ranges. The seed falls back to ONTOWEAK_SEED, then 42.
  static RunConfig resolve(const ConfigMap& map);
  /// Every key, one per line, in a form resolve() reads back identically.
  /// Without `with_io` only the keys that shape the trained model are kept,
  /// so a checkpoint does not depend on where its inputs lived.
  std::string to_text(bool with_io = true) const;
  ModelSpec model_spec() const;
  CorpusPaths corpus_paths() const { return {features, labels, index}; }
};

/// Recorded per-model defaults: learning rate, loss weights, epochs.
struct ModelDefaults {
  double lr;
  LossWeights lambda;
  std::size_t epochs;
};
ModelDefaults model_defaults(ModelKind kind);

LossWeights parse_lambda(std::string_view text);

}  // namespace ontoweak
