#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ontoweak/matrix.hpp"
#include "ontoweak/ontology.hpp"
#include "ontoweak/random.hpp"

namespace ontoweak {

inline constexpr std::size_t kFeatureDim = 128;
/// Leading bytes of a features file.
inline constexpr char kFeaturesMagic[4] = {'O', 'W', 'F', '1'};

/// One feature vector with its weak labels at both ontology levels. Label
/// lists are sorted and duplicate free; `super_labels` is exactly the image
/// of `sub_labels` under the ontology's parent map.
struct Instance {
  std::string clip_id;
  std::uint32_t frame = 0;
  std::vector<double> features;
  std::vector<std::size_t> sub_labels;
  std::vector<std::size_t> super_labels;
};

/// Validates the labels and derives the superclass set.
Instance make_instance(std::string clip_id, std::uint32_t frame, std::vector<double> features,
                       std::vector<std::size_t> sub_labels, const Ontology& ontology);
std::vector<std::size_t> expand_super_labels(std::span<const std::size_t> sub_labels,
                                             const Ontology& ontology);

struct CorpusStats {
  std::vector<std::size_t> sub_counts;
  std::vector<std::size_t> super_counts;
  std::size_t instances = 0;
};

CorpusStats compute_stats(std::span<const Instance> instances, const Ontology& ontology);

struct Corpus {
  std::vector<Instance> instances;
  CorpusStats stats;
  std::size_t dim = kFeatureDim;
};

struct CorpusPaths {
  std::filesystem::path features;
  std::filesystem::path labels;
  /// Sidecar "clip_id,frame_idx" lines; defaults to features + ".index".
  std::filesystem::path index;
};

std::filesystem::path default_index_path(const std::filesystem::path& features);

/// One Instance per feature row; every row inherits its clip's labels.
Corpus load_corpus(const CorpusPaths& paths, const Ontology& ontology,
                   std::size_t expected_dim = kFeatureDim);
/// Writes all three files. Features are stored as 32-bit floats.
void write_corpus(const CorpusPaths& paths, const Corpus& corpus, const Ontology& ontology);

/// Row-stacked features of the selected instances.
Matrix gather_features(std::span<const Instance> instances, std::span<const std::size_t> rows);
/// Multi-hot subclass / superclass targets of the selected instances.
Matrix gather_sub_targets(std::span<const Instance> instances, std::span<const std::size_t> rows,
                          std::size_t num_sub);
Matrix gather_super_targets(std::span<const Instance> instances,
                            std::span<const std::size_t> rows, std::size_t num_super);

enum class PairingPolicy { kExact, kIntersect };

std::string_view to_string(PairingPolicy policy);
PairingPolicy parse_pairing_policy(std::string_view text);

/// Target distance between two labelled instances:
///   exact:     0 iff identical subclass sets, else 1 iff identical superclass sets, else 2
///   intersect: 0 iff the subclass sets meet, else 1 iff the superclass sets meet, else 2
int assign_distance(const Instance& a, const Instance& b, PairingPolicy policy);

/// Indices into the sampled instance list plus the target distance.
struct PairedInstance {
  std::size_t left = 0;
  std::size_t right = 0;
  int d = 0;
};

struct PairBatch {
  std::vector<PairedInstance> pairs;
  /// Distance strata that could not be found in the pool.
  std::vector<int> missing_strata;
};

/// Draws `batch_size` pairs from `pool` (indices into `instances`), cycling
/// through d = 0, 1, 2 so each stratum gets about a third of the batch. A
/// stratum the pool cannot produce is reported and its slots go to the
/// strata that exist.
PairBatch sample_pairs(std::span<const Instance> instances, std::span<const std::size_t> pool,
                       PairingPolicy policy, std::size_t batch_size, Rng& rng);

struct SynthSpec {
  std::size_t n_super = 3;
  std::size_t subs_per_super = 3;
  std::size_t dim = 16;
  std::size_t n_instances = 3000;
  double multilabel_rate = 0.2;
  double label_drop_rate = 0.1;
  double cluster_spread = 0.5;
  std::uint64_t seed = 42;
  /// Extra instances drawn from the same clusters after the main corpus.
  std::size_t n_test = 0;
};

struct SynthCorpus {
  Ontology ontology;
  Corpus corpus;
  /// Labels before weak-label dropping, one list per instance.
  std::vector<std::vector<std::size_t>> true_sub_labels;
  /// num_sub x dim cluster centres.
  Matrix centers;
  /// Held-out instances (spec.n_test of them) with clip ids "test######".
  Corpus test;
  std::vector<std::vector<std::size_t>> test_true_sub_labels;
};

/// Superclass centres ~ N(0, 3^2) per dimension, subclass centres offset
/// from their parent by N(0, 1), samples spread by N(0, cluster_spread^2).
/// Features are the mean of one sample per true label, rounded to float.
SynthCorpus synth_generate(const SynthSpec& spec);

}  // namespace ontoweak
