#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ontoweak/layers.hpp"
#include "ontoweak/ontology.hpp"
#include "ontoweak/tape.hpp"

namespace ontoweak {

inline constexpr std::size_t kHiddenWidth = 512;
inline constexpr std::size_t kHiddenLayers = 3;
inline constexpr std::size_t kEmbedWidth = 128;
inline constexpr std::size_t kGcnHidden1 = 280;
inline constexpr std::size_t kGcnOut1 = 512;
inline constexpr std::size_t kGcnHidden2 = 320;

enum class ModelKind { kMlp, kSiameseOnto, kSiameseGcn, kMlpGcn };
enum class HeadActivation { kSigmoid, kSoftmax };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);
std::string_view to_string(HeadActivation head);
HeadActivation parse_head_activation(std::string_view text);

inline bool is_siamese(ModelKind k) {
  return k == ModelKind::kSiameseOnto || k == ModelKind::kSiameseGcn;
}
inline bool uses_gcn(ModelKind k) { return k == ModelKind::kSiameseGcn || k == ModelKind::kMlpGcn; }

struct ModelSpec {
  ModelKind kind = ModelKind::kMlp;
  std::size_t input_dim = 128;
  double dropout = kDefaultDropout;
  HeadActivation head_activation = HeadActivation::kSigmoid;
  /// LeakyReLU after the second graph convolution as well as the first.
  bool gcn_final_activation = true;
};

/// Three Linear-BatchNorm-ReLU-Dropout blocks of width 512 and a linear head.
/// The head width selects the variant: T1 + T2 (joint), T1 (subclass) or
/// 128 (embedding for the GCN similarity).
struct MlpTrunk {
  std::vector<HiddenBlock> hidden;
  Linear head;

  static MlpTrunk create(ParameterSet& params, std::size_t input_dim, std::size_t head_width,
                         double dropout, Rng& rng);
  static MlpTrunk bind(ParameterSet& params, double dropout);
  Var forward(Tape& tape, const Matrix& x, Mode mode, Rng& rng) const;
};

/// Two graph convolutions Z' = h(A' Z W1 W2) over one-hot node features.
struct GcnStack {
  Parameter* layer1_w1 = nullptr;  // C x 280
  Parameter* layer1_w2 = nullptr;  // 280 x 512
  Parameter* layer2_w1 = nullptr;  // 512 x 320
  Parameter* layer2_w2 = nullptr;  // 320 x 128
  /// Fixed re-weighted correlation, stored as a buffer.
  Parameter* correlation = nullptr;
  bool final_activation = true;

  static GcnStack create(ParameterSet& params, const CorrelationMatrix& corr,
                         bool final_activation, Rng& rng);
  static GcnStack bind(ParameterSet& params, bool final_activation);
  std::size_t num_nodes() const { return correlation->value.rows(); }
  /// C x 128 label embeddings.
  Var forward(Tape& tape) const;
};

/// audio_embed * label_embeddings^T
Var similarity_logits(Var audio_embed, Var label_embeddings);

struct LossWeights {
  double sub = 1.0;
  double super = 1.0;
  double embed = 0.0;
};

void validate(const LossWeights& w);

/// One branch of a model: the embedding `z` and probabilities per level.
struct BranchOutput {
  Var z;
  Var sub_probs;
  Var super_probs;
};

/// lambda1 * sum BCE(sub) + lambda2 * sum BCE(super) [+ lambda3 * D_w].
/// Terms with zero weight are left off the tape.
Var composite_loss(const LossWeights& weights, std::span<const BranchOutput> branches,
                   std::span<const Matrix> sub_targets, std::span<const Matrix> super_targets,
                   std::optional<Var> embedding_loss = std::nullopt);

struct Predictions {
  Matrix sub_probs;
  Matrix super_probs;
};

class Model {
 public:
  /// `corr` is required for the GCN kinds and ignored otherwise.
  static Model create(const ModelSpec& spec, const Ontology& ontology,
                      const std::optional<CorrelationMatrix>& corr, Rng& init_rng);
  /// Wraps parameters loaded from a checkpoint.
  static Model restore(const ModelSpec& spec, const Ontology& ontology, ParameterSet params);

  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  const ModelSpec& spec() const { return spec_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  std::size_t num_sub() const { return num_sub_; }
  std::size_t num_super() const { return num_super_; }
  const MlpTrunk& trunk() const { return trunk_; }
  const std::optional<GcnStack>& gcn() const { return gcn_; }
  const std::optional<OntoLayer>& onto_layer() const { return onto_; }

  /// Label embeddings for the GCN kinds; reuse across the two Siamese branches.
  std::optional<Var> label_embeddings(Tape& tape) const;
  BranchOutput branch(Tape& tape, const Matrix& x, Mode mode, Rng& rng,
                      std::optional<Var> labels = std::nullopt) const;

  /// Single-branch loss (mlp, mlp_gcn).
  Var loss(Tape& tape, const Matrix& x, const Matrix& sub_targets, const Matrix& super_targets,
           const LossWeights& weights, Mode mode, Rng& rng) const;
  /// Two-branch loss with the contrastive term (siamese kinds).
  Var pair_loss(Tape& tape, const Matrix& x_left, const Matrix& x_right,
                std::span<const Matrix> sub_targets, std::span<const Matrix> super_targets,
                std::span<const double> distances, const LossWeights& weights, Mode mode,
                Rng& rng) const;

  /// Eval-mode probabilities.
  Predictions predict(const Matrix& x) const;

 private:
  Model() = default;
  void wire(const Ontology& ontology);

  ModelSpec spec_;
  std::size_t num_sub_ = 0;
  std::size_t num_super_ = 0;
  ParameterSet params_;
  MlpTrunk trunk_;
  std::optional<GcnStack> gcn_;
  std::optional<OntoLayer> onto_;
};

}  // namespace ontoweak
