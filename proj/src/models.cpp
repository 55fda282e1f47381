#include "ontoweak/models.hpp"

#include <string>

#include "ontoweak/errors.hpp"
#include "ontoweak/ops.hpp"

namespace ontoweak {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kMlp: return "mlp";
    case ModelKind::kSiameseOnto: return "siamese_onto";
    case ModelKind::kSiameseGcn: return "siamese_gcn";
    case ModelKind::kMlpGcn: return "mlp_gcn";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "mlp") return ModelKind::kMlp;
  if (text == "siamese_onto") return ModelKind::kSiameseOnto;
  if (text == "siamese_gcn") return ModelKind::kSiameseGcn;
  if (text == "mlp_gcn") return ModelKind::kMlpGcn;
  throw ConfigError("unknown model kind '" + std::string(text) + "'");
}

std::string_view to_string(HeadActivation head) {
  return head == HeadActivation::kSigmoid ? "sigmoid" : "softmax";
}

HeadActivation parse_head_activation(std::string_view text) {
  if (text == "sigmoid") return HeadActivation::kSigmoid;
  if (text == "softmax") return HeadActivation::kSoftmax;
  throw ConfigError("unknown head activation '" + std::string(text) + "'");
}

MlpTrunk MlpTrunk::create(ParameterSet& params, std::size_t input_dim, std::size_t head_width,
                          double dropout, Rng& rng) {
  MlpTrunk trunk;
  std::size_t in = input_dim;
  for (std::size_t i = 0; i < kHiddenLayers; ++i) {
    trunk.hidden.push_back(HiddenBlock::create(params, "trunk.hidden" + std::to_string(i), in,
                                               kHiddenWidth, dropout, rng));
    in = kHiddenWidth;
  }
  trunk.head = Linear::create(params, "trunk.head", kHiddenWidth, head_width, true, rng);
  return trunk;
}

MlpTrunk MlpTrunk::bind(ParameterSet& params, double dropout) {
  MlpTrunk trunk;
  for (std::size_t i = 0; i < kHiddenLayers; ++i)
    trunk.hidden.push_back(
        HiddenBlock::bind(params, "trunk.hidden" + std::to_string(i), dropout));
  trunk.head = Linear::bind(params, "trunk.head", true);
  return trunk;
}

Var MlpTrunk::forward(Tape& tape, const Matrix& x, Mode mode, Rng& rng) const {
  Var h = tape.constant(x);
  for (const HiddenBlock& block : hidden) h = block.forward(tape, h, mode, rng);
  return head.forward(tape, h);
}

GcnStack GcnStack::create(ParameterSet& params, const CorrelationMatrix& corr,
                          bool final_activation, Rng& rng) {
  const std::size_t c = corr.a_prime.rows();
  if (c == 0 || corr.a_prime.cols() != c)
    throw DimensionError("correlation matrix must be square, got " + corr.a_prime.shape_string());
  GcnStack gcn;
  gcn.layer1_w1 = &params.add("gcn.layer1.w1", glorot_uniform(c, kGcnHidden1, rng));
  gcn.layer1_w2 = &params.add("gcn.layer1.w2", glorot_uniform(kGcnHidden1, kGcnOut1, rng));
  gcn.layer2_w1 = &params.add("gcn.layer2.w1", glorot_uniform(kGcnOut1, kGcnHidden2, rng));
  gcn.layer2_w2 = &params.add("gcn.layer2.w2", glorot_uniform(kGcnHidden2, kEmbedWidth, rng));
  gcn.correlation = &params.add("gcn.correlation", corr.a_prime, false);
  gcn.final_activation = final_activation;
  return gcn;
}

GcnStack GcnStack::bind(ParameterSet& params, bool final_activation) {
  auto require = [&params](const std::string& name) {
    Parameter* p = params.find(name);
    if (p == nullptr) throw FormatError("missing parameter " + name);
    return p;
  };
  GcnStack gcn;
  gcn.layer1_w1 = require("gcn.layer1.w1");
  gcn.layer1_w2 = require("gcn.layer1.w2");
  gcn.layer2_w1 = require("gcn.layer2.w1");
  gcn.layer2_w2 = require("gcn.layer2.w2");
  gcn.correlation = require("gcn.correlation");
  gcn.final_activation = final_activation;
  return gcn;
}

Var GcnStack::forward(Tape& tape) const {
  const std::size_t c = num_nodes();
  if (layer1_w1->value.rows() != c)
    throw DimensionError("gcn: " + std::to_string(c) + " nodes vs first weight " +
                         layer1_w1->value.shape_string());
  Var a = tape.constant(correlation->value);
  Var z = tape.constant(Matrix::identity(c));
  z = matmul(matmul(z, tape.parameter(*layer1_w1)), tape.parameter(*layer1_w2));
  z = leaky_relu(matmul(a, z));
  z = matmul(matmul(z, tape.parameter(*layer2_w1)), tape.parameter(*layer2_w2));
  z = matmul(a, z);
  return final_activation ? leaky_relu(z) : z;
}

Var similarity_logits(Var audio_embed, Var label_embeddings) {
  if (audio_embed.cols() != label_embeddings.cols())
    throw DimensionError("similarity: audio embedding " + audio_embed.value().shape_string() +
                         " vs label embeddings " + label_embeddings.value().shape_string());
  return matmul_nt(audio_embed, label_embeddings);
}

void validate(const LossWeights& w) {
  if (w.sub < 0 || w.super < 0 || w.embed < 0)
    throw ParameterError("loss weights must be non-negative");
  if (w.sub == 0 && w.super == 0 && w.embed == 0)
    throw ParameterError("at least one loss weight must be positive");
}

Var composite_loss(const LossWeights& weights, std::span<const BranchOutput> branches,
                   std::span<const Matrix> sub_targets, std::span<const Matrix> super_targets,
                   std::optional<Var> embedding_loss) {
  if (branches.empty()) throw DimensionError("composite loss needs at least one branch");
  if (sub_targets.size() != branches.size() || super_targets.size() != branches.size())
    throw DimensionError("composite loss: one target set per branch");
  Tape& tape = *branches.front().sub_probs.tape();
  std::optional<Var> total;
  auto accumulate = [&total](Var term) { total = total ? add(*total, term) : term; };
  for (std::size_t b = 0; b < branches.size(); ++b) {
    if (weights.sub != 0.0)
      accumulate(scale(bce_loss(branches[b].sub_probs, sub_targets[b]), weights.sub));
    if (weights.super != 0.0)
      accumulate(scale(bce_loss(branches[b].super_probs, super_targets[b]), weights.super));
  }
  if (embedding_loss && weights.embed != 0.0) accumulate(scale(*embedding_loss, weights.embed));
  return total ? *total : tape.constant(Matrix(1, 1, 0.0));
}

Model Model::create(const ModelSpec& spec, const Ontology& ontology,
                    const std::optional<CorrelationMatrix>& corr, Rng& init_rng) {
  Model m;
  m.spec_ = spec;
  m.num_sub_ = ontology.num_sub();
  m.num_super_ = ontology.num_super();
  std::size_t head = 0;
  switch (spec.kind) {
    case ModelKind::kMlp: head = m.num_sub_ + m.num_super_; break;
    case ModelKind::kSiameseOnto: head = m.num_sub_; break;
    case ModelKind::kSiameseGcn:
    case ModelKind::kMlpGcn: head = kEmbedWidth; break;
  }
  m.trunk_ = MlpTrunk::create(m.params_, spec.input_dim, head, spec.dropout, init_rng);
  if (uses_gcn(spec.kind)) {
    if (!corr) throw ConfigError(std::string(to_string(spec.kind)) + " needs a correlation matrix");
    if (corr->a_prime.rows() != ontology.num_nodes())
      throw DimensionError("correlation has " + std::to_string(corr->a_prime.rows()) +
                           " nodes, ontology " + std::to_string(ontology.num_nodes()));
    m.gcn_ = GcnStack::create(m.params_, *corr, spec.gcn_final_activation, init_rng);
  }
  m.wire(ontology);
  return m;
}

Model Model::restore(const ModelSpec& spec, const Ontology& ontology, ParameterSet params) {
  Model m;
  m.spec_ = spec;
  m.num_sub_ = ontology.num_sub();
  m.num_super_ = ontology.num_super();
  m.params_ = std::move(params);
  m.trunk_ = MlpTrunk::bind(m.params_, spec.dropout);
  if (uses_gcn(spec.kind)) m.gcn_ = GcnStack::bind(m.params_, spec.gcn_final_activation);
  m.wire(ontology);

  std::size_t head = spec.kind == ModelKind::kMlp           ? m.num_sub_ + m.num_super_
                     : spec.kind == ModelKind::kSiameseOnto ? m.num_sub_
                                                            : kEmbedWidth;
  if (m.trunk_.head.out_features() != head || m.trunk_.hidden.front().linear.in_features() != spec.input_dim)
    throw ConfigError("checkpoint shapes do not match the model and ontology");
  if (m.gcn_ && m.gcn_->num_nodes() != ontology.num_nodes())
    throw ConfigError("checkpoint label graph does not match the ontology");
  return m;
}

void Model::wire(const Ontology& ontology) {
  if (spec_.kind == ModelKind::kSiameseOnto) onto_ = build_onto_layer(ontology);
}

std::optional<Var> Model::label_embeddings(Tape& tape) const {
  if (!gcn_) return std::nullopt;
  return gcn_->forward(tape);
}

BranchOutput Model::branch(Tape& tape, const Matrix& x, Mode mode, Rng& rng,
                           std::optional<Var> labels) const {
  if (x.cols() != spec_.input_dim)
    throw DimensionError("model expects " + std::to_string(spec_.input_dim) +
                         " input features, got " + x.shape_string());
  Var z = trunk_.forward(tape, x, mode, rng);
  switch (spec_.kind) {
    case ModelKind::kMlp: {
      Var probs = sigmoid(z);
      return {z, column_block(probs, 0, num_sub_), column_block(probs, num_sub_, num_super_)};
    }
    case ModelKind::kSiameseOnto: {
      Var sub = sigmoid(z);
      return {z, sub, apply_onto_layer(*onto_, sub)};
    }
    case ModelKind::kSiameseGcn:
    case ModelKind::kMlpGcn: {
      if (!labels) labels = label_embeddings(tape);
      Var logits = similarity_logits(z, *labels);
      Var probs = spec_.head_activation == HeadActivation::kSigmoid ? sigmoid(logits)
                                                                    : softmax_rows(logits);
      return {z, column_block(probs, 0, num_sub_), column_block(probs, num_sub_, num_super_)};
    }
  }
  throw ConfigError("unhandled model kind");
}

Var Model::loss(Tape& tape, const Matrix& x, const Matrix& sub_targets,
                const Matrix& super_targets, const LossWeights& weights, Mode mode,
                Rng& rng) const {
  if (is_siamese(spec_.kind))
    throw ConfigError(std::string(to_string(spec_.kind)) + " trains on pairs");
  const BranchOutput out = branch(tape, x, mode, rng);
  const Matrix subs[] = {sub_targets};
  const Matrix supers[] = {super_targets};
  return composite_loss(weights, std::span(&out, 1), subs, supers);
}

Var Model::pair_loss(Tape& tape, const Matrix& x_left, const Matrix& x_right,
                     std::span<const Matrix> sub_targets, std::span<const Matrix> super_targets,
                     std::span<const double> distances, const LossWeights& weights, Mode mode,
                     Rng& rng) const {
  if (!is_siamese(spec_.kind))
    throw ConfigError(std::string(to_string(spec_.kind)) + " does not train on pairs");
  const auto labels = label_embeddings(tape);
  const BranchOutput outs[] = {branch(tape, x_left, mode, rng, labels),
                               branch(tape, x_right, mode, rng, labels)};
  const Var dw = contrastive_loss(outs[0].z, outs[1].z, distances);
  return composite_loss(weights, outs, sub_targets, super_targets, dw);
}

Predictions Model::predict(const Matrix& x) const {
  Tape tape;
  Rng unused(0);
  const BranchOutput out = branch(tape, x, Mode::kEval, unused);
  return {out.sub_probs.value(), out.super_probs.value()};
}

}  // namespace ontoweak
