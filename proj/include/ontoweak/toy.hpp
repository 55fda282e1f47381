#pragma once

#include "ontoweak/gradcheck.hpp"
#include "ontoweak/models.hpp"

namespace ontoweak {

/// Three subclasses under two superclasses: S1 = {a, b}, S2 = {c}.
Ontology toy_ontology();

/// A model of `kind` on the toy ontology with dropout off, plus a fixed
/// four-row batch (two batches for the Siamese kinds).
struct ToyProblem {
  Model model;
  Matrix x_left;
  Matrix x_right;
  Matrix sub_targets[2];
  Matrix super_targets[2];
  std::vector<double> distances;
  LossWeights weights;

  /// Composite loss in train mode on a fresh tape.
  Var loss(Tape& tape) const;
};

inline constexpr std::size_t kToyInputDim = 6;
inline constexpr std::size_t kToyBatch = 4;

ToyProblem make_toy_problem(ModelKind kind, std::uint64_t seed = 11);

/// Entries sampled per parameter when the caller does not say otherwise.
inline constexpr std::size_t kToyEntriesPerParam = 24;

GradCheckReport gradcheck_kind(ModelKind kind, const GradCheckOptions& options);

}  // namespace ontoweak
