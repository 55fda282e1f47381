#include "ontoweak/toy.hpp"

#include "ontoweak/random.hpp"

namespace ontoweak {

Ontology toy_ontology() {
  return Ontology::from_parents({{"S1", "super one"}, {"S2", "super two"}},
                                {{"a", "alpha"}, {"b", "beta"}, {"c", "gamma"}}, {0, 0, 1});
}

Var ToyProblem::loss(Tape& tape) const {
  Rng rng(0);
  if (is_siamese(model.spec().kind)) {
    return model.pair_loss(tape, x_left, x_right, sub_targets, super_targets, distances, weights,
                           Mode::kTrain, rng);
  }
  return model.loss(tape, x_left, sub_targets[0], super_targets[0], weights, Mode::kTrain, rng);
}

ToyProblem make_toy_problem(ModelKind kind, std::uint64_t seed) {
  const Ontology ont = toy_ontology();
  Rng rng(seed);

  ModelSpec spec;
  spec.kind = kind;
  spec.input_dim = kToyInputDim;
  spec.dropout = 0.0;
  std::optional<CorrelationMatrix> corr;
  if (uses_gcn(kind)) corr = reweight_corr(build_parent_child_corr(ont), 0.5, CorrMethod::kParentChild);
  Model model = Model::create(spec, ont, corr, rng);

  auto features = [&rng] {
    Matrix x(kToyBatch, kToyInputDim);
    for (double& v : x.data()) v = normal(rng);
    return x;
  };
  // Rows: {a}, {b, c}, {c}, {a, b}
  const Matrix sub = Matrix::from_rows({{1, 0, 0}, {0, 1, 1}, {0, 0, 1}, {1, 1, 0}});
  const Matrix super = Matrix::from_rows({{1, 0}, {1, 1}, {0, 1}, {1, 0}});
  // Right branch pairs: {a} with {a}, {b,c} with {a}, {c} with {a,b}, {a,b} with {c}
  const Matrix sub_r = Matrix::from_rows({{1, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 0, 1}});
  const Matrix super_r = Matrix::from_rows({{1, 0}, {1, 0}, {1, 0}, {0, 1}});

  ToyProblem toy{std::move(model), features(), features(), {sub, sub_r}, {super, super_r},
                 {0.0, 1.0, 2.0, 2.0}, {1.5, 1.0, 0.25}};
  if (!is_siamese(kind)) toy.weights.embed = 0.0;
  return toy;
}

GradCheckReport gradcheck_kind(ModelKind kind, const GradCheckOptions& options) {
  ToyProblem toy = make_toy_problem(kind);
  const auto params = toy.model.params().trainable();
  return grad_check([&toy](Tape& tape) { return toy.loss(tape); }, params, options);
}

}  // namespace ontoweak
