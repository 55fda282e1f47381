#include "ontoweak/adam.hpp"

#include <cmath>

#include "ontoweak/errors.hpp"

namespace ontoweak {

void Adam::step(std::span<Parameter* const> params) {
  for (const Parameter* p : params) {
    if (!p->grad.same_shape(p->value))
      throw TrainingError("gradient of " + p->name + " has shape " + p->grad.shape_string() +
                          ", value " + p->value.shape_string());
    if (!all_finite(p->grad)) throw TrainingError("non-finite gradient in " + p->name);
  }

  ++step_;
  const double t = static_cast<double>(step_);
  const double bias1 = 1.0 - std::pow(options_.beta1, t);
  const double bias2 = 1.0 - std::pow(options_.beta2, t);
  const double lr = options_.learning_rate;
  const double decay = lr * options_.weight_decay;

  for (Parameter* p : params) {
    auto [it, inserted] = moments_.try_emplace(p);
    Moments& mom = it->second;
    if (inserted) {
      mom.m = Matrix(p->value.rows(), p->value.cols());
      mom.v = Matrix(p->value.rows(), p->value.cols());
    }
    auto w = p->value.data();
    auto g = p->grad.data();
    auto m = mom.m.data();
    auto v = mom.v.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (decay != 0.0) w[i] -= decay * w[i];
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * g[i];
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

const Matrix* Adam::first_moment(const Parameter& p) const {
  auto it = moments_.find(&p);
  return it == moments_.end() ? nullptr : &it->second.m;
}

const Matrix* Adam::second_moment(const Parameter& p) const {
  auto it = moments_.find(&p);
  return it == moments_.end() ? nullptr : &it->second.v;
}

}  // namespace ontoweak
