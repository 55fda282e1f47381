#include "ontoweak/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ontoweak/random.hpp"

namespace ontoweak {

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport grad_check(const LossClosure& loss, std::span<Parameter* const> params,
                           const GradCheckOptions& options) {
  for (Parameter* p : params) {
    p->grad = Matrix(p->value.rows(), p->value.cols());
  }
  {
    Tape tape;
    Var l = loss(tape);
    tape.backward(l);
  }

  auto evaluate = [&loss] {
    Tape tape;
    return loss(tape).scalar();
  };

  Rng rng(options.seed);
  GradCheckReport report;
  for (Parameter* p : params) {
    ParamCheck check;
    check.name = p->name;
    const Matrix analytic = p->grad;

    std::vector<std::size_t> entries(p->value.size());
    std::iota(entries.begin(), entries.end(), std::size_t{0});
    if (options.max_entries_per_param != 0 && entries.size() > options.max_entries_per_param) {
      shuffle(entries.begin(), entries.end(), rng);
      entries.resize(options.max_entries_per_param);
      std::sort(entries.begin(), entries.end());
    }

    for (std::size_t idx : entries) {
      double& w = p->value.data()[idx];
      const double saved = w;
      auto central = [&](double h) {
        w = saved + h;
        const double plus = evaluate();
        w = saved - h;
        const double minus = evaluate();
        w = saved;
        return (plus - minus) / (2.0 * h);
      };
      const double a = analytic.data()[idx];
      double h = options.step;
      double err = relative_error(a, central(h), options.magnitude_floor);
      for (std::size_t r = 0; r < options.refinements && err > options.tolerance; ++r) {
        h /= 10.0;
        err = std::min(err, relative_error(a, central(h), options.magnitude_floor));
      }
      check.max_rel_error = std::max(check.max_rel_error, err);
      ++check.entries_checked;
    }
    check.passed = check.max_rel_error <= options.tolerance;
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.passed = report.passed && check.passed;
    report.params.push_back(std::move(check));
  }
  return report;
}

}  // namespace ontoweak
