#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ontoweak/tape.hpp"

namespace ontoweak {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Entries below this magnitude in both gradients are compared absolutely;
  /// central differences cannot resolve them relatively.
  double magnitude_floor = 1e-5;
  /// An entry that disagrees is re-measured this many times, each with a
  /// step ten times smaller, keeping the best match. A perturbation that
  /// straddles a ReLU kink corrupts the difference quotient, not the gradient.
  std::size_t refinements = 1;
  /// 0 checks every entry; otherwise a seeded sample of this many per parameter.
  std::size_t max_entries_per_param = 0;
  std::uint64_t seed = 7;
};

struct ParamCheck {
  std::string name;
  std::size_t entries_checked = 0;
  double max_rel_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  double max_rel_error = 0.0;
  bool passed = true;
};

/// Builds a scalar loss on a fresh tape. Must be deterministic.
using LossClosure = std::function<Var(Tape&)>;

/// Compares tape gradients with central finite differences.
GradCheckReport grad_check(const LossClosure& loss, std::span<Parameter* const> params,
                           const GradCheckOptions& options = {});

/// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor);

}  // namespace ontoweak
