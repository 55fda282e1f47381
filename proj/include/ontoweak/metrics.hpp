#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ontoweak/matrix.hpp"
#include "ontoweak/ontology.hpp"

namespace ontoweak {

/// Mean of precision@k over the ranks k of the positives, ranking by
/// descending score with ties kept in input order. nullopt without positives.
std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const int> labels);

/// Probability that a random positive outscores a random negative, ties
/// counting one half. nullopt unless both classes are present.
std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Normalized class weights from training counts, with zero weight for the
/// classes whose metric is undefined. All zero if nothing is defined.
std::vector<double> level_weights(std::span<const std::optional<double>> per_class,
                                  std::span<const std::size_t> train_counts);

/// sum_i w_i m_i over the defined classes; nullopt if none is defined or
/// none of the defined classes occurs in training.
std::optional<double> weighted_level_metric(std::span<const std::optional<double>> per_class,
                                            std::span<const std::size_t> train_counts);

struct LevelReport {
  std::vector<Label> classes;
  std::vector<std::optional<double>> ap;
  std::vector<std::optional<double>> auc;
  /// Weights behind weighted_ap; classes without positives get 0.
  std::vector<double> weights;
  std::optional<double> weighted_ap;
  std::optional<double> weighted_auc;
};

struct EvalReport {
  std::string model;
  LevelReport sub;
  LevelReport super;
  std::size_t instances = 0;
};

/// Scores and binary targets are instances x classes for each level.
EvalReport evaluate_predictions(const std::string& model, const Ontology& ontology,
                                const Matrix& sub_scores, const Matrix& sub_targets,
                                const Matrix& super_scores, const Matrix& super_targets,
                                std::span<const std::size_t> train_sub_counts,
                                std::span<const std::size_t> train_super_counts);

/// JSON document: one row per (level, class) with model, level, class_id,
/// class_name, ap, auc, weight; and a summary with the four headline numbers.
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
/// Fixed-width text table for terminals.
std::string report_to_table(const EvalReport& report);

}  // namespace ontoweak
