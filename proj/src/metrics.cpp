#include "ontoweak/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ontoweak/errors.hpp"

namespace ontoweak {

using nlohmann::json;

namespace {

void check_lengths(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw DimensionError("scores and labels differ in length: " + std::to_string(scores.size()) +
                         " vs " + std::to_string(labels.size()));
}

std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> number_or_null(const json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

LevelReport level_report(const std::vector<Label>& classes, const Matrix& scores,
                         const Matrix& targets, std::span<const std::size_t> train_counts) {
  if (!scores.same_shape(targets) || scores.cols() != classes.size() ||
      train_counts.size() != classes.size())
    throw DimensionError("evaluation scores " + scores.shape_string() + " vs targets " +
                         targets.shape_string());
  LevelReport level;
  level.classes = classes;
  std::vector<double> col(scores.rows());
  std::vector<int> lab(scores.rows());
  for (std::size_t c = 0; c < scores.cols(); ++c) {
    for (std::size_t r = 0; r < scores.rows(); ++r) {
      col[r] = scores(r, c);
      lab[r] = targets(r, c) > 0.5 ? 1 : 0;
    }
    level.ap.push_back(average_precision(col, lab));
    level.auc.push_back(roc_auc(col, lab));
  }
  level.weights = level_weights(level.ap, train_counts);
  level.weighted_ap = weighted_level_metric(level.ap, train_counts);
  level.weighted_auc = weighted_level_metric(level.auc, train_counts);
  return level;
}

}  // namespace

std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const int> labels) {
  check_lengths(scores, labels);
  const auto order = descending_order(scores);
  double hits = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] == 0) continue;
    hits += 1.0;
    total += hits / static_cast<double>(k + 1);
  }
  if (hits == 0.0) return std::nullopt;
  return total / hits;
}

std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney U from midranks of tied groups.
  double positives = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 0) continue;
      positives += 1.0;
      rank_sum += midrank;
    }
    i = j;
  }
  const double negatives = static_cast<double>(scores.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) return std::nullopt;
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

std::vector<double> level_weights(std::span<const std::optional<double>> per_class,
                                  std::span<const std::size_t> train_counts) {
  if (per_class.size() != train_counts.size())
    throw DimensionError("per-class metrics and counts differ in length");
  std::vector<double> w(per_class.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (per_class[i]) total += w[i] = static_cast<double>(train_counts[i]);
  if (total == 0.0) return std::vector<double>(per_class.size(), 0.0);
  for (double& v : w) v /= total;
  return w;
}

std::optional<double> weighted_level_metric(std::span<const std::optional<double>> per_class,
                                            std::span<const std::size_t> train_counts) {
  const auto w = level_weights(per_class, train_counts);
  double sum = 0.0;
  double weight = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!per_class[i] || w[i] == 0.0) continue;
    sum += w[i] * *per_class[i];
    weight += w[i];
  }
  if (weight == 0.0) return std::nullopt;
  return sum;
}

EvalReport evaluate_predictions(const std::string& model, const Ontology& ontology,
                                const Matrix& sub_scores, const Matrix& sub_targets,
                                const Matrix& super_scores, const Matrix& super_targets,
                                std::span<const std::size_t> train_sub_counts,
                                std::span<const std::size_t> train_super_counts) {
  EvalReport report;
  report.model = model;
  report.instances = sub_scores.rows();
  report.sub = level_report(ontology.subclasses(), sub_scores, sub_targets, train_sub_counts);
  report.super =
      level_report(ontology.superclasses(), super_scores, super_targets, train_super_counts);
  return report;
}

std::string report_to_json(const EvalReport& report) {
  json rows = json::array();
  for (const auto& [name, level] :
       {std::pair<const char*, const LevelReport*>{"sub", &report.sub}, {"super", &report.super}}) {
    for (std::size_t c = 0; c < level->classes.size(); ++c) {
      rows.push_back({{"model", report.model},
                      {"level", name},
                      {"class_id", level->classes[c].id},
                      {"class_name", level->classes[c].name},
                      {"ap", optional_number(level->ap[c])},
                      {"auc", optional_number(level->auc[c])},
                      {"weight", level->weights[c]}});
    }
  }
  json doc = {
      {"model", report.model},
      {"instances", report.instances},
      {"classes", rows},
      {"summary",
       {{"sub_ap", optional_number(report.sub.weighted_ap)},
        {"super_ap", optional_number(report.super.weighted_ap)},
        {"sub_auc", optional_number(report.sub.weighted_auc)},
        {"super_auc", optional_number(report.super.weighted_auc)}}},
  };
  return doc.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("report is not valid JSON: ") + e.what());
  }
  EvalReport report;
  report.model = doc.at("model").get<std::string>();
  report.instances = doc.at("instances").get<std::size_t>();
  for (const auto& row : doc.at("classes")) {
    LevelReport& level = row.at("level") == "sub" ? report.sub : report.super;
    level.classes.push_back({row.at("class_id").get<std::string>(),
                             row.at("class_name").get<std::string>()});
    level.ap.push_back(number_or_null(row.at("ap")));
    level.auc.push_back(number_or_null(row.at("auc")));
    level.weights.push_back(row.at("weight").get<double>());
  }
  const auto& s = doc.at("summary");
  report.sub.weighted_ap = number_or_null(s.at("sub_ap"));
  report.super.weighted_ap = number_or_null(s.at("super_ap"));
  report.sub.weighted_auc = number_or_null(s.at("sub_auc"));
  report.super.weighted_auc = number_or_null(s.at("super_auc"));
  return report;
}

std::string report_to_table(const EvalReport& report) {
  auto cell = [](const std::optional<double>& v) {
    char buf[32];
    if (!v) return std::string("     n/a");
    std::snprintf(buf, sizeof buf, "%8.4f", *v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << "model " << report.model << ", " << report.instances << " instances\n";
  for (const auto& [name, level] :
       {std::pair<const char*, const LevelReport*>{"sub", &report.sub}, {"super", &report.super}}) {
    out << "\n" << name << "-level classes\n";
    out << "  class                              ap      auc   weight\n";
    for (std::size_t c = 0; c < level->classes.size(); ++c) {
      char label[40];
      std::snprintf(label, sizeof label, "%-30.30s", level->classes[c].name.c_str());
      char weight[16];
      std::snprintf(weight, sizeof weight, "%8.4f", level->weights[c]);
      out << "  " << label << ' ' << cell(level->ap[c]) << ' ' << cell(level->auc[c]) << ' '
          << weight << '\n';
    }
  }
  out << "\nsummary   sub mAP  super mAP   sub AUC  super AUC\n";
  out << "        " << cell(report.sub.weighted_ap) << "   " << cell(report.super.weighted_ap)
      << "  " << cell(report.sub.weighted_auc) << "   " << cell(report.super.weighted_auc)
      << '\n';
  return out.str();
}

}  // namespace ontoweak
