#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ontoweak/matrix.hpp"
#include "ontoweak/tape.hpp"

namespace ontoweak {

struct Label {
  std::string id;
  std::string name;
};

/// Two-level label hierarchy. Subclasses are level 1, superclasses level 2.
/// In the combined label graph, node i < num_sub() is subclass i and node
/// num_sub() + j is superclass j.
class Ontology {
 public:
  /// Validates dense parent indices and per-level unique names and ids.
  /// Superclasses without children are allowed here; build_onto_layer
  /// rejects them.
  static Ontology from_parents(std::vector<Label> superclasses, std::vector<Label> subclasses,
                               std::vector<std::size_t> parent_of);

  /// JSON array of {"id", "name", "child_ids"} records. Roots are
  /// superclasses and their children subclasses; extra fields are ignored.
  static Ontology parse_json(std::string_view text);
  static Ontology load(const std::filesystem::path& path);
  std::string to_json() const;

  std::size_t num_sub() const { return subclasses_.size(); }
  std::size_t num_super() const { return superclasses_.size(); }
  std::size_t num_nodes() const { return num_sub() + num_super(); }

  const std::vector<Label>& subclasses() const { return subclasses_; }
  const std::vector<Label>& superclasses() const { return superclasses_; }
  std::size_t parent_of(std::size_t sub) const { return parent_of_.at(sub); }
  const std::vector<std::size_t>& parents() const { return parent_of_; }
  std::vector<std::size_t> children(std::size_t super) const;

  std::optional<std::size_t> find_sub(std::string_view id) const;
  std::optional<std::size_t> find_super(std::string_view id) const;
  std::size_t super_node(std::size_t super) const { return num_sub() + super; }

 private:
  std::vector<Label> subclasses_;
  std::vector<Label> superclasses_;
  std::vector<std::size_t> parent_of_;
};

/// Fixed T2 x T1 averaging matrix: row i holds 1/|children(i)| at each child.
struct OntoLayer {
  Matrix m;
};

OntoLayer build_onto_layer(const Ontology& ontology);
/// Batch form of p2 = M p1: each row of `sub_probs` maps to one row of output.
Matrix apply_onto_layer(const OntoLayer& layer, const Matrix& sub_probs);
Var apply_onto_layer(const OntoLayer& layer, Var sub_probs);

enum class CorrMethod { kCooccurrence, kSameParent, kParentChild };

std::string_view to_string(CorrMethod method);
CorrMethod parse_corr_method(std::string_view text);

/// counts(i, j) = #sets holding both i and j for i != j; counts(i, i) = #sets holding i.
Matrix count_cooccurrence(std::span<const std::vector<std::size_t>> label_sets, std::size_t c);
/// P(j | i) = counts(i, j) / counts(i, i), zero rows where i never occurs.
Matrix conditional_probability(const Matrix& counts);
/// A(i, j) = 1 iff i != j and P(j | i) >= t.
Matrix build_cooccurrence_corr(const Matrix& counts, double t);
/// Sibling subclasses over the combined node set.
Matrix build_same_parent_corr(const Ontology& ontology);
/// Parent-child edges, both directions, over the combined node set.
Matrix build_parent_child_corr(const Ontology& ontology);

struct CorrelationMatrix {
  Matrix a_prime;
  CorrMethod method = CorrMethod::kCooccurrence;
  double t = 0.0;
  double p = 1.0;
};

/// Row i with n_i neighbours: diagonal p, each neighbour (1 - p) / n_i.
/// Rows without neighbours keep only the self loop with weight 1.
CorrelationMatrix reweight_corr(const Matrix& binary, double p,
                                CorrMethod method = CorrMethod::kCooccurrence, double t = 0.0);

/// Header line "C t p method", then one space-separated row per line.
void write_correlation(std::ostream& out, const CorrelationMatrix& corr);
CorrelationMatrix read_correlation(std::istream& in);

}  // namespace ontoweak
