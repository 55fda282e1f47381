#include "ontoweak/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ontoweak/errors.hpp"
#include "ontoweak/ops.hpp"
#include "ontoweak/text.hpp"

namespace ontoweak {

using nlohmann::json;

Ontology Ontology::from_parents(std::vector<Label> superclasses, std::vector<Label> subclasses,
                                std::vector<std::size_t> parent_of) {
  if (superclasses.empty() || subclasses.empty())
    throw SchemaError("ontology needs at least one superclass and one subclass");
  if (parent_of.size() != subclasses.size())
    throw SchemaError("every subclass needs exactly one parent");
  for (std::size_t i = 0; i < parent_of.size(); ++i)
    if (parent_of[i] >= superclasses.size())
      throw SchemaError("subclass " + subclasses[i].id + " has unknown parent index " +
                        std::to_string(parent_of[i]));

  std::set<std::string> ids;
  for (const auto* level : {&superclasses, &subclasses}) {
    std::set<std::string> names;
    for (const Label& l : *level) {
      if (!ids.insert(l.id).second) throw SchemaError("duplicate id " + l.id);
      if (!names.insert(l.name).second) throw SchemaError("duplicate name " + l.name);
    }
  }

  Ontology o;
  o.superclasses_ = std::move(superclasses);
  o.subclasses_ = std::move(subclasses);
  o.parent_of_ = std::move(parent_of);
  return o;
}

Ontology Ontology::parse_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("ontology is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw FormatError("ontology must be a JSON array of records");

  struct Record {
    std::string id;
    std::string name;
    std::vector<std::string> child_ids;
  };
  std::vector<Record> records;
  std::map<std::string, std::size_t> index;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("id") || !item["id"].is_string())
      throw FormatError("ontology record without a string id");
    Record r;
    r.id = item["id"].get<std::string>();
    r.name = item.value("name", r.id);
    if (item.contains("child_ids")) {
      if (!item["child_ids"].is_array()) throw FormatError("child_ids of " + r.id + " not a list");
      for (const auto& c : item["child_ids"]) r.child_ids.push_back(c.get<std::string>());
    }
    if (!index.emplace(r.id, records.size()).second) throw SchemaError("duplicate id " + r.id);
    records.push_back(std::move(r));
  }

  std::vector<std::optional<std::size_t>> parent(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& child : records[i].child_ids) {
      auto it = index.find(child);
      if (it == index.end())
        throw SchemaError("record " + records[i].id + " lists unknown child id " + child);
      if (parent[it->second])
        throw SchemaError("record " + child + " has more than one parent");
      parent[it->second] = i;
    }
  }

  std::vector<Label> supers;
  std::vector<std::size_t> super_of_record(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (parent[i]) continue;
    if (records[i].child_ids.empty())
      throw SchemaError("orphan record " + records[i].id + " has no parent and no children");
    super_of_record[i] = supers.size();
    supers.push_back({records[i].id, records[i].name});
  }

  std::vector<Label> subs;
  std::vector<std::size_t> parent_of;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!parent[i]) continue;
    if (!records[i].child_ids.empty())
      throw SchemaError("depth > 2: record " + records[i].id + " under " +
                        records[*parent[i]].id + " has children");
    subs.push_back({records[i].id, records[i].name});
    parent_of.push_back(super_of_record[*parent[i]]);
  }
  return from_parents(std::move(supers), std::move(subs), std::move(parent_of));
}

Ontology Ontology::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ontology " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str());
}

std::string Ontology::to_json() const {
  json doc = json::array();
  for (std::size_t j = 0; j < num_super(); ++j) {
    json children = json::array();
    for (std::size_t c : this->children(j)) children.push_back(subclasses_[c].id);
    doc.push_back({{"id", superclasses_[j].id},
                   {"name", superclasses_[j].name},
                   {"child_ids", children}});
  }
  for (const Label& s : subclasses_)
    doc.push_back({{"id", s.id}, {"name", s.name}, {"child_ids", json::array()}});
  return doc.dump(2) + "\n";
}

std::vector<std::size_t> Ontology::children(std::size_t super) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < parent_of_.size(); ++i)
    if (parent_of_[i] == super) out.push_back(i);
  return out;
}

std::optional<std::size_t> Ontology::find_sub(std::string_view id) const {
  for (std::size_t i = 0; i < subclasses_.size(); ++i)
    if (subclasses_[i].id == id) return i;
  return std::nullopt;
}

std::optional<std::size_t> Ontology::find_super(std::string_view id) const {
  for (std::size_t i = 0; i < superclasses_.size(); ++i)
    if (superclasses_[i].id == id) return i;
  return std::nullopt;
}

OntoLayer build_onto_layer(const Ontology& ontology) {
  OntoLayer layer{Matrix(ontology.num_super(), ontology.num_sub())};
  for (std::size_t j = 0; j < ontology.num_super(); ++j) {
    const auto kids = ontology.children(j);
    if (kids.empty())
      throw SchemaError("superclass " + ontology.superclasses()[j].id + " has no children");
    for (std::size_t c : kids) layer.m(j, c) = 1.0 / static_cast<double>(kids.size());
  }
  return layer;
}

Matrix apply_onto_layer(const OntoLayer& layer, const Matrix& sub_probs) {
  if (sub_probs.cols() != layer.m.cols())
    throw DimensionError("onto layer expects " + std::to_string(layer.m.cols()) +
                         " subclass columns, got " + sub_probs.shape_string());
  return matmul_nt(sub_probs, layer.m);
}

Var apply_onto_layer(const OntoLayer& layer, Var sub_probs) {
  if (sub_probs.cols() != layer.m.cols())
    throw DimensionError("onto layer expects " + std::to_string(layer.m.cols()) +
                         " subclass columns, got " + sub_probs.value().shape_string());
  // The layer enters as a constant: it never receives gradient.
  Var m = sub_probs.tape()->constant(layer.m);
  return matmul_nt(sub_probs, m);
}

std::string_view to_string(CorrMethod method) {
  switch (method) {
    case CorrMethod::kCooccurrence: return "cooccurrence";
    case CorrMethod::kSameParent: return "same_parent";
    case CorrMethod::kParentChild: return "parent_child";
  }
  return "unknown";
}

CorrMethod parse_corr_method(std::string_view text) {
  if (text == "cooccurrence") return CorrMethod::kCooccurrence;
  if (text == "same_parent") return CorrMethod::kSameParent;
  if (text == "parent_child") return CorrMethod::kParentChild;
  throw ConfigError("unknown correlation method '" + std::string(text) + "'");
}

Matrix count_cooccurrence(std::span<const std::vector<std::size_t>> label_sets, std::size_t c) {
  Matrix counts(c, c);
  std::vector<std::size_t> uniq;
  for (const auto& set : label_sets) {
    uniq.assign(set.begin(), set.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (std::size_t i : uniq) {
      if (i >= c) throw DimensionError("label index " + std::to_string(i) + " >= " + std::to_string(c));
      for (std::size_t j : uniq) counts(i, j) += 1.0;
    }
  }
  return counts;
}

Matrix conditional_probability(const Matrix& counts) {
  if (counts.rows() != counts.cols()) throw DimensionError("counts not square: " + counts.shape_string());
  Matrix p(counts.rows(), counts.cols());
  for (std::size_t i = 0; i < counts.rows(); ++i) {
    const double occ = counts(i, i);
    if (occ <= 0.0) continue;
    for (std::size_t j = 0; j < counts.cols(); ++j) p(i, j) = counts(i, j) / occ;
  }
  return p;
}

Matrix build_cooccurrence_corr(const Matrix& counts, double t) {
  if (!(t > 0.0 && t < 1.0)) throw ParameterError("threshold t must be in (0, 1)");
  const Matrix p = conditional_probability(counts);
  Matrix a(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j < p.cols(); ++j)
      if (i != j && p(i, j) >= t) a(i, j) = 1.0;
  return a;
}

Matrix build_same_parent_corr(const Ontology& ontology) {
  const std::size_t n = ontology.num_nodes();
  Matrix a(n, n);
  for (std::size_t i = 0; i < ontology.num_sub(); ++i)
    for (std::size_t j = 0; j < ontology.num_sub(); ++j)
      if (i != j && ontology.parent_of(i) == ontology.parent_of(j)) a(i, j) = 1.0;
  return a;
}

Matrix build_parent_child_corr(const Ontology& ontology) {
  const std::size_t n = ontology.num_nodes();
  Matrix a(n, n);
  for (std::size_t i = 0; i < ontology.num_sub(); ++i) {
    const std::size_t parent = ontology.super_node(ontology.parent_of(i));
    a(i, parent) = 1.0;
    a(parent, i) = 1.0;
  }
  return a;
}

CorrelationMatrix reweight_corr(const Matrix& binary, double p, CorrMethod method, double t) {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("self weight p must be in (0, 1]");
  if (binary.rows() != binary.cols())
    throw DimensionError("adjacency not square: " + binary.shape_string());
  const std::size_t n = binary.rows();
  CorrelationMatrix out{Matrix(n, n), method, t, p};
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t neighbours = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && binary(i, j) != 0.0) ++neighbours;
    if (neighbours == 0 || p == 1.0) {
      out.a_prime(i, i) = 1.0;
      continue;
    }
    const double share = (1.0 - p) / static_cast<double>(neighbours);
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && binary(i, j) != 0.0) out.a_prime(i, j) = share;
    out.a_prime(i, i) = p;
  }
  return out;
}

void write_correlation(std::ostream& out, const CorrelationMatrix& corr) {
  out << corr.a_prime.rows() << ' ' << format_double(corr.t) << ' ' << format_double(corr.p)
      << ' ' << to_string(corr.method) << '\n';
  for (std::size_t r = 0; r < corr.a_prime.rows(); ++r) {
    for (std::size_t c = 0; c < corr.a_prime.cols(); ++c) {
      if (c != 0) out << ' ';
      out << format_double(corr.a_prime(r, c));
    }
    out << '\n';
  }
}

CorrelationMatrix read_correlation(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty correlation file");
  const auto header = split(trim(line), ' ');
  if (header.size() != 4) throw FormatError("correlation header must be 'C t p method'");
  const auto n = static_cast<std::size_t>(parse_int(header[0], "C"));
  CorrelationMatrix corr{Matrix(n, n), parse_corr_method(header[3]),
                         parse_double(header[1], "t"), parse_double(header[2], "p")};
  for (std::size_t r = 0; r < n; ++r) {
    if (!std::getline(in, line)) throw FormatError("correlation file truncated at row " + std::to_string(r));
    const auto cells = split(trim(line), ' ');
    if (cells.size() != n) throw FormatError("correlation row " + std::to_string(r) + " has wrong width");
    for (std::size_t c = 0; c < n; ++c) corr.a_prime(r, c) = parse_double(cells[c], "entry");
  }
  return corr;
}

}  // namespace ontoweak
