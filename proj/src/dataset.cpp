#include "ontoweak/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ontoweak/errors.hpp"
#include "ontoweak/text.hpp"

namespace ontoweak {

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw FormatError("features header truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

bool intersects(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  // Both sorted.
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i; else ++j;
  }
  return false;
}

std::vector<std::size_t> sorted_unique(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::vector<std::size_t> expand_super_labels(std::span<const std::size_t> sub_labels,
                                             const Ontology& ontology) {
  std::vector<std::size_t> supers;
  for (std::size_t s : sub_labels) supers.push_back(ontology.parent_of(s));
  return sorted_unique(std::move(supers));
}

Instance make_instance(std::string clip_id, std::uint32_t frame, std::vector<double> features,
                       std::vector<std::size_t> sub_labels, const Ontology& ontology) {
  if (sub_labels.empty()) throw SchemaError("clip " + clip_id + " has no labels");
  for (std::size_t s : sub_labels)
    if (s >= ontology.num_sub())
      throw SchemaError("clip " + clip_id + " has subclass index " + std::to_string(s) +
                        " outside the ontology");
  Instance inst;
  inst.clip_id = std::move(clip_id);
  inst.frame = frame;
  inst.features = std::move(features);
  inst.sub_labels = sorted_unique(std::move(sub_labels));
  inst.super_labels = expand_super_labels(inst.sub_labels, ontology);
  return inst;
}

CorpusStats compute_stats(std::span<const Instance> instances, const Ontology& ontology) {
  CorpusStats stats;
  stats.sub_counts.assign(ontology.num_sub(), 0);
  stats.super_counts.assign(ontology.num_super(), 0);
  stats.instances = instances.size();
  for (const Instance& inst : instances) {
    for (std::size_t s : inst.sub_labels) ++stats.sub_counts.at(s);
    for (std::size_t s : inst.super_labels) ++stats.super_counts.at(s);
  }
  return stats;
}

std::filesystem::path default_index_path(const std::filesystem::path& features) {
  return features.string() + ".index";
}

Corpus load_corpus(const CorpusPaths& paths, const Ontology& ontology, std::size_t expected_dim) {
  // Labels: clip_id<TAB>id,id,...
  std::ifstream labels_in(paths.labels);
  if (!labels_in) throw IoError("cannot open labels " + paths.labels.string());
  std::map<std::string, std::vector<std::size_t>> clip_labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(labels_in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw FormatError("labels line " + std::to_string(line_no) + " has no tab");
    std::string clip(trim(std::string_view(line).substr(0, tab)));
    std::vector<std::size_t> subs;
    for (const auto& raw : split(std::string_view(line).substr(tab + 1), ',')) {
      const auto id = trim(raw);
      if (id.empty()) continue;
      auto idx = ontology.find_sub(id);
      if (!idx) throw SchemaError("clip " + clip + " has unknown label id " + std::string(id));
      subs.push_back(*idx);
    }
    if (subs.empty()) throw SchemaError("clip " + clip + " has no labels");
    if (!clip_labels.emplace(clip, std::move(subs)).second)
      throw SchemaError("clip " + clip + " listed twice in labels");
  }

  const auto index_path = paths.index.empty() ? default_index_path(paths.features) : paths.index;
  std::ifstream index_in(index_path);
  if (!index_in) throw IoError("cannot open index " + index_path.string());
  std::vector<std::pair<std::string, std::uint32_t>> rows;
  while (std::getline(index_in, line)) {
    if (trim(line).empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw FormatError("index line without comma: " + line);
    rows.emplace_back(std::string(trim(std::string_view(line).substr(0, comma))),
                      static_cast<std::uint32_t>(
                          parse_int(std::string_view(line).substr(comma + 1), "frame index")));
  }

  std::ifstream feat_in(paths.features, std::ios::binary);
  if (!feat_in) throw IoError("cannot open features " + paths.features.string());
  char magic[4];
  if (!feat_in.read(magic, 4) || !std::equal(magic, magic + 4, kFeaturesMagic))
    throw FormatError("features file " + paths.features.string() + " has wrong magic");
  const std::uint64_t n_rows = get_u64(feat_in);
  const std::uint64_t dim = get_u64(feat_in);
  if (dim != expected_dim)
    throw FormatError("feature length " + std::to_string(dim) + ", expected " +
                      std::to_string(expected_dim));
  if (n_rows != rows.size())
    throw FormatError("features hold " + std::to_string(n_rows) + " rows, index lists " +
                      std::to_string(rows.size()));

  Corpus corpus;
  corpus.dim = dim;
  corpus.instances.reserve(n_rows);
  std::vector<unsigned char> raw(dim * 4);
  for (const auto& [clip, frame] : rows) {
    if (!feat_in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
      throw FormatError("features file truncated");
    std::vector<double> features(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      std::uint32_t bits = 0;
      for (int b = 3; b >= 0; --b) bits = (bits << 8) | raw[c * 4 + static_cast<std::size_t>(b)];
      features[c] = static_cast<double>(std::bit_cast<float>(bits));
    }
    auto it = clip_labels.find(clip);
    if (it == clip_labels.end()) throw SchemaError("clip " + clip + " has no labels entry");
    corpus.instances.push_back(make_instance(clip, frame, std::move(features), it->second, ontology));
  }
  corpus.stats = compute_stats(corpus.instances, ontology);
  return corpus;
}

void write_corpus(const CorpusPaths& paths, const Corpus& corpus, const Ontology& ontology) {
  const auto index_path = paths.index.empty() ? default_index_path(paths.features) : paths.index;
  std::ofstream feat(paths.features, std::ios::binary | std::ios::trunc);
  std::ofstream index(index_path, std::ios::trunc);
  std::ofstream labels(paths.labels, std::ios::trunc);
  if (!feat || !index || !labels)
    throw IoError("cannot write corpus next to " + paths.features.string());

  feat.write(kFeaturesMagic, 4);
  put_u64(feat, corpus.instances.size());
  put_u64(feat, corpus.dim);
  std::map<std::string, const Instance*> first_of_clip;
  std::vector<std::string> clip_order;
  for (const Instance& inst : corpus.instances) {
    if (inst.features.size() != corpus.dim)
      throw FormatError("instance of clip " + inst.clip_id + " has wrong feature length");
    for (double v : inst.features) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      char bytes[4];
      for (int b = 0; b < 4; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
      feat.write(bytes, 4);
    }
    index << inst.clip_id << ',' << inst.frame << '\n';
    auto [it, inserted] = first_of_clip.emplace(inst.clip_id, &inst);
    if (inserted) {
      clip_order.push_back(inst.clip_id);
    } else if (it->second->sub_labels != inst.sub_labels) {
      throw SchemaError("frames of clip " + inst.clip_id + " disagree on labels");
    }
  }
  for (const auto& clip : clip_order) {
    labels << clip << '\t';
    const auto& subs = first_of_clip[clip]->sub_labels;
    for (std::size_t i = 0; i < subs.size(); ++i)
      labels << (i ? "," : "") << ontology.subclasses()[subs[i]].id;
    labels << '\n';
  }
  if (!feat || !index || !labels) throw IoError("write failed for " + paths.features.string());
}

Matrix gather_features(std::span<const Instance> instances, std::span<const std::size_t> rows) {
  const std::size_t dim = rows.empty() ? 0 : instances[rows[0]].features.size();
  Matrix x(rows.size(), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& f = instances[rows[i]].features;
    if (f.size() != dim) throw DimensionError("ragged features in batch");
    std::copy(f.begin(), f.end(), x.row(i).begin());
  }
  return x;
}

Matrix gather_sub_targets(std::span<const Instance> instances, std::span<const std::size_t> rows,
                          std::size_t num_sub) {
  Matrix y(rows.size(), num_sub);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t s : instances[rows[i]].sub_labels) y(i, s) = 1.0;
  return y;
}

Matrix gather_super_targets(std::span<const Instance> instances,
                            std::span<const std::size_t> rows, std::size_t num_super) {
  Matrix y(rows.size(), num_super);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t s : instances[rows[i]].super_labels) y(i, s) = 1.0;
  return y;
}

std::string_view to_string(PairingPolicy policy) {
  return policy == PairingPolicy::kExact ? "exact" : "intersect";
}

PairingPolicy parse_pairing_policy(std::string_view text) {
  if (text == "exact") return PairingPolicy::kExact;
  if (text == "intersect") return PairingPolicy::kIntersect;
  throw ConfigError("unknown pairing policy '" + std::string(text) + "'");
}

int assign_distance(const Instance& a, const Instance& b, PairingPolicy policy) {
  if (policy == PairingPolicy::kExact) {
    if (a.sub_labels == b.sub_labels) return 0;
    if (a.super_labels == b.super_labels) return 1;
    return 2;
  }
  if (intersects(a.sub_labels, b.sub_labels)) return 0;
  if (intersects(a.super_labels, b.super_labels)) return 1;
  return 2;
}

PairBatch sample_pairs(std::span<const Instance> instances, std::span<const std::size_t> pool,
                       PairingPolicy policy, std::size_t batch_size, Rng& rng) {
  if (pool.size() < 2) throw ParameterError("pair sampling needs at least 2 instances");
  constexpr int kAttempts = 256;

  // Candidate partners for the two "close" strata, keyed on the anchor.
  std::map<std::vector<std::size_t>, std::vector<std::size_t>> by_sub_set;
  std::map<std::vector<std::size_t>, std::vector<std::size_t>> by_super_set;
  std::map<std::size_t, std::vector<std::size_t>> by_sub;
  std::map<std::size_t, std::vector<std::size_t>> by_super;
  for (std::size_t idx : pool) {
    const Instance& inst = instances[idx];
    by_sub_set[inst.sub_labels].push_back(idx);
    by_super_set[inst.super_labels].push_back(idx);
    for (std::size_t s : inst.sub_labels) by_sub[s].push_back(idx);
    for (std::size_t s : inst.super_labels) by_super[s].push_back(idx);
  }

  auto pick = [&rng](const std::vector<std::size_t>& v) {
    return v[uniform_index(rng, v.size())];
  };

  auto candidate = [&](std::size_t anchor, int stratum) -> std::size_t {
    const Instance& a = instances[anchor];
    if (stratum == 0) {
      if (policy == PairingPolicy::kExact) return pick(by_sub_set[a.sub_labels]);
      return pick(by_sub[a.sub_labels[uniform_index(rng, a.sub_labels.size())]]);
    }
    if (stratum == 1) {
      if (policy == PairingPolicy::kExact) return pick(by_super_set[a.super_labels]);
      return pick(by_super[a.super_labels[uniform_index(rng, a.super_labels.size())]]);
    }
    return pool[uniform_index(rng, pool.size())];
  };

  auto try_stratum = [&](int stratum, PairedInstance& out) {
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
      const std::size_t anchor = pool[uniform_index(rng, pool.size())];
      const std::size_t partner = candidate(anchor, stratum);
      if (partner == anchor) continue;
      if (assign_distance(instances[anchor], instances[partner], policy) != stratum) continue;
      out = {anchor, partner, stratum};
      return true;
    }
    return false;
  };

  PairBatch batch;
  std::vector<int> available = {0, 1, 2};
  std::size_t cursor = 0;
  while (batch.pairs.size() < batch_size) {
    if (available.empty()) throw ParameterError("no distinct pair can be drawn from the pool");
    const int stratum = available[cursor % available.size()];
    PairedInstance pair;
    if (try_stratum(stratum, pair)) {
      batch.pairs.push_back(pair);
      ++cursor;
    } else {
      batch.missing_strata.push_back(stratum);
      available.erase(std::find(available.begin(), available.end(), stratum));
    }
  }
  std::sort(batch.missing_strata.begin(), batch.missing_strata.end());
  return batch;
}

SynthCorpus synth_generate(const SynthSpec& spec) {
  if (spec.n_super < 1 || spec.subs_per_super < 1 || spec.dim < 1 || spec.n_instances < 1)
    throw ParameterError("synthetic counts must all be >= 1");
  if (!(spec.multilabel_rate >= 0.0 && spec.multilabel_rate < 1.0))
    throw ParameterError("multilabel_rate must be in [0, 1)");
  if (!(spec.label_drop_rate >= 0.0 && spec.label_drop_rate < 1.0))
    throw ParameterError("label_drop_rate must be in [0, 1)");
  if (!(spec.cluster_spread >= 0.0)) throw ParameterError("cluster_spread must be >= 0");

  std::vector<Label> supers;
  std::vector<Label> subs;
  std::vector<std::size_t> parents;
  for (std::size_t j = 0; j < spec.n_super; ++j) {
    supers.push_back({"S" + std::to_string(j), "superclass " + std::to_string(j)});
    for (std::size_t k = 0; k < spec.subs_per_super; ++k) {
      const std::string tag = std::to_string(j) + "." + std::to_string(k);
      subs.push_back({"S" + tag, "subclass " + tag});
      parents.push_back(j);
    }
  }
  SynthCorpus out{Ontology::from_parents(std::move(supers), std::move(subs), std::move(parents)),
                  {}, {}, {}};
  const Ontology& ont = out.ontology;
  const std::size_t n_sub = ont.num_sub();

  Rng rng(spec.seed);
  Matrix super_centers(spec.n_super, spec.dim);
  for (double& v : super_centers.data()) v = normal(rng, 0.0, 3.0);
  out.centers = Matrix(n_sub, spec.dim);
  for (std::size_t s = 0; s < n_sub; ++s)
    for (std::size_t c = 0; c < spec.dim; ++c)
      out.centers(s, c) = super_centers(ont.parent_of(s), c) + normal(rng);

  auto draw = [&](std::size_t count, const char* prefix, Corpus& corpus,
                  std::vector<std::vector<std::size_t>>& truths) {
    corpus.dim = spec.dim;
    corpus.instances.reserve(count);
    char clip[32];
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<std::size_t> truth = {static_cast<std::size_t>(uniform_index(rng, n_sub))};
      if (n_sub > 1 && bernoulli(rng, spec.multilabel_rate)) {
        auto second = static_cast<std::size_t>(uniform_index(rng, n_sub - 1));
        if (second >= truth[0]) ++second;
        truth.push_back(second);
      }
      std::vector<double> features(spec.dim, 0.0);
      for (std::size_t s : truth)
        for (std::size_t c = 0; c < spec.dim; ++c)
          features[c] += out.centers(s, c) + normal(rng, 0.0, spec.cluster_spread);
      for (double& v : features)
        v = static_cast<double>(static_cast<float>(v / static_cast<double>(truth.size())));

      std::vector<std::size_t> kept;
      for (std::size_t s : truth)
        if (!bernoulli(rng, spec.label_drop_rate)) kept.push_back(s);
      if (kept.empty()) kept.push_back(truth[0]);

      std::snprintf(clip, sizeof clip, "%s%06zu", prefix, i);
      corpus.instances.push_back(make_instance(clip, 0, std::move(features), kept, ont));
      truths.push_back(sorted_unique(truth));
    }
    corpus.stats = compute_stats(corpus.instances, ont);
  };
  draw(spec.n_instances, "clip", out.corpus, out.true_sub_labels);
  draw(spec.n_test, "test", out.test, out.test_true_sub_labels);
  return out;
}

}  // namespace ontoweak
