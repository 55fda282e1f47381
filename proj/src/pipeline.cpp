#include "ontoweak/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ontoweak/adam.hpp"
#include "ontoweak/errors.hpp"
#include "ontoweak/text.hpp"

namespace ontoweak {

namespace {

constexpr std::size_t kPredictChunk = 1024;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string join_ids(const std::vector<Label>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) out += (i ? "," : "") + labels[i].id;
  return out;
}

std::string join_counts(const std::vector<std::size_t>& counts) {
  std::string out;
  for (std::size_t i = 0; i < counts.size(); ++i) out += (i ? "," : "") + std::to_string(counts[i]);
  return out;
}

std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  if (text.empty()) return out;
  for (const auto& part : split(text, ','))
    out.push_back(static_cast<std::size_t>(parse_int(part, "count")));
  return out;
}

std::string metric_text(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

void emit(const LogSink& log, std::string_view line) {
  if (log) log(line);
}

// Every row of the batch, merging a trailing singleton into the previous
// batch so batch normalization always sees at least two rows.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& order,
                                                   std::size_t batch_size) {
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (batches.size() > 1 && batches.back().size() < 2) {
    auto tail = batches.back();
    batches.pop_back();
    batches.back().insert(batches.back().end(), tail.begin(), tail.end());
  }
  return batches;
}

std::string lambda_text(const LossWeights& w) {
  return format_double(w.sub) + "," + format_double(w.super) + "," + format_double(w.embed);
}

void require_path(const std::filesystem::path& p, const char* key) {
  if (p.empty()) throw ConfigError(std::string(key) + " path is not set");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

Split split_by_clip(const Corpus& corpus, double val_fraction) {
  Split split;
  const auto cutoff = static_cast<std::uint64_t>(val_fraction * 10000.0);
  for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
    const bool held_out = fnv1a(corpus.instances[i].clip_id) % 10000 < cutoff;
    (held_out ? split.validation : split.train).push_back(i);
  }
  return split;
}

std::vector<std::vector<std::size_t>> node_label_sets(std::span<const Instance> instances,
                                                      std::span<const std::size_t> rows,
                                                      const Ontology& ontology) {
  std::vector<std::vector<std::size_t>> sets;
  sets.reserve(rows.size());
  for (std::size_t r : rows) {
    const Instance& inst = instances[r];
    std::vector<std::size_t> nodes(inst.sub_labels.begin(), inst.sub_labels.end());
    for (std::size_t s : inst.super_labels) nodes.push_back(ontology.super_node(s));
    sets.push_back(std::move(nodes));
  }
  return sets;
}

CorrelationBuild build_correlation(CorrMethod method, double t, double p,
                                   const Ontology& ontology, std::span<const Instance> instances,
                                   std::span<const std::size_t> rows) {
  Matrix binary;
  switch (method) {
    case CorrMethod::kCooccurrence: {
      const auto sets = node_label_sets(instances, rows, ontology);
      binary = build_cooccurrence_corr(count_cooccurrence(sets, ontology.num_nodes()), t);
      break;
    }
    case CorrMethod::kSameParent: binary = build_same_parent_corr(ontology); break;
    case CorrMethod::kParentChild: binary = build_parent_child_corr(ontology); break;
  }
  CorrelationMatrix corr = reweight_corr(binary, p, method, t);
  return {std::move(binary), std::move(corr)};
}

Predictions predict_rows(const Model& model, std::span<const Instance> instances,
                         std::span<const std::size_t> rows) {
  Predictions out{Matrix(rows.size(), model.num_sub()), Matrix(rows.size(), model.num_super())};
  for (std::size_t start = 0; start < rows.size(); start += kPredictChunk) {
    const std::size_t end = std::min(rows.size(), start + kPredictChunk);
    const auto chunk = rows.subspan(start, end - start);
    const Predictions part = model.predict(gather_features(instances, chunk));
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      std::copy_n(part.sub_probs.row(i).begin(), model.num_sub(), out.sub_probs.row(start + i).begin());
      std::copy_n(part.super_probs.row(i).begin(), model.num_super(),
                  out.super_probs.row(start + i).begin());
    }
  }
  return out;
}

EvalReport evaluate_model(const Model& model, const Corpus& corpus, const Ontology& ontology,
                          const CorpusStats& train_stats, bool clip_pooling) {
  std::vector<std::size_t> rows(corpus.instances.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  Predictions pred = predict_rows(model, corpus.instances, rows);
  Matrix sub_t = gather_sub_targets(corpus.instances, rows, ontology.num_sub());
  Matrix super_t = gather_super_targets(corpus.instances, rows, ontology.num_super());

  if (clip_pooling) {
    std::map<std::string, std::size_t> clip_index;
    std::vector<std::size_t> first_row;
    std::vector<std::size_t> clip_of(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto [it, inserted] = clip_index.emplace(corpus.instances[i].clip_id, first_row.size());
      if (inserted) first_row.push_back(i);
      clip_of[i] = it->second;
    }
    const std::size_t n = first_row.size();
    Predictions pooled{Matrix(n, model.num_sub()), Matrix(n, model.num_super())};
    std::vector<double> frames(n, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::size_t c = clip_of[i];
      frames[c] += 1.0;
      for (std::size_t k = 0; k < model.num_sub(); ++k) pooled.sub_probs(c, k) += pred.sub_probs(i, k);
      for (std::size_t k = 0; k < model.num_super(); ++k)
        pooled.super_probs(c, k) += pred.super_probs(i, k);
    }
    for (std::size_t c = 0; c < n; ++c) {
      for (double& v : pooled.sub_probs.row(c)) v /= frames[c];
      for (double& v : pooled.super_probs.row(c)) v /= frames[c];
    }
    pred = std::move(pooled);
    sub_t = slice_rows(sub_t, first_row);
    super_t = slice_rows(super_t, first_row);
  }
  return evaluate_predictions(std::string(to_string(model.spec().kind)), ontology, pred.sub_probs,
                              sub_t, pred.super_probs, super_t, train_stats.sub_counts,
                              train_stats.super_counts);
}

TrainResult train_model(const RunConfig& config, const Corpus& corpus, const Ontology& ontology,
                        const LogSink& log) {
  if (corpus.dim != config.feature_dim)
    throw ConfigError("corpus has " + std::to_string(corpus.dim) + " features, feature_dim is " +
                      std::to_string(config.feature_dim));
  validate(config.lambda);

  Split split = split_by_clip(corpus, config.val_fraction);
  if (split.train.size() < 2) throw ConfigError("training split has fewer than 2 instances");
  std::vector<Instance> train_view;
  CorpusStats train_stats;
  {
    std::vector<Instance> subset;
    subset.reserve(split.train.size());
    for (std::size_t i : split.train) subset.push_back(corpus.instances[i]);
    train_stats = compute_stats(subset, ontology);
  }

  Rng init_rng(config.seed);
  Rng shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  Rng dropout_rng(config.seed ^ 0xbf58476d1ce4e5b9ull);
  Rng pair_rng(config.seed ^ 0x94d049bb133111ebull);

  std::optional<CorrelationMatrix> corr;
  if (uses_gcn(config.model))
    corr = build_correlation(config.corr_method, config.t, config.p, ontology, corpus.instances,
                             split.train)
               .corr;
  Model model = Model::create(config.model_spec(), ontology, corr, init_rng);
  Adam adam({config.lr, 0.9, 0.999, 1e-8, config.weight_decay});
  const auto trainable = model.params().trainable();

  TrainResult result{std::move(model), {}, 0, std::move(split), std::move(train_stats), {}};
  Model& m = result.model;
  const std::vector<std::size_t>& train_rows = result.split.train;
  const std::vector<std::size_t>& val_rows = result.split.validation;

  std::optional<ParameterSet> best_params;
  double best_score = -1.0;
  std::vector<int> warned;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    double loss_sum = 0.0;
    std::size_t batches_run = 0;

    auto step = [&](Tape& tape, Var loss, std::size_t batch) {
      const auto where = [&] {
        return " at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
               " (lambda=" + lambda_text(config.lambda) + ", lr=" + format_double(config.lr) + ")";
      };
      const double value = loss.scalar();
      if (!std::isfinite(value)) throw TrainingError("non-finite loss" + where());
      m.params().zero_grad();
      tape.backward(loss);
      try {
        adam.step(trainable);
      } catch (const TrainingError& e) {
        std::string detail = e.what();
        detail.erase(0, detail.find(": ") + 2);
        throw TrainingError(detail + where());
      }
      loss_sum += value;
      ++batches_run;
    };

    if (is_siamese(config.model)) {
      const std::size_t n_batches = (train_rows.size() + config.batch_size - 1) / config.batch_size;
      for (std::size_t b = 0; b < n_batches; ++b) {
        const PairBatch pairs =
            sample_pairs(corpus.instances, train_rows, config.pairing, config.batch_size, pair_rng);
        for (int s : pairs.missing_strata) {
          if (std::find(warned.begin(), warned.end(), s) != warned.end()) continue;
          warned.push_back(s);
          result.warnings.push_back("no training pairs with d=" + std::to_string(s) +
                                    " under the " + std::string(to_string(config.pairing)) +
                                    " policy");
          emit(log, "warning: " + result.warnings.back());
        }
        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        std::vector<double> d;
        for (const auto& p : pairs.pairs) {
          left.push_back(p.left);
          right.push_back(p.right);
          d.push_back(static_cast<double>(p.d));
        }
        const Matrix subs[] = {gather_sub_targets(corpus.instances, left, ontology.num_sub()),
                               gather_sub_targets(corpus.instances, right, ontology.num_sub())};
        const Matrix supers[] = {
            gather_super_targets(corpus.instances, left, ontology.num_super()),
            gather_super_targets(corpus.instances, right, ontology.num_super())};
        Tape tape;
        Var loss = m.pair_loss(tape, gather_features(corpus.instances, left),
                               gather_features(corpus.instances, right), subs, supers, d,
                               config.lambda, Mode::kTrain, dropout_rng);
        step(tape, loss, b + 1);
      }
    } else {
      std::vector<std::size_t> order = train_rows;
      shuffle(order.begin(), order.end(), shuffle_rng);
      const auto batches = make_batches(order, config.batch_size);
      for (std::size_t b = 0; b < batches.size(); ++b) {
        const auto& rows = batches[b];
        Tape tape;
        Var loss = m.loss(tape, gather_features(corpus.instances, rows),
                          gather_sub_targets(corpus.instances, rows, ontology.num_sub()),
                          gather_super_targets(corpus.instances, rows, ontology.num_super()),
                          config.lambda, Mode::kTrain, dropout_rng);
        step(tape, loss, b + 1);
      }
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.loss = batches_run ? loss_sum / static_cast<double>(batches_run) : 0.0;
    if (!val_rows.empty()) {
      const Predictions pred = predict_rows(m, corpus.instances, val_rows);
      const EvalReport rep = evaluate_predictions(
          std::string(to_string(config.model)), ontology, pred.sub_probs,
          gather_sub_targets(corpus.instances, val_rows, ontology.num_sub()), pred.super_probs,
          gather_super_targets(corpus.instances, val_rows, ontology.num_super()),
          result.train_stats.sub_counts, result.train_stats.super_counts);
      entry.val_sub_ap = rep.sub.weighted_ap;
      entry.val_super_ap = rep.super.weighted_ap;
      entry.val_sub_auc = rep.sub.weighted_auc;
      entry.val_super_auc = rep.super.weighted_auc;
    }
    result.epochs.push_back(entry);

    const double score = entry.val_sub_ap.value_or(0.0);
    if (val_rows.empty() || !best_params || score > best_score) {
      best_score = score;
      best_params = m.params();
      result.best_epoch = epoch;
    }

    std::string line = "epoch " + std::to_string(epoch) + "/" + std::to_string(config.epochs) +
                       " loss " + metric_text(entry.loss) + " val_sub_ap " +
                       metric_text(entry.val_sub_ap) + " val_super_ap " +
                       metric_text(entry.val_super_ap) + " val_sub_auc " +
                       metric_text(entry.val_sub_auc) + " val_super_auc " +
                       metric_text(entry.val_super_auc);
    if (!config.deterministic) {
      const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - started)
                          .count();
      line += " elapsed_ms " + std::to_string(ms);
    }
    emit(log, line);
  }

  if (best_params) result.model = Model::restore(config.model_spec(), ontology, std::move(*best_params));
  return result;
}

Checkpoint make_checkpoint(const RunConfig& config, const Model& model, const Ontology& ontology,
                           const CorpusStats& train_stats, std::size_t best_epoch) {
  std::ostringstream meta;
  meta << "input_dim=" << model.spec().input_dim << '\n'
       << "num_sub=" << ontology.num_sub() << '\n'
       << "num_super=" << ontology.num_super() << '\n'
       << "sub_ids=" << join_ids(ontology.subclasses()) << '\n'
       << "super_ids=" << join_ids(ontology.superclasses()) << '\n'
       << "train_instances=" << train_stats.instances << '\n'
       << "train_sub_counts=" << join_counts(train_stats.sub_counts) << '\n'
       << "train_super_counts=" << join_counts(train_stats.super_counts) << '\n'
       << "best_epoch=" << best_epoch << '\n';
  return Checkpoint{config.to_text(false), meta.str(), model.params()};
}

RestoredModel restore_model(const Checkpoint& ckpt, const Ontology& ontology) {
  ConfigMap map;
  map.parse(ckpt.config);
  RunConfig config = RunConfig::resolve(map);
  const auto meta = parse_key_values(ckpt.model);
  auto field = [&meta](const char* key) {
    auto it = meta.find(key);
    if (it == meta.end()) throw FormatError(std::string("checkpoint model section lacks ") + key);
    return it->second;
  };
  if (field("sub_ids") != join_ids(ontology.subclasses()) ||
      field("super_ids") != join_ids(ontology.superclasses()))
    throw ConfigError("checkpoint label space does not match the ontology");

  CorpusStats stats;
  stats.instances = static_cast<std::size_t>(parse_int(field("train_instances"), "train_instances"));
  stats.sub_counts = parse_counts(field("train_sub_counts"));
  stats.super_counts = parse_counts(field("train_super_counts"));
  ParameterSet params = ckpt.params;
  Model model = Model::restore(config.model_spec(), ontology, std::move(params));
  return RestoredModel{std::move(config), std::move(model), std::move(stats)};
}

EvalReport evaluate(const Checkpoint& ckpt, const Corpus& corpus, const Ontology& ontology,
                    bool clip_pooling) {
  RestoredModel restored = restore_model(ckpt, ontology);
  if (corpus.dim != restored.model.spec().input_dim)
    throw ConfigError("corpus has " + std::to_string(corpus.dim) + " features, checkpoint expects " +
                      std::to_string(restored.model.spec().input_dim));
  return evaluate_model(restored.model, corpus, ontology, restored.train_stats, clip_pooling);
}

void run_synth_data(const RunConfig& config, const LogSink& log) {
  const auto& dir = config.out_dir;
  ensure_dir(dir);
  const SynthCorpus synth = synth_generate(config.synth);
  write_text(dir / "ontology.json", synth.ontology.to_json());
  write_corpus({dir / "train.features", dir / "train.labels", {}}, synth.corpus, synth.ontology);
  if (config.synth.n_test > 0)
    write_corpus({dir / "test.features", dir / "test.labels", {}}, synth.test, synth.ontology);

  const SynthSpec& s = config.synth;
  std::ostringstream manifest;
  manifest << "n_super=" << s.n_super << '\n'
           << "subs_per_super=" << s.subs_per_super << '\n'
           << "dim=" << s.dim << '\n'
           << "n_instances=" << s.n_instances << '\n'
           << "n_test=" << s.n_test << '\n'
           << "multilabel_rate=" << format_double(s.multilabel_rate) << '\n'
           << "label_drop_rate=" << format_double(s.label_drop_rate) << '\n'
           << "cluster_spread=" << format_double(s.cluster_spread) << '\n'
           << "seed=" << s.seed << '\n';
  write_text(dir / "manifest.txt", manifest.str());

  std::ostringstream cfg;
  cfg << "ontology=ontology.json\n"
      << "features=train.features\n"
      << "labels=train.labels\n"
      << "feature_dim=" << s.dim << '\n';
  write_text(dir / "corpus.cfg", cfg.str());
  emit(log, "wrote " + std::to_string(synth.corpus.instances.size()) + " training and " +
                std::to_string(synth.test.instances.size()) + " test instances to " +
                dir.string());
}

CorrelationAudit run_build_corr(const RunConfig& config, const std::filesystem::path& out_path,
                                const LogSink& log) {
  require_path(config.ontology, "ontology");
  const Ontology ontology = Ontology::load(config.ontology);
  Corpus corpus;
  if (config.corr_method == CorrMethod::kCooccurrence) {
    require_path(config.features, "features");
    require_path(config.labels, "labels");
    corpus = load_corpus(config.corpus_paths(), ontology, config.feature_dim);
  }
  std::vector<std::size_t> rows(corpus.instances.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const CorrelationBuild built =
      build_correlation(config.corr_method, config.t, config.p, ontology, corpus.instances, rows);

  CorrelationAudit audit;
  audit.nodes = built.binary.rows();
  audit.min_row_sum = audit.nodes ? 1e300 : 0.0;
  for (std::size_t r = 0; r < audit.nodes; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < audit.nodes; ++c) {
      if (r != c && built.binary(r, c) != 0.0) ++audit.binary_nonzeros;
      sum += built.corr.a_prime(r, c);
    }
    audit.min_row_sum = std::min(audit.min_row_sum, sum);
    audit.max_row_sum = std::max(audit.max_row_sum, sum);
  }

  if (out_path.has_parent_path()) ensure_dir(out_path.parent_path());
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + out_path.string());
  write_correlation(out, built.corr);
  if (!out) throw IoError("write failed for " + out_path.string());

  char line[160];
  std::snprintf(line, sizeof line,
                "%s: %zu nodes, %zu off-diagonal edges before re-weighting, row sums in [%.15g, %.15g]",
                std::string(to_string(config.corr_method)).c_str(), audit.nodes,
                audit.binary_nonzeros, audit.min_row_sum, audit.max_row_sum);
  emit(log, line);
  return audit;
}

TrainResult run_train(const RunConfig& config, const LogSink& log) {
  require_path(config.ontology, "ontology");
  require_path(config.features, "features");
  require_path(config.labels, "labels");
  const Ontology ontology = Ontology::load(config.ontology);
  const Corpus corpus = load_corpus(config.corpus_paths(), ontology, config.feature_dim);
  ensure_dir(config.out_dir);

  std::ofstream log_file(config.out_dir / "train.log", std::ios::trunc);
  if (!log_file) throw IoError("cannot write " + (config.out_dir / "train.log").string());
  const LogSink tee = [&](std::string_view line) {
    log_file << line << '\n';
    emit(log, line);
  };

  TrainResult result = train_model(config, corpus, ontology, tee);
  save_checkpoint(config.out_dir / "checkpoint.bin",
                  make_checkpoint(config, result.model, ontology, result.train_stats,
                                  result.best_epoch));
  RunConfig resolved = config;
  for (auto* path : {&resolved.ontology, &resolved.features, &resolved.labels, &resolved.index,
                     &resolved.out_dir, &resolved.checkpoint}) {
    if (!path->empty()) *path = std::filesystem::absolute(*path).lexically_normal();
  }
  write_text(config.out_dir / "config.resolved", resolved.to_text());
  tee("best epoch " + std::to_string(result.best_epoch) + ", checkpoint " +
      (config.out_dir / "checkpoint.bin").string());
  return result;
}

EvalReport run_eval(const RunConfig& config, const LogSink& log) {
  require_path(config.checkpoint, "checkpoint");
  require_path(config.ontology, "ontology");
  require_path(config.features, "features");
  require_path(config.labels, "labels");
  const Checkpoint ckpt = load_checkpoint(config.checkpoint);
  const Ontology ontology = Ontology::load(config.ontology);
  const RestoredModel restored = restore_model(ckpt, ontology);
  const Corpus corpus =
      load_corpus(config.corpus_paths(), ontology, restored.model.spec().input_dim);
  const EvalReport report =
      evaluate_model(restored.model, corpus, ontology, restored.train_stats, config.clip_pooling);
  ensure_dir(config.out_dir);
  write_text(config.out_dir / "report.json", report_to_json(report));
  const std::string table = report_to_table(report);
  write_text(config.out_dir / "report.txt", table);
  emit(log, table);
  return report;
}

}  // namespace ontoweak
