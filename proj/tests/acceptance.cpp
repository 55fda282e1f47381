// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
// if any fails. Trained runs share one synthetic corpus on disk.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ontoweak/adam.hpp"
#include "ontoweak/pipeline.hpp"
#include "ontoweak/toy.hpp"
#include "test_support.hpp"

namespace ow = ontoweak;
namespace fs = std::filesystem;
using ow::Matrix;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double cpu_seconds(std::clock_t since) {
  return static_cast<double>(std::clock() - since) / CLOCKS_PER_SEC;
}

constexpr ow::ModelKind kKinds[] = {ow::ModelKind::kMlp, ow::ModelKind::kSiameseOnto,
                                    ow::ModelKind::kSiameseGcn, ow::ModelKind::kMlpGcn};

std::string name(ow::ModelKind k) { return std::string(ow::to_string(k)); }

// Shared synthetic corpus: 3 super x 3 sub, dim 16, 3000 training and 600
// held-out instances, seed 42.
struct Workspace {
  fs::path root;
  fs::path data;
  ow::Ontology ontology;
  ow::Corpus train;
  ow::Corpus test;

  ow::ConfigMap base() const {
    ow::ConfigMap map;
    map.load_file(data / "corpus.cfg");
    map.set("deterministic", "true");
    return map;
  }
};

Workspace make_workspace() {
  Workspace w;
  w.root = testing_support::scratch_dir("acceptance");
  w.data = w.root / "data";
  ow::ConfigMap map;
  map.set("n_instances", "3000");
  map.set("n_test", "600");
  map.set("feature_dim", "16");
  map.set("seed", "42");
  map.set("out_dir", w.data.string());
  ow::run_synth_data(ow::RunConfig::resolve(map));
  const auto cfg = ow::RunConfig::resolve(w.base());
  w.ontology = ow::Ontology::load(cfg.ontology);
  w.train = ow::load_corpus(cfg.corpus_paths(), w.ontology, cfg.feature_dim);
  w.test = ow::load_corpus({w.data / "test.features", w.data / "test.labels", {}}, w.ontology,
                           cfg.feature_dim);
  return w;
}

struct Trained {
  ow::TrainResult result;
  ow::EvalReport test_report;
  double cpu_s = 0.0;
};

Trained train_and_eval(const Workspace& w, const std::string& tag,
                       std::initializer_list<std::pair<const char*, const char*>> overrides) {
  auto map = w.base();
  for (const auto& [k, v] : overrides) map.set(k, v);
  map.set("out_dir", (w.root / tag).string());
  const auto cfg = ow::RunConfig::resolve(map);
  const std::clock_t start = std::clock();
  auto result = ow::run_train(cfg);
  const double cpu = cpu_seconds(start);
  auto report = ow::evaluate_model(result.model, w.test, w.ontology, result.train_stats, false);
  std::printf("  %s: %zu epochs, best %zu, %.0f s cpu, test sub AP %.4f AUC %.4f, super AP %.4f AUC %.4f\n",
              tag.c_str(), cfg.epochs, result.best_epoch, cpu, *report.sub.weighted_ap,
              *report.sub.weighted_auc, *report.super.weighted_ap, *report.super.weighted_auc);
  std::fflush(stdout);
  return {std::move(result), std::move(report), cpu};
}

Outcome gradient_integrity() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  for (auto kind : kKinds) {
    ow::GradCheckOptions opt;
    opt.tolerance = 1e-4;
    opt.max_entries_per_param = ow::kToyEntriesPerParam;
    const auto r = ow::gradcheck_kind(kind, opt);
    pass = pass && r.passed && r.max_rel_error <= 1e-4;
    detail += name(kind) + " " + fmt("%.2e", r.max_rel_error) + ", ";
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  pass = pass && secs < 60.0;
  return {pass, "max rel error " + detail + fmt("%.1f s", secs)};
}

Outcome ontological_layer() {
  ow::Rng rng(2024);
  double worst = 0.0;
  bool structure = true;
  for (int trial = 0; trial < 100; ++trial) {
    const auto ont = testing_support::random_ontology(rng);
    const auto layer = ow::build_onto_layer(ont);
    const Matrix& m = layer.m;
    for (std::size_t j = 0; j < m.rows(); ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < m.cols(); ++i) {
        if (m(j, i) < 0.0) structure = false;
        sum += m(j, i);
      }
      if (std::abs(sum - 1.0) > 1e-12) structure = false;
    }
    for (std::size_t i = 0; i < m.cols(); ++i) {
      std::size_t nonzero = 0;
      for (std::size_t j = 0; j < m.rows(); ++j) nonzero += m(j, i) != 0.0;
      if (nonzero != 1 || m(ont.parent_of(i), i) == 0.0) structure = false;
    }
    Matrix probs(5, ont.num_sub());
    for (double& v : probs.data()) v = ow::uniform(rng, 0.0, 1.0);
    const Matrix got = ow::apply_onto_layer(layer, probs);
    for (std::size_t r = 0; r < probs.rows(); ++r) {
      for (std::size_t s = 0; s < ont.num_super(); ++s) {
        double sum = 0.0, n = 0.0;
        for (std::size_t c = 0; c < ont.num_sub(); ++c) {
          if (ont.parent_of(c) != s) continue;
          sum += probs(r, c);
          n += 1.0;
        }
        worst = std::max(worst, std::abs(got(r, s) - sum / n));
      }
    }
  }
  return {structure && worst <= 1e-12,
          std::string(structure ? "row-stochastic, one nonzero per column" : "structure violated") +
              ", max |apply - mean| " + fmt("%.1e", worst)};
}

Outcome correlation_properties() {
  ow::Rng rng(99);
  bool binary = true, symmetric = true, identity = true;
  double worst_row = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto ont = testing_support::random_ontology(rng);
    const auto subs = testing_support::random_sub_sets(rng, 20 + ow::uniform_index(rng, 80), ont.num_sub());
    std::vector<std::vector<std::size_t>> nodes;
    for (const auto& s : subs) {
      std::vector<std::size_t> n = s;
      for (std::size_t c : s) {
        const std::size_t sup = ont.super_node(ont.parent_of(c));
        if (std::find(n.begin(), n.end(), sup) == n.end()) n.push_back(sup);
      }
      std::sort(n.begin(), n.end());
      nodes.push_back(std::move(n));
    }
    const double t = 0.01 + 0.98 * ow::uniform(rng, 0.0, 1.0);
    const double p = 0.01 + 0.99 * ow::uniform(rng, 0.0, 1.0);
    const Matrix mats[] = {
        ow::build_cooccurrence_corr(ow::count_cooccurrence(nodes, ont.num_nodes()), t),
        ow::build_same_parent_corr(ont), ow::build_parent_child_corr(ont)};
    for (int method = 0; method < 3; ++method) {
      const Matrix& a = mats[method];
      for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
          if (a(i, j) != 0.0 && a(i, j) != 1.0) binary = false;
          if (method > 0 && a(i, j) != a(j, i)) symmetric = false;
        }
      }
      const Matrix w = ow::reweight_corr(a, p, ow::CorrMethod::kCooccurrence, t).a_prime;
      for (std::size_t i = 0; i < w.rows(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < w.cols(); ++j) sum += w(i, j);
        worst_row = std::max(worst_row, std::abs(sum - 1.0));
      }
      if (ow::reweight_corr(a, 1.0, ow::CorrMethod::kCooccurrence, t).a_prime !=
          Matrix::identity(a.rows()))
        identity = false;
    }
  }

  // {A,B}, {A}, {B,C}
  const std::vector<std::vector<std::size_t>> fixture{{0, 1}, {0}, {1, 2}};
  const Matrix cond = ow::conditional_probability(ow::count_cooccurrence(fixture, 3));
  // cond(i, j) = P(label j | label i)
  const bool values = cond(2, 1) == 1.0 && cond(1, 0) == 0.5 && cond(0, 1) == 0.5 &&
                      cond(1, 2) == 0.5;
  const Matrix high = ow::build_cooccurrence_corr(ow::count_cooccurrence(fixture, 3), 0.6);
  const bool single = std::accumulate(high.data().begin(), high.data().end(), 0.0) == 1.0 &&
                      high(2, 1) == 1.0;
  return {binary && symmetric && identity && worst_row <= 1e-12 && values && single,
          std::string(binary ? "binary" : "NOT binary") + ", " +
              (symmetric ? "symmetric" : "NOT symmetric") + ", max |row sum - 1| " +
              fmt("%.1e", worst_row) + ", p=1 " + (identity ? "identity" : "NOT identity") +
              ", fixture " + (values && single ? "ok" : "mismatch")};
}

double ap_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s[a] > s[b]; });
  double sum = 0.0, pos = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (!y[order[k]]) continue;
    pos += 1.0;
    sum += pos / static_cast<double>(k + 1);
  }
  return sum / pos;
}

double auc_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] && !y[j]) {
        pairs += 1.0;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return wins / pairs;
}

Outcome metric_oracles() {
  ow::Rng rng(4);
  double worst = 0.0;
  bool defined = true;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + ow::uniform_index(rng, 50);
    const bool ties = trial % 2 == 0;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = ties ? static_cast<double>(ow::uniform_index(rng, 8)) / 8.0 : ow::uniform(rng, 0.0, 1.0);
      y[i] = ow::bernoulli(rng, 0.4);
    }
    const int pos = std::accumulate(y.begin(), y.end(), 0);
    const auto ap = ow::average_precision(s, y);
    const auto auc = ow::roc_auc(s, y);
    if (ap.has_value() != (pos > 0)) defined = false;
    if (auc.has_value() != (pos > 0 && pos < static_cast<int>(n))) defined = false;
    if (ap) worst = std::max(worst, std::abs(*ap - ap_oracle(s, y)));
    if (auc) worst = std::max(worst, std::abs(*auc - auc_oracle(s, y)));
  }
  const std::vector<double> fs_{0.9, 0.8, 0.7, 0.6};
  const std::vector<int> fy{1, 0, 1, 1};
  const double ap = *ow::average_precision(fs_, fy);
  const double auc = *ow::roc_auc(fs_, fy);
  const bool fixture = std::abs(ap - 0.80556) <= 1e-5 && std::abs(auc - 0.33333) <= 1e-5;
  return {defined && worst <= 1e-9 && fixture,
          "max oracle diff " + fmt("%.1e", worst) + ", fixture AP " + fmt("%.5f", ap) + " AUC " +
              fmt("%.5f", auc)};
}

Outcome learnability(const Trained& mlp) {
  const double sub = *mlp.test_report.sub.weighted_auc;
  const double super = *mlp.test_report.super.weighted_auc;
  return {sub >= 0.95 && super >= 0.95 && mlp.cpu_s < 120.0,
          "held-out sub AUC " + fmt("%.4f", sub) + ", super AUC " + fmt("%.4f", super) + ", " +
              fmt("%.0f s cpu", mlp.cpu_s)};
}

Outcome embedding_geometry(const Workspace& w, const Trained& so) {
  std::vector<std::size_t> pool(w.test.instances.size());
  std::iota(pool.begin(), pool.end(), 0);
  ow::Rng rng(123);
  const auto batch = ow::sample_pairs(w.test.instances, pool, ow::PairingPolicy::kExact, 3000, rng);
  std::vector<std::size_t> left, right;
  for (const auto& p : batch.pairs) {
    left.push_back(p.left);
    right.push_back(p.right);
  }
  ow::Tape tape;
  ow::Rng unused(0);
  const Matrix zl = so.result.model.branch(tape, ow::gather_features(w.test.instances, left),
                                           ow::Mode::kEval, unused).z.value();
  const Matrix zr = so.result.model.branch(tape, ow::gather_features(w.test.instances, right),
                                           ow::Mode::kEval, unused).z.value();
  double sum[3] = {0, 0, 0}, count[3] = {0, 0, 0};
  for (std::size_t k = 0; k < batch.pairs.size(); ++k) {
    double sq = 0.0;
    for (std::size_t c = 0; c < zl.cols(); ++c) sq += (zl(k, c) - zr(k, c)) * (zl(k, c) - zr(k, c));
    sum[batch.pairs[k].d] += std::sqrt(sq);
    count[batch.pairs[k].d] += 1.0;
  }
  double mean[3];
  for (int d = 0; d < 3; ++d) mean[d] = count[d] > 0 ? sum[d] / count[d] : NAN;
  const bool pass = count[0] > 0 && count[1] > 0 && count[2] > 0 && mean[0] < mean[1] &&
                    mean[1] < mean[2];
  return {pass, "held-out mean distance d=0 " + fmt("%.3f", mean[0]) + " (" +
                    fmt("%.0f", count[0]) + " pairs), d=1 " + fmt("%.3f", mean[1]) + " (" +
                    fmt("%.0f", count[1]) + "), d=2 " + fmt("%.3f", mean[2]) + " (" +
                    fmt("%.0f", count[2]) + ")"};
}

Outcome gcn_degenerate() {
  constexpr std::size_t kNodes = 49;
  ow::Rng rng(49);
  ow::ParameterSet full_params;
  const ow::CorrelationMatrix corr{Matrix::identity(kNodes), ow::CorrMethod::kParentChild, 0.0, 1.0};
  const auto full = ow::GcnStack::create(full_params, corr, true, rng);
  ow::Tape tape;
  const Matrix z = full.forward(tape).value();
  const bool shape = z.rows() == kNodes && z.cols() == 128;
  std::size_t moved = 0;
  for (std::size_t drop = 0; drop < kNodes; ++drop) {
    ow::ParameterSet ps;
    ow::Rng r(1);
    const ow::CorrelationMatrix smaller{Matrix::identity(kNodes - 1), ow::CorrMethod::kParentChild,
                                        0.0, 1.0};
    const auto g = ow::GcnStack::create(ps, smaller, true, r);
    for (std::size_t i = 0, k = 0; i < kNodes; ++i) {
      if (i == drop) continue;
      std::copy(full.layer1_w1->value.row(i).begin(), full.layer1_w1->value.row(i).end(),
                g.layer1_w1->value.row(k++).begin());
    }
    g.layer1_w2->value = full.layer1_w2->value;
    g.layer2_w1->value = full.layer2_w1->value;
    g.layer2_w2->value = full.layer2_w2->value;
    ow::Tape t;
    const Matrix zs = g.forward(t).value();
    for (std::size_t i = 0, k = 0; i < kNodes; ++i) {
      if (i == drop) continue;
      if (std::memcmp(z.row(i).data(), zs.row(k++).data(), 128 * sizeof(double)) != 0) ++moved;
    }
  }
  return {shape && moved == 0, "output " + std::to_string(z.rows()) + "x" +
                                   std::to_string(z.cols()) + ", " + std::to_string(moved) +
                                   " rows changed across 49 single-node removals"};
}

Outcome overfit(const Workspace& w) {
  std::vector<std::size_t> rows(64);
  std::iota(rows.begin(), rows.end(), 0);
  const auto& inst = w.train.instances;
  bool pass = true;
  std::string detail;
  for (auto kind : kKinds) {
    ow::ConfigMap map = w.base();
    map.set("model", name(kind));
    map.set("dropout", "0");
    const auto cfg = ow::RunConfig::resolve(map);
    std::optional<ow::CorrelationMatrix> corr;
    if (ow::uses_gcn(kind))
      corr = ow::build_correlation(cfg.corr_method, cfg.t, cfg.p, w.ontology, inst, rows).corr;
    ow::Rng init(cfg.seed), rng(1), pair_rng(2);
    auto model = ow::Model::create(cfg.model_spec(), w.ontology, corr, init);
    ow::Adam adam({cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
    const auto trainable = model.params().trainable();

    const Matrix x = ow::gather_features(inst, rows);
    const Matrix sub = ow::gather_sub_targets(inst, rows, w.ontology.num_sub());
    const Matrix super = ow::gather_super_targets(inst, rows, w.ontology.num_super());
    const auto pairs = ow::sample_pairs(inst, rows, cfg.pairing, 64, pair_rng);
    std::vector<std::size_t> left, right;
    std::vector<double> d;
    for (const auto& p : pairs.pairs) {
      left.push_back(p.left);
      right.push_back(p.right);
      d.push_back(p.d);
    }
    const Matrix xl = ow::gather_features(inst, left), xr = ow::gather_features(inst, right);
    const Matrix subs[] = {ow::gather_sub_targets(inst, left, w.ontology.num_sub()),
                           ow::gather_sub_targets(inst, right, w.ontology.num_sub())};
    const Matrix supers[] = {ow::gather_super_targets(inst, left, w.ontology.num_super()),
                             ow::gather_super_targets(inst, right, w.ontology.num_super())};

    double best = INFINITY;
    int reached = 0;
    for (int step = 1; step <= 500 && !reached; ++step) {
      ow::Tape tape;
      const ow::Var loss =
          ow::is_siamese(kind)
              ? model.pair_loss(tape, xl, xr, subs, supers, d, cfg.lambda, ow::Mode::kTrain, rng)
              : model.loss(tape, x, sub, super, cfg.lambda, ow::Mode::kTrain, rng);
      best = std::min(best, loss.scalar());
      if (loss.scalar() < 0.05) {
        reached = step;
        break;
      }
      model.params().zero_grad();
      tape.backward(loss);
      adam.step(trainable);
    }
    pass = pass && reached > 0;
    detail += name(kind) + (reached ? " below 0.05 at step " + std::to_string(reached)
                                    : " lowest " + fmt("%.4f", best)) +
              "; ";
    std::printf("  overfit %s (lambda %g,%g,%g lr %g): %s\n", name(kind).c_str(), cfg.lambda.sub,
                cfg.lambda.super, cfg.lambda.embed, cfg.lr,
                reached ? ("reached at step " + std::to_string(reached)).c_str()
                        : ("lowest loss " + fmt("%.4f", best)).c_str());
    std::fflush(stdout);
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

Outcome determinism() {
  const auto root = testing_support::scratch_dir("acceptance_det");
  std::vector<std::string> differing;
  auto same = [&](const fs::path& a, const fs::path& b, const std::string& what) {
    if (!fs::exists(a) || slurp(a) != slurp(b)) differing.push_back(what);
  };
  auto synth = [&](const std::string& tag) {
    ow::ConfigMap map;
    map.set("n_instances", "600");
    map.set("n_test", "120");
    map.set("feature_dim", "16");
    map.set("seed", "7");
    map.set("out_dir", (root / tag).string());
    ow::run_synth_data(ow::RunConfig::resolve(map));
  };
  synth("synth_a");
  synth("synth_b");
  for (const char* f : {"ontology.json", "train.features", "train.features.index", "train.labels",
                        "test.features", "test.labels", "manifest.txt", "corpus.cfg"})
    same(root / "synth_a" / f, root / "synth_b" / f, f);

  for (auto kind : kKinds) {
    for (const char* run : {"a", "b"}) {
      ow::ConfigMap map;
      map.load_file(root / "synth_a" / "corpus.cfg");
      map.set("model", name(kind));
      map.set("epochs", "2");
      map.set("seed", "7");
      map.set("deterministic", "true");
      const fs::path out = root / (name(kind) + "_" + run);
      map.set("out_dir", (out / "train").string());
      ow::run_build_corr(ow::RunConfig::resolve(map), out / "train" / "correlation.txt");
      ow::run_train(ow::RunConfig::resolve(map));
      map.set("checkpoint", (out / "train" / "checkpoint.bin").string());
      map.set("features", (root / "synth_a" / "test.features").string());
      map.set("labels", (root / "synth_a" / "test.labels").string());
      map.set("index", "");
      map.set("out_dir", (out / "eval").string());
      ow::run_eval(ow::RunConfig::resolve(map));
    }
    const fs::path a = root / (name(kind) + "_a"), b = root / (name(kind) + "_b");
    for (const char* f : {"train/checkpoint.bin", "train/correlation.txt", "eval/report.json",
                          "eval/report.txt"})
      same(a / f, b / f, name(kind) + " " + f);
    // the log names its own output directory
    auto log = [](const fs::path& run) {
      std::string text = slurp(run / "train" / "train.log");
      const std::string dir = run.string();
      for (auto at = text.find(dir); at != std::string::npos; at = text.find(dir))
        text.replace(at, dir.size(), "<run>");
      return text;
    };
    if (log(a) != log(b)) differing.push_back(name(kind) + " train.log");
  }
  std::string detail = differing.empty() ? "synth corpus, correlation, checkpoint, log and report "
                                           "files identical for all four kinds"
                                         : "differs:";
  for (const auto& d : differing) detail += " " + d;
  return {differing.empty(), detail};
}

Outcome recorded_hyperparameters(const Trained& so, const Trained& mg, const Trained& sg) {
  auto finite = [](const Trained& t) {
    return std::all_of(t.result.epochs.begin(), t.result.epochs.end(),
                       [](const ow::EpochLog& e) { return std::isfinite(e.loss); });
  };
  const double mg_ap = *mg.test_report.sub.weighted_ap;
  const double so_ap = *so.test_report.sub.weighted_ap;
  const double sg_ap = *sg.test_report.sub.weighted_ap;
  return {finite(mg) && finite(sg) && mg_ap >= so_ap,
          "held-out sub weighted AP mlp_gcn " + fmt("%.4f", mg_ap) + " vs siamese_onto " +
              fmt("%.4f", so_ap) + "; siamese_gcn completed with AP " + fmt("%.4f", sg_ap)};
}

}  // namespace

int main() {
  std::vector<std::pair<int, Outcome>> results;
  auto run = [&](int n, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %d: %s %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    results.emplace_back(n, o);
  };

  run(1, gradient_integrity);
  run(2, ontological_layer);
  run(3, correlation_properties);
  run(4, metric_oracles);
  run(7, gcn_degenerate);

  std::optional<Workspace> w;
  try {
    w = make_workspace();
  } catch (const std::exception& e) {
    std::printf("synthetic corpus failed: %s\n", e.what());
  }
  auto need = [&](std::function<Outcome()> f) {
    return [&w, f] { return w ? f() : Outcome{false, "no synthetic corpus"}; };
  };

  run(5, need([&] { return learnability(train_and_eval(*w, "mlp", {{"model", "mlp"}, {"epochs", "50"}})); }));

  std::optional<Trained> so;
  run(6, need([&] {
        so = train_and_eval(*w, "siamese_onto",
                            {{"model", "siamese_onto"}, {"lambda", "1.5,1,0.25"}, {"epochs", "30"}});
        return embedding_geometry(*w, *so);
      }));
  run(8, need([&] { return overfit(*w); }));
  run(9, determinism);
  run(10, need([&] {
        if (!so) return Outcome{false, "siamese_onto run unavailable"};
        const auto mg = train_and_eval(*w, "mlp_gcn", {{"model", "mlp_gcn"}, {"t", "0.08"}, {"p", "0.2"}});
        const auto sg = train_and_eval(*w, "siamese_gcn",
                                       {{"model", "siamese_gcn"}, {"lambda", "100,100,0.5"}, {"lr", "1e-3"}});
        return recorded_hyperparameters(*so, mg, sg);
      }));

  std::sort(results.begin(), results.end(), [](auto& a, auto& b) { return a.first < b.first; });
  int failed = 0;
  std::printf("summary:");
  for (const auto& [n, o] : results) {
    std::printf(" %d=%s", n, o.pass ? "PASS" : "FAIL");
    failed += !o.pass;
  }
  std::printf("\n");
  return failed == 0 ? 0 : 1;
}
