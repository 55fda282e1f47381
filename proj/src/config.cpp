#include "ontoweak/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "ontoweak/errors.hpp"
#include "ontoweak/text.hpp"

namespace ontoweak {

namespace {

const std::set<std::string, std::less<>>& known_keys() {
  static const std::set<std::string, std::less<>> keys = {
      "model", "lambda", "lr", "weight_decay", "epochs", "batch_size", "dropout", "pairing",
      "corr_method", "t", "p", "head_activation", "gcn_final_activation", "seed", "feature_dim",
      "val_fraction", "clip_pooling", "deterministic", "ontology", "features", "labels", "index",
      "out_dir", "checkpoint", "n_super", "subs_per_super", "dim", "n_instances", "n_test",
      "multilabel_rate", "label_drop_rate", "cluster_spread"};
  return keys;
}

bool parse_bool(std::string_view text, std::string_view key) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(std::string(key) + " expects true or false, got '" + std::string(text) + "'");
}

// Re-labels parse failures as config errors for the exit-code contract.
template <typename F>
auto as_config(std::string_view key, F&& f) {
  try {
    return f();
  } catch (const FormatError& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

std::size_t count_value(const ConfigMap& m, std::string_view key, std::size_t fallback) {
  auto v = m.get(key);
  if (!v) return fallback;
  const long long n = as_config(key, [&] { return parse_int(*v, key); });
  if (n < 0) throw ConfigError(std::string(key) + " must be non-negative");
  return static_cast<std::size_t>(n);
}

double real_value(const ConfigMap& m, std::string_view key, double fallback) {
  auto v = m.get(key);
  if (!v) return fallback;
  return as_config(key, [&] { return parse_double(*v, key); });
}

}  // namespace

void ConfigMap::set(std::string key, std::string value) {
  std::string k(trim(key));
  if (!known_keys().contains(k)) throw ConfigError("unknown key '" + k + "'");
  values_[k] = std::string(trim(value));
}

std::optional<std::string> ConfigMap::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void ConfigMap::parse(std::string_view text) {
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + " is not key=value");
    set(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
}

void ConfigMap::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ConfigMap local;
  local.parse(buf.str());
  const auto base = path.parent_path();
  for (const auto& [key, value] : local.values_) {
    const bool is_path = key == "ontology" || key == "features" || key == "labels" ||
                         key == "index" || key == "out_dir" || key == "checkpoint";
    if (is_path && !value.empty() && std::filesystem::path(value).is_relative()) {
      values_[key] = (base / value).lexically_normal().string();
    } else {
      values_[key] = value;
    }
  }
}

ModelDefaults model_defaults(ModelKind kind) {
  switch (kind) {
    case ModelKind::kMlp: return {2e-3, {1.0, 1.0, 0.0}, 73};
    case ModelKind::kSiameseOnto: return {2e-3, {1.5, 1.0, 0.25}, 30};
    case ModelKind::kSiameseGcn: return {1e-3, {100.0, 100.0, 0.5}, 30};
    case ModelKind::kMlpGcn: return {1e-3, {1.0, 1.0, 0.0}, 30};
  }
  return {2e-3, {}, 30};
}

LossWeights parse_lambda(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw ConfigError("lambda expects three comma-separated values");
  LossWeights w{as_config("lambda", [&] { return parse_double(parts[0], "lambda1"); }),
                as_config("lambda", [&] { return parse_double(parts[1], "lambda2"); }),
                as_config("lambda", [&] { return parse_double(parts[2], "lambda3"); })};
  if (w.sub < 0 || w.super < 0 || w.embed < 0) throw ConfigError("lambda values must be >= 0");
  if (w.sub == 0 && w.super == 0 && w.embed == 0)
    throw ConfigError("at least one lambda must be positive");
  return w;
}

RunConfig RunConfig::resolve(const ConfigMap& m) {
  RunConfig c;
  if (auto v = m.get("model")) c.model = parse_model_kind(*v);
  const ModelDefaults defaults = model_defaults(c.model);
  c.lambda = m.get("lambda") ? parse_lambda(*m.get("lambda")) : defaults.lambda;
  c.lr = real_value(m, "lr", defaults.lr);
  c.weight_decay = real_value(m, "weight_decay", 1e-4);
  c.epochs = count_value(m, "epochs", defaults.epochs);
  c.batch_size = count_value(m, "batch_size", 64);
  c.dropout = real_value(m, "dropout", kDefaultDropout);
  if (auto v = m.get("pairing")) c.pairing = parse_pairing_policy(*v);
  if (auto v = m.get("corr_method")) c.corr_method = parse_corr_method(*v);
  c.t = real_value(m, "t", 0.08);
  c.p = real_value(m, "p", 0.2);
  if (auto v = m.get("head_activation")) c.head_activation = parse_head_activation(*v);
  if (auto v = m.get("gcn_final_activation"))
    c.gcn_final_activation = parse_bool(*v, "gcn_final_activation");

  if (auto v = m.get("seed")) {
    c.seed = static_cast<std::uint64_t>(as_config("seed", [&] { return parse_int(*v, "seed"); }));
  } else if (const char* env = std::getenv("ONTOWEAK_SEED"); env != nullptr && *env != '\0') {
    c.seed = static_cast<std::uint64_t>(
        as_config("ONTOWEAK_SEED", [&] { return parse_int(env, "ONTOWEAK_SEED"); }));
  }
  c.feature_dim = count_value(m, "feature_dim", kFeatureDim);
  c.val_fraction = real_value(m, "val_fraction", 0.2);
  if (auto v = m.get("clip_pooling")) c.clip_pooling = parse_bool(*v, "clip_pooling");
  if (auto v = m.get("deterministic")) c.deterministic = parse_bool(*v, "deterministic");

  if (auto v = m.get("ontology")) c.ontology = *v;
  if (auto v = m.get("features")) c.features = *v;
  if (auto v = m.get("labels")) c.labels = *v;
  if (auto v = m.get("index")) c.index = *v;
  if (auto v = m.get("out_dir")) c.out_dir = *v;
  if (auto v = m.get("checkpoint")) c.checkpoint = *v;

  c.synth.n_super = count_value(m, "n_super", c.synth.n_super);
  c.synth.subs_per_super = count_value(m, "subs_per_super", c.synth.subs_per_super);
  c.synth.dim = count_value(m, "dim", c.synth.dim);
  c.synth.n_instances = count_value(m, "n_instances", c.synth.n_instances);
  c.synth.multilabel_rate = real_value(m, "multilabel_rate", c.synth.multilabel_rate);
  c.synth.label_drop_rate = real_value(m, "label_drop_rate", c.synth.label_drop_rate);
  c.synth.cluster_spread = real_value(m, "cluster_spread", c.synth.cluster_spread);
  c.synth.seed = c.seed;
  c.synth.n_test = count_value(m, "n_test", 0);

  if (!(c.t > 0.0 && c.t < 1.0)) throw ConfigError("t must be in (0, 1)");
  if (!(c.p > 0.0 && c.p <= 1.0)) throw ConfigError("p must be in (0, 1]");
  if (c.batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  if (!(c.lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(c.weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(c.val_fraction >= 0.0 && c.val_fraction < 1.0))
    throw ConfigError("val_fraction must be in [0, 1)");
  if (c.feature_dim == 0) throw ConfigError("feature_dim must be positive");
  return c;
}

std::string RunConfig::to_text(bool with_io) const {
  std::ostringstream out;
  auto kv = [&out](std::string_view k, const std::string& v) { out << k << '=' << v << '\n'; };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  kv("model", std::string(to_string(model)));
  kv("lambda", format_double(lambda.sub) + "," + format_double(lambda.super) + "," +
                   format_double(lambda.embed));
  kv("lr", format_double(lr));
  kv("weight_decay", format_double(weight_decay));
  kv("epochs", std::to_string(epochs));
  kv("batch_size", std::to_string(batch_size));
  kv("dropout", format_double(dropout));
  kv("pairing", std::string(to_string(pairing)));
  kv("corr_method", std::string(to_string(corr_method)));
  kv("t", format_double(t));
  kv("p", format_double(p));
  kv("head_activation", std::string(to_string(head_activation)));
  kv("gcn_final_activation", b(gcn_final_activation));
  kv("seed", std::to_string(seed));
  kv("feature_dim", std::to_string(feature_dim));
  kv("val_fraction", format_double(val_fraction));
  if (!with_io) return out.str();
  kv("clip_pooling", b(clip_pooling));
  kv("deterministic", b(deterministic));
  kv("ontology", ontology.string());
  kv("features", features.string());
  kv("labels", labels.string());
  kv("index", index.string());
  kv("out_dir", out_dir.string());
  kv("checkpoint", checkpoint.string());
  kv("n_super", std::to_string(synth.n_super));
  kv("subs_per_super", std::to_string(synth.subs_per_super));
  kv("dim", std::to_string(synth.dim));
  kv("n_instances", std::to_string(synth.n_instances));
  kv("n_test", std::to_string(synth.n_test));
  kv("multilabel_rate", format_double(synth.multilabel_rate));
  kv("label_drop_rate", format_double(synth.label_drop_rate));
  kv("cluster_spread", format_double(synth.cluster_spread));
  return out.str();
}

ModelSpec RunConfig::model_spec() const {
  return ModelSpec{model, feature_dim, dropout, head_activation, gcn_final_activation};
}

}  // namespace ontoweak
