#include "prw/config.hpp"

#include <fstream>
#include <optional>
#include <type_traits>
#include <set>
#include <string>

#include "prw/errors.hpp"

namespace prw {

using nlohmann::json;

namespace {

// Walks one JSON object, handing out typed fields and rejecting any key that
// was never asked for.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    const json& v = node_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("");
      } else if constexpr (std::is_unsigned_v<T>) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      }
      out = v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError("invalid value for '" + child(key) + "'");
    }
  }

  void read_path(const char* key, std::filesystem::path& out) {
    std::string s = out.string();
    read(key, s);
    out = s;
  }

  void read_sizes(const char* key, std::vector<std::size_t>& out) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    const json& v = node_.at(key);
    if (!v.is_array()) throw ConfigError("invalid value for '" + child(key) + "': expected an array");
    std::vector<std::size_t> vals;
    for (const auto& e : v) {
      if (!e.is_number_unsigned() || e.get<std::size_t>() == 0) {
        throw ConfigError("invalid value for '" + child(key) + "': expected positive integers");
      }
      vals.push_back(e.get<std::size_t>());
    }
    out = std::move(vals);
  }

  std::optional<Section> sub(const char* key) {
    seen_.insert(key);
    if (!node_.contains(key)) return std::nullopt;
    return Section(node_.at(key), child(key));
  }

  void finish() const {
    for (const auto& [key, _] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + child(key.c_str()) + "'");
    }
  }

  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_episode(Section& s, EpisodeSpec& e) {
  s.read("n_classes", e.n_classes);
  s.read("shots", e.shots);
  s.read("unlabeled_per_class", e.unlabeled_per_class);
  s.read("queries_per_class", e.queries_per_class);
  s.read("distractor_classes", e.distractor_classes);
  s.finish();
}

InferenceMode read_mode(Section& s, const char* key, InferenceMode fallback) {
  std::string name(to_string(fallback));
  s.read(key, name);
  try {
    return parse_inference_mode(name);
  } catch (const ConfigError&) {
    throw ConfigError("invalid value for '" + s.child(key) + "': " + name);
  }
}

template <typename F>
void checked(const std::string& key, F&& check) {
  try {
    check();
  } catch (const ContractError& e) {
    throw ConfigError("invalid '" + key + "': " + e.what());
  }
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  RunConfig c;
  Section root(doc, "");
  root.read_path("dataset", c.dataset);
  root.read_path("output_dir", c.output_dir);
  root.read("label_fraction", c.label_fraction);
  root.read("split_seed", c.split_seed);
  root.read("max_episodes", c.train.max_episodes);
  root.read("seed", c.train.seed);
  if (auto s = root.sub("classes")) {
    s->read("train", c.classes.train);
    s->read("val", c.classes.val);
    s->read("test", c.classes.test);
    s->finish();
  }
  if (auto s = root.sub("network")) {
    s->read_sizes("hidden", c.train.hidden);
    s->read("embedding_dim", c.train.embedding_dim);
    s->finish();
  }
  if (auto s = root.sub("episode")) read_episode(*s, c.train.episode);
  if (auto s = root.sub("prw")) {
    s->read("tau", c.train.prw.tau);
    s->read("alpha", c.train.prw.alpha);
    s->read("lambda", c.train.prw.lambda);
    s->finish();
  }
  if (auto s = root.sub("optimizer")) {
    s->read("beta1", c.train.adam.beta1);
    s->read("beta2", c.train.adam.beta2);
    s->read("epsilon", c.train.adam.epsilon);
    s->read("lr", c.train.lr);
    s->read("halving_interval", c.train.halving_interval);
    s->finish();
  }
  if (auto s = root.sub("validation")) {
    s->read("interval", c.train.validation_interval);
    s->read("episodes", c.train.validation_episodes);
    c.train.validation_mode = read_mode(*s, "mode", c.train.validation_mode);
    s->finish();
  }
  c.eval.episode = c.train.episode;
  if (auto s = root.sub("eval")) {
    s->read("episodes", c.eval.episodes);
    s->read("seed", c.eval.seed);
    c.eval.mode = read_mode(*s, "mode", c.eval.mode);
    if (auto e = s->sub("episode")) read_episode(*e, c.eval.episode);
    s->finish();
  }
  root.finish();

  if (!(c.label_fraction > 0.0 && c.label_fraction <= 1.0)) {
    throw ConfigError("invalid 'label_fraction': must be in (0, 1]");
  }
  checked("episode", [&] { c.train.episode.validate(); });
  checked("eval.episode", [&] { c.eval.episode.validate(); });
  checked("prw", [&] { c.train.prw.validate(); });
  checked("optimizer", [&] { c.train.adam.validate(); });
  checked("optimizer", [&] { c.train.validate(); });
  if (c.eval.episodes == 0) throw ConfigError("invalid 'eval.episodes': must be >= 1");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

json to_json(const RunConfig& c) {
  json t = c.train.to_json();
  json doc = {
      {"dataset", c.dataset.string()},
      {"output_dir", c.output_dir.string()},
      {"classes", {{"train", c.classes.train}, {"val", c.classes.val}, {"test", c.classes.test}}},
      {"label_fraction", c.label_fraction},
      {"split_seed", c.split_seed},
      {"max_episodes", t["max_episodes"]},
      {"seed", t["seed"]},
      {"network", t["network"]},
      {"episode", t["episode"]},
      {"prw", t["prw"]},
      {"optimizer", t["optimizer"]},
      {"validation", t["validation"]},
      {"eval",
       {{"episodes", c.eval.episodes},
        {"seed", c.eval.seed},
        {"mode", std::string(to_string(c.eval.mode))},
        {"episode",
         {{"n_classes", c.eval.episode.n_classes},
          {"shots", c.eval.episode.shots},
          {"unlabeled_per_class", c.eval.episode.unlabeled_per_class},
          {"queries_per_class", c.eval.episode.queries_per_class},
          {"distractor_classes", c.eval.episode.distractor_classes}}}}},
  };
  return doc;
}

ResolvedPartition resolve_partition(const ClassPartition& p, std::size_t n_classes) {
  ResolvedPartition r;
  if (p.train == 0 && p.val == 0 && p.test == 0) {
    r.train_count = n_classes;
    return r;
  }
  if (p.train + p.val + p.test > n_classes) {
    throw CapacityError("class partition needs " + std::to_string(p.train + p.val + p.test) +
                        " classes, dataset has " + std::to_string(n_classes));
  }
  r.train_first = 0;
  r.train_count = p.train;
  r.val_first = p.train;
  r.val_count = p.val;
  r.test_first = p.train + p.val;
  r.test_count = p.test;
  return r;
}

}  // namespace prw
