#include "commands.hpp"

#include <fstream>
#include <iostream>
#include <memory>

#include <json.hpp>

#include "prw/analysis.hpp"
#include "prw/checkpoint.hpp"
#include "prw/dataset.hpp"
#include "prw/errors.hpp"
#include "prw/trainer.hpp"

namespace prw::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

struct Splits {
  DatasetSplit train, val, test;
  bool has_val = false;
  bool has_test = false;
};

Splits load_splits(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("no dataset given (set 'dataset' or pass --dataset)");
  const Dataset all = load_dataset(cfg.dataset);
  const ResolvedPartition p = resolve_partition(cfg.classes, all.num_classes());
  Splits s;
  auto make = [&](std::size_t first, std::size_t count) {
    return split_dataset(std::make_shared<const Dataset>(all.slice(first, count)), cfg.label_fraction,
                         cfg.split_seed);
  };
  s.train = make(p.train_first, p.train_count);
  if (p.val_count > 0) {
    s.val = make(p.val_first, p.val_count);
    s.has_val = true;
  }
  if (p.test_count > 0) {
    s.test = make(p.test_first, p.test_count);
    s.has_test = true;
  }
  return s;
}

const DatasetSplit& pick_split(const Splits& s, const std::string& name) {
  if (name == "train") return s.train;
  if (name == "val") {
    if (!s.has_val) throw ConfigError("config defines no validation classes");
    return s.val;
  }
  if (name == "test") {
    // Without an explicit partition every class is a training class.
    return s.has_test ? s.test : s.train;
  }
  throw ConfigError("unknown split '" + name + "' (expected train, val or test)");
}

RunConfig eval_config(const EvalOptions& o) {
  RunConfig cfg = o.config ? load_run_config(*o.config) : parse_run_config(json::object());
  if (o.dataset) cfg.dataset = *o.dataset;
  if (o.mode) cfg.eval.mode = parse_inference_mode(*o.mode);
  if (o.ways) cfg.eval.episode.n_classes = *o.ways;
  if (o.shots) cfg.eval.episode.shots = *o.shots;
  if (o.unlabeled) cfg.eval.episode.unlabeled_per_class = *o.unlabeled;
  if (o.queries) cfg.eval.episode.queries_per_class = *o.queries;
  if (o.distractors) cfg.eval.episode.distractor_classes = *o.distractors;
  if (o.episodes) cfg.eval.episodes = *o.episodes;
  if (o.seed) cfg.eval.seed = *o.seed;
  try {
    cfg.eval.episode.validate();
  } catch (const ContractError& e) {
    throw ConfigError(std::string("invalid evaluation episode: ") + e.what());
  }
  if (cfg.eval.episodes == 0) throw ConfigError("--episodes must be >= 1");
  return cfg;
}

json summary_json(const AccuracySummary& s) { return {{"mean", s.mean}, {"ci95", s.ci95}, {"episodes", s.n}}; }

}  // namespace

void gen_data(const GenDataOptions& o) {
  if (o.out.empty()) throw ConfigError("--out is required");
  if (fs::exists(o.out / "manifest.json") && !o.force) {
    throw IoError("refusing to overwrite dataset in " + o.out.string() + " (pass --force)");
  }
  const Dataset ds =
      generate_synthetic_dataset(o.classes, o.per_class, o.latent_dim, o.input_dim, o.warp_depth, o.seed, o.shape);
  save_dataset(ds, o.out, o.force);
  std::cout << "wrote " << ds.num_classes() << " classes x " << o.per_class << " points (dim " << ds.dim()
            << ") to " << o.out.string() << '\n';
}

void train(const fs::path& config_path, const TrainOverrides& o) {
  RunConfig cfg = load_run_config(config_path);
  if (o.dataset) cfg.dataset = *o.dataset;
  if (o.out) cfg.output_dir = *o.out;
  if (o.lambda) cfg.train.prw.lambda = *o.lambda;
  if (o.alpha) cfg.train.prw.alpha = *o.alpha;
  if (o.tau) cfg.train.prw.tau = *o.tau;
  if (o.episodes) cfg.train.max_episodes = *o.episodes;
  if (o.distractors) cfg.train.episode.distractor_classes = *o.distractors;
  if (o.seed) cfg.train.seed = *o.seed;
  cfg = parse_run_config(to_json(cfg));  // re-validate after overrides

  const Splits splits = load_splits(cfg);
  ensure_dir(cfg.output_dir);
  {
    auto out = open_out(cfg.output_dir / "config.json");
    out << to_json(cfg).dump(2) << '\n';
  }

  const std::string tag = cfg.train.tag();
  std::cerr << "training " << tag << " (lambda " << cfg.train.prw.lambda << ", tau " << cfg.train.prw.tau
            << ", alpha " << cfg.train.prw.alpha << ") for " << cfg.train.max_episodes << " episodes\n";
  const ProgressFn progress = [&](const EpisodeLog& log) {
    if (o.log_every == 0 || (log.episode + 1) % o.log_every != 0) return;
    std::cerr << "episode " << log.episode + 1 << " lr " << log.lr << " l_s " << log.losses.supervised
              << " l_walker " << log.losses.walker << " l_visit " << log.losses.visit << " total "
              << log.losses.total << '\n';
  };
  const TrainResult result = train(cfg.train, splits.train, splits.has_val ? &splits.val : nullptr, progress);

  save_checkpoint(result.checkpoint, cfg.output_dir / "checkpoint.prwc");
  {
    auto out = open_out(cfg.output_dir / "metrics.csv");
    write_episode_csv(out, result.episodes);
  }
  {
    auto out = open_out(cfg.output_dir / "validation.csv");
    write_validation_csv(out, result.validation);
  }
  const json summary = {
      {"tag", tag},
      {"config_digest", result.checkpoint.config_digest},
      {"episodes", cfg.train.max_episodes},
      {"checkpoint_episode", result.checkpoint.episode},
      {"validation_accuracy", result.checkpoint.validation_accuracy},
  };
  auto out = open_out(cfg.output_dir / "summary.json");
  out << summary.dump(2) << '\n';
  std::cout << "saved " << tag << " checkpoint from episode " << result.checkpoint.episode << " to "
            << (cfg.output_dir / "checkpoint.prwc").string() << '\n';
}

void eval(const EvalOptions& o) {
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  const RunConfig cfg = eval_config(o);
  const Splits splits = load_splits(cfg);
  const DatasetSplit& split = pick_split(splits, o.split);
  const EmbeddingNet net = ckpt.net();

  const EpisodeStream stream{&split, cfg.eval.episode, cfg.eval.seed};
  const EvalResult r = evaluate(net, stream, cfg.eval.episodes, cfg.eval.mode);
  std::cout << ckpt.tag << " " << to_string(cfg.eval.mode) << " " << cfg.eval.episode.n_classes << "-way "
            << cfg.eval.episode.shots << "-shot: accuracy " << r.summary.mean << " +/- " << r.summary.ci95
            << " over " << r.summary.n << " episodes\n";
  if (o.out) {
    ensure_dir(*o.out);
    {
      auto out = open_out(*o.out / "eval_episodes.csv");
      out << "episode,accuracy\n";
      out.precision(17);
      for (std::size_t k = 0; k < r.per_episode.size(); ++k) out << k << ',' << r.per_episode[k] << '\n';
    }
    const json report = {{"tag", ckpt.tag},
                         {"mode", std::string(to_string(cfg.eval.mode))},
                         {"split", o.split},
                         {"ways", cfg.eval.episode.n_classes},
                         {"shots", cfg.eval.episode.shots},
                         {"unlabeled_per_class", cfg.eval.episode.unlabeled_per_class},
                         {"distractor_classes", cfg.eval.episode.distractor_classes},
                         {"accuracy", summary_json(r.summary)}};
    auto out = open_out(*o.out / "eval_summary.json");
    out << report.dump(2) << '\n';
  }
}

void analyze(const AnalyzeOptions& o) {
  const Checkpoint ckpt = load_checkpoint(o.common.checkpoint);
  const RunConfig cfg = eval_config(o.common);
  const Splits splits = load_splits(cfg);
  const DatasetSplit& split = pick_split(splits, o.common.split);
  const EmbeddingNet net = ckpt.net();
  const fs::path dir = o.common.out.value_or(cfg.output_dir / "analysis");
  ensure_dir(dir);
  const EpisodeStream stream{&split, cfg.eval.episode, cfg.eval.seed};
  json summary = {{"tag", ckpt.tag}, {"split", o.common.split}, {"episodes", cfg.eval.episodes}};

  if (o.landing || o.visit) {
    if (cfg.eval.episode.unlabeled_per_class == 0) {
      throw ConfigError("landing/visit analysis needs unlabeled points (--unlabeled)");
    }
    std::vector<MetricsRecord> records;
    for (std::size_t k = 0; k < cfg.eval.episodes; ++k) {
      records.push_back(episode_metrics(net, stream(k), k, cfg.eval.mode, o.tau_max, cfg.train.prw));
    }
    {
      auto out = open_out(dir / "episodes.csv");
      write_metrics_csv(out, records, o.tau_max);
    }
    if (o.landing) {
      auto out = open_out(dir / "landing.csv");
      out << "tau,landing_probability,ci95\n";
      out.precision(17);
      json curve = json::array();
      for (std::size_t t = 0; t <= o.tau_max; ++t) {
        std::vector<double> vals;
        for (const auto& r : records)
          if (t < r.landing.size()) vals.push_back(r.landing[t]);
        if (vals.empty()) continue;
        const auto s = summarize(vals);
        out << t << ',' << s.mean << ',' << s.ci95 << '\n';
        curve.push_back(s.mean);
      }
      summary["landing"] = curve;
    }
    if (o.visit) {
      auto out = open_out(dir / "visit_split.csv");
      out << "episode,p_clean,p_dist\n";
      out.precision(17);
      double clean = 0.0;
      for (const auto& r : records) {
        out << r.episode << ',' << r.p_clean << ',' << r.p_dist << '\n';
        clean += r.p_clean;
      }
      summary["p_clean"] = clean / static_cast<double>(records.size());
    }
  }

  if (!o.higher_way.empty()) {
    std::optional<EmbeddingNet> base;
    if (o.baseline) base = load_checkpoint(*o.baseline).net();
    const auto rows = higher_way_sweep(net, split, o.higher_way, cfg.eval.episode, cfg.eval.episodes,
                                       cfg.eval.seed, cfg.eval.mode, base ? &*base : nullptr);
    auto out = open_out(dir / "higher_way.csv");
    out << "ways,accuracy,ci95,baseline_accuracy,relative_improvement\n";
    out.precision(17);
    json sweep = json::array();
    for (const auto& r : rows) {
      out << r.ways << ',' << r.model.mean << ',' << r.model.ci95 << ',';
      if (r.baseline) out << r.baseline->mean;
      out << ',';
      if (r.improvement) out << *r.improvement;
      out << '\n';
      json row = {{"ways", r.ways}, {"accuracy", summary_json(r.model)}};
      if (r.improvement) row["relative_improvement"] = *r.improvement;
      sweep.push_back(row);
    }
    summary["higher_way"] = sweep;
  }

  if (o.export_embeddings) {
    auto out = open_out(dir / "embeddings.csv");
    const Dataset& ds = *split.data;
    out << "class_index,class_id,labeled";
    for (std::size_t e = 0; e < net.output_dim(); ++e) out << ",e" << e;
    out << '\n';
    out.precision(9);
    for (std::size_t c = 0; c < ds.num_classes(); ++c) {
      const Matrix emb = net.embed(ds.cls(c).points);
      std::vector<bool> labeled(emb.rows(), false);
      for (auto i : split.labeled[c]) labeled[i] = true;
      for (std::size_t i = 0; i < emb.rows(); ++i) {
        out << c << ',' << ds.cls(c).id << ',' << (labeled[i] ? 1 : 0);
        for (double v : emb.row(i)) out << ',' << v;
        out << '\n';
      }
    }
  }

  auto out = open_out(dir / "summary.json");
  out << summary.dump(2) << '\n';
  std::cout << "analysis written to " << dir.string() << '\n';
}

}  // namespace prw::cli
