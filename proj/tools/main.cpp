// prw: command-line driver for data generation, training, evaluation and
// analysis. Exit codes: 0 ok, 1 unexpected, 2 config/usage, 3 capacity,
// 4 numeric, 5 I/O, 6 data.

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "prw/errors.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kConfig = 2,
  kCapacity = 3,
  kNumeric = 4,
  kIo = 5,
  kData = 6,
};

void add_eval_flags(CLI::App* cmd, prw::cli::EvalOptions& o) {
  cmd->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  cmd->add_option("--config", o.config, "Run configuration (dataset, partition, protocol)");
  cmd->add_option("--dataset", o.dataset, "Dataset directory (overrides config)");
  cmd->add_option("--split", o.split, "Class split to sample from: train, val or test");
  cmd->add_option("--mode", o.mode, "Inference: plain, ssinfer or ssinfer-filter");
  cmd->add_option("--ways", o.ways, "Classes per episode");
  cmd->add_option("--shots", o.shots, "Labeled support points per class");
  cmd->add_option("--unlabeled", o.unlabeled, "Unlabeled points per class");
  cmd->add_option("--queries", o.queries, "Query points per class");
  cmd->add_option("--distractors", o.distractors, "Distractor classes per episode");
  cmd->add_option("--episodes", o.episodes, "Number of episodes");
  cmd->add_option("--seed", o.seed, "Episode seed");
  cmd->add_option("--out", o.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prototypical random-walk few-shot learning"};
  app.require_subcommand(1);

  prw::cli::GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic warped-cluster dataset");
  gen_cmd->add_option("--classes", gen.classes, "Number of classes");
  gen_cmd->add_option("--per-class", gen.per_class, "Points per class");
  gen_cmd->add_option("--latent-dim", gen.latent_dim, "Latent dimension");
  gen_cmd->add_option("--input-dim", gen.input_dim, "Feature dimension");
  gen_cmd->add_option("--warp-depth", gen.warp_depth, "Number of rotation + tanh-mix layers");
  gen_cmd->add_option("--cluster-std", gen.shape.cluster_std, "Within-class latent stddev");
  gen_cmd->add_option("--mean-spread", gen.shape.mean_spread, "Stddev of class means");
  gen_cmd->add_option("--nuisance-std", gen.shape.nuisance_std, "Stddev of class-independent noise");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_flag("--force", gen.force, "Overwrite an existing dataset");

  std::filesystem::path train_config;
  prw::cli::TrainOverrides train;
  auto* train_cmd = app.add_subcommand("train", "Meta-train an embedding network");
  train_cmd->add_option("config", train_config, "Run configuration (JSON)")->required();
  train_cmd->add_option("--dataset", train.dataset, "Dataset directory");
  train_cmd->add_option("--out", train.out, "Output directory");
  train_cmd->add_option("--lambda", train.lambda, "Random-walk loss weight (0 = PN baseline)");
  train_cmd->add_option("--alpha", train.alpha, "Walker decay");
  train_cmd->add_option("--tau", train.tau, "Steps among unlabeled points");
  train_cmd->add_option("--episodes", train.episodes, "Training episodes");
  train_cmd->add_option("--distractors", train.distractors, "Distractor classes per episode");
  train_cmd->add_option("--seed", train.seed, "Training seed");
  train_cmd->add_option("--log-every", train.log_every, "Progress line interval (0 = silent)");

  prw::cli::EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on sampled episodes");
  add_eval_flags(eval_cmd, eval);

  prw::cli::AnalyzeOptions analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Landing probabilities, visit splits, sweeps, embeddings");
  add_eval_flags(analyze_cmd, analyze.common);
  analyze_cmd->add_flag("--landing", analyze.landing, "Landing probability per tau");
  analyze_cmd->add_option("--tau-max", analyze.tau_max, "Largest tau for --landing");
  analyze_cmd->add_flag("--visit", analyze.visit, "Clean/distractor visit split");
  analyze_cmd->add_option("--higher-way", analyze.higher_way, "Comma-separated way counts")->delimiter(',');
  analyze_cmd->add_option("--baseline", analyze.baseline, "Baseline checkpoint for relative improvement");
  analyze_cmd->add_flag("--export-embeddings", analyze.export_embeddings, "Write embeddings.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*gen_cmd) prw::cli::gen_data(gen);
    if (*train_cmd) prw::cli::train(train_config, train);
    if (*eval_cmd) prw::cli::eval(eval);
    if (*analyze_cmd) prw::cli::analyze(analyze);
  } catch (const prw::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const prw::ContractError& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kConfig;
  } catch (const prw::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return kCapacity;
  } catch (const prw::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const prw::DegenerateError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const prw::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const prw::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnexpected;
  }
  return kOk;
}
