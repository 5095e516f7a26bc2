#include "prw/trainer.hpp"

#include <ostream>
#include <string>

#include "prw/analysis.hpp"
#include "prw/errors.hpp"
#include "prw/objective.hpp"
#include "prw/protonet.hpp"

namespace prw {

using nlohmann::json;

void TrainConfig::validate() const {
  episode.validate();
  prw.validate();
  adam.validate();
  if (!(lr > 0.0)) throw ContractError("learning rate must be positive");
  if (halving_interval < 1) throw ContractError("halving interval must be >= 1");
  if (embedding_dim < 2) throw ContractError("embedding dimension must be >= 2");
  if (validation_interval > 0 && validation_episodes == 0) {
    throw ContractError("validation needs at least one episode");
  }
}

json TrainConfig::to_json() const {
  return {
      {"episode",
       {{"n_classes", episode.n_classes},
        {"shots", episode.shots},
        {"unlabeled_per_class", episode.unlabeled_per_class},
        {"queries_per_class", episode.queries_per_class},
        {"distractor_classes", episode.distractor_classes}}},
      {"prw", {{"tau", prw.tau}, {"alpha", prw.alpha}, {"lambda", prw.lambda}}},
      {"optimizer",
       {{"beta1", adam.beta1},
        {"beta2", adam.beta2},
        {"epsilon", adam.epsilon},
        {"lr", lr},
        {"halving_interval", halving_interval}}},
      {"max_episodes", max_episodes},
      {"validation",
       {{"interval", validation_interval},
        {"episodes", validation_episodes},
        {"mode", std::string(to_string(validation_mode))}}},
      {"network", {{"hidden", hidden}, {"embedding_dim", embedding_dim}}},
      {"seed", seed},
  };
}

std::string TrainConfig::digest() const { return fnv1a_hex(to_json().dump()); }

std::string TrainConfig::tag() const { return prw.lambda == 0.0 ? "pn-baseline" : "prwn"; }

TrainResult train(const TrainConfig& config, const DatasetSplit& train_split,
                  const DatasetSplit* validation_split, const ProgressFn& progress) {
  config.validate();
  if (!train_split.data) throw ContractError("train: split has no dataset");
  check_capacity(train_split, config.episode);

  std::vector<std::size_t> sizes{train_split.data->dim()};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(config.embedding_dim);
  EmbeddingNet net = EmbeddingNet::initialized(sizes, config.seed);
  AdamState adam = AdamState::zeros_like(net.params());

  TrainResult result;
  result.episodes.reserve(config.max_episodes);
  const bool validating = validation_split != nullptr && config.validation_interval > 0;
  if (validating) check_capacity(*validation_split, config.episode);
  bool have_best = false;

  auto finish_checkpoint = [&](std::size_t episode, double val_acc) {
    Checkpoint c = Checkpoint::from_net(net);
    c.config_digest = config.digest();
    c.tag = config.tag();
    c.episode = episode;
    c.validation_accuracy = val_acc;
    return c;
  };

  auto validate_now = [&](std::size_t episode) {
    // Score the float32-rounded weights that a checkpoint would hold.
    Checkpoint candidate = finish_checkpoint(episode, 0.0);
    const EpisodeStream stream{validation_split, config.episode, config.seed ^ 0x7a11d};
    const auto r = evaluate(candidate.net(), stream, config.validation_episodes, config.validation_mode);
    ValidationLog log{episode, r.summary.mean, r.summary.ci95, false};
    if (!have_best || r.summary.mean > result.checkpoint.validation_accuracy) {
      candidate.validation_accuracy = r.summary.mean;
      result.checkpoint = std::move(candidate);
      have_best = true;
      log.best = true;
    }
    result.validation.push_back(log);
  };

  const EpisodeStream stream{&train_split, config.episode, config.seed};
  for (std::size_t k = 0; k < config.max_episodes; ++k) {
    const Episode episode = stream(k);
    ad::Tape tape;
    auto params = net.bind(tape, true);
    EpisodeObjective obj = episode_objective(tape, net, params, episode, config.prw);
    std::vector<Matrix> grads;
    try {
      grads = tape.gradient(obj.total, params);
    } catch (const NumericError& e) {
      throw NumericError("episode " + std::to_string(k) + ": " + e.what());
    }

    const double lr = lr_schedule(k, config.lr, config.halving_interval);
    try {
      adam_step(adam, net.params(), grads, lr, config.adam);
    } catch (const NumericError& e) {
      throw NumericError("episode " + std::to_string(k) + ": " + e.what());
    }

    EpisodeLog log;
    log.episode = k;
    log.lr = lr;
    log.losses = obj.losses;
    log.query_accuracy = accuracy(argmax_rows(obj.query_probs.value()), episode.query_labels);
    log.clamp_events = obj.clamp_events;
    result.episodes.push_back(log);
    if (progress) progress(log);

    if (validating && (k + 1) % config.validation_interval == 0) validate_now(k + 1);
  }
  if (validating && config.max_episodes % config.validation_interval != 0) validate_now(config.max_episodes);
  if (!have_best) result.checkpoint = finish_checkpoint(config.max_episodes, 0.0);
  return result;
}

void write_episode_csv(std::ostream& out, std::span<const EpisodeLog> rows) {
  out << "episode,lr,l_supervised,l_walker,l_visit,l_rw,total,lambda,alpha,query_accuracy,clamp_events\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.episode << ',' << r.lr << ',' << r.losses.supervised << ',' << r.losses.walker << ','
        << r.losses.visit << ',' << r.losses.rw << ',' << r.losses.total << ',' << r.losses.lambda << ','
        << r.losses.alpha << ',' << r.query_accuracy << ',' << r.clamp_events << '\n';
  }
}

void write_validation_csv(std::ostream& out, std::span<const ValidationLog> rows) {
  out << "episode,accuracy,ci95,best\n";
  out.precision(17);
  for (const auto& r : rows) out << r.episode << ',' << r.accuracy << ',' << r.ci95 << ',' << (r.best ? 1 : 0) << '\n';
}

}  // namespace prw
