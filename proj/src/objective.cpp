#include "prw/objective.hpp"

namespace prw {

EpisodeObjective episode_objective(ad::Tape& tape, const EmbeddingNet& net,
                                   std::span<const ad::Var> params, const Episode& episode,
                                   const PRWConfig& config) {
  config.validate();
  ClampCounter clamps;
  EpisodeObjective out;

  ad::Var support = net.embed(params, tape.constant(episode.support));
  ad::Var query = net.embed(params, tape.constant(episode.query));
  ad::Var protos = compute_prototypes(support, episode.support_labels, episode.n_classes());
  out.query_probs = classify(query, protos);
  ad::Var l_s = supervised_loss(out.query_probs, episode.query_labels, &clamps);

  double walker = 0.0;
  double visit = 0.0;
  ad::Var rw;
  if (episode.unlabeled.rows() > 0) {
    ad::Var unlabeled = net.embed(params, tape.constant(episode.unlabeled));
    const std::size_t tau = episode.unlabeled.rows() == 1 ? 0 : config.tau;
    out.walk = build_walk_graph(protos, unlabeled, tau);
    ad::Var l_walker = walker_loss(out.walk->walkers, config.alpha, &clamps);
    ad::Var l_visit = visit_loss(out.walk->proto_to_point, &clamps);
    walker = l_walker.value()(0, 0);
    visit = l_visit.value()(0, 0);
    rw = ad::add(l_walker, l_visit);
  }

  out.losses = total_loss(l_s.value()(0, 0), walker, visit, config);
  out.total = (config.lambda == 0.0 || !rw.valid()) ? l_s : ad::add(l_s, ad::scale(rw, config.lambda));
  out.clamp_events = clamps.count;
  return out;
}

}  // namespace prw
