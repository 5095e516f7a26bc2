#pragma once

#include <optional>
#include <span>

#include "prw/autodiff.hpp"
#include "prw/episode.hpp"
#include "prw/protonet.hpp"
#include "prw/walk.hpp"

namespace prw {

struct EpisodeObjective {
  ad::Var total;        // L_S + lambda * (L_walker + L_visit), 1x1
  ad::Var query_probs;  // [N_c*N_q x N_c]
  std::optional<WalkTerms> walk;  // absent when the episode has no unlabelled points
  LossBreakdown losses;
  std::size_t clamp_events = 0;
};

// Builds the training objective for one episode on `tape`. Prototypes come
// from the labelled support; the supervised term is scored on the query set
// and the walk runs over the unlabelled support. When lambda is zero the walk
// terms are still evaluated for reporting but do not enter `total`. A single
// unlabelled point forces tau = 0.
EpisodeObjective episode_objective(ad::Tape& tape, const EmbeddingNet& net,
                                   std::span<const ad::Var> params, const Episode& episode,
                                   const PRWConfig& config);

}  // namespace prw
