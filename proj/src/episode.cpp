#include "prw/episode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "prw/errors.hpp"

namespace prw {

Rng derived_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

DatasetSplit split_dataset(std::shared_ptr<const Dataset> ds, double fraction, std::uint64_t seed) {
  if (!ds) throw ContractError("split_dataset: null dataset");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ContractError("split_dataset: label fraction must be in (0, 1]");
  }
  DatasetSplit split;
  split.label_fraction = fraction;
  split.seed = seed;
  Rng rng = derived_rng(seed, 0x5311, 0);
  for (const auto& c : ds->classes()) {
    const std::size_t n = c.points.rows();
    if (n == 0) throw DataError("class '" + c.id + "' is empty");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto rounded = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    const std::size_t n_labeled = std::clamp<std::size_t>(rounded, 1, n);
    std::vector<std::size_t> lab(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_labeled));
    std::vector<std::size_t> unl(order.begin() + static_cast<std::ptrdiff_t>(n_labeled), order.end());
    std::sort(lab.begin(), lab.end());
    std::sort(unl.begin(), unl.end());
    split.labeled.push_back(std::move(lab));
    split.unlabeled.push_back(std::move(unl));
  }
  split.data = std::move(ds);
  return split;
}

void EpisodeSpec::validate() const {
  if (n_classes < 2) throw ContractError("episode needs at least 2 classes");
  if (shots < 1) throw ContractError("episode needs at least 1 shot");
  if (queries_per_class < 1) throw ContractError("episode needs at least 1 query per class");
}

namespace {

std::vector<std::size_t> draw(const std::vector<std::size_t>& pool, std::size_t k, Rng& rng) {
  std::vector<std::size_t> out;
  out.reserve(k);
  std::sample(pool.begin(), pool.end(), std::back_inserter(out), static_cast<std::ptrdiff_t>(k), rng);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace

void check_capacity(const DatasetSplit& split, const EpisodeSpec& spec) {
  spec.validate();
  if (!split.data) throw ContractError("check_capacity: split has no dataset");
  const Dataset& ds = *split.data;
  const std::size_t n_total = spec.n_classes + spec.distractor_classes;
  if (ds.num_classes() < n_total) {
    throw CapacityError("episode needs " + std::to_string(n_total) + " classes, dataset has " +
                        std::to_string(ds.num_classes()));
  }
  const std::size_t labeled_needed = spec.shots + spec.queries_per_class;
  for (std::size_t c = 0; c < ds.num_classes(); ++c) {
    if (split.labeled[c].size() < labeled_needed) {
      throw CapacityError("class '" + ds.cls(c).id + "' has " + std::to_string(split.labeled[c].size()) +
                          " labeled points, episodes need " + std::to_string(labeled_needed));
    }
    if (split.unlabeled[c].size() < spec.unlabeled_per_class) {
      throw CapacityError("class '" + ds.cls(c).id + "' has " + std::to_string(split.unlabeled[c].size()) +
                          " unlabeled points, episodes need " + std::to_string(spec.unlabeled_per_class));
    }
  }
}

Episode sample_episode(const DatasetSplit& split, const EpisodeSpec& spec, Rng& rng) {
  spec.validate();
  if (!split.data) throw ContractError("sample_episode: split has no dataset");
  const Dataset& ds = *split.data;
  const std::size_t n_total = spec.n_classes + spec.distractor_classes;
  if (ds.num_classes() < n_total) {
    throw CapacityError("episode needs " + std::to_string(n_total) + " classes, dataset has " +
                        std::to_string(ds.num_classes()));
  }

  std::vector<std::size_t> all(ds.num_classes());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::size_t> picked = draw(all, n_total, rng);

  Episode ep;
  ep.class_ids.assign(picked.begin(), picked.begin() + static_cast<std::ptrdiff_t>(spec.n_classes));
  const std::size_t per_class_labeled = spec.shots + spec.queries_per_class;

  std::vector<std::pair<PointRef, bool>> unlabeled_refs;
  for (std::size_t e = 0; e < n_total; ++e) {
    const std::size_t c = picked[e];
    const bool distractor = e >= spec.n_classes;
    const auto& cls = ds.cls(c);
    if (!distractor) {
      if (split.labeled[c].size() < per_class_labeled) {
        throw CapacityError("class '" + cls.id + "' has " + std::to_string(split.labeled[c].size()) +
                            " labeled points, episode needs " + std::to_string(per_class_labeled));
      }
      auto lab = draw(split.labeled[c], per_class_labeled, rng);
      for (std::size_t k = 0; k < lab.size(); ++k) {
        const bool is_support = k < spec.shots;
        (is_support ? ep.support_labels : ep.query_labels).push_back(e);
        (is_support ? ep.support_refs : ep.query_refs).push_back({c, lab[k]});
      }
    }
    if (split.unlabeled[c].size() < spec.unlabeled_per_class) {
      throw CapacityError("class '" + cls.id + "' has " + std::to_string(split.unlabeled[c].size()) +
                          " unlabeled points, episode needs " +
                          std::to_string(spec.unlabeled_per_class));
    }
    for (auto idx : draw(split.unlabeled[c], spec.unlabeled_per_class, rng)) {
      unlabeled_refs.push_back({{c, idx}, distractor});
    }
  }
  std::shuffle(unlabeled_refs.begin(), unlabeled_refs.end(), rng);

  auto gather = [&](const std::vector<PointRef>& refs) {
    Matrix m(refs.size(), ds.dim());
    for (std::size_t i = 0; i < refs.size(); ++i) {
      auto src = ds.cls(refs[i].cls).points.row(refs[i].index);
      std::copy(src.begin(), src.end(), m.row(i).begin());
    }
    return m;
  };
  for (const auto& [ref, flag] : unlabeled_refs) {
    ep.unlabeled_refs.push_back(ref);
    ep.unlabeled_is_distractor.push_back(flag);
  }
  ep.support = gather(ep.support_refs);
  ep.query = gather(ep.query_refs);
  ep.unlabeled = gather(ep.unlabeled_refs);
  return ep;
}

Episode EpisodeStream::operator()(std::size_t k) const {
  if (split == nullptr) throw ContractError("episode stream has no split");
  Rng rng = derived_rng(seed, 0xe915, k);
  return sample_episode(*split, spec, rng);
}

}  // namespace prw
