#pragma once

// K-way N-shot Q-query episode construction.
//
// Classes with fewer than N+Q records are ineligible. The K episode classes
// are drawn uniformly without replacement from the eligible ones; inside each
// class N+Q records are drawn without replacement, the first N forming the
// support set. All randomness comes from Xoshiro256 seeded with the episode
// seed, so an episode is a pure function of (dataset, spec, seed).

#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsk/embedding_store.hpp"
#include "fsk/error.hpp"
#include "fsk/rng.hpp"

namespace fsk {

struct EpisodeSpec {
  std::uint32_t ways = 5;
  std::uint32_t shots = 1;
  std::uint32_t queries_per_class = 15;

  std::uint32_t per_class() const { return shots + queries_per_class; }

  void validate() const {
    if (ways < 2) throw std::invalid_argument("ways must be >= 2");
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    if (queries_per_class < 1) throw std::invalid_argument("queries must be >= 1");
  }

  bool operator==(const EpisodeSpec&) const = default;
};

struct EpisodeItem {
  std::size_t record = 0;  // position in EmbeddingDataset::items
  std::uint32_t slot = 0;

  bool operator==(const EpisodeItem&) const = default;
};

/// Support and query sets are stored slot-major: all items of slot 0 first.
struct Episode {
  std::vector<std::uint32_t> class_map;  // slot -> dataset class
  std::vector<EpisodeItem> support;
  std::vector<EpisodeItem> query;

  std::size_t ways() const { return class_map.size(); }
  bool operator==(const Episode&) const = default;
};

class InsufficientSamples : public DataError {
 public:
  using DataError::DataError;
};

/// Dataset classes with at least `spec.per_class()` records, ascending.
inline std::vector<std::uint32_t> eligible_classes(const ClassIndex& index, const EpisodeSpec& spec) {
  std::vector<std::uint32_t> out;
  for (std::size_t c = 0; c < index.members.size(); ++c)
    if (index.members[c].size() >= spec.per_class()) out.push_back(static_cast<std::uint32_t>(c));
  return out;
}

inline Episode sample_episode(const EmbeddingDataset& dataset, const ClassIndex& index,
                              const EpisodeSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<std::uint32_t> pool = eligible_classes(index, spec);
  if (pool.size() < spec.ways) {
    std::string msg = "insufficient samples: " + std::to_string(pool.size()) +
                      " eligible classes for a " + std::to_string(spec.ways) +
                      "-way episode (insufficient classes); each class needs >= " +
                      std::to_string(spec.per_class()) + " records";
    std::string deficient;
    for (std::size_t c = 0; c < index.members.size(); ++c) {
      if (index.members[c].size() >= spec.per_class()) continue;
      if (!deficient.empty()) deficient += ", ";
      const std::string name = c < dataset.class_names.size() ? dataset.class_names[c] : std::to_string(c);
      deficient += name + " (" + std::to_string(index.members[c].size()) + ")";
    }
    if (!deficient.empty()) msg += "; deficient classes: " + deficient;
    throw InsufficientSamples(msg);
  }

  Xoshiro256 rng(seed);
  Episode ep;
  ep.class_map.reserve(spec.ways);
  // Partial Fisher-Yates over the eligible pool.
  for (std::uint32_t k = 0; k < spec.ways; ++k) {
    const auto pick = k + rng.below(pool.size() - k);
    std::swap(pool[k], pool[pick]);
    ep.class_map.push_back(pool[k]);
  }

  ep.support.reserve(std::size_t{spec.ways} * spec.shots);
  ep.query.reserve(std::size_t{spec.ways} * spec.queries_per_class);
  std::vector<std::size_t> members;
  for (std::uint32_t slot = 0; slot < spec.ways; ++slot) {
    members = index.members[ep.class_map[slot]];
    for (std::uint32_t i = 0; i < spec.per_class(); ++i) {
      const auto pick = i + rng.below(members.size() - i);
      std::swap(members[i], members[pick]);
    }
    for (std::uint32_t i = 0; i < spec.shots; ++i) ep.support.push_back({members[i], slot});
    for (std::uint32_t i = spec.shots; i < spec.per_class(); ++i) ep.query.push_back({members[i], slot});
  }
  return ep;
}

/// True iff the two label sets share no class name.
inline bool check_disjoint_classes(const std::set<std::string>& train_class_names,
                                   const std::set<std::string>& test_class_names) {
  for (const auto& name : train_class_names)
    if (test_class_names.contains(name)) return false;
  return true;
}

}  // namespace fsk
