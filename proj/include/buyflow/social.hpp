#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "buyflow/datastore.hpp"

namespace buyflow::social {

// Sparse purchase counts keyed by interned category id at one taxonomy level.
struct CategoryVector {
  int level = 1;
  std::vector<std::pair<std::int32_t, double>> entries;  // sorted by id, all counts > 0

  bool empty() const noexcept { return entries.empty(); }
};

// Throws when the user has no categorized purchase at `level`.
CategoryVector category_vector(const Dataset& dataset, Dataset::UserIndex user, int level);

// Cosine similarity over the union key space; throws on an empty vector.
double cosine(const CategoryVector& a, const CategoryVector& b);

using UserPair = std::pair<Dataset::UserIndex, Dataset::UserIndex>;

// Similarity of each pair; `vectors` is indexed by user. The parallel kernel
// and the serial reference return identical values.
std::vector<double> pair_similarities(std::span<const CategoryVector> vectors, std::span<const UserPair> pairs);
std::vector<double> pair_similarities_serial(std::span<const CategoryVector> vectors,
                                             std::span<const UserPair> pairs);

struct LevelSimilarity {
  int level = 1;
  double connected_mean = 0.0;
  double connected_se = 0.0;
  double random_mean = 0.0;
  double random_se = 0.0;
  double lift = 0.0;  // connected / random - 1
  std::size_t n = 0;
};

struct GenderPairSimilarity {
  std::string pair;  // "female-female", "male-male", "female-male", "random"
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

struct SimilarityReport {
  std::array<LevelSimilarity, 3> levels;
  std::vector<GenderPairSimilarity> gender_pairs;  // level 3; empty unless requested
};

struct SimilarityOptions {
  std::size_t n_pairs = 1000;
  std::uint64_t seed = 0;
  bool by_gender = false;
};

// Users qualify when they have at least one purchase labelled down to level 3.
// Connected pairs are sampled without replacement from the qualifying graph
// edges; random pairs are uniform qualifying pairs that are not directly
// connected.
SimilarityReport cohort_similarity(const Dataset& dataset, const EmailGraph& graph,
                                   const SimilarityOptions& options);

void write_csv(std::ostream& out, const SimilarityReport& report);

}  // namespace buyflow::social
