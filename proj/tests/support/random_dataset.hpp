#pragma once

#include <cstddef>
#include <random>

#include "fails/model.hpp"
#include "fails/registry.hpp"

namespace fails::testing {

struct RandomDatasetOptions {
  std::size_t max_incidents = 30;
  int span_days = 21;
  // Allow stage times out of S1..S5 order (exercises negative-duration paths).
  bool allow_disorder = true;
  // Titles and bodies with commas, quotes, newlines and non-ASCII bytes.
  bool hostile_text = true;
};

/// Valid records over the builtin registry, sorted by (start, id).
IncidentDataset random_dataset(std::mt19937_64& rng, const RandomDatasetOptions& options = {},
                               const Registry& registry = builtin_registry());

/// A selection inside (or around) the dataset window with a random
/// non-empty service subset.
AnalysisSelection random_selection(std::mt19937_64& rng, const IncidentDataset& dataset,
                                   const Registry& registry = builtin_registry());

/// A fixed five-incident dataset over two providers (3 openai, 2 anthropic).
IncidentDataset five_incident_dataset();

}  // namespace fails::testing
