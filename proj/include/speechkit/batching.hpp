#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "speechkit/datapipe.hpp"

namespace speechkit::data {

/// Padded view of one numeric key across a batch: a dense [B, L_max, ...]
/// block, zero-padded on the right of the length axis, plus relative
/// lengths L_i / L_max in (0, 1].
struct PaddedKey {
  Tensor data;
  std::vector<double> lengths;
};

struct PaddedBatch {
  std::vector<std::string> ids;
  SmallMap<PaddedKey> numeric;           // requested numeric keys, in order
  SmallMap<std::vector<Item>> lists;     // everything else, kept as-is
};

/// Pads `numeric_keys` into dense blocks; other items become plain lists.
/// All examples must share the same key set and, per numeric key, the
/// same trailing dimensions.
PaddedBatch pad_batch(const std::vector<Example>& examples,
                      const std::vector<std::string>& numeric_keys);

/// Recovers row `i` of a padded key at its true length (unpadding).
Tensor unpad_row(const PaddedKey& key, std::size_t i);

enum class BatchStrategy { Random, Sorted, Dynamic };

struct BatchPlanParams {
  std::size_t batch_size = 1;  // random / sorted
  double max_elems = 0;        // dynamic: cap on L_max * count per batch
  std::size_t n_buckets = 8;   // dynamic
};

struct BatchPlan {
  std::vector<std::vector<std::string>> batches;
  BatchStrategy strategy = BatchStrategy::Random;
  std::uint64_t seed = 0;
};

/// Plans batches over `lengths` (id -> length, insertion order = dataset
/// order). Every strategy partitions the id set:
///   random  - seeded shuffle, fixed-size chunks
///   sorted  - ascending length, fixed-size chunks
///   dynamic - exponential length buckets, shuffled within, packed
///             greedily under max_elems
BatchPlan plan_batches(const SmallMap<double>& lengths, BatchStrategy strategy,
                       const BatchPlanParams& params, std::uint64_t seed);

/// Zero cells a plan would pad, assuming one numeric key of the given
/// per-id lengths: sum over batches of (L_max - L_i).
double count_padding_cells(const BatchPlan& plan, const SmallMap<double>& lengths);

}  // namespace speechkit::data
