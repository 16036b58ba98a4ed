#include "speechkit/batching.hpp"

#include <algorithm>
#include <cmath>

namespace speechkit::data {

namespace {

Tensor to_tensor(const Item& item, const std::string& key, const std::string& id) {
  if (const auto* t = std::get_if<Tensor>(&item)) return *t;
  const Scalar& s = item_scalar(item);
  if (!scalar_is_number(s)) {
    throw Error("item '" + key + "' of example '" + id + "' is not numeric");
  }
  return Tensor{{1}, {scalar_as_double(s)}};
}

}  // namespace

PaddedBatch pad_batch(const std::vector<Example>& examples,
                      const std::vector<std::string>& numeric_keys) {
  if (examples.empty()) throw Error("pad_batch: empty batch");

  PaddedBatch batch;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Item* id_item = examples[i].find("id");
    if (id_item && item_is_scalar(*id_item)) {
      batch.ids.push_back(scalar_to_string(item_scalar(*id_item)));
    } else {
      batch.ids.push_back(std::to_string(i));
    }
  }

  // all examples must share the first example's key set
  const Example& first = examples[0];
  for (const auto& ex : examples) {
    if (ex.size() != first.size()) throw Error("pad_batch: ragged batch (differing key sets)");
    for (const auto& [key, v] : first) {
      if (!ex.contains(key)) throw Error("pad_batch: example missing key '" + key + "'");
    }
  }

  std::vector<std::string> numeric_set(numeric_keys);
  auto is_numeric_key = [&](const std::string& k) {
    return std::find(numeric_set.begin(), numeric_set.end(), k) != numeric_set.end();
  };

  for (const auto& key : numeric_keys) {
    if (!first.contains(key)) throw Error("pad_batch: numeric key '" + key + "' not in batch");
    std::vector<Tensor> tensors;
    tensors.reserve(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
      tensors.push_back(to_tensor(examples[i].at(key), key, batch.ids[i]));
    }
    const std::vector<std::size_t>& trailing = tensors[0].shape;
    std::size_t trailing_size = tensors[0].trailing_size();
    std::size_t l_max = 0;
    for (const auto& t : tensors) {
      if (t.shape.size() != trailing.size() || t.trailing_size() != trailing_size ||
          !std::equal(t.shape.begin() + 1, t.shape.end(), trailing.begin() + 1)) {
        throw Error("pad_batch: incompatible trailing shapes for key '" + key + "'");
      }
      if (t.length() == 0) throw Error("pad_batch: zero-length item for key '" + key + "'");
      l_max = std::max(l_max, t.length());
    }

    PaddedKey padded;
    padded.data.shape.push_back(examples.size());
    padded.data.shape.push_back(l_max);
    padded.data.shape.insert(padded.data.shape.end(), trailing.begin() + 1, trailing.end());
    padded.data.data.assign(examples.size() * l_max * trailing_size, 0.0);
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      const Tensor& t = tensors[i];
      std::copy(t.data.begin(), t.data.end(),
                padded.data.data.begin() + static_cast<std::ptrdiff_t>(i * l_max * trailing_size));
      padded.lengths.push_back(static_cast<double>(t.length()) / static_cast<double>(l_max));
    }
    batch.numeric.insert(key, std::move(padded));
  }

  for (const auto& [key, v] : first) {
    if (key == "id" || is_numeric_key(key)) continue;
    std::vector<Item> list;
    for (const auto& ex : examples) list.push_back(ex.at(key));
    batch.lists.insert(key, std::move(list));
  }
  return batch;
}

Tensor unpad_row(const PaddedKey& key, std::size_t i) {
  const Tensor& data = key.data;
  if (data.shape.size() < 2 || i >= data.shape[0]) throw Error("unpad_row: bad index");
  std::size_t l_max = data.shape[1];
  std::size_t trailing = 1;
  for (std::size_t d = 2; d < data.shape.size(); ++d) trailing *= data.shape[d];
  auto length = static_cast<std::size_t>(std::llround(key.lengths.at(i) * static_cast<double>(l_max)));
  Tensor out;
  out.shape.push_back(length);
  out.shape.insert(out.shape.end(), data.shape.begin() + 2, data.shape.end());
  std::size_t offset = i * l_max * trailing;
  out.data.assign(data.data.begin() + static_cast<std::ptrdiff_t>(offset),
                  data.data.begin() + static_cast<std::ptrdiff_t>(offset + length * trailing));
  return out;
}

BatchPlan plan_batches(const SmallMap<double>& lengths, BatchStrategy strategy,
                       const BatchPlanParams& params, std::uint64_t seed) {
  BatchPlan plan;
  plan.strategy = strategy;
  plan.seed = seed;
  if (lengths.empty()) return plan;

  std::vector<std::string> ids;
  ids.reserve(lengths.size());
  for (const auto& [id, len] : lengths) ids.push_back(id);

  auto chunk = [&](const std::vector<std::string>& order, std::size_t size) {
    for (std::size_t start = 0; start < order.size(); start += size) {
      std::size_t end = std::min(order.size(), start + size);
      plan.batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                                order.begin() + static_cast<std::ptrdiff_t>(end));
    }
  };

  switch (strategy) {
    case BatchStrategy::Random: {
      if (params.batch_size < 1) throw Error("plan_batches: batch_size must be >= 1");
      Rng rng(seed);
      rng.shuffle(ids);
      chunk(ids, params.batch_size);
      break;
    }
    case BatchStrategy::Sorted: {
      if (params.batch_size < 1) throw Error("plan_batches: batch_size must be >= 1");
      std::stable_sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
        return *lengths.find(a) < *lengths.find(b);
      });
      chunk(ids, params.batch_size);
      break;
    }
    case BatchStrategy::Dynamic: {
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0;
      for (const auto& [id, len] : lengths) {
        if (len <= 0) throw Error("plan_batches: dynamic batching requires positive lengths");
        if (len > params.max_elems) {
          throw Error("plan_batches: example '" + id + "' (length " + format_double(len) +
                      ") exceeds max_elems " + format_double(params.max_elems));
        }
        lo = std::min(lo, len);
        hi = std::max(hi, len);
      }
      std::size_t n_buckets = std::max<std::size_t>(1, params.n_buckets);
      // exponential boundaries between min and max observed length
      double ratio = hi / lo;
      auto bucket_of = [&](double len) -> std::size_t {
        if (ratio <= 1.0) return 0;
        double x = std::log(len / lo) / std::log(ratio);  // in [0, 1]
        auto b = static_cast<std::size_t>(x * static_cast<double>(n_buckets));
        return std::min(b, n_buckets - 1);
      };
      Rng rng(seed);
      rng.shuffle(ids);
      std::vector<std::vector<std::string>> buckets(n_buckets);
      for (const auto& id : ids) buckets[bucket_of(*lengths.find(id))].push_back(id);

      for (const auto& bucket : buckets) {
        std::vector<std::string> current;
        double current_max = 0;
        for (const auto& id : bucket) {
          double len = *lengths.find(id);
          double new_max = std::max(current_max, len);
          if (!current.empty() &&
              new_max * static_cast<double>(current.size() + 1) > params.max_elems) {
            plan.batches.push_back(std::move(current));
            current.clear();
            current_max = 0;
            new_max = len;
          }
          current.push_back(id);
          current_max = new_max;
        }
        if (!current.empty()) plan.batches.push_back(std::move(current));
      }
      break;
    }
  }
  return plan;
}

double count_padding_cells(const BatchPlan& plan, const SmallMap<double>& lengths) {
  double cells = 0;
  for (const auto& batch : plan.batches) {
    double l_max = 0;
    for (const auto& id : batch) {
      const double* len = lengths.find(id);
      if (!len) throw Error("count_padding_cells: unknown id '" + id + "'");
      l_max = std::max(l_max, *len);
    }
    for (const auto& id : batch) cells += l_max - *lengths.find(id);
  }
  return cells;
}

}  // namespace speechkit::data
