#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "speechkit/manifest.hpp"
#include "speechkit/tensor.hpp"

namespace speechkit::data {

/// A pipeline item value: a manifest scalar or a numeric tensor.
using Item = std::variant<Scalar, Tensor>;

bool item_is_scalar(const Item& item);
const Scalar& item_scalar(const Item& item);
const Tensor& item_tensor(const Item& item);

/// Ordered item-key -> value map produced by one evaluation.
using Example = SmallMap<Item>;

/// A chain body is instantiated at most once per example evaluation and
/// then stepped: call k yields the value of provides[k]. Stages past the
/// highest requested key never run.
using ChainStepper = std::function<Item()>;
using ChainFn = std::function<ChainStepper(const std::vector<Item>&)>;

/// One dynamic item: `takes` input keys, `provides` output keys.
/// Single-output items use `fn`; chains use `chain_fn` (one yielded
/// value per provided key, in order).
struct DynamicItemSpec {
  std::vector<std::string> takes;
  std::vector<std::string> provides;
  std::function<Item(const std::vector<Item>&)> fn;
  ChainFn chain_fn;

  static DynamicItemSpec map(std::vector<std::string> takes, std::string provides,
                             std::function<Item(const std::vector<Item>&)> fn);
  static DynamicItemSpec chain(std::vector<std::string> takes, std::vector<std::string> provides,
                               ChainFn fn);
};

/// Frozen bijection label <-> index with contiguous indices in
/// first-seen order.
class CategoricalEncoder {
 public:
  std::size_t encode(const Scalar& label) const;
  const Scalar& decode(std::size_t index) const;
  std::size_t size() const { return labels_.size(); }

  /// Building interface (used by fit_encoder): returns false once frozen.
  void add_label(const Scalar& label);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

 private:
  std::vector<Scalar> labels_;
  std::map<Scalar, std::size_t> index_;
  bool frozen_ = false;
};

/// Dynamic-item dependency graph over a manifest, evaluated lazily: a
/// request for output keys computes exactly their transitive
/// dependencies, each producer at most once per evaluation. Evaluation
/// of distinct example ids is safe from multiple threads as long as the
/// producer bodies are.
class Pipeline {
 public:
  explicit Pipeline(std::shared_ptr<const Manifest> manifest);

  /// Registers a producer. Throws on duplicate providers and on cycles
  /// visible among currently-known producers.
  void add_dynamic_item(DynamicItemSpec spec);

  /// Keys returned by evaluate(), in order. Each must be producible or
  /// the reserved key "id".
  void set_output_keys(std::vector<std::string> keys);
  const std::vector<std::string>& output_keys() const { return output_keys_; }

  Example evaluate(const std::string& example_id) const;

  /// True when `key` is producible (static anywhere, dynamic, or "id").
  bool producible(const std::string& key) const;

  const Manifest& manifest() const { return *manifest_; }

 private:
  struct Producer {
    std::size_t spec_index;
    std::size_t output_index;  // position within spec.provides
  };

  struct EvalContext;
  const Item& compute(EvalContext& ctx, const std::string& key) const;

  std::shared_ptr<const Manifest> manifest_;
  std::vector<DynamicItemSpec> specs_;
  SmallMap<Producer> producers_;  // dynamic key -> producing spec
  std::vector<std::string> output_keys_;
};

/// Evaluates `key` for every example in manifest order and freezes the
/// label set into an encoder.
CategoricalEncoder fit_encoder(const Pipeline& pipeline, const std::string& key);

}  // namespace speechkit::data
