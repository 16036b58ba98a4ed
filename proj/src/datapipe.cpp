#include "speechkit/datapipe.hpp"

#include <unordered_map>
#include <unordered_set>

namespace speechkit::data {

bool item_is_scalar(const Item& item) { return std::holds_alternative<Scalar>(item); }

const Scalar& item_scalar(const Item& item) {
  if (const auto* s = std::get_if<Scalar>(&item)) return *s;
  throw Error("item is a tensor, expected a scalar");
}

const Tensor& item_tensor(const Item& item) {
  if (const auto* t = std::get_if<Tensor>(&item)) return *t;
  throw Error("item is a scalar, expected a tensor");
}

DynamicItemSpec DynamicItemSpec::map(std::vector<std::string> takes, std::string provides,
                                     std::function<Item(const std::vector<Item>&)> fn) {
  DynamicItemSpec spec;
  spec.takes = std::move(takes);
  spec.provides = {std::move(provides)};
  spec.fn = std::move(fn);
  return spec;
}

DynamicItemSpec DynamicItemSpec::chain(std::vector<std::string> takes,
                                       std::vector<std::string> provides, ChainFn fn) {
  DynamicItemSpec spec;
  spec.takes = std::move(takes);
  spec.provides = std::move(provides);
  spec.chain_fn = std::move(fn);
  return spec;
}

std::size_t CategoricalEncoder::encode(const Scalar& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw Error("unknown label: " + scalar_to_string(label));
  return it->second;
}

const Scalar& CategoricalEncoder::decode(std::size_t index) const {
  if (index >= labels_.size()) throw Error("unknown label index: " + std::to_string(index));
  return labels_[index];
}

void CategoricalEncoder::add_label(const Scalar& label) {
  if (frozen_) throw Error("encoder is frozen");
  if (index_.count(label)) return;
  index_.emplace(label, labels_.size());
  labels_.push_back(label);
}

Pipeline::Pipeline(std::shared_ptr<const Manifest> manifest) : manifest_(std::move(manifest)) {
  if (!manifest_) throw Error("pipeline requires a manifest");
}

bool Pipeline::producible(const std::string& key) const {
  if (key == "id") return true;
  if (producers_.contains(key)) return true;
  for (const auto& [id, items] : manifest_->examples) {
    if (items.contains(key)) return true;
  }
  return false;
}

void Pipeline::add_dynamic_item(DynamicItemSpec spec) {
  if (spec.provides.empty()) throw Error("dynamic item provides no keys");
  if (spec.fn && spec.provides.size() != 1) {
    throw Error("single-output dynamic item must provide exactly one key");
  }
  if (!spec.fn && !spec.chain_fn) throw Error("dynamic item has no body");

  for (const auto& key : spec.provides) {
    if (key == "id") throw Error("'id' is reserved and cannot be provided");
    if (producers_.contains(key)) throw Error("duplicate provider for item '" + key + "'");
    for (const auto& [id, items] : manifest_->examples) {
      if (items.contains(key)) {
        throw Error("duplicate provider for item '" + key + "' (already a static item)");
      }
    }
  }

  std::size_t spec_index = specs_.size();
  specs_.push_back(std::move(spec));
  const auto& stored = specs_.back();
  for (std::size_t i = 0; i < stored.provides.size(); ++i) {
    producers_.insert(stored.provides[i], Producer{spec_index, i});
  }

  // cycle check over currently-known producers: DFS from the new spec
  std::vector<int> state(specs_.size(), 0);  // 0 unseen, 1 open, 2 done
  std::function<void(std::size_t)> visit = [&](std::size_t s) {
    if (state[s] == 1) {
      throw Error("dependency cycle through dynamic item providing '" + specs_[s].provides[0] + "'");
    }
    if (state[s] == 2) return;
    state[s] = 1;
    for (const auto& t : specs_[s].takes) {
      if (const Producer* p = producers_.find(t)) visit(p->spec_index);
    }
    state[s] = 2;
  };
  try {
    visit(spec_index);
  } catch (...) {
    // roll the registration back so the pipeline stays usable
    specs_.pop_back();
    SmallMap<Producer> rebuilt;
    for (std::size_t s = 0; s < specs_.size(); ++s) {
      for (std::size_t i = 0; i < specs_[s].provides.size(); ++i) {
        rebuilt.insert(specs_[s].provides[i], Producer{s, i});
      }
    }
    producers_ = std::move(rebuilt);
    throw;
  }
}

void Pipeline::set_output_keys(std::vector<std::string> keys) {
  for (const auto& key : keys) {
    if (!producible(key)) throw Error("unknown output key '" + key + "'");
  }
  output_keys_ = std::move(keys);
}

struct Pipeline::EvalContext {
  struct ChainState {
    ChainStepper next;
    std::size_t stages_done = 0;
  };
  const std::string& example_id;
  const StaticItems* statics;
  std::unordered_map<std::string, Item> cache;
  std::unordered_set<std::string> in_progress;
  std::unordered_map<std::size_t, ChainState> chains;  // spec index -> stepper
};

const Item& Pipeline::compute(EvalContext& ctx, const std::string& key) const {
  if (auto it = ctx.cache.find(key); it != ctx.cache.end()) return it->second;
  if (key == "id") {
    return ctx.cache.emplace(key, Item{Scalar{ctx.example_id}}).first->second;
  }
  if (const Scalar* s = ctx.statics->find(key)) {
    return ctx.cache.emplace(key, Item{*s}).first->second;
  }
  const Producer* producer = producers_.find(key);
  if (!producer) {
    throw Error("no producer for item '" + key + "' (example '" + ctx.example_id + "')");
  }
  if (!ctx.in_progress.insert(key).second) {
    throw Error("dependency cycle at item '" + key + "' (example '" + ctx.example_id + "')");
  }
  const DynamicItemSpec& spec = specs_[producer->spec_index];
  try {
    if (spec.fn) {
      std::vector<Item> inputs;
      inputs.reserve(spec.takes.size());
      for (const auto& t : spec.takes) inputs.push_back(compute(ctx, t));
      ctx.in_progress.erase(key);
      ctx.cache.emplace(key, spec.fn(inputs));
    } else {
      auto& chain = ctx.chains[producer->spec_index];
      if (!chain.next) {
        std::vector<Item> inputs;
        inputs.reserve(spec.takes.size());
        for (const auto& t : spec.takes) inputs.push_back(compute(ctx, t));
        chain.next = spec.chain_fn(inputs);
      }
      ctx.in_progress.erase(key);
      // advance the generator just far enough for the requested stage
      while (chain.stages_done <= producer->output_index) {
        Item value = chain.next();
        ctx.cache.emplace(spec.provides[chain.stages_done], std::move(value));
        ++chain.stages_done;
      }
    }
  } catch (const Error&) {
    ctx.in_progress.erase(key);
    throw;
  } catch (const std::exception& e) {
    ctx.in_progress.erase(key);
    throw Error("producer of '" + key + "' failed for example '" + ctx.example_id + "': " + e.what());
  }
  return ctx.cache.at(key);
}

Example Pipeline::evaluate(const std::string& example_id) const {
  const StaticItems* statics = manifest_->examples.find(example_id);
  if (!statics) throw Error("unknown example id '" + example_id + "'");
  EvalContext ctx{example_id, statics, {}, {}};
  Example out;
  for (const auto& key : output_keys_) {
    out.insert(key, compute(ctx, key));
  }
  return out;
}

CategoricalEncoder fit_encoder(const Pipeline& pipeline, const std::string& key) {
  if (!pipeline.producible(key)) throw Error("unknown item key '" + key + "'");
  Pipeline view = pipeline;  // pipeline copies share the manifest and specs
  view.set_output_keys({key});
  CategoricalEncoder encoder;
  for (const auto& [id, items] : pipeline.manifest().examples) {
    Example ex = view.evaluate(id);
    const Item& item = ex.at(key);
    if (!item_is_scalar(item)) {
      throw Error("item '" + key + "' of example '" + id + "' is not a scalar label");
    }
    encoder.add_label(item_scalar(item));
  }
  encoder.freeze();
  return encoder;
}

}  // namespace speechkit::data
