#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "speechkit/batching.hpp"
#include "speechkit/datapipe.hpp"
#include "speechkit/manifest.hpp"

using namespace speechkit;
using namespace speechkit::data;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  auto dir = std::filesystem::temp_directory_path() / "speechkit_data_tests";
  std::filesystem::create_directories(dir);
  auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path;
}

const char* kJsonManifest = R"({
  "sentence001": {
    "wav": "{data_root}/file_snt001.wav",
    "length": 2.10,
    "words": "SWITCH OFF THE LIGHT"
  },
  "sentence002": {
    "wav": "{data_root}/file_snt002.wav",
    "length": 2.70,
    "words": "SWITCH ON THE LIGHT"
  }
})";

const char* kCsvManifest =
    "ID,length,wav,words\n"
    "sentence001,2.10,{data_root}/file_snt001.wav,\"SWITCH OFF THE LIGHT\"\n"
    "sentence002,2.70,{data_root}/file_snt002.wav,\"SWITCH ON THE LIGHT\"\n"
    "sentence003,3.20,{data_root}/file_snt003.wav,\"PLEASE, TURN OFF THE LIGHT\"\n";

std::shared_ptr<Manifest> speaker_manifest() {
  auto manifest = std::make_shared<Manifest>();
  auto add = [&](const std::string& id, const std::string& spkid, double base) {
    StaticItems items;
    items.insert("spkid", Scalar{spkid});
    items.insert("base", Scalar{base});
    manifest->examples.insert(id, std::move(items));
  };
  add("utt1", "spk1", 1.0);
  add("utt2", "spk2", 2.0);
  add("utt3", "spk1", 3.0);
  return manifest;
}

}  // namespace

TEST_CASE("json manifest loads with data_root substitution") {
  auto path = write_temp("train.json", kJsonManifest);
  Manifest m = load_manifest(path, ManifestFormat::Auto, "/data");
  REQUIRE(m.examples.size() == 2);
  CHECK(m.examples.at_index(0).first == "sentence001");
  const StaticItems& items = m.examples.at("sentence001");
  CHECK(items.at("wav") == Scalar{std::string("/data/file_snt001.wav")});
  CHECK(items.at("length") == Scalar{2.10});
  CHECK(items.at("words") == Scalar{std::string("SWITCH OFF THE LIGHT")});
}

TEST_CASE("csv manifest honors RFC 4180 quoting and numeric typing") {
  auto path = write_temp("train.csv", kCsvManifest);
  Manifest m = load_manifest(path, ManifestFormat::Auto, "/data");
  REQUIRE(m.examples.size() == 3);
  const StaticItems& s3 = m.examples.at("sentence003");
  CHECK(s3.at("words") == Scalar{std::string("PLEASE, TURN OFF THE LIGHT")});
  CHECK(s3.at("length") == Scalar{3.20});
  CHECK(s3.at("wav") == Scalar{std::string("/data/file_snt003.wav")});

  SUBCASE("quoted numerics stay strings") {
    auto p = write_temp("typed.csv", "ID,a,b\nx,\"42\",42\n");
    Manifest typed = load_manifest(p, ManifestFormat::Csv, ".");
    CHECK(typed.examples.at("x").at("a") == Scalar{std::string("42")});
    CHECK(typed.examples.at("x").at("b") == Scalar{std::int64_t{42}});
  }
}

TEST_CASE("manifest load failures") {
  CHECK(load_manifest(write_temp("empty.json", "{}"), ManifestFormat::Json, ".").examples.empty());
  CHECK_THROWS_WITH_AS(
      load_manifest(write_temp("dup.json", R"({"a": {"x": 1}, "a": {"x": 2}})"),
                    ManifestFormat::Json, "."),
      doctest::Contains("duplicate example id"), Error);
  CHECK_THROWS_WITH_AS(
      load_manifest(write_temp("nonscalar.json", R"({"a": {"x": [1, 2]}})"),
                    ManifestFormat::Json, "."),
      doctest::Contains("arrays are not scalar"), Error);
  CHECK_THROWS_WITH_AS(
      load_manifest(write_temp("badrow.csv", "ID,a,b\nx,1\n"), ManifestFormat::Csv, "."),
      doctest::Contains("columns"), Error);
  CHECK_THROWS_WITH_AS(
      load_manifest(write_temp("dup.csv", "ID,a\nx,1\nx,2\n"), ManifestFormat::Csv, "."),
      doctest::Contains("duplicate example id"), Error);
  CHECK_THROWS_WITH_AS(
      load_manifest(write_temp("noheader.csv", "name,a\nx,1\n"), ManifestFormat::Csv, "."),
      doctest::Contains("must start with 'ID'"), Error);
  CHECK_THROWS_AS(load_manifest("/nonexistent/file.json", ManifestFormat::Json, "."), Error);
  CHECK_THROWS_WITH_AS(load_manifest(write_temp("odd.txt", "x"), ManifestFormat::Auto, "."),
                       doctest::Contains("cannot infer"), Error);
}

TEST_CASE("csv and json forms of the same data load identically on string items") {
  auto json_path = write_temp("eq.json",
                              R"({"u1": {"wav": "a.wav", "words": "HELLO THERE"},
                                  "u2": {"wav": "b.wav", "words": "BYE"}})");
  auto csv_path =
      write_temp("eq.csv", "ID,wav,words\nu1,a.wav,\"HELLO THERE\"\nu2,b.wav,BYE\n");
  Manifest a = load_manifest(json_path, ManifestFormat::Json, ".");
  Manifest b = load_manifest(csv_path, ManifestFormat::Csv, ".");
  CHECK(a.examples == b.examples);

  // load purity: same file twice gives equal manifests
  CHECK(load_manifest(json_path, ManifestFormat::Json, ".").examples == a.examples);
}

TEST_CASE("manifest validation reports findings without mutating") {
  auto wav = write_temp("exists.wav", "RIFFxxxx");
  std::string json = R"({
    "good": {"wav": ")" + wav.string() + R"(", "length": 1.5},
    "bad": {"wav": "/definitely/missing/file.wav", "length": -1}
  })";
  Manifest m = load_manifest(write_temp("val.json", json), ManifestFormat::Json, ".");

  ValidationReport off = validate_manifest(m, false);
  REQUIRE(off.findings.size() == 1);
  CHECK(off.findings[0].kind == "nonpositive_length");

  ValidationReport on = validate_manifest(m, true);
  REQUIRE(on.findings.size() == 2);
  std::set<std::string> kinds;
  for (const auto& f : on.findings) kinds.insert(f.kind);
  CHECK(kinds == std::set<std::string>{"missing_file", "nonpositive_length"});

  Manifest empty;
  ValidationReport er = validate_manifest(empty, true);
  REQUIRE(er.findings.size() == 1);
  CHECK(er.findings[0].kind == "empty_manifest");
}

TEST_CASE("pipeline laziness: only the requested closure runs") {
  auto manifest = speaker_manifest();
  Pipeline pipeline(manifest);

  int sig_calls = 0, chain_instances = 0, rgain_stages = 0, offset_stages = 0;
  pipeline.add_dynamic_item(DynamicItemSpec::map({"base"}, "sig", [&](const std::vector<Item>& in) {
    ++sig_calls;
    return Item{Scalar{scalar_as_double(item_scalar(in[0])) * 10}};
  }));
  pipeline.add_dynamic_item(DynamicItemSpec::chain(
      {"sig"}, {"rgain", "rgain_offset"}, [&](const std::vector<Item>& in) -> ChainStepper {
        ++chain_instances;
        double sig = scalar_as_double(item_scalar(in[0]));
        auto stage = std::make_shared<int>(0);
        return [&rgain_stages, &offset_stages, sig, stage]() -> Item {
          if ((*stage)++ == 0) {
            ++rgain_stages;
            return Item{Scalar{sig * 0.5}};
          }
          ++offset_stages;
          return Item{Scalar{sig * 0.5 + 1}};
        };
      }));

  pipeline.set_output_keys({"id", "spkid", "rgain"});
  Example ex = pipeline.evaluate("utt1");
  CHECK(ex.size() == 3);
  CHECK(ex.at_index(0).first == "id");
  CHECK(item_scalar(ex.at("id")) == Scalar{std::string("utt1")});
  CHECK(item_scalar(ex.at("spkid")) == Scalar{std::string("spk1")});
  CHECK(item_scalar(ex.at("rgain")) == Scalar{5.0});
  CHECK(sig_calls == 1);
  CHECK(chain_instances == 1);
  CHECK(rgain_stages == 1);
  CHECK(offset_stages == 0);  // later chain stage never runs

  SUBCASE("requesting both chain outputs instantiates the body once") {
    pipeline.set_output_keys({"rgain", "rgain_offset"});
    sig_calls = chain_instances = rgain_stages = offset_stages = 0;
    Example both = pipeline.evaluate("utt2");
    CHECK(item_scalar(both.at("rgain")) == Scalar{10.0});
    CHECK(item_scalar(both.at("rgain_offset")) == Scalar{11.0});
    CHECK(chain_instances == 1);
    CHECK(rgain_stages == 1);
    CHECK(offset_stages == 1);
    CHECK(sig_calls == 1);
  }

  SUBCASE("id-only evaluation runs nothing") {
    pipeline.set_output_keys({"id"});
    sig_calls = chain_instances = 0;
    pipeline.evaluate("utt3");
    CHECK(sig_calls == 0);
    CHECK(chain_instances == 0);
  }

  SUBCASE("no cross-example caching") {
    pipeline.set_output_keys({"rgain"});
    sig_calls = 0;
    pipeline.evaluate("utt1");
    pipeline.evaluate("utt1");
    CHECK(sig_calls == 2);
  }
}

TEST_CASE("pipeline registration errors") {
  auto manifest = speaker_manifest();
  Pipeline pipeline(manifest);
  auto identity = [](const std::vector<Item>& in) { return in.at(0); };

  pipeline.add_dynamic_item(DynamicItemSpec::map({"base"}, "sig", identity));
  CHECK_THROWS_WITH_AS(pipeline.add_dynamic_item(DynamicItemSpec::map({"base"}, "sig", identity)),
                       doctest::Contains("duplicate provider"), Error);
  CHECK_THROWS_WITH_AS(pipeline.add_dynamic_item(DynamicItemSpec::map({"x"}, "spkid", identity)),
                       doctest::Contains("duplicate provider"), Error);
  CHECK_THROWS_WITH_AS(pipeline.add_dynamic_item(DynamicItemSpec::map({"x"}, "id", identity)),
                       doctest::Contains("reserved"), Error);

  // A takes B, B takes A
  pipeline.add_dynamic_item(DynamicItemSpec::map({"b_item"}, "a_item", identity));
  CHECK_THROWS_WITH_AS(
      pipeline.add_dynamic_item(DynamicItemSpec::map({"a_item"}, "b_item", identity)),
      doctest::Contains("cycle"), Error);
  // the failed registration rolled back: b_item can still get a clean producer
  pipeline.add_dynamic_item(DynamicItemSpec::map({"base"}, "b_item", identity));
  pipeline.set_output_keys({"a_item"});
  CHECK(item_scalar(pipeline.evaluate("utt1").at("a_item")) == Scalar{1.0});

  CHECK_THROWS_WITH_AS(pipeline.set_output_keys({"nope"}), doctest::Contains("unknown output key"),
                       Error);
  CHECK_THROWS_AS(pipeline.evaluate("missing_example"), Error);

  SUBCASE("producer failures carry example and item context") {
    pipeline.add_dynamic_item(
        DynamicItemSpec::map({"base"}, "boom", [](const std::vector<Item>&) -> Item {
          throw std::runtime_error("kaboom");
        }));
    pipeline.set_output_keys({"boom"});
    try {
      pipeline.evaluate("utt1");
      FAIL("expected failure");
    } catch (const Error& e) {
      std::string msg = e.what();
      CHECK(msg.find("boom") != std::string::npos);
      CHECK(msg.find("utt1") != std::string::npos);
      CHECK(msg.find("kaboom") != std::string::npos);
    }
  }

  SUBCASE("empty output keys yield empty examples") {
    pipeline.set_output_keys({});
    CHECK(pipeline.evaluate("utt1").empty());
  }
}

TEST_CASE("categorical encoder is a frozen first-seen bijection") {
  auto manifest = speaker_manifest();
  Pipeline pipeline(manifest);
  CategoricalEncoder encoder = fit_encoder(pipeline, "spkid");
  CHECK(encoder.size() == 2);
  CHECK(encoder.encode(Scalar{std::string("spk1")}) == 0);
  CHECK(encoder.encode(Scalar{std::string("spk2")}) == 1);
  CHECK(encoder.decode(0) == Scalar{std::string("spk1")});
  CHECK(encoder.decode(1) == Scalar{std::string("spk2")});
  for (std::size_t i = 0; i < encoder.size(); ++i) {
    CHECK(encoder.encode(encoder.decode(i)) == i);
  }
  CHECK_THROWS_WITH_AS(encoder.encode(Scalar{std::string("spk9")}),
                       doctest::Contains("unknown label"), Error);
  CHECK_THROWS_WITH_AS(encoder.decode(5), doctest::Contains("unknown label index"), Error);
  CHECK(encoder.frozen());

  SUBCASE("single example fits one label") {
    auto single = std::make_shared<Manifest>();
    StaticItems items;
    items.insert("spkid", Scalar{std::string("only")});
    single->examples.insert("u", std::move(items));
    Pipeline p(single);
    CategoricalEncoder e = fit_encoder(p, "spkid");
    CHECK(e.size() == 1);
    CHECK(e.encode(Scalar{std::string("only")}) == 0);
  }
}

TEST_CASE("pad_batch zero-pads on the right with relative lengths") {
  auto make_example = [](const std::string& id, std::vector<double> signal) {
    Example ex;
    ex.insert("id", Item{Scalar{id}});
    ex.insert("signal", Item{Tensor::vector(std::move(signal))});
    ex.insert("words", Item{Scalar{std::string("w_" + id)}});
    return ex;
  };

  std::vector<Example> examples;
  examples.push_back(make_example("a", {1, 2, 3}));
  examples.push_back(make_example("b", {4, 5, 6, 7, 8}));
  PaddedBatch batch = pad_batch(examples, {"signal"});

  CHECK(batch.ids == std::vector<std::string>{"a", "b"});
  const PaddedKey& signal = batch.numeric.at("signal");
  CHECK(signal.data.shape == std::vector<std::size_t>{2, 5});
  CHECK(signal.lengths == std::vector<double>{0.6, 1.0});
  CHECK(signal.data.data == std::vector<double>{1, 2, 3, 0, 0, 4, 5, 6, 7, 8});
  CHECK(batch.lists.at("words").size() == 2);

  // unpadding recovers the exact inputs
  CHECK(unpad_row(signal, 0) == Tensor::vector({1, 2, 3}));
  CHECK(unpad_row(signal, 1) == Tensor::vector({4, 5, 6, 7, 8}));

  SUBCASE("single example has relative length one and no padding") {
    PaddedBatch single = pad_batch({make_example("solo", {9, 9})}, {"signal"});
    CHECK(single.numeric.at("signal").lengths == std::vector<double>{1.0});
    CHECK(single.numeric.at("signal").data.data == std::vector<double>{9, 9});
  }
  SUBCASE("equal lengths add zero pad cells") {
    std::vector<Example> same;
    same.push_back(make_example("x", {1, 1, 1, 1}));
    same.push_back(make_example("y", {2, 2, 2, 2}));
    same.push_back(make_example("z", {3, 3, 3, 3}));
    PaddedBatch b = pad_batch(same, {"signal"});
    CHECK(b.numeric.at("signal").data.shape == std::vector<std::size_t>{3, 4});
    for (double l : b.numeric.at("signal").lengths) CHECK(l == 1.0);
  }
  SUBCASE("incompatible trailing shapes error") {
    Example bad;
    bad.insert("id", Item{Scalar{std::string("bad")}});
    bad.insert("signal", Item{Tensor{{2, 3}, {1, 2, 3, 4, 5, 6}}});
    bad.insert("words", Item{Scalar{std::string("w")}});
    std::vector<Example> mixed;
    mixed.push_back(make_example("a", {1, 2, 3}));
    mixed.push_back(bad);
    CHECK_THROWS_WITH_AS(pad_batch(mixed, {"signal"}), doctest::Contains("trailing"), Error);
  }
  SUBCASE("empty batch errors") {
    CHECK_THROWS_WITH_AS(pad_batch({}, {"signal"}), doctest::Contains("empty batch"), Error);
  }
  SUBCASE("padding beyond each true length is exactly zero") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Example> batch_examples;
      std::size_t b = 1 + rng.below(6);
      for (std::size_t i = 0; i < b; ++i) {
        std::size_t len = 1 + rng.below(9);
        std::vector<double> values;
        for (std::size_t j = 0; j < len; ++j) values.push_back(rng.uniform() + 0.1);
        batch_examples.push_back(make_example("e" + std::to_string(i), std::move(values)));
      }
      PaddedBatch padded = pad_batch(batch_examples, {"signal"});
      const PaddedKey& key = padded.numeric.at("signal");
      std::size_t l_max = key.data.shape[1];
      double max_rel = 0;
      for (std::size_t i = 0; i < b; ++i) {
        auto len =
            static_cast<std::size_t>(std::llround(key.lengths[i] * static_cast<double>(l_max)));
        for (std::size_t j = len; j < l_max; ++j) CHECK(key.data.data[i * l_max + j] == 0.0);
        max_rel = std::max(max_rel, key.lengths[i]);
        CHECK(key.lengths[i] > 0.0);
        CHECK(key.lengths[i] <= 1.0);
      }
      CHECK(max_rel == 1.0);
    }
  }
}

namespace {

SmallMap<double> lengths_of(std::initializer_list<std::pair<const char*, double>> entries) {
  SmallMap<double> lengths;
  for (const auto& [id, len] : entries) lengths.insert(id, len);
  return lengths;
}

std::multiset<std::string> plan_ids(const BatchPlan& plan) {
  std::multiset<std::string> ids;
  for (const auto& batch : plan.batches) {
    for (const auto& id : batch) ids.insert(id);
  }
  return ids;
}

}  // namespace

TEST_CASE("batch planning strategies") {
  SmallMap<double> lengths = lengths_of({{"a", 1}, {"b", 9}, {"c", 2}, {"d", 10}});
  BatchPlanParams params;
  params.batch_size = 2;

  SUBCASE("sorted ascending with fixed chunks") {
    BatchPlan plan = plan_batches(lengths, BatchStrategy::Sorted, params, 0);
    REQUIRE(plan.batches.size() == 2);
    CHECK(plan.batches[0] == std::vector<std::string>{"a", "c"});
    CHECK(plan.batches[1] == std::vector<std::string>{"b", "d"});
  }
  SUBCASE("random is deterministic under a fixed seed") {
    BatchPlan p1 = plan_batches(lengths, BatchStrategy::Random, params, 1234);
    BatchPlan p2 = plan_batches(lengths, BatchStrategy::Random, params, 1234);
    CHECK(p1.batches == p2.batches);
    CHECK(plan_ids(p1) == std::multiset<std::string>{"a", "b", "c", "d"});
  }
  SUBCASE("last partial batch is kept") {
    params.batch_size = 3;
    BatchPlan plan = plan_batches(lengths, BatchStrategy::Sorted, params, 0);
    REQUIRE(plan.batches.size() == 2);
    CHECK(plan.batches[0].size() == 3);
    CHECK(plan.batches[1].size() == 1);
  }
  SUBCASE("dynamic packs under the element budget") {
    params.max_elems = 20;
    params.n_buckets = 4;
    BatchPlan plan = plan_batches(lengths, BatchStrategy::Dynamic, params, 99);
    CHECK(plan_ids(plan) == std::multiset<std::string>{"a", "b", "c", "d"});
    for (const auto& batch : plan.batches) {
      double l_max = 0;
      for (const auto& id : batch) l_max = std::max(l_max, *lengths.find(id));
      CHECK(l_max * static_cast<double>(batch.size()) <= params.max_elems);
    }
  }
  SUBCASE("dynamic rejects an example over the budget") {
    params.max_elems = 5;
    CHECK_THROWS_WITH_AS(plan_batches(lengths, BatchStrategy::Dynamic, params, 0),
                         doctest::Contains("exceeds max_elems"), Error);
  }
  SUBCASE("batch_size must be positive") {
    params.batch_size = 0;
    CHECK_THROWS_AS(plan_batches(lengths, BatchStrategy::Sorted, params, 0), Error);
  }
}

TEST_CASE("all strategies partition the id multiset") {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    SmallMap<double> lengths;
    std::size_t n = 1 + rng.below(40);
    std::multiset<std::string> expect;
    for (std::size_t i = 0; i < n; ++i) {
      std::string id = "id" + std::to_string(i);
      lengths.insert(id, 1.0 + static_cast<double>(rng.below(100)));
      expect.insert(id);
    }
    BatchPlanParams params;
    params.batch_size = 1 + rng.below(8);
    params.max_elems = 400;
    params.n_buckets = 1 + rng.below(6);
    for (BatchStrategy strategy :
         {BatchStrategy::Random, BatchStrategy::Sorted, BatchStrategy::Dynamic}) {
      BatchPlan plan = plan_batches(lengths, strategy, params, rng.next_u64());
      CHECK(plan_ids(plan) == expect);
    }
  }
}

// With every batch full, sorted chunking minimizes the sum of per-batch
// maxima, so it pads no more than any permutation. A partial final batch
// breaks the per-instance guarantee (lengths {10,10,10,1} at batch size 3:
// sorted pads 9 cells, the order 10,10,10|1 pads none), so the
// per-instance check runs on divisible sizes and ragged sizes are only
// checked in aggregate.
TEST_CASE("sorted planning never pads more than random planning (full batches)") {
  Rng rng(777);
  for (int trial = 0; trial < 1000; ++trial) {
    BatchPlanParams params;
    params.batch_size = 2 + rng.below(7);
    SmallMap<double> lengths;
    std::size_t n = params.batch_size * (1 + rng.below(15));
    for (std::size_t i = 0; i < n; ++i) {
      lengths.insert("e" + std::to_string(i), 1.0 + static_cast<double>(rng.below(200)));
    }
    std::uint64_t seed = rng.next_u64();
    double sorted_cells =
        count_padding_cells(plan_batches(lengths, BatchStrategy::Sorted, params, seed), lengths);
    double random_cells =
        count_padding_cells(plan_batches(lengths, BatchStrategy::Random, params, seed), lengths);
    CHECK(sorted_cells <= random_cells);
  }
}

TEST_CASE("sorted planning beats random on average for ragged sizes too") {
  Rng rng(778);
  double sorted_total = 0, random_total = 0;
  for (int trial = 0; trial < 300; ++trial) {
    SmallMap<double> lengths;
    std::size_t n = 2 + rng.below(60);
    for (std::size_t i = 0; i < n; ++i) {
      lengths.insert("e" + std::to_string(i), 1.0 + static_cast<double>(rng.below(200)));
    }
    BatchPlanParams params;
    params.batch_size = 2 + rng.below(7);
    std::uint64_t seed = rng.next_u64();
    sorted_total +=
        count_padding_cells(plan_batches(lengths, BatchStrategy::Sorted, params, seed), lengths);
    random_total +=
        count_padding_cells(plan_batches(lengths, BatchStrategy::Random, params, seed), lengths);
  }
  CHECK(sorted_total < random_total);
}
