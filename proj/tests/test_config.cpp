#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "speechkit/hyperconf.hpp"
#include "speechkit/yaml.hpp"

using namespace speechkit;
using namespace speechkit::conf;

namespace {

const char* kHparamsExcerpt = R"(dropout: 0.2
features: !new:speechbrain.lobes.features.MFCC
    n_mels: 40
    left_frames: 5
    right_frames: 5

model: !new:torch.nn.LSTM
   input_size: 440
   hidden_size: 256
   num_layers: 4
   dropout:  !ref <dropout>
   bidirectional: True
)";

ConfigNode parse(const std::string& text) { return parse_config(text, "."); }

FactoryRegistry stub_registry() {
  FactoryRegistry registry;
  auto stub = [](const ResolvedList&, const ResolvedMap&) -> std::any {
    return std::string("instance");
  };
  registry.register_factory("speechbrain.lobes.features.MFCC", stub);
  registry.register_factory("torch.nn.LSTM", stub);
  return registry;
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  auto dir = std::filesystem::temp_directory_path() / "speechkit_config_tests";
  std::filesystem::create_directories(dir);
  auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path;
}

}  // namespace

TEST_CASE("parser handles the hyperparameter excerpt") {
  ConfigNode root = parse(kHparamsExcerpt);
  REQUIRE(root.is_mapping());
  const auto& entries = root.mapping().entries;
  REQUIRE(entries.size() == 3);
  CHECK(entries.at_index(0).first == "dropout");
  CHECK(entries.at_index(1).first == "features");
  CHECK(entries.at_index(2).first == "model");

  CHECK(entries.at("dropout").scalar() == Scalar{0.2});

  const auto& features = std::get<ConfigNode::Tagged>(entries.at("features").value);
  CHECK(features.kind == TagKind::New);
  CHECK(features.target == "speechbrain.lobes.features.MFCC");
  REQUIRE(features.args);
  CHECK(features.args->mapping().entries.at("n_mels").scalar() == Scalar{std::int64_t{40}});
  CHECK(features.args->mapping().entries.at("left_frames").scalar() == Scalar{std::int64_t{5}});

  const auto& model = std::get<ConfigNode::Tagged>(entries.at("model").value);
  CHECK(model.target == "torch.nn.LSTM");
  CHECK(model.args->mapping().entries.at("bidirectional").scalar() == Scalar{true});
  const auto& dropout_ref =
      std::get<ConfigNode::RefExpr>(model.args->mapping().entries.at("dropout").value);
  CHECK(dropout_ref.expr == "<dropout>");
  CHECK_FALSE(dropout_ref.copy);
}

TEST_CASE("tagless passthrough and scalar typing") {
  ConfigNode root = parse("a: 1\n");
  CHECK(root.mapping().entries.at("a").scalar() == Scalar{std::int64_t{1}});

  root = parse(
      "i: -3\n"
      "f: 2.10\n"
      "e: 1e-3\n"
      "b1: true\n"
      "b2: False\n"
      "n1: null\n"
      "n2: ~\n"
      "n3:\n"
      "s: SWITCH OFF THE LIGHT\n"
      "q: \"40\"\n"
      "esc: \"a\\tb\\n\"\n"
      "sq: 'it''s'\n");
  const auto& m = root.mapping().entries;
  CHECK(m.at("i").scalar() == Scalar{std::int64_t{-3}});
  CHECK(m.at("f").scalar() == Scalar{2.10});
  CHECK(m.at("e").scalar() == Scalar{1e-3});
  CHECK(m.at("b1").scalar() == Scalar{true});
  CHECK(m.at("b2").scalar() == Scalar{false});
  CHECK(scalar_is_null(m.at("n1").scalar()));
  CHECK(scalar_is_null(m.at("n2").scalar()));
  CHECK(scalar_is_null(m.at("n3").scalar()));
  CHECK(m.at("s").scalar() == Scalar{std::string("SWITCH OFF THE LIGHT")});
  CHECK(m.at("q").scalar() == Scalar{std::string("40")});
  CHECK(m.at("esc").scalar() == Scalar{std::string("a\tb\n")});
  CHECK(m.at("sq").scalar() == Scalar{std::string("it's")});
}

TEST_CASE("sequences, flow collections and comments") {
  ConfigNode root = parse(
      "# header comment\n"
      "mics:\n"
      "  - [0.0, 0.1, 0.0]\n"
      "  - [0.2, 0.0, 0.0]  # trailing comment\n"
      "flow_map: {a: 1, b: two}\n"
      "items:\n"
      "  - 5\n"
      "  - name: x\n"
      "    value: 7\n");
  const auto& m = root.mapping().entries;
  const auto& mics = m.at("mics").sequence().items;
  REQUIRE(mics.size() == 2);
  CHECK(mics[0].sequence().items[1].scalar() == Scalar{0.1});
  CHECK(m.at("flow_map").mapping().entries.at("b").scalar() == Scalar{std::string("two")});
  const auto& items = m.at("items").sequence().items;
  REQUIRE(items.size() == 2);
  CHECK(items[0].scalar() == Scalar{std::int64_t{5}});
  CHECK(items[1].mapping().entries.at("value").scalar() == Scalar{std::int64_t{7}});
}

TEST_CASE("parse errors carry position and reason") {
  CHECK_THROWS_WITH_AS(parse("a: !bogus x\n"), doctest::Contains("unknown tag"), Error);
  CHECK_THROWS_WITH_AS(parse("a: 1\na: 2\n"), doctest::Contains("duplicate mapping key"), Error);
  CHECK_THROWS_WITH_AS(parse("a: &anchor 1\n"), doctest::Contains("anchors"), Error);
  CHECK_THROWS_WITH_AS(parse("a: [1, 2\n"), doctest::Contains("flow sequence"), Error);
  CHECK_THROWS_WITH_AS(parse("\ta: 1\n"), doctest::Contains("tabs"), Error);
  try {
    parse("ok: 1\nbad: !wat x\n");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("includes splice, detect cycles and cap depth") {
  auto inner = write_temp("inner.yaml", "value: 42\n");
  auto outer = write_temp("outer.yaml", "nested: !include:inner.yaml\n");
  ConfigNode root = parse_config_file(outer);
  CHECK(root.mapping().entries.at("nested").mapping().entries.at("value").scalar() ==
        Scalar{std::int64_t{42}});

  write_temp("cycle_b.yaml", "y: !include:cycle_a.yaml\n");
  CHECK_THROWS_WITH_AS(parse_config_file(write_temp("cycle_a.yaml", "x: !include:cycle_b.yaml\n")),
                       doctest::Contains("include cycle"), Error);

  CHECK_THROWS_WITH_AS(parse("a: !include:does_not_exist.yaml\n"),
                       doctest::Contains("include file not found"), Error);

  // a 40-deep chain exceeds the 32 include limit
  for (int i = 39; i >= 0; --i) {
    std::string body = i == 39 ? std::string("leaf: 1\n")
                               : "next: !include:chain_" + std::to_string(i + 1) + ".yaml\n";
    write_temp("chain_" + std::to_string(i) + ".yaml", body);
  }
  CHECK_THROWS_WITH_AS(
      parse_config_file(std::filesystem::temp_directory_path() / "speechkit_config_tests" /
                        "chain_0.yaml"),
      doctest::Contains("include depth"), Error);
}

TEST_CASE("ref expression evaluation") {
  auto env = std::make_shared<ResolvedMap>();
  env->insert("dropout", ResolvedValue{Scalar{0.2}});
  env->insert("a", ResolvedValue{Scalar{std::string("foo")}});
  env->insert("b", ResolvedValue{Scalar{std::string("bar")}});
  env->insert("n", ResolvedValue{Scalar{std::int64_t{6}}});
  env->insert("m", ResolvedValue{Scalar{std::int64_t{4}}});
  auto lookup = [&](const std::string& k) { return env->find(k); };

  CHECK(eval_ref_expr("<dropout>", lookup).scalar() == Scalar{0.2});
  CHECK(eval_ref_expr("<dropout> * 2", lookup).scalar() == Scalar{0.4});
  CHECK(eval_ref_expr("<a> + <b>", lookup).scalar() == Scalar{std::string("foobar")});

  // precedence and promotion
  CHECK(eval_ref_expr("2 + 3 * 4", lookup).scalar() == Scalar{std::int64_t{14}});
  CHECK(eval_ref_expr("(2 + 3) * 4", lookup).scalar() == Scalar{std::int64_t{20}});
  CHECK(eval_ref_expr("<n> / 3", lookup).scalar() == Scalar{std::int64_t{2}});
  CHECK(eval_ref_expr("7 / 2", lookup).scalar() == Scalar{3.5});
  CHECK(eval_ref_expr("<n> - <m>", lookup).scalar() == Scalar{std::int64_t{2}});
  CHECK(eval_ref_expr("-<m> + 1", lookup).scalar() == Scalar{std::int64_t{-3}});

  CHECK_THROWS_WITH_AS(eval_ref_expr("<nope>", lookup), doctest::Contains("undefined placeholder"),
                       Error);
  CHECK_THROWS_WITH_AS(eval_ref_expr("<a> * 2", lookup), doctest::Contains("cannot apply"), Error);
  CHECK_THROWS_WITH_AS(eval_ref_expr("1 / 0", lookup), doctest::Contains("division by zero"), Error);
  CHECK_THROWS_WITH_AS(eval_ref_expr("<n> / (4 - <m>)", lookup),
                       doctest::Contains("division by zero"), Error);
}

TEST_CASE("resolve wires references into constructed arguments") {
  ConfigNode root = parse(kHparamsExcerpt);
  FactoryRegistry registry = stub_registry();
  ResolvedMap resolved = resolve(root, registry);

  CHECK(resolved.at("dropout").scalar() == Scalar{0.2});
  const Constructed& model = resolved.at("model").constructed();
  CHECK(model.factory_id == "torch.nn.LSTM");
  CHECK(model.keyword.at("dropout").scalar() == Scalar{0.2});
  CHECK(std::any_cast<std::string>(model.product) == "instance");
  CHECK(resolved.at("features").is_constructed());

  // determinism: a second resolve is structurally equal
  ResolvedMap again = resolve(root, registry);
  CHECK(resolved == again);
}

TEST_CASE("override before resolve changes every reference") {
  ConfigNode root = parse(kHparamsExcerpt);
  OverrideSet overrides = OverrideSet::from_args({"--dropout=0.5"});
  ConfigNode patched = apply_overrides(root, overrides);
  FactoryRegistry registry = stub_registry();
  ResolvedMap resolved = resolve(patched, registry);
  CHECK(resolved.at("dropout").scalar() == Scalar{0.5});
  CHECK(resolved.at("model").constructed().keyword.at("dropout").scalar() == Scalar{0.5});

  // the original tree is untouched
  CHECK(root.mapping().entries.at("dropout").scalar() == Scalar{0.2});

  SUBCASE("empty override set is identity") {
    ConfigNode same = apply_overrides(root, OverrideSet{});
    CHECK(same == root);
  }
  SUBCASE("missing path errors") {
    CHECK_THROWS_WITH_AS(apply_overrides(root, OverrideSet::from_args({"--nonexistent=3"})),
                         doctest::Contains("path not found"), Error);
  }
  SUBCASE("non-scalar target errors") {
    CHECK_THROWS_WITH_AS(apply_overrides(root, OverrideSet::from_args({"--features=3"})),
                         doctest::Contains("not a scalar"), Error);
  }
  SUBCASE("nested dotted path and later-wins ordering") {
    ConfigNode nested = parse("outer:\n  inner: 1\n");
    ConfigNode out = apply_overrides(
        nested, OverrideSet::from_args({"--outer.inner=2", "--outer.inner=3"}));
    CHECK(out.mapping().entries.at("outer").mapping().entries.at("inner").scalar() ==
          Scalar{std::int64_t{3}});
  }
}

TEST_CASE("reference cycles are reported") {
  ConfigNode root = parse("a: !ref <b>\nb: !ref <a>\n");
  FactoryRegistry registry;
  CHECK_THROWS_WITH_AS(resolve(root, registry), doctest::Contains("reference cycle"), Error);
}

TEST_CASE("copy yields an isolated deep value") {
  ConfigNode root = parse(
      "a:\n"
      "  k: 1\n"
      "  nested:\n"
      "    - 1\n"
      "    - 2\n"
      "b: !copy <a>\n"
      "c: !ref <a>\n");
  FactoryRegistry registry;
  ResolvedMap resolved = resolve(root, registry);

  CHECK(resolved.at("b") == resolved.at("a"));

  // marker mutation through the copy leaves the original unchanged
  ResolvedValue b = resolved.at("b");
  b.map().set("marker", ResolvedValue{Scalar{true}});
  CHECK_FALSE(resolved.at("a").map().contains("marker"));

  // a plain ref shares structure
  ResolvedValue c = resolved.at("c");
  c.map().set("marker", ResolvedValue{Scalar{true}});
  CHECK(resolved.at("a").map().contains("marker"));
}

TEST_CASE("copy of a constructed value re-invokes the factory") {
  int calls = 0;
  FactoryRegistry registry;
  registry.register_factory("test.Obj",
                            [&calls](const ResolvedList&, const ResolvedMap&) -> std::any {
                              return ++calls;
                            });
  ConfigNode root = parse("a: !new:test.Obj {x: 1}\nb: !copy <a>\n");
  ResolvedMap resolved = resolve(root, registry);
  CHECK(calls == 2);
  CHECK(std::any_cast<int>(resolved.at("a").constructed().product) == 1);
  CHECK(std::any_cast<int>(resolved.at("b").constructed().product) == 2);
}

TEST_CASE("name and apply tags") {
  FactoryRegistry registry;
  registry.register_factory("math.add",
                            [](const ResolvedList& pos, const ResolvedMap& kw) -> std::any {
                              std::int64_t sum = 0;
                              for (const auto& v : pos.items) sum += std::get<std::int64_t>(v.scalar());
                              if (const auto* extra = kw.find("extra")) {
                                sum += std::get<std::int64_t>(extra->scalar());
                              }
                              return ResolvedValue{Scalar{sum}};
                            });

  SUBCASE("apply stores only the result") {
    ConfigNode root = parse("total: !apply:math.add [1, 2, 3]\n");
    ResolvedMap resolved = resolve(root, registry);
    CHECK(resolved.at("total").scalar() == Scalar{std::int64_t{6}});
  }
  SUBCASE("apply on an unregistered target fails") {
    ConfigNode root = parse("total: !apply:math.missing [1]\n");
    CHECK_THROWS_WITH_AS(resolve(root, registry), doctest::Contains("not registered"), Error);
  }
  SUBCASE("name curries the factory") {
    ConfigNode root = parse("adder: !name:math.add [10]\n");
    ResolvedMap resolved = resolve(root, registry);
    const Constructed& c = resolved.at("adder").constructed();
    auto curried = std::any_cast<CurriedFactory>(c.product);
    ResolvedList extra;
    extra.items.push_back(ResolvedValue{Scalar{std::int64_t{5}}});
    auto result = std::any_cast<ResolvedValue>(curried(extra, {}));
    CHECK(result.scalar() == Scalar{std::int64_t{15}});
  }
  SUBCASE("unregistered new defers") {
    ConfigNode root = parse("obj: !new:not.Registered {a: 1}\n");
    ResolvedMap resolved = resolve(root, registry);
    REQUIRE(resolved.at("obj").is_deferred());
    CHECK(resolved.at("obj").deferred().target == "not.Registered");
    CHECK(resolved.at("obj").deferred().keyword.at("a").scalar() == Scalar{std::int64_t{1}});
  }
  SUBCASE("duplicate registration is an error") {
    CHECK_THROWS_WITH_AS(
        registry.register_factory("math.add", [](const ResolvedList&, const ResolvedMap&) -> std::any {
          return 0;
        }),
        doctest::Contains("already registered"), Error);
  }
}

TEST_CASE("tuple resolves to an immutable list") {
  ConfigNode root = parse("shape: !tuple (669, 1024)\nalso: !tuple [1, 2]\n");
  FactoryRegistry registry;
  ResolvedMap resolved = resolve(root, registry);
  REQUIRE(resolved.at("shape").is_list());
  CHECK(resolved.at("shape").list().tuple);
  CHECK(resolved.at("shape").list().items.size() == 2);
  CHECK(resolved.at("shape").list().items[0].scalar() == Scalar{std::int64_t{669}});
  CHECK(resolved.at("also").list().tuple);
}

TEST_CASE("dump renders deferred nodes and round-trips the excerpt") {
  ConfigNode root = parse(kHparamsExcerpt);
  FactoryRegistry registry;
  ResolvedMap resolved = resolve(root, registry);
  std::string dumped = dump_resolved(resolved);
  CHECK(dumped.find("!deferred:torch.nn.LSTM") != std::string::npos);
  CHECK(dumped.find("dropout: 0.2") != std::string::npos);

  ConfigNode reparsed = parse(dump_config(root));
  CHECK(reparsed == root);
}

namespace {

ConfigNode random_scalar_node(Rng& rng) {
  switch (rng.below(6)) {
    case 0: return ConfigNode{Scalar{static_cast<std::int64_t>(rng.below(2000)) - 1000}, 0, 0};
    case 1: return ConfigNode{Scalar{(rng.uniform() - 0.5) * 1e3}, 0, 0};
    case 2: return ConfigNode{Scalar{rng.below(2) == 0}, 0, 0};
    case 3: return ConfigNode{Scalar{std::monostate{}}, 0, 0};
    case 4: {
      static const std::vector<std::string> tricky = {
          "plain", "with space", "123", "true", "null", "a: b", "# hash", " lead space",
          "trail ", "it's", "he said \"hi\"", "line\nbreak", "tab\there", "", "-dash",
          "[not, a, list]", "<dropout>", "1e9", "0.5", "ends:",
      };
      return ConfigNode{Scalar{tricky[rng.below(tricky.size())]}, 0, 0};
    }
    default: {
      std::string s;
      std::size_t n = rng.below(12);
      for (std::size_t i = 0; i < n; ++i) s += static_cast<char>('a' + rng.below(26));
      return ConfigNode{Scalar{s}, 0, 0};
    }
  }
}

ConfigNode random_tree(Rng& rng, int depth) {
  if (depth >= 3 || rng.below(3) == 0) return random_scalar_node(rng);
  if (rng.below(2) == 0) {
    ConfigNode::Sequence seq;
    std::size_t n = rng.below(4);
    for (std::size_t i = 0; i < n; ++i) seq.items.push_back(random_tree(rng, depth + 1));
    return ConfigNode{std::move(seq), 0, 0};
  }
  ConfigNode::Mapping map;
  std::size_t n = rng.below(4);
  for (std::size_t i = 0; i < n; ++i) {
    map.entries.insert("k" + std::to_string(i), random_tree(rng, depth + 1));
  }
  return ConfigNode{std::move(map), 0, 0};
}

}  // namespace

TEST_CASE("round-trip: parse(dump(t)) == t for tagless documents") {
  Rng rng(20240817);
  for (int trial = 0; trial < 200; ++trial) {
    ConfigNode::Mapping map;
    std::size_t n = 1 + rng.below(5);
    for (std::size_t i = 0; i < n; ++i) {
      map.entries.insert("key" + std::to_string(i), random_tree(rng, 0));
    }
    ConfigNode root{std::move(map), 0, 0};
    std::string dumped = dump_config(root);
    CAPTURE(dumped);
    ConfigNode reparsed = parse(dumped);
    CHECK(reparsed == root);
  }
}
