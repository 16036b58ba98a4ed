#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "doctest.h"
#include "speechkit/metrics.hpp"

using namespace speechkit;
using namespace speechkit::metrics;

namespace {

std::vector<std::string> words(const std::string& line) { return tokenize(line); }

// independent edit-distance oracle: plain recursion with memoization
std::size_t edit_oracle(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go =
      [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == ref.size()) return hyp.size() - j;
    if (j == hyp.size()) return ref.size() - i;
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::size_t best = go(i + 1, j + 1) + (ref[i] == hyp[j] ? 0 : 1);
    best = std::min(best, go(i + 1, j) + 1);
    best = std::min(best, go(i, j + 1) + 1);
    memo[key] = best;
    return best;
  };
  return go(0, 0);
}

std::string op_string(const Alignment& a) {
  std::string out;
  for (const auto& s : a.steps) {
    switch (s.op) {
      case EditOp::Eq: out += '='; break;
      case EditOp::Sub: out += 'S'; break;
      case EditOp::Del: out += 'D'; break;
      case EditOp::Ins: out += 'I'; break;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("alignment matches the published utterances") {
  Alignment a = align(words("AT ANOTHER TIME HARALD ASKED"), words("AT ANOTHER TIME HAROLD ASKED"));
  CHECK(op_string(a) == "===S=");

  Alignment b = align(words("THAT WILL BE SAFEST NO NO NEVER"),
                      words("THAT WILL BE THE SAFEST NO NO NEVER"));
  CHECK(op_string(b) == "===I====");
  CHECK(b.errors() == 1);

  Alignment c = align(words("OH BUT I'M GLAD TO GET THIS PLACE MOWED"),
                      words("OH BUT I'M GLAD TO GET THIS PLACE"));
  CHECK(op_string(c) == "========D");

  Alignment d = align(words("WILL YOU FORGIVE ME NOW"), words("WILL YOU FORGIVE ME NOW"));
  CHECK(op_string(d) == "=====");
  CHECK(d.errors() == 0);

  SUBCASE("empty sides degenerate to all-DEL / all-INS") {
    CHECK(op_string(align(words("A B"), {})) == "DD");
    CHECK(op_string(align({}, words("A B C"))) == "III");
    CHECK(align({}, {}).steps.empty());
  }
  SUBCASE("alignment reconstructs both sides in order") {
    Alignment mixed = align(words("A B C D"), words("X B D E"));
    std::vector<std::string> ref_back, hyp_back;
    for (const auto& s : mixed.steps) {
      if (s.op != EditOp::Ins) ref_back.push_back(s.ref);
      if (s.op != EditOp::Del) hyp_back.push_back(s.hyp);
    }
    CHECK(ref_back == words("A B C D"));
    CHECK(hyp_back == words("X B D E"));
  }
}

TEST_CASE("alignment cost equals the brute-force oracle on random pairs") {
  Rng rng(1215);
  for (int trial = 0; trial < 200; ++trial) {
    auto random_tokens = [&]() {
      std::vector<std::string> tokens;
      std::size_t n = rng.below(9);
      for (std::size_t i = 0; i < n; ++i) {
        tokens.push_back(std::string(1, static_cast<char>('a' + rng.below(3))));
      }
      return tokens;
    };
    std::vector<std::string> ref = random_tokens();
    std::vector<std::string> hyp = random_tokens();
    std::size_t expected = edit_oracle(ref, hyp);
    CHECK(align(ref, hyp).errors() == expected);
    CHECK(edit_distance(ref, hyp) == expected);
  }
}

TEST_CASE("error rate over the published four-utterance corpus") {
  ErrorRateStats stats;
  stats.append("61-70968-0058", words("WILL YOU FORGIVE ME NOW"), words("WILL YOU FORGIVE ME NOW"));
  stats.append("5142-33396-0000", words("AT ANOTHER TIME HARALD ASKED"),
               words("AT ANOTHER TIME HAROLD ASKED"));
  stats.append("237-134500-0005", words("OH BUT I'M GLAD TO GET THIS PLACE MOWED"),
               words("OH BUT I'M GLAD TO GET THIS PLACE"));
  stats.append("260-123288-0012", words("THAT WILL BE SAFEST NO NO NEVER"),
               words("THAT WILL BE THE SAFEST NO NO NEVER"));

  CHECK(stats.ref_tokens() == 26);
  CHECK(stats.substitutions() == 1);
  CHECK(stats.deletions() == 1);
  CHECK(stats.insertions() == 1);
  CHECK(stats.error_rate() == doctest::Approx(100.0 * 3 / 26).epsilon(1e-12));

  std::string report = stats.render_report();
  const char* expected =
      "Scored 4 sentences, 0 not present in hyp.\n"
      "=========================================\n"
      "ALIGNMENTS\n"
      "\n"
      "Format:\n"
      "<utterance-id>, WER DETAILS\n"
      "<eps> ; reference  ; on ; the ; first ;  line\n"
      "  I   ;     S      ; =  ;  =  ;   S   ;   D  \n"
      " and  ; hypothesis ; on ; the ; third ; <eps>\n"
      "=========================================\n"
      "61-70968-0058, \n"
      "WILL ; YOU ; FORGIVE ; ME ; NOW\n"
      " =   ;  =  ;    =    ; =  ;  = \n"
      "WILL ; YOU ; FORGIVE ; ME ; NOW\n"
      "=========================================\n"
      "5142-33396-0000, \n"
      "AT ; ANOTHER ; TIME ; HARALD ; ASKED\n"
      "=  ;    =    ;  =   ;   S    ;   =  \n"
      "AT ; ANOTHER ; TIME ; HAROLD ; ASKED\n"
      "=========================================\n"
      "237-134500-0005, \n"
      "OH ; BUT ; I'M ; GLAD ; TO ; GET ; THIS ; PLACE ; MOWED\n"
      "=  ;  =  ;  =  ;  =   ; =  ;  =  ;  =   ;   =   ;   D  \n"
      "OH ; BUT ; I'M ; GLAD ; TO ; GET ; THIS ; PLACE ; <eps>\n"
      "=========================================\n"
      "260-123288-0012, \n"
      "THAT ; WILL ; BE ; <eps> ; SAFEST ; NO ; NO ; NEVER\n"
      " =   ;  =   ; =  ;   I   ;   =    ; =  ; =  ;   =  \n"
      "THAT ; WILL ; BE ;  THE  ; SAFEST ; NO ; NO ; NEVER\n";
  CHECK(report == expected);
}

TEST_CASE("error rate edge cases") {
  ErrorRateStats one_sub;
  one_sub.append("u", words("A B C D E"), words("A B X D E"));
  CHECK(one_sub.error_rate() == doctest::Approx(20.0));

  ErrorRateStats identical;
  identical.append("u", words("A B"), words("A B"));
  CHECK(identical.error_rate() == 0.0);

  ErrorRateStats empty;
  CHECK_THROWS_WITH_AS(empty.error_rate(), doctest::Contains("empty reference"), Error);

  ErrorRateStats missing;
  missing.append("u1", words("A"), words("A"));
  missing.note_missing("u2");
  CHECK(missing.missing() == 1);
  CHECK(missing.scored() == 1);
  std::string report = missing.render_report();
  CHECK(report.find("Scored 1 sentences, 1 not present in hyp.") == 0);

  ErrorRateStats none;
  std::string header_only = none.render_report();
  CHECK(header_only.find("Scored 0 sentences, 0 not present in hyp.") == 0);
  CHECK(header_only.find("ALIGNMENTS") != std::string::npos);

  ErrorRateStats all_eq;
  all_eq.append("u", words("X Y"), words("X Y"));
  CHECK(all_eq.render_report().find("= ; =") != std::string::npos);
}

// ── DER ─────────────────────────────────────────────────────────────────────

namespace {

// millisecond-grid brute force with exhaustive one-to-one speaker mapping
double der_oracle_ms(const std::vector<DiarSegment>& ref, const std::vector<DiarSegment>& hyp,
                     double collar, bool ignore_overlap) {
  auto ms = [](double s) { return static_cast<long>(std::llround(s * 1000.0)); };
  long horizon = 0;
  for (const auto& s : ref) horizon = std::max(horizon, ms(s.end) + ms(collar) + 10);
  for (const auto& s : hyp) horizon = std::max(horizon, ms(s.end) + 10);

  std::vector<std::string> ref_names, hyp_names;
  for (const auto& s : ref) {
    if (std::find(ref_names.begin(), ref_names.end(), s.speaker) == ref_names.end()) {
      ref_names.push_back(s.speaker);
    }
  }
  for (const auto& s : hyp) {
    if (std::find(hyp_names.begin(), hyp_names.end(), s.speaker) == hyp_names.end()) {
      hyp_names.push_back(s.speaker);
    }
  }

  std::vector<char> excluded(static_cast<std::size_t>(horizon), 0);
  for (const auto& s : ref) {
    for (long b : {ms(s.start), ms(s.end)}) {
      for (long t = std::max(0L, b - ms(collar)); t < std::min(horizon, b + ms(collar)); ++t) {
        excluded[static_cast<std::size_t>(t)] = 1;
      }
    }
  }

  std::vector<std::vector<char>> ref_active(
      ref_names.size(), std::vector<char>(static_cast<std::size_t>(horizon), 0));
  std::vector<std::vector<char>> hyp_active(
      hyp_names.size(), std::vector<char>(static_cast<std::size_t>(horizon), 0));
  for (const auto& s : ref) {
    std::size_t idx = static_cast<std::size_t>(
        std::find(ref_names.begin(), ref_names.end(), s.speaker) - ref_names.begin());
    for (long t = ms(s.start); t < ms(s.end); ++t) ref_active[idx][static_cast<std::size_t>(t)] = 1;
  }
  for (const auto& s : hyp) {
    std::size_t idx = static_cast<std::size_t>(
        std::find(hyp_names.begin(), hyp_names.end(), s.speaker) - hyp_names.begin());
    for (long t = ms(s.start); t < ms(s.end); ++t) hyp_active[idx][static_cast<std::size_t>(t)] = 1;
  }

  // try every injective mapping hyp index -> ref index (padded permutations)
  std::size_t n = std::max(ref_names.size(), hyp_names.size());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double err_ms = 0, ref_ms = 0;
    for (long t = 0; t < horizon; ++t) {
      auto ti = static_cast<std::size_t>(t);
      if (excluded[ti]) continue;
      int n_ref = 0, n_hyp = 0, correct = 0;
      for (std::size_t r = 0; r < ref_names.size(); ++r) n_ref += ref_active[r][ti];
      if (ignore_overlap && n_ref >= 2) continue;
      for (std::size_t h = 0; h < hyp_names.size(); ++h) n_hyp += hyp_active[h][ti];
      for (std::size_t h = 0; h < hyp_names.size(); ++h) {
        if (!hyp_active[h][ti]) continue;
        auto mapped = static_cast<std::size_t>(perm[h]);
        if (mapped < ref_names.size() && ref_active[mapped][ti]) ++correct;
      }
      err_ms += std::max(n_ref, n_hyp) - correct;
      ref_ms += n_ref;
    }
    if (ref_ms > 0) best = std::min(best, 100.0 * err_ms / ref_ms);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("DER on hand-checked scenarios") {
  std::vector<DiarSegment> ref = {{0, 10, "A"}};
  SUBCASE("identical hypothesis scores zero") {
    CHECK(der(ref, ref, 0, false).der_percent == doctest::Approx(0.0));
  }
  SUBCASE("one missed second out of ten") {
    std::vector<DiarSegment> hyp = {{0, 9, "X"}};
    DerBreakdown b = der(ref, hyp, 0, false);
    CHECK(b.missed == doctest::Approx(1.0));
    CHECK(b.false_alarm == doctest::Approx(0.0));
    CHECK(b.confusion == doctest::Approx(0.0));
    CHECK(b.der_percent == doctest::Approx(10.0));
  }
  SUBCASE("collar forgives boundary errors") {
    std::vector<DiarSegment> hyp = {{0.1, 10, "A"}};
    CHECK(der(ref, hyp, 0.25, false).der_percent == doctest::Approx(0.0));
    CHECK(der(ref, hyp, 0, false).der_percent > 0.0);
  }
  SUBCASE("false alarm and confusion combine") {
    std::vector<DiarSegment> ref2 = {{0, 5, "A"}, {5, 10, "B"}};
    std::vector<DiarSegment> hyp2 = {{0, 5, "1"}, {5, 10, "1"}};
    // one-to-one mapping matches "1" to one side only: 5 s confusion
    DerBreakdown b = der(ref2, hyp2, 0, false);
    CHECK(b.confusion == doctest::Approx(5.0));
    CHECK(b.der_percent == doctest::Approx(50.0));
  }
  SUBCASE("ignore_overlap drops two-speaker regions") {
    std::vector<DiarSegment> ref2 = {{0, 10, "A"}, {5, 15, "B"}};
    std::vector<DiarSegment> hyp2 = {{0, 5, "A"}, {10, 15, "B"}};  // silent during overlap
    DerBreakdown with = der(ref2, hyp2, 0, true);
    CHECK(with.der_percent == doctest::Approx(0.0));
    DerBreakdown without = der(ref2, hyp2, 0, false);
    CHECK(without.missed == doctest::Approx(10.0));  // both speakers missed in 5..10
  }
  SUBCASE("empty reference errors") {
    CHECK_THROWS_WITH_AS(der({}, ref, 0, false), doctest::Contains("empty reference"), Error);
    CHECK_THROWS_AS(der({{0, 1, "A"}}, {}, 10, false), Error);  // everything inside the collar
  }
  SUBCASE("bad segments error") {
    CHECK_THROWS_AS(der({{5, 5, "A"}}, {}, 0, false), Error);
  }
}

TEST_CASE("DER is invariant to hypothesis label permutation") {
  Rng rng(5150);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<DiarSegment> ref, hyp;
    const char* names[3] = {"s1", "s2", "s3"};
    for (int seg = 0; seg < 6; ++seg) {
      double start = static_cast<double>(rng.below(20000)) / 1000.0;
      double dur = 0.2 + static_cast<double>(rng.below(3000)) / 1000.0;
      ref.push_back({start, start + dur, names[rng.below(3)]});
      start = static_cast<double>(rng.below(20000)) / 1000.0;
      dur = 0.2 + static_cast<double>(rng.below(3000)) / 1000.0;
      hyp.push_back({start, start + dur, names[rng.below(3)]});
    }
    double base = der(ref, hyp, 0.25, false).der_percent;
    std::vector<DiarSegment> relabeled = hyp;
    for (auto& s : relabeled) {
      s.speaker = s.speaker == "s1" ? "zz" : (s.speaker == "s2" ? "s1" : "qq");
    }
    CHECK(der(ref, relabeled, 0.25, false).der_percent == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("DER matches the millisecond-grid oracle on random 3-speaker scenarios") {
  Rng rng(31337);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<DiarSegment> ref, hyp;
    const char* ref_names[3] = {"A", "B", "C"};
    const char* hyp_names[3] = {"x", "y", "z"};
    for (int seg = 0; seg < 5; ++seg) {
      long start = static_cast<long>(rng.below(15000));
      long dur = 300 + static_cast<long>(rng.below(4000));
      ref.push_back({start / 1000.0, (start + dur) / 1000.0, ref_names[rng.below(3)]});
      start = static_cast<long>(rng.below(15000));
      dur = 300 + static_cast<long>(rng.below(4000));
      hyp.push_back({start / 1000.0, (start + dur) / 1000.0, hyp_names[rng.below(3)]});
    }
    bool ignore_overlap = trial % 2 == 0;
    double collar = trial % 3 == 0 ? 0.25 : 0.0;
    double got = der(ref, hyp, collar, ignore_overlap).der_percent;
    double want = der_oracle_ms(ref, hyp, collar, ignore_overlap);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("assignment solver maximizes total weight") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t rows = 1 + rng.below(4), cols = 1 + rng.below(4);
    std::vector<double> weights(rows * cols);
    for (double& w : weights) w = rng.uniform() * 10;

    std::vector<int> got = max_weight_assignment(weights, rows, cols);
    double got_total = 0;
    std::vector<char> used(cols, 0);
    for (std::size_t r = 0; r < rows; ++r) {
      if (got[r] >= 0) {
        CHECK_FALSE(used[static_cast<std::size_t>(got[r])]);
        used[static_cast<std::size_t>(got[r])] = 1;
        got_total += weights[r * cols + static_cast<std::size_t>(got[r])];
      }
    }

    // exhaustive best over injective row -> column maps
    std::size_t n = std::max(rows, cols);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0;
    do {
      double total = 0;
      for (std::size_t r = 0; r < rows; ++r) {
        if (static_cast<std::size_t>(perm[r]) < cols) {
          total += weights[r * cols + static_cast<std::size_t>(perm[r])];
        }
      }
      best = std::max(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got_total == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("RTTM parsing groups by file") {
  std::string rttm =
      "SPEAKER meeting1 1 0.50 2.00 <NA> <NA> alice <NA> <NA>\n"
      ";; comment line\n"
      "SPEAKER meeting1 1 3.00 1.50 <NA> <NA> bob <NA> <NA>\n"
      "SPEAKER meeting2 1 0.00 4.00 <NA> <NA> carol <NA> <NA>\n";
  auto by_file = parse_rttm(rttm);
  REQUIRE(by_file.size() == 2);
  CHECK(by_file.at("meeting1").size() == 2);
  CHECK(by_file.at("meeting1")[0].speaker == "alice");
  CHECK(by_file.at("meeting1")[0].end == doctest::Approx(2.5));
  CHECK(by_file.at("meeting2")[0].speaker == "carol");
  CHECK_THROWS_AS(parse_rttm("SPEAKER only_three 1\n"), Error);
}

// ── EER ─────────────────────────────────────────────────────────────────────

namespace {

double eer_dense_oracle(const std::vector<double>& target, const std::vector<double>& nontarget) {
  double lo = std::min(*std::min_element(target.begin(), target.end()),
                       *std::min_element(nontarget.begin(), nontarget.end())) -
              1.0;
  double hi = std::max(*std::max_element(target.begin(), target.end()),
                       *std::max_element(nontarget.begin(), nontarget.end())) +
              1.0;
  double best = 1.0;
  const int steps = 1000000;
  for (int i = 0; i <= steps; ++i) {
    double t = lo + (hi - lo) * i / steps;
    double far = 0, frr = 0;
    for (double s : nontarget) far += s >= t ? 1.0 : 0.0;
    for (double s : target) frr += s < t ? 1.0 : 0.0;
    far /= static_cast<double>(nontarget.size());
    frr /= static_cast<double>(target.size());
    best = std::min(best, std::max(far, frr));
  }
  return 100.0 * best;
}

}  // namespace

TEST_CASE("EER on constructed score sets") {
  SUBCASE("perfectly separable scores give zero") {
    EerResult r = eer({0.9, 0.8}, {0.1, 0.2});
    CHECK(r.eer_percent == doctest::Approx(0.0));
    CHECK(r.threshold > 0.2);
    CHECK(r.threshold < 0.8);
  }
  SUBCASE("identical distributions give fifty percent") {
    std::vector<double> scores;
    Rng rng(4242);
    for (int i = 0; i < 4000; ++i) scores.push_back(rng.normal());
    EerResult r = eer(scores, scores);
    CHECK(r.eer_percent == doctest::Approx(50.0).epsilon(0.02));
  }
  SUBCASE("empty inputs error") {
    CHECK_THROWS_AS(eer({}, {0.5}), Error);
    CHECK_THROWS_AS(eer({0.5}, {}), Error);
  }
}

TEST_CASE("EER matches a dense sweep oracle on Gaussian scores") {
  Rng rng(909);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> target, nontarget;
    for (int i = 0; i < 500; ++i) {
      target.push_back(rng.normal() + 1.0);
      nontarget.push_back(rng.normal() - 1.0);
    }
    EerResult r = eer(target, nontarget);
    double oracle = eer_dense_oracle(target, nontarget);
    CHECK(std::abs(r.eer_percent - oracle) <= 0.05);
  }
}

TEST_CASE("EER is symmetric under role swap with negated scores") {
  Rng rng(808);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> target, nontarget;
    std::size_t nt = 2 + rng.below(50), nn = 2 + rng.below(50);
    for (std::size_t i = 0; i < nt; ++i) target.push_back(rng.normal() * 2 + 0.5);
    for (std::size_t i = 0; i < nn; ++i) nontarget.push_back(rng.normal() * 2 - 0.5);
    std::vector<double> neg_target, neg_nontarget;
    for (double s : nontarget) neg_target.push_back(-s);
    for (double s : target) neg_nontarget.push_back(-s);
    EerResult a = eer(target, nontarget);
    EerResult b = eer(neg_target, neg_nontarget);
    CHECK(a.eer_percent == doctest::Approx(b.eer_percent).epsilon(1e-9));
  }
}

// ── SI-SNR ──────────────────────────────────────────────────────────────────

TEST_CASE("SI-SNR identities") {
  Rng rng(606);
  std::vector<double> s(2000);
  for (double& v : s) v = rng.normal();

  SUBCASE("perfect estimate returns +inf") {
    CHECK(std::isinf(si_snr(s, s)));
    CHECK(si_snr(s, s) > 0);
  }
  SUBCASE("si_snri of the mixture itself is exactly zero") {
    std::vector<double> mix(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) mix[i] = s[i] + 0.5 * rng.normal();
    CHECK(si_snri(s, mix, mix) == 0.0);
  }
  SUBCASE("length mismatch and zero-energy reference error") {
    std::vector<double> shorter(s.begin(), s.end() - 1);
    CHECK_THROWS_WITH_AS(si_snr(s, shorter), doctest::Contains("length mismatch"), Error);
    std::vector<double> flat(2000, 3.0);  // constant: zero energy after mean removal
    CHECK_THROWS_WITH_AS(si_snr(flat, s), doctest::Contains("zero energy"), Error);
  }
}

TEST_CASE("constructed orthogonal noise at -20 dB gives exactly 20 dB") {
  Rng rng(515);
  std::size_t n = 4096;
  std::vector<double> s(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = rng.normal();
    v[i] = rng.normal();
  }
  // normalize s the same way si_snr does
  double mean = 0;
  for (double x : s) mean += x;
  mean /= static_cast<double>(n);
  double energy = 0;
  for (double& x : s) {
    x -= mean;
    energy += x * x;
  }
  double stddev = std::sqrt(energy / static_cast<double>(n));
  for (double& x : s) x /= stddev;

  // make v zero-mean and orthogonal to s, then set ||v||^2 = ||s||^2 / 100
  double vmean = 0;
  for (double x : v) vmean += x;
  vmean /= static_cast<double>(n);
  for (double& x : v) x -= vmean;
  double dot = 0, s_energy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += v[i] * s[i];
    s_energy += s[i] * s[i];
  }
  for (std::size_t i = 0; i < n; ++i) v[i] -= dot / s_energy * s[i];
  double v_energy = 0;
  for (double x : v) v_energy += x * x;
  double scale = std::sqrt(s_energy / 100.0 / v_energy);
  std::vector<double> est(n);
  for (std::size_t i = 0; i < n; ++i) est[i] = s[i] + scale * v[i];

  CHECK(si_snr(s, est) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(std::abs(si_snr(s, est) - 20.0) < 1e-9);
}

TEST_CASE("SI-SNR is scale invariant") {
  Rng rng(717);
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n = 64 + rng.below(256);
    std::vector<double> s(n), est(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = rng.normal();
      est[i] = s[i] + 0.3 * rng.normal();
    }
    double beta = std::exp((rng.uniform() - 0.5) * 10);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = beta * est[i];
    double a = si_snr(s, est);
    double b = si_snr(s, scaled);
    CHECK(std::abs(a - b) < 1e-10);
  }
}
