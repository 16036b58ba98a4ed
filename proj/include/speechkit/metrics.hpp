#pragma once

#include <span>
#include <string>
#include <vector>

#include "speechkit/common.hpp"

namespace speechkit::metrics {

// ── Token error rate (WER / PER) ────────────────────────────────────────────

enum class EditOp { Eq, Sub, Del, Ins };

/// Minimal-cost token alignment. Deleted/inserted sides hold an empty
/// string and render as `<eps>`.
struct Alignment {
  struct Step {
    EditOp op;
    std::string ref;  // empty for Ins
    std::string hyp;  // empty for Del
  };
  std::vector<Step> steps;

  std::size_t errors() const;  // subs + dels + ins
};

/// Levenshtein alignment with unit costs, deterministic backtrace
/// preference Eq > Sub > Del > Ins on ties.
Alignment align(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

/// Cost-only edit distance (no alignment); used as an independent check.
std::size_t edit_distance(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

/// Corpus-level accumulator. Utterances with a missing hypothesis are
/// counted separately and excluded from the token counts.
class ErrorRateStats {
 public:
  void append(const std::string& utterance_id, const std::vector<std::string>& ref,
              const std::vector<std::string>& hyp);
  void note_missing(const std::string& utterance_id);

  double error_rate() const;  // 100 * (S + D + I) / N, throws when N == 0

  std::size_t ref_tokens() const { return ref_tokens_; }
  std::size_t substitutions() const { return subs_; }
  std::size_t deletions() const { return dels_; }
  std::size_t insertions() const { return ins_; }
  std::size_t scored() const { return utterances_.size(); }
  std::size_t missing() const { return missing_; }

  /// The summary format: `Scored {n} sentences, {m} not present in hyp.`,
  /// '=' separators, the ALIGNMENTS legend, then one block per utterance
  /// with ref tokens, op codes and hyp tokens joined by " ; ", each
  /// column centered to the widest of the three.
  std::string render_report() const;

 private:
  struct Utterance {
    std::string id;
    Alignment alignment;
  };
  std::vector<Utterance> utterances_;
  std::size_t ref_tokens_ = 0;
  std::size_t subs_ = 0;
  std::size_t dels_ = 0;
  std::size_t ins_ = 0;
  std::size_t missing_ = 0;
};

/// Whitespace tokenization used by the scoring CLI.
std::vector<std::string> tokenize(const std::string& line);

// ── Diarization error rate ──────────────────────────────────────────────────

struct DiarSegment {
  double start = 0;
  double end = 0;
  std::string speaker;
};

struct DerBreakdown {
  double false_alarm = 0;   // seconds
  double missed = 0;        // seconds
  double confusion = 0;     // seconds
  double reference_length = 0;  // scored reference speaker-seconds
  double der_percent = 0;
};

/// DER with a forgiveness collar around reference boundaries and
/// optional exclusion of reference-overlap regions. Hypothesis speakers
/// are mapped to reference speakers by the overlap-maximizing one-to-one
/// assignment.
DerBreakdown der(const std::vector<DiarSegment>& ref, const std::vector<DiarSegment>& hyp,
                 double collar, bool ignore_overlap);

/// RTTM SPEAKER lines -> segments grouped by file id (field 2).
SmallMap<std::vector<DiarSegment>> parse_rttm(const std::string& text);

/// Maximum-weight one-to-one assignment on a rows x cols weight matrix
/// (row-major); returns per-row column index or -1. Exposed for tests.
std::vector<int> max_weight_assignment(const std::vector<double>& weights, std::size_t rows,
                                       std::size_t cols);

// ── Equal error rate ────────────────────────────────────────────────────────

struct EerResult {
  double eer_percent = 0;
  double threshold = 0;
};

/// Threshold sweep over sorted score midpoints; FAR(t) = fraction of
/// nontarget >= t, FRR(t) = fraction of target < t, linear interpolation
/// at the crossing.
EerResult eer(const std::vector<double>& target_scores, const std::vector<double>& nontarget_scores);

// ── Scale-invariant SNR ─────────────────────────────────────────────────────

/// SI-SNR in dB; +inf when the estimate matches the (normalized)
/// reference exactly.
double si_snr(std::span<const double> reference, std::span<const double> estimate);

/// SI-SNR(s, est) - SI-SNR(s, mix).
double si_snri(std::span<const double> reference, std::span<const double> estimate,
               std::span<const double> mixture);

}  // namespace speechkit::metrics
