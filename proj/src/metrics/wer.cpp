#include <algorithm>
#include <sstream>

#include "speechkit/metrics.hpp"

namespace speechkit::metrics {

namespace {

constexpr const char* kEps = "<eps>";
const std::string kSeparator(41, '=');

// Centered like Python's str.center: the extra space, if any, goes right.
std::string center(const std::string& s, std::size_t width) {
  if (s.size() >= width) return s;
  std::size_t pad = width - s.size();
  std::size_t left = pad / 2;
  return std::string(left, ' ') + s + std::string(pad - left, ' ');
}

const char* op_code(EditOp op) {
  switch (op) {
    case EditOp::Eq: return "=";
    case EditOp::Sub: return "S";
    case EditOp::Del: return "D";
    case EditOp::Ins: return "I";
  }
  return "?";
}

}  // namespace

std::size_t Alignment::errors() const {
  std::size_t n = 0;
  for (const auto& s : steps) {
    if (s.op != EditOp::Eq) ++n;
  }
  return n;
}

Alignment align(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      std::size_t del = at(i - 1, j) + 1;
      std::size_t ins = at(i, j - 1) + 1;
      at(i, j) = std::min({sub, del, ins});
    }
  }

  Alignment alignment;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && at(i, j) == at(i - 1, j - 1)) {
      alignment.steps.push_back({EditOp::Eq, ref[i - 1], hyp[j - 1]});
      --i, --j;
    } else if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + 1) {
      alignment.steps.push_back({EditOp::Sub, ref[i - 1], hyp[j - 1]});
      --i, --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      alignment.steps.push_back({EditOp::Del, ref[i - 1], ""});
      --i;
    } else {
      alignment.steps.push_back({EditOp::Ins, "", hyp[j - 1]});
      --j;
    }
  }
  std::reverse(alignment.steps.begin(), alignment.steps.end());
  return alignment;
}

std::size_t edit_distance(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  // rolling single-row DP, independent of align()'s backtrace machinery
  std::size_t m = hyp.size();
  std::vector<std::size_t> row(m + 1);
  for (std::size_t j = 0; j <= m; ++j) row[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = diag + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      diag = row[j];
      row[j] = std::min({sub, row[j] + 1, row[j - 1] + 1});
    }
  }
  return row[m];
}

void ErrorRateStats::append(const std::string& utterance_id, const std::vector<std::string>& ref,
                            const std::vector<std::string>& hyp) {
  Alignment a = align(ref, hyp);
  ref_tokens_ += ref.size();
  for (const auto& step : a.steps) {
    switch (step.op) {
      case EditOp::Sub: ++subs_; break;
      case EditOp::Del: ++dels_; break;
      case EditOp::Ins: ++ins_; break;
      case EditOp::Eq: break;
    }
  }
  utterances_.push_back({utterance_id, std::move(a)});
}

void ErrorRateStats::note_missing(const std::string&) { ++missing_; }

double ErrorRateStats::error_rate() const {
  if (ref_tokens_ == 0) throw Error("error_rate: empty reference corpus");
  return 100.0 * static_cast<double>(subs_ + dels_ + ins_) / static_cast<double>(ref_tokens_);
}

std::string ErrorRateStats::render_report() const {
  std::ostringstream out;
  out << "Scored " << scored() << " sentences, " << missing() << " not present in hyp.\n";
  out << kSeparator << "\n";
  out << "ALIGNMENTS\n";
  out << "\n";
  out << "Format:\n";
  out << "<utterance-id>, WER DETAILS\n";
  out << "<eps> ; reference  ; on ; the ; first ;  line\n";
  out << "  I   ;     S      ; =  ;  =  ;   S   ;   D  \n";
  out << " and  ; hypothesis ; on ; the ; third ; <eps>\n";
  for (const auto& utt : utterances_) {
    out << kSeparator << "\n";
    out << utt.id << ", \n";
    std::vector<std::string> ref_row, op_row, hyp_row;
    for (const auto& step : utt.alignment.steps) {
      ref_row.push_back(step.op == EditOp::Ins ? kEps : step.ref);
      op_row.push_back(op_code(step.op));
      hyp_row.push_back(step.op == EditOp::Del ? kEps : step.hyp);
    }
    auto emit = [&](const std::vector<std::string>& row) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        std::size_t width = std::max({ref_row[c].size(), op_row[c].size(), hyp_row[c].size()});
        if (c) out << " ; ";
        out << center(row[c], width);
      }
      out << "\n";
    };
    emit(ref_row);
    emit(op_row);
    emit(hyp_row);
  }
  return out.str();
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream iss(line);
  std::string token;
  while (iss >> token) tokens.push_back(token);
  return tokens;
}

}  // namespace speechkit::metrics
