#include "mmfc/metrics.hpp"

#include <array>

#include "mmfc/error.hpp"

namespace mmfc::eval {

std::string_view averaging_name(Averaging a) {
  switch (a) {
    case Averaging::macro: return "macro";
    case Averaging::micro: return "micro";
    case Averaging::weighted: return "weighted";
  }
  return "macro";
}

Averaging parse_averaging(std::string_view s) {
  if (s == "macro") return Averaging::macro;
  if (s == "micro") return Averaging::micro;
  if (s == "weighted") return Averaging::weighted;
  throw InvalidConfig("unknown F1 averaging: " + std::string(s));
}

VeracityLabel map_prediction(const verifier::VeracityPrediction& pred, LabelSpace target) {
  if (!target.is_binary()) return pred.label;
  if (pred.label != VeracityLabel::nei) return pred.label;
  if (pred.probs.size() < 2) throw MissingProbs("prediction is nei but carries no distribution");
  return pred.probs[1] > pred.probs[0] ? VeracityLabel::refuted : VeracityLabel::supported;
}

double f1(std::span<const VeracityLabel> preds, std::span<const VeracityLabel> golds, Averaging averaging) {
  if (preds.size() != golds.size())
    throw LengthMismatch(std::to_string(preds.size()) + " predictions vs " + std::to_string(golds.size()) +
                         " gold labels");
  if (preds.empty()) throw EmptyInput("F1 of an empty sample");

  std::array<double, 3> tp{}, fp{}, fn{};
  std::array<bool, 3> present{};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto p = static_cast<std::size_t>(code(preds[i]));
    const auto g = static_cast<std::size_t>(code(golds[i]));
    present[p] = present[g] = true;
    if (p == g) {
      tp[p] += 1;
    } else {
      fp[p] += 1;
      fn[g] += 1;
    }
  }

  if (averaging == Averaging::micro) {
    double TP = tp[0] + tp[1] + tp[2];
    double FP = fp[0] + fp[1] + fp[2];
    double FN = fn[0] + fn[1] + fn[2];
    return 100.0 * 2 * TP / (2 * TP + FP + FN);
  }

  double sum = 0.0, weight_sum = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    if (!present[c]) continue;
    const double denom = 2 * tp[c] + fp[c] + fn[c];
    const double f = denom > 0 ? 2 * tp[c] / denom : 0.0;
    const double w = averaging == Averaging::weighted ? tp[c] + fn[c] : 1.0;
    sum += w * f;
    weight_sum += w;
  }
  return weight_sum > 0 ? 100.0 * sum / weight_sum : 0.0;
}

}  // namespace mmfc::eval
