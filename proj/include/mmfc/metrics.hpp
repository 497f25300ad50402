#pragma once

#include <span>
#include <string_view>

#include "mmfc/model.hpp"
#include "mmfc/registry.hpp"

namespace mmfc::eval {

enum class Averaging { macro, micro, weighted };
std::string_view averaging_name(Averaging a);
Averaging parse_averaging(std::string_view s);

/// Maps a 3-way prediction into a binary target space. Labels 0 and 1 pass
/// through; label 2 becomes the more probable of {0, 1} (ties -> 0).
/// Throws MissingProbs when label 2 comes without a usable distribution.
VeracityLabel map_prediction(const verifier::VeracityPrediction& pred, LabelSpace target);

/// F1 in percent. Macro averages over the classes present in either list.
/// Throws LengthMismatch / EmptyInput.
double f1(std::span<const VeracityLabel> preds, std::span<const VeracityLabel> golds,
          Averaging averaging = Averaging::macro);

}  // namespace mmfc::eval
