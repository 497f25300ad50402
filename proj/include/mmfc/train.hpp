#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmfc/dataset.hpp"
#include "mmfc/encoder.hpp"
#include "mmfc/metrics.hpp"
#include "mmfc/mixture.hpp"
#include "mmfc/model.hpp"

namespace mmfc::verifier {

enum class OptimizerKind { adam, adamw };
std::string_view optimizer_name(OptimizerKind o);
OptimizerKind parse_optimizer(std::string_view s);

/// Defaults follow the CLIP-verifier recipe: 50 epochs, effective batch 2048
/// accumulated from micro-batches of 256, Adam at 1e-3.
struct TrainConfig {
  int epochs = 50;
  int batch_size = 2048;
  int micro_batch = 256;
  double lr = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::uint64_t seed = 0;
  Aggregation aggregation = Aggregation::mean;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;  // adamw only
  std::size_t hidden = 128;
  std::size_t stance = 128;

  void validate() const;  // throws InvalidConfig
  int accumulation_steps() const { return batch_size / micro_batch; }

  nlohmann::ordered_json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

/// Adam / AdamW over the flattened parameter vector.
class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, std::size_t n);
  void step(Params& params, const Params& grad);
  std::uint64_t steps() const { return t_; }

 private:
  OptimizerKind kind_;
  double lr_, beta1_, beta2_, eps_, wd_;
  std::vector<double> m_, v_;
  std::uint64_t t_ = 0;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  std::map<std::string, double> val_f1;  // member key -> macro F1 percent
  std::uint64_t optimizer_steps = 0;
  std::uint64_t micro_steps = 0;

  nlohmann::ordered_json to_json() const;
};

struct StepInfo {
  int epoch = 0;
  std::uint64_t update = 0;     // optimizer update index within the run
  int micro_steps = 0;          // micro-batches accumulated into this update
  std::size_t examples = 0;     // examples in this update
};

struct TrainResult {
  Params params;
  std::vector<EpochMetrics> log;
};

using StepObserver = std::function<void(const StepInfo&)>;

/// Trains the stance/aggregation/head stack on `spec`'s train split, scoring
/// each member's val split after every epoch. The encoder is frozen. Throws
/// DivergedLoss on a non-finite loss.
TrainResult train(const mixture::MixtureSpec& spec, const DataStore& store, const TrainConfig& cfg,
                  const Encoder& encoder, const StepObserver& observer = {},
                  const Params* init = nullptr);

/// F1 (percent) of `model` on `examples`, mapping 3-way predictions into
/// `target` when it is binary.
double evaluate(const Verifier& model, const std::vector<VerificationExample>& examples,
                LabelSpace target, eval::Averaging averaging = eval::Averaging::macro);

// Checkpoint directory layout: params.bin, config.json, metrics.jsonl.
struct Checkpoint {
  Params params;
  nlohmann::json config;
};

void save_checkpoint(const std::filesystem::path& dir, const Params& params,
                     const nlohmann::ordered_json& config, const std::vector<EpochMetrics>& log);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace mmfc::verifier
