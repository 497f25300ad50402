#include "mmfc/train.hpp"

#include <cmath>

#include "mmfc/error.hpp"
#include "mmfc/jsonl.hpp"
#include "mmfc/metrics.hpp"

namespace mmfc::verifier {

std::string_view optimizer_name(OptimizerKind o) { return o == OptimizerKind::adam ? "adam" : "adamw"; }

OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "adamw") return OptimizerKind::adamw;
  throw InvalidConfig("unknown optimizer: " + std::string(s));
}

void TrainConfig::validate() const {
  if (epochs < 0) throw InvalidConfig("epochs must be >= 0");
  if (batch_size <= 0 || micro_batch <= 0) throw InvalidConfig("batch sizes must be positive");
  if (batch_size % micro_batch != 0)
    throw InvalidConfig("batch_size " + std::to_string(batch_size) + " is not divisible by micro_batch " +
                        std::to_string(micro_batch));
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InvalidConfig("lr must be finite and >= 0");
  if (hidden == 0 || stance == 0) throw InvalidConfig("layer sizes must be positive");
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["micro_batch"] = micro_batch;
  j["lr"] = lr;
  j["optimizer"] = optimizer_name(optimizer);
  j["seed"] = seed;
  j["aggregation"] = aggregation_name(aggregation);
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["eps"] = eps;
  j["weight_decay"] = weight_decay;
  j["hidden"] = hidden;
  j["stance"] = stance;
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.micro_batch = j.value("micro_batch", c.micro_batch);
  c.lr = j.value("lr", c.lr);
  c.optimizer = parse_optimizer(j.value("optimizer", std::string(optimizer_name(c.optimizer))));
  c.seed = j.value("seed", c.seed);
  c.aggregation = parse_aggregation(j.value("aggregation", std::string(aggregation_name(c.aggregation))));
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.hidden = j.value("hidden", c.hidden);
  c.stance = j.value("stance", c.stance);
  return c;
}

Optimizer::Optimizer(const TrainConfig& cfg, std::size_t n)
    : kind_(cfg.optimizer),
      lr_(cfg.lr),
      beta1_(cfg.beta1),
      beta2_(cfg.beta2),
      eps_(cfg.eps),
      wd_(cfg.weight_decay),
      m_(n, 0.0),
      v_(n, 0.0) {}

void Optimizer::step(Params& params, const Params& grad) {
  auto w = params.flatten();
  const auto g = grad.flatten();
  if (w.size() != m_.size()) throw ShapeMismatch("optimizer state does not match parameters");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < w.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g[i] * g[i];
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    if (kind_ == OptimizerKind::adamw) w[i] -= lr_ * wd_ * w[i];
    w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
  params.assign(w);
}

nlohmann::ordered_json EpochMetrics::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["train_loss"] = train_loss;
  nlohmann::ordered_json f = nlohmann::ordered_json::object();
  for (const auto& [k, v] : val_f1) f[k] = v;
  j["val_f1"] = std::move(f);
  j["optimizer_steps"] = optimizer_steps;
  j["micro_steps"] = micro_steps;
  return j;
}

double evaluate(const Verifier& model, const std::vector<VerificationExample>& examples, LabelSpace target,
                eval::Averaging averaging) {
  std::vector<VeracityLabel> preds, golds;
  preds.reserve(examples.size());
  golds.reserve(examples.size());
  for (const auto& ex : examples) {
    preds.push_back(eval::map_prediction(model.forward(ex), target));
    golds.push_back(ex.label);
  }
  return eval::f1(preds, golds, averaging);
}

TrainResult train(const mixture::MixtureSpec& spec, const DataStore& store, const TrainConfig& cfg,
                  const Encoder& encoder, const StepObserver& observer, const Params* init) {
  cfg.validate();
  const ModelDims dims{encoder.info().embed_dim, cfg.hidden, cfg.stance, 3};
  TrainResult result;
  result.params = init ? *init : Params::init(dims, cfg.seed);
  if (result.params.dims.embed != dims.embed || result.params.dims.hidden != dims.hidden ||
      result.params.dims.stance != dims.stance)
    throw ShapeMismatch("initial parameters do not match the training configuration");
  Params& params = result.params;
  Optimizer opt(cfg, params.size());
  Params grad = Params::zeros(dims);

  // Frozen encoder: embed each example once.
  std::map<std::pair<std::string, std::string>, std::shared_ptr<const Encoded>> cache;
  auto embed = [&](const VerificationExample& ex) {
    auto key = std::make_pair(ex.dataset, ex.id);
    auto it = cache.find(key);
    if (it == cache.end())
      it = cache.emplace(std::move(key), std::make_shared<const Encoded>(encode(encoder, ex))).first;
    return it->second;
  };

  std::map<std::string, std::vector<VerificationExample>> val_sets;
  for (const auto& key : spec.members) {
    auto v = store.at(key).split(Split::val);
    if (!v.empty()) val_sets.emplace(key, std::move(v));
  }

  const auto micro = static_cast<std::size_t>(cfg.micro_batch);
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  std::uint64_t update = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto stream = mixture::build(spec, store, Split::train, static_cast<std::uint64_t>(epoch));
    EpochMetrics m;
    m.epoch = epoch;
    double loss_sum = 0.0;

    for (std::size_t start = 0; start < stream.size(); start += batch) {
      const std::size_t end = std::min(start + batch, stream.size());
      grad.set_zero();
      int micro_steps = 0;
      for (std::size_t mb = start; mb < end; mb += micro) {
        const std::size_t mb_end = std::min(mb + micro, end);
        for (std::size_t i = mb; i < mb_end; ++i) {
          const auto x = embed(stream[i]);
          const double loss = loss_and_grad(params, cfg.aggregation, *x, stream[i].label, &grad);
          if (!std::isfinite(loss))
            throw DivergedLoss("non-finite loss at epoch " + std::to_string(epoch) + ", update " +
                               std::to_string(update) + ", example " + stream[i].dataset + "/" +
                               stream[i].id);
          loss_sum += loss;
        }
        ++micro_steps;
        ++m.micro_steps;
      }
      const auto n = end - start;
      grad.scale(1.0 / static_cast<double>(n));  // sum -> mean
      opt.step(params, grad);
      ++update;
      ++m.optimizer_steps;
      if (observer) observer({epoch, update, micro_steps, n});
    }
    m.train_loss = stream.empty() ? 0.0 : loss_sum / static_cast<double>(stream.size());
    if (!std::isfinite(m.train_loss))
      throw DivergedLoss("non-finite mean train loss at epoch " + std::to_string(epoch));

    for (const auto& [key, examples] : val_sets) {
      std::vector<VeracityLabel> preds, golds;
      for (const auto& ex : examples) {
        const auto pred = predict(params, cfg.aggregation, *embed(ex));
        preds.push_back(eval::map_prediction(pred, descriptor(key).label_space));
        golds.push_back(ex.label);
      }
      m.val_f1[key] = eval::f1(preds, golds, eval::Averaging::macro);
    }
    result.log.push_back(std::move(m));
  }
  return result;
}

void save_checkpoint(const std::filesystem::path& dir, const Params& params,
                     const nlohmann::ordered_json& config, const std::vector<EpochMetrics>& log) {
  std::filesystem::create_directories(dir);
  save_params(dir / "params.bin", params);
  write_file_atomic(dir / "config.json", config.dump(2) + "\n");
  std::string lines;
  for (const auto& m : log) lines += m.to_json().dump() + "\n";
  write_file_atomic(dir / "metrics.jsonl", lines);
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  Checkpoint c;
  c.params = load_params(dir / "params.bin");
  try {
    c.config = nlohmann::json::parse(read_file(dir / "config.json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaViolation(dir.string() + "/config.json: " + e.what());
  }
  return c;
}

}  // namespace mmfc::verifier
