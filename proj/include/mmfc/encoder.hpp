#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mmfc/schema.hpp"

namespace mmfc::verifier {

/// LoRA fine-tuning defaults recorded for the generative (LLaVA) backend.
/// The backend itself is a plugin; these values travel in its config.
struct LoraConfig {
  int rank = 64;
  double alpha = 16.0;
  double dropout = 0.05;
  double lr = 2e-5;
  std::string scheduler = "cosine";
  int max_seq_len = 2048;
  int batch_size = 32;
  int micro_batch = 1;
  std::string optimizer = "adamw";
  std::string precision = "bfloat16";
};

struct BackendInfo {
  std::string name;        // toy | clip-base | clip-large | clip-large-336 | llava
  std::string checkpoint;  // hub id for the pretrained weights, empty for toy
  std::size_t embed_dim = 0;
  bool text = true;
  bool image = true;
};

/// Known backends. Only "toy" is built in; the rest need a registered plugin.
std::span<const BackendInfo> known_backends();
const BackendInfo& backend_info(std::string_view name);
LoraConfig default_lora_config();

class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual const BackendInfo& info() const = 0;
  virtual Eigen::VectorXd embed_text(std::string_view text) const = 0;
  virtual Eigen::VectorXd embed_image(const std::string& ref) const = 0;
};

struct Encoded {
  Eigen::VectorXd claim;
  std::vector<Eigen::VectorXd> evidence;  // one per evidence item, in order
};

/// Embeds a claim and its evidence. Throws UnsupportedModality when the
/// backend cannot embed a present evidence kind.
Encoded encode(const Encoder& enc, std::string_view claim, std::span<const EvidenceItem> evidence);
Encoded encode(const Encoder& enc, const VerificationExample& ex);

struct ToyOptions {
  std::uint64_t seed = 0;
  std::size_t dim = 64;
  bool image = true;
};

/// Deterministic feature-hashing encoder. Text: signed hashed unigrams and
/// bigrams plus a constant bias feature, L2-normalized. Image: a Gaussian
/// vector seeded by the file bytes (or by the reference string when the file
/// cannot be read), L2-normalized.
class ToyEncoder final : public Encoder {
 public:
  explicit ToyEncoder(ToyOptions opts = {});
  const BackendInfo& info() const override { return info_; }
  Eigen::VectorXd embed_text(std::string_view text) const override;
  Eigen::VectorXd embed_image(const std::string& ref) const override;

 private:
  ToyOptions opts_;
  BackendInfo info_;
};

using EncoderFactory = std::function<std::unique_ptr<Encoder>(std::uint64_t seed)>;

/// Registers a plugin implementation for a non-toy backend name.
void register_backend(const std::string& name, EncoderFactory factory);

/// Throws BackendUnavailable when `name` has no implementation.
std::unique_ptr<Encoder> make_encoder(std::string_view name, std::uint64_t seed);

}  // namespace mmfc::verifier
