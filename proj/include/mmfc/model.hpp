#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mmfc/encoder.hpp"
#include "mmfc/schema.hpp"

namespace mmfc::verifier {

enum class Aggregation { mean, max, attention };
std::string_view aggregation_name(Aggregation a);
Aggregation parse_aggregation(std::string_view s);

struct ModelDims {
  std::size_t embed = 64;
  std::size_t hidden = 128;
  std::size_t stance = 128;
  std::size_t classes = 3;
};

/// Trainable parameters of the stance / aggregation / veracity stack.
///
///   z_i  = [c ; e_i ; c * e_i]               joint claim-evidence features
///   s_i  = tanh(W2 tanh(W1 z_i + b1) + b2)   stance representation
///   g    = aggregate(s_1..s_n)                or null_stance when n = 0
///   p    = softmax(Wh g + bh)
struct Params {
  ModelDims dims;
  Eigen::MatrixXd w1;  // hidden x 3*embed
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // stance x hidden
  Eigen::VectorXd b2;
  Eigen::VectorXd null_stance;
  Eigen::VectorXd attention;  // scoring vector for attention pooling
  Eigen::MatrixXd head_w;     // classes x stance
  Eigen::VectorXd head_b;

  static Params zeros(const ModelDims& dims);
  static Params init(const ModelDims& dims, std::uint64_t seed);

  std::size_t size() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);  // throws ShapeMismatch
  void set_zero();
  void scale(double s);
  void add_scaled(const Params& other, double scale);
};

struct VeracityPrediction {
  std::vector<double> probs;  // one entry per class, sums to 1
  VeracityLabel label = VeracityLabel::nei;
};

/// argmax with ties broken toward the lower code.
VeracityLabel argmax_label(std::span<const double> probs);

VeracityPrediction predict(const Params& p, Aggregation agg, const Encoded& x);

/// Cross-entropy of the true label. When `grad` is non-null the gradient is
/// added into it.
double loss_and_grad(const Params& p, Aggregation agg, const Encoded& x, VeracityLabel target,
                     Params* grad);

/// The aggregated stance vector for `x` (exposed for tests).
Eigen::VectorXd aggregate_stance(const Params& p, Aggregation agg, const Encoded& x);

/// Encoder + parameters. forward() is const and safe to call concurrently.
class Verifier {
 public:
  Verifier(Params params, Aggregation agg, std::shared_ptr<const Encoder> encoder);

  VeracityPrediction forward(const VerificationExample& ex) const;
  VeracityPrediction forward(const Encoded& x) const;

  const Params& params() const { return params_; }
  Params& params() { return params_; }
  Aggregation aggregation() const { return agg_; }
  const Encoder& encoder() const { return *encoder_; }

 private:
  Params params_;
  Aggregation agg_;
  std::shared_ptr<const Encoder> encoder_;
};

/// Raw little-endian parameter blob with a magic header and dimensions.
void save_params(const std::filesystem::path& path, const Params& p);
Params load_params(const std::filesystem::path& path);

/// Max relative error between analytic and central-difference gradients over
/// `coords` randomly sampled parameter coordinates. The relative error uses
/// max(|analytic|, |numeric|, 1e-6) as denominator.
double gradcheck(const Params& p, Aggregation agg, const Encoded& x, VeracityLabel target,
                 std::size_t coords, std::uint64_t seed, double step = 1e-5);

}  // namespace mmfc::verifier
