#include "mmfc/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "mmfc/error.hpp"
#include "mmfc/jsonl.hpp"
#include "mmfc/random.hpp"

namespace mmfc::verifier {

std::string_view aggregation_name(Aggregation a) {
  switch (a) {
    case Aggregation::mean: return "mean";
    case Aggregation::max: return "max";
    case Aggregation::attention: return "attention";
  }
  return "mean";
}

Aggregation parse_aggregation(std::string_view s) {
  if (s == "mean") return Aggregation::mean;
  if (s == "max") return Aggregation::max;
  if (s == "attention") return Aggregation::attention;
  throw InvalidConfig("unknown aggregation: " + std::string(s));
}

namespace {

template <typename P, typename F>
void for_each_block(P& p, F&& f) {
  f(p.w1.data(), p.w1.size());
  f(p.b1.data(), p.b1.size());
  f(p.w2.data(), p.w2.size());
  f(p.b2.data(), p.b2.size());
  f(p.null_stance.data(), p.null_stance.size());
  f(p.attention.data(), p.attention.size());
  f(p.head_w.data(), p.head_w.size());
  f(p.head_b.data(), p.head_b.size());
}

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index ix(std::size_t n) { return static_cast<Index>(n); }

VectorXd softmax(const VectorXd& logits) {
  VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

// Per-evidence activations kept for the backward pass.
struct EvidenceTrace {
  VectorXd z;
  VectorXd h;
  VectorXd s;
};

struct Trace {
  std::vector<EvidenceTrace> items;
  VectorXd pooled;
  VectorXd weights;                 // attention weights
  std::vector<Index> argmax_item;   // max pooling winner per stance unit
};

void check_shapes(const Params& p, const Encoded& x) {
  const auto d = ix(p.dims.embed);
  if (x.claim.size() != d)
    throw ShapeMismatch("claim embedding has " + std::to_string(x.claim.size()) + " dims, model expects " +
                        std::to_string(d));
  for (const auto& e : x.evidence)
    if (e.size() != d)
      throw ShapeMismatch("evidence embedding has " + std::to_string(e.size()) +
                          " dims, model expects " + std::to_string(d));
}

Trace run_forward(const Params& p, Aggregation agg, const Encoded& x) {
  check_shapes(p, x);
  const auto d = ix(p.dims.embed);
  Trace t;
  t.items.reserve(x.evidence.size());
  for (const auto& e : x.evidence) {
    EvidenceTrace it;
    it.z.resize(3 * d);
    it.z << x.claim, e, x.claim.cwiseProduct(e);
    it.h = (p.w1 * it.z + p.b1).array().tanh();
    it.s = (p.w2 * it.h + p.b2).array().tanh();
    t.items.push_back(std::move(it));
  }

  const auto n = t.items.size();
  const auto S = ix(p.dims.stance);
  if (n == 0) {
    t.pooled = p.null_stance;
    return t;
  }
  switch (agg) {
    case Aggregation::mean: {
      t.pooled = VectorXd::Zero(S);
      for (const auto& it : t.items) t.pooled += it.s;
      t.pooled /= static_cast<double>(n);
      break;
    }
    case Aggregation::max: {
      t.pooled = t.items[0].s;
      t.argmax_item.assign(static_cast<std::size_t>(S), 0);
      for (std::size_t i = 1; i < n; ++i)
        for (Index k = 0; k < S; ++k)
          if (t.items[i].s[k] > t.pooled[k]) {
            t.pooled[k] = t.items[i].s[k];
            t.argmax_item[static_cast<std::size_t>(k)] = ix(i);
          }
      break;
    }
    case Aggregation::attention: {
      VectorXd scores(ix(n));
      for (std::size_t i = 0; i < n; ++i) scores[ix(i)] = p.attention.dot(t.items[i].s);
      t.weights = softmax(scores);
      t.pooled = VectorXd::Zero(S);
      for (std::size_t i = 0; i < n; ++i) t.pooled += t.weights[ix(i)] * t.items[i].s;
      break;
    }
  }
  return t;
}

}  // namespace

Params Params::zeros(const ModelDims& dims) {
  Params p;
  p.dims = dims;
  const auto d = ix(dims.embed), H = ix(dims.hidden), S = ix(dims.stance), C = ix(dims.classes);
  p.w1 = MatrixXd::Zero(H, 3 * d);
  p.b1 = VectorXd::Zero(H);
  p.w2 = MatrixXd::Zero(S, H);
  p.b2 = VectorXd::Zero(S);
  p.null_stance = VectorXd::Zero(S);
  p.attention = VectorXd::Zero(S);
  p.head_w = MatrixXd::Zero(C, S);
  p.head_b = VectorXd::Zero(C);
  return p;
}

Params Params::init(const ModelDims& dims, std::uint64_t seed) {
  Params p = zeros(dims);
  Rng rng(derive_seed(seed, "params"));
  auto fill = [&rng](MatrixXd& m) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(m.cols()));
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  };
  fill(p.w1);
  fill(p.w2);
  fill(p.head_w);
  for (Index i = 0; i < p.null_stance.size(); ++i) p.null_stance[i] = 0.1 * rng.normal();
  for (Index i = 0; i < p.attention.size(); ++i) p.attention[i] = 0.1 * rng.normal();
  return p;
}

std::size_t Params::size() const {
  std::size_t n = 0;
  for_each_block(*this, [&n](const double*, Index len) { n += static_cast<std::size_t>(len); });
  return n;
}

std::vector<double> Params::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  for_each_block(*this, [&out](const double* d, Index len) { out.insert(out.end(), d, d + len); });
  return out;
}

void Params::assign(std::span<const double> flat) {
  if (flat.size() != size())
    throw ShapeMismatch("parameter vector has " + std::to_string(flat.size()) + " entries, model has " +
                        std::to_string(size()));
  std::size_t off = 0;
  for_each_block(*this, [&](double* d, Index len) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), len, d);
    off += static_cast<std::size_t>(len);
  });
}

void Params::set_zero() {
  for_each_block(*this, [](double* d, Index len) { std::fill_n(d, len, 0.0); });
}

void Params::scale(double s) {
  for_each_block(*this, [s](double* d, Index len) {
    for (Index i = 0; i < len; ++i) d[i] *= s;
  });
}

void Params::add_scaled(const Params& other, double scale) {
  w1 += scale * other.w1;
  b1 += scale * other.b1;
  w2 += scale * other.w2;
  b2 += scale * other.b2;
  null_stance += scale * other.null_stance;
  attention += scale * other.attention;
  head_w += scale * other.head_w;
  head_b += scale * other.head_b;
}

VeracityLabel argmax_label(std::span<const double> probs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return label_from_code(static_cast<int>(best));
}

Eigen::VectorXd aggregate_stance(const Params& p, Aggregation agg, const Encoded& x) {
  return run_forward(p, agg, x).pooled;
}

VeracityPrediction predict(const Params& p, Aggregation agg, const Encoded& x) {
  const Trace t = run_forward(p, agg, x);
  const VectorXd probs = softmax(p.head_w * t.pooled + p.head_b);
  VeracityPrediction out;
  out.probs.assign(probs.data(), probs.data() + probs.size());
  out.label = argmax_label(out.probs);
  return out;
}

double loss_and_grad(const Params& p, Aggregation agg, const Encoded& x, VeracityLabel target,
                     Params* grad) {
  const Trace t = run_forward(p, agg, x);
  const VectorXd logits = p.head_w * t.pooled + p.head_b;
  const double lse = logits.maxCoeff() + std::log((logits.array() - logits.maxCoeff()).exp().sum());
  const auto y = ix(static_cast<std::size_t>(code(target)));
  const double loss = lse - logits[y];
  if (!grad) return loss;

  VectorXd dlogits = softmax(logits);
  dlogits[y] -= 1.0;
  grad->head_w += dlogits * t.pooled.transpose();
  grad->head_b += dlogits;
  const VectorXd dpooled = p.head_w.transpose() * dlogits;

  const auto n = t.items.size();
  if (n == 0) {
    grad->null_stance += dpooled;
    return loss;
  }

  std::vector<VectorXd> ds(n, VectorXd::Zero(ix(p.dims.stance)));
  switch (agg) {
    case Aggregation::mean:
      for (auto& v : ds) v = dpooled / static_cast<double>(n);
      break;
    case Aggregation::max:
      for (Index k = 0; k < dpooled.size(); ++k)
        ds[static_cast<std::size_t>(t.argmax_item[static_cast<std::size_t>(k)])][k] = dpooled[k];
      break;
    case Aggregation::attention: {
      VectorXd dweight(ix(n));
      for (std::size_t i = 0; i < n; ++i) dweight[ix(i)] = dpooled.dot(t.items[i].s);
      const double mean_dw = t.weights.dot(dweight);
      for (std::size_t i = 0; i < n; ++i) {
        const double a = t.weights[ix(i)];
        const double dscore = a * (dweight[ix(i)] - mean_dw);
        ds[i] = a * dpooled + dscore * p.attention;
        grad->attention += dscore * t.items[i].s;
      }
      break;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& it = t.items[i];
    const VectorXd da2 = ds[i].cwiseProduct((1.0 - it.s.array().square()).matrix());
    grad->w2 += da2 * it.h.transpose();
    grad->b2 += da2;
    const VectorXd da1 = (p.w2.transpose() * da2).cwiseProduct((1.0 - it.h.array().square()).matrix());
    grad->w1 += da1 * it.z.transpose();
    grad->b1 += da1;
  }
  return loss;
}

Verifier::Verifier(Params params, Aggregation agg, std::shared_ptr<const Encoder> encoder)
    : params_(std::move(params)), agg_(agg), encoder_(std::move(encoder)) {
  if (encoder_ && encoder_->info().embed_dim != params_.dims.embed)
    throw ShapeMismatch("encoder dim " + std::to_string(encoder_->info().embed_dim) +
                        " != model embed dim " + std::to_string(params_.dims.embed));
}

VeracityPrediction Verifier::forward(const VerificationExample& ex) const {
  return predict(params_, agg_, encode(*encoder_, ex));
}

VeracityPrediction Verifier::forward(const Encoded& x) const { return predict(params_, agg_, x); }

namespace {

constexpr char kMagic[8] = {'M', 'M', 'F', 'C', 'P', 'R', 'M', '1'};

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf += static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint64_t get_u64(std::string_view buf, std::size_t& off) {
  if (off + 8 > buf.size()) throw ShapeMismatch("truncated parameter blob");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[off + i])) << (8 * i);
  off += 8;
  return v;
}

}  // namespace

void save_params(const std::filesystem::path& path, const Params& p) {
  std::string buf(kMagic, sizeof kMagic);
  put_u64(buf, p.dims.embed);
  put_u64(buf, p.dims.hidden);
  put_u64(buf, p.dims.stance);
  put_u64(buf, p.dims.classes);
  const auto flat = p.flatten();
  put_u64(buf, flat.size());
  for (double v : flat) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(buf, bits);
  }
  write_file_atomic(path, buf);
}

Params load_params(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  if (buf.size() < sizeof kMagic || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0)
    throw ShapeMismatch(path.string() + ": not a parameter blob");
  std::size_t off = sizeof kMagic;
  ModelDims dims;
  dims.embed = get_u64(buf, off);
  dims.hidden = get_u64(buf, off);
  dims.stance = get_u64(buf, off);
  dims.classes = get_u64(buf, off);
  const auto n = get_u64(buf, off);
  std::vector<double> flat(n);
  for (auto& v : flat) {
    const std::uint64_t bits = get_u64(buf, off);
    std::memcpy(&v, &bits, sizeof v);
  }
  Params p = Params::zeros(dims);
  p.assign(flat);
  return p;
}

double gradcheck(const Params& p, Aggregation agg, const Encoded& x, VeracityLabel target,
                 std::size_t coords, std::uint64_t seed, double step) {
  Params grad = Params::zeros(p.dims);
  loss_and_grad(p, agg, x, target, &grad);
  const auto analytic = grad.flatten();
  auto flat = p.flatten();
  Params probe = p;
  Rng rng(derive_seed(seed, "gradcheck"));
  double worst = 0.0;
  for (std::size_t c = 0; c < coords; ++c) {
    const auto i = static_cast<std::size_t>(rng.below(flat.size()));
    const double orig = flat[i];
    flat[i] = orig + step;
    probe.assign(flat);
    const double up = loss_and_grad(probe, agg, x, target, nullptr);
    flat[i] = orig - step;
    probe.assign(flat);
    const double down = loss_and_grad(probe, agg, x, target, nullptr);
    flat[i] = orig;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace mmfc::verifier
