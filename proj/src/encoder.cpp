#include "mmfc/encoder.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "mmfc/error.hpp"
#include "mmfc/random.hpp"

namespace mmfc::verifier {

namespace {

const std::vector<BackendInfo>& backends() {
  static const std::vector<BackendInfo> kBackends{
      {"toy", "", 64, true, true},
      {"clip-base", "openai/clip-vit-base-patch32", 512, true, true},
      {"clip-large", "openai/clip-vit-large-patch14", 768, true, true},
      {"clip-large-336", "openai/clip-vit-large-patch14-336", 768, true, true},
      {"llava", "llava-hf/llava-v1.6-mistral-7b-hf", 4096, true, true},
  };
  return kBackends;
}

std::mutex& plugin_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, EncoderFactory, std::less<>>& plugins() {
  static std::map<std::string, EncoderFactory, std::less<>> p;
  return p;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> toks;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      toks.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) toks.push_back(std::move(cur));
  return toks;
}

void normalize_l2(Eigen::VectorXd& v) {
  const double n = v.norm();
  if (n > 0.0) v /= n;
}

}  // namespace

std::span<const BackendInfo> known_backends() { return backends(); }

const BackendInfo& backend_info(std::string_view name) {
  for (const auto& b : backends())
    if (b.name == name) return b;
  throw BackendUnavailable("unknown backend: " + std::string(name));
}

LoraConfig default_lora_config() { return {}; }

ToyEncoder::ToyEncoder(ToyOptions opts) : opts_(opts), info_(backend_info("toy")) {
  info_.embed_dim = opts_.dim;
  info_.image = opts_.image;
}

Eigen::VectorXd ToyEncoder::embed_text(std::string_view text) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(opts_.dim));
  auto add = [&](std::string_view feature) {
    const std::uint64_t h = derive_seed(opts_.seed, feature);
    const auto bucket = static_cast<Eigen::Index>(h % opts_.dim);
    v[bucket] += (h >> 63) ? -1.0 : 1.0;
  };
  add("\x01bias");
  const auto toks = tokenize(text);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    add(toks[i]);
    if (i + 1 < toks.size()) add(toks[i] + "\x02" + toks[i + 1]);
  }
  normalize_l2(v);
  if (v.norm() == 0.0) v[0] = 1.0;  // all features cancelled out
  return v;
}

Eigen::VectorXd ToyEncoder::embed_image(const std::string& ref) const {
  if (!opts_.image) throw UnsupportedModality("toy backend configured without image support");
  std::string bytes;
  if (std::ifstream in(ref, std::ios::binary); in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    bytes = ss.str();
  } else {
    bytes = ref;
  }
  Rng rng(derive_seed(opts_.seed, "image", bytes));
  Eigen::VectorXd v(static_cast<Eigen::Index>(opts_.dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  normalize_l2(v);
  return v;
}

Encoded encode(const Encoder& enc, std::string_view claim, std::span<const EvidenceItem> evidence) {
  const auto& info = enc.info();
  Encoded out;
  out.claim = enc.embed_text(claim);
  out.evidence.reserve(evidence.size());
  for (const auto& item : evidence) {
    if (item.kind == EvidenceItem::Kind::text) {
      if (!info.text) throw UnsupportedModality(info.name + " cannot embed text evidence");
      out.evidence.push_back(enc.embed_text(item.content));
    } else {
      if (!info.image) throw UnsupportedModality(info.name + " cannot embed image evidence");
      out.evidence.push_back(enc.embed_image(item.content));
    }
  }
  return out;
}

Encoded encode(const Encoder& enc, const VerificationExample& ex) {
  return encode(enc, ex.claim, ex.evidence);
}

void register_backend(const std::string& name, EncoderFactory factory) {
  std::lock_guard lock(plugin_mutex());
  plugins()[name] = std::move(factory);
}

std::unique_ptr<Encoder> make_encoder(std::string_view name, std::uint64_t seed) {
  if (name == "toy") return std::make_unique<ToyEncoder>(ToyOptions{.seed = seed});
  backend_info(name);  // rejects unknown names
  std::lock_guard lock(plugin_mutex());
  auto it = plugins().find(name);
  if (it == plugins().end())
    throw BackendUnavailable("backend \"" + std::string(name) +
                             "\" needs a registered encoder plugin (weights are not bundled)");
  return it->second(seed);
}

}  // namespace mmfc::verifier
