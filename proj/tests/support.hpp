#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <random>
#include <sys/wait.h>
#include <string>
#include <vector>

#include "mmfc/random.hpp"
#include "mmfc/schema.hpp"

namespace mmfc::test {

inline std::filesystem::path source_path(const std::string& rel) {
  return std::filesystem::path(MMFC_SOURCE_DIR) / rel;
}

inline std::string cli_path() { return MMFC_CLI; }

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "mmfc") {
    auto base = std::filesystem::temp_directory_path();
    Rng rng(std::random_device{}());
    path_ = base / (tag + "-" + std::to_string(rng.next() % 1000000000ULL));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& s) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << s;
}

struct Shell {
  int code = -1;
  std::string out;
};

/// Runs a shell command, capturing stdout and stderr together.
inline Shell shell(const std::string& cmd) {
  Shell r;
  FILE* pipe = ::popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (auto n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string random_text(Rng& rng, std::size_t max_len) {
  static const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyz ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789\t\n\"\\/{}[],:;'!?-_";
  std::string s;
  const auto n = rng.below(max_len + 1);
  for (std::size_t i = 0; i < n; ++i) s += alphabet[rng.below(alphabet.size())];
  if (rng.below(4) == 0) s += "\xc3\xa9\xe2\x82\xac";  // UTF-8 text
  return s;
}

inline VerificationExample random_example(Rng& rng, std::size_t i) {
  VerificationExample ex;
  ex.id = "ex-" + std::to_string(i) + "-" + random_text(rng, 6);
  ex.claim = random_text(rng, 40);
  const auto n_ev = rng.below(4);
  for (std::size_t k = 0; k < n_ev; ++k) {
    if (rng.below(3) == 0)
      ex.evidence.push_back(EvidenceItem::image("img/" + std::to_string(rng.below(1000)) + ".jpg"));
    else
      ex.evidence.push_back(EvidenceItem::text(random_text(rng, 60), rng.below(5) == 0));
  }
  ex.label = label_from_code(static_cast<int>(rng.below(3)));
  static const char* kSets[] = {"moc", "fak", "ph", "fv", "vc", "ngt"};
  ex.dataset = kSets[rng.below(6)];
  ex.domain = static_cast<DomainTag>(rng.below(3));
  ex.split = static_cast<Split>(rng.below(3));
  if (rng.below(2) == 0)
    ex.timestamp = Date{static_cast<int>(2000 + rng.below(25)), static_cast<int>(1 + rng.below(12)),
                        static_cast<int>(1 + rng.below(28))};
  return ex;
}

}  // namespace mmfc::test
