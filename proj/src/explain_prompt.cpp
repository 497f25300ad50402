#include <cctype>

#include "mmfc/explain.hpp"
#include "mmfc/random.hpp"

namespace mmfc::explain {

const std::string_view kSystemPrompt =
    "You are an AI assistant skilled in fact-checking. Your role is to generate justifications for "
    "relationships between claims and evidence. Analyze the information provided and explain why the "
    "evidence supports or refutes the claim based on the labeled relationship.";

namespace {

constexpr std::string_view kUserTemplate =
    "Here is the information:\n"
    "\n"
    "Claim: {claim}\n"
    "\n"
    "Evidence: {evidence}\n"
    "\n"
    "Relationship: {label}\n"
    "\n"
    "# Task\n"
    "\n"
    "Please generate a explanation that justifies the specified relationship between the claim and "
    "the evidence\n"
    "\n"
    "# Requirements\n"
    "\n"
    "- You should provide explanation without expressing the relationship explicitly.\n"
    "\n"
    "- You should be concise and clear.\n"
    "\n"
    "- The answer should be less than 100 words.";

constexpr std::string_view kZeroShotTemplate =
    "Here is the information:\n"
    "\n"
    "Claim: {claim}\n"
    "\n"
    "Evidence: {evidence}\n"
    "\n"
    "# Task\n"
    "\n"
    "Decide the relationship between the claim and the evidence\n"
    "\n"
    "# Requirements\n"
    "\n"
    "- Answer with exactly one word: supported, refuted or nei.";

// Single pass, so placeholder-looking text inside a value is left alone.
std::string render(std::string_view tmpl, std::string_view claim, std::string_view evidence,
                   std::string_view label) {
  std::string out;
  out.reserve(tmpl.size() + claim.size() + evidence.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        auto name = tmpl.substr(i + 1, close - i - 1);
        if (name == "claim") { out += claim; i = close + 1; continue; }
        if (name == "evidence") { out += evidence; i = close + 1; continue; }
        if (name == "label") { out += label; i = close + 1; continue; }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

Prompt build_prompt(std::string_view claim, std::string_view evidence, VeracityLabel label) {
  return {std::string(kSystemPrompt), render(kUserTemplate, claim, evidence, label_word(label))};
}

Prompt zero_shot_prompt(std::string_view claim, std::string_view evidence) {
  return {std::string(kSystemPrompt), render(kZeroShotTemplate, claim, evidence, "")};
}

std::string prompt_hash(const Prompt& p) {
  std::string bytes = p.system;
  bytes += '\0';
  bytes += p.user;
  return sha256_hex(bytes);
}

std::optional<VeracityLabel> parse_label_reply(std::string_view reply) {
  std::string lower(reply);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

  struct Keyword {
    std::string_view text;
    VeracityLabel label;
  };
  static constexpr Keyword kKeywords[] = {
      {"supported", VeracityLabel::supported}, {"supports", VeracityLabel::supported},
      {"support", VeracityLabel::supported},   {"refuted", VeracityLabel::refuted},
      {"refutes", VeracityLabel::refuted},     {"refute", VeracityLabel::refuted},
      {"not enough info", VeracityLabel::nei}, {"not enough information", VeracityLabel::nei},
      {"nei", VeracityLabel::nei},
  };

  std::optional<VeracityLabel> best;
  std::size_t best_pos = std::string::npos;
  for (const auto& kw : kKeywords) {
    for (auto pos = lower.find(kw.text); pos != std::string::npos; pos = lower.find(kw.text, pos + 1)) {
      const bool left_ok = pos == 0 || !is_word_char(lower[pos - 1]);
      const auto end = pos + kw.text.size();
      const bool right_ok = end >= lower.size() || !is_word_char(lower[end]);
      if (left_ok && right_ok) {
        if (pos < best_pos) {
          best_pos = pos;
          best = kw.label;
        }
        break;
      }
    }
  }
  return best;
}

}  // namespace mmfc::explain
