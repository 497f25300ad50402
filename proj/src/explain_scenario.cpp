#include "mmfc/explain.hpp"
#include "mmfc/random.hpp"

namespace mmfc::explain {

std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::oracle: return "oracle";
    case Scenario::opposite: return "opposite";
    case Scenario::random: return "random";
    case Scenario::all: return "all";
    case Scenario::always_supports: return "always_supports";
    case Scenario::always_refutes: return "always_refutes";
    case Scenario::always_nei: return "always_nei";
    case Scenario::guided: return "guided";
  }
  return "oracle";
}

Scenario parse_scenario(std::string_view s) {
  for (auto sc : kAllScenarios)
    if (scenario_name(sc) == s) return sc;
  throw InvalidConfig("unknown scenario: " + std::string(s));
}

ClaimView view_of(const VerificationExample& ex) { return {ex.id, ex.claim}; }

std::vector<VeracityLabel> choose_label_blind(const ClaimView& claim, Scenario scenario,
                                              const ScenarioOptions& opts,
                                              std::optional<VeracityLabel> zero_shot) {
  using enum VeracityLabel;
  switch (scenario) {
    case Scenario::random: {
      Rng rng(derive_seed(opts.seed, "random-label", claim.claim_id));
      return {label_from_code(static_cast<int>(rng.below(3)))};
    }
    case Scenario::all: return {supported, refuted, nei};
    case Scenario::always_supports: return {supported};
    case Scenario::always_refutes: return {refuted};
    case Scenario::always_nei: return {nei};
    case Scenario::guided:
      if (!zero_shot)
        throw MissingZeroShot("guided scenario needs a zero-shot prediction for claim " +
                              std::string(claim.claim_id));
      return {*zero_shot};
    case Scenario::oracle:
    case Scenario::opposite: break;
  }
  throw InvalidConfig(std::string(scenario_name(scenario)) + " requires the gold label");
}

std::vector<VeracityLabel> choose_label(const ClaimView& claim, std::optional<VeracityLabel> gold,
                                        Scenario scenario, const ScenarioOptions& opts,
                                        std::optional<VeracityLabel> zero_shot) {
  if (!needs_gold(scenario)) return choose_label_blind(claim, scenario, opts, zero_shot);
  if (!gold)
    throw MissingGold(std::string(scenario_name(scenario)) + " needs the gold label of claim " +
                      std::string(claim.claim_id));
  if (scenario == Scenario::oracle) return {*gold};
  switch (*gold) {
    case VeracityLabel::supported: return {VeracityLabel::refuted};
    case VeracityLabel::refuted: return {VeracityLabel::supported};
    case VeracityLabel::nei: return {opts.opposite_of_nei};
  }
  return {*gold};
}

}  // namespace mmfc::explain
