#include "mmcert/config.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmcert {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Refuted: return "refuted";
    case Verdict::Inconclusive: return "inconclusive";
    case Verdict::NecessaryConsistent: return "necessary-consistent";
    case Verdict::SufficientCertified: return "sufficient-certified";
  }
  return "?";
}

std::optional<Verdict> verdict_from_string(const std::string& s) {
  for (Verdict v : {Verdict::Refuted, Verdict::Inconclusive, Verdict::NecessaryConsistent,
                    Verdict::SufficientCertified}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

const char* to_string(FoVerdict v) {
  switch (v) {
    case FoVerdict::Certified: return "certified";
    case FoVerdict::Refuted: return "refuted";
    case FoVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::optional<FoVerdict> fo_verdict_from_string(const std::string& s) {
  for (FoVerdict v : {FoVerdict::Certified, FoVerdict::Refuted, FoVerdict::Inconclusive}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

bool RunConfig::stage(const std::string& name) const {
  return std::find(stages.begin(), stages.end(), name) != stages.end();
}

void RunConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
  };
  if (eps_act) positive(*eps_act, "eps_act");
  positive(stationarity_tol, "stationarity tolerance");
  positive(duality_tol, "duality tolerance");
  positive(critical_tol, "critical-direction tolerance");
  positive(margin_necessary, "necessary margin");
  positive(margin_sufficient, "sufficient margin");
  if (budget < 1) throw std::invalid_argument("budget must be at least 1");
  if (resolution < 3) throw std::invalid_argument("resolution must be at least 3");
  for (double d : deltas) positive(d, "delta");
  if (kappa) positive(*kappa, "kappa");
  if (format != "text" && format != "json") throw std::invalid_argument("format must be text or json");
  for (const auto& s : stages) {
    if (s != "first" && s != "second" && s != "oracle" && s != "jacobian") {
      throw std::invalid_argument("unknown stage '" + s + "'");
    }
  }
}

}  // namespace mmcert
