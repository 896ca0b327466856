#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mmcert {

/// Ordered from worst to best; a report's overall verdict is the minimum.
enum class Verdict { Refuted = 0, Inconclusive = 1, NecessaryConsistent = 2, SufficientCertified = 3 };

const char* to_string(Verdict v);
std::optional<Verdict> verdict_from_string(const std::string& s);

/// First-order outcome.
enum class FoVerdict { Certified, Refuted, Inconclusive };

const char* to_string(FoVerdict v);
std::optional<FoVerdict> fo_verdict_from_string(const std::string& s);

struct RunConfig {
  std::optional<double> eps_act;  // default: default_eps_act at the point
  double stationarity_tol = 1e-7;
  double duality_tol = 1e-7;
  double critical_tol = 1e-6;
  double margin_necessary = 1e-6;
  double margin_sufficient = 1e-6;
  int budget = 64;
  std::uint64_t seed = 0;
  int resolution = 41;
  std::vector<double> deltas = {0.2, 0.1, 0.05};
  std::optional<double> kappa;
  std::string format = "text";
  std::vector<std::string> stages = {"first", "second", "jacobian"};
  bool fail_fast = false;

  bool stage(const std::string& name) const;
  /// Throws std::invalid_argument naming the broken invariant.
  void validate() const;
};

}  // namespace mmcert
