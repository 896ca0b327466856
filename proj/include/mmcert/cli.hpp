#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmcert/config.hpp"
#include "mmcert/problem.hpp"
#include "mmcert/report.hpp"

namespace mmcert {

/// 0 sufficient-certified, 1 necessary-consistent, 2 inconclusive, 3 refuted.
int exit_code(Verdict v);
inline constexpr int kInputErrorExit = 4;

/// Runs the enabled stages in the order first, second, jacobian, oracle.
/// Throws InfeasiblePoint, DomainError or std::invalid_argument on bad input.
CertificateReport certify(const ProblemSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const RunConfig& cfg);

/// Oracle stage alone; kappa is cfg.kappa or 2.
CertificateReport oracle_only(const ProblemSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                              const RunConfig& cfg);

struct PointArgs {
  std::optional<std::vector<double>> x;  // overrides point_x from the file
  std::optional<std::vector<double>> y;
};

struct CommandResult {
  int exit = kInputErrorExit;
  std::string out;
  std::string err;
  std::optional<CertificateReport> report;
};

CommandResult cmd_certify(const std::filesystem::path& problem, const PointArgs& point, const RunConfig& cfg);
/// Exit 0 pass, 3 fail, 2 degenerate, 4 input error.
CommandResult cmd_oracle(const std::filesystem::path& problem, const PointArgs& point, const RunConfig& cfg);
CommandResult cmd_explain(const std::filesystem::path& report);

/// Comma-separated doubles; throws std::invalid_argument.
std::vector<double> parse_csv(const std::string& text);

/// Full command line; MINIMAX_CERT_SEED sets the sampling seed.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mmcert
