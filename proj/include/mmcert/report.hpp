#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "mmcert/config.hpp"
#include "mmcert/first_order.hpp"
#include "mmcert/multipliers.hpp"
#include "mmcert/oracle.hpp"
#include "mmcert/second_order.hpp"

namespace mmcert {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CertificateReport {
  int schema = kSchemaVersion;
  std::string problem_digest;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  std::optional<FirstOrderCertificate> first_order;
  std::optional<SecondOrderCertificate> second_order;
  std::optional<JacobianReport> jacobian;
  std::optional<OracleRun> oracle;
  Verdict overall = Verdict::Inconclusive;
  RunConfig config;
  std::string version = kToolVersion;
};

/// Fixed key order, floats with 17 significant digits, non-finite values as
/// the strings "inf", "-inf", "nan".
std::string emit_json(const CertificateReport& r);
/// Throws ReportError on malformed input.
CertificateReport parse_report(const std::string& text);

/// Compact per-stage summary.
std::string render_text(const CertificateReport& r);
/// Prose naming each condition with its witnesses.
std::string explain(const CertificateReport& r);

}  // namespace mmcert
