#include "mmcert/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "mmcert/cones.hpp"
#include "mmcert/expression.hpp"
#include "mmcert/first_order.hpp"
#include "mmcert/multipliers.hpp"
#include "mmcert/oracle.hpp"
#include "mmcert/second_order.hpp"

namespace mmcert {

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Oracle outcomes only ever lower the overall verdict.
std::optional<Verdict> oracle_stage_verdict(OracleVerdict v) {
  switch (v) {
    case OracleVerdict::Pass: return std::nullopt;
    case OracleVerdict::Fail: return Verdict::Refuted;
    case OracleVerdict::Degenerate: return Verdict::Inconclusive;
  }
  return Verdict::Inconclusive;
}

void lower(std::optional<Verdict>& acc, Verdict v) {
  if (!acc || static_cast<int>(v) < static_cast<int>(*acc)) acc = v;
}

struct LoadedInput {
  ProblemSpec spec;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

LoadedInput load_input(const std::filesystem::path& path, const PointArgs& point) {
  LoadedInput in;
  in.spec = load_problem(path);
  const auto& px = point.x ? point.x : in.spec.point_x;
  const auto& py = point.y ? point.y : in.spec.point_y;
  if (!px || !py) throw std::invalid_argument("no candidate point: pass --x and --y or set point_x/point_y");
  if (static_cast<int>(px->size()) != in.spec.n) {
    throw std::invalid_argument("point x has " + std::to_string(px->size()) + " entries, problem has n = " +
                                std::to_string(in.spec.n));
  }
  if (static_cast<int>(py->size()) != in.spec.m) {
    throw std::invalid_argument("point y has " + std::to_string(py->size()) + " entries, problem has m = " +
                                std::to_string(in.spec.m));
  }
  in.x = to_vector(*px);
  in.y = to_vector(*py);
  return in;
}

std::string render(const CertificateReport& r, const RunConfig& cfg) {
  return cfg.format == "json" ? emit_json(r) : render_text(r);
}

template <class Body>
CommandResult guarded(Body body) {
  CommandResult res;
  try {
    body(res);
  } catch (const InfeasiblePoint& e) {
    res = CommandResult{};
    std::string msg = "error: infeasible point";
    for (const auto& v : e.violations()) msg += "\n  " + v;
    res.err = msg + "\n";
  } catch (const std::exception& e) {
    // parse, validation, domain, budget and I/O failures are all input errors
    res = CommandResult{};
    res.err = std::string("error: ") + e.what() + "\n";
  }
  return res;
}

}  // namespace

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::SufficientCertified: return 0;
    case Verdict::NecessaryConsistent: return 1;
    case Verdict::Inconclusive: return 2;
    case Verdict::Refuted: return 3;
  }
  return 2;
}

CertificateReport certify(const ProblemSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const RunConfig& cfg) {
  validate(spec);
  cfg.validate();
  const CandidatePoint p(spec, x, y);
  // feasibility is checked once for every stage
  active_sets(spec, p, cfg.eps_act ? *cfg.eps_act : default_eps_act(p));

  CertificateReport r;
  r.problem_digest = problem_digest(spec);
  r.x = x;
  r.y = y;
  r.config = cfg;

  std::optional<Verdict> acc;
  auto stop = [&] { return cfg.fail_fast && acc && *acc == Verdict::Refuted; };

  if (cfg.stage("first")) {
    r.first_order = first_order_certificate(spec, p, cfg);
    switch (r.first_order->overall) {
      case FoVerdict::Certified:
        if (!cfg.stage("second")) lower(acc, Verdict::NecessaryConsistent);
        break;
      case FoVerdict::Refuted: lower(acc, Verdict::Refuted); break;
      case FoVerdict::Inconclusive: lower(acc, Verdict::Inconclusive); break;
    }
  }
  if (cfg.stage("second") && !stop()) {
    r.second_order = r.first_order ? second_order_certificate(spec, p, cfg, *r.first_order)
                                    : second_order_certificate(spec, p, cfg);
    lower(acc, r.second_order->overall);
  }
  if (cfg.stage("jacobian") && !stop()) {
    r.jacobian = jacobian_uniqueness_check(spec, p, config_active_sets(spec, p, cfg));
  }
  if (cfg.stage("oracle") && !stop()) {
    const double kappa = cfg.kappa ? *cfg.kappa : r.second_order ? r.second_order->kappa_estimate : 2.0;
    r.oracle = run_oracle(spec, p, cfg, kappa);
    if (auto v = oracle_stage_verdict(r.oracle->verdict)) lower(acc, *v);
  }
  r.overall = acc ? *acc : Verdict::Inconclusive;
  return r;
}

CertificateReport oracle_only(const ProblemSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                              const RunConfig& cfg) {
  RunConfig c = cfg;
  c.stages = {"oracle"};
  c.fail_fast = false;
  return certify(spec, x, y, c);
}

CommandResult cmd_certify(const std::filesystem::path& problem, const PointArgs& point, const RunConfig& cfg) {
  return guarded([&](CommandResult& res) {
    const LoadedInput in = load_input(problem, point);
    CertificateReport r = certify(in.spec, in.x, in.y, cfg);
    res.exit = exit_code(r.overall);
    res.out = render(r, cfg);
    res.report = std::move(r);
  });
}

CommandResult cmd_oracle(const std::filesystem::path& problem, const PointArgs& point, const RunConfig& cfg) {
  return guarded([&](CommandResult& res) {
    const LoadedInput in = load_input(problem, point);
    CertificateReport r = oracle_only(in.spec, in.x, in.y, cfg);
    switch (r.oracle->verdict) {
      case OracleVerdict::Pass: res.exit = 0; break;
      case OracleVerdict::Fail: res.exit = 3; break;
      case OracleVerdict::Degenerate: res.exit = 2; break;
    }
    res.out = render(r, r.config);
    res.report = std::move(r);
  });
}

CommandResult cmd_explain(const std::filesystem::path& report) {
  return guarded([&](CommandResult& res) {
    std::ifstream f(report);
    if (!f) throw std::invalid_argument("cannot open " + report.string());
    std::stringstream buf;
    buf << f.rdbuf();
    CertificateReport r = parse_report(buf.str());
    res.exit = 0;
    res.out = explain(r);
    res.report = std::move(r);
  });
}

std::vector<double> parse_csv(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = text.find(',', start);
    std::string item = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw std::invalid_argument("empty entry in list '" + text + "'");
    item = item.substr(b, e - b + 1);
    double v = 0.0;
    const char* first = item.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw std::invalid_argument("not a number: '" + item + "'");
    }
    out.push_back(v);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certification of calm local minimax points", "mmcert"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string problem_path, report_path, x_csv, y_csv, stages_csv, delta_csv;
  RunConfig cfg;
  double kappa = 0.0;

  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("file", problem_path, "problem file")->required();
    sub->add_option("--x", x_csv, "candidate x, comma separated");
    sub->add_option("--y", y_csv, "candidate y, comma separated");
    sub->add_option("--format", cfg.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--resolution", cfg.resolution, "oracle grid nodes per axis");
    sub->add_option("--delta", delta_csv, "oracle radii, comma separated");
    sub->add_option("--kappa", kappa, "oracle localization factor");
    sub->add_option("--budget", cfg.budget, "sampled directions per cone");
  };

  CLI::App* certify_cmd = app.add_subcommand("certify", "certify a candidate point");
  add_run_options(certify_cmd);
  certify_cmd->add_option("--stages", stages_csv, "subset of first,second,oracle,jacobian");
  certify_cmd->add_flag("--fail-fast", cfg.fail_fast, "stop after the first refuting stage");

  CLI::App* oracle_cmd = app.add_subcommand("oracle", "grid check of the calm-minimax definition");
  add_run_options(oracle_cmd);

  CLI::App* explain_cmd = app.add_subcommand("explain", "describe a JSON report in prose");
  explain_cmd->add_option("report", report_path, "report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, eo;
    const int code = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return code == 0 ? 0 : kInputErrorExit;
  }

  CommandResult res;
  if (explain_cmd->parsed()) {
    res = cmd_explain(report_path);
  } else {
    try {
      if (const char* seed = std::getenv("MINIMAX_CERT_SEED"); seed && *seed) {
        const std::string s = seed;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cfg.seed);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
          throw std::invalid_argument("MINIMAX_CERT_SEED must be a nonnegative integer");
        }
      }
      PointArgs point;
      if (!x_csv.empty()) point.x = parse_csv(x_csv);
      if (!y_csv.empty()) point.y = parse_csv(y_csv);
      if (!delta_csv.empty()) cfg.deltas = parse_csv(delta_csv);
      if (!stages_csv.empty()) {
        cfg.stages.clear();
        std::stringstream ss(stages_csv);
        for (std::string s; std::getline(ss, s, ',');) cfg.stages.push_back(s);
      }
      CLI::App* sub = certify_cmd->parsed() ? certify_cmd : oracle_cmd;
      if (sub->count("--kappa")) cfg.kappa = kappa;
      cfg.validate();
      res = certify_cmd->parsed() ? cmd_certify(problem_path, point, cfg) : cmd_oracle(problem_path, point, cfg);
    } catch (const std::exception& e) {
      res = CommandResult{};
      res.err = std::string("error: ") + e.what() + "\n";
    }
  }
  out << res.out;
  err << res.err;
  return res.exit;
}

}  // namespace mmcert
