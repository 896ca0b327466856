#include "mmcert/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace mmcert {

namespace {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// writing

json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v == 0.0 ? 0.0 : v;  // -0 would re-parse as the integer 0
}

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

json opt_vec(const std::optional<Eigen::VectorXd>& v) { return v ? vec(*v) : json(nullptr); }

json ints(const std::vector<int>& v) { return json(v); }

json strings(const std::vector<std::string>& v) { return json(v); }

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double d : v) a.push_back(num(d));
  return a;
}

json multipliers(const MultiplierVector& mu) {
  return json{{"alpha_ineq", vec(mu.alpha_ineq)},
              {"alpha_eq", vec(mu.alpha_eq)},
              {"beta_ineq", vec(mu.beta_ineq)},
              {"beta_eq", vec(mu.beta_eq)}};
}

json mfcq(const MfcqResult& r) {
  return json{{"pass", r.pass}, {"rank_ok", r.rank_ok}, {"s", num(r.s)}, {"w", vec(r.w)}};
}

json first_order(const FirstOrderCertificate& c) {
  json outer = json::array();
  for (const auto& o : c.outer) {
    outer.push_back(json{{"u", vec(o.u)},
                         {"primal", num(o.duality.primal)},
                         {"dual", num(o.duality.dual)},
                         {"gap", num(o.duality.gap)},
                         {"structural", o.duality.structural},
                         {"h", vec(o.duality.h)},
                         {"pass", o.pass}});
  }
  const CqReport& q = c.cq;
  json cq{{"mfcq", mfcq(q.mfcq)},
          {"outer_mfcq", mfcq(q.outer_mfcq)},
          {"licq", json{{"pass", q.licq.pass}, {"rank", q.licq.rank}, {"count", q.licq.count}}},
          {"rcrcq", json{{"pass", q.rcrcq.pass},
                         {"checked", q.rcrcq.checked},
                         {"samples", q.rcrcq.samples},
                         {"witness_x", opt_vec(q.rcrcq.witness_x)},
                         {"witness_y", opt_vec(q.rcrcq.witness_y)},
                         {"witness_subset", ints(q.rcrcq.witness_subset)}}},
          {"linear_inner", q.linear_inner},
          {"linear_outer", q.linear_outer},
          {"inner_ok", q.inner_ok},
          {"outer_ok", q.outer_ok},
          {"inner_basis", q.inner_basis},
          {"outer_basis", q.outer_basis},
          {"notes", strings(q.notes)}};
  json kkt = nullptr;
  if (c.kkt) {
    kkt = json{{"stationarity", num(c.kkt->stationarity)},
               {"sign_violation", num(c.kkt->sign_violation)},
               {"complementarity", num(c.kkt->complementarity)},
               {"pass", c.kkt->pass}};
  }
  return json{{"verdict", to_string(c.overall)},
              {"active_sets", json{{"eps_act", num(c.act.eps_act)},
                                   {"I_phi", ints(c.act.I_phi)},
                                   {"I_varphi", ints(c.act.I_varphi)}}},
              {"inner", json{{"value", num(c.inner_value)}, {"h", vec(c.inner_h)}, {"pass", c.inner_pass}}},
              {"outer", outer},
              {"outer_pass", c.outer_pass},
              {"sampled_only", c.sampled_only},
              {"max_gap", num(c.max_gap)},
              {"multipliers", c.witness ? multipliers(*c.witness) : json(nullptr)},
              {"kkt", kkt},
              {"cq", cq},
              {"notes", strings(c.notes)}};
}

json inner_directions(const std::vector<InnerDirection>& ds) {
  json a = json::array();
  for (const auto& d : ds) a.push_back(json{{"h", vec(d.h)}, {"value", num(d.value)}});
  return a;
}

json second_order(const SecondOrderCertificate& c) {
  json dirs = json::array();
  for (const auto& d : c.directions) {
    json ms = json::array();
    for (const auto& m : d.multipliers) {
      ms.push_back(json{{"multipliers", multipliers(m.mu)},
                        {"extended", m.extended},
                        {"path", m.path},
                        {"sup_value", num(m.sup_value)},
                        {"h", vec(m.h)}});
    }
    json ssosc = nullptr;
    if (d.ssosc) {
      ssosc = json{{"pass", d.ssosc->pass},
                   {"vacuous", d.ssosc->vacuous},
                   {"sampled_only", d.ssosc->sampled_only},
                   {"directions", inner_directions(d.ssosc->directions)}};
    }
    dirs.push_back(json{{"u", vec(d.u)},
                        {"dual_value", num(d.dual_value)},
                        {"critical", d.critical},
                        {"ssosc", ssosc},
                        {"multipliers", ms},
                        {"face_sampled_only", d.face_sampled_only},
                        {"best_h", vec(d.best_h)},
                        {"value", num(d.value)},
                        {"margin", num(d.margin)},
                        {"necessary", d.necessary},
                        {"sufficient", d.sufficient},
                        {"refutes", d.refutes}});
  }
  return json{{"verdict", to_string(c.overall)},
              {"growth", c.growth},
              {"kappa_estimate", num(c.kappa_estimate)},
              {"sampled_only", c.sampled_only},
              {"inner_sonc", json{{"pass", c.inner.pass},
                                  {"inconclusive", c.inner.inconclusive},
                                  {"vacuous", c.inner.vacuous},
                                  {"sampled_only", c.inner.sampled_only},
                                  {"directions", inner_directions(c.inner.directions)}}},
              {"directions", dirs},
              {"notes", strings(c.notes)}};
}

json jacobian(const JacobianReport& j) {
  return json{{"licq", j.licq},
              {"rank", j.rank},
              {"active_count", j.active_count},
              {"kkt", j.kkt},
              {"strict_complementarity", j.strict_complementarity},
              {"sosc", j.sosc},
              {"sosc_max_eig", num(j.sosc_max_eig)},
              {"multipliers", multipliers(j.beta)},
              {"overall", j.overall}};
}

json growth_side(const GrowthSide& s) {
  return json{{"hat", num(s.hat)},
              {"exponent", num(s.exponent)},
              {"witness", vec(s.witness)},
              {"verdict", to_string(s.verdict)}};
}

json oracle(const OracleRun& r) {
  json checks = json::array();
  for (const auto& c : r.calm.checks) {
    checks.push_back(json{{"delta", num(c.delta)},
                          {"x_samples", c.x_samples},
                          {"y_samples", c.y_samples},
                          {"empty", c.empty},
                          {"unresolved", c.unresolved},
                          {"inner_slack", num(c.inner_slack)},
                          {"outer_slack", num(c.outer_slack)},
                          {"inner_ok", c.inner_ok},
                          {"outer_ok", c.outer_ok}});
  }
  json witness = nullptr;
  if (r.calm.witness) {
    const OracleWitness& w = *r.calm.witness;
    witness = json{{"inequality", w.inequality},
                   {"delta", num(w.delta)},
                   {"x", vec(w.x)},
                   {"y", vec(w.y)},
                   {"lhs", num(w.lhs)},
                   {"rhs", num(w.rhs)}};
  }
  json growth = json::array();
  for (const auto& g : r.growth) {
    growth.push_back(json{{"delta", num(g.delta)},
                          {"verdict", to_string(g.verdict)},
                          {"inner", growth_side(g.inner)},
                          {"outer", growth_side(g.outer)},
                          {"notes", strings(g.notes)}});
  }
  json fd = json::array();
  for (const auto& f : r.fd) {
    fd.push_back(json{{"u", vec(f.u)},
                      {"first", json{{"estimate", num(f.first.estimate)},
                                     {"analytic", num(f.first.analytic)},
                                     {"diff", num(f.first.diff)},
                                     {"raw", nums(f.first.raw)},
                                     {"empty", f.first.empty}}},
                      {"second", json{{"estimate", num(f.second.estimate)},
                                      {"lower_bound", num(f.second.lower_bound)},
                                      {"residual", num(f.second.residual)},
                                      {"tol_fd", num(f.second.tol_fd)},
                                      {"raw", nums(f.second.raw)},
                                      {"empty", f.second.empty},
                                      {"pass", f.second.pass}}}});
  }
  return json{{"verdict", to_string(r.verdict)},
              {"grid", json{{"delta", num(r.grid.delta)},
                            {"kappa", num(r.grid.kappa)},
                            {"resolution", r.grid.resolution},
                            {"feas_tol", num(r.grid.feas_tol)}}},
              {"deltas", nums(r.deltas)},
              {"calm", json{{"verdict", to_string(r.calm.verdict)},
                            {"checks", checks},
                            {"witness", witness},
                            {"notes", strings(r.calm.notes)}}},
              {"growth", growth},
              {"fd", fd},
              {"notes", strings(r.notes)}};
}

json config(const RunConfig& c) {
  return json{{"eps_act", c.eps_act ? num(*c.eps_act) : json(nullptr)},
              {"stationarity_tol", num(c.stationarity_tol)},
              {"duality_tol", num(c.duality_tol)},
              {"critical_tol", num(c.critical_tol)},
              {"margin_necessary", num(c.margin_necessary)},
              {"margin_sufficient", num(c.margin_sufficient)},
              {"budget", c.budget},
              {"seed", c.seed},
              {"resolution", c.resolution},
              {"deltas", nums(c.deltas)},
              {"kappa", c.kappa ? num(*c.kappa) : json(nullptr)},
              {"format", c.format},
              {"stages", strings(c.stages)},
              {"fail_fast", c.fail_fast}};
}

// nlohmann prints the shortest round-tripping form; the report format pins
// 17 significant digits instead.
void dump(const json& j, std::string& out, int level) {
  const std::string pad(static_cast<std::size_t>(2 * (level + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * level), ' ');
  switch (j.type()) {
    case json::value_t::number_float: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
      out += buf;
      return;
    }
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        dump(it.value(), out, level + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool scalars = true;
      for (const auto& e : j) scalars = scalars && !e.is_structured();
      if (scalars) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump(j[i], out, level + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump(j[i], out, level + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    default:
      out += j.dump();
  }
}

// ---------------------------------------------------------------------------
// reading

double rnum(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ReportError("expected a number, got \"" + s + "\"");
  }
  if (!j.is_number()) throw ReportError("expected a number");
  return j.get<double>();
}

Eigen::VectorXd rvec(const json& j) {
  if (!j.is_array()) throw ReportError("expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = rnum(j[i]);
  return v;
}

std::optional<Eigen::VectorXd> ropt_vec(const json& j) {
  if (j.is_null()) return std::nullopt;
  return rvec(j);
}

std::vector<double> rnums(const json& j) {
  if (!j.is_array()) throw ReportError("expected an array");
  std::vector<double> v;
  for (const auto& e : j) v.push_back(rnum(e));
  return v;
}

const json& at(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ReportError(std::string("missing key \"") + key + "\"");
  return j.at(key);
}

double rnum(const json& j, const char* key) { return rnum(at(j, key)); }
Eigen::VectorXd rvec(const json& j, const char* key) { return rvec(at(j, key)); }
bool rbool(const json& j, const char* key) { return at(j, key).get<bool>(); }
std::string rstr(const json& j, const char* key) { return at(j, key).get<std::string>(); }
template <class T>
T rget(const json& j, const char* key) {
  return at(j, key).get<T>();
}

MultiplierVector rmultipliers(const json& j) {
  MultiplierVector mu;
  mu.alpha_ineq = rvec(j, "alpha_ineq");
  mu.alpha_eq = rvec(j, "alpha_eq");
  mu.beta_ineq = rvec(j, "beta_ineq");
  mu.beta_eq = rvec(j, "beta_eq");
  return mu;
}

MfcqResult rmfcq(const json& j) {
  MfcqResult r;
  r.pass = rbool(j, "pass");
  r.rank_ok = rbool(j, "rank_ok");
  r.s = rnum(j, "s");
  r.w = rvec(j, "w");
  return r;
}

FirstOrderCertificate rfirst_order(const json& j) {
  FirstOrderCertificate c;
  const auto v = fo_verdict_from_string(rstr(j, "verdict"));
  if (!v) throw ReportError("unknown first-order verdict");
  c.overall = *v;
  const json& a = at(j, "active_sets");
  c.act.eps_act = rnum(a, "eps_act");
  c.act.I_phi = rget<std::vector<int>>(a, "I_phi");
  c.act.I_varphi = rget<std::vector<int>>(a, "I_varphi");
  const json& in = at(j, "inner");
  c.inner_value = rnum(in, "value");
  c.inner_h = rvec(in, "h");
  c.inner_pass = rbool(in, "pass");
  for (const auto& o : at(j, "outer")) {
    OuterRecord rec;
    rec.u = rvec(o, "u");
    rec.duality.primal = rnum(o, "primal");
    rec.duality.dual = rnum(o, "dual");
    rec.duality.gap = rnum(o, "gap");
    rec.duality.structural = rbool(o, "structural");
    rec.duality.h = rvec(o, "h");
    rec.pass = rbool(o, "pass");
    c.outer.push_back(std::move(rec));
  }
  c.outer_pass = rbool(j, "outer_pass");
  c.sampled_only = rbool(j, "sampled_only");
  c.max_gap = rnum(j, "max_gap");
  if (!at(j, "multipliers").is_null()) c.witness = rmultipliers(at(j, "multipliers"));
  if (const json& k = at(j, "kkt"); !k.is_null()) {
    KktReport r;
    r.stationarity = rnum(k, "stationarity");
    r.sign_violation = rnum(k, "sign_violation");
    r.complementarity = rnum(k, "complementarity");
    r.pass = rbool(k, "pass");
    c.kkt = r;
  }
  const json& q = at(j, "cq");
  c.cq.mfcq = rmfcq(at(q, "mfcq"));
  c.cq.outer_mfcq = rmfcq(at(q, "outer_mfcq"));
  const json& l = at(q, "licq");
  c.cq.licq.pass = rbool(l, "pass");
  c.cq.licq.rank = rget<int>(l, "rank");
  c.cq.licq.count = rget<int>(l, "count");
  const json& rc = at(q, "rcrcq");
  c.cq.rcrcq.pass = rbool(rc, "pass");
  c.cq.rcrcq.checked = rbool(rc, "checked");
  c.cq.rcrcq.samples = rget<int>(rc, "samples");
  c.cq.rcrcq.witness_x = ropt_vec(at(rc, "witness_x"));
  c.cq.rcrcq.witness_y = ropt_vec(at(rc, "witness_y"));
  c.cq.rcrcq.witness_subset = rget<std::vector<int>>(rc, "witness_subset");
  c.cq.linear_inner = rbool(q, "linear_inner");
  c.cq.linear_outer = rbool(q, "linear_outer");
  c.cq.inner_ok = rbool(q, "inner_ok");
  c.cq.outer_ok = rbool(q, "outer_ok");
  c.cq.inner_basis = rstr(q, "inner_basis");
  c.cq.outer_basis = rstr(q, "outer_basis");
  c.cq.notes = rget<std::vector<std::string>>(q, "notes");
  c.notes = rget<std::vector<std::string>>(j, "notes");
  return c;
}

std::vector<InnerDirection> rinner_directions(const json& j) {
  std::vector<InnerDirection> out;
  for (const auto& d : j) out.push_back(InnerDirection{rvec(d, "h"), rnum(d, "value")});
  return out;
}

Verdict rverdict(const json& j, const char* key) {
  const auto v = verdict_from_string(rstr(j, key));
  if (!v) throw ReportError("unknown verdict");
  return *v;
}

SecondOrderCertificate rsecond_order(const json& j) {
  SecondOrderCertificate c;
  c.overall = rverdict(j, "verdict");
  c.growth = rbool(j, "growth");
  c.kappa_estimate = rnum(j, "kappa_estimate");
  c.sampled_only = rbool(j, "sampled_only");
  const json& in = at(j, "inner_sonc");
  c.inner.pass = rbool(in, "pass");
  c.inner.inconclusive = rbool(in, "inconclusive");
  c.inner.vacuous = rbool(in, "vacuous");
  c.inner.sampled_only = rbool(in, "sampled_only");
  c.inner.directions = rinner_directions(at(in, "directions"));
  for (const auto& d : at(j, "directions")) {
    DirectionRecord rec;
    rec.u = rvec(d, "u");
    rec.dual_value = rnum(d, "dual_value");
    rec.critical = rbool(d, "critical");
    if (const json& s = at(d, "ssosc"); !s.is_null()) {
      SsoscResult r;
      r.pass = rbool(s, "pass");
      r.vacuous = rbool(s, "vacuous");
      r.sampled_only = rbool(s, "sampled_only");
      r.directions = rinner_directions(at(s, "directions"));
      rec.ssosc = r;
    }
    for (const auto& m : at(d, "multipliers")) {
      MultiplierRecord mr;
      mr.mu = rmultipliers(at(m, "multipliers"));
      mr.extended = rbool(m, "extended");
      mr.path = rstr(m, "path");
      mr.sup_value = rnum(m, "sup_value");
      mr.h = rvec(m, "h");
      rec.multipliers.push_back(std::move(mr));
    }
    rec.face_sampled_only = rbool(d, "face_sampled_only");
    rec.best_h = rvec(d, "best_h");
    rec.value = rnum(d, "value");
    rec.margin = rnum(d, "margin");
    rec.necessary = rbool(d, "necessary");
    rec.sufficient = rbool(d, "sufficient");
    rec.refutes = rbool(d, "refutes");
    c.directions.push_back(std::move(rec));
  }
  c.notes = rget<std::vector<std::string>>(j, "notes");
  return c;
}

JacobianReport rjacobian(const json& j) {
  JacobianReport r;
  r.licq = rbool(j, "licq");
  r.rank = rget<int>(j, "rank");
  r.active_count = rget<int>(j, "active_count");
  r.kkt = rbool(j, "kkt");
  r.strict_complementarity = rbool(j, "strict_complementarity");
  r.sosc = rbool(j, "sosc");
  r.sosc_max_eig = rnum(j, "sosc_max_eig");
  r.beta = rmultipliers(at(j, "multipliers"));
  r.overall = rbool(j, "overall");
  return r;
}

OracleVerdict roracle_verdict(const json& j, const char* key) {
  try {
    return oracle_verdict_from_string(rstr(j, key));
  } catch (const std::invalid_argument& e) {
    throw ReportError(e.what());
  }
}

GrowthSide rgrowth_side(const json& j) {
  GrowthSide s;
  s.hat = rnum(j, "hat");
  s.exponent = rnum(j, "exponent");
  s.witness = rvec(j, "witness");
  s.verdict = roracle_verdict(j, "verdict");
  return s;
}

OracleRun roracle(const json& j) {
  OracleRun r;
  r.verdict = roracle_verdict(j, "verdict");
  const json& g = at(j, "grid");
  r.grid.delta = rnum(g, "delta");
  r.grid.kappa = rnum(g, "kappa");
  r.grid.resolution = rget<int>(g, "resolution");
  r.grid.feas_tol = rnum(g, "feas_tol");
  r.deltas = rnums(at(j, "deltas"));
  const json& calm = at(j, "calm");
  r.calm.verdict = roracle_verdict(calm, "verdict");
  for (const auto& c : at(calm, "checks")) {
    CalmCheck k;
    k.delta = rnum(c, "delta");
    k.x_samples = rget<long>(c, "x_samples");
    k.y_samples = rget<long>(c, "y_samples");
    k.empty = rget<long>(c, "empty");
    k.unresolved = rget<long>(c, "unresolved");
    k.inner_slack = rnum(c, "inner_slack");
    k.outer_slack = rnum(c, "outer_slack");
    k.inner_ok = rbool(c, "inner_ok");
    k.outer_ok = rbool(c, "outer_ok");
    r.calm.checks.push_back(k);
  }
  if (const json& w = at(calm, "witness"); !w.is_null()) {
    r.calm.witness = OracleWitness{rstr(w, "inequality"), rnum(w, "delta"), rvec(w, "x"),
                                   rvec(w, "y"),          rnum(w, "lhs"),   rnum(w, "rhs")};
  }
  r.calm.notes = rget<std::vector<std::string>>(calm, "notes");
  for (const auto& e : at(j, "growth")) {
    GrowthReport gr;
    gr.delta = rnum(e, "delta");
    gr.verdict = roracle_verdict(e, "verdict");
    gr.inner = rgrowth_side(at(e, "inner"));
    gr.outer = rgrowth_side(at(e, "outer"));
    gr.notes = rget<std::vector<std::string>>(e, "notes");
    r.growth.push_back(std::move(gr));
  }
  for (const auto& e : at(j, "fd")) {
    FdRecord f;
    f.u = rvec(e, "u");
    const json& a = at(e, "first");
    f.first.estimate = rnum(a, "estimate");
    f.first.analytic = rnum(a, "analytic");
    f.first.diff = rnum(a, "diff");
    f.first.raw = rnums(at(a, "raw"));
    f.first.empty = rbool(a, "empty");
    const json& b = at(e, "second");
    f.second.estimate = rnum(b, "estimate");
    f.second.lower_bound = rnum(b, "lower_bound");
    f.second.residual = rnum(b, "residual");
    f.second.tol_fd = rnum(b, "tol_fd");
    f.second.raw = rnums(at(b, "raw"));
    f.second.empty = rbool(b, "empty");
    f.second.pass = rbool(b, "pass");
    r.fd.push_back(std::move(f));
  }
  r.notes = rget<std::vector<std::string>>(j, "notes");
  return r;
}

RunConfig rconfig(const json& j) {
  RunConfig c;
  if (!at(j, "eps_act").is_null()) c.eps_act = rnum(j, "eps_act");
  c.stationarity_tol = rnum(j, "stationarity_tol");
  c.duality_tol = rnum(j, "duality_tol");
  c.critical_tol = rnum(j, "critical_tol");
  c.margin_necessary = rnum(j, "margin_necessary");
  c.margin_sufficient = rnum(j, "margin_sufficient");
  c.budget = rget<int>(j, "budget");
  c.seed = rget<std::uint64_t>(j, "seed");
  c.resolution = rget<int>(j, "resolution");
  c.deltas = rnums(at(j, "deltas"));
  if (!at(j, "kappa").is_null()) c.kappa = rnum(j, "kappa");
  c.format = rstr(j, "format");
  c.stages = rget<std::vector<std::string>>(j, "stages");
  c.fail_fast = rbool(j, "fail_fast");
  return c;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fmt(const Eigen::VectorXd& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v(i));
  }
  return s + ")";
}

std::string fmt_multipliers(const MultiplierVector& mu) {
  if (mu.alpha_ineq.size() + mu.alpha_eq.size() + mu.beta_ineq.size() + mu.beta_eq.size() == 0) return "none (no constraints)";
  std::string s;
  if (mu.alpha_ineq.size() + mu.alpha_eq.size() > 0) {
    s += "alpha = " + fmt(mu.alpha_ineq);
    if (mu.alpha_eq.size()) s += " / eq " + fmt(mu.alpha_eq);
    s += ", ";
  }
  s += "beta = " + fmt(mu.beta_ineq);
  if (mu.beta_eq.size()) s += " / eq " + fmt(mu.beta_eq);
  return s;
}

std::string plural(std::size_t k, const char* noun) {
  return std::to_string(k) + " " + noun + (k == 1 ? "" : "s");
}

bool first_order_blocked(const SecondOrderCertificate& c) {
  for (const auto& n : c.notes)
    if (n == kFirstOrderBlocked) return true;
  return false;
}

const char* inner_status(const SecondOrderCertificate& c) {
  if (first_order_blocked(c)) return "not run";
  if (c.inner.inconclusive) return "not evaluated (no inner multipliers)";
  if (c.inner.vacuous) return "vacuous";
  return c.inner.pass ? "pass" : "fail";
}

}  // namespace

std::string emit_json(const CertificateReport& r) {
  json j{{"schema", r.schema},
         {"problem_digest", r.problem_digest},
         {"point", json{{"x", vec(r.x)}, {"y", vec(r.y)}}},
         {"first_order", r.first_order ? first_order(*r.first_order) : json(nullptr)},
         {"second_order", r.second_order ? second_order(*r.second_order) : json(nullptr)},
         {"jacobian", r.jacobian ? jacobian(*r.jacobian) : json(nullptr)},
         {"oracle", r.oracle ? oracle(*r.oracle) : json(nullptr)},
         {"overall", to_string(r.overall)},
         {"config", config(r.config)},
         {"version", r.version}};
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

CertificateReport parse_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ReportError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    CertificateReport r;
    r.schema = rget<int>(j, "schema");
    if (r.schema != kSchemaVersion) throw ReportError("unsupported report schema " + std::to_string(r.schema));
    r.problem_digest = rstr(j, "problem_digest");
    r.x = rvec(at(j, "point"), "x");
    r.y = rvec(at(j, "point"), "y");
    if (!at(j, "first_order").is_null()) r.first_order = rfirst_order(at(j, "first_order"));
    if (!at(j, "second_order").is_null()) r.second_order = rsecond_order(at(j, "second_order"));
    if (!at(j, "jacobian").is_null()) r.jacobian = rjacobian(at(j, "jacobian"));
    if (!at(j, "oracle").is_null()) r.oracle = roracle(at(j, "oracle"));
    r.overall = rverdict(j, "overall");
    r.config = rconfig(at(j, "config"));
    r.version = rstr(j, "version");
    return r;
  } catch (const json::exception& e) {
    throw ReportError(std::string("malformed report: ") + e.what());
  }
}

std::string render_text(const CertificateReport& r) {
  std::ostringstream o;
  o << "problem " << r.problem_digest << " at x = " << fmt(r.x) << ", y = " << fmt(r.y) << "\n";
  if (r.first_order) {
    const auto& c = *r.first_order;
    o << "first order:  " << to_string(c.overall) << "  (inner " << (c.inner_pass ? "ok" : "fails") << ", outer "
      << (c.outer_pass ? "ok" : "fails") << " over " << plural(c.outer.size(), "direction") << ", max gap "
      << fmt(c.max_gap) << ")\n";
    if (c.witness) o << "  multipliers: " << fmt_multipliers(*c.witness) << "\n";
    if (!c.inner_pass) o << "  inner ascent " << fmt(c.inner_value) << " along h = " << fmt(c.inner_h) << "\n";
    for (const auto& rec : c.outer) {
      if (!rec.pass) o << "  outer witness u = " << fmt(rec.u) << ": directional value " << fmt(rec.duality.dual) << "\n";
    }
    o << "  CQ: inner " << (c.cq.inner_ok ? c.cq.inner_basis : "not established") << ", outer "
      << (c.cq.outer_ok ? c.cq.outer_basis : "not established") << "\n";
    for (const auto& n : c.notes) o << "  note: " << n << "\n";
  }
  if (r.second_order) {
    const auto& c = *r.second_order;
    int critical = 0;
    for (const auto& d : c.directions) critical += d.critical ? 1 : 0;
    o << "second order: " << to_string(c.overall) << "  (inner SONC " << inner_status(c) << ", " << critical
      << " critical of " << plural(c.directions.size(), "direction") << ")\n";
    for (const auto& d : c.directions) {
      if (!d.critical) continue;
      o << "  u = " << fmt(d.u) << ": value " << fmt(d.value);
      if (d.best_h.size()) o << " at h = " << fmt(d.best_h);
      o << ", SSOSC " << (d.ssosc && d.ssosc->pass ? "pass" : "fail") << "\n";
    }
    for (const auto& n : c.notes) o << "  note: " << n << "\n";
  }
  if (r.jacobian) {
    o << "jacobian uniqueness (diagnostic): " << (r.jacobian->overall ? "holds" : "fails") << "\n";
  }
  if (r.oracle) {
    const auto& c = *r.oracle;
    o << "oracle:       " << to_string(c.verdict) << "  (calm " << to_string(c.calm.verdict) << ", kappa "
      << fmt(c.grid.kappa) << ", resolution " << c.grid.resolution << ")\n";
    for (const auto& g : c.growth) {
      o << "  delta " << fmt(g.delta) << ": eps_hat " << fmt(g.inner.hat) << ", mu_hat " << fmt(g.outer.hat) << " ("
        << to_string(g.verdict) << ")\n";
    }
    for (const auto& n : c.notes) o << "  note: " << n << "\n";
  }
  o << "overall: " << to_string(r.overall) << "\n";
  return o.str();
}

std::string explain(const CertificateReport& r) {
  std::ostringstream o;
  o << "Candidate x = " << fmt(r.x) << ", y = " << fmt(r.y) << " (problem " << r.problem_digest << ").\n";
  if (r.first_order) {
    const auto& c = *r.first_order;
    o << "\nFirst-order KKT: ";
    if (c.witness && c.kkt) {
      o << "multipliers: " << fmt_multipliers(*c.witness) << " with stationarity residual " << fmt(c.kkt->stationarity)
        << (c.kkt->pass ? " (accepted).\n" : " (rejected).\n");
    } else {
      o << "no multipliers (alpha, beta) satisfy the KKT system.\n";
    }
    o << "Inner stationarity: the largest first-order increase of f in y is " << fmt(c.inner_value)
      << (c.inner_pass ? ", within tolerance.\n" : ", so y is not stationary for the inner problem.\n");
    o << "Strong duality:";
    bool gaps = false;
    for (const auto& rec : c.outer) {
      if (rec.duality.gap <= r.config.duality_tol) continue;
      gaps = true;
      o << "\n  direction u = " << fmt(rec.u) << ": dual value " << fmt(rec.duality.dual) << ", primal "
        << fmt(rec.duality.primal) << ", gap " << fmt(rec.duality.gap);
    }
    if (!gaps) {
      o << " primal and dual directional values agree on all " << plural(c.outer.size(), "sampled direction")
        << " (max gap " << fmt(c.max_gap) << ")";
    }
    o << ".\nOuter stationarity:";
    bool descent = false;
    for (const auto& rec : c.outer) {
      if (rec.pass) continue;
      descent = true;
      o << "\n  V decreases along u = " << fmt(rec.u) << " (directional value " << fmt(rec.duality.dual) << ")";
    }
    if (!descent) o << " the directional value is nonnegative on every sampled direction";
    o << ".\nConstraint qualifications: inner " << (c.cq.inner_ok ? c.cq.inner_basis : "not established")
      << "; outer " << (c.cq.outer_ok ? c.cq.outer_basis : "not established") << ".\n";
    o << "First-order verdict: " << to_string(c.overall) << ".\n";
  }
  if (r.second_order) {
    const auto& c = *r.second_order;
    o << "\nInner second-order necessary condition: " << inner_status(c);
    if (!c.inner.pass && !c.inner.directions.empty()) {
      for (const auto& d : c.inner.directions) {
        if (d.value >= 0) {
          o << "; curvature " << fmt(d.value) << " along h = " << fmt(d.h);
          break;
        }
      }
    }
    o << ".\n";
    int critical = 0;
    for (const auto& d : c.directions) {
      if (!d.critical) continue;
      ++critical;
      o << "Critical direction u = " << fmt(d.u) << ": SSOSC_u "
        << (d.ssosc ? (d.ssosc->vacuous ? "vacuous" : d.ssosc->pass ? "holds" : "fails") : "not checked");
      o << "; second-order form value " << fmt(d.value);
      if (d.best_h.size()) o << " at h* = " << fmt(d.best_h);
      o << " over " << plural(d.multipliers.size(), "multiplier");
      if (d.sufficient) {
        o << ", sufficient";
      } else if (d.refutes) {
        o << ", negative for every multiplier (refutes)";
      } else if (d.necessary) {
        o << ", necessary only";
      }
      o << ".\n";
    }
    if (critical == 0 && !first_order_blocked(c)) o << "No critical directions: the first-order conditions hold strictly.\n";
    o << "Second-order verdict: " << to_string(c.overall);
    if (c.growth) o << ", with the second-order growth condition";
    o << ".\n";
    for (const auto& n : c.notes) o << "  note: " << n << "\n";
  }
  if (r.jacobian) {
    const auto& j = *r.jacobian;
    o << "\nJacobian uniqueness (diagnostic only): LICQ " << (j.licq ? "holds" : "fails") << ", strict complementarity "
      << (j.strict_complementarity ? "holds" : "fails") << ", SOSC " << (j.sosc ? "holds" : "fails")
      << " (largest reduced eigenvalue " << fmt(j.sosc_max_eig) << ").\n";
  }
  if (r.oracle) {
    const auto& c = *r.oracle;
    o << "\nGrid oracle (kappa " << fmt(c.grid.kappa) << ", resolution " << c.grid.resolution
      << "): calm-minimax definition " << to_string(c.calm.verdict);
    if (c.calm.witness) {
      const auto& w = *c.calm.witness;
      o << "; the " << w.inequality << " inequality fails at x = " << fmt(w.x) << ", y = " << fmt(w.y) << " (delta "
        << fmt(w.delta) << ": " << fmt(w.lhs) << " > " << fmt(w.rhs) << ")";
    }
    o << ".\n";
    for (const auto& g : c.growth) {
      o << "Growth at delta " << fmt(g.delta) << ": eps_hat " << fmt(g.inner.hat) << ", mu_hat " << fmt(g.outer.hat)
        << " (" << to_string(g.verdict) << ").\n";
    }
    for (const auto& n : c.notes) o << "  note: " << n << "\n";
  }
  o << "\nOverall: " << to_string(r.overall) << ".\n";
  return o.str();
}

}  // namespace mmcert
