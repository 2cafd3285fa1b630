#include <cstdlib>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tricorr/tricorr.hpp"

using namespace tricorr;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRefused = 2;
constexpr int kExitNumeric = 3;
constexpr int kGuard = 10;

struct Config {
  std::string lattice = "triangular";
  std::string k1, k2, k3, alpha, alpha1, alpha2;
  int nmax = 10;
  int precision = 50;
  std::string method = "both";
  std::optional<double> tol_regime, tol_sep, tol_guard;
  std::string format = "csv";
};

int default_precision() {
  if (const char* env = std::getenv("TRICORR_PRECISION")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidInput, std::string("TRICORR_PRECISION='") + env + "' is not an integer");
    }
  }
  return 50;
}

// A cell is an integer, a boolean or text; high-precision numbers travel as text.
using Cell = std::variant<long, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string render_csv(const Table& t) {
  std::ostringstream os;
  for (size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) os << ",";
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, bool>)
              os << (v ? "true" : "false");
            else if constexpr (std::is_same_v<V, long>)
              os << v;
            else
              os << csv_escape(v);
          },
          row[i]);
    }
    os << "\n";
  }
  return os.str();
}

ojson rows_json(const Table& t) {
  ojson rows = ojson::array();
  for (const auto& row : t.rows) {
    ojson o = ojson::object();
    for (size_t i = 0; i < row.size(); ++i) std::visit([&](const auto& v) { o[t.columns[i]] = v; }, row[i]);
    rows.push_back(std::move(o));
  }
  return rows;
}

std::string num(const Real& x, int P) { return x.str(P); }

Tolerances tolerances(const Config& c) {
  Tolerances t;
  if (c.tol_regime) t.regime = *c.tol_regime;
  if (c.tol_sep) t.sep = *c.tol_sep;
  return t;
}

GarnierOptions garnier_options(const Config& c) {
  GarnierOptions o;
  o.tol = tolerances(c);
  o.tol_guard = c.tol_guard;
  o.guard_digits = kGuard;
  return o;
}

Real parse_real(const std::string& value, const std::string& flag) {
  try {
    return Real(value);
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::InvalidInput, flag + " value '" + value + "' is not a number");
  }
}

Real need(const std::string& value, const char* flag, const Config& c) {
  if (value.empty()) throw Error(ErrorCode::InvalidInput, std::string(flag) + " is required for --lattice " + c.lattice);
  return parse_real(value, flag);
}

void validate(const Config& c) {
  if (c.nmax < 0) throw Error(ErrorCode::InvalidInput, "--nmax must be >= 0");
  if (c.precision < 30) throw Error(ErrorCode::InvalidInput, "--precision must be >= 30 digits");
}

// The lattice parameters resolved into a weight; must be called inside the working precision scope.
struct Resolved {
  Weight weight;
  std::optional<Couplings> couplings;      // triangular
  std::optional<ColumnParams> column;      // square-column
  std::optional<Real> alpha;               // square-diagonal
  ojson parameters = ojson::object();
};

Resolved resolve(const Config& c) {
  const int P = c.precision;
  Resolved r{SquareDiagonalWeight{Real(0)}, {}, {}, {}, ojson::object()};
  if (c.lattice == "triangular") {
    Couplings k{need(c.k1, "--k1", c), need(c.k2, "--k2", c), need(c.k3, "--k3", c)};
    if (!k.k1.is_finite() || !k.k2.is_finite() || !k.k3.is_finite())
      throw Error(ErrorCode::NonFiniteInput, "couplings must be finite");
    r.couplings = k;
    r.weight = triangular_weight(k);
    r.parameters = {{"k1", num(k.k1, P)}, {"k2", num(k.k2, P)}, {"k3", num(k.k3, P)}};
  } else if (c.lattice == "square-diagonal") {
    Real a = !c.alpha.empty() ? parse_real(c.alpha, "--alpha") : diagonal_weight(need(c.k1, "--k1 or --alpha", c), need(c.k2, "--k2", c)).alpha;
    if (!a.is_finite()) throw Error(ErrorCode::NonFiniteInput, "alpha must be finite");
    r.alpha = a;
    r.weight = SquareDiagonalWeight{a};
    r.parameters = {{"alpha", num(a, P)}};
  } else if (c.lattice == "square-column") {
    ColumnParams p = (!c.alpha1.empty() || !c.alpha2.empty())
                         ? ColumnParams::from_alphas(need(c.alpha1, "--alpha1", c), need(c.alpha2, "--alpha2", c))
                         : ColumnParams::from_couplings(need(c.k1, "--k1 or --alpha1", c), need(c.k2, "--k2", c));
    if (!p.alpha1.is_finite() || !p.alpha2.is_finite()) throw Error(ErrorCode::NonFiniteInput, "alphas must be finite");
    r.column = p;
    r.weight = p.weight();
    r.parameters = {{"alpha1", num(p.alpha1, P)}, {"alpha2", num(p.alpha2, P)}, {"k", num(p.k, P)}};
  } else {
    throw Error(ErrorCode::InvalidInput, "unknown lattice '" + c.lattice + "'");
  }
  return r;
}

std::string regime_of(const Config& c, const Resolved& r) {
  if (r.couplings) return to_string(classify_couplings(*r.couplings, tolerances(c)).regime);
  if (r.alpha) {
    Real a = abs(*r.alpha);
    if (a.is_zero()) return "ZeroT";
    if (a == 1) return "CuriePoint";
    return a < 1 ? "FerroOrdered" : "FerroDisordered";
  }
  if (r.column->k == 1) return "CuriePoint";
  return r.column->k > 1 ? "FerroOrdered" : "FerroDisordered";
}

struct Output {
  ojson json;
  Table table;
};

std::string emit(const Config& c, const Output& o) {
  if (c.format == "json") {
    ojson doc = o.json;
    doc["rows"] = rows_json(o.table);
    return doc.dump(2) + "\n";
  }
  return render_csv(o.table);
}

ojson header(const char* command, const Config& c, const Resolved& r) {
  return ojson{{"command", command}, {"lattice", c.lattice}, {"parameters", r.parameters}, {"precision", c.precision},
               {"regime", regime_of(c, r)}};
}

// Moments over [-nmax-1, nmax+1] with the linear-recurrence route alongside where it applies.
Output cmd_moments(const Config& c) {
  validate(c);
  const int P = c.precision;
  PrecisionScope scope(P + kGuard);
  Resolved r = resolve(c);
  const int lo = -c.nmax - 1, hi = c.nmax + 1;
  MomentTable q = moment_window(r.weight, lo, hi, P);
  std::optional<MomentTable> rec;
  try {
    bool diag = std::holds_alternative<SquareDiagonalWeight>(r.weight);
    MomentTable seed = diag ? moment_window(r.weight, 0, 1, P) : moment_window(r.weight, -1, 2, P);
    rec = extend_by_recurrence(seed, lo, hi);
  } catch (const Error&) {
    rec.reset();  // a degenerate recurrence (e.g. the frozen weight) leaves the column empty
  }
  Output o;
  o.json = header("moments", c, r);
  o.json["scheme"] = to_string(q.scheme());
  o.table.columns = {"n", "w", "source", "precision", "recurrence_w", "recurrence_source", "recurrence_rel_diff"};
  for (int n = lo; n <= hi; ++n) {
    std::vector<Cell> row{static_cast<long>(n), num(q.at(n), P), std::string(to_string(q.source(n))), static_cast<long>(P)};
    if (rec) {
      row.emplace_back(num(rec->at(n), P));
      row.emplace_back(std::string(to_string(rec->source(n))));
      row.emplace_back(relative_error(rec->at(n), q.at(n)).str(3));
    } else {
      row.emplace_back(std::string("n/a"));
      row.emplace_back(std::string("n/a"));
      row.emplace_back(std::string("n/a"));
    }
    o.table.rows.push_back(std::move(row));
  }
  return o;
}

struct SeriesResult {
  std::string regime;
  std::vector<Real> det, nonlinear;
  std::vector<EscalationAttempt> attempts;
  std::string route;
};

SeriesResult compute_series(const Config& c, const Resolved& r) {
  const int P = c.precision;
  SeriesResult s;
  s.regime = regime_of(c, r);
  const bool want_det = c.method != "garnier";
  const bool want_nl = c.method != "determinant";
  if (want_nl) {
    GarnierOptions opt = garnier_options(c);
    GarnierReport rep;
    if (r.couplings) {
      rep = garnier_correlations(*r.couplings, c.nmax, P, opt);
      s.route = rep.complex_engine ? "garnier (complex arithmetic)" : "garnier";
    } else if (r.column) {
      rep = column_correlations(*r.column, c.nmax, P, opt);
      s.route = "column";
    } else {
      rep = dpv_correlations(*r.alpha, c.nmax, P, opt);
      s.route = "dpv";
    }
    if (!rep.converged) {
      std::string loss = rep.attempts.empty() ? "" : detail::digit_loss_log(rep.attempts.back());
      throw Error(ErrorCode::PrecisionExhausted,
                  "nonlinear route did not match the determinant after escalation; " + loss);
    }
    s.attempts = rep.attempts;
    s.nonlinear = rep.garnier.values;
    s.det = rep.determinant.values;  // computed at the accepted precision
    if (!want_det) s.det.clear();
  } else {
    MomentTable t = moment_window(r.weight, -std::max(c.nmax, 1), std::max(c.nmax, 1), P);
    s.det = determinant_series(t, c.nmax).values;
    s.route = "determinant";
  }
  return s;
}

Output cmd_correlations(const Config& c) {
  validate(c);
  const int P = c.precision;
  PrecisionScope scope(P + kGuard);
  Resolved r = resolve(c);
  SeriesResult s = compute_series(c, r);
  Output o;
  o.json = header("correlations", c, r);
  o.json["method"] = c.method;
  o.json["route"] = s.route;
  ojson att = ojson::array();
  for (const auto& a : s.attempts) {
    ojson loss = ojson::array();
    for (double d : a.digit_loss) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", d);
      loss.push_back(std::string(buf));
    }
    att.push_back({{"precision", a.precision}, {"accepted", a.accepted}, {"digit_loss", loss}});
  }
  if (!s.attempts.empty()) o.json["escalation"] = att;
  o.table.columns = {"n"};
  if (!s.det.empty()) o.table.columns.push_back("I_determinant");
  if (!s.nonlinear.empty()) o.table.columns.push_back("I_" + s.route.substr(0, s.route.find(' ')));
  if (!s.det.empty() && !s.nonlinear.empty()) o.table.columns.push_back("rel_discrepancy");
  for (int n = 0; n <= c.nmax; ++n) {
    std::vector<Cell> row{static_cast<long>(n)};
    size_t k = static_cast<size_t>(n);
    if (!s.det.empty()) row.emplace_back(num(s.det[k], P));
    if (!s.nonlinear.empty()) row.emplace_back(num(s.nonlinear[k], P));
    if (!s.det.empty() && !s.nonlinear.empty()) row.emplace_back(relative_error(s.nonlinear[k], s.det[k]).str(3));
    o.table.rows.push_back(std::move(row));
  }
  return o;
}

struct VerifyArgs {
  std::vector<std::string> only;
  bool inject_fault = false;
};

Output cmd_verify(const Config& c, const VerifyArgs& v, bool& all_pass) {
  if (c.precision < 30) throw Error(ErrorCode::InvalidInput, "--precision must be >= 30 digits");
  VerifyOptions opt;
  opt.digits = c.precision;
  for (const auto& g : v.only) opt.only.insert(g);
  opt.inject_moment_fault = v.inject_fault;
  VerifyReport rep = run_verification(opt);
  all_pass = rep.all_pass();
  Output o;
  o.json = ojson{{"command", "verify"}, {"precision", c.precision}, {"passed", all_pass}};
  ojson grid = ojson::array();
  for (const auto& gp : verification_grid()) grid.push_back({{"couplings", gp.label()}, {"regime", to_string(gp.expected)}});
  o.json["grid"] = grid;
  o.table.columns = {"group", "point", "check", "criterion", "pass", "value", "threshold", "detail"};
  for (const auto& ch : rep.checks)
    o.table.rows.push_back({ch.group, ch.point, ch.name, static_cast<long>(ch.criterion), ch.pass, ch.value,
                            ch.threshold, ch.detail});
  return o;
}

struct ScanArgs {
  std::string axis;
  std::string from, to;
  int steps = 1;
};

Output cmd_scan(const Config& base, const ScanArgs& a) {
  validate(base);
  if (a.steps < 1) throw Error(ErrorCode::InvalidInput, "--steps must be >= 1");
  const int P = base.precision;
  PrecisionScope scope(P + kGuard);
  const std::string& ax = a.axis;
  Config c = base;
  if (ax == "alpha") c.lattice = "square-diagonal";
  if (ax == "t") c.lattice = "square-diagonal";
  if (ax == "k3" && c.lattice != "triangular")
    throw Error(ErrorCode::InvalidInput, "axis k3 needs --lattice triangular");
  if (ax != "k1" && ax != "k2" && ax != "k3" && ax != "alpha" && ax != "t")
    throw Error(ErrorCode::InvalidInput, "unknown axis '" + ax + "'");
  Real from = parse_real(a.from, "--from"), to = parse_real(a.to, "--to");
  if (!from.is_finite() || !to.is_finite()) throw Error(ErrorCode::NonFiniteInput, "--from/--to must be finite");
  std::vector<Real> xs;
  for (int i = 0; i < a.steps; ++i)
    xs.push_back(a.steps == 1 ? from : from + (to - from) * Real(i) / Real(a.steps - 1));

  // The k3 sweep is reported against the k3 = 0 square-lattice values from the dPV route.
  std::vector<Real> reference;
  if (ax == "k3") {
    GarnierReport d = dpv_correlations(diagonal_alpha(need(c.k1, "--k1", c), need(c.k2, "--k2", c)), c.nmax, P,
                                       garnier_options(c));
    reference = d.garnier.values;
  }

  Output o;
  o.json = ojson{{"command", "scan"}, {"lattice", c.lattice}, {"axis", ax}, {"precision", P}, {"steps", a.steps}};
  if (ax == "t") {
    o.table.columns = {ax, "N", "status", "sigma", "residual"};
  } else {
    o.table.columns = {ax, "n", "status", "regime"};
    if (c.method != "garnier") o.table.columns.push_back("I_determinant");
    if (c.method != "determinant") o.table.columns.push_back("I_nonlinear");
    if (c.method == "both") o.table.columns.push_back("rel_discrepancy");
    if (ax == "k3") o.table.columns.push_back("abs_diff_to_k3_zero");
  }
  o.table.columns.push_back("message");

  auto point = [&, c](Real x) -> std::vector<std::vector<Cell>> {
    PrecisionScope inner(P + kGuard);
    std::vector<std::vector<Cell>> rows;
    std::string xv = num(x, P);
    if (ax == "t") {
      for (int N = 0; N <= c.nmax; ++N) {
        try {
          SigmaReport s = sigma_pvi_residual(x, N, P);
          rows.push_back({xv, static_cast<long>(N), std::string("ok"), num(s.sigma, P), s.residual.str(3), std::string("")});
        } catch (const Error& e) {
          rows.push_back({xv, static_cast<long>(N), std::string(to_string(e.code())), std::string(""), std::string(""),
                          e.detail()});
        }
      }
      return rows;
    }
    Config pc = c;
    std::string xs_str = x.str(P + kGuard);
    if (ax == "k1") pc.k1 = xs_str;
    if (ax == "k2") pc.k2 = xs_str;
    if (ax == "k3") pc.k3 = xs_str;
    if (ax == "alpha") pc.alpha = xs_str;
    try {
      Resolved r = resolve(pc);
      SeriesResult s = compute_series(pc, r);
      for (int n = 0; n <= pc.nmax; ++n) {
        size_t k = static_cast<size_t>(n);
        std::vector<Cell> row{xv, static_cast<long>(n), std::string("ok"), s.regime};
        if (pc.method != "garnier") row.emplace_back(num(s.det[k], P));
        if (pc.method != "determinant") row.emplace_back(num(s.nonlinear[k], P));
        if (pc.method == "both") row.emplace_back(relative_error(s.nonlinear[k], s.det[k]).str(3));
        if (ax == "k3") {
          const Real& v = pc.method == "determinant" ? s.det[k] : s.nonlinear[k];
          row.emplace_back(abs(v - reference[k]).str(3));
        }
        row.emplace_back(std::string(""));
        rows.push_back(std::move(row));
      }
    } catch (const Error& e) {
      // Critical or otherwise refused points are reported in place so the sweep splits around them.
      std::vector<Cell> row{xv, static_cast<long>(-1), std::string(to_string(e.code()))};
      while (row.size() + 1 < o.table.columns.size()) row.emplace_back(std::string(""));
      row.emplace_back(e.detail());
      rows.push_back(std::move(row));
    }
    return rows;
  };
  std::vector<std::future<std::vector<std::vector<Cell>>>> jobs;
  for (const Real& x : xs) jobs.push_back(std::async(std::launch::async, point, x));
  for (auto& j : jobs) {
    auto rows = j.get();
    o.table.rows.insert(o.table.rows.end(), rows.begin(), rows.end());
  }
  return o;
}

void add_common(CLI::App* sub, Config& c, bool lattice_flags = true) {
  sub->add_option("--precision,-p", c.precision, "working precision in decimal digits (>= 30); default from TRICORR_PRECISION or 50");
  sub->add_option("--format,-f", c.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  if (!lattice_flags) return;
  sub->add_option("--lattice", c.lattice, "weight family")
      ->check(CLI::IsMember({"triangular", "square-diagonal", "square-column"}));
  sub->add_option("--k1", c.k1, "coupling K1");
  sub->add_option("--k2", c.k2, "coupling K2");
  sub->add_option("--k3", c.k3, "coupling K3");
  sub->add_option("--alpha", c.alpha, "square-diagonal parameter alpha = 1/k");
  sub->add_option("--alpha1", c.alpha1, "square-column parameter alpha1");
  sub->add_option("--alpha2", c.alpha2, "square-column parameter alpha2");
  sub->add_option("--nmax,-n", c.nmax, "largest separation / moment index");
  sub->add_option("--tol-regime", c.tol_regime, "relative tolerance on critical-condition residuals");
  sub->add_option("--tol-sep", c.tol_sep, "relative tolerance on singularity separation");
  sub->add_option("--tol-guard", c.tol_guard, "relative guard threshold for the nonlinear recurrences");
}

ojson error_json(const std::string& code, const std::string& message, int exit_code) {
  return ojson{{"error", {{"code", code}, {"message", message}, {"exit_code", exit_code}}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diagonal correlations of the anisotropic triangular Ising model"};
  app.require_subcommand(1);
  Config cfg;
  VerifyArgs vargs;
  ScanArgs sargs;
  bool env_ok = true;
  std::string env_error;
  try {
    cfg.precision = default_precision();
  } catch (const Error& e) {
    env_ok = false;
    env_error = e.what();
  }

  auto* moments = app.add_subcommand("moments", "moment table w_n over [-nmax-1, nmax+1]");
  add_common(moments, cfg);
  auto* corr = app.add_subcommand("correlations", "diagonal correlations I_0 .. I_nmax");
  add_common(corr, cfg);
  corr->add_option("--method", cfg.method, "route")->check(CLI::IsMember({"determinant", "garnier", "both"}));
  auto* verify = app.add_subcommand("verify", "run the invariant suite on the built-in grid");
  add_common(verify, cfg, false);
  verify->add_option("--only", vargs.only, "restrict to groups: " + [] {
    std::string s;
    for (const auto& g : verify_groups()) s += (s.empty() ? "" : ", ") + g;
    return s;
  }())->delimiter(',');
  verify->add_flag("--inject-fault", vargs.inject_fault, "test mode: corrupt w_3 before the Garnier run");
  auto* scan = app.add_subcommand("scan", "sweep one parameter; one row per point and n");
  add_common(scan, cfg);
  scan->add_option("--method", cfg.method, "route")->check(CLI::IsMember({"determinant", "garnier", "both"}));
  scan->add_option("--axis", sargs.axis, "swept parameter")->required()->check(CLI::IsMember({"k1", "k2", "k3", "alpha", "t"}));
  scan->add_option("--from", sargs.from, "first value")->required();
  scan->add_option("--to", sargs.to, "last value");
  scan->add_option("--steps", sargs.steps, "number of points (1 gives a single point)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitRefused;
  }
  if (sargs.to.empty()) sargs.to = sargs.from;

  try {
    if (!env_ok) throw Error(ErrorCode::InvalidInput, env_error);
    Output out;
    int code = kExitOk;
    if (*moments) out = cmd_moments(cfg);
    if (*corr) out = cmd_correlations(cfg);
    if (*scan) out = cmd_scan(cfg, sargs);
    if (*verify) {
      bool pass = true;
      out = cmd_verify(cfg, vargs, pass);
      if (!pass) code = kExitNumeric;
    }
    std::cout << emit(cfg, out);
    return code;
  } catch (const Error& e) {
    int code = is_domain_refusal(e.code()) ? kExitRefused : kExitNumeric;
    if (cfg.format == "json")
      std::cout << error_json(to_string(e.code()), e.what(), code).dump(2) << "\n";
    else
      std::cerr << "error: " << e.what() << "\n";
    return code;
  } catch (const std::exception& e) {
    if (cfg.format == "json")
      std::cout << error_json("InternalError", e.what(), kExitNumeric).dump(2) << "\n";
    else
      std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
