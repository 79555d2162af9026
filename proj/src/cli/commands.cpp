#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mkedge/cli.hpp"
#include "mkedge/expansion.hpp"
#include "mkedge/io.hpp"
#include "mkedge/lattice.hpp"
#include "mkedge/oracle.hpp"
#include "mkedge/spectral.hpp"

#ifndef MKEDGE_VERSION
#define MKEDGE_VERSION "unknown"
#endif

namespace mkedge::cli {

namespace {

using nlohmann::json;

constexpr std::size_t kMinVerifySamples = 10000;
constexpr int kMaxOrder = 4;

// Shortest representation that reads back to the same double.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string format_name(Format f) { return f == Format::Csv ? "csv" : "json"; }

json config_json(const RunConfig& cfg) {
  return json{{"command", cfg.command},      {"input", cfg.input},
              {"order", cfg.order},          {"n", cfg.n_values},
              {"z_grid", cfg.z_grid.to_string()}, {"samples", cfg.samples},
              {"seed", cfg.seed},            {"starts", cfg.starts},
              {"output", cfg.output},        {"format", format_name(cfg.format)}};
}

// CSV reports open with comment lines carrying the version, config and notes.
std::string csv_preamble(const RunConfig& cfg, const Notes& notes) {
  std::string s = "# version: " + version() + "\n# config: " + config_json(cfg).dump() + "\n";
  for (const auto& n : notes) s += "# note: " + n + "\n";
  return s;
}

json json_preamble(const RunConfig& cfg, const Notes& notes) {
  return json{{"version", version()}, {"config", config_json(cfg)}, {"notes", notes}};
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }
std::vector<double> to_std(const RowVector& v) { return {v.data(), v.data() + v.size()}; }

json to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) rows.push_back(to_std(RowVector(M.row(i))));
  return rows;
}

// Loads a chain, discretizing kernel tables, and centers the observable.
ChainSpec load_chain(const RunConfig& cfg, Notes& notes) {
  InputDocument doc = parse_spec(cfg.input, &notes);
  if (auto* kt = std::get_if<KernelTable>(&doc)) {
    ChainSpec spec = discretize_kernel(*kt, &notes).spec;
    const StationaryStructure ss = stationary(spec);
    const double mean = ss.pi.dot(spec.f);
    if (std::abs(mean) > 1e-12) {
      spec = center_observable(std::move(spec), ss.pi);
      notes.push_back("observable centered: subtracted stationary mean " + num(mean));
    }
    return spec;
  }
  return std::get<ChainSpec>(doc);
}

int summary_order(int order, int floor) { return std::max(floor, order + 2); }

std::string state_label(int target) {
  if (target == kAllStates) return "all";
  if (target == kSupOverTargets) return "sup";
  return "{" + std::to_string(target + 1) + "}";
}

}  // namespace

std::vector<double> ZGrid::points() const {
  std::vector<double> out;
  const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  for (long long k = 0; k <= count; ++k) out.push_back(lo + static_cast<double>(k) * step);
  return out;
}

std::string ZGrid::to_string() const { return num(lo) + ":" + num(hi) + ":" + num(step); }

std::string version() { return MKEDGE_VERSION; }

void check_config(const RunConfig& cfg) {
  if (cfg.input.empty()) throw Error(ErrorCode::InvalidArgument, "--input is required");
  if (cfg.order < 0 || cfg.order > kMaxOrder) {
    throw Error(ErrorCode::InvalidArgument, "--order must be in [0, " + std::to_string(kMaxOrder) + "]");
  }
  if (cfg.n_values.empty()) throw Error(ErrorCode::InvalidArgument, "--n needs at least one value");
  for (int n : cfg.n_values) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "--n values must be >= 1");
  }
  if (!(cfg.z_grid.step > 0.0) || !(cfg.z_grid.hi >= cfg.z_grid.lo) || !std::isfinite(cfg.z_grid.lo) ||
      !std::isfinite(cfg.z_grid.hi)) {
    throw Error(ErrorCode::InvalidArgument, "--z-grid must be LO:HI:STEP with LO <= HI and STEP > 0");
  }
  if (cfg.command == "verify") {
    if (cfg.samples < kMinVerifySamples) {
      throw Error(ErrorCode::InvalidArgument, "--samples must be >= " + std::to_string(kMinVerifySamples));
    }
    if (!std::is_sorted(cfg.n_values.begin(), cfg.n_values.end()) ||
        std::adjacent_find(cfg.n_values.begin(), cfg.n_values.end()) != cfg.n_values.end()) {
      throw Error(ErrorCode::InvalidArgument, "verify needs strictly increasing --n values");
    }
  }
}

std::string cmd_analyze(const RunConfig& cfg) {
  Notes notes;
  const ChainSpec spec = load_chain(cfg, notes);
  const StationaryStructure ss = stationary(spec);
  const double sigma_sq = sigma_sq_series(spec, ss);
  const int k = summary_order(cfg.order, 4);
  const SpectralSummary summ = summarize(spec, ss, k);

  json psi = nullptr;
  try {
    const PsiBounds pb = psi_bounds(spec);
    psi = json{{"alpha", pb.alpha}, {"beta", pb.beta}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::PsiViolated) throw;
    notes.push_back(std::string("condition (psi) fails: ") + e.what());
  }
  const std::vector<double> f = to_std(spec.f);
  const auto span = difference_span(f);

  std::vector<double> radius_grid;
  for (int i = 1; i <= 2000; ++i) radius_grid.push_back(0.05 * i);
  // A lattice observable returns to radius 1 at the period 2 pi / span.
  if (span) radius_grid.push_back(2.0 * std::numbers::pi / *span);
  const RadiusScan scan = spectral_radius_scan(spec, radius_grid);
  std::vector<double> tail_grid;
  for (int i = 0; i < 100000; ++i) tail_grid.push_back(1e3 + 0.99 * i);
  const CramerCheck cramer = cramer_check(spec, tail_grid);
  const double xi = perturbative_threshold(spec, ss);

  std::vector<std::pair<std::string, json>> fields{
      {"label", spec.label},
      {"d", spec.d()},
      {"pi", to_std(ss.pi)},
      {"sigma_sq", sigma_sq},
      {"gamma_erg", ss.gamma_erg},
      {"C_erg", ss.C_erg},
      {"psi_alpha", psi.is_null() ? json(nullptr) : psi["alpha"]},
      {"psi_beta", psi.is_null() ? json(nullptr) : psi["beta"]},
      {"lattice", span.has_value()},
      {"lattice_span", span ? json(*span) : json(nullptr)},
      {"cramer_limsup_estimate", cramer.limsup_estimate},
      {"cramer_satisfied", cramer.satisfied},
      {"radius_below_one_off_zero", scan.below_one_off_zero},
      {"radius_max_off_zero", scan.max_off_zero},
      {"radius_tail_max", scan.tail_max},
      {"perturbative_threshold", xi},
  };
  for (int m = 2; m <= k; ++m) {
    fields.emplace_back("gamma_" + std::to_string(m), summ.cumulants_gamma[static_cast<std::size_t>(m)]);
  }

  if (cfg.format == Format::Json) {
    json doc = json_preamble(cfg, notes);
    for (const auto& [key, value] : fields) doc[key] = value;
    return doc.dump(2) + "\n";
  }
  std::string out = csv_preamble(cfg, notes) + "key,value\n";
  for (const auto& [key, value] : fields) {
    std::string v;
    if (value.is_number_float()) {
      v = num(value.get<double>());
    } else if (value.is_array()) {
      for (const auto& e : value) v += (v.empty() ? "" : " ") + num(e.get<double>());
    } else if (value.is_string()) {
      v = "\"" + value.get<std::string>() + "\"";
    } else {
      v = value.dump();
    }
    out += key + "," + v + "\n";
  }
  return out;
}

std::string cmd_expand(const RunConfig& cfg) {
  Notes notes;
  const ChainSpec spec = load_chain(cfg, notes);
  const StationaryStructure ss = stationary(spec);
  const SpectralSummary summ = summarize(spec, ss, summary_order(cfg.order, 3));
  const std::vector<double> grid = cfg.z_grid.points();
  const int d = spec.d();
  const Vector ones = Vector::Ones(d);

  std::ostringstream csv;
  json tables = json::array();
  if (cfg.format == Format::Csv) {
    csv << csv_preamble(cfg, notes) << "n,order,z,start_state,end_state,value,pi_mixed,scalar_esae\n";
  }
  for (int n : cfg.n_values) {
    const EdgeworthApprox approx(summ, n, cfg.order);
    json mats = json::array();
    std::vector<double> mixed;
    std::vector<double> scalar;
    for (double z : grid) {
      const Matrix A = approx.evaluate(z);
      const double pm = (summ.pi * A * ones).value();
      const double se = scalar_esae(summ, n, z);
      if (cfg.format == Format::Csv) {
        for (int i = 0; i < d; ++i) {
          for (int j = 0; j < d; ++j) {
            csv << n << ',' << cfg.order << ',' << num(z) << ',' << i + 1 << ',' << j + 1 << ',' << num(A(i, j))
                << ',' << num(pm) << ',' << num(se) << '\n';
          }
        }
      } else {
        mats.push_back(to_json(A));
        mixed.push_back(pm);
        scalar.push_back(se);
      }
    }
    if (cfg.format == Format::Json) {
      tables.push_back(json{{"n", n}, {"z", grid}, {"matrices", mats}, {"pi_mixed", mixed}, {"scalar_esae", scalar}});
    }
  }
  if (cfg.format == Format::Csv) return csv.str();
  json doc = json_preamble(cfg, notes);
  doc["order"] = cfg.order;
  doc["sigma"] = summ.sigma;
  doc["tables"] = tables;
  return doc.dump(2) + "\n";
}

std::string cmd_verify(const RunConfig& cfg, bool& passed) {
  Notes notes;
  const ChainSpec spec = load_chain(cfg, notes);
  const StationaryStructure ss = stationary(spec);
  const SpectralSummary summ = summarize(spec, ss, summary_order(cfg.order, 3));
  VerifyOptions opts;
  opts.n_values = cfg.n_values;
  opts.max_order = cfg.order;
  opts.samples = cfg.samples;
  opts.seed = cfg.seed;
  opts.starts = cfg.starts;
  opts.z_grid = cfg.z_grid.points();
  const VerificationReport report = run_verification(spec, summ, opts);
  passed = report.passed();

  if (cfg.format == Format::Csv) {
    std::ostringstream csv;
    csv << csv_preamble(cfg, notes)
        << "n,order,start_state,target_set,sup_error,sqrt_n_times_error,mc_halfwidth,pass\n";
    for (const auto& r : report.rows) {
      csv << r.n << ',' << r.order << ',' << r.start + 1 << ',' << state_label(r.target) << ',' << num(r.sup_error)
          << ',' << num(r.scaled) << ',' << num(r.halfwidth) << ',' << (r.pass ? "true" : "false") << '\n';
    }
    return csv.str();
  }
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back(json{{"n", r.n},
                        {"order", r.order},
                        {"start_state", r.start + 1},
                        {"target_set", state_label(r.target)},
                        {"sup_error", r.sup_error},
                        {"sqrt_n_times_error", r.scaled},
                        {"mc_halfwidth", r.halfwidth},
                        {"pass", r.pass}});
  }
  json doc = json_preamble(cfg, notes);
  doc["sigma"] = summ.sigma;
  doc["passed"] = passed;
  doc["rows"] = rows;
  return doc.dump(2) + "\n";
}

std::string cmd_discretize(const RunConfig& cfg) {
  Notes notes;
  InputDocument doc = parse_spec(cfg.input, &notes);
  const auto* kt = std::get_if<KernelTable>(&doc);
  if (!kt) throw Error(ErrorCode::ParseError, "discretize expects a kernel table document");
  const DiscretizedKernel dk = discretize_kernel(*kt, &notes);
  const ChainSpec& spec = dk.spec;
  const int m = spec.d();

  if (cfg.format == Format::Json) {
    json out = json::parse(write_spec(spec));
    const json pre = json_preamble(cfg, notes);
    for (auto it = pre.begin(); it != pre.end(); ++it) out[it.key()] = it.value();
    out["discretization"] = json{{"p_minus", dk.p_minus},
                                 {"p_plus", dk.p_plus},
                                 {"psi_alpha", dk.psi.alpha},
                                 {"psi_beta", dk.psi.beta}};
    return out.dump(2) + "\n";
  }
  std::ostringstream csv;
  csv << csv_preamble(cfg, notes) << "# p_minus: " << num(dk.p_minus) << "\n# p_plus: " << num(dk.p_plus)
      << "\n# psi_alpha: " << num(dk.psi.alpha) << "\n# psi_beta: " << num(dk.psi.beta) << "\nstate,x,f,mu";
  for (int j = 0; j < m; ++j) csv << ",p_" << j + 1;
  csv << '\n';
  for (int i = 0; i < m; ++i) {
    csv << i + 1 << ',' << num((i + 0.5) / m) << ',' << num(spec.f(i)) << ',' << num(spec.mu(i));
    for (int j = 0; j < m; ++j) csv << ',' << num(spec.P(i, j));
    csv << '\n';
  }
  return csv.str();
}

namespace {

ZGrid parse_z_grid(const std::string& text) {
  ZGrid g;
  std::istringstream in(text);
  std::string part[3];
  for (auto& p : part) {
    if (!std::getline(in, p, ':')) {
      throw Error(ErrorCode::InvalidArgument, "--z-grid must be LO:HI:STEP, got '" + text + "'");
    }
  }
  try {
    g.lo = std::stod(part[0]);
    g.hi = std::stod(part[1]);
    g.step = std::stod(part[2]);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "--z-grid must be LO:HI:STEP, got '" + text + "'");
  }
  return g;
}

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::Usage: return kExitUsage;
    case ErrorClass::Validation: return kExitValidation;
    case ErrorClass::Numerical: return kExitNumerical;
    case ErrorClass::Verification: return kExitVerification;
  }
  return kExitNumerical;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string z_grid = cfg.z_grid.to_string();
  std::string format = "csv";
  std::vector<int> starts_one_based;

  CLI::App app{"Operator-form Edgeworth expansions for finite Markov chains", "mkedge"};
  app.set_version_flag("--version", version());
  app.add_option("command", cfg.command, "analyze | expand | verify | discretize")
      ->required()
      ->check(CLI::IsMember({"analyze", "expand", "verify", "discretize"}));
  app.add_option("--input", cfg.input, "chain or kernel-table JSON document")->required();
  app.add_option("--order", cfg.order, "number of correction terms (0-4)")->capture_default_str();
  app.add_option("--n", cfg.n_values, "comma-separated chain lengths")->delimiter(',')->capture_default_str();
  app.add_option("--z-grid", z_grid, "LO:HI:STEP")->capture_default_str();
  app.add_option("--samples", cfg.samples, "Monte-Carlo paths per start state")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Monte-Carlo seed")->capture_default_str();
  app.add_option("--starts", starts_one_based, "comma-separated start states (1-based) for verify")
      ->delimiter(',');
  app.add_option("--output", cfg.output, "report path (stdout when omitted)");
  app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    cfg.z_grid = parse_z_grid(z_grid);
    cfg.format = format == "json" ? Format::Json : Format::Csv;
    for (int s : starts_one_based) cfg.starts.push_back(s - 1);
    check_config(cfg);

    bool passed = true;
    std::string report;
    if (cfg.command == "analyze") {
      report = cmd_analyze(cfg);
    } else if (cfg.command == "expand") {
      report = cmd_expand(cfg);
    } else if (cfg.command == "verify") {
      report = cmd_verify(cfg, passed);
    } else {
      report = cmd_discretize(cfg);
    }

    if (cfg.output.empty()) {
      out << report;
    } else {
      std::ofstream file(cfg.output, std::ios::binary);
      if (!file) throw Error(ErrorCode::InvalidArgument, "cannot write '" + cfg.output + "'");
      file << report;
    }
    if (!passed) {
      err << "verification failed: see rows with pass=false\n";
      return kExitVerification;
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(classify(e.code()));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace mkedge::cli
