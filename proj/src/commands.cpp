#include "fraclab/errors.hpp"
#include "fraclab/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fraclab {

namespace {

using json = nlohmann::ordered_json;

class Outputs {
 public:
  explicit Outputs(const RunConfig& c) : c_(c) {
    std::error_code ec;
    std::filesystem::create_directories(c.output_dir, ec);
    if (ec || !std::filesystem::is_directory(c.output_dir)) {
      throw ConfigurationError("cannot create output directory " + c.output_dir);
    }
  }

  std::string path(const std::string& name) const { return (std::filesystem::path(c_.output_dir) / name).string(); }

  std::string stamp() const { return "config_digest=" + c_.digest + " seed=" + std::to_string(c_.seed); }

  json header(const std::string& command) const {
    json j;
    j["command"] = command;
    j["config_digest"] = c_.digest;
    j["seed"] = c_.seed;
    j["n"] = c_.n;
    j["sigma"] = c_.sigma;
    return j;
  }

  void write_json(const std::string& name, const json& j) const {
    std::ofstream out(path(name));
    if (!out) throw ConfigurationError("cannot write " + path(name));
    out << j.dump(2) << '\n';
  }

  // Opens a CSV whose first line is a '#' comment carrying the digest and seed.
  std::ofstream csv(const std::string& name, const std::string& columns) const {
    std::ofstream out(path(name));
    if (!out) throw ConfigurationError("cannot write " + path(name));
    out.precision(17);
    out << "# " << stamp() << '\n' << columns << '\n';
    return out;
  }

 private:
  const RunConfig& c_;
};

json point_json(const Eigen::VectorXd& x) {
  json a = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(x[i] == 0.0 ? 0.0 : x[i]);
  return a;
}

json bubbles_json(const BubbleParams& p) {
  json a = json::array();
  for (const Bubble& b : p.entries) a.push_back({{"alpha", b.alpha}, {"center", point_json(b.center)}, {"lambda", b.lambda}});
  return a;
}

int spectrum(const RunConfig& c, const Outputs& out, bool quiet) {
  json j = out.header("spectrum");
  j["c_n_sigma"] = c_n_sigma(c.n, c.sigma);
  j["beckner_constant"] = beckner_constant(c.n, c.sigma);
  j["bubble_energy"] = bubble_energy(c.n, c.sigma);
  j["bubble_constant"] = bubble_constant(c.n, c.sigma);
  j["critical_exponent"] = critical_exponent(c.n, c.sigma);
  auto csv = out.csv("spectrum.csv", "k,eigenvalue,multiplicity");
  json ev = json::array();
  long below = 0;
  for (int k = 0; k <= c.spectrum_k_max; ++k) {
    const double e = psigma_eigenvalue(c.n, c.sigma, k);
    const long upto = HarmonicBasis::space_dimension(c.n, k, Symmetry::full);
    csv << k << ',' << e << ',' << upto - below << '\n';
    below = upto;
    ev.push_back(e);
  }
  j["eigenvalues"] = ev;
  out.write_json("spectrum.json", j);
  if (!quiet) std::cout << "spectrum: " << ev.size() << " eigenvalues, P_sigma 1 = " << ev.front().get<double>() << '\n';
  return kSuccess;
}

int bubble_residual_command(const RunConfig& c, const Outputs& out, bool quiet) {
  json j = out.header("bubble-residual");
  j["lambda"] = c.residual_lambda;
  j["symmetry"] = to_string(c.symmetry);
  const Eigen::VectorXd a = SpherePoint::north_pole(c.n).coords();
  auto csv = out.csv("bubble_residual.csv", "L,residual");
  json rows = json::array();
  for (int L : c.residual_truncations) {
    const auto space = make_space(c.n, L, c.symmetry);
    const double r = bubble_residual(a, c.residual_lambda, c.sigma, *space);
    csv << L << ',' << r << '\n';
    rows.push_back({{"L", L}, {"residual", r}});
  }
  j["residuals"] = rows;
  out.write_json("bubble_residual.json", j);
  if (!quiet) std::cout << "bubble-residual: " << rows.back()["residual"].get<double>() << " at L = " << rows.back()["L"] << '\n';
  return kSuccess;
}

json constants_json(const ExpansionConstants& e) {
  return {{"c2", e.c2},
          {"c01", e.c01},
          {"provenance", e.provenance},
          {"c2_north", e.c2_north},
          {"c2_south", e.c2_south},
          {"c2_spread", e.c2_spread},
          {"single_slope", e.single_slope},
          {"single_residual", e.single_residual},
          {"pair_exponent", e.pair_exponent},
          {"pair_exponent_expected", -(e.n - 2.0 * e.sigma)},
          {"pair_residual", e.pair_residual},
          {"truncation", e.truncation},
          {"lambdas", e.lambdas}};
}

int expansion_verify(const RunConfig& c, const Outputs& out, bool quiet) {
  json j = out.header("expansion-verify");
  CalibrationSweeps sweeps;
  int status = kSuccess;
  try {
    const ExpansionConstants e = calibrate_constants(c.n, c.sigma, c.calibration, &sweeps);
    j["calibrated"] = true;
    j["constants"] = constants_json(e);
  } catch (const CalibrationError& err) {
    j["calibrated"] = false;
    j["error"] = err.what();
    j["constants"] = constants_json(err.diagnostics());
    status = kNegativeOutcome;
  }
  auto csv = out.csv("expansion_sweeps.csv", "sweep,lambda,value,limit,deviation,predicted");
  for (const auto& [name, pts] : {std::pair{"north", &sweeps.north}, {"south", &sweeps.south}, {"pair", &sweeps.pair}}) {
    for (const SweepPoint& p : *pts) {
      csv << name << ',' << p.lambda << ',' << p.value << ',' << p.limit << ',' << p.deviation << ',' << p.predicted << '\n';
    }
  }
  out.write_json("expansion.json", j);
  if (!quiet) {
    std::cout << "expansion-verify: " << (status == kSuccess ? "calibrated" : "calibration failed") << ", c2 = "
              << j["constants"]["c2"].get<double>() << ", c01 = " << j["constants"]["c01"].get<double>() << '\n';
  }
  return status;
}

int flow_command(const RunConfig& c, const Outputs& out, bool quiet) {
  const auto space = make_space(c.n, c.truncation, c.symmetry);
  const SphereFunction K = make_k(c.k, c.n);
  const Functional J(space, K, c.sigma);
  SpectralField u0 = space->constant(1.0);
  if (c.flow_initial == "perturbed-constant") {
    Eigen::VectorXd xi(space->grid->size());
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = space->grid->nodes(c.n, i);
    u0 += c.flow_perturbation * space->project(xi);
  } else if (c.flow_initial == "file") {
    const StoredField f = read_field(c.flow_initial_file);
    if (!f.field.basis().same_space(*space->basis)) throw InputError("initial field file does not match n, L, symmetry");
    u0 = f.field;
  }
  FlowOptions o = c.flow;
  if (c.flow_trace) {
    o.trace_path = out.path("flow_trace.csv");
    o.trace_comment = out.stamp();
  }
  const FlowResult r = flow_run(u0, J, o);
  write_field(out.path("flow_final.field"), r.final_field, c.sigma, out.stamp());

  json j = out.header("flow");
  j["K"] = K.description;
  j["L"] = c.truncation;
  j["symmetry"] = to_string(c.symmetry);
  j["method"] = to_string(o.method);
  j["status"] = to_string(r.status);
  j["message"] = r.message;
  j["steps"] = r.step_count;
  j["level"] = r.level_history.back();
  j["gradient_norm"] = r.gradient_norm_history.back();
  j["beckner_constant"] = beckner_constant(c.n, c.sigma);
  j["lambda_threshold"] = r.lambda_threshold;
  j["level_history"] = r.level_history;
  j["gradient_norm_history"] = r.gradient_norm_history;
  json checks = json::array();
  for (const FlowCheck& f : r.checks) checks.push_back({{"step", f.step}, {"p", f.p}, {"lambda", f.lambda}, {"v_norm", f.v_norm}});
  j["checks"] = checks;
  if (r.bubble_fit) {
    j["bubble_fit"] = {{"bubbles", bubbles_json(r.bubble_fit->params)},
                       {"v_norm", r.bubble_fit->diagnostics.v_norm},
                       {"max_v0", r.bubble_fit->diagnostics.max_v0}};
  }
  if (r.status == FlowStatus::converged) {
    double mu = 0.0;
    j["euler_lagrange_residual"] = J.euler_lagrange_residual(r.final_field, &mu);
    j["multiplier"] = mu;
    json kw = json::array();
    for (int i = 1; i <= c.n + 1; ++i) {
      const KazdanWarner w = kazdan_warner_integral(r.final_field, K, c.sigma, *space, i);
      kw.push_back({{"j", i}, {"raw", w.raw}, {"normalized", w.normalized}});
    }
    j["kazdan_warner"] = kw;
  }
  out.write_json("flow.json", j);
  if (!quiet) std::cout << "flow: " << to_string(r.status) << " after " << r.step_count << " steps, level " << j["level"].get<double>() << '\n';
  return r.status == FlowStatus::max_iterations ? kNegativeOutcome : kSuccess;
}

json verdict_json(const Verdict& v) {
  json clauses = json::array();
  for (const Clause& c : v.clauses) clauses.push_back({{"name", c.name}, {"satisfied", c.satisfied}, {"detail", c.detail}});
  return {{"holds", v.holds}, {"clauses", clauses}};
}

int existence(const RunConfig& c, const Outputs& out, bool quiet) {
  const SphereFunction K = make_k(c.k, c.n);
  CriticalPointOptions co = c.critical;
  co.seed = c.seed;
  const std::vector<CriticalPointRecord> records = find_critical_points(K, c.n, co);
  const ExistenceReport rep = existence_verdict(records, c.n, c.sigma, c.p_max);

  json j = out.header("existence");
  j["K"] = K.description;
  j["k_max"] = rep.k_max;
  j["k_min"] = rep.k_min;
  j["pinching_ratio"] = rep.pinching_ratio;
  j["threshold_three_halves"] = rep.threshold_three_halves;
  j["threshold_two"] = rep.threshold_two;
  j["a1"] = rep.a1;
  j["a2"] = rep.a2;
  j["k_plus_size"] = rep.k_plus_size;
  auto pts = out.csv("critical_points.csv", "index,k_value,morse_index,laplacian,in_k_plus,gradient_norm,margin,coords");
  json recs = json::array();
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    const CriticalPointRecord& r = rep.records[i];
    recs.push_back({{"location", point_json(r.location.coords())},
                    {"k_value", r.k_value},
                    {"gradient_norm", r.gradient_norm},
                    {"morse_index", r.morse_index},
                    {"laplacian", r.laplacian},
                    {"in_k_plus", r.in_k_plus},
                    {"nondegeneracy_margin", r.nondegeneracy_margin}});
    pts << i << ',' << r.k_value << ',' << r.morse_index << ',' << r.laplacian << ',' << r.in_k_plus << ','
        << r.gradient_norm << ',' << r.nondegeneracy_margin << ',';
    for (Eigen::Index k = 0; k < r.location.coords().size(); ++k) {
      const double x = r.location.coords()[k];
      pts << (k ? " " : "") << (x == 0.0 ? 0.0 : x);
    }
    pts << '\n';
  }
  j["critical_points"] = recs;

  auto inv_csv = out.csv("infinity_inventory.csv", "p,level,index,members");
  json inv = json::array();
  for (const InfinityCriticalPoint& e : rep.inventory.entries) {
    inv.push_back({{"members", e.members}, {"p", e.p}, {"level", e.level}, {"index", e.index}});
    inv_csv << e.p << ',' << e.level << ',' << e.index << ',';
    for (std::size_t k = 0; k < e.members.size(); ++k) inv_csv << (k ? " " : "") << e.members[k];
    inv_csv << '\n';
  }
  j["infinity_inventory"] = {{"p_max", rep.inventory.p_max},
                             {"complete_below", std::isfinite(rep.inventory.complete_below)
                                                    ? json(rep.inventory.complete_below)
                                                    : json(nullptr)},
                             {"entries", inv}};
  json bands = json::array();
  for (const Band& b : rep.bands) {
    bands.push_back({{"ell", b.ell},
                     {"c_min", b.c_min},
                     {"c_max", b.c_max},
                     {"c_max_stretched", b.c_max_stretched},
                     {"c_min_next", b.c_min_next},
                     {"threshold", b.threshold},
                     {"separated", b.separated}});
  }
  j["bands"] = bands;
  json euler = json::array();
  for (const EulerRow& e : rep.euler) {
    euler.push_back({{"ell", e.ell}, {"level", e.level}, {"complete", e.complete}, {"chi", e.complete ? json(e.chi) : json(nullptr)}});
  }
  j["euler"] = euler;
  j["multiplicity_criterion"] = verdict_json(rep.multiplicity_criterion);
  j["index_criterion"] = verdict_json(rep.index_criterion);
  j["warnings"] = rep.warnings;
  out.write_json("existence.json", j);
  const bool any = rep.multiplicity_criterion.holds || rep.index_criterion.holds;
  if (!quiet) {
    std::cout << "existence: " << records.size() << " critical points, #K+ = " << rep.k_plus_size << ", A1 = " << rep.a1
              << "; multiplicity criterion " << (rep.multiplicity_criterion.holds ? "holds" : "fails")
              << ", index criterion " << (rep.index_criterion.holds ? "holds" : "fails") << '\n';
  }
  return any ? kSuccess : kNegativeOutcome;
}

}  // namespace

int run_command(const std::string& name, const RunConfig& config, bool quiet) {
  try {
    const Outputs out(config);
    if (name == "spectrum") return spectrum(config, out, quiet);
    if (name == "bubble-residual") return bubble_residual_command(config, out, quiet);
    if (name == "expansion-verify") return expansion_verify(config, out, quiet);
    if (name == "flow") return flow_command(config, out, quiet);
    if (name == "existence") return existence(config, out, quiet);
    throw ConfigurationError("unknown command '" + name + "'");
  } catch (const ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigurationFailure;
  } catch (const ParameterDomainError& e) {
    std::cerr << "parameter out of range: " << e.what() << '\n';
    return kConfigurationFailure;
  } catch (const UnsupportedDimensionError& e) {
    std::cerr << "unsupported dimension: " << e.what() << '\n';
    return kConfigurationFailure;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis not met: " << e.what() << '\n';
    return kConfigurationFailure;
  } catch (const InvalidKError& e) {
    std::cerr << "invalid K: " << e.what() << '\n';
    return kConfigurationFailure;
  } catch (const NondegeneracyError& e) {
    std::cerr << "K is degenerate: " << e.what() << '\n';
    return kConfigurationFailure;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kConfigurationFailure;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace fraclab
