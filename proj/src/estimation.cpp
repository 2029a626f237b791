#include "intercity/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace intercity {

std::map<std::string, double> EstimationResult::named_estimates() const {
  std::map<std::string, double> out;
  for (const auto& [name, idx] : estimates.layout) out[name] = estimates.values[idx];
  return out;
}

std::string spec_digest(const ModelSpec& spec) {
  std::ostringstream ss;
  ss << to_string(spec.purpose) << '|'
     << (spec.sp_structure == SpStructure::ModeOnlyMNL ? "mnl" : "nested") << '|'
     << to_string(spec.base_mode) << '|' << spec.rules.short_threshold_km << '/'
     << spec.rules.long_threshold_km;
  for (const auto& n : spec.parameter_names()) ss << '|' << n;
  std::string s = ss.str();
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << h;
  return hex.str();
}

std::vector<double> standard_errors(const CompiledData& rp, const CompiledData& sp,
                                    std::span<const double> theta_hat,
                                    const std::vector<std::string>& names,
                                    const EvalOptions& opts) {
  const int K = static_cast<int>(theta_hat.size());
  JointObjective obj{&rp, &sp, opts};
  std::vector<double> theta(theta_hat.begin(), theta_hat.end());
  std::vector<double> gp(K), gm(K);
  Eigen::MatrixXd hess(K, K);
  for (int i = 0; i < K; ++i) {
    double h = 1e-5 * (1.0 + std::fabs(theta[i]));
    double saved = theta[i];
    theta[i] = saved + h;
    obj.value_and_gradient(theta, gp);
    theta[i] = saved - h;
    obj.value_and_gradient(theta, gm);
    theta[i] = saved;
    for (int j = 0; j < K; ++j) hess(i, j) = (gp[j] - gm[j]) / (2.0 * h);
  }
  hess = 0.5 * (hess + hess.transpose().eval());

  Eigen::FullPivLU<Eigen::MatrixXd> lu(-hess);
  if (lu.rank() < K) {
    // Name the parameters spanning the null space.
    Eigen::MatrixXd kernel = lu.kernel();
    std::string msg = "standard_errors: singular Hessian; near-collinear parameters:";
    for (int c = 0; c < kernel.cols(); ++c) {
      int i1 = 0, i2 = 0;
      kernel.col(c).cwiseAbs().maxCoeff(&i1);
      double second = -1.0;
      for (int r = 0; r < K; ++r)
        if (r != i1 && std::fabs(kernel(r, c)) > second) {
          second = std::fabs(kernel(r, c));
          i2 = r;
        }
      msg += " (" + names[i1] + ", " + names[i2] + ")";
    }
    throw Error(msg);
  }
  Eigen::MatrixXd cov = lu.inverse();
  std::vector<double> se(K);
  for (int i = 0; i < K; ++i) {
    double v = cov(i, i);
    if (v <= 0.0) throw Error("standard_errors: non-positive variance for '" + names[i] + "'");
    se[i] = std::sqrt(v);
  }
  return se;
}

EstimationResult estimate(const RPDataset& rp, const SPDataset& sp, const ModelSpec& spec,
                          const std::optional<ParameterVector>& start,
                          const EstimateControls& controls) {
  auto names = spec.parameter_names();
  const int K = static_cast<int>(names.size());
  CompiledData crp = compile_observations(rp.observations, spec);
  CompiledData csp = compile_observations(sp.observations, spec);
  JointObjective obj{&crp, &csp, controls.eval};

  std::vector<double> x0(K, 0.0);
  if (start) {
    if (start->size() != K) throw Error("estimate: starting vector length mismatch");
    for (int i = 0; i < K; ++i)
      x0[i] = start->values[start->layout.count(names[i]) ? start->layout.at(names[i]) : i];
  }

  OptimizerResult opt = bfgs_maximize(
      [&obj](std::span<const double> x, std::vector<double>& g) {
        return obj.value_and_gradient(x, g);
      },
      x0, controls.optimizer);

  EstimationResult res;
  res.estimates.values = opt.x;
  for (int i = 0; i < K; ++i) res.estimates.layout[names[i]] = i;
  res.ll1 = opt.value;
  res.iterations = opt.iterations;
  res.converged = opt.converged;
  res.gradient_norm = opt.gradient_norm;
  res.spec_digest = spec_digest(spec);

  FitStats fs = fit_stats(res.ll1, crp, csp, K, controls.eval);
  res.ll0 = fs.ll0;
  res.rho = fs.rho;
  res.rho_adj = fs.rho_adj;

  if (controls.compute_std_errors && res.converged) {
    try {
      res.std_errors = standard_errors(crp, csp, opt.x, names, controls.eval);
      res.t_stats.resize(K);
      res.p_values.resize(K);
      for (int i = 0; i < K; ++i) {
        res.t_stats[i] = opt.x[i] / res.std_errors[i];
        res.p_values[i] = numeric::p_value_z(res.t_stats[i]);
      }
    } catch (const Error& e) {
      std::cerr << "warning: " << e.what() << "\n";
      res.std_errors.clear();
    }
  }

  // VOT rows for time-like generic attributes against the cost coefficient.
  auto params = res.named_estimates();
  std::string cost_coef;
  for (const auto& t : spec.mode_terms)
    if (t.kind == UtilityTerm::Kind::AltAttr && t.attribute == "cost") cost_coef = t.coefficient;
  if (!cost_coef.empty() && params.at(cost_coef) != 0.0) {
    for (const auto& t : spec.mode_terms) {
      if (t.kind != UtilityTerm::Kind::AltAttr) continue;
      if (t.attribute == "ivt")
        res.vot["in_vehicle_time"] = value_of_time(params, t.coefficient, cost_coef);
      else if (t.attribute == "access")
        res.vot["access_egress_time"] = value_of_time(params, t.coefficient, cost_coef);
    }
  }
  return res;
}

namespace {

using ordered_json = nlohmann::ordered_json;

}  // namespace

void write_results(const EstimationResult& result, const std::string& path) {
  ordered_json doc;
  doc["spec_digest"] = result.spec_digest;
  ordered_json entries = ordered_json::array();
  std::vector<std::pair<std::string, int>> order(result.estimates.layout.begin(),
                                                 result.estimates.layout.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  for (const auto& [name, idx] : order) {
    ordered_json e;
    e["name"] = name;
    e["estimate"] = result.estimates.values[idx];
    if (idx < static_cast<int>(result.std_errors.size())) {
      e["std_error"] = result.std_errors[idx];
      e["t"] = result.t_stats[idx];
      e["p"] = result.p_values[idx];
      e["sig"] = significance_code(result.p_values[idx]);
    }
    entries.push_back(std::move(e));
  }
  doc["estimates"] = std::move(entries);
  doc["ll0"] = result.ll0;
  doc["ll1"] = result.ll1;
  doc["rho"] = result.rho;
  doc["rho_adj"] = result.rho_adj;
  doc["vot"] = result.vot;
  ordered_json conv;
  conv["iterations"] = result.iterations;
  conv["converged"] = result.converged;
  conv["gradient_norm"] = result.gradient_norm;
  doc["convergence"] = std::move(conv);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write results file: " + path);
  out << doc.dump(2) << "\n";
}

EstimationResult read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open results file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  EstimationResult res;
  res.spec_digest = doc.value("spec_digest", "");
  int idx = 0;
  for (const auto& e : doc.at("estimates")) {
    std::string name = e.at("name");
    res.estimates.layout[name] = idx;
    res.estimates.values.push_back(e.at("estimate").get<double>());
    if (e.contains("std_error")) {
      res.std_errors.push_back(e.at("std_error").get<double>());
      res.t_stats.push_back(e.at("t").get<double>());
      res.p_values.push_back(e.at("p").get<double>());
    }
    ++idx;
  }
  res.ll0 = doc.at("ll0").get<double>();
  res.ll1 = doc.at("ll1").get<double>();
  res.rho = doc.at("rho").get<double>();
  res.rho_adj = doc.at("rho_adj").get<double>();
  if (doc.contains("vot"))
    for (const auto& [k, v] : doc.at("vot").items()) res.vot[k] = v.get<double>();
  const auto& conv = doc.at("convergence");
  res.iterations = conv.at("iterations").get<int>();
  res.converged = conv.at("converged").get<bool>();
  res.gradient_norm = conv.at("gradient_norm").get<double>();
  return res;
}

void print_results_table(const EstimationResult& result, std::ostream& out) {
  std::vector<std::pair<std::string, int>> order(result.estimates.layout.begin(),
                                                 result.estimates.layout.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  out << std::left << std::setw(24) << "Parameter" << std::right << std::setw(14) << "Estimate"
      << std::setw(14) << "Std.Error" << std::setw(10) << "t" << "  Sig\n";
  for (const auto& [name, idx] : order) {
    out << std::left << std::setw(24) << name << std::right << std::fixed << std::setprecision(6)
        << std::setw(14) << result.estimates.values[idx];
    if (idx < static_cast<int>(result.std_errors.size())) {
      out << std::setw(14) << result.std_errors[idx] << std::setw(10) << std::setprecision(3)
          << result.t_stats[idx] << "  " << significance_code(result.p_values[idx]);
    }
    out << "\n";
  }
  out << std::setprecision(4);
  out << "LL0      " << result.ll0 << "\n";
  out << "LL1      " << result.ll1 << "\n";
  out << "rho      " << result.rho << "\n";
  out << "rho.adj  " << result.rho_adj << "\n";
  for (const auto& [label, v] : result.vot)
    out << "VOT (" << label << ")  " << std::setprecision(2) << v << " VND/h\n";
  out << "converged: " << (result.converged ? "yes" : "no")
      << "  iterations: " << result.iterations << "\n";
  out << "Significant codes: 0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1\n";
  out.unsetf(std::ios::fixed);
}

}  // namespace intercity
