#include "intercity/trip_gen.hpp"

#include <Eigen/Dense>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "intercity/optimizer.hpp"

namespace intercity {

namespace {

double covariate_value(const TripGenRecord& r, const std::string& name) {
  auto it = r.covariates.find(name);
  if (it == r.covariates.end())
    throw Error("record for person '" + r.person_id + "': missing covariate '" + name + "'");
  return it->second;
}

Eigen::MatrixXd design_matrix(const std::vector<TripGenRecord>& records,
                              const std::vector<std::string>& covariate_names, bool intercept) {
  const int n = static_cast<int>(records.size());
  const int p = static_cast<int>(covariate_names.size()) + (intercept ? 1 : 0);
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i) {
    int j = 0;
    if (intercept) X(i, j++) = 1.0;
    for (const auto& name : covariate_names) X(i, j++) = covariate_value(records[i], name);
  }
  return X;
}

}  // namespace

RegressionFit fit_linear(const std::vector<TripGenRecord>& records,
                         const std::vector<std::string>& covariate_names,
                         InterceptMode intercept_mode) {
  const bool intercept = intercept_mode == InterceptMode::Free;
  const int n = static_cast<int>(records.size());
  const int p = static_cast<int>(covariate_names.size()) + (intercept ? 1 : 0);
  if (n <= p) throw Error("fit_linear: need more records than covariates");

  Eigen::MatrixXd X = design_matrix(records, covariate_names, intercept);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = records[i].trip_count;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p) {
    std::string msg = "fit_linear: rank-deficient design; suspect columns:";
    auto perm = qr.colsPermutation().indices();
    for (int j = qr.rank(); j < p; ++j) {
      int col = perm(j);
      msg += intercept && col == 0 ? " (Intercept)" : " " + covariate_names[col - (intercept ? 1 : 0)];
    }
    throw Error(msg);
  }
  Eigen::VectorXd beta = qr.solve(y);
  Eigen::VectorXd resid = y - X * beta;
  double ssr = resid.squaredNorm();
  double sigma2 = ssr / (n - p);
  Eigen::MatrixXd xtx_inv = (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(p, p));

  RegressionFit fit;
  fit.family = RegressionFit::Family::Linear;
  if (intercept) fit.names.push_back("(Intercept)");
  for (const auto& nme : covariate_names) fit.names.push_back(nme);
  fit.n = n;
  fit.residual_se = std::sqrt(sigma2);
  for (int j = 0; j < p; ++j) {
    fit.coefficients.push_back(beta(j));
    double se = std::sqrt(sigma2 * xtx_inv(j, j));
    fit.std_errors.push_back(se);
    double t = beta(j) / se;
    fit.t_or_z.push_back(t);
    fit.p_values.push_back(numeric::p_value_t(t, n - p));
  }
  // Centered total sum of squares with a free intercept, uncentered without
  // (the through-the-origin convention).
  double sst;
  if (intercept) {
    double ybar = y.mean();
    sst = (y.array() - ybar).square().sum();
  } else {
    sst = y.squaredNorm();
  }
  fit.r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;
  int df_model = intercept ? n - 1 : n;
  fit.adj_r2 = 1.0 - (1.0 - fit.r2) * df_model / (n - p);
  fit.residuals.assign(resid.data(), resid.data() + n);
  return fit;
}

namespace {

// NB-2 log-likelihood with eta = X delta, m = exp(eta).
double negbin_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     std::span<const double> par, bool free_theta, double fixed_theta,
                     std::vector<double>* grad) {
  const int n = static_cast<int>(y.size());
  const int p = static_cast<int>(X.cols());
  double theta = free_theta ? std::exp(par[p]) : fixed_theta;
  if (grad) std::fill(grad->begin(), grad->end(), 0.0);
  double ll = 0.0;
  for (int i = 0; i < n; ++i) {
    double eta = 0.0;
    for (int j = 0; j < p; ++j) eta += X(i, j) * par[j];
    double m = std::exp(eta);
    double yi = y(i);
    // lgamma(y+theta)-lgamma(theta) as a sum of logs for integer counts, and
    // theta*log(theta)-(y+theta)*log(theta+m) via log1p(m/theta); both avoid
    // catastrophic cancellation when theta is large (the Poisson limit).
    bool integral = yi == std::floor(yi) && yi >= 0.0 && yi < 1e6;
    double rising = 0.0;
    if (integral) {
      for (double k = 0.0; k < yi; ++k) rising += std::log(theta + k);
    } else {
      rising = std::lgamma(yi + theta) - std::lgamma(theta);
    }
    ll += rising - std::lgamma(yi + 1.0) + yi * eta - theta * std::log1p(m / theta) -
          yi * std::log(theta + m);
    if (grad) {
      double g_eta = (yi - m) * theta / (theta + m);
      for (int j = 0; j < p; ++j) (*grad)[j] += g_eta * X(i, j);
      if (free_theta) {
        double d_rising = 0.0;
        if (integral) {
          for (double k = 0.0; k < yi; ++k) d_rising += 1.0 / (theta + k);
        } else {
          d_rising = numeric::digamma(yi + theta) - numeric::digamma(theta);
        }
        double g_theta = d_rising - std::log1p(m / theta) + (m - yi) / (theta + m);
        (*grad)[p] += g_theta * theta;  // chain through log(theta)
      }
    }
  }
  return ll;
}

double negbin_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, double theta) {
  double dev = 0.0;
  for (int i = 0; i < y.size(); ++i) {
    double yi = y(i), mi = mu(i);
    double d = -(yi + theta) * std::log((yi + theta) / (mi + theta));
    if (yi > 0) d += yi * std::log(yi / mi);
    dev += 2.0 * d;
  }
  return dev;
}

}  // namespace

RegressionFit fit_negbin(const std::vector<TripGenRecord>& records,
                         const std::vector<std::string>& covariate_names,
                         std::optional<double> fixed_theta) {
  const int n = static_cast<int>(records.size());
  const int p = static_cast<int>(covariate_names.size()) + 1;  // intercept always free
  if (n <= p + 1) throw Error("fit_negbin: need more records than covariates");
  Eigen::MatrixXd X = design_matrix(records, covariate_names, true);
  Eigen::VectorXd y(n);
  double ybar = 0.0;
  for (int i = 0; i < n; ++i) {
    if (records[i].trip_count < 0) throw Error("fit_negbin: negative count");
    y(i) = records[i].trip_count;
    ybar += y(i);
  }
  ybar /= n;
  if (ybar == 0.0) throw Error("fit_negbin: all counts are zero");

  const bool free_theta = !fixed_theta.has_value();
  const int npar = p + (free_theta ? 1 : 0);
  std::vector<double> start(npar, 0.0);
  start[0] = std::log(ybar);

  OptimizerControls oc;
  oc.gradient_tolerance = 1e-7;
  OptimizerResult opt = bfgs_maximize(
      [&](std::span<const double> par, std::vector<double>& g) {
        g.resize(npar);
        return negbin_loglik(X, y, par, free_theta, fixed_theta.value_or(0.0), &g);
      },
      start, oc);

  RegressionFit fit;
  fit.family = RegressionFit::Family::NegativeBinomial;
  fit.names.push_back("(Intercept)");
  for (const auto& nme : covariate_names) fit.names.push_back(nme);
  fit.n = n;
  fit.converged = opt.converged;
  fit.theta = free_theta ? std::exp(opt.x[p]) : *fixed_theta;
  fit.two_loglik = 2.0 * opt.value;

  // Observed-information standard errors via finite differences of the
  // analytic gradient.
  Eigen::MatrixXd hess(npar, npar);
  std::vector<double> gp(npar), gm(npar), par = opt.x;
  for (int i = 0; i < npar; ++i) {
    double h = 1e-5 * (1.0 + std::fabs(par[i]));
    double saved = par[i];
    par[i] = saved + h;
    negbin_loglik(X, y, par, free_theta, fixed_theta.value_or(0.0), &gp);
    par[i] = saved - h;
    negbin_loglik(X, y, par, free_theta, fixed_theta.value_or(0.0), &gm);
    par[i] = saved;
    for (int j = 0; j < npar; ++j) hess(i, j) = (gp[j] - gm[j]) / (2.0 * h);
  }
  hess = 0.5 * (hess + hess.transpose().eval());
  Eigen::MatrixXd cov = (-hess).ldlt().solve(Eigen::MatrixXd::Identity(npar, npar));
  for (int j = 0; j < p; ++j) {
    fit.coefficients.push_back(opt.x[j]);
    double se = std::sqrt(std::max(cov(j, j), 0.0));
    fit.std_errors.push_back(se);
    double z = se > 0 ? opt.x[j] / se : 0.0;
    fit.t_or_z.push_back(z);
    fit.p_values.push_back(numeric::p_value_z(z));
  }
  if (free_theta) fit.theta_se = fit.theta * std::sqrt(std::max(cov(p, p), 0.0));

  Eigen::VectorXd eta = X * Eigen::Map<const Eigen::VectorXd>(opt.x.data(), p);
  Eigen::VectorXd mu = eta.array().exp();
  fit.resid_deviance = negbin_deviance(y, mu, fit.theta);
  fit.null_deviance = negbin_deviance(y, Eigen::VectorXd::Constant(n, ybar), fit.theta);
  return fit;
}

double predict_trips(const RegressionFit& fit, const std::map<std::string, double>& covariates,
                     bool* floored) {
  double eta = 0.0;
  for (size_t j = 0; j < fit.names.size(); ++j) {
    double x = 1.0;
    if (fit.names[j] != "(Intercept)") {
      auto it = covariates.find(fit.names[j]);
      if (it == covariates.end())
        throw Error("predict_trips: missing covariate '" + fit.names[j] + "'");
      x = it->second;
    }
    eta += fit.coefficients[j] * x;
  }
  if (floored) *floored = false;
  if (fit.family == RegressionFit::Family::NegativeBinomial) return std::exp(eta);
  if (eta < 0.0) {
    if (floored) *floored = true;
    return 0.0;
  }
  return eta;
}

void write_regression_fit(const RegressionFit& fit, Purpose purpose, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["purpose"] = to_string(purpose);
  doc["family"] = fit.family == RegressionFit::Family::Linear ? "linear" : "negbin";
  nlohmann::ordered_json coefs = nlohmann::ordered_json::array();
  for (size_t j = 0; j < fit.names.size(); ++j) {
    nlohmann::ordered_json c;
    c["name"] = fit.names[j];
    c["estimate"] = fit.coefficients[j];
    c["std_error"] = fit.std_errors[j];
    c["stat"] = fit.t_or_z[j];
    c["p"] = fit.p_values[j];
    c["sig"] = significance_code(fit.p_values[j]);
    coefs.push_back(std::move(c));
  }
  doc["coefficients"] = std::move(coefs);
  doc["n"] = fit.n;
  doc["converged"] = fit.converged;
  if (fit.family == RegressionFit::Family::Linear) {
    doc["r2"] = fit.r2;
    doc["adj_r2"] = fit.adj_r2;
    doc["residual_se"] = fit.residual_se;
  } else {
    doc["theta"] = fit.theta;
    doc["theta_se"] = fit.theta_se;
    doc["two_loglik"] = fit.two_loglik;
    doc["null_deviance"] = fit.null_deviance;
    doc["resid_deviance"] = fit.resid_deviance;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write fit file: " + path);
  out << doc.dump(2) << "\n";
}

std::pair<RegressionFit, Purpose> read_regression_fit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open fit file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  RegressionFit fit;
  Purpose purpose = purpose_from_string(doc.at("purpose"));
  fit.family = doc.at("family") == "linear" ? RegressionFit::Family::Linear
                                            : RegressionFit::Family::NegativeBinomial;
  for (const auto& c : doc.at("coefficients")) {
    fit.names.push_back(c.at("name"));
    fit.coefficients.push_back(c.at("estimate").get<double>());
    fit.std_errors.push_back(c.at("std_error").get<double>());
    fit.t_or_z.push_back(c.at("stat").get<double>());
    fit.p_values.push_back(c.at("p").get<double>());
  }
  fit.n = doc.at("n").get<int>();
  fit.converged = doc.at("converged").get<bool>();
  if (fit.family == RegressionFit::Family::Linear) {
    fit.r2 = doc.at("r2").get<double>();
    fit.adj_r2 = doc.at("adj_r2").get<double>();
    fit.residual_se = doc.at("residual_se").get<double>();
  } else {
    fit.theta = doc.at("theta").get<double>();
    fit.theta_se = doc.at("theta_se").get<double>();
    fit.two_loglik = doc.at("two_loglik").get<double>();
    fit.null_deviance = doc.at("null_deviance").get<double>();
    fit.resid_deviance = doc.at("resid_deviance").get<double>();
  }
  return {fit, purpose};
}

}  // namespace intercity
