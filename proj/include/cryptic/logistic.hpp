#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "cryptic/error.hpp"
#include "cryptic/stats.hpp"

namespace cryptic {

class DegenerateOutcomeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct FitConfig {
  int max_iter = 100;
  double tolerance = 1e-8;  // on the max absolute score component
  double ridge_lambda_fallback = 1e-4;
  /// Column left unpenalized by the ridge fallback; -1 penalizes every column.
  int intercept_column = 0;
  /// Any |coefficient| beyond this is treated as divergence caused by separation.
  double divergence_bound = 30.0;
};

struct LogisticFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd z;
  Eigen::VectorXd p_values;
  Eigen::VectorXd odds_ratios;
  int iterations = 0;
  bool converged = false;
  bool ridge = false;
  double log_likelihood = 0.0;
  double max_abs_score = 0.0;
};

inline double softplus(double eta) {
  return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

/// Bernoulli log-likelihood of a logistic model.
inline double logistic_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - softplus(eta[i]);
  return ll;
}

/// Gradient of logistic_loglik with respect to beta: X'(y - p).
inline Eigen::VectorXd logistic_score(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-eta[i]));
    resid[i] = y[i] - p;
  }
  return X.transpose() * resid;
}

namespace logistic_detail {

struct NewtonResult {
  Eigen::VectorXd beta;
  Eigen::MatrixXd information;  // penalized observed information at beta
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  bool singular = false;
  double loglik = 0.0;
  double max_abs_score = 0.0;
};

inline NewtonResult newton(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                           const FitConfig& cfg) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, lambda);
  if (cfg.intercept_column >= 0 && cfg.intercept_column < p) penalty[cfg.intercept_column] = 0.0;

  auto objective = [&](const Eigen::VectorXd& b) {
    return logistic_loglik(X, y, b) - 0.5 * (penalty.array() * b.array().square()).sum();
  };

  NewtonResult r;
  r.beta = Eigen::VectorXd::Zero(p);
  double obj = objective(r.beta);
  Eigen::VectorXd w(n), resid(n);
  for (int it = 0; it <= cfg.max_iter; ++it) {
    const Eigen::VectorXd eta = X * r.beta;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mu = 1.0 / (1.0 + std::exp(-eta[i]));
      w[i] = mu * (1.0 - mu);
      resid[i] = y[i] - mu;
    }
    Eigen::VectorXd score = X.transpose() * resid - (penalty.array() * r.beta.array()).matrix();
    r.information = X.transpose() * w.asDiagonal() * X;
    r.information.diagonal() += penalty;
    r.iterations = it;
    r.max_abs_score = score.cwiseAbs().maxCoeff();
    if (r.max_abs_score < cfg.tolerance) {
      r.converged = true;
      break;
    }
    if (it == cfg.max_iter) break;
    Eigen::LLT<Eigen::MatrixXd> llt(r.information);
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-13) {
      r.singular = true;
      break;
    }
    const Eigen::VectorXd step = llt.solve(score);
    double scale = 1.0;
    Eigen::VectorXd next = r.beta + step;
    double next_obj = objective(next);
    for (int halve = 0; halve < 40 && !(next_obj >= obj - 1e-12 * std::fabs(obj)); ++halve) {
      scale *= 0.5;
      next = r.beta + scale * step;
      next_obj = objective(next);
    }
    r.beta = next;
    obj = next_obj;
    if (lambda == 0.0 && r.beta.cwiseAbs().maxCoeff() > cfg.divergence_bound) {
      r.diverged = true;
      break;
    }
  }
  r.loglik = logistic_loglik(X, y, r.beta);
  return r;
}

}  // namespace logistic_detail

/// Maximum-likelihood logistic regression by Newton-Raphson (IRLS). On separation,
/// singular information or non-convergence, refits with a ridge penalty and sets `ridge`.
/// Standard errors come from the inverse observed information; p-values are Wald.
inline LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const FitConfig& cfg = {}) {
  if (X.rows() != y.size()) throw NumericalError("design and outcome differ in length");
  if (X.rows() == 0 || X.cols() == 0) throw NumericalError("empty design matrix");
  const double total = y.sum();
  if (total == 0.0 || total == static_cast<double>(y.size())) {
    throw DegenerateOutcomeError("outcome is constant; logistic fit undefined");
  }

  auto res = logistic_detail::newton(X, y, 0.0, cfg);
  bool ridge = false;
  if (!res.converged) {
    ridge = true;
    res = logistic_detail::newton(X, y, cfg.ridge_lambda_fallback, cfg);
    if (res.singular) throw NumericalError("information matrix singular even with ridge penalty");
    if (!res.converged) {
      throw NumericalError("ridge-penalized fit did not converge in " +
                           std::to_string(cfg.max_iter) + " iterations");
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(res.information);
  if (llt.info() != Eigen::Success) throw NumericalError("information matrix not positive definite");
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(X.cols(), X.cols()));

  LogisticFit fit;
  fit.coefficients = res.beta;
  fit.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.z = fit.coefficients.cwiseQuotient(fit.std_errors);
  fit.p_values.resize(X.cols());
  fit.odds_ratios.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    fit.p_values[j] = two_sided_normal_p(fit.z[j]);
    fit.odds_ratios[j] = std::exp(fit.coefficients[j]);
  }
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  fit.ridge = ridge;
  fit.log_likelihood = res.loglik;
  fit.max_abs_score = res.max_abs_score;
  return fit;
}

}  // namespace cryptic
