#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace medshift {

struct BfgsOptions {
  int max_iterations = 500;
  /// Converged when max |gradient| falls below this...
  double grad_tol = 1e-6;
  /// ...and the last accepted step changed f by less than this (relative).
  double rel_tol = 1e-10;
  double fd_rel_step = 1e-6;
  double fd_min_step = 1e-6;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  double grad_max = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
};

/// Central-difference gradient with step max(min_step, rel_step * |x_i|).
Eigen::VectorXd central_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double rel_step,
                                 double min_step);

/// Minimizes f by BFGS with an Armijo backtracking line search and
/// finite-difference gradients. f may return +inf (or throw) outside its
/// domain; such trial points are rejected by the line search.
BfgsResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& x0, const BfgsOptions& opt = {});

}  // namespace medshift
