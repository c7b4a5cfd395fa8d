#include "medshift/bfgs.hpp"

#include <cmath>
#include <limits>

#include "medshift/error.hpp"

namespace medshift {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const std::function<double(const Eigen::VectorXd&)>& f,
                 const Eigen::VectorXd& x) {
  try {
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  } catch (const Error&) {
    return kInf;
  }
}

}  // namespace

Eigen::VectorXd central_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double rel_step,
                                 double min_step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = std::max(min_step, rel_step * std::abs(x[i]));
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

BfgsResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& x0, const BfgsOptions& opt) {
  const Eigen::Index n = x0.size();
  BfgsResult res;
  int evals = 0;
  auto fun = [&](const Eigen::VectorXd& x) {
    ++evals;
    return safe_eval(f, x);
  };
  auto grad = [&](const Eigen::VectorXd& x) {
    evals += 2 * static_cast<int>(n);
    return central_gradient([&](const Eigen::VectorXd& z) { return safe_eval(f, z); },
                            x, opt.fd_rel_step, opt.fd_min_step);
  };

  Eigen::VectorXd x = x0;
  double fx = fun(x);
  if (!std::isfinite(fx)) {
    res.x = x;
    res.f = fx;
    res.message = "objective not finite at the starting point";
    res.evaluations = evals;
    return res;
  }
  Eigen::VectorXd g = grad(x);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  bool first_update = true;
  double last_rel_change = kInf;
  bool fresh_metric = true;

  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (!g.allFinite()) {
      res.message = "gradient not finite";
      break;
    }
    const double gmax = g.cwiseAbs().maxCoeff();
    if (gmax < opt.grad_tol && last_rel_change < opt.rel_tol) {
      res.converged = true;
      res.message = "gradient and objective change below tolerance";
      break;
    }

    Eigen::VectorXd d = -h_inv * g;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      first_update = true;
      d = -g;
      slope = g.dot(d);
    }

    double step = 1.0;
    double f_new = kInf;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      x_new = x + step * d;
      f_new = fun(x_new);
      if (f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }

    if (!accepted) {
      if (gmax < opt.grad_tol) {
        res.converged = true;
        res.message = "gradient below tolerance; no further decrease possible";
        break;
      }
      if (!fresh_metric) {
        h_inv.setIdentity();
        first_update = true;
        fresh_metric = true;
        continue;
      }
      res.message = "line search failed";
      break;
    }

    const Eigen::VectorXd g_new = grad(x_new);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    last_rel_change = std::abs(f_new - fx) / std::max(1.0, std::abs(fx));
    x = x_new;
    fx = f_new;
    g = g_new;
    fresh_metric = false;

    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (first_update) {
        h_inv = Eigen::MatrixXd::Identity(n, n) * (sy / yv.squaredNorm());
        first_update = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      h_inv = (eye - rho * s * yv.transpose()) * h_inv *
                  (eye - rho * yv * s.transpose()) +
              rho * s * s.transpose();
    }
  }
  if (it == opt.max_iterations) res.message = "maximum iterations reached";

  res.x = x;
  res.f = fx;
  res.grad = g;
  res.grad_max = g.cwiseAbs().maxCoeff();
  res.iterations = it;
  res.evaluations = evals;
  return res;
}

}  // namespace medshift
