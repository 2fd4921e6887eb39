// SPDX-License-Identifier: Apache-2.0

#include "biped_gait/hybrid_optimizer.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace biped {

void RefineConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw GaitError(ErrorCode::kInvalidArgument, what);
  };
  require(max_iterations > 0, "max iterations must be positive");
  require(violation_tolerance > 0.0, "violation tolerance must be positive");
  require(fd_step > 0.0, "finite-difference step must be positive");
  require(step_tolerance > 0.0, "step tolerance must be positive");
  require(initial_damping > 0.0, "initial damping must be positive");
  require(max_damping_trials > 0, "damping trials must be positive");
}

namespace {

double sum_of_squares(const Eigen::VectorXd& r) {
  const double v = r.squaredNorm();
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

Eigen::MatrixXd central_jacobian(const StagedLeastSquares& problem, const Eigen::VectorXd& z,
                                 int stage, Eigen::Index rows, double step) {
  Eigen::MatrixXd jac(rows, z.size());
  Eigen::VectorXd probe = z;
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    const double h = step * std::max(1.0, std::abs(z[k]));
    probe[k] = z[k] + h;
    const Eigen::VectorXd up = problem.residuals(probe, stage);
    probe[k] = z[k] - h;
    const Eigen::VectorXd down = problem.residuals(probe, stage);
    probe[k] = z[k];
    jac.col(k) = (up - down) / (2.0 * h);
  }
  return jac;
}

}  // namespace

RefineResult local_refine(const Eigen::VectorXd& z0, const StagedLeastSquares& problem,
                          const RefineConfig& cfg) {
  cfg.validate();
  if (!z0.allFinite()) throw GaitError(ErrorCode::kInvalidArgument, "z0 must be finite");
  if (problem.stages < 1 || !problem.residuals) {
    throw GaitError(ErrorCode::kInvalidArgument, "refinement problem is incomplete");
  }
  const int last = problem.stages - 1;
  auto final_value = [&](const Eigen::VectorXd& z) {
    return sum_of_squares(problem.residuals(z, last));
  };

  RefineResult out;
  out.z = z0;
  out.initial_value = final_value(z0);
  out.value = out.initial_value;

  Eigen::VectorXd z = z0;
  int stage = 0;
  double damping = cfg.initial_damping;
  double growth = 2.0;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    // Spread the iteration budget evenly over the weight schedule.
    const int due = std::min(last, (it - 1) * problem.stages / cfg.max_iterations);
    stage = std::max(stage, due);
    const Eigen::VectorXd r = problem.residuals(z, stage);
    const double f = sum_of_squares(r);
    const Eigen::MatrixXd jac = central_jacobian(problem, z, stage, r.size(), cfg.fd_step);
    const Eigen::VectorXd grad = jac.transpose() * r;
    const Eigen::MatrixXd hess = jac.transpose() * jac;
    const Eigen::VectorXd scale = hess.diagonal().array() + 1e-12;

    bool accepted = false;
    double step_norm = 0.0;
    if (hess.allFinite() && grad.allFinite()) {
      for (int trial = 0; trial < cfg.max_damping_trials; ++trial) {
        Eigen::MatrixXd lhs = hess;
        lhs.diagonal() += damping * scale;
        const Eigen::LLT<Eigen::MatrixXd> llt(lhs);
        if (llt.info() == Eigen::Success) {
          const Eigen::VectorXd delta = llt.solve(-grad);
          const Eigen::VectorXd candidate = z + delta;
          const double fc = delta.allFinite() ? sum_of_squares(problem.residuals(candidate, stage))
                                              : std::numeric_limits<double>::infinity();
          if (fc < f) {
            // Gain ratio against the quadratic model decides the next damping.
            const double predicted = -(2.0 * grad.dot(delta) + delta.dot(hess * delta));
            const double rho = predicted > 0.0 ? (f - fc) / predicted : 0.0;
            damping *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
            damping = std::max(damping, 1e-15);
            growth = 2.0;
            z = candidate;
            step_norm = delta.norm();
            accepted = true;
            break;
          }
        }
        damping *= growth;
        growth *= 2.0;
      }
    }
    out.iterations = it;
    if (!accepted && it == 1) {
      out.no_progress = true;
      out.history.push_back(out.value);
      break;
    }
    if (accepted) {
      const double v = final_value(z);
      if (v < out.value) {
        out.value = v;
        out.z = z;
      }
    }
    out.history.push_back(out.value);
    const bool converged = !accepted || step_norm <= cfg.step_tolerance * (1.0 + z.norm());
    if (converged) {
      if (stage == last) break;
      ++stage;
    }
  }

  out.success = problem.max_violation ? problem.max_violation(out.z) <= cfg.violation_tolerance
                                      : true;
  return out;
}

}  // namespace biped
