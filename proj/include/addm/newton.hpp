#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "addm/linalg.hpp"
#include "addm/types.hpp"

namespace addm {

struct NewtonConfig {
  double rtol = 1e-4;
  double atol = 1e-12;
  int max_iterations = 100;
  int max_backtracks = 8;
  double armijo_slope = 1e-4;  // accept when |F| <= (1 - slope*alpha)|F_old|
  double dp_cap = 500.0;       // psi per accepted update
  double ds_cap = 0.2;         // saturation change per accepted update
};

enum class NewtonOutcome {
  converged,
  max_iterations,
  line_search_failure,
  linear_failure,
  evaluation_failure,
};

struct NewtonReport {
  NewtonOutcome outcome = NewtonOutcome::max_iterations;
  bool converged = false;
  int iterations = 0;          // accepted updates
  long linear_iterations = 0;
  double initial_norm = 0;
  double final_norm = 0;
};

// Damped Newton with backtracking line search. Convergence test
// ||F|| <= max(rtol * ref, atol) runs before the first update; `norm_ref`
// overrides the reference (default: residual at the starting point), which
// lets a caller measure convergence against a start-of-step state when x0 is
// an improved initial guess.
//
// Problem interface:
//   bool assemble(const Vec& x, bool with_jacobian)   evaluate at x
//   const Vec& residual() const                        scaled residual
//   bool solve_linear(Vec& d, long& iters)             d = -J \ F
//   double limit_alpha(const Vec& x, const Vec& d, const NewtonConfig&)
//   void apply_update(const Vec& x, double alpha, const Vec& d, Vec& out)
template <class Problem>
NewtonReport newton_solve(Problem& prob, Vec& x, const NewtonConfig& cfg,
                          std::optional<double> norm_ref = std::nullopt) {
  NewtonReport rep;
  if (!prob.assemble(x, true)) {
    rep.outcome = NewtonOutcome::evaluation_failure;
    return rep;
  }
  double fnorm = norm2(prob.residual());
  rep.initial_norm = fnorm;
  rep.final_norm = fnorm;
  const double tol = std::max(cfg.rtol * norm_ref.value_or(fnorm), cfg.atol);

  Vec d, xt;
  while (true) {
    if (fnorm <= tol) {
      rep.outcome = NewtonOutcome::converged;
      rep.converged = true;
      return rep;
    }
    if (rep.iterations >= cfg.max_iterations) {
      rep.outcome = NewtonOutcome::max_iterations;
      return rep;
    }

    long lin_it = 0;
    if (!prob.solve_linear(d, lin_it)) {
      rep.linear_iterations += lin_it;
      rep.outcome = NewtonOutcome::linear_failure;
      return rep;
    }
    rep.linear_iterations += lin_it;

    double alpha = std::min(1.0, prob.limit_alpha(x, d, cfg));
    bool accepted = false;
    double ft = 0;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      prob.apply_update(x, alpha, d, xt);
      if (prob.assemble(xt, false)) {
        ft = norm2(prob.residual());
        if (ft <= (1.0 - cfg.armijo_slope * alpha) * fnorm) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      rep.outcome = NewtonOutcome::line_search_failure;
      return rep;
    }

    x.swap(xt);
    ++rep.iterations;
    fnorm = ft;
    rep.final_norm = ft;
    if (fnorm <= tol) {
      rep.outcome = NewtonOutcome::converged;
      rep.converged = true;
      return rep;
    }
    // Next iteration needs the Jacobian at the accepted point; the residual
    // there was just evaluated, so this cannot fail.
    if (!prob.assemble(x, true)) {
      rep.outcome = NewtonOutcome::evaluation_failure;
      return rep;
    }
  }
}

}  // namespace addm
