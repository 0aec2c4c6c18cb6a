#include "geowarp/align.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>

#include "geowarp/error.hpp"

namespace geowarp {

void AlignConfig::validate() const {
  const bool ok = max_iterations >= 1 && initial_step > 0.0 && step_shrink > 0.0 && step_shrink < 1.0 &&
                  convergence_tol > 0.0 && max_update > 0.0 && history >= 1 && armijo > 0.0 && armijo < 1.0 && min_step > 0.0 &&
                  function_tol >= 0.0;
  if (!ok) {
    throw Error(ErrorCode::InvalidInput,
                "align config requires max_iterations >= 1, 0 < step_shrink < 1, positive steps and tolerance");
  }
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::GradientTolerance: return "gradient_tolerance";
    case Termination::FunctionTolerance: return "function_tolerance";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::LineSearchStalled: return "line_search_stalled";
    case Termination::Degenerate: return "degenerate";
  }
  return "unknown";
}

Pose perturb_pose(const Pose& p, const Vec6& delta) {
  return Pose(p.position() + delta.head<3>(), quat_exp(delta.tail<3>()) * p.orientation());
}

namespace {

Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    const Vec3 v(normal(rng), normal(rng), normal(rng));
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

}  // namespace

Vec6 random_perturbation(std::uint64_t seed, double max_translation, double max_rotation_rad) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec6 d;
  d.head<3>() = random_direction(rng) * (unit(rng) * max_translation);
  d.tail<3>() = random_direction(rng) * (unit(rng) * max_rotation_rad);
  return d;
}

Vec12 fd_gradient(const FramePair& pair, const Pose& pred_prev, const Pose& pred_curr, const LossConfig& config,
                  WarpMode mode, double step, Exec exec) {
  Vec12 g = Vec12::Zero();
  for (int j = 0; j < 12; ++j) {
    Vec6 delta = Vec6::Zero();
    delta[j % 6] = step;
    const bool prev = j < 6;
    const Pose prev_plus = prev ? perturb_pose(pred_prev, delta) : pred_prev;
    const Pose prev_minus = prev ? perturb_pose(pred_prev, -delta) : pred_prev;
    const Pose curr_plus = prev ? pred_curr : perturb_pose(pred_curr, delta);
    const Pose curr_minus = prev ? pred_curr : perturb_pose(pred_curr, -delta);
    const double f_plus = total_loss(pair, prev_plus, curr_plus, config, mode, exec).total;
    const double f_minus = total_loss(pair, prev_minus, curr_minus, config, mode, exec).total;
    g[j] = (f_plus - f_minus) / (2.0 * step);
  }
  return g;
}

namespace {

// Two-loop recursion over the stored curvature pairs; returns a search
// direction (not yet negated) approximating H^-1 g.
Vec12 lbfgs_direction(const Vec12& g, const std::deque<Vec12>& s_hist, const std::deque<Vec12>& y_hist) {
  Vec12 q = g;
  const std::size_t m = s_hist.size();
  std::vector<double> alpha(m);
  for (std::size_t k = m; k-- > 0;) {
    const double rho = 1.0 / y_hist[k].dot(s_hist[k]);
    alpha[k] = rho * s_hist[k].dot(q);
    q -= alpha[k] * y_hist[k];
  }
  if (m > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
  for (std::size_t k = 0; k < m; ++k) {
    const double rho = 1.0 / y_hist[k].dot(s_hist[k]);
    const double beta = rho * y_hist[k].dot(q);
    q += s_hist[k] * (alpha[k] - beta);
  }
  return q;
}

}  // namespace

AlignReport refine_poses(const FramePair& pair, const LossConfig& config, const AlignConfig& align,
                         const Pose& init_prev, const Pose& init_curr, Exec exec) {
  align.validate();
  const bool anchored = align.mode == WarpMode::Anchored;

  AlignReport report;
  report.parameter_count = anchored ? 6 : 12;
  report.pose_prev = init_prev;
  report.pose_curr = init_curr;

  const auto active_gradient = [&](const LossGradient& lg) {
    Vec12 g = lg.gradient;
    if (anchored) g.segment<6>(kCurrOffset).setZero();
    return g;
  };

  LossGradient current = total_loss_gradient(pair, report.pose_prev, report.pose_curr, config, align.mode, exec);
  report.trajectory.push_back(current.loss.total);
  if (current.loss.degenerate) {
    report.termination = Termination::Degenerate;
    report.final_loss = current.loss;
    report.final_gradient_norm = active_gradient(current).norm();
    return report;
  }

  std::deque<Vec12> s_hist;
  std::deque<Vec12> y_hist;
  report.termination = Termination::MaxIterations;
  Vec12 g = active_gradient(current);
  for (;;) {
    if (g.norm() < align.convergence_tol) {
      report.termination = Termination::GradientTolerance;
      break;
    }
    if (report.iterations >= align.max_iterations) break;

    // Quasi-Newton direction first; steepest descent when it is not a descent
    // direction or its line search fails.
    bool accepted = false;
    Vec12 step_vec = Vec12::Zero();
    Pose next_prev;
    Pose next_curr;
    LossBreakdown next_loss;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const bool quasi_newton = attempt == 0 && !s_hist.empty();
      if (attempt == 0 && s_hist.empty()) ++attempt;
      Vec12 dir = quasi_newton ? Vec12(-lbfgs_direction(g, s_hist, y_hist)) : Vec12(-g);
      if (anchored) dir.segment<6>(kCurrOffset).setZero();
      const double slope = g.dot(dir);
      if (!(slope < 0.0)) continue;
      double first = quasi_newton ? 1.0 : align.initial_step;
      first = std::min(first, align.max_update / dir.norm());
      for (double step = first; step >= align.min_step; step *= align.step_shrink) {
        const Vec12 delta = step * dir;
        next_prev = perturb_pose(report.pose_prev, delta.segment<6>(kPrevOffset));
        next_curr = anchored ? report.pose_curr : perturb_pose(report.pose_curr, delta.segment<6>(kCurrOffset));
        next_loss = total_loss(pair, next_prev, next_curr, config, align.mode, exec);
        if (!next_loss.degenerate && next_loss.total < current.loss.total &&
            next_loss.total <= current.loss.total + align.armijo * step * slope) {
          accepted = true;
          step_vec = delta;
          break;
        }
      }
      if (!accepted) {
        s_hist.clear();
        y_hist.clear();
      }
    }
    if (!accepted) {
      report.termination = Termination::LineSearchStalled;
      break;
    }

    const double decrease = current.loss.total - next_loss.total;
    report.pose_prev = next_prev;
    report.pose_curr = next_curr;
    ++report.iterations;
    current = total_loss_gradient(pair, report.pose_prev, report.pose_curr, config, align.mode, exec);
    report.trajectory.push_back(current.loss.total);
    const Vec12 g_next = active_gradient(current);
    const Vec12 y = g_next - g;
    if (y.dot(step_vec) > 1e-12 * y.norm() * step_vec.norm()) {
      s_hist.push_back(step_vec);
      y_hist.push_back(y);
      if (s_hist.size() > static_cast<std::size_t>(align.history)) {
        s_hist.pop_front();
        y_hist.pop_front();
      }
    }
    g = g_next;
    if (decrease <= align.function_tol * std::abs(current.loss.total)) {
      report.termination = Termination::FunctionTolerance;
      break;
    }
  }

  report.final_gradient_norm = g.norm();
  report.final_loss = current.loss;
  report.converged = report.termination == Termination::GradientTolerance ||
                     report.termination == Termination::FunctionTolerance ||
                     report.termination == Termination::LineSearchStalled;
  return report;
}

}  // namespace geowarp
