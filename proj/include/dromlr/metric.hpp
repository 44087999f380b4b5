#ifndef DROMLR_METRIC_HPP
#define DROMLR_METRIC_HPP

#include "dromlr/matnorm.hpp"

#include <Eigen/Eigenvalues>

namespace dromlr {

// Metric-learning instance: minimize tr(W * S_obj) subject to
// tr(W * C_perturbed) >= margin, tr(W * C_clean) >= margin, W PSD.
struct MetricProblem {
  Matrix s_obj;         // sum of d_i d_i' over similar (clean, perturbed) pairs
  Matrix c_perturbed;   // averaged outer products of dissimilar perturbed pairs
  Matrix c_clean;       // same on clean features
  double margin = 1.0;
  int dim = 0;
};

struct MetricSolution {
  MetricMatrix w;
  double objective = 0.0;
  double slack_perturbed = 0.0;  // tr(W C_perturbed) - margin
  double slack_clean = 0.0;
  int iterations = 0;
};

// Frobenius-nearest PSD matrix: eigendecompose, clamp negatives, reassemble.
inline Matrix psd_project(const Matrix& m) {
  if (m.rows() != m.cols()) throw ValidationError("psd_project needs a square matrix");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    throw ValidationError("psd_project input is not symmetric (max asymmetry " +
                          std::to_string(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Vector clamped = es.eigenvalues().cwiseMax(0.0);
  Matrix out = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

// Assemble the problem matrices from aligned clean/perturbed feature lists.
// Dissimilar pairs are the unordered (i, j) with differing labels.
inline MetricProblem build_metric_problem(const std::vector<Vector>& clean,
                                          const std::vector<Vector>& perturbed,
                                          const std::vector<LabelVector>& labels,
                                          double margin) {
  const std::size_t n = clean.size();
  if (perturbed.size() != n || labels.size() != n) {
    throw ValidationError("clean/perturbed/label lists must be aligned");
  }
  if (n == 0) throw ValidationError("empty feature lists");
  if (!(margin > 0.0)) throw ValidationError("margin must be positive");
  const Eigen::Index p = clean.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    if (clean[i].size() != p || perturbed[i].size() != p) {
      throw ValidationError("feature dimension mismatch at sample " + std::to_string(i));
    }
  }

  MetricProblem prob;
  prob.dim = static_cast<int>(p);
  prob.margin = margin;
  prob.s_obj = Matrix::Zero(p, p);
  prob.c_perturbed = Matrix::Zero(p, p);
  prob.c_clean = Matrix::Zero(p, p);

  for (std::size_t i = 0; i < n; ++i) {
    Vector d = perturbed[i] - clean[i];
    prob.s_obj += d * d.transpose();
  }

  std::size_t pair_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (labels[i] == labels[j]) continue;
      Vector dp = perturbed[i] - perturbed[j];
      Vector dc = clean[i] - clean[j];
      prob.c_perturbed += dp * dp.transpose();
      prob.c_clean += dc * dc.transpose();
      ++pair_count;
    }
  }
  if (pair_count == 0) {
    throw ValidationError("no dissimilar pairs: all labels are equal");
  }
  prob.c_perturbed /= static_cast<double>(pair_count);
  prob.c_clean /= static_cast<double>(pair_count);
  return prob;
}

namespace detail {

// Smallest uniform scaling that makes a PSD iterate feasible for both trace
// constraints; infinity if a constraint cannot be met by scaling.
inline double feasibility_scale(const Matrix& w, const MetricProblem& prob) {
  const double t1 = (w.array() * prob.c_perturbed.array()).sum();
  const double t2 = (w.array() * prob.c_clean.array()).sum();
  if (t1 <= 0.0 || t2 <= 0.0) return std::numeric_limits<double>::infinity();
  return std::max({1.0, prob.margin / t1, prob.margin / t2});
}

}  // namespace detail

// Projected augmented-Lagrangian solve of the metric-learning problem.
// Each candidate iterate is rescaled to exact feasibility and the best
// feasible iterate is returned, so the output always satisfies both trace
// constraints and improves on the scaled-identity start.
inline MetricSolution learn_metric(const MetricProblem& prob, int max_iters = 5000,
                                   double tol = 1e-9) {
  if (prob.dim < 1) throw ValidationError("invalid metric problem dimension");
  const double trace_p = prob.c_perturbed.trace();
  const double trace_c = prob.c_clean.trace();
  if (trace_p <= 1e-14 || trace_c <= 1e-14) {
    throw SolverError("infeasible metric problem: a constraint matrix is zero");
  }

  auto objective = [&](const Matrix& w) { return (w.array() * prob.s_obj.array()).sum(); };
  auto trace_dot = [](const Matrix& a, const Matrix& b) {
    return (a.array() * b.array()).sum();
  };

  // Feasible scaled-identity start.
  const double beta = prob.margin * std::max(1.0 / trace_p, 1.0 / trace_c);
  Matrix w = beta * Matrix::Identity(prob.dim, prob.dim);

  Matrix best_w = w;
  double best_obj = objective(w);

  const double c_norm2 = prob.c_perturbed.squaredNorm() + prob.c_clean.squaredNorm();
  double mu1 = 0.0, mu2 = 0.0;
  double rho = std::max(1.0, prob.s_obj.norm() / std::max(1e-12, std::sqrt(c_norm2)));

  int iters_done = 0;
  double prev_obj = best_obj;
  for (int outer = 0; outer < 50 && iters_done < max_iters; ++outer) {
    const double step = 1.0 / (rho * c_norm2 + 1e-12);
    for (int inner = 0; inner < 200 && iters_done < max_iters; ++inner, ++iters_done) {
      const double g1 = prob.margin - trace_dot(w, prob.c_perturbed);
      const double g2 = prob.margin - trace_dot(w, prob.c_clean);
      Matrix grad = prob.s_obj;
      const double a1 = std::max(0.0, mu1 + rho * g1);
      const double a2 = std::max(0.0, mu2 + rho * g2);
      grad -= a1 * prob.c_perturbed;
      grad -= a2 * prob.c_clean;
      w = psd_project(0.5 * ((w - step * grad) + (w - step * grad).transpose()));

      const double scale = detail::feasibility_scale(w, prob);
      if (std::isfinite(scale)) {
        const double cand_obj = scale * objective(w);
        if (cand_obj < best_obj) {
          best_obj = cand_obj;
          best_w = scale * w;
        }
      }
    }
    mu1 = std::max(0.0, mu1 + rho * (prob.margin - trace_dot(w, prob.c_perturbed)));
    mu2 = std::max(0.0, mu2 + rho * (prob.margin - trace_dot(w, prob.c_clean)));
    rho *= 1.5;

    const double viol = std::max({0.0, prob.margin - trace_dot(w, prob.c_perturbed),
                                  prob.margin - trace_dot(w, prob.c_clean)});
    const double rel_change =
        std::abs(best_obj - prev_obj) / std::max(1.0, std::abs(prev_obj));
    prev_obj = best_obj;
    if (outer > 0 && viol < tol && rel_change < tol) break;
  }

  const double s1 = trace_dot(best_w, prob.c_perturbed) - prob.margin;
  const double s2 = trace_dot(best_w, prob.c_clean) - prob.margin;
  if (s1 < -1e-6 || s2 < -1e-6) {
    throw SolverError("metric solve did not reach feasibility (slacks " +
                      std::to_string(s1) + ", " + std::to_string(s2) + ")");
  }
  return MetricSolution{MetricMatrix(psd_project(best_w)), best_obj, s1, s2, iters_done};
}

}  // namespace dromlr

#endif  // DROMLR_METRIC_HPP
