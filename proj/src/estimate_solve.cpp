#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "tsloc/estimate.hpp"

namespace tsloc {

namespace {

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Condition number of a symmetric PSD matrix after Jacobi scaling, so that
/// row weighting does not masquerade as geometric degeneracy.
double scaled_condition(const Eigen::MatrixXd& h) {
  Eigen::VectorXd diag = h.diagonal();
  if ((diag.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
  Eigen::VectorXd inv_sqrt = diag.array().rsqrt();
  Eigen::MatrixXd scaled = inv_sqrt.asDiagonal() * h * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled, Eigen::EigenvaluesOnly);
  double lo = eig.eigenvalues().minCoeff();
  double hi = eig.eigenvalues().maxCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

PositionEstimate ils_solve(const PseudoRangeSet& prs,
                           const std::map<NodeId, Eigen::VectorXd>& anchor_positions,
                           const Eigen::VectorXd& init, const EstimatorConfig& config) {
  const int dim = static_cast<int>(init.size());
  const int n = static_cast<int>(prs.entries.size());
  if (n < dim + 2) {
    throw Error(Errc::InsufficientAnchors,
                "ILS needs >= " + std::to_string(dim + 2) + " pseudo-ranges for " +
                    std::to_string(dim) + "D + bias, got " + std::to_string(n));
  }

  Eigen::MatrixXd anchors(n, dim);
  Eigen::VectorXd values(n), weights(n);
  for (int e = 0; e < n; ++e) {
    const PseudoRangeEntry& entry = prs.entries[e];
    auto it = anchor_positions.find(entry.anchor);
    if (it == anchor_positions.end()) {
      throw Error(Errc::UnknownNodeId, "no position for anchor '" + entry.anchor.value + "'");
    }
    if (it->second.size() != dim) {
      throw Error(Errc::MixedDimensionality, "anchor/init dimensionality mismatch");
    }
    if (!(entry.weight > 0.0)) {
      throw Error(Errc::InvalidParams, "pseudo-range weights must be > 0");
    }
    anchors.row(e) = it->second.transpose();
    values(e) = entry.pseudo_range_m;
    weights(e) = entry.weight;
  }

  Eigen::VectorXd pos = init;
  auto range_to = [&](const Eigen::VectorXd& p, int e) {
    return std::max((p - anchors.row(e).transpose()).norm(), 1e-12);
  };
  // The bias is linear: seed it with the weighted mean offset at the initial
  // position so the first Gauss-Newton step starts well scaled.
  double bias = 0.0;
  {
    double acc = 0.0;
    for (int e = 0; e < n; ++e) acc += weights(e) * (values(e) - range_to(pos, e));
    bias = acc / weights.sum();
  }

  auto weighted_rms = [&](const Eigen::VectorXd& p, double b) {
    double acc = 0.0;
    for (int e = 0; e < n; ++e) {
      double f = values(e) - (range_to(p, e) + b);
      acc += weights(e) * f * f;
    }
    return std::sqrt(acc / weights.sum());
  };

  PositionEstimate est;
  est.node = prs.target;
  bool converged = false;
  int iterations = 0;
  double rms = weighted_rms(pos, bias);

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    Eigen::MatrixXd jac(n, dim + 1);
    Eigen::VectorXd residual(n);
    for (int e = 0; e < n; ++e) {
      double range = range_to(pos, e);
      residual(e) = values(e) - (range + bias);
      jac.block(e, 0, 1, dim) = (pos - anchors.row(e).transpose()).transpose() / range;
      jac(e, dim) = 1.0;
    }
    Eigen::MatrixXd normal = jac.transpose() * weights.asDiagonal() * jac;
    if (scaled_condition(normal) > config.condition_limit) {
      throw Error(Errc::SingularGeometry, "anchor geometry is degenerate for target '" +
                                              prs.target.value + "'");
    }
    Eigen::VectorXd step = normal.ldlt().solve(jac.transpose() * (weights.asDiagonal() * residual));
    if (!step.allFinite()) {
      throw Error(Errc::NoConvergence, "ILS step is not finite");
    }

    double alpha = 1.0;
    Eigen::VectorXd new_pos = pos + alpha * step.head(dim);
    double new_bias = bias + alpha * step(dim);
    double new_rms = weighted_rms(new_pos, new_bias);
    for (int halving = 0; halving < 8 && new_rms > rms; ++halving) {
      alpha *= 0.5;
      new_pos = pos + alpha * step.head(dim);
      new_bias = bias + alpha * step(dim);
      new_rms = weighted_rms(new_pos, new_bias);
    }
    ++iterations;
    if (new_rms > rms) {
      // No step length improves the fit: we are at (numerical) stagnation.
      converged = true;
      break;
    }
    pos = new_pos;
    bias = new_bias;
    rms = new_rms;
    if (alpha * step.norm() < config.step_tol_m) {
      converged = true;
      break;
    }
  }

  if (!pos.allFinite() || !std::isfinite(bias)) {
    throw Error(Errc::NoConvergence, "ILS diverged to non-finite values");
  }

  est.pos = pos;
  est.common_bias_m = bias;
  est.iterations = iterations;
  est.residual_rms_m = weighted_rms(pos, bias);
  est.converged = converged;
  return est;
}

std::pair<PseudoRangeSet, std::vector<NodeId>> reject_outliers(
    const PseudoRangeSet& prs, const std::map<NodeId, Eigen::VectorXd>& anchor_positions,
    const Eigen::VectorXd& init, const EstimatorConfig& config) {
  const int dim = static_cast<int>(init.size());
  if (static_cast<int>(prs.entries.size()) < dim + 3) {
    throw Error(Errc::TooFewEntriesToFilter,
                "outlier filtering needs >= " + std::to_string(dim + 3) + " entries, got " +
                    std::to_string(prs.entries.size()));
  }

  PseudoRangeSet work = prs;
  std::vector<NodeId> excluded;

  while (true) {
    PositionEstimate est = ils_solve(work, anchor_positions, init, config);

    const int n = static_cast<int>(work.entries.size());
    std::vector<double> residuals(n);
    for (int e = 0; e < n; ++e) {
      const PseudoRangeEntry& entry = work.entries[e];
      double range = (est.pos - anchor_positions.at(entry.anchor)).norm();
      residuals[e] = entry.pseudo_range_m - (range + est.common_bias_m);
    }
    double med = median_of(residuals);
    std::vector<double> absdev(n);
    for (int e = 0; e < n; ++e) absdev[e] = std::abs(residuals[e] - med);
    double scale = std::max(1.4826 * median_of(absdev), 1e-6);

    // NLOS only ever lengthens a pseudo-range, so only positive excursions
    // count as outliers.
    int worst = -1;
    double worst_score = 0.0;
    for (int e = 0; e < n; ++e) {
      if (residuals[e] <= med) continue;
      double score = (residuals[e] - med) / scale;
      bool beats = score > worst_score + 1e-12;
      bool ties_with_lower_weight =
          std::abs(score - worst_score) <= 1e-12 && worst >= 0 &&
          work.entries[e].weight < work.entries[worst].weight;
      if (worst < 0 || beats || ties_with_lower_weight) {
        worst = e;
        worst_score = score;
      }
    }

    if (worst < 0 || worst_score <= config.outlier_threshold || n <= dim + 2) break;
    excluded.push_back(work.entries[worst].anchor);
    work.entries.erase(work.entries.begin() + worst);
  }
  return {work, excluded};
}

}  // namespace tsloc
