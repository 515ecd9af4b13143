#include "klrisk/expfam.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace klrisk {

ExponentialFamily::ExponentialFamily(Distribution base, Statistic t) : base_(std::move(base)), t_(std::move(t)) {
  require_same_space(base_.space(), t_.space(), "exponential family");
  if (!base_.has_full_support()) throw DomainError("base point must have full support");
  const auto points = static_cast<Eigen::Index>(base_.size());
  const Eigen::Index d = t_.dimension();
  if (d > points - 1) throw DomainError("canonical statistic dimension exceeds |X| - 1");
  Eigen::MatrixXd affine(points, d + 1);
  affine.col(0).setOnes();
  affine.rightCols(d) = t_.values();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(affine);
  qr.setThreshold(1e-10);
  if (qr.rank() != d + 1) throw DomainError("canonical statistic is not minimal (affinely dependent on X)");
}

CumulantValue cumulant(const ExponentialFamily& fam, const Eigen::VectorXd& theta) {
  if (theta.size() != fam.dimension()) throw DomainError("natural parameter has the wrong dimension");
  if (!theta.allFinite()) throw DomainError("natural parameter must be finite");
  const Eigen::MatrixXd& t = fam.statistic().values();
  const Eigen::VectorXd logits = t * theta + fam.base().log_mass();
  CumulantValue out;
  out.psi = log_sum_exp(logits);
  const Eigen::VectorXd w = (logits.array() - out.psi).unaryExpr([](double v) { return std::exp(v); });
  const Eigen::Index d = fam.dimension();
  out.grad.resize(d);
  Eigen::VectorXd scratch(w.size());
  for (Eigen::Index j = 0; j < d; ++j) {
    scratch = w.cwiseProduct(t.col(j));
    out.grad(j) = pairwise_sum(scratch);
  }
  out.hess.resize(d, d);
  const Eigen::MatrixXd centered = t.rowwise() - out.grad.transpose();
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a; b < d; ++b) {
      scratch = w.cwiseProduct(centered.col(a)).cwiseProduct(centered.col(b));
      out.hess(a, b) = out.hess(b, a) = pairwise_sum(scratch);
    }
  }
  return out;
}

Distribution member_from_natural(const ExponentialFamily& fam, const Eigen::VectorXd& theta) {
  const double psi = cumulant(fam, theta).psi;
  Eigen::VectorXd lm = fam.statistic().values() * theta + fam.base().log_mass();
  lm.array() -= psi;
  return Distribution(fam.space(), std::move(lm));
}

ParamPoint param_point(const ExponentialFamily& fam, const Eigen::VectorXd& theta) {
  const CumulantValue c = cumulant(fam, theta);
  return ParamPoint{theta, c.grad, c.psi};
}

// ---------------------------------------------------------------------------
// Hull geometry

namespace {

using Vec2 = Eigen::Vector2d;

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Counter-clockwise hull vertices; collinear points are dropped.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

HullPosition hull_position_1d(const Eigen::MatrixXd& t, double mu, double tol) {
  const double lo = t.col(0).minCoeff();
  const double hi = t.col(0).maxCoeff();
  HullPosition pos;
  if (mu < lo - tol || mu > hi + tol) {
    pos.kind = HullPosition::Kind::exterior;
    return pos;
  }
  for (double end : {lo, hi}) {
    if (std::abs(mu - end) <= tol) {
      Face face;
      for (Eigen::Index i = 0; i < t.rows(); ++i)
        if (std::abs(t(i, 0) - end) <= tol) face.active_points.push_back(static_cast<std::size_t>(i));
      face.face_mean = Eigen::VectorXd::Constant(1, end);
      pos.kind = HullPosition::Kind::boundary;
      pos.face = std::move(face);
      return pos;
    }
  }
  return pos;
}

HullPosition hull_position_2d(const Eigen::MatrixXd& t, const Vec2& mu, double tol) {
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(t.rows()));
  for (Eigen::Index i = 0; i < t.rows(); ++i) pts.emplace_back(t(i, 0), t(i, 1));
  const std::vector<Vec2> hull = convex_hull(pts);

  HullPosition pos;
  std::vector<std::size_t> near_edges;
  for (std::size_t e = 0; e < hull.size(); ++e) {
    const Vec2& a = hull[e];
    const Vec2& b = hull[(e + 1) % hull.size()];
    const double dist = cross(a, b, mu) / (b - a).norm();  // positive inside
    if (dist < -tol) {
      pos.kind = HullPosition::Kind::exterior;
      return pos;
    }
    if (dist <= tol) near_edges.push_back(e);
  }
  if (near_edges.empty()) return pos;

  Face face;
  for (const Vec2& v : hull) {
    if ((v - mu).norm() <= tol) {
      for (Eigen::Index i = 0; i < t.rows(); ++i)
        if ((pts[static_cast<std::size_t>(i)] - v).norm() <= tol) face.active_points.push_back(static_cast<std::size_t>(i));
      face.face_mean = v;
      pos.kind = HullPosition::Kind::boundary;
      pos.face = std::move(face);
      return pos;
    }
  }
  // Not at a vertex, so exactly one edge is within tolerance.
  const Vec2& a = hull[near_edges.front()];
  const Vec2& b = hull[(near_edges.front() + 1) % hull.size()];
  const Vec2 dir = (b - a).normalized();
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    const Vec2& p = pts[static_cast<std::size_t>(i)];
    if (std::abs(cross(a, b, p)) / (b - a).norm() <= tol) face.active_points.push_back(static_cast<std::size_t>(i));
  }
  const double along = std::clamp((mu - a).dot(dir), 0.0, (b - a).norm());
  face.face_mean = a + along * dir;
  pos.kind = HullPosition::Kind::boundary;
  pos.face = std::move(face);
  return pos;
}

double objective(const Eigen::VectorXd& theta, const Eigen::VectorXd& mu, double psi) {
  return theta.dot(mu) - psi;
}

// Bisection on the increasing map theta -> psi'(theta), d = 1 only.
std::optional<ParamPoint> solve_by_bisection(const ExponentialFamily& fam, double mu) {
  auto grad_at = [&](double th) { return cumulant(fam, Eigen::VectorXd::Constant(1, th)).grad(0); };
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 64 && grad_at(lo) > mu; ++i) lo *= 2.0;
  for (int i = 0; i < 64 && grad_at(hi) < mu; ++i) hi *= 2.0;
  if (grad_at(lo) > mu || grad_at(hi) < mu) return std::nullopt;
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    const ParamPoint p = param_point(fam, Eigen::VectorXd::Constant(1, mid));
    if (std::abs(p.mu(0) - mu) <= kDualityTolerance) return p;
    if (mid == lo || mid == hi) break;
    (p.mu(0) < mu ? lo : hi) = mid;
  }
  return std::nullopt;
}

}  // namespace

HullPosition hull_position(const ExponentialFamily& fam, const Eigen::VectorXd& mu, double tolerance) {
  if (mu.size() != fam.dimension()) throw DomainError("mean parameter has the wrong dimension");
  if (!mu.allFinite()) throw DomainError("mean parameter must be finite");
  switch (fam.dimension()) {
    case 1:
      return hull_position_1d(fam.statistic().values(), mu(0), tolerance);
    case 2:
      return hull_position_2d(fam.statistic().values(), Vec2(mu(0), mu(1)), tolerance);
    default:
      throw DomainError("hull geometry is implemented for d <= 2 only");
  }
}

ParamPoint natural_from_mean(const ExponentialFamily& fam, const Eigen::VectorXd& mu) {
  const HullPosition pos = hull_position(fam, mu);
  if (pos.kind == HullPosition::Kind::exterior) throw DomainError("mean lies outside the convex hull of T(X)");
  if (pos.kind == HullPosition::Kind::boundary)
    throw BoundaryError("mean lies on the boundary of the mean parameter space", *pos.face);

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(fam.dimension());
  CumulantValue c = cumulant(fam, theta);
  double value = objective(theta, mu, c.psi);
  double residual = (mu - c.grad).lpNorm<Eigen::Infinity>();
  for (int iter = 0; iter < kMaxNewtonIterations && residual > kDualityTolerance; ++iter) {
    const Eigen::VectorXd step = c.hess.ldlt().solve(mu - c.grad);
    bool accepted = false;
    for (double alpha = 1.0; alpha > 1e-18; alpha *= 0.5) {
      const Eigen::VectorXd candidate = theta + alpha * step;
      CumulantValue cc = cumulant(fam, candidate);
      const double cand_value = objective(candidate, mu, cc.psi);
      const double cand_residual = (mu - cc.grad).lpNorm<Eigen::Infinity>();
      // Near the optimum the objective is flat to rounding; a smaller
      // gradient is then the only usable signal.
      const bool flat = cand_value >= value - 1e-15 * std::max(1.0, std::abs(value));
      if (cand_value > value || (flat && cand_residual < residual)) {
        theta = candidate;
        c = std::move(cc);
        value = cand_value;
        residual = cand_residual;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (residual <= kDualityTolerance) return ParamPoint{theta, c.grad, c.psi};

  if (fam.dimension() == 1) {
    if (auto p = solve_by_bisection(fam, mu(0))) return *p;
  }
  std::ostringstream msg;
  msg << "natural_from_mean did not converge; final residual " << format_double(residual);
  throw ConvergenceError(msg.str(), residual);
}

Distribution extended_member_from_mean(const ExponentialFamily& fam, const Eigen::VectorXd& mu) {
  const HullPosition pos = hull_position(fam, mu);
  if (pos.kind == HullPosition::Kind::exterior) throw DomainError("mean lies outside the convex hull of T(X)");
  if (pos.interior()) return member_from_natural(fam, natural_from_mean(fam, mu).theta);

  // Restrict the base point to the face and re-express T in an orthonormal
  // basis of the face's affine hull, giving a minimal lower-dimensional family.
  const Face& face = *pos.face;
  const auto& active = face.active_points;
  const auto m = static_cast<Eigen::Index>(active.size());
  const Eigen::MatrixXd& t = fam.statistic().values();
  Eigen::MatrixXd local(m, fam.dimension());
  Eigen::VectorXd base_log(m);
  std::vector<std::string> labels;
  labels.reserve(active.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto point = static_cast<Eigen::Index>(active[static_cast<std::size_t>(i)]);
    local.row(i) = t.row(point);
    base_log(i) = fam.base().log_mass()(point);
    labels.push_back(fam.space()->label(active[static_cast<std::size_t>(i)]));
  }
  const Eigen::VectorXd origin = local.row(0).transpose();
  const Eigen::MatrixXd offsets = local.rowwise() - origin.transpose();

  Eigen::VectorXd face_probs;
  if (m == 1) {
    face_probs = Eigen::VectorXd::Ones(1);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(offsets, Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > kBoundaryTolerance * std::max(1.0, sv(0))) ++rank;
    if (rank == 0) {
      face_probs = (base_log.array() - log_sum_exp(base_log)).unaryExpr([](double v) { return std::exp(v); });
    } else {
      const Eigen::MatrixXd basis = svd.matrixV().leftCols(rank);
      const SpacePtr face_space = make_space(std::move(labels));
      ExponentialFamily face_family(Distribution::from_log_weights(face_space, base_log),
                                    Statistic(face_space, offsets * basis));
      const Eigen::VectorXd target = basis.transpose() * (face.face_mean - origin);
      face_probs = extended_member_from_mean(face_family, target).probabilities();
    }
  }
  Eigen::VectorXd lm = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(fam.space()->size()), -kInf);
  for (Eigen::Index i = 0; i < m; ++i)
    if (face_probs(i) > 0.0) lm(static_cast<Eigen::Index>(active[static_cast<std::size_t>(i)])) = std::log(face_probs(i));
  return Distribution::from_log_weights(fam.space(), lm);
}

Distribution project(const ExponentialFamily& fam, const Distribution& r) {
  require_same_space(fam.space(), r.space(), "project");
  const Eigen::VectorXd mu = mean_of_statistic(r, fam.statistic());
  try {
    return member_from_natural(fam, natural_from_mean(fam, mu).theta);
  } catch (const BoundaryError& e) {
    throw BoundaryError("projection undefined for a boundary mean; use extended_project", e.face());
  }
}

Distribution extended_project(const ExponentialFamily& fam, const Distribution& r) {
  require_same_space(fam.space(), r.space(), "extended_project");
  return extended_member_from_mean(fam, mean_of_statistic(r, fam.statistic()));
}

double bregman_divergence(const ExponentialFamily& fam, const ParamPoint& p1, const ParamPoint& p2) {
  if (p1.theta.size() != fam.dimension() || p2.theta.size() != fam.dimension())
    throw DomainError("parameter point dimension does not match the family");
  return std::max(0.0, p2.psi - p1.psi - (p2.theta - p1.theta).dot(p1.mu));
}

}  // namespace klrisk
