#pragma once

// Exponential families on a finite sample space.
//
// A family is fixed by a full-support base point p0 and a canonical statistic
// T in R^d; its members are p_theta(x) = p0(x) exp(theta'T(x) - psi(theta)).
// The mean map theta -> grad psi(theta) = E_theta T is inverted by damped
// Newton ascent on the concave dual objective theta'mu - psi(theta). Means on
// the boundary of the convex hull of T(X) have no natural parameter; they are
// realized by restricting the family to the face of the hull that contains
// them (down to point masses at vertices).

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "klrisk/measure.hpp"

namespace klrisk {

/// Hull membership tolerance; means this close to a face are boundary means.
inline constexpr double kBoundaryTolerance = 1e-9;
/// Required ||grad psi(theta) - mu||_inf for a solved natural parameter.
inline constexpr double kDualityTolerance = 1e-11;
inline constexpr int kMaxNewtonIterations = 200;

class ExponentialFamily {
 public:
  /// Validates full support of `base`, a shared sample space, and a minimal
  /// representation (T and the constant affinely independent, d <= |X| - 1).
  ExponentialFamily(Distribution base, Statistic t);

  const SpacePtr& space() const noexcept { return base_.space(); }
  const Distribution& base() const noexcept { return base_; }
  const Statistic& statistic() const noexcept { return t_; }
  Eigen::Index dimension() const noexcept { return t_.dimension(); }

 private:
  Distribution base_;
  Statistic t_;
};

/// One member in paired coordinates.
struct ParamPoint {
  Eigen::VectorXd theta;
  Eigen::VectorXd mu;
  double psi = 0.0;
};

struct CumulantValue {
  double psi = 0.0;
  Eigen::VectorXd grad;  // E_theta T
  Eigen::MatrixXd hess;  // Cov_theta T
};

/// A proper face of conv T(X) holding a boundary mean.
struct Face {
  std::vector<std::size_t> active_points;  // sample points with T on the face
  Eigen::VectorXd face_mean;               // the mean, snapped onto the face
};

struct HullPosition {
  enum class Kind { interior, boundary, exterior };
  Kind kind = Kind::interior;
  std::optional<Face> face;  // set iff kind == boundary

  bool interior() const noexcept { return kind == Kind::interior; }
};

/// Raised when a mean has no natural parameter because it sits on a face.
class BoundaryError : public DomainError {
 public:
  BoundaryError(const std::string& what, Face face) : DomainError(what), face_(std::move(face)) {}
  const Face& face() const noexcept { return face_; }

 private:
  Face face_;
};

CumulantValue cumulant(const ExponentialFamily& fam, const Eigen::VectorXd& theta);

Distribution member_from_natural(const ExponentialFamily& fam, const Eigen::VectorXd& theta);

ParamPoint param_point(const ExponentialFamily& fam, const Eigen::VectorXd& theta);

/// Interior / boundary (with the minimal face) / exterior of conv T(X).
/// Supports d <= 2.
HullPosition hull_position(const ExponentialFamily& fam, const Eigen::VectorXd& mu,
                           double tolerance = kBoundaryTolerance);

/// Solves grad psi(theta) = mu for an interior mean. Throws BoundaryError
/// for boundary means, DomainError for exterior ones and ConvergenceError
/// when the solver fails.
ParamPoint natural_from_mean(const ExponentialFamily& fam, const Eigen::VectorXd& mu);

/// The member (or face-restricted limit) whose canonical mean is mu.
/// Interior means give ordinary members; vertex means give point masses.
Distribution extended_member_from_mean(const ExponentialFamily& fam, const Eigen::VectorXd& mu);

/// KL projection argmin_P D(r, P); requires an interior canonical mean.
Distribution project(const ExponentialFamily& fam, const Distribution& r);

/// Projection extended to the closure of the family.
Distribution extended_project(const ExponentialFamily& fam, const Distribution& r);

/// D(P1, P2) = psi(theta2) - psi(theta1) - (theta2 - theta1)'mu1.
double bregman_divergence(const ExponentialFamily& fam, const ParamPoint& p1, const ParamPoint& p2);

}  // namespace klrisk
