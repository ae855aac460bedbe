#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mmot/measure.hpp"
#include "mmot/prefs.hpp"

namespace mmot {

/// Axis-aligned box in R^n.
struct Box {
  Vector lo;
  Vector hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vector& x, double margin = 0.0) const {
    return ((x - lo).array() >= margin).all() &&
           ((hi - x).array() >= margin).all();
  }
  Vector center() const { return 0.5 * (lo + hi); }
};

/// Isotropic box of 3x the largest extent of the given points, centered on
/// their bounding box. Degenerate extents are padded so the box stays full
/// dimensional.
Box default_z_box(const std::vector<Vector>& points);

struct NewtonSettings {
  int max_iter = 100;
  double grad_tol = 1e-10;
  // all multistart runs must land within this distance of each other
  double multistart_agreement = 1e-7;
};

struct NewtonOutcome {
  bool converged = false;
  Vector z;
  double value = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
};

/// Damped Newton ascent with Armijo backtracking for a concave objective.
/// Accepts only non-decreasing steps; converges when the gradient norm
/// falls below settings.grad_tol.
NewtonOutcome newton_maximize(const std::function<double(const Vector&)>& value,
                              const std::function<Vector(const Vector&)>& grad,
                              const std::function<Matrix(const Vector&)>& hess,
                              Vector z0, const NewtonSettings& settings);

enum class ZbarStatus {
  Ok,
  NoConvergence,        // every start failed the gradient tolerance
  MultistartDisagree,   // distinct maximizer candidates
  CurvatureNotNegative  // hessian at the best candidate not negative definite
};

struct ZbarResult {
  ZbarStatus status = ZbarStatus::Ok;
  Vector z;                       // best candidate found
  double objective = 0.0;         // sum_i f_i(x_i, z)
  double grad_norm = 0.0;         // residual at z
  double multistart_spread = 0.0; // max pairwise distance among converged runs
  int starts = 0;
  int converged_starts = 0;
  int newton_iters = 0;           // total across starts
  bool boundary_hit = false;      // z on or outside the search box (warning)
  double hess_max_eig = 0.0;      // largest eigenvalue of B(z)
};

/// Common surface of anything that can price a tuple: the hp-form oracle
/// and the direct bilinear example below. Indices i, j are 0-based.
class Surplus {
 public:
  virtual ~Surplus() = default;
  virtual int arity() const = 0;  // m
  virtual int dim() const = 0;    // n
  virtual double value(std::span<const Vector> xs) const = 0;
  /// D^2_{x_i x_j} b, any i, j (including i == j).
  virtual Matrix cross_hessian(int i, int j,
                               std::span<const Vector> xs) const = 0;
};

/// The tuple (f_1, ..., f_m) with the inner maximization over contracts.
///
/// b(x_1,...,x_m) = max_z sum_i f_i(x_i, z). The maximizer is found by
/// damped Newton with Armijo backtracking from a 3^n grid over the search
/// box plus the coordinate mean of the x_i; strict concavity of the
/// builtins makes every start land on the same point, which is checked.
class SurplusOracle : public Surplus {
 public:
  SurplusOracle(std::vector<PrefPtr> prefs, Box z_box,
                NewtonSettings newton = {});

  int arity() const override { return static_cast<int>(prefs_.size()); }
  int dim() const override { return dim_; }
  const std::vector<PrefPtr>& prefs() const { return prefs_; }
  const Box& z_box() const { return z_box_; }
  const NewtonSettings& newton() const { return newton_; }

  /// Never throws; inspect status.
  ZbarResult solve_zbar_detailed(std::span<const Vector> xs) const;

  /// Throws SolverError unless status == Ok.
  ZbarResult solve_zbar(std::span<const Vector> xs) const;

  /// b at the tuple.
  double value(std::span<const Vector> xs) const override;

  /// D_{x_i} b = D_{x_i} f_i(x_i, zbar): the envelope formula.
  Vector grad_b(std::span<const Vector> xs, int i) const;

  /// D_{x_i} zbar = -B^{-1} D^2_{z x_i} f_i.
  Matrix jac_zbar(std::span<const Vector> xs, int i) const;

  /// D^2_{x_i x_j} b = -D^2_{x_i z} f_i B^{-1} D^2_{z x_j} f_j, i != j.
  Matrix hess_b_cross(std::span<const Vector> xs, int i, int j) const;

  /// -D^2_{x_i z} f_i B^{-1} D^2_{z x_j} f_j for any pair. Equals the full
  /// cross Hessian off the diagonal; on it, the part mediated by the moving
  /// maximizer. The diagonal is positive definite whenever B is negative
  /// definite and f_i is non-degenerate.
  Matrix indirect_hessian(std::span<const Vector> xs, int i, int j) const;

  /// sum_i D^2_{zz} f_i(x_i, zbar), symmetric and negative definite at an
  /// accepted maximizer. The sorted eigenvalues are written to
  /// *eigenvalues when given.
  Matrix B_matrix(std::span<const Vector> xs,
                  Vector* eigenvalues = nullptr) const;

  Matrix cross_hessian(int i, int j, std::span<const Vector> xs) const override;

 private:
  struct Inner;  // derivative blocks at a solved zbar
  Inner inner_at(std::span<const Vector> xs) const;

  std::vector<PrefPtr> prefs_;
  Box z_box_;
  NewtonSettings newton_;
  int dim_;
};

/// b(x1,x2,x3) = x1.x2 + x1.x3 + x2^T A x3 with A positive definite and
/// not symmetric. Not of the sup form; serves as the contrast case for the
/// symmetry obstruction.
class BilinearSurplus : public Surplus {
 public:
  explicit BilinearSurplus(Matrix a);

  int arity() const override { return 3; }
  int dim() const override { return static_cast<int>(a_.rows()); }
  const Matrix& A() const { return a_; }

  double value(std::span<const Vector> xs) const override;
  Matrix cross_hessian(int i, int j, std::span<const Vector> xs) const override;

 private:
  Matrix a_;
};

/// S = D^2_{x2 x3} b . [D^2_{x1 x3} b]^{-1} . D^2_{x1 x2} b for a
/// three-marginal surplus. Symmetric for sup-form oracles, equal to A for
/// the bilinear surplus. Throws SolverError on a singular middle factor.
Matrix symmetry_product(const Surplus& s, const Vector& x1, const Vector& x2,
                        const Vector& x3);

/// T = -[D^2_{x2 z} f2 B^{-1} D^2_{z x2} f2](x2, zbar)
///     + D^2_{x2 x2} f2(x2, zbar) - D^2_{x2 x2} f2(x2, zbar~)
/// with zbar = zbar(x1,x2,x3) and zbar~ = zbar(x1t,x2,x3t). Symmetric.
Matrix condition_iii_matrix(const SurplusOracle& oracle, const Vector& x1,
                            const Vector& x2, const Vector& x3,
                            const Vector& x1t, const Vector& x3t);

}  // namespace mmot
