#include "mmot/surplus.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "mmot/errors.hpp"

namespace mmot {

Box default_z_box(const std::vector<Vector>& points) {
  if (points.empty()) throw ValidationError("no points for search box");
  Vector lo = points.front();
  Vector hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vector c = 0.5 * (lo + hi);
  double extent = (hi - lo).maxCoeff();
  if (extent <= 0.0) extent = 1.0;  // all points coincide
  const double half = 1.5 * extent;
  Box box;
  box.lo = c.array() - half;
  box.hi = c.array() + half;
  return box;
}

SurplusOracle::SurplusOracle(std::vector<PrefPtr> prefs, Box z_box,
                             NewtonSettings newton)
    : prefs_(std::move(prefs)), z_box_(std::move(z_box)), newton_(newton) {
  if (prefs_.size() < 2) throw ValidationError("oracle needs m >= 2");
  dim_ = prefs_.front()->dim();
  for (const auto& p : prefs_)
    if (p->dim() != dim_)
      throw ValidationError("preference dimensions disagree");
  if (z_box_.dim() != dim_) throw ValidationError("z box dimension mismatch");
  if ((z_box_.hi - z_box_.lo).minCoeff() <= 0.0)
    throw ValidationError("empty z box");
}

namespace {

void check_tuple(std::span<const Vector> xs, int m, int n) {
  if (static_cast<int>(xs.size()) != m)
    throw ValidationError("tuple arity mismatch");
  for (const auto& x : xs)
    if (static_cast<int>(x.size()) != n)
      throw ValidationError("tuple dimension mismatch");
}

}  // namespace

NewtonOutcome newton_maximize(const std::function<double(const Vector&)>& value,
                              const std::function<Vector(const Vector&)>& grad,
                              const std::function<Matrix(const Vector&)>& hess,
                              Vector z0, const NewtonSettings& settings) {
  NewtonOutcome run;
  Vector z = std::move(z0);
  double fz = value(z);
  for (int it = 0; it < settings.max_iter; ++it) {
    ++run.iters;
    const Vector g = grad(z);
    run.grad_norm = g.norm();
    if (run.grad_norm <= settings.grad_tol) break;
    const Matrix h = hess(z);
    Vector dir;
    Eigen::LDLT<Matrix> ldlt(-h);  // -h positive definite when concave
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      dir = ldlt.solve(g);
    } else {
      dir = g / (1.0 + run.grad_norm);  // fall back to steepest ascent
    }
    const double slope = g.dot(dir);
    if (slope <= 0.0) break;  // not an ascent direction, give up
    double t = 1.0;
    bool stepped = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vector zt = z + t * dir;
      const double ft = value(zt);
      if (ft >= fz + 1e-4 * t * slope) {
        z = zt;
        fz = ft;
        stepped = true;
        break;
      }
      t *= 0.5;
    }
    if (!stepped) break;  // no progress possible at this scale
  }
  run.grad_norm = grad(z).norm();
  run.converged = run.grad_norm <= settings.grad_tol;
  run.z = std::move(z);
  run.value = fz;
  return run;
}

ZbarResult SurplusOracle::solve_zbar_detailed(std::span<const Vector> xs) const {
  check_tuple(xs, arity(), dim_);
  const int n = dim_;
  const int m = arity();

  auto objective = [&](const Vector& z) {
    double v = 0.0;
    for (int i = 0; i < m; ++i) v += prefs_[i]->value(xs[i], z);
    return v;
  };
  auto gradient = [&](const Vector& z) {
    Vector g = Vector::Zero(n);
    for (int i = 0; i < m; ++i) g += prefs_[i]->grad_z(xs[i], z);
    return g;
  };
  auto hessian = [&](const Vector& z) {
    Matrix h = Matrix::Zero(n, n);
    for (int i = 0; i < m; ++i) h += prefs_[i]->hess_zz(xs[i], z);
    return h;
  };

  // starts: 3^n grid over the search box plus the coordinate mean
  std::vector<Vector> starts;
  {
    const long grid = static_cast<long>(std::pow(3.0, n));
    for (long g = 0; g < grid; ++g) {
      Vector z(n);
      long rest = g;
      for (int d = 0; d < n; ++d) {
        const int digit = static_cast<int>(rest % 3);
        rest /= 3;
        const double lo = z_box_.lo[d];
        const double hi = z_box_.hi[d];
        z[d] = digit == 0 ? lo : (digit == 1 ? 0.5 * (lo + hi) : hi);
      }
      starts.push_back(std::move(z));
    }
    Vector mean = Vector::Zero(n);
    for (const auto& x : xs) mean += x;
    starts.push_back(mean / static_cast<double>(m));
  }

  ZbarResult out;
  out.starts = static_cast<int>(starts.size());

  std::vector<NewtonOutcome> runs;
  for (const auto& z0 : starts) {
    runs.push_back(newton_maximize(objective, gradient, hessian, z0, newton_));
    out.newton_iters += runs.back().iters;
  }

  const NewtonOutcome* best = nullptr;
  for (const auto& run : runs) {
    if (!run.converged) continue;
    ++out.converged_starts;
    if (!best || run.value > best->value) best = &run;
  }
  if (!best) {
    out.status = ZbarStatus::NoConvergence;
    double least = std::numeric_limits<double>::infinity();
    for (const auto& run : runs) {
      if (run.grad_norm < least) {
        least = run.grad_norm;
        out.z = run.z;
        out.objective = run.value;
        out.grad_norm = run.grad_norm;
      }
    }
    return out;
  }

  for (const auto& a : runs) {
    if (!a.converged) continue;
    const double d = (a.z - best->z).norm();
    out.multistart_spread = std::max(out.multistart_spread, d);
  }

  out.z = best->z;
  out.objective = best->value;
  out.grad_norm = best->grad_norm;
  out.boundary_hit = !z_box_.contains(out.z, 1e-9);

  Eigen::SelfAdjointEigenSolver<Matrix> es(hessian(out.z));
  out.hess_max_eig = es.eigenvalues().maxCoeff();

  if (out.multistart_spread > newton_.multistart_agreement) {
    out.status = ZbarStatus::MultistartDisagree;
  } else if (out.hess_max_eig >= 0.0) {
    out.status = ZbarStatus::CurvatureNotNegative;
  }
  return out;
}

ZbarResult SurplusOracle::solve_zbar(std::span<const Vector> xs) const {
  ZbarResult r = solve_zbar_detailed(xs);
  switch (r.status) {
    case ZbarStatus::Ok:
      return r;
    case ZbarStatus::NoConvergence:
      throw SolverError("inner maximization did not converge (residual " +
                        std::to_string(r.grad_norm) + ")");
    case ZbarStatus::MultistartDisagree: {
      std::ostringstream os;
      os << "inner maximizer not unique: multistart spread "
         << r.multistart_spread;
      throw SolverError(os.str());
    }
    case ZbarStatus::CurvatureNotNegative:
      throw SolverError("curvature at the inner maximizer is not negative "
                        "definite (max eigenvalue " +
                        std::to_string(r.hess_max_eig) + ")");
  }
  throw InternalError("unreachable");
}

double SurplusOracle::value(std::span<const Vector> xs) const {
  return solve_zbar(xs).objective;
}

struct SurplusOracle::Inner {
  Vector z;
  Matrix b;      // sum of zz blocks at z
  Matrix b_inv;  // cached inverse (n is small)
};

SurplusOracle::Inner SurplusOracle::inner_at(std::span<const Vector> xs) const {
  ZbarResult r = solve_zbar(xs);
  Inner in;
  in.z = std::move(r.z);
  in.b = Matrix::Zero(dim_, dim_);
  for (int i = 0; i < arity(); ++i)
    in.b += prefs_[i]->hess_zz(xs[i], in.z);
  in.b_inv = in.b.inverse();
  return in;
}

Vector SurplusOracle::grad_b(std::span<const Vector> xs, int i) const {
  if (i < 0 || i >= arity()) throw ValidationError("marginal index out of range");
  const ZbarResult r = solve_zbar(xs);
  return prefs_[i]->grad_x(xs[i], r.z);
}

Matrix SurplusOracle::jac_zbar(std::span<const Vector> xs, int i) const {
  if (i < 0 || i >= arity()) throw ValidationError("marginal index out of range");
  const Inner in = inner_at(xs);
  const Matrix zx = prefs_[i]->hess_xz(xs[i], in.z).transpose();
  return -in.b_inv * zx;
}

Matrix SurplusOracle::indirect_hessian(std::span<const Vector> xs, int i,
                                       int j) const {
  if (i < 0 || i >= arity() || j < 0 || j >= arity())
    throw ValidationError("marginal index out of range");
  const Inner in = inner_at(xs);
  const Matrix xz_i = prefs_[i]->hess_xz(xs[i], in.z);
  const Matrix zx_j = prefs_[j]->hess_xz(xs[j], in.z).transpose();
  return -xz_i * in.b_inv * zx_j;
}

Matrix SurplusOracle::hess_b_cross(std::span<const Vector> xs, int i,
                                   int j) const {
  if (i == j)
    throw ValidationError("cross Hessian needs distinct marginal indices");
  return indirect_hessian(xs, i, j);
}

Matrix SurplusOracle::B_matrix(std::span<const Vector> xs,
                               Vector* eigenvalues) const {
  const Inner in = inner_at(xs);
  // symmetrize away roundoff so callers can rely on exact symmetry
  const Matrix b = 0.5 * (in.b + in.b.transpose());
  if (eigenvalues) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(b);
    *eigenvalues = es.eigenvalues();
  }
  return b;
}

Matrix SurplusOracle::cross_hessian(int i, int j,
                                    std::span<const Vector> xs) const {
  if (i != j) return indirect_hessian(xs, i, j);
  const Inner in = inner_at(xs);
  const Matrix xz = prefs_[i]->hess_xz(xs[i], in.z);
  return prefs_[i]->hess_xx(xs[i], in.z) - xz * in.b_inv * xz.transpose();
}

BilinearSurplus::BilinearSurplus(Matrix a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols() || a_.rows() < 1)
    throw ValidationError("A must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a_ + a_.transpose()));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw ValidationError("symmetric part of A must be positive definite");
  if ((a_ - a_.transpose()).norm() == 0.0)
    throw ValidationError("A must not be symmetric");
}

double BilinearSurplus::value(std::span<const Vector> xs) const {
  check_tuple(xs, 3, dim());
  return xs[0].dot(xs[1]) + xs[0].dot(xs[2]) + xs[1].dot(a_ * xs[2]);
}

Matrix BilinearSurplus::cross_hessian(int i, int j,
                                      std::span<const Vector> xs) const {
  check_tuple(xs, 3, dim());
  if (i < 0 || i > 2 || j < 0 || j > 2)
    throw ValidationError("marginal index out of range");
  const int n = dim();
  if (i == j) return Matrix::Zero(n, n);
  const int a = std::min(i, j);
  Matrix block;
  if (a == 0) {
    block = Matrix::Identity(n, n);  // x1.x2 and x1.x3 terms
  } else {
    block = a_;  // x2^T A x3
  }
  // block holds d^2 b / dx_a dx_b for a < b; transpose for the other order
  return i == a ? block : Matrix(block.transpose());
}

Matrix symmetry_product(const Surplus& s, const Vector& x1, const Vector& x2,
                        const Vector& x3) {
  if (s.arity() != 3)
    throw ValidationError("symmetry product needs a three-marginal surplus");
  const std::vector<Vector> xs = {x1, x2, x3};
  const Matrix c23 = s.cross_hessian(1, 2, xs);
  const Matrix c13 = s.cross_hessian(0, 2, xs);
  const Matrix c12 = s.cross_hessian(0, 1, xs);
  Eigen::FullPivLU<Matrix> lu(c13);
  if (!lu.isInvertible())
    throw SolverError("singular middle factor in symmetry product");
  return c23 * lu.solve(c12);
}

Matrix condition_iii_matrix(const SurplusOracle& oracle, const Vector& x1,
                            const Vector& x2, const Vector& x3,
                            const Vector& x1t, const Vector& x3t) {
  if (oracle.arity() != 3)
    throw ValidationError("condition III is defined for m = 3");
  const std::vector<Vector> base = {x1, x2, x3};
  const std::vector<Vector> tilted = {x1t, x2, x3t};
  const Vector zbar = oracle.solve_zbar(base).z;
  const Vector zbar_t = oracle.solve_zbar(tilted).z;
  const auto& f2 = *oracle.prefs()[1];
  const Matrix t = oracle.indirect_hessian(base, 1, 1) +
                   f2.hess_xx(x2, zbar) - f2.hess_xx(x2, zbar_t);
  return 0.5 * (t + t.transpose());
}

}  // namespace mmot
