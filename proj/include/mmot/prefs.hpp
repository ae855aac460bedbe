#pragma once

#include <memory>
#include <string>

#include "mmot/measure.hpp"

namespace mmot {

/// Payoff f(x, z) of an agent of type x signing contract z, with analytic
/// first and second derivative blocks. Blocks follow the convention
/// hess_xz(x,z)[a][b] = d^2 f / dx_a dz_b, so hess_zx = hess_xz^T.
class PreferenceFunction {
 public:
  virtual ~PreferenceFunction() = default;

  virtual int dim() const = 0;
  virtual std::string kind() const = 0;

  virtual double value(const Vector& x, const Vector& z) const = 0;
  virtual Vector grad_x(const Vector& x, const Vector& z) const = 0;
  virtual Vector grad_z(const Vector& x, const Vector& z) const = 0;
  virtual Matrix hess_xz(const Vector& x, const Vector& z) const = 0;
  virtual Matrix hess_zz(const Vector& x, const Vector& z) const = 0;
  virtual Matrix hess_xx(const Vector& x, const Vector& z) const = 0;
};

using PrefPtr = std::shared_ptr<const PreferenceFunction>;

/// f(x,z) = -|x-z|^2.
class QuadraticPreference final : public PreferenceFunction {
 public:
  explicit QuadraticPreference(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  std::string kind() const override { return "quadratic"; }
  double value(const Vector& x, const Vector& z) const override {
    return -(x - z).squaredNorm();
  }
  Vector grad_x(const Vector& x, const Vector& z) const override {
    return -2.0 * (x - z);
  }
  Vector grad_z(const Vector& x, const Vector& z) const override {
    return 2.0 * (x - z);
  }
  Matrix hess_xz(const Vector&, const Vector&) const override {
    return 2.0 * Matrix::Identity(dim_, dim_);
  }
  Matrix hess_zz(const Vector&, const Vector&) const override {
    return -2.0 * Matrix::Identity(dim_, dim_);
  }
  Matrix hess_xx(const Vector&, const Vector&) const override {
    return -2.0 * Matrix::Identity(dim_, dim_);
  }

 private:
  int dim_;
};

/// f(x,z) = x . z. Flat in z, so only usable next to a strictly concave
/// head (see HeinichPreference).
class LinearPreference final : public PreferenceFunction {
 public:
  explicit LinearPreference(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  std::string kind() const override { return "linear"; }
  double value(const Vector& x, const Vector& z) const override {
    return x.dot(z);
  }
  Vector grad_x(const Vector&, const Vector& z) const override { return z; }
  Vector grad_z(const Vector& x, const Vector&) const override { return x; }
  Matrix hess_xz(const Vector&, const Vector&) const override {
    return Matrix::Identity(dim_, dim_);
  }
  Matrix hess_zz(const Vector&, const Vector&) const override {
    return Matrix::Zero(dim_, dim_);
  }
  Matrix hess_xx(const Vector&, const Vector&) const override {
    return Matrix::Zero(dim_, dim_);
  }

 private:
  int dim_;
};

/// f(x,z) = x . z - h*(z) for h(s) = s^T Q s with Q symmetric positive
/// definite; the conjugate is exact: h*(z) = z^T Q^{-1} z / 4.
///
/// Pairing one of these with LinearPreference factors on the remaining
/// coordinates makes the surplus equal to h(sum of the x_i).
class HeinichPreference final : public PreferenceFunction {
 public:
  explicit HeinichPreference(Matrix q);
  int dim() const override { return static_cast<int>(q_.rows()); }
  std::string kind() const override { return "heinich"; }
  const Matrix& Q() const { return q_; }
  double value(const Vector& x, const Vector& z) const override {
    return x.dot(z) - 0.25 * z.dot(qinv_ * z);
  }
  Vector grad_x(const Vector&, const Vector& z) const override { return z; }
  Vector grad_z(const Vector& x, const Vector& z) const override {
    return x - 0.5 * (qinv_ * z);
  }
  Matrix hess_xz(const Vector&, const Vector&) const override {
    return Matrix::Identity(dim(), dim());
  }
  Matrix hess_zz(const Vector&, const Vector&) const override {
    return -0.5 * qinv_;
  }
  Matrix hess_xx(const Vector&, const Vector&) const override {
    return Matrix::Zero(dim(), dim());
  }

 private:
  Matrix q_;
  Matrix qinv_;
};

/// f(x,z) = -sqrt(1 + |x+z|^2).
class BrenierPreference final : public PreferenceFunction {
 public:
  explicit BrenierPreference(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  std::string kind() const override { return "brenier"; }
  double value(const Vector& x, const Vector& z) const override {
    return -std::sqrt(1.0 + (x + z).squaredNorm());
  }
  Vector grad_x(const Vector& x, const Vector& z) const override {
    return dh(x + z);
  }
  Vector grad_z(const Vector& x, const Vector& z) const override {
    return dh(x + z);
  }
  Matrix hess_xz(const Vector& x, const Vector& z) const override {
    return d2h(x + z);
  }
  Matrix hess_zz(const Vector& x, const Vector& z) const override {
    return d2h(x + z);
  }
  Matrix hess_xx(const Vector& x, const Vector& z) const override {
    return d2h(x + z);
  }

  static Vector dh(const Vector& y) {
    return -y / std::sqrt(1.0 + y.squaredNorm());
  }
  static Matrix d2h(const Vector& y) {
    const double s2 = 1.0 + y.squaredNorm();
    const double s = std::sqrt(s2);
    const int n = static_cast<int>(y.size());
    return (y * y.transpose() / s2 - Matrix::Identity(n, n)) / s;
  }

 private:
  int dim_;
};

/// f(x,z) = h(x+z) with h(y) = -a |y|^2 - b sqrt(1+|y|^2), a > 0, b >= 0.
/// Uniformly concave with concavity constant at least 2a, and h -> -inf.
class ConcaveSumPreference final : public PreferenceFunction {
 public:
  ConcaveSumPreference(int dim, double quad = 0.5, double soft = 1.0);
  int dim() const override { return dim_; }
  std::string kind() const override { return "concave_sum"; }
  double quad() const { return a_; }
  double soft() const { return b_; }
  double value(const Vector& x, const Vector& z) const override {
    const Vector y = x + z;
    return -a_ * y.squaredNorm() - b_ * std::sqrt(1.0 + y.squaredNorm());
  }
  Vector grad_x(const Vector& x, const Vector& z) const override {
    return dh(x + z);
  }
  Vector grad_z(const Vector& x, const Vector& z) const override {
    return dh(x + z);
  }
  Matrix hess_xz(const Vector& x, const Vector& z) const override {
    return d2h(x + z);
  }
  Matrix hess_zz(const Vector& x, const Vector& z) const override {
    return d2h(x + z);
  }
  Matrix hess_xx(const Vector& x, const Vector& z) const override {
    return d2h(x + z);
  }

 private:
  Vector dh(const Vector& y) const {
    return -2.0 * a_ * y + b_ * BrenierPreference::dh(y);
  }
  Matrix d2h(const Vector& y) const {
    return -2.0 * a_ * Matrix::Identity(dim_, dim_) +
           b_ * BrenierPreference::d2h(y);
  }

  int dim_;
  double a_;
  double b_;
};

PrefPtr make_quadratic(int dim);
PrefPtr make_linear(int dim);
PrefPtr make_heinich(Matrix q);
PrefPtr make_brenier(int dim);
PrefPtr make_concave_sum(int dim, double quad = 0.5, double soft = 1.0);

}  // namespace mmot
