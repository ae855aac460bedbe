#include "mmot/prefs.hpp"

#include <Eigen/Eigenvalues>

#include "mmot/errors.hpp"

namespace mmot {

HeinichPreference::HeinichPreference(Matrix q) : q_(std::move(q)) {
  if (q_.rows() != q_.cols() || q_.rows() < 1)
    throw ValidationError("Q must be square");
  if ((q_ - q_.transpose()).norm() > 1e-12 * (1.0 + q_.norm()))
    throw ValidationError("Q must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(q_);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw ValidationError("Q must be positive definite");
  qinv_ = q_.inverse();
}

ConcaveSumPreference::ConcaveSumPreference(int dim, double quad, double soft)
    : dim_(dim), a_(quad), b_(soft) {
  if (!(a_ > 0.0) || b_ < 0.0)
    throw ValidationError("concave_sum needs quad > 0 and soft >= 0");
}

PrefPtr make_quadratic(int dim) {
  return std::make_shared<QuadraticPreference>(dim);
}
PrefPtr make_linear(int dim) { return std::make_shared<LinearPreference>(dim); }
PrefPtr make_heinich(Matrix q) {
  return std::make_shared<HeinichPreference>(std::move(q));
}
PrefPtr make_brenier(int dim) {
  return std::make_shared<BrenierPreference>(dim);
}
PrefPtr make_concave_sum(int dim, double quad, double soft) {
  return std::make_shared<ConcaveSumPreference>(dim, quad, soft);
}

}  // namespace mmot
