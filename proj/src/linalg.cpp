#include "ucert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ucert/error.hpp"

namespace ucert {

bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

UnitaryMatrix::UnitaryMatrix(ComplexMatrix m, double tolerance) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    std::ostringstream os;
    os << "unitary must be square and non-empty, got " << m_.rows() << "x" << m_.cols();
    throw ValidationError(os.str());
  }
  if (!all_finite(m_)) throw ValidationError("unitary has non-finite entries");
  const ComplexMatrix gram = m_.adjoint() * m_;
  const double dev = max_abs(gram - ComplexMatrix::Identity(m_.rows(), m_.cols()));
  if (dev > tolerance) {
    std::ostringstream os;
    os << "matrix is not unitary: ||U^dag U - I||_max = " << dev;
    throw ValidationError(os.str());
  }
}

UnitaryMatrix UnitaryMatrix::identity(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  return UnitaryMatrix(ComplexMatrix::Identity(n, n));
}

UnitaryMatrix UnitaryMatrix::adjoint() const {
  return UnitaryMatrix(m_.adjoint());
}

StateVector::StateVector(ComplexVector v, double tolerance) : v_(std::move(v)) {
  if (v_.size() == 0) throw ValidationError("state vector must be non-empty");
  if (!v_.allFinite()) throw ValidationError("state vector has non-finite entries");
  const double dev = std::abs(v_.norm() - 1.0);
  if (dev > tolerance) {
    std::ostringstream os;
    os << "state vector is not normalized: | ||v|| - 1 | = " << dev;
    throw ValidationError(os.str());
  }
}

StateVector StateVector::basis(std::size_t d, std::size_t index) {
  if (index >= d) throw ValidationError("basis index out of range");
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(d));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return StateVector(std::move(v));
}

double wrap_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(theta, two_pi);  // [-pi, pi]
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

EigenangleSet::EigenangleSet(std::vector<double> angles) : angles_(std::move(angles)) {
  for (double a : angles_) {
    if (!std::isfinite(a) || a <= -std::numbers::pi || a > std::numbers::pi) {
      std::ostringstream os;
      os << "eigenangle " << a << " outside (-pi, pi]";
      throw ValidationError(os.str());
    }
  }
}

std::vector<double> EigenangleSet::sorted() const {
  std::vector<double> out = angles_;
  std::stable_sort(out.begin(), out.end());
  return out;
}

SpectralDecomposition spectral_decomposition(const UnitaryMatrix& u) {
  Eigen::ComplexSchur<ComplexMatrix> schur(u.matrix(), /*computeU=*/true);
  if (schur.info() != Eigen::Success) throw ConvergenceError("complex Schur iteration failed", 0.0);
  const ComplexMatrix& t = schur.matrixT();
  std::vector<double> angles(static_cast<std::size_t>(t.rows()));
  for (Eigen::Index k = 0; k < t.rows(); ++k) {
    angles[static_cast<std::size_t>(k)] = wrap_angle(std::arg(t(k, k)));
  }
  return {EigenangleSet(std::move(angles)), UnitaryMatrix(schur.matrixU())};
}

EigenangleSet eigenangles(const UnitaryMatrix& u) {
  return spectral_decomposition(u).angles;
}

UnitaryMatrix unitary_from_spectrum(const EigenangleSet& angles, const UnitaryMatrix& basis) {
  if (angles.dim() != basis.dim()) {
    std::ostringstream os;
    os << "spectrum has " << angles.dim() << " angles but basis dimension is " << basis.dim();
    throw ValidationError(os.str());
  }
  ComplexVector phases(static_cast<Eigen::Index>(angles.dim()));
  for (std::size_t k = 0; k < angles.dim(); ++k) {
    phases(static_cast<Eigen::Index>(k)) = std::polar(1.0, angles.angles()[k]);
  }
  const ComplexMatrix& v = basis.matrix();
  return UnitaryMatrix(v * phases.asDiagonal() * v.adjoint());
}

double shortest_covering_arc(std::span<const double> angles) {
  if (angles.empty()) throw ValidationError("shortest_covering_arc needs at least one angle");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> a(angles.size());
  std::transform(angles.begin(), angles.end(), a.begin(),
                 [](double t) { return wrap_angle(t); });
  std::stable_sort(a.begin(), a.end());
  double largest_gap = a.front() + two_pi - a.back();
  for (std::size_t k = 1; k < a.size(); ++k) largest_gap = std::max(largest_gap, a[k] - a[k - 1]);
  const double arc = two_pi - largest_gap;
  return std::clamp(arc, 0.0, std::nextafter(two_pi, 0.0));
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

namespace {

void check_bipartite(const ComplexMatrix& m, std::size_t d, std::size_t d_anc) {
  const auto n = static_cast<Eigen::Index>(d * d_anc);
  if (d == 0 || d_anc == 0 || m.rows() != n || m.cols() != n) {
    std::ostringstream os;
    os << "matrix " << m.rows() << "x" << m.cols() << " does not factor as (" << d << "*" << d_anc
       << ") square";
    throw ValidationError(os.str());
  }
}

}  // namespace

ComplexMatrix partial_trace_system(const ComplexMatrix& m, std::size_t d, std::size_t d_anc) {
  check_bipartite(m, d, d_anc);
  const auto da = static_cast<Eigen::Index>(d_anc);
  ComplexMatrix out = ComplexMatrix::Zero(da, da);
  for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(d); ++s) {
    out += m.block(s * da, s * da, da, da);
  }
  return out;
}

ComplexMatrix partial_trace_ancilla(const ComplexMatrix& m, std::size_t d, std::size_t d_anc) {
  check_bipartite(m, d, d_anc);
  const auto ds = static_cast<Eigen::Index>(d);
  const auto da = static_cast<Eigen::Index>(d_anc);
  ComplexMatrix out(ds, ds);
  for (Eigen::Index i = 0; i < ds; ++i) {
    for (Eigen::Index j = 0; j < ds; ++j) out(i, j) = m.block(i * da, j * da, da, da).trace();
  }
  return out;
}

}  // namespace ucert
