#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ucert {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kUnitaryTolerance = 1e-10;
inline constexpr double kNormTolerance = 1e-10;

/// True when every entry is finite.
bool all_finite(const ComplexMatrix& m);

/// Max-entry norm ||m||_max.
double max_abs(const ComplexMatrix& m);

/// A square matrix with ||U^dagger U - I||_max within tolerance.
class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(ComplexMatrix m, double tolerance = kUnitaryTolerance);

  static UnitaryMatrix identity(std::size_t d);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  Complex trace() const { return m_.trace(); }
  UnitaryMatrix adjoint() const;

 private:
  ComplexMatrix m_;
};

/// A unit-norm pure state.
class StateVector {
 public:
  explicit StateVector(ComplexVector v, double tolerance = kNormTolerance);

  /// Computational basis state |index>.
  static StateVector basis(std::size_t d, std::size_t index);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(v_.size()); }
  const ComplexVector& amplitudes() const noexcept { return v_; }
  Complex operator[](std::size_t i) const { return v_(static_cast<Eigen::Index>(i)); }

 private:
  ComplexVector v_;
};

/// Eigenangles of a unitary, each in (-pi, pi].
class EigenangleSet {
 public:
  explicit EigenangleSet(std::vector<double> angles);

  std::size_t dim() const noexcept { return angles_.size(); }
  const std::vector<double>& angles() const noexcept { return angles_; }
  std::vector<double> sorted() const;

 private:
  std::vector<double> angles_;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

EigenangleSet eigenangles(const UnitaryMatrix& u);

/// basis * diag(e^{i theta}) * basis^dagger
UnitaryMatrix unitary_from_spectrum(const EigenangleSet& angles, const UnitaryMatrix& basis);

/// Length of the shortest arc of the unit circle containing every angle:
/// 2 pi minus the largest circular gap.
double shortest_covering_arc(std::span<const double> angles);
inline double shortest_covering_arc(const EigenangleSet& a) {
  return shortest_covering_arc(std::span<const double>(a.angles()));
}

/// Kronecker product, first factor is the outer (slow) index.
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

/// tr_S of a (d*d_anc) square matrix in system (x) ancilla order.
ComplexMatrix partial_trace_system(const ComplexMatrix& m, std::size_t d, std::size_t d_anc);

/// tr_A of a (d*d_anc) square matrix in system (x) ancilla order.
ComplexMatrix partial_trace_ancilla(const ComplexMatrix& m, std::size_t d, std::size_t d_anc);

}  // namespace ucert

namespace ucert {

/// Spectral decomposition U = basis * diag(e^{i angles}) * basis^dagger.
struct SpectralDecomposition {
  EigenangleSet angles;
  UnitaryMatrix basis;
};

/// Complex Schur form of a normal matrix; the Schur vectors form the basis.
SpectralDecomposition spectral_decomposition(const UnitaryMatrix& u);

}  // namespace ucert
