#pragma once

// Small dense matrices (d <= 4), singular values and the singular value
// function alpha^t.

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "affdim/error.hpp"

namespace affdim {

inline constexpr int kMaxDim = 4;

/// Row-major d x d real matrix with inline storage.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int d);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(int d);
  static Matrix diagonal(std::span<const double> entries);
  static Matrix diagonal(std::initializer_list<double> entries);
  /// 2x2 rotation by `angle` radians, scaled by `scale`.
  static Matrix rotation(double angle, double scale = 1.0);

  int dim() const noexcept { return d_; }
  double& operator()(int r, int c) { return a_[static_cast<std::size_t>(r * kMaxDim + c)]; }
  double operator()(int r, int c) const { return a_[static_cast<std::size_t>(r * kMaxDim + c)]; }

  Matrix transpose() const;
  double determinant() const;
  bool finite() const;
  Matrix& operator*=(double s);

  /// y = A x
  void apply(std::span<const double> x, std::span<double> y) const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend bool operator==(const Matrix& a, const Matrix& b);

 private:
  int d_ = 0;
  std::array<double, kMaxDim * kMaxDim> a_{};
};

/// alpha_1 >= ... >= alpha_d.
struct SingularSpectrum {
  int d = 0;
  std::array<double, kMaxDim> values{};

  double top() const { return values[0]; }
  double bottom() const { return values[static_cast<std::size_t>(d - 1)]; }
  double product() const;
};

/// Relative threshold below which the smallest singular value is treated
/// as zero.
inline constexpr double kSingularThreshold = 1e-14;

/// Throws NumericallySingular when alpha_d < 1e-14 * alpha_1.
SingularSpectrum singular_values(const Matrix& a);

/// Same as singular_values, but the smallest value is recovered from a
/// separately tracked |det A| = exp(log_abs_det). For long products of
/// contractions the computed determinant of the product loses all relative
/// accuracy while the sum of log-determinants of the factors does not.
SingularSpectrum singular_values_with_det(const Matrix& a, double log_abs_det);

/// Index l = ceil(t) used by the singular value function (l = t for integer t).
int svf_index(double t);

/// log alpha^t from a singular spectrum. alpha^0 = 1.
double log_svf(const SingularSpectrum& s, double t);

/// log alpha^t from log alpha_1 >= ... >= log alpha_d (span length is d).
double log_svf(std::span<const double> log_alphas, double t);

/// alpha^t(A) = alpha_1 ... alpha_{l-1} alpha_l^{t-l+1}, l = ceil(t), and
/// (alpha_1 ... alpha_d)^{t/d} for t > d.
double svf_alpha_t(const Matrix& a, double t);

/// One-sided cyclic Jacobi on the columns of A; values sorted descending.
std::array<double, kMaxDim> jacobi_singular_values(const Matrix& a);

/// Largest singular value of a 2x2 matrix in closed form.
double top_singular_value_2x2(const Matrix& m);

/// Operator 2-norm, alpha_1(A).
double operator_norm(const Matrix& a);

}  // namespace affdim
