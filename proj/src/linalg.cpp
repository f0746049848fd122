#include "affdim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace affdim {

namespace {

void check_dim(int d) {
  if (d < 1 || d > kMaxDim) {
    throw DomainError("matrix dimension " + std::to_string(d) + " outside 1.." +
                      std::to_string(kMaxDim));
  }
}

}  // namespace

// One-sided (Hestenes) cyclic Jacobi: orthogonalizes the columns of A by
// plane rotations; the singular values are the final column norms. Works on
// A directly, so small singular values keep their relative accuracy.
std::array<double, kMaxDim> jacobi_singular_values(const Matrix& a) {
  const int d = a.dim();
  double u[kMaxDim][kMaxDim];
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) u[r][c] = a(r, c);

  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < d - 1; ++p) {
      for (int q = p + 1; q < d; ++q) {
        double alpha = 0, beta = 0, gamma = 0;
        for (int r = 0; r < d; ++r) {
          alpha += u[r][p] * u[r][p];
          beta += u[r][q] * u[r][q];
          gamma += u[r][p] * u[r][q];
        }
        if (gamma == 0.0) continue;
        const double rel = std::abs(gamma) / std::sqrt(alpha * beta);
        off = std::max(off, rel);
        if (rel < 1e-15) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double tau = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + tau * tau);
        const double sn = cs * tau;
        for (int r = 0; r < d; ++r) {
          const double up = u[r][p];
          const double uq = u[r][q];
          u[r][p] = cs * up - sn * uq;
          u[r][q] = sn * up + cs * uq;
        }
      }
    }
    if (off < 1e-14) break;
  }

  std::array<double, kMaxDim> out{};
  for (int c = 0; c < d; ++c) {
    double s = 0;
    for (int r = 0; r < d; ++r) s += u[r][c] * u[r][c];
    out[static_cast<std::size_t>(c)] = std::sqrt(s);
  }
  std::sort(out.begin(), out.begin() + d, std::greater<>());
  return out;
}

// Closed form for 2x2: with E = (a+d)/2, F = (a-d)/2, G = (c+b)/2, H = (c-b)/2,
// the singular values are sqrt(E^2+H^2) +- sqrt(F^2+G^2).
double top_singular_value_2x2(const Matrix& m) {
  const double e = 0.5 * (m(0, 0) + m(1, 1));
  const double f = 0.5 * (m(0, 0) - m(1, 1));
  const double g = 0.5 * (m(1, 0) + m(0, 1));
  const double h = 0.5 * (m(1, 0) - m(0, 1));
  return std::hypot(e, h) + std::hypot(f, g);
}

namespace {

SingularSpectrum spectrum_from(const Matrix& a, double abs_det, bool det_given) {
  check_dim(a.dim());
  if (!a.finite()) throw DomainError("matrix has non-finite entries");
  SingularSpectrum s;
  s.d = a.dim();
  if (s.d == 1) {
    s.values[0] = std::abs(a(0, 0));
  } else if (s.d == 2) {
    s.values[0] = top_singular_value_2x2(a);
    s.values[1] = s.values[0] > 0 ? abs_det / s.values[0] : 0.0;
  } else {
    s.values = jacobi_singular_values(a);
    if (det_given) {
      double others = 1.0;
      for (int k = 0; k < s.d - 1; ++k) others *= s.values[static_cast<std::size_t>(k)];
      s.values[static_cast<std::size_t>(s.d - 1)] = others > 0 ? abs_det / others : 0.0;
    }
  }
  if (!(s.values[0] > 0) ||
      s.values[static_cast<std::size_t>(s.d - 1)] < kSingularThreshold * s.values[0]) {
    throw NumericallySingular("numerically singular matrix (alpha_d < 1e-14 alpha_1)");
  }
  return s;
}

}  // namespace

Matrix::Matrix(int d) : d_(d) { check_dim(d); }

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : d_(static_cast<int>(rows.size())) {
  check_dim(d_);
  int r = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != d_) throw DomainError("matrix rows must have length d");
    int c = 0;
    for (double v : row) (*this)(r, c++) = v;
    ++r;
  }
}

Matrix Matrix::identity(int d) {
  Matrix m(d);
  for (int k = 0; k < d; ++k) m(k, k) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> entries) {
  Matrix m(static_cast<int>(entries.size()));
  for (int k = 0; k < m.d_; ++k) m(k, k) = entries[static_cast<std::size_t>(k)];
  return m;
}

Matrix Matrix::diagonal(std::initializer_list<double> entries) {
  return diagonal(std::span<const double>(entries.begin(), entries.size()));
}

Matrix Matrix::rotation(double angle, double scale) {
  const double c = scale * std::cos(angle);
  const double s = scale * std::sin(angle);
  return Matrix{{c, -s}, {s, c}};
}

Matrix Matrix::transpose() const {
  Matrix t(d_);
  for (int r = 0; r < d_; ++r)
    for (int c = 0; c < d_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double Matrix::determinant() const {
  // Gaussian elimination with partial pivoting on a copy.
  double m[kMaxDim][kMaxDim];
  for (int r = 0; r < d_; ++r)
    for (int c = 0; c < d_; ++c) m[r][c] = (*this)(r, c);
  double det = 1.0;
  for (int col = 0; col < d_; ++col) {
    int piv = col;
    for (int r = col + 1; r < d_; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (m[piv][col] == 0.0) return 0.0;
    if (piv != col) {
      for (int c = 0; c < d_; ++c) std::swap(m[piv][c], m[col][c]);
      det = -det;
    }
    det *= m[col][col];
    for (int r = col + 1; r < d_; ++r) {
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < d_; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return det;
}

bool Matrix::finite() const {
  for (int r = 0; r < d_; ++r)
    for (int c = 0; c < d_; ++c)
      if (!std::isfinite((*this)(r, c))) return false;
  return true;
}

Matrix& Matrix::operator*=(double s) {
  for (int r = 0; r < d_; ++r)
    for (int c = 0; c < d_; ++c) (*this)(r, c) *= s;
  return *this;
}

void Matrix::apply(std::span<const double> x, std::span<double> y) const {
  for (int r = 0; r < d_; ++r) {
    double acc = 0;
    for (int c = 0; c < d_; ++c) acc += (*this)(r, c) * x[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = acc;
  }
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.d_ != b.d_) throw DomainError("matrix dimension mismatch");
  Matrix p(a.d_);
  for (int r = 0; r < a.d_; ++r)
    for (int c = 0; c < a.d_; ++c) {
      double acc = 0;
      for (int k = 0; k < a.d_; ++k) acc += a(r, k) * b(k, c);
      p(r, c) = acc;
    }
  return p;
}

bool operator==(const Matrix& a, const Matrix& b) {
  if (a.d_ != b.d_) return false;
  for (int r = 0; r < a.d_; ++r)
    for (int c = 0; c < a.d_; ++c)
      if (a(r, c) != b(r, c)) return false;
  return true;
}

double SingularSpectrum::product() const {
  double p = 1.0;
  for (int k = 0; k < d; ++k) p *= values[static_cast<std::size_t>(k)];
  return p;
}

SingularSpectrum singular_values(const Matrix& a) {
  return spectrum_from(a, std::abs(a.determinant()), a.dim() <= 2);
}

SingularSpectrum singular_values_with_det(const Matrix& a, double log_abs_det) {
  return spectrum_from(a, std::exp(log_abs_det), true);
}

int svf_index(double t) {
  if (!(t >= 0)) throw DomainError("singular value function needs t >= 0");
  return static_cast<int>(std::ceil(t));
}

double log_svf(std::span<const double> log_alphas, double t) {
  const int l = svf_index(t);
  if (l == 0) return 0.0;
  const int d = static_cast<int>(log_alphas.size());
  if (t > d) {
    double sum = 0;
    for (double v : log_alphas) sum += v;
    return sum * (t / d);
  }
  double sum = 0;
  for (int k = 0; k < l - 1; ++k) sum += log_alphas[static_cast<std::size_t>(k)];
  return sum + (t - l + 1) * log_alphas[static_cast<std::size_t>(l - 1)];
}

double log_svf(const SingularSpectrum& s, double t) {
  std::array<double, kMaxDim> logs{};
  for (int k = 0; k < s.d; ++k) logs[static_cast<std::size_t>(k)] = std::log(s.values[static_cast<std::size_t>(k)]);
  return log_svf(std::span<const double>(logs.data(), static_cast<std::size_t>(s.d)), t);
}

double svf_alpha_t(const Matrix& a, double t) { return std::exp(log_svf(singular_values(a), t)); }

double operator_norm(const Matrix& a) { return singular_values(a).top(); }

}  // namespace affdim
