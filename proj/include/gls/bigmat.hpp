#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace gls {

using Int = mpz_class;
using Rat = mpq_class;

/// Square matrix with arbitrary-precision integer entries. Immutable by
/// convention once built; all operations return fresh values.
class BigMatrix {
 public:
  BigMatrix() = default;
  explicit BigMatrix(int n) : n_(n), e_(static_cast<std::size_t>(n) * n) {}

  static BigMatrix identity(int n);
  static BigMatrix from_rows(std::initializer_list<std::initializer_list<long>> rows);

  int dim() const { return n_; }
  Int& at(int i, int j) { return e_[static_cast<std::size_t>(i) * n_ + j]; }
  const Int& at(int i, int j) const { return e_[static_cast<std::size_t>(i) * n_ + j]; }

  BigMatrix operator*(const BigMatrix& o) const;
  BigMatrix operator-() const;
  bool operator==(const BigMatrix& o) const { return n_ == o.n_ && e_ == o.e_; }
  bool operator!=(const BigMatrix& o) const { return !(*this == o); }

  BigMatrix pow(unsigned long m) const;
  Int trace() const;
  Int det() const;
  Int frobenius_sq() const;
  bool is_identity() const;
  bool is_minus_identity() const;

  /// Exact inverse of a det = 1 matrix (integer adjugate).
  BigMatrix sl_inverse() const;

  std::string str() const;

  /// Total order usable as a map key (dimension, then entries).
  bool operator<(const BigMatrix& o) const;

 private:
  int n_ = 0;
  std::vector<Int> e_;
};

/// Monic characteristic polynomial; coeff[i] multiplies x^i, coeff[n] = 1.
struct CharPoly {
  std::vector<Int> coeff;
  int degree() const { return static_cast<int>(coeff.size()) - 1; }
};

/// Exact characteristic polynomial (Faddeev-LeVerrier; all divisions exact).
CharPoly char_poly(const BigMatrix& m);

/// p(m) by Horner; the Cayley-Hamilton identity makes this zero for p = char_poly(m).
BigMatrix evaluate(const CharPoly& p, const BigMatrix& m);

}  // namespace gls
