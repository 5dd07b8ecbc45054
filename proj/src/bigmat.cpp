#include "gls/bigmat.hpp"

#include <sstream>

#include "gls/errors.hpp"

namespace gls {

BigMatrix BigMatrix::identity(int n) {
  BigMatrix m(n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

BigMatrix BigMatrix::from_rows(std::initializer_list<std::initializer_list<long>> rows) {
  const int n = static_cast<int>(rows.size());
  BigMatrix m(n);
  int i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != n)
      throw precondition_error("from_rows: matrix must be square");
    int j = 0;
    for (long v : row) m.at(i, j++) = v;
    ++i;
  }
  return m;
}

BigMatrix BigMatrix::operator*(const BigMatrix& o) const {
  if (n_ != o.n_) throw precondition_error("matrix dimension mismatch");
  BigMatrix r(n_);
  Int tmp;
  for (int i = 0; i < n_; ++i)
    for (int k = 0; k < n_; ++k) {
      const Int& aik = at(i, k);
      if (aik == 0) continue;
      for (int j = 0; j < n_; ++j) {
        tmp = aik * o.at(k, j);
        r.at(i, j) += tmp;
      }
    }
  return r;
}

BigMatrix BigMatrix::operator-() const {
  BigMatrix r(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) r.at(i, j) = -at(i, j);
  return r;
}

BigMatrix BigMatrix::pow(unsigned long m) const {
  BigMatrix base = *this, acc = identity(n_);
  while (m > 0) {
    if (m & 1UL) acc = acc * base;
    m >>= 1;
    if (m > 0) base = base * base;
  }
  return acc;
}

Int BigMatrix::trace() const {
  Int t = 0;
  for (int i = 0; i < n_; ++i) t += at(i, i);
  return t;
}

Int BigMatrix::det() const {
  const CharPoly p = char_poly(*this);
  Int d = p.coeff[0];
  if (n_ % 2 != 0) d = -d;
  return d;
}

Int BigMatrix::frobenius_sq() const {
  Int s = 0;
  for (const Int& x : e_) s += x * x;
  return s;
}

bool BigMatrix::is_identity() const {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (at(i, j) != (i == j ? 1 : 0)) return false;
  return true;
}

bool BigMatrix::is_minus_identity() const {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (at(i, j) != (i == j ? -1 : 0)) return false;
  return true;
}

BigMatrix BigMatrix::sl_inverse() const {
  if (det() != 1) throw precondition_error("sl_inverse: determinant must be 1");
  // From p(A) = 0 with p monic: A * (A^{n-1} + c_{n-1} A^{n-2} + ... + c_1 I) = -c_0 I,
  // and c_0 = (-1)^n det = (-1)^n.
  const CharPoly p = char_poly(*this);
  BigMatrix acc = identity(n_);
  for (int k = n_ - 1; k >= 1; --k) {
    acc = acc * (*this);
    for (int i = 0; i < n_; ++i) acc.at(i, i) += p.coeff[k];
  }
  if (n_ % 2 != 0)
    return acc;  // -c_0 = 1
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) acc.at(i, j) = -acc.at(i, j);
  return acc;
}

std::string BigMatrix::str() const {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < n_; ++i) {
    os << "[";
    for (int j = 0; j < n_; ++j) {
      os << at(i, j).get_str();
      if (j + 1 < n_) os << ",";
    }
    os << "]";
    if (i + 1 < n_) os << ",";
  }
  os << "]";
  return os.str();
}

bool BigMatrix::operator<(const BigMatrix& o) const {
  if (n_ != o.n_) return n_ < o.n_;
  for (std::size_t i = 0; i < e_.size(); ++i) {
    const int c = cmp(e_[i], o.e_[i]);
    if (c != 0) return c < 0;
  }
  return false;
}

CharPoly char_poly(const BigMatrix& m) {
  const int n = m.dim();
  if (n <= 0) throw precondition_error("char_poly: empty matrix");
  CharPoly p;
  p.coeff.assign(n + 1, 0);
  p.coeff[n] = 1;
  // Faddeev-LeVerrier: M_1 = A, c_{n-1} = -tr M_1,
  // M_k = A (M_{k-1} + c_{n-k+1} I), c_{n-k} = -tr(M_k) / k.
  BigMatrix M = m;
  p.coeff[n - 1] = -M.trace();
  for (int k = 2; k <= n; ++k) {
    BigMatrix shifted = M;
    for (int i = 0; i < n; ++i) shifted.at(i, i) += p.coeff[n - k + 1];
    M = m * shifted;
    Int t = -M.trace();
    Int c;
    mpz_divexact_ui(c.get_mpz_t(), t.get_mpz_t(), static_cast<unsigned long>(k));
    p.coeff[n - k] = c;
  }
  return p;
}

BigMatrix evaluate(const CharPoly& p, const BigMatrix& m) {
  const int n = m.dim();
  BigMatrix acc(n);
  for (int k = p.degree(); k >= 0; --k) {
    acc = acc * m;
    for (int i = 0; i < n; ++i) acc.at(i, i) += p.coeff[k];
  }
  return acc;
}

}  // namespace gls
