#include "gls/power.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gls/errors.hpp"

namespace gls {

namespace {

// Polynomials as ascending coefficient vectors over Int.

std::vector<Int> poly_mul(const std::vector<Int>& a, const std::vector<Int>& b) {
  std::vector<Int> r(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

// Exact division by a monic divisor; returns quotient or nullopt if a
// nonzero remainder appears.
std::optional<std::vector<Int>> poly_divide_exact(std::vector<Int> num,
                                                  const std::vector<Int>& den) {
  if (num.size() < den.size()) return std::nullopt;
  std::vector<Int> q(num.size() - den.size() + 1, 0);
  for (std::size_t i = q.size(); i-- > 0;) {
    Int c = num[i + den.size() - 1];  // den is monic
    q[i] = c;
    if (c == 0) continue;
    for (std::size_t j = 0; j < den.size(); ++j) num[i + j] -= c * den[j];
  }
  for (const Int& c : num)
    if (c != 0) return std::nullopt;
  return q;
}

void require_sl2(const BigMatrix& a, const char* who) {
  if (a.dim() != 2) throw precondition_error(std::string(who) + ": expects a 2x2 matrix");
  if (a.det() != 1) throw precondition_error(std::string(who) + ": determinant must be 1");
}

Int entry_gcd(const BigMatrix& n) {
  Int g = 0;
  for (int i = 0; i < n.dim(); ++i)
    for (int j = 0; j < n.dim(); ++j) g = gcd(g, n.at(i, j));
  return g;
}

Int smallest_prime_factor(Int g) {
  if (g < 2) return 0;
  for (Int f = 2; f * f <= g; ++f)
    if (g % f == 0) return f;
  return g;
}

Int smallest_odd_prime_factor(Int g) {
  while (g % 2 == 0) g /= 2;
  return smallest_prime_factor(g);
}

bool is_prime_l(long m) {
  if (m < 2) return false;
  for (long f = 2; f * f <= m; ++f)
    if (m % f == 0) return false;
  return true;
}

// Integer-bisection solutions u >= 2 of D_m(u) = t (t >= 3, monotone branch).
std::optional<Int> dickson_trace_solution(const Int& t, long m) {
  Int hi;
  mpz_root(hi.get_mpz_t(), t.get_mpz_t(), static_cast<unsigned long>(m));
  hi += 2;  // (hi-1)^m > t ensures D_m(hi) >= (hi-1)^m > t
  Int lo = 2;
  if (dickson(hi, m) < t) return std::nullopt;
  while (lo < hi) {
    Int mid = (lo + hi) / 2;
    if (dickson(mid, m) < t)
      lo = mid + 1;
    else
      hi = mid;
  }
  if (dickson(lo, m) == t) return lo;
  return std::nullopt;
}

// Root candidate from a trace value u: B = (a + c_{m-2}(u) I) / c_{m-1}(u),
// entrywise exact division required.
std::optional<BigMatrix> root_from_trace(const BigMatrix& a, long m, const Int& u) {
  const Int cm1 = dickson_second(u, m - 1);
  const Int cm2 = dickson_second(u, m - 2);
  if (cm1 == 0) return std::nullopt;
  BigMatrix b(2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Int num = a.at(i, j);
      if (i == j) num += cm2;
      if (!mpz_divisible_p(num.get_mpz_t(), cm1.get_mpz_t())) return std::nullopt;
      mpz_divexact(b.at(i, j).get_mpz_t(), num.get_mpz_t(), cm1.get_mpz_t());
    }
  if (b.det() != 1) return std::nullopt;
  if (b.pow(static_cast<unsigned long>(m)) != a) return std::nullopt;
  return b;
}

// Torsion bookkeeping for |trace| <= 1: the centralizer in SL2(Z) is cyclic
// of order D generated by g0, with a = g0^e.
struct TorsionClass {
  long d;  // |centralizer|
  long e;
  BigMatrix g0;
};

TorsionClass torsion_class(const BigMatrix& a) {
  const Int t = a.trace();
  if (t == 0) return {4, 1, a};
  if (t == 1) return {6, 1, a};
  return {6, 4, -a};  // t == -1: order 3, and (-a)^4 = a^4 = a
}

}  // namespace

int euler_phi(int d) {
  int result = d, n = d;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      result -= result / p;
    }
  }
  if (n > 1) result -= result / n;
  return result;
}

std::vector<Int> cyclotomic(int d) {
  static std::map<int, std::vector<Int>> cache;
  auto it = cache.find(d);
  if (it != cache.end()) return it->second;
  // Phi_d = (x^d - 1) / prod_{e | d, e < d} Phi_e
  std::vector<Int> num(d + 1, 0);
  num[0] = -1;
  num[d] = 1;
  for (int e = 1; e < d; ++e) {
    if (d % e != 0) continue;
    auto q = poly_divide_exact(num, cyclotomic(e));
    num = std::move(*q);
  }
  cache[d] = num;
  return num;
}

Int unipotence_exponent(int n) {
  if (n < 1) throw precondition_error("unipotence_exponent: n >= 1 required");
  Int l = 1;
  for (int d = 1; d <= 2 * n * n + 2; ++d)
    if (euler_phi(d) <= n) l = lcm(l, Int(d));
  return l;
}

bool is_virtually_unipotent(const BigMatrix& m) {
  const int n = m.dim();
  std::vector<Int> p = char_poly(m).coeff;
  for (int d = 1; d <= 2 * n * n + 2; ++d) {
    if (euler_phi(d) > n) continue;
    const auto phi = cyclotomic(d);
    while (p.size() >= phi.size()) {
      auto q = poly_divide_exact(p, phi);
      if (!q) break;
      p = std::move(*q);
    }
  }
  return p.size() == 1 && p[0] == 1;
}

PowerCutoff make_power_cutoff(const std::vector<BigMatrix>& sigma) {
  if (sigma.empty()) throw precondition_error("power_cutoff: empty generating set");
  // +-I have operator norm exactly 1; everything else is bounded by its
  // Frobenius norm, which dominates the operator norm.
  Int max_frob_sq = 1;
  for (const auto& g : sigma) {
    if (g.is_identity() || g.is_minus_identity()) continue;
    max_frob_sq = std::max(max_frob_sq, g.frobenius_sq());
  }
  PowerCutoff pc;
  pc.norm_bound = std::sqrt(max_frob_sq.get_d());
  pc.trace_gap = (3.0 + std::sqrt(5.0)) / 2.0;
  pc.s = std::log(pc.norm_bound) / std::log(pc.trace_gap);
  return pc;
}

long power_cutoff(const std::vector<BigMatrix>& sigma, long k) {
  if (k < 1) throw precondition_error("power_cutoff: k >= 1 required");
  const PowerCutoff pc = make_power_cutoff(sigma);
  return static_cast<long>(std::floor(pc.s * static_cast<double>(k)));
}

Int dickson(const Int& u, long m) {
  if (m == 0) return 2;
  Int prev = 2, cur = u;
  for (long j = 1; j < m; ++j) {
    Int next = u * cur - prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

Int dickson_second(const Int& u, long m) {
  if (m < 0) return 0;
  if (m == 0) return 1;
  Int prev = 1, cur = u;
  for (long j = 1; j < m; ++j) {
    Int next = u * cur - prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

std::optional<BigMatrix> mth_root_sl2(const BigMatrix& a, long m) {
  require_sl2(a, "mth_root_sl2");
  if (m < 2) throw precondition_error("mth_root_sl2: m >= 2 required");
  const Int t = a.trace();
  if (abs(t) <= 2) throw precondition_error("mth_root_sl2: matrix must be hyperbolic (|trace| > 2)");

  // D_m is odd for odd m and even for even m; on u >= 2 it is strictly
  // increasing, so at most one |u| and at most two sign candidates exist.
  std::vector<Int> candidates;
  if (t >= 3) {
    auto u = dickson_trace_solution(t, m);
    if (u) {
      candidates.push_back(*u);
      if (m % 2 == 0) candidates.push_back(-*u);
    }
  } else if (m % 2 == 1) {
    auto u = dickson_trace_solution(-t, m);
    if (u) candidates.push_back(-*u);
  }
  for (const Int& u : candidates) {
    auto b = root_from_trace(a, m, u);
    if (b) return b;
  }
  return std::nullopt;
}

PowerWitness proper_power_witness_sl2z(const BigMatrix& a, long prime_bound) {
  require_sl2(a, "is_proper_power_sl2z");
  if (prime_bound < 2) throw precondition_error("is_proper_power_sl2z: prime_bound >= 2 required");

  auto verified = [&](BigMatrix base, long m) -> PowerWitness {
    if (base.pow(static_cast<unsigned long>(m)) != a)
      throw std::logic_error("proper_power witness failed verification");
    return {true, m, std::move(base)};
  };

  const Int t = a.trace();
  if (a.is_identity()) return verified(a, 2);
  if (a.is_minus_identity()) return verified(BigMatrix::from_rows({{0, -1}, {1, 0}}), 2);
  if (abs(t) <= 1) {
    // Torsion: in the cyclic centralizer of order d, a = a^{d+1}.
    const TorsionClass tc = torsion_class(a);
    const long order = (t == -1) ? 3 : tc.d;
    return verified(a, order + 1);
  }
  if (t == 2) {
    BigMatrix nil(2);  // a = I + N
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) nil.at(i, j) = a.at(i, j) - (i == j ? 1 : 0);
    const Int m = smallest_prime_factor(entry_gcd(nil));
    if (m == 0) return {};
    BigMatrix root(2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        mpz_divexact(root.at(i, j).get_mpz_t(), nil.at(i, j).get_mpz_t(), m.get_mpz_t());
        if (i == j) root.at(i, j) += 1;
      }
    return verified(root, m.get_si());
  }
  if (t == -2) {
    BigMatrix nil(2);  // a = -(I + N)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) nil.at(i, j) = -a.at(i, j) - (i == j ? 1 : 0);
    const Int m = smallest_odd_prime_factor(entry_gcd(nil));
    if (m == 0) return {};
    BigMatrix root(2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        mpz_divexact(root.at(i, j).get_mpz_t(), nil.at(i, j).get_mpz_t(), m.get_mpz_t());
        root.at(i, j) = -root.at(i, j) - (i == j ? 1 : 0);
      }
    return verified(root, m.get_si());
  }
  for (long m = 2; m <= prime_bound; ++m) {
    if (!is_prime_l(m)) continue;
    auto b = mth_root_sl2(a, m);
    if (b) return verified(*b, m);
  }
  return {};
}

bool is_proper_power_sl2z(const BigMatrix& a, long prime_bound) {
  return proper_power_witness_sl2z(a, prime_bound).is_power;
}

bool is_m_power_sl2z(const BigMatrix& a, long m) {
  require_sl2(a, "is_m_power_sl2z");
  if (m < 2) throw precondition_error("is_m_power_sl2z: m >= 2 required");
  const Int t = a.trace();
  if (a.is_identity()) return true;
  if (a.is_minus_identity()) return m % 4 != 0;
  if (abs(t) <= 1) {
    const TorsionClass tc = torsion_class(a);
    const long g = std::gcd(m, tc.d);
    return tc.e % g == 0;
  }
  if (t == 2 || t == -2) {
    BigMatrix nil(2);
    const int sign = (t == 2) ? 1 : -1;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) nil.at(i, j) = sign * a.at(i, j) - (i == j ? 1 : 0);
    if (sign == -1 && m % 2 == 0) return false;
    const Int g = entry_gcd(nil);
    return g % m == 0;
  }
  return mth_root_sl2(a, m).has_value();
}

}  // namespace gls
