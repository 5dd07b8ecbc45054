#include "gls/modgroup.hpp"

#include <omp.h>

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include "gls/errors.hpp"

namespace gls {

namespace {

std::uint64_t egcd(std::int64_t a, std::int64_t b, std::int64_t& x, std::int64_t& y) {
  if (b == 0) {
    x = 1;
    y = 0;
    return a;
  }
  std::int64_t x1, y1;
  std::uint64_t g = egcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

std::uint32_t mod_inv_scalar(std::uint32_t a, std::uint32_t q) {
  std::int64_t x, y;
  if (egcd(a % q, q, x, y) != 1) throw precondition_error("not a unit mod q");
  std::int64_t r = x % static_cast<std::int64_t>(q);
  if (r < 0) r += q;
  return static_cast<std::uint32_t>(r);
}

void check_pack_limits(std::uint32_t n, std::uint32_t q) {
  if (n < 1 || n > 3) throw precondition_error("ModMatrix: dimension must be 1..3");
  if (q < 2) throw precondition_error("ModMatrix: modulus must be >= 2");
  if (n <= 2 && q > 65535) throw precondition_error("ModMatrix: modulus too large for packing");
  if (n == 3 && q > 127) throw precondition_error("ModMatrix: modulus too large for packing");
}

std::vector<std::uint32_t> units_mod(std::uint32_t q) {
  std::vector<std::uint32_t> u;
  for (std::uint32_t x = 1; x < q; ++x)
    if (std::gcd(x, q) == 1) u.push_back(x);
  return u;
}

}  // namespace

std::string ModMatrix::str() const {
  std::ostringstream os;
  os << "[";
  for (std::uint32_t i = 0; i < n; ++i) {
    os << "[";
    for (std::uint32_t j = 0; j < n; ++j) {
      os << at(i, j);
      if (j + 1 < n) os << ",";
    }
    os << "]";
    if (i + 1 < n) os << ",";
  }
  os << "] mod " << q;
  return os.str();
}

ModMatrix mod_identity(std::uint32_t n, std::uint32_t q) {
  check_pack_limits(n, q);
  ModMatrix m;
  m.n = n;
  m.q = q;
  for (std::uint32_t i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

ModMatrix reduce(const BigMatrix& m, std::uint32_t q) {
  check_pack_limits(m.dim(), q);
  ModMatrix r;
  r.n = m.dim();
  r.q = q;
  Int tmp;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) {
      mpz_fdiv_r_ui(tmp.get_mpz_t(), m.at(i, j).get_mpz_t(), q);
      r.at(i, j) = static_cast<std::uint32_t>(tmp.get_ui());
    }
  return r;
}

ModMatrix mmul(const ModMatrix& a, const ModMatrix& b) {
  ModMatrix r;
  r.n = a.n;
  r.q = a.q;
  for (std::uint32_t i = 0; i < a.n; ++i)
    for (std::uint32_t j = 0; j < a.n; ++j) {
      std::uint64_t s = 0;
      for (std::uint32_t k = 0; k < a.n; ++k)
        s += static_cast<std::uint64_t>(a.at(i, k)) * b.at(k, j);
      r.at(i, j) = static_cast<std::uint32_t>(s % a.q);
    }
  return r;
}

ModMatrix mpow(ModMatrix base, std::uint64_t m) {
  ModMatrix acc = mod_identity(base.n, base.q);
  while (m > 0) {
    if (m & 1ULL) acc = mmul(acc, base);
    m >>= 1;
    if (m > 0) base = mmul(base, base);
  }
  return acc;
}

std::uint32_t mod_det(const ModMatrix& m) {
  const std::uint64_t q = m.q;
  auto sub = [&](std::uint64_t a, std::uint64_t b) { return (a + q - b % q) % q; };
  if (m.n == 1) return m.at(0, 0);
  if (m.n == 2)
    return static_cast<std::uint32_t>(
        sub(static_cast<std::uint64_t>(m.at(0, 0)) * m.at(1, 1) % q,
            static_cast<std::uint64_t>(m.at(0, 1)) * m.at(1, 0) % q));
  std::uint64_t pos = 0, neg = 0;
  pos = (static_cast<std::uint64_t>(m.at(0, 0)) * m.at(1, 1) % q) * m.at(2, 2) % q;
  pos = (pos + (static_cast<std::uint64_t>(m.at(0, 1)) * m.at(1, 2) % q) * m.at(2, 0)) % q;
  pos = (pos + (static_cast<std::uint64_t>(m.at(0, 2)) * m.at(1, 0) % q) * m.at(2, 1)) % q;
  neg = (static_cast<std::uint64_t>(m.at(0, 2)) * m.at(1, 1) % q) * m.at(2, 0) % q;
  neg = (neg + (static_cast<std::uint64_t>(m.at(0, 0)) * m.at(1, 2) % q) * m.at(2, 1)) % q;
  neg = (neg + (static_cast<std::uint64_t>(m.at(0, 1)) * m.at(1, 0) % q) * m.at(2, 2)) % q;
  return static_cast<std::uint32_t>(sub(pos, neg));
}

bool is_unit_mod(std::uint32_t x, std::uint32_t q) { return std::gcd(x % q, q) == 1; }

ModMatrix mod_inverse(const ModMatrix& m) {
  const std::uint32_t d = mod_det(m);
  const std::uint64_t di = mod_inv_scalar(d, m.q);
  const std::uint64_t q = m.q;
  ModMatrix r;
  r.n = m.n;
  r.q = m.q;
  auto neg = [&](std::uint64_t a) { return (q - a % q) % q; };
  if (m.n == 1) {
    r.at(0, 0) = static_cast<std::uint32_t>(di % q);
    return r;
  }
  if (m.n == 2) {
    r.at(0, 0) = static_cast<std::uint32_t>(m.at(1, 1) * di % q);
    r.at(0, 1) = static_cast<std::uint32_t>(neg(m.at(0, 1)) * di % q);
    r.at(1, 0) = static_cast<std::uint32_t>(neg(m.at(1, 0)) * di % q);
    r.at(1, 1) = static_cast<std::uint32_t>(m.at(0, 0) * di % q);
    return r;
  }
  // 3x3 adjugate
  auto minor2 = [&](int i0, int i1, int j0, int j1) -> std::uint64_t {
    std::uint64_t a = static_cast<std::uint64_t>(m.at(i0, j0)) * m.at(i1, j1) % q;
    std::uint64_t b = static_cast<std::uint64_t>(m.at(i0, j1)) * m.at(i1, j0) % q;
    return (a + q - b) % q;
  };
  const int rows[3][2] = {{1, 2}, {0, 2}, {0, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      std::uint64_t cof = minor2(rows[j][0], rows[j][1], rows[i][0], rows[i][1]);
      if ((i + j) % 2 == 1) cof = neg(cof);
      r.at(i, j) = static_cast<std::uint32_t>(cof * di % q);
    }
  return r;
}

std::uint64_t pack(const ModMatrix& m) {
  std::uint64_t key = 0;
  const std::size_t cnt = static_cast<std::size_t>(m.n) * m.n;
  for (std::size_t i = 0; i < cnt; ++i) key = key * m.q + m.e[i];
  return key;
}

ModMatrix unpack(std::uint64_t key, std::uint32_t n, std::uint32_t q) {
  ModMatrix m;
  m.n = n;
  m.q = q;
  const std::size_t cnt = static_cast<std::size_t>(n) * n;
  for (std::size_t i = cnt; i-- > 0;) {
    m.e[i] = static_cast<std::uint32_t>(key % q);
    key /= q;
  }
  return m;
}

ModMatrix crt_combine(const ModMatrix& a, const ModMatrix& b) {
  if (a.n != b.n) throw precondition_error("crt_combine: dimension mismatch");
  if (std::gcd(a.q, b.q) != 1) throw precondition_error("crt_combine: moduli not coprime");
  const std::uint64_t q = static_cast<std::uint64_t>(a.q) * b.q;
  check_pack_limits(a.n, static_cast<std::uint32_t>(q));
  // x = a + p*((b - a) * p^{-1} mod r)
  const std::uint64_t pinv = mod_inv_scalar(a.q % b.q, b.q);
  ModMatrix r;
  r.n = a.n;
  r.q = static_cast<std::uint32_t>(q);
  for (std::uint32_t i = 0; i < a.n; ++i)
    for (std::uint32_t j = 0; j < a.n; ++j) {
      const std::uint64_t diff = (b.at(i, j) + b.q - a.at(i, j) % b.q) % b.q;
      r.at(i, j) = static_cast<std::uint32_t>(a.at(i, j) + a.q * (diff * pinv % b.q));
    }
  return r;
}

std::uint64_t QuotientGroup::canon_key(const ModMatrix& m) const {
  if (!projective) return pack(m);
  std::uint64_t best = ~0ULL;
  for (std::uint32_t lam = 1; lam < q; ++lam) {
    if (std::gcd(lam, q) != 1) continue;
    ModMatrix s = m;
    const std::size_t cnt = static_cast<std::size_t>(n) * n;
    for (std::size_t i = 0; i < cnt; ++i)
      s.e[i] = static_cast<std::uint32_t>(static_cast<std::uint64_t>(s.e[i]) * lam % q);
    best = std::min(best, pack(s));
  }
  return best;
}

std::optional<std::uint32_t> QuotientGroup::find(const ModMatrix& m) const {
  auto it = index.find(canon_key(m));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::uint32_t QuotientGroup::index_of(const ModMatrix& m) const {
  auto i = find(m);
  if (!i) throw precondition_error("element not in group: " + m.str());
  return *i;
}

std::uint32_t QuotientGroup::mul(std::uint32_t i, std::uint32_t j) const {
  const ModMatrix p = mmul(element(i), element(j));
  auto it = index.find(canon_key(p));
  if (it == index.end()) throw std::logic_error("group not closed under multiplication");
  return it->second;
}

std::uint32_t QuotientGroup::inv(std::uint32_t i) const {
  return index.at(canon_key(mod_inverse(element(i))));
}

std::uint32_t QuotientGroup::pow(std::uint32_t i, std::uint64_t m) const {
  return index.at(canon_key(mpow(element(i), m)));
}

std::uint64_t QuotientGroup::order_of(std::uint32_t i) const {
  std::uint64_t ord = 1;
  std::uint32_t x = i;
  while (x != id_index) {
    x = mul(x, i);
    ++ord;
    if (ord > size()) throw std::logic_error("order_of: did not cycle");
  }
  return ord;
}

std::uint64_t QuotientGroup::exponent() const {
  std::uint64_t e = 1;
  for (std::uint32_t i = 0; i < size(); ++i) e = std::lcm(e, order_of(i));
  return e;
}

std::vector<std::uint32_t> QuotientGroup::find_generators() const {
  if (!gens.empty()) return gens;
  std::vector<std::uint32_t> s;
  std::vector<std::uint8_t> in_closure(size(), 0);
  std::vector<std::uint32_t> closure{id_index};
  in_closure[id_index] = 1;
  while (closure.size() < size()) {
    std::uint32_t pick = 0;
    while (in_closure[pick]) ++pick;
    s.push_back(pick);
    // grow closure by BFS over current generating set
    std::deque<std::uint32_t> queue(closure.begin(), closure.end());
    if (!in_closure[pick]) {
      in_closure[pick] = 1;
      closure.push_back(pick);
      queue.push_back(pick);
    }
    while (!queue.empty()) {
      const std::uint32_t v = queue.front();
      queue.pop_front();
      for (std::uint32_t g : s) {
        const std::uint32_t w = mul(v, g);
        if (!in_closure[w]) {
          in_closure[w] = 1;
          closure.push_back(w);
          queue.push_back(w);
        }
      }
    }
  }
  return s;
}

QuotientGroup generate(const std::vector<ModMatrix>& gens, std::uint32_t q, std::size_t budget,
                       bool projective) {
  if (gens.empty()) throw precondition_error("generate: empty generator list");
  check_pack_limits(gens.front().n, q);
  QuotientGroup g;
  g.n = gens.front().n;
  g.q = q;
  g.projective = projective;
  for (const auto& s : gens) {
    if (s.n != g.n || s.q != q) throw precondition_error("generate: inconsistent generator");
    if (!is_unit_mod(mod_det(s), q)) throw precondition_error("generate: generator not invertible mod q");
  }
  const ModMatrix id = mod_identity(g.n, q);
  g.elems.push_back(g.canon_key(id));
  g.index.emplace(g.elems[0], 0);
  g.id_index = 0;
  std::deque<std::uint32_t> queue{0};
  while (!queue.empty()) {
    const std::uint32_t v = queue.front();
    queue.pop_front();
    const ModMatrix mv = g.element(v);
    for (const auto& s : gens) {
      const std::uint64_t key = g.canon_key(mmul(mv, s));
      auto [it, inserted] = g.index.emplace(key, static_cast<std::uint32_t>(g.elems.size()));
      if (inserted) {
        g.elems.push_back(key);
        queue.push_back(it->second);
        if (g.elems.size() > budget)
          throw budget_error("generate: enumeration budget exceeded (" + std::to_string(budget) + ")");
      }
    }
  }
  for (const auto& s : gens) g.gens.push_back(g.index.at(g.canon_key(s)));
  return g;
}

namespace {

QuotientGroup sl2_raw(std::uint32_t p, std::size_t budget, bool projective) {
  const std::uint64_t expected = static_cast<std::uint64_t>(p) * (p - 1) * (p + 1);
  if (expected > budget) throw budget_error("enumerate_sl2: budget exceeded");
  QuotientGroup g;
  g.n = 2;
  g.q = p;
  g.projective = projective;
  g.index.reserve(expected);
  auto push = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
    ModMatrix m;
    m.n = 2;
    m.q = p;
    m.e = {a, b, c, d, 0, 0, 0, 0, 0};
    const std::uint64_t key = g.canon_key(m);
    if (g.index.emplace(key, static_cast<std::uint32_t>(g.elems.size())).second)
      g.elems.push_back(key);
  };
  for (std::uint32_t a = 1; a < p; ++a) {
    const std::uint64_t ainv = mod_inv_scalar(a, p);
    for (std::uint32_t b = 0; b < p; ++b)
      for (std::uint32_t c = 0; c < p; ++c)
        push(a, b, c, static_cast<std::uint32_t>((1 + static_cast<std::uint64_t>(b) * c) % p * ainv % p));
  }
  for (std::uint32_t b = 1; b < p; ++b) {
    const std::uint32_t c = static_cast<std::uint32_t>((p - mod_inv_scalar(b, p)) % p);
    for (std::uint32_t d = 0; d < p; ++d) push(0, b, c, d);
  }
  g.id_index = g.index.at(g.canon_key(mod_identity(2, p)));
  return g;
}

QuotientGroup gl2_raw(std::uint32_t p, std::size_t budget, bool projective) {
  const std::uint64_t expected =
      (static_cast<std::uint64_t>(p) * p - 1) * (static_cast<std::uint64_t>(p) * p - p);
  if (expected > budget) throw budget_error("enumerate_gl2: budget exceeded");
  QuotientGroup g;
  g.n = 2;
  g.q = p;
  g.projective = projective;
  g.index.reserve(expected);
  ModMatrix m;
  m.n = 2;
  m.q = p;
  for (std::uint32_t a = 0; a < p; ++a)
    for (std::uint32_t b = 0; b < p; ++b)
      for (std::uint32_t c = 0; c < p; ++c)
        for (std::uint32_t d = 0; d < p; ++d) {
          m.e = {a, b, c, d, 0, 0, 0, 0, 0};
          if (mod_det(m) == 0) continue;
          const std::uint64_t key = g.canon_key(m);
          if (g.index.emplace(key, static_cast<std::uint32_t>(g.elems.size())).second)
            g.elems.push_back(key);
        }
  g.id_index = g.index.at(g.canon_key(mod_identity(2, p)));
  return g;
}

}  // namespace

QuotientGroup enumerate_sl2(std::uint32_t p, std::size_t budget) { return sl2_raw(p, budget, false); }
QuotientGroup enumerate_gl2(std::uint32_t p, std::size_t budget) { return gl2_raw(p, budget, false); }
QuotientGroup enumerate_psl2(std::uint32_t p, std::size_t budget) { return sl2_raw(p, budget, true); }
QuotientGroup enumerate_pgl2(std::uint32_t p, std::size_t budget) { return gl2_raw(p, budget, true); }

namespace {

template <class CosetFn>
std::size_t census_kernel(const QuotientGroup& g, std::size_t count, std::uint64_t m,
                          CosetFn&& elem_of, bool parallel) {
  std::vector<std::uint8_t> seen(g.size(), 0);
  if (parallel) {
#pragma omp parallel
    {
      std::vector<std::uint8_t> local(g.size(), 0);
#pragma omp for schedule(static)
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i) {
        const ModMatrix x = elem_of(static_cast<std::size_t>(i));
        local[g.index.at(g.canon_key(mpow(x, m)))] = 1;
      }
#pragma omp critical
      for (std::size_t j = 0; j < seen.size(); ++j) seen[j] |= local[j];
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const ModMatrix x = elem_of(i);
      seen[g.index.at(g.canon_key(mpow(x, m)))] = 1;
    }
  }
  std::size_t distinct = 0;
  for (std::uint8_t s : seen) distinct += s;
  return distinct;
}

}  // namespace

std::size_t power_census(const QuotientGroup& g, std::uint64_t m) {
  if (m < 1) throw precondition_error("power_census: m >= 1 required");
  return census_kernel(g, g.size(), m, [&](std::size_t i) { return g.element(static_cast<std::uint32_t>(i)); }, true);
}

std::size_t power_census_serial(const QuotientGroup& g, std::uint64_t m) {
  if (m < 1) throw precondition_error("power_census: m >= 1 required");
  return census_kernel(g, g.size(), m, [&](std::size_t i) { return g.element(static_cast<std::uint32_t>(i)); }, false);
}

bool is_subgroup(const QuotientGroup& h, const std::vector<std::uint32_t>& sub) {
  std::vector<std::uint8_t> mask(h.size(), 0);
  for (std::uint32_t i : sub) mask[i] = 1;
  if (!mask[h.id_index]) return false;
  for (std::uint32_t a : sub)
    for (std::uint32_t b : sub)
      if (!mask[h.mul(a, b)]) return false;
  return true;
}

bool is_normal(const QuotientGroup& h, const std::vector<std::uint32_t>& sub) {
  if (!is_subgroup(h, sub)) return false;
  std::vector<std::uint8_t> mask(h.size(), 0);
  for (std::uint32_t i : sub) mask[i] = 1;
  for (std::uint32_t g : h.find_generators()) {
    const std::uint32_t gi = h.inv(g);
    for (std::uint32_t x : sub)
      if (!mask[h.mul(h.mul(g, x), gi)]) return false;
  }
  return true;
}

namespace {

std::size_t coset_census_impl(const QuotientGroup& h, const std::vector<std::uint32_t>& normal,
                              std::uint32_t rep, std::uint64_t m, bool parallel) {
  if (m < 1) throw precondition_error("coset_power_census: m >= 1 required");
  if (!is_normal(h, normal)) throw precondition_error("coset_power_census: subgroup is not normal");
  const ModMatrix hrep = h.element(rep);
  return census_kernel(
      h, normal.size(), m,
      [&](std::size_t i) { return mmul(h.element(normal[i]), hrep); }, parallel);
}

}  // namespace

std::size_t coset_power_census(const QuotientGroup& h, const std::vector<std::uint32_t>& normal,
                               std::uint32_t rep, std::uint64_t m) {
  return coset_census_impl(h, normal, rep, m, true);
}

std::size_t coset_power_census_serial(const QuotientGroup& h,
                                      const std::vector<std::uint32_t>& normal, std::uint32_t rep,
                                      std::uint64_t m) {
  return coset_census_impl(h, normal, rep, m, false);
}

bool crt_order_check(const std::vector<BigMatrix>& gens, std::uint32_t p, std::uint32_t q,
                     std::size_t budget) {
  if (p == q) throw precondition_error("crt_order_check: primes must be distinct");
  if (p % 2 == 0 || q % 2 == 0) throw precondition_error("crt_order_check: primes must be odd");
  auto reduce_all = [&](std::uint32_t mod) {
    std::vector<ModMatrix> r;
    for (const auto& g : gens) r.push_back(reduce(g, mod));
    return r;
  };
  const std::size_t np = generate(reduce_all(p), p, budget).size();
  const std::size_t nq = generate(reduce_all(q), q, budget).size();
  const std::size_t npq = generate(reduce_all(p * q), p * q, budget).size();
  return npq == np * nq;
}

std::uint32_t coset_low_order_rep(const QuotientGroup& g, const std::vector<std::uint32_t>& normal,
                                  std::uint32_t coset_elt) {
  if (!is_normal(g, normal)) throw precondition_error("coset_low_order_rep: subgroup is not normal");
  std::vector<std::uint8_t> mask(g.size(), 0);
  for (std::uint32_t i : normal) mask[i] = 1;
  if (mask[coset_elt]) return g.id_index;

  const std::uint64_t idx = g.size() / normal.size();
  // order of the coset in G/H
  std::uint64_t d = 1;
  std::uint32_t x = coset_elt;
  while (!mask[x]) {
    x = g.mul(x, coset_elt);
    ++d;
  }
  // product of the maximal prime-power parts of exp(G) for primes not
  // dividing [G:H]; raising to it kills those primes from any order
  const std::uint64_t e = g.exponent();
  std::uint64_t e_bad = 1, rest = e;
  for (std::uint64_t r = 2; r * r <= rest; ++r) {
    if (rest % r != 0) continue;
    std::uint64_t part = 1;
    while (rest % r == 0) {
      rest /= r;
      part *= r;
    }
    if (idx % r != 0) e_bad *= part;
  }
  if (rest > 1 && idx % rest != 0) e_bad *= rest;
  // choose t with e_bad * t = 1 (mod d) so the power stays in the coset
  const std::uint64_t t = mod_inv_scalar(static_cast<std::uint32_t>(e_bad % d), static_cast<std::uint32_t>(d));
  const std::uint32_t rep = g.pow(coset_elt, e_bad * t);

  std::uint64_t ord = g.order_of(rep);
  for (std::uint64_t r = 2; r <= ord; ++r) {
    if (ord % r != 0) continue;
    while (ord % r == 0) ord /= r;
    if (idx % r != 0) throw std::logic_error("coset_low_order_rep: construction failed");
  }
  return rep;
}

std::vector<std::vector<std::uint32_t>> maximal_tori(const QuotientGroup& g) {
  const std::uint32_t p = g.q;
  std::vector<std::vector<std::uint32_t>> tori;
  std::set<std::vector<std::uint32_t>> dedupe;
  std::vector<std::uint8_t> assigned(g.size(), 0);
  const auto gens = g.find_generators();
  for (std::uint32_t t = 0; t < g.size(); ++t) {
    if (assigned[t]) continue;
    if (g.order_of(t) % p == 0) continue;  // not semisimple
    bool central = true;
    for (std::uint32_t s : gens)
      if (g.mul(t, s) != g.mul(s, t)) {
        central = false;
        break;
      }
    if (central) continue;
    std::vector<std::uint32_t> cent;
    for (std::uint32_t x = 0; x < g.size(); ++x)
      if (g.mul(x, t) == g.mul(t, x)) cent.push_back(x);
    bool abelian = true;
    for (std::size_t i = 0; i < cent.size() && abelian; ++i)
      for (std::size_t j = i + 1; j < cent.size(); ++j)
        if (g.mul(cent[i], cent[j]) != g.mul(cent[j], cent[i])) {
          abelian = false;
          break;
        }
    if (!abelian) continue;
    if (dedupe.insert(cent).second) {
      for (std::uint32_t x : cent) assigned[x] = 1;
      tori.push_back(cent);
    }
  }
  return tori;
}

namespace {

struct TorusStats {
  std::vector<std::uint32_t> fixed;          // T_mu
  std::vector<std::uint32_t> regular_fixed;  // T_{mu,n}
  std::uint64_t c = 0;
  bool stable = false;
};

// Regular elements of T: those whose centralizer in G is exactly T.
std::vector<std::uint8_t> regular_mask(const QuotientGroup& g, const std::vector<std::uint32_t>& torus) {
  std::vector<std::uint8_t> in_t(g.size(), 0);
  for (std::uint32_t x : torus) in_t[x] = 1;
  std::vector<std::uint8_t> reg(g.size(), 0);
  for (std::uint32_t t : torus) {
    std::size_t csize = 0;
    bool outside = false;
    for (std::uint32_t x = 0; x < g.size() && !outside; ++x)
      if (g.mul(x, t) == g.mul(t, x)) {
        ++csize;
        if (!in_t[x]) outside = true;
      }
    if (!outside && csize == torus.size()) reg[t] = 1;
  }
  return reg;
}

TorusStats torus_stats(const QuotientGroup& g, const std::vector<std::uint32_t>& torus,
                       const std::vector<std::uint8_t>& reg,
                       const std::vector<std::uint32_t>& mu_on_torus, std::uint32_t n_ord) {
  TorusStats st;
  std::vector<std::uint8_t> in_t(g.size(), 0);
  for (std::uint32_t x : torus) in_t[x] = 1;
  st.stable = true;
  for (std::size_t i = 0; i < torus.size(); ++i)
    if (!in_t[mu_on_torus[i]]) {
      st.stable = false;
      return st;
    }
  for (std::size_t i = 0; i < torus.size(); ++i) {
    const std::uint32_t t = torus[i];
    if (n_ord % g.order_of(t) == 0) ++st.c;
    if (mu_on_torus[i] != t) continue;
    st.fixed.push_back(t);
    if (reg[g.pow(t, n_ord)]) st.regular_fixed.push_back(t);
  }
  return st;
}

std::uint64_t normalizer_size(const QuotientGroup& g, const std::vector<std::uint32_t>& torus) {
  std::vector<std::uint8_t> in_t(g.size(), 0);
  for (std::uint32_t x : torus) in_t[x] = 1;
  std::uint64_t n = 0;
  for (std::uint32_t x = 0; x < g.size(); ++x) {
    const std::uint32_t xi = g.inv(x);
    bool ok = true;
    for (std::uint32_t t : torus)
      if (!in_t[g.mul(g.mul(x, t), xi)]) {
        ok = false;
        break;
      }
    if (ok) ++n;
  }
  return n;
}

std::uint32_t conj_index(const QuotientGroup& g, const ModMatrix& h, const ModMatrix& hinv,
                         std::uint32_t x) {
  const ModMatrix y = mmul(mmul(h, g.element(x)), hinv);
  auto it = g.index.find(g.canon_key(y));
  if (it == g.index.end())
    throw precondition_error("conjugating element does not normalize the group");
  return it->second;
}

}  // namespace

TorusReport torus_analysis(const QuotientGroup& g, const ModMatrix& h, std::uint32_t n_ord) {
  if (n_ord < 1) throw precondition_error("torus_analysis: n_ord >= 1 required");
  const ModMatrix hinv = mod_inverse(h);
  TorusReport rep;
  rep.n_ord = n_ord;
  rep.mu.resize(g.size());
  for (std::uint32_t x = 0; x < g.size(); ++x) rep.mu[x] = conj_index(g, h, hinv, x);
  // verify the automorphism order via the permutation's cycle structure
  {
    std::vector<std::uint8_t> done(g.size(), 0);
    std::uint64_t ord = 1;
    for (std::uint32_t x = 0; x < g.size(); ++x) {
      if (done[x]) continue;
      std::uint64_t len = 0;
      std::uint32_t y = x;
      do {
        done[y] = 1;
        y = rep.mu[y];
        ++len;
      } while (y != x);
      ord = std::lcm(ord, len);
    }
    if (ord != n_ord)
      throw precondition_error("torus_analysis: conjugation by h has order " + std::to_string(ord) +
                               ", not " + std::to_string(n_ord));
  }

  const auto tori = maximal_tori(g);
  if (tori.empty())
    throw std::runtime_error("torus_analysis: no regular semisimple element found");

  int best = -1;
  TorusStats best_st;
  std::vector<std::uint8_t> best_reg;
  for (std::size_t ti = 0; ti < tori.size(); ++ti) {
    const auto& torus = tori[ti];
    std::vector<std::uint32_t> mu_t(torus.size());
    for (std::size_t i = 0; i < torus.size(); ++i) mu_t[i] = rep.mu[torus[i]];
    auto reg = regular_mask(g, torus);
    auto st = torus_stats(g, torus, reg, mu_t, n_ord);
    if (!st.stable) continue;
    auto better = [&]() {
      if (best < 0) return true;
      const bool h2_new = 4 * st.regular_fixed.size() >= 3 * st.fixed.size();
      const bool h2_old = 4 * best_st.regular_fixed.size() >= 3 * best_st.fixed.size();
      if (h2_new != h2_old) return h2_new;
      // larger |T_{mu,n}| / |T_mu| wins
      return st.regular_fixed.size() * best_st.fixed.size() >
             best_st.regular_fixed.size() * st.fixed.size();
    };
    if (better()) {
      best = static_cast<int>(ti);
      best_st = std::move(st);
      best_reg = std::move(reg);
    }
  }
  if (best < 0)
    throw std::runtime_error("torus_analysis: no mu-stable maximal torus for this conjugator");

  const auto& torus = tori[best];
  rep.torus = torus;
  rep.fixed = best_st.fixed;
  rep.regular_fixed = best_st.regular_fixed;
  rep.c = best_st.c;
  const std::uint64_t nsize = normalizer_size(g, torus);
  rep.normalizer_index = nsize / torus.size();
  rep.bound_den = Int(4) * Int(static_cast<unsigned long>(rep.c)) *
                  Int(static_cast<unsigned long>(rep.normalizer_index));
  rep.bound_num = rep.bound_den - 1;

  std::vector<std::uint8_t> fixed_mask(g.size(), 0);
  for (std::uint32_t t : rep.fixed) fixed_mask[t] = 1;

  // Lemma: for t in T_{mu,n}, the twisted stabilizer {g : g t mu(g)^{-1} = t}
  // is exactly T_mu.
  rep.lemma61_ok = true;
  for (std::uint32_t t : rep.regular_fixed) {
    for (std::uint32_t x = 0; x < g.size() && rep.lemma61_ok; ++x) {
      const bool stab = g.mul(x, t) == g.mul(t, rep.mu[x]);
      if (stab != static_cast<bool>(fixed_mask[x])) rep.lemma61_ok = false;
    }
    if (!rep.lemma61_ok) break;
  }

  // Lemma: if C(t) = T and g t g^{-1} in T then g normalizes T.
  rep.lemma62_ok = true;
  {
    std::vector<std::uint8_t> in_t(g.size(), 0);
    for (std::uint32_t x : torus) in_t[x] = 1;
    std::vector<std::uint8_t> in_n(g.size(), 0);
    for (std::uint32_t x = 0; x < g.size(); ++x) {
      const std::uint32_t xi = g.inv(x);
      bool norm = true;
      for (std::uint32_t t : torus)
        if (!in_t[g.mul(g.mul(x, t), xi)]) {
          norm = false;
          break;
        }
      in_n[x] = norm;
    }
    for (std::uint32_t t : torus) {
      if (!best_reg[t]) continue;
      for (std::uint32_t x = 0; x < g.size(); ++x) {
        if (in_t[g.mul(g.mul(x, t), g.inv(x))] && !in_n[x]) {
          rep.lemma62_ok = false;
          break;
        }
      }
      if (!rep.lemma62_ok) break;
    }
  }

  // Lemma: when |T_{mu,n}| > |T_mu|/2, L = {g : exists s in T_{mu,n} with
  // g s mu(g)^{-1} in T_{mu,n}} is a subgroup containing T_mu with index
  // at most c [N:T].
  rep.lemma63_applicable = 2 * rep.regular_fixed.size() > rep.fixed.size();
  rep.lemma63_ok = true;
  if (rep.lemma63_applicable) {
    std::vector<std::uint8_t> in_rf(g.size(), 0);
    for (std::uint32_t t : rep.regular_fixed) in_rf[t] = 1;
    std::vector<std::uint32_t> big_l;
    for (std::uint32_t x = 0; x < g.size(); ++x) {
      const std::uint32_t mxi = g.inv(rep.mu[x]);
      for (std::uint32_t s : rep.regular_fixed)
        if (in_rf[g.mul(g.mul(x, s), mxi)]) {
          big_l.push_back(x);
          break;
        }
    }
    rep.lemma63_ok = is_subgroup(g, big_l);
    if (rep.lemma63_ok) {
      std::vector<std::uint8_t> in_l(g.size(), 0);
      for (std::uint32_t x : big_l) in_l[x] = 1;
      for (std::uint32_t t : rep.fixed)
        if (!in_l[t]) rep.lemma63_ok = false;
      if (big_l.size() > rep.fixed.size() * rep.c * rep.normalizer_index) rep.lemma63_ok = false;
    }
  }
  return rep;
}

CosetPowerBound coset_power_bound_check(const QuotientGroup& g_sub, const QuotientGroup& h_group,
                                        const std::vector<std::uint32_t>& normal,
                                        std::uint32_t coset_elt, std::uint64_t m) {
  if (m < 2) throw precondition_error("coset_power_bound_check: m >= 2 required");
  if (!is_normal(h_group, normal))
    throw precondition_error("coset_power_bound_check: subgroup is not normal");

  const auto tori = maximal_tori(g_sub);
  if (tori.empty()) throw std::runtime_error("coset_power_bound_check: no maximal torus");
  std::vector<std::vector<std::uint8_t>> regs;
  regs.reserve(tori.size());
  for (const auto& torus : tori) regs.push_back(regular_mask(g_sub, torus));

  const auto gsub_gens = g_sub.find_generators();

  struct Candidate {
    std::uint32_t idx;
    std::uint32_t n_ord;
  };
  std::vector<Candidate> cands;
  cands.reserve(normal.size());
  for (std::uint32_t nidx : normal) {
    const std::uint32_t hidx = h_group.mul(nidx, coset_elt);
    const ModMatrix h = h_group.element(hidx);
    ModMatrix hj = h;
    std::uint32_t ord = 0;
    for (std::uint32_t j = 1; j <= 8 * static_cast<std::uint32_t>(h_group.size()); ++j) {
      const ModMatrix hji = mod_inverse(hj);
      bool trivial = true;
      for (std::uint32_t s : gsub_gens) {
        const ModMatrix x = g_sub.element(s);
        if (g_sub.canon_key(mmul(mmul(hj, x), hji)) != g_sub.elems[s]) {
          trivial = false;
          break;
        }
      }
      if (trivial) {
        ord = j;
        break;
      }
      hj = mmul(hj, h);
    }
    if (ord == 0) throw std::logic_error("coset_power_bound_check: conjugation order not found");
    cands.push_back({hidx, ord});
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.n_ord != b.n_ord) return a.n_ord < b.n_ord;
    return a.idx < b.idx;
  });

  CosetPowerBound out;
  bool have_best = false;
  std::size_t best_rf = 0, best_f = 1;  // best uncertified ratio |T_mu_n| / |T_mu|
  std::uint64_t best_c = 0, best_nt = 0;

  for (const auto& cand : cands) {
    const ModMatrix h = h_group.element(cand.idx);
    const ModMatrix hinv = mod_inverse(h);
    for (std::size_t ti = 0; ti < tori.size(); ++ti) {
      const auto& torus = tori[ti];
      std::vector<std::uint32_t> mu_t(torus.size());
      bool stable = true;
      for (std::size_t i = 0; i < torus.size() && stable; ++i) {
        const ModMatrix y = mmul(mmul(h, g_sub.element(torus[i])), hinv);
        auto it = g_sub.index.find(g_sub.canon_key(y));
        if (it == g_sub.index.end())
          throw precondition_error("coset representative does not normalize the subgroup");
        mu_t[i] = it->second;
        if (!std::binary_search(torus.begin(), torus.end(), mu_t[i])) stable = false;
      }
      if (!stable) continue;
      const auto st = torus_stats(g_sub, torus, regs[ti], mu_t, cand.n_ord);
      if (st.fixed.empty()) continue;
      const bool hyp1 = st.fixed.size() % m == 0;
      const bool hyp2 = 4 * st.regular_fixed.size() >= 3 * st.fixed.size();
      const std::uint64_t nt = normalizer_size(g_sub, torus) / torus.size();
      if (hyp1 && hyp2) {
        out.certified = true;
        out.h = h;
        out.n_ord = cand.n_ord;
        out.c = st.c;
        out.normalizer_index = nt;
        out.census = coset_power_census(h_group, normal, coset_elt, m);
        out.bound_den = Int(4) * Int(static_cast<unsigned long>(out.c)) *
                        Int(static_cast<unsigned long>(nt));
        out.bound_num = out.bound_den - 1;
        out.bound_holds =
            Int(static_cast<unsigned long>(out.census)) * out.bound_den <=
            out.bound_num * Int(static_cast<unsigned long>(g_sub.size()));
        return out;
      }
      if (!have_best ||
          st.regular_fixed.size() * best_f > best_rf * st.fixed.size()) {
        have_best = true;
        best_rf = st.regular_fixed.size();
        best_f = st.fixed.size();
        best_c = st.c;
        best_nt = nt;
        out.h = h;
        out.n_ord = cand.n_ord;
      }
    }
  }
  if (!have_best)
    throw std::runtime_error("coset_power_bound_check: no mu-stable torus for any representative");
  out.certified = false;
  out.c = best_c;
  out.normalizer_index = best_nt;
  out.census = coset_power_census(h_group, normal, coset_elt, m);
  out.bound_den = Int(4) * Int(static_cast<unsigned long>(out.c)) *
                  Int(static_cast<unsigned long>(best_nt));
  out.bound_num = out.bound_den - 1;
  out.bound_holds = Int(static_cast<unsigned long>(out.census)) * out.bound_den <=
                    out.bound_num * Int(static_cast<unsigned long>(g_sub.size()));
  return out;
}

}  // namespace gls
