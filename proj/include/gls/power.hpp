#pragma once

#include <optional>
#include <vector>

#include "gls/bigmat.hpp"

namespace gls {

/// Coefficients (ascending) of the d-th cyclotomic polynomial.
std::vector<Int> cyclotomic(int d);

int euler_phi(int d);

/// lcm of all d with phi(d) <= n. For every virtually unipotent g of
/// dimension n, g^result is unipotent.
Int unipotence_exponent(int n);

/// True iff every eigenvalue is a root of unity, i.e. the characteristic
/// polynomial is a product of cyclotomic polynomials Phi_d with phi(d) <= n.
/// For det-1 2x2 matrices this is equivalent to |trace| <= 2.
bool is_virtually_unipotent(const BigMatrix& m);

/// Constants of the prime-exponent cutoff for walk-generated powers.
/// norm_bound c is the max operator-norm upper bound over the generators
/// (Frobenius norm, except +-I whose operator norm is exactly 1); trace_gap
/// is (3+sqrt 5)/2, the smallest dominant-eigenvalue modulus of a
/// non-virtually-unipotent element of SL2(Z).
struct PowerCutoff {
  double norm_bound;
  double trace_gap;
  double s;  // log(norm_bound) / log(trace_gap)
};

PowerCutoff make_power_cutoff(const std::vector<BigMatrix>& sigma);

/// floor(s*k): any element reachable in k steps that is an m-th power and
/// not virtually unipotent has a prime witness m <= result.
long power_cutoff(const std::vector<BigMatrix>& sigma, long k);

/// Trace of B^m as a polynomial in u = trace(B) for det(B) = 1:
/// D_0 = 2, D_1 = u, D_{j+1} = u D_j - D_{j-1}.
Int dickson(const Int& u, long m);

/// Second-kind companion: c_0 = 1, c_1 = u, c_{j+1} = u c_j - c_{j-1};
/// B^j = c_{j-1}(u) B - c_{j-2}(u) I.
Int dickson_second(const Int& u, long m);

/// Exact m-th root in SL2(Z) of a hyperbolic matrix (|trace| > 2), m >= 2.
/// Solves D_m(u) = trace(a) by monotone integer bisection, recovers
/// B = (a + c_{m-2}(u) I) / c_{m-1}(u), and verifies B^m = a exactly.
/// Empty result means no root exists; precondition violations throw.
std::optional<BigMatrix> mth_root_sl2(const BigMatrix& a, long m);

struct PowerWitness {
  bool is_power = false;
  long exponent = 0;
  BigMatrix base;  // verified: base^exponent == a whenever is_power
};

/// Exact decision of membership in the set of proper powers of SL2(Z),
/// with a verified witness on the positive side. prime_bound caps the
/// Dickson search in the hyperbolic case (use power_cutoff for
/// walk-generated inputs).
PowerWitness proper_power_witness_sl2z(const BigMatrix& a, long prime_bound);

bool is_proper_power_sl2z(const BigMatrix& a, long prime_bound);

/// Exact decision of a in SL2(Z)^m for a fixed exponent m >= 2.
bool is_m_power_sl2z(const BigMatrix& a, long m);

}  // namespace gls
