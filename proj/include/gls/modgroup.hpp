#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gls/bigmat.hpp"

namespace gls {

/// Square matrix of residues mod q, dimension 1..3 (row-major entries).
struct ModMatrix {
  std::uint32_t n = 0;
  std::uint32_t q = 0;
  std::array<std::uint32_t, 9> e{};

  std::uint32_t& at(int i, int j) { return e[static_cast<std::size_t>(i) * n + j]; }
  std::uint32_t at(int i, int j) const { return e[static_cast<std::size_t>(i) * n + j]; }
  bool operator==(const ModMatrix& o) const { return n == o.n && q == o.q && e == o.e; }
std::string str() const;
};

ModMatrix mod_identity(std::uint32_t n, std::uint32_t q);
ModMatrix reduce(const BigMatrix& m, std::uint32_t q);
ModMatrix mmul(const ModMatrix& a, const ModMatrix& b);
ModMatrix mpow(ModMatrix base, std::uint64_t m);
std::uint32_t mod_det(const ModMatrix& m);
ModMatrix mod_inverse(const ModMatrix& m);  // requires det a unit mod q
bool is_unit_mod(std::uint32_t x, std::uint32_t q);

/// Positional base-q packing, entry (0,0) most significant, so packed order
/// equals row-major lexicographic order.
std::uint64_t pack(const ModMatrix& m);
ModMatrix unpack(std::uint64_t key, std::uint32_t n, std::uint32_t q);

/// CRT split/combine for coprime moduli (entrywise).
ModMatrix crt_combine(const ModMatrix& a, const ModMatrix& b);

/// A fully materialized finite matrix group mod q with index lookup.
/// Projective groups store the lexicographically-first scalar multiple as
/// the canonical representative. Immutable after construction.
class QuotientGroup {
 public:
  std::uint32_t n = 0;
  std::uint32_t q = 0;
  bool projective = false;
  std::vector<std::uint64_t> elems;  // canonical packed elements
  std::unordered_map<std::uint64_t, std::uint32_t> index;
  std::vector<std::uint32_t> gens;  // indices of the construction generators
  std::uint32_t id_index = 0;

  std::size_t size() const { return elems.size(); }
  ModMatrix element(std::uint32_t i) const { return unpack(elems[i], n, q); }
  std::uint64_t canon_key(const ModMatrix& m) const;
  std::optional<std::uint32_t> find(const ModMatrix& m) const;
  std::uint32_t index_of(const ModMatrix& m) const;  // throws if absent

  std::uint32_t mul(std::uint32_t i, std::uint32_t j) const;
  std::uint32_t inv(std::uint32_t i) const;
  std::uint32_t pow(std::uint32_t i, std::uint64_t m) const;
  std::uint64_t order_of(std::uint32_t i) const;
  std::uint64_t exponent() const;  // lcm of element orders

  /// Small generating set recovered greedily (useful for enumerated groups).
  std::vector<std::uint32_t> find_generators() const;
};

inline constexpr std::size_t kDefaultBudget = 5'000'000;

/// Breadth-first closure of the generators mod q.
QuotientGroup generate(const std::vector<ModMatrix>& gens, std::uint32_t q,
                       std::size_t budget = kDefaultBudget, bool projective = false);

QuotientGroup enumerate_sl2(std::uint32_t p, std::size_t budget = kDefaultBudget);
QuotientGroup enumerate_gl2(std::uint32_t p, std::size_t budget = kDefaultBudget);
QuotientGroup enumerate_psl2(std::uint32_t p, std::size_t budget = kDefaultBudget);
QuotientGroup enumerate_pgl2(std::uint32_t p, std::size_t budget = kDefaultBudget);

/// |{x^m : x in G}| by a single pass with a seen-set. The parallel kernel
/// partitions the element range; the serial twin is the reference.
std::size_t power_census(const QuotientGroup& g, std::uint64_t m);
std::size_t power_census_serial(const QuotientGroup& g, std::uint64_t m);

bool is_subgroup(const QuotientGroup& h, const std::vector<std::uint32_t>& sub);
bool is_normal(const QuotientGroup& h, const std::vector<std::uint32_t>& sub);

/// |{x^m : x in N*rep}| inside h_group; requires normal to be a verified
/// normal subgroup of h_group.
std::size_t coset_power_census(const QuotientGroup& h_group,
                               const std::vector<std::uint32_t>& normal, std::uint32_t rep,
                               std::uint64_t m);
std::size_t coset_power_census_serial(const QuotientGroup& h_group,
                                      const std::vector<std::uint32_t>& normal, std::uint32_t rep,
                                      std::uint64_t m);

/// True iff |<gens> mod pq| = |<gens> mod p| * |<gens> mod q|.
bool crt_order_check(const std::vector<BigMatrix>& gens, std::uint32_t p, std::uint32_t q,
                     std::size_t budget = kDefaultBudget);

/// A representative of the coset whose order has all prime divisors dividing
/// [G:H]; the exponent construction raises coset_elt to a power killing every
/// other prime while fixing the coset.
std::uint32_t coset_low_order_rep(const QuotientGroup& g, const std::vector<std::uint32_t>& normal,
                                  std::uint32_t coset_elt);

struct TorusReport {
  std::vector<std::uint32_t> torus;       // T, ascending element indices
  std::vector<std::uint32_t> mu;          // permutation of G induced by conjugation by h
  std::uint32_t n_ord = 0;                // order of mu
  std::vector<std::uint32_t> fixed;       // T_mu
  std::vector<std::uint32_t> regular_fixed;  // T_{mu,n}
  std::uint64_t c = 0;                    // #{t in T : ord(t) | n_ord}
  std::uint64_t normalizer_index = 0;     // [N : T]
  // bound = 1 - 1/(4 c [N:T]) as an exact rational
  Int bound_num, bound_den;
  bool lemma61_ok = false;
  bool lemma62_ok = false;
  bool lemma63_applicable = false;  // |T_{mu,n}| > |T_mu| / 2
  bool lemma63_ok = false;          // vacuously true when not applicable
};

/// All maximal tori (centralizers of regular semisimple elements), each as a
/// sorted index vector.
std::vector<std::vector<std::uint32_t>> maximal_tori(const QuotientGroup& g);

/// Locates a mu-stable maximal torus for the conjugation action of h and
/// brute-force-verifies the torus lemmas on it. Among stable tori prefers
/// one with 4|T_{mu,n}| >= 3|T_mu|, then the largest fixed-regular ratio.
TorusReport torus_analysis(const QuotientGroup& g, const ModMatrix& h, std::uint32_t n_ord);

struct CosetPowerBound {
  bool certified = false;       // hypotheses (m | |T_mu|, 4|T_{mu,n}| >= 3|T_mu|) hold
  ModMatrix h;                  // chosen coset representative
  std::uint32_t n_ord = 0;
  std::uint64_t c = 0, normalizer_index = 0;
  std::size_t census = 0;
  Int bound_num, bound_den;     // (4c[N:T]-1) / (4c[N:T]) of |G|
  bool bound_holds = false;     // census * den <= num * |G| (exact)
};

/// Searches coset representatives (ascending conjugation order) and mu-stable
/// tori for a pair certifying the coset power bound, then measures the coset
/// census against it. normal indexes G inside h_group.
CosetPowerBound coset_power_bound_check(const QuotientGroup& g_sub, const QuotientGroup& h_group,
                                        const std::vector<std::uint32_t>& normal,
                                        std::uint32_t coset_elt, std::uint64_t m);

}  // namespace gls
