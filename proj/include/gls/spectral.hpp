#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gls/bigmat.hpp"
#include "gls/modgroup.hpp"

namespace gls {

/// Right-multiplication Cayley graph of a finite quotient. Regular of degree
/// |Sigma| with multiset semantics (duplicate generators give multi-edges,
/// identity gives self-loops). Symmetric whenever Sigma is.
struct CayleyGraph {
  std::uint32_t nv = 0;
  std::uint32_t deg = 0;
  std::vector<std::uint32_t> nbr;  // nv x deg, row-major
  std::uint32_t start = 0;         // identity vertex
  int odd_girth = -1;              // -1 when unknown under the search cap

  std::uint32_t neighbor(std::uint32_t v, std::uint32_t slot) const {
    return nbr[static_cast<std::size_t>(v) * deg + slot];
  }
};

CayleyGraph build_cayley(const QuotientGroup& g, const std::vector<ModMatrix>& sigma,
                         int odd_girth_cap = 9);

struct SpectralReport {
  double lambda1 = 1.0;
  double lambda2 = 0.0;
  double lambda_min = 0.0;
  double gap = 0.0;    // 1 - lambda2
  double alpha = 0.0;  // max(|lambda2|, |lambda_min|)
  std::string method;  // "exact-dense" or "iterative"
  double residual = 0.0;
  bool converged = true;
  long iterations = 0;
};

struct SpectrumOptions {
  std::uint32_t dense_limit = 4000;
  double tol = 1e-8;
  long max_iterations = 200000;
};

/// Dense symmetric eigensolve below dense_limit vertices, orthogonal-deflation
/// power iteration above it. A non-converged iterative solve is reported with
/// converged = false and carries the best estimate.
SpectralReport spectrum(const CayleyGraph& x, const SpectrumOptions& opts = {});

/// (2 / |Sigma|^l - 1)^{1/l}: lower bound for lambda_min over all finite
/// quotients, from the shortest odd cycle length l.
double min_eig_floor(std::uint32_t sigma_size, int l);

/// Distribution of w_k started at the identity; k sparse matrix-vector
/// products. The parallel kernel is deterministic (fixed per-entry
/// summation order); the serial twin is the reference.
std::vector<double> walk_distribution(const CayleyGraph& x, long k);
std::vector<double> walk_distribution_serial(const CayleyGraph& x, long k);
std::vector<Rat> walk_distribution_exact(const CayleyGraph& x, long k);

struct EquidistributionRow {
  long k;
  double residual;  // |P(w_k in T) - |T|/|Gamma||
  double bound;     // sqrt(|Gamma|) * alpha^k
  bool pass;
};

/// Checks |P(w_k in T) - |T|/|Gamma|| <= sqrt(|Gamma|) alpha^k + slack for
/// every k <= k_max.
std::vector<EquidistributionRow> equidistribution_check(const CayleyGraph& x, double alpha,
                                                        const std::vector<std::uint32_t>& subset,
                                                        long k_max, double slack = 1e-9);

}  // namespace gls
