#include "gls/spectral.hpp"

#include <Eigen/Dense>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <deque>

#include "gls/errors.hpp"

namespace gls {

CayleyGraph build_cayley(const QuotientGroup& g, const std::vector<ModMatrix>& sigma,
                         int odd_girth_cap) {
  if (sigma.empty()) throw precondition_error("build_cayley: empty generating multiset");
  CayleyGraph x;
  x.nv = static_cast<std::uint32_t>(g.size());
  x.deg = static_cast<std::uint32_t>(sigma.size());
  x.start = g.id_index;
  x.nbr.resize(static_cast<std::size_t>(x.nv) * x.deg);
  std::vector<std::uint32_t> gen_idx;
  for (const auto& s : sigma) gen_idx.push_back(g.index_of(s));  // throws if not in group
  for (std::uint32_t v = 0; v < x.nv; ++v)
    for (std::uint32_t j = 0; j < x.deg; ++j)
      x.nbr[static_cast<std::size_t>(v) * x.deg + j] = g.mul(v, gen_idx[j]);

  // shortest odd closed walk through the identity (vertex-transitive, so
  // global): BFS on the parity double cover, capped
  const std::uint32_t unvisited = ~0u;
  std::vector<std::uint32_t> dist(2 * static_cast<std::size_t>(x.nv), unvisited);
  std::deque<std::uint64_t> queue;
  dist[2 * static_cast<std::size_t>(x.start)] = 0;
  queue.push_back(2 * static_cast<std::uint64_t>(x.start));
  x.odd_girth = -1;
  while (!queue.empty()) {
    const std::uint64_t s = queue.front();
    queue.pop_front();
    const std::uint32_t v = static_cast<std::uint32_t>(s >> 1), par = s & 1;
    const std::uint32_t d = dist[s];
    if (static_cast<int>(d) >= odd_girth_cap) continue;
    for (std::uint32_t j = 0; j < x.deg; ++j) {
      const std::uint32_t w = x.neighbor(v, j);
      const std::uint64_t t = 2 * static_cast<std::uint64_t>(w) + (par ^ 1);
      if (dist[t] == unvisited) {
        dist[t] = d + 1;
        queue.push_back(t);
      }
    }
  }
  const std::uint32_t odd_dist = dist[2 * static_cast<std::size_t>(x.start) + 1];
  if (odd_dist != unvisited && static_cast<int>(odd_dist) <= odd_girth_cap)
    x.odd_girth = static_cast<int>(odd_dist);
  return x;
}

namespace {

void matvec(const CayleyGraph& x, const std::vector<double>& in, std::vector<double>& out) {
  const double w = 1.0 / x.deg;
  const std::int64_t nv = x.nv;
#pragma omp parallel for schedule(static)
  for (std::int64_t v = 0; v < nv; ++v) {
    double s = 0.0;
    const std::uint32_t* row = &x.nbr[static_cast<std::size_t>(v) * x.deg];
    for (std::uint32_t j = 0; j < x.deg; ++j) s += in[row[j]];
    out[static_cast<std::size_t>(v)] = s * w;
  }
}

void project_out_uniform(std::vector<double>& v) {
  double mean = 0.0;
  for (double a : v) mean += a;
  mean /= static_cast<double>(v.size());
  for (double& a : v) a -= mean;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

// Largest eigenvalue of (A + shift I)/(1 + |shift|) restricted to the
// complement of the uniform vector; used with shift = +1 for lambda2 and
// shift = -1 (negated operator) for lambda_min.
struct IterResult {
  double value;
  double residual;
  long iterations;
  bool converged;
};

IterResult power_extremal(const CayleyGraph& x, bool top, double tol, long max_iter) {
  const std::size_t n = x.nv;
  std::vector<double> v(n), av(n), bv(n);
  std::uint64_t s = 0x9e3779b97f4a7c15ULL + n;
  for (std::size_t i = 0; i < n; ++i) {
    s ^= s >> 12;
    s ^= s << 25;
    s ^= s >> 27;
    v[i] = static_cast<double>((s * 0x2545f4914f6cdd1dULL) >> 11) / 9.0e18 - 0.5;
  }
  project_out_uniform(v);
  double nrm = norm2(v);
  for (double& a : v) a /= nrm;
  double theta = 0.0, res = 1.0;
  long it = 0;
  for (; it < max_iter; ++it) {
    matvec(x, v, av);
    // B = (A + I)/2 for the top end, (I - A)/2 for the bottom end
    for (std::size_t i = 0; i < n; ++i) bv[i] = top ? 0.5 * (av[i] + v[i]) : 0.5 * (v[i] - av[i]);
    project_out_uniform(bv);
    theta = 0.0;
    for (std::size_t i = 0; i < n; ++i) theta += v[i] * bv[i];
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = bv[i] - theta * v[i];
      r += d * d;
    }
    res = std::sqrt(r);
    if (res <= tol) break;
    nrm = norm2(bv);
    if (nrm == 0.0) break;
    for (std::size_t i = 0; i < n; ++i) v[i] = bv[i] / nrm;
  }
  const double lam = top ? 2.0 * theta - 1.0 : 1.0 - 2.0 * theta;
  return {lam, res, it, res <= tol};
}

}  // namespace

SpectralReport spectrum(const CayleyGraph& x, const SpectrumOptions& opts) {
  SpectralReport r;
  if (x.nv == 1) {
    r.lambda2 = 1.0;
    r.lambda_min = 1.0;
    r.gap = 0.0;
    r.alpha = 1.0;
    r.method = "exact-dense";
    // single vertex: the only eigenvalue is 1
    r.lambda2 = 1.0;
    r.lambda_min = 1.0;
    return r;
  }
  if (x.nv <= opts.dense_limit) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(x.nv, x.nv);
    const double w = 1.0 / x.deg;
    for (std::uint32_t v = 0; v < x.nv; ++v)
      for (std::uint32_t j = 0; j < x.deg; ++j) a(v, x.neighbor(v, j)) += w;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    r.lambda1 = ev(x.nv - 1);
    r.lambda2 = ev(x.nv - 2);
    r.lambda_min = ev(0);
    r.method = "exact-dense";
    r.residual = 0.0;
  } else {
    const auto top = power_extremal(x, true, opts.tol, opts.max_iterations);
    const auto bot = power_extremal(x, false, opts.tol, opts.max_iterations);
    r.lambda2 = top.value;
    r.lambda_min = bot.value;
    r.method = "iterative";
    r.residual = std::max(top.residual, bot.residual);
    r.iterations = top.iterations + bot.iterations;
    r.converged = top.converged && bot.converged;
  }
  r.gap = 1.0 - r.lambda2;
  r.alpha = std::max(std::abs(r.lambda2), std::abs(r.lambda_min));
  return r;
}

double min_eig_floor(std::uint32_t sigma_size, int l) {
  if (l < 1 || l % 2 == 0) throw precondition_error("min_eig_floor: l must be odd and positive");
  if (sigma_size < 1) throw precondition_error("min_eig_floor: sigma_size >= 1 required");
  const double x = 2.0 / std::pow(static_cast<double>(sigma_size), l) - 1.0;
  const double mag = std::pow(std::abs(x), 1.0 / l);
  return x < 0 ? -mag : mag;
}

std::vector<double> walk_distribution(const CayleyGraph& x, long k) {
  if (k < 0) throw precondition_error("walk_distribution: k >= 0 required");
  std::vector<double> cur(x.nv, 0.0), next(x.nv, 0.0);
  cur[x.start] = 1.0;
  for (long step = 0; step < k; ++step) {
    matvec(x, cur, next);  // symmetric multiset: pull form equals push form
    cur.swap(next);
  }
  return cur;
}

std::vector<double> walk_distribution_serial(const CayleyGraph& x, long k) {
  if (k < 0) throw precondition_error("walk_distribution: k >= 0 required");
  std::vector<double> cur(x.nv, 0.0), next(x.nv, 0.0);
  cur[x.start] = 1.0;
  const double w = 1.0 / x.deg;
  for (long step = 0; step < k; ++step) {
    for (std::uint32_t v = 0; v < x.nv; ++v) {
      double s = 0.0;
      for (std::uint32_t j = 0; j < x.deg; ++j) s += cur[x.neighbor(v, j)];
      next[v] = s * w;
    }
    cur.swap(next);
  }
  return cur;
}

std::vector<Rat> walk_distribution_exact(const CayleyGraph& x, long k) {
  if (k < 0) throw precondition_error("walk_distribution: k >= 0 required");
  std::vector<Rat> cur(x.nv, Rat(0)), next(x.nv, Rat(0));
  cur[x.start] = 1;
  const Rat w(1, x.deg);
  for (long step = 0; step < k; ++step) {
    for (std::uint32_t v = 0; v < x.nv; ++v) {
      Rat s = 0;
      for (std::uint32_t j = 0; j < x.deg; ++j) s += cur[x.neighbor(v, j)];
      next[v] = s * w;
    }
    cur.swap(next);
  }
  return cur;
}

std::vector<EquidistributionRow> equidistribution_check(const CayleyGraph& x, double alpha,
                                                        const std::vector<std::uint32_t>& subset,
                                                        long k_max, double slack) {
  std::vector<std::uint8_t> in_t(x.nv, 0);
  for (std::uint32_t v : subset) in_t[v] = 1;
  const double target = static_cast<double>(subset.size()) / x.nv;
  const double root = std::sqrt(static_cast<double>(x.nv));
  std::vector<EquidistributionRow> rows;
  std::vector<double> cur(x.nv, 0.0), next(x.nv, 0.0);
  cur[x.start] = 1.0;
  double bound = root;
  for (long k = 0; k <= k_max; ++k) {
    if (k > 0) {
      matvec(x, cur, next);
      cur.swap(next);
      bound *= alpha;
    }
    double p = 0.0;
    for (std::uint32_t v = 0; v < x.nv; ++v)
      if (in_t[v]) p += cur[v];
    const double resid = std::abs(p - target);
    rows.push_back({k, resid, bound, resid <= bound + slack});
  }
  return rows;
}

}  // namespace gls
