#pragma once

#include <cmath>
#include <complex>
#include <unordered_map>
#include <vector>

#include "gpahcs/errors.hpp"
#include "gpahcs/quadrature.hpp"
#include "gpahcs/specfun.hpp"
#include "gpahcs/states.hpp"

namespace gpahcs {

// Stieltjes moment problem for one family/f/m/p instance.  The auxiliary
// density h_p is a Meijer G with the parameter lists below; g_p = h_p /
// exp(log_h_over_g), and the weight is assembled from g_p and the
// normalization series.
struct MomentProblem {
  FamilySpec family = FamilySpec::hermite();
  FChoice f = FChoice::constant(1.0);
  int m = 0, p = 0;
  int g_m = 2, g_n = 0;
  std::vector<double> g_a, g_b;
  double arg_scale = 1.0;     // the G argument is arg_scale * x
  double log_h_over_g = 0.0;  // ln(h_p / g_p)

  GParams g_at(double x) const {
    return GParams(g_m, g_n, g_a, g_b, arg_scale * x);
  }
  // x^p g_p absorbed into shifted lists via the G multiplication formula:
  // x^alpha G(x | a; b) = G(x | a+alpha; b+alpha).
  GParams g_shifted_at(double x) const {
    std::vector<double> a = g_a, b = g_b;
    for (double& v : a) v += p;
    for (double& v : b) v += p;
    return GParams(g_m, g_n, std::move(a), std::move(b), arg_scale * x);
  }

  // ln |K_n^p(m)|^2, the n-th Stieltjes moment (strictly positive).
  double log_moment(int n) const {
    return 2.0 * log_k_np(family, f, m, p, n).log_abs;
  }
  double moment(int n) const { return std::exp(log_moment(n)); }
};

inline MomentProblem make_moment_problem(const FamilySpec& fam,
                                         const FChoice& f, int m, int p) {
  if (m < 0 || p < 0) throw domain_error("make_moment_problem: negative index");
  MomentProblem mp;
  mp.family = fam;
  mp.f = f;
  mp.m = m;
  mp.p = p;
  const double dp = p;
  if (!fam.quadratic_sigma()) {
    if (f.kind != FChoice::Kind::constant)
      throw domain_error("make_moment_problem: sqrt_linear needs quadratic sigma");
    // Mellin transform Gamma(s-p)^2 / Gamma(s), argument |c|^2 x.
    mp.g_m = 2;
    mp.g_n = 0;
    mp.g_a = {0.0};
    mp.g_b = {-dp, -dp};
    mp.arg_scale = f.c * f.c;
    mp.log_h_over_g = -2.0 * (p + 1.0) * std::log(std::abs(f.c));
    return mp;
  }
  const double mu = fam.mu;
  const double w = 2.0 * m + mu;  // 2m + mu
  if (f.kind == FChoice::Kind::constant) {
    // Gamma(s-p)^2 Gamma(s-p-1+2m+mu)^2 / (Gamma(s) Gamma(s-1+2m+mu)).
    mp.g_m = 4;
    mp.g_n = 0;
    mp.g_a = {0.0, w - 1.0};
    mp.g_b = {-dp, -dp, w - 1.0 - dp, w - 1.0 - dp};
    mp.arg_scale = f.c * f.c;
    mp.log_h_over_g =
        log_gamma(w) - 2.0 * (p + 1.0) * std::log(std::abs(f.c));
  } else {
    const double nu = 0.5 * mu;
    // Extra Gamma(s-p-1+m+nu) in the denominator.
    mp.g_m = 4;
    mp.g_n = 0;
    mp.g_a = {0.0, w - 1.0, m + nu - 1.0 - dp};
    mp.g_b = {-dp, -dp, w - 1.0 - dp, w - 1.0 - dp};
    mp.arg_scale = 1.0;
    mp.log_h_over_g = log_gamma(w) - log_gamma(m + nu);
  }
  return mp;
}

// h_p(x; m): the Meijer G at the scaled argument.
inline double h_function(const MomentProblem& mp, double x) {
  if (!(x > 0.0)) throw domain_error("h_function: x must be positive");
  return meijer_g(mp.g_at(x)).value;
}

inline double g_function(const MomentProblem& mp, double x) {
  return h_function(mp, x) * std::exp(-mp.log_h_over_g);
}

// omega_p(x) = (x^p / pi) g_p(x) / N_p^2(x).  The x^p factor is applied by
// shifting the parameter lists rather than multiplying sampled values.
inline double weight(const MomentProblem& mp, double x) {
  if (!(x > 0.0)) throw domain_error("weight: x must be positive");
  const double g_shift = meijer_g(mp.g_shifted_at(x)).value;
  CoefficientTable kt(mp.family, mp.f, mp.m, mp.p);
  const double log_s = detail::log_norm_series(kt, x).log_value;
  const double log_scale =
      -mp.log_h_over_g - mp.p * std::log(mp.arg_scale) + log_s;
  return g_shift * std::exp(log_scale) / kPi;
}

struct MomentReport {
  int n_max = 0;
  std::vector<double> rel_errors;
  double max_rel_error = 0.0;
  bool passed(double tol) const { return max_rel_error < tol; }
};

// Round trip int_0^inf x^{n+p} g_p(x) dx == |K_n^p|^2 for n = 0..n_max,
// by adaptive quadrature with an empirical decay-tail estimate.
inline MomentReport verify_moments(const MomentProblem& mp, int n_max,
                                   double quad_rel_tol = 1e-8) {
  MomentReport rep;
  rep.n_max = n_max;
  std::unordered_map<double, double> cache;
  auto g_cached = [&](double x) -> double {
    auto it = cache.find(x);
    if (it != cache.end()) return it->second;
    const double v = g_function(mp, x);
    cache.emplace(x, v);
    return v;
  };
  for (int n = 0; n <= n_max; ++n) {
    const double target = mp.moment(n);
    try {
      auto integrand = [&](double x) {
        return (x > 0.0) ? std::pow(x, n + mp.p) * g_cached(x) : 0.0;
      };
      const double x0 = std::max(1.0, static_cast<double>(n + mp.p));
      QuadResult q = integrate_decaying(integrand, x0, quad_rel_tol,
                                        1e-13 * target);
      const double rel = std::abs(q.value - target) / target;
      rep.rel_errors.push_back(rel);
      rep.max_rel_error = std::max(rep.max_rel_error, rel);
    } catch (const convergence_error& e) {
      throw convergence_error("verify_moments: quadrature failed at n = " +
                                  std::to_string(n) + ": " + e.what(),
                              e.partial_estimate);
    }
  }
  return rep;
}

struct ResolutionReport {
  int basis_size = 0;
  double max_diag_dev = 0.0;
  double max_offdiag_abs = 0.0;
};

// Forms M_{n,n'} = int d2z w_p(|z|^2) <n+p|z><z|n'+p> on a radial-angular
// product grid.  Diagonals must be 1; off-diagonals vanish by the angular
// phase integral.
inline ResolutionReport resolution_of_identity_check(const MomentProblem& mp,
                                                     int basis_size,
                                                     double quad_rel_tol = 1e-7) {
  if (basis_size < 1)
    throw domain_error("resolution_of_identity_check: basis_size >= 1");
  ResolutionReport rep;
  rep.basis_size = basis_size;

  CoefficientTable kt(mp.family, mp.f, mp.m, mp.p);
  std::unordered_map<double, double> cache;
  // omega(x) * N^2(x): the radial profile shared by every matrix element.
  auto profile = [&](double x) -> double {
    auto it = cache.find(x);
    if (it != cache.end()) return it->second;
    const double v =
        weight(mp, x) * std::exp(-detail::log_norm_series(kt, x).log_value);
    cache.emplace(x, v);
    return v;
  };

  // Diagonals via radial quadrature (angular integral is exactly 2 pi).
  std::vector<double> log_k(basis_size);
  for (int n = 0; n < basis_size; ++n) log_k[n] = kt.log_k(n).log_abs;
  for (int n = 0; n < basis_size; ++n) {
    auto integrand = [&](double x) {
      return x > 0.0
                 ? kPi * profile(x) *
                       std::exp(n * std::log(x) - 2.0 * log_k[n])
                 : 0.0;
    };
    const double x0 = std::max(1.0, static_cast<double>(n + mp.p));
    QuadResult q = integrate_decaying(integrand, x0, quad_rel_tol, 1e-12);
    rep.max_diag_dev = std::max(rep.max_diag_dev, std::abs(q.value - 1.0));
  }

  // Off-diagonals on a fixed radial x angular grid; the uniform angular rule
  // annihilates e^{i(n-n')theta} to roundoff.
  double x_hi = 1.0;
  while (x_hi < 1e6) {
    const double probe = profile(x_hi) *
                         std::exp((basis_size - 1) * std::log(x_hi) -
                                  2.0 * log_k[basis_size - 1]);
    if (std::abs(probe) * x_hi < 1e-10) break;
    x_hi *= 2.0;
  }
  const int n_ang = 4 * basis_size + 8;
  const int panels = 160;
  const double ratio = 0.85;
  std::vector<std::vector<std::complex<double>>> mat(
      basis_size, std::vector<std::complex<double>>(basis_size, {0.0, 0.0}));
  double hi = x_hi;
  for (int k = 0; k < panels && hi > 1e-12 * x_hi; ++k) {
    const double lo = hi * ratio;
    for (int i = 0; i < 8; ++i) {
      for (int sgn : {-1, +1}) {
        const double x = 0.5 * (hi + lo) +
                         sgn * 0.5 * (hi - lo) * detail::kGL16Node[i];
        const double wq = 0.5 * (hi - lo) * detail::kGL16Weight[i];
        const double pr = profile(x);
        for (int n = 0; n < basis_size; ++n)
          for (int np = 0; np < n; ++np) {
            // angular sum of e^{i(n-np)theta} on the uniform grid
            std::complex<double> ang(0.0, 0.0);
            for (int j = 0; j < n_ang; ++j)
              ang += std::polar(1.0, (n - np) * 2.0 * kPi * j / n_ang);
            ang *= 2.0 * kPi / n_ang;
            const double radial =
                0.5 * wq * pr *
                std::exp(0.5 * (n + np) * std::log(x) - log_k[n] - log_k[np]);
            mat[n][np] += radial * ang;
          }
      }
    }
    hi = lo;
  }
  for (int n = 0; n < basis_size; ++n)
    for (int np = 0; np < n; ++np)
      rep.max_offdiag_abs =
          std::max(rep.max_offdiag_abs, std::abs(mat[n][np]));
  return rep;
}

}  // namespace gpahcs
