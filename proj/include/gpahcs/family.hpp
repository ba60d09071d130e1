#pragma once

#include <cmath>
#include <string>

#include "gpahcs/errors.hpp"
#include "gpahcs/specfun.hpp"

namespace gpahcs {

enum class FamilyKind { hermite, laguerre, jacobi, hypergeometric };

inline const char* to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::hermite: return "hermite";
    case FamilyKind::laguerre: return "laguerre";
    case FamilyKind::jacobi: return "jacobi";
    case FamilyKind::hypergeometric: return "hypergeometric";
  }
  return "?";
}

// Spectral data of one classical family.  Everything downstream depends only
// on sigma'', tau' and mu; alpha/beta are kept as the construction-time
// parametrization.
struct FamilySpec {
  FamilyKind kind = FamilyKind::hermite;
  double alpha = 0.0;
  double beta = 0.0;
  double sigma_pp = 0.0;  // sigma''
  double tau_p = -1.0;    // tau'
  double mu = 0.0;        // alpha + beta + 2 (quadratic-sigma families)

  static FamilySpec hermite() {
    FamilySpec s;
    s.kind = FamilyKind::hermite;
    return s;
  }
  static FamilySpec laguerre(double alpha) {
    FamilySpec s;
    s.kind = FamilyKind::laguerre;
    s.alpha = alpha;
    return s;
  }
  static FamilySpec jacobi(double alpha, double beta) {
    return quadratic(FamilyKind::jacobi, alpha, beta, alpha + beta + 2.0);
  }
  static FamilySpec hypergeometric(double alpha, double beta) {
    return quadratic(FamilyKind::hypergeometric, alpha, beta, alpha + beta + 2.0);
  }
  // mu stored directly; (alpha, beta) recorded as the symmetric split.
  static FamilySpec jacobi_mu(double mu) {
    return quadratic(FamilyKind::jacobi, 0.5 * mu - 1.0, 0.5 * mu - 1.0, mu);
  }
  static FamilySpec hypergeometric_mu(double mu) {
    return quadratic(FamilyKind::hypergeometric, 0.5 * mu - 1.0, 0.5 * mu - 1.0, mu);
  }

  bool quadratic_sigma() const {
    return kind == FamilyKind::jacobi || kind == FamilyKind::hypergeometric;
  }

 private:
  static FamilySpec quadratic(FamilyKind kind, double alpha, double beta,
                              double mu) {
    if (!(mu > 0.0))
      throw domain_error("FamilySpec: weight positivity requires mu > 0");
    FamilySpec s;
    s.kind = kind;
    s.alpha = alpha;
    s.beta = beta;
    s.sigma_pp = -2.0;
    s.tau_p = -mu;
    s.mu = mu;
    return s;
  }
};

// lambda_l = -l(l-1) sigma''/2 - l tau'.
inline double eigenvalue(const FamilySpec& fam, int l) {
  if (l < 0) throw domain_error("eigenvalue: l must be nonnegative");
  return -0.5 * l * (l - 1.0) * fam.sigma_pp - l * fam.tau_p;
}

// e_n = lambda_{m+n} - lambda_m, the n-th excitation above the m-chain ground.
inline double excitation(const FamilySpec& fam, int m, int n) {
  if (m < 0 || n < 0) throw domain_error("excitation: negative index");
  return eigenvalue(fam, m + n) - eigenvalue(fam, m);
}

// ln(eps_n) = ln(e_1 e_2 ... e_n), as a running log sum; eps_0 = 1.
inline double log_excitation_product(const FamilySpec& fam, int m, int n) {
  double acc = 0.0;
  for (int k = 1; k <= n; ++k) acc += std::log(excitation(fam, m, k));
  return acc;
}

// r_k = lambda_k - lambda_{k-1} = -(k-1) sigma'' - tau', k >= 1.
inline double spectral_gap(const FamilySpec& fam, int k) {
  if (k < 1) throw domain_error("spectral_gap: k must be positive");
  return -(k - 1.0) * fam.sigma_pp - fam.tau_p;
}

// xi(r; b, d) = b r + d, the linear form behind the non-constant f choice.
inline double xi_linear(double r, double b, double d) { return b * r + d; }

// The analytic function f entering the expansion coefficients: either a
// nonzero constant, or sqrt(xi(r; 1/2, -1)) = sqrt(r/2 - 1), whose product
// over the coefficient chain collapses to Gamma(n+m+nu)/Gamma(m+nu) with
// nu = mu/2.
struct FChoice {
  enum class Kind { constant, sqrt_linear };
  Kind kind = Kind::constant;
  double c = 1.0;

  static FChoice constant(double c) {
    if (c == 0.0) throw domain_error("FChoice: constant c must be nonzero");
    FChoice f;
    f.kind = Kind::constant;
    f.c = c;
    return f;
  }
  static FChoice sqrt_linear() {
    FChoice f;
    f.kind = Kind::sqrt_linear;
    return f;
  }
};

inline const char* to_string(FChoice::Kind k) {
  return k == FChoice::Kind::constant ? "constant" : "sqrt_linear";
}

// f evaluated at one gap value r.
inline double f_value(const FamilySpec& fam, const FChoice& f, double r) {
  if (f.kind == FChoice::Kind::constant) return f.c;
  if (!fam.quadratic_sigma())
    throw domain_error("FChoice: sqrt_linear requires a quadratic-sigma family");
  const double xi = xi_linear(r, 0.5, -1.0);
  if (!(xi > 0.0)) throw domain_error("FChoice: xi must be positive");
  return std::sqrt(xi);
}

// Product prod_{k=0}^{n-1} f(r_{m+n+1-k}) in log form with sign.
inline SignedLog log_f_product(const FamilySpec& fam, const FChoice& f, int m,
                               int n) {
  if (n < 0) throw domain_error("log_f_product: n must be nonnegative");
  if (n == 0) return {0.0, 1.0};
  if (f.kind == FChoice::Kind::constant) {
    const double sign = (f.c < 0.0 && (n % 2 == 1)) ? -1.0 : 1.0;
    return {n * std::log(std::abs(f.c)), sign};
  }
  if (!fam.quadratic_sigma())
    throw domain_error("FChoice: sqrt_linear requires a quadratic-sigma family");
  const double nu = 0.5 * fam.mu;
  if (!(m + nu > 0.0))
    throw domain_error("log_f_product: sqrt_linear requires m + nu > 0");
  return {0.5 * (log_gamma(n + m + nu) - log_gamma(m + nu)), 1.0};
}

}  // namespace gpahcs
