#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <unordered_map>
#include <vector>

#include "gpahcs/errors.hpp"
#include "gpahcs/measure.hpp"
#include "gpahcs/quadrature.hpp"
#include "gpahcs/states.hpp"

namespace gpahcs {

// Canonical-ensemble layer over the p-shifted Fock basis: weights
// exp(-beta e_n)/Z on |n+p>.
struct ThermalSpec {
  double beta = 1.0;
  FamilySpec family = FamilySpec::hermite();
  FChoice f = FChoice::constant(1.0);
  int m = 0;
  int p = 0;

  void validate() const {
    if (!(beta > 0.0)) throw domain_error("ThermalSpec: beta must be positive");
    if (m < 0 || p < 0) throw domain_error("ThermalSpec: m, p nonnegative");
  }
  // Bose-Einstein occupation for the unit gap; n_bar_A with A = beta for the
  // quadratic families.
  double nbar() const { return 1.0 / std::expm1(beta); }
};

// Z = sum_n exp(-beta e_n); closed geometric form for the linear spectrum,
// direct certified sum otherwise (super-geometric decay).
inline double partition_function(const ThermalSpec& ts) {
  ts.validate();
  if (!ts.family.quadratic_sigma()) return ts.nbar() + 1.0;
  detail::Kahan z;
  z.add(1.0);
  double term = 1.0;
  for (int n = 0; n < 100000; ++n) {
    const double gap = excitation(ts.family, ts.m, n + 1) -
                       excitation(ts.family, ts.m, n);
    const double q = std::exp(-ts.beta * gap);
    term *= q;
    z.add(term);
    if (q < 1.0 && term * q / (1.0 - q) < 1e-16 * z.value()) return z.value();
  }
  throw convergence_error("partition_function: sum did not converge");
}

// Husimi distribution <z|rho|z> = (N_p^2(x)/Z) sum_n x^n e^{-beta e_n}/|K_n|^2.
inline double husimi_q(const ThermalSpec& ts, std::complex<double> z) {
  ts.validate();
  CoefficientTable kt(ts.family, ts.f, ts.m, ts.p);
  const double x = std::norm(z);
  double shift = -2.0 * kt.log_k(0).log_abs;
  double term = 1.0, sum = 1.0;
  for (int n = 0; x > 0.0 && n < 200000; ++n) {
    const double gap = excitation(ts.family, ts.m, n + 1) -
                       excitation(ts.family, ts.m, n);
    const double rho = x * kt.weight_ratio(n) * std::exp(-ts.beta * gap);
    term *= rho;
    sum += term;
    if (sum > 1e250) {
      sum *= 1e-250;
      term *= 1e-250;
      shift += std::log(1e250);
    }
    if (rho < 0.999 && term * rho / (1.0 - rho) <= 1e-15 * sum) break;
  }
  const double log_thermal = std::log(sum) + shift;
  const double log_s = detail::log_norm_series(kt, x).log_value;
  return std::exp(log_thermal - log_s) / partition_function(ts);
}

// Verbatim transcription of the closed-form Husimi expression for the
// linear-spectrum family, including its (nbar+1) prefactor convention; the
// direct route above is the normative one.
inline double husimi_q_closed_form(const ThermalSpec& ts,
                                    std::complex<double> z) {
  ts.validate();
  if (ts.family.quadratic_sigma())
    throw domain_error("husimi_q_closed_form: linear-spectrum families only");
  const double y = ts.f.c * ts.f.c * std::norm(z);
  const std::vector<double> a = {ts.p + 1.0}, b = {1.0};
  const double num = eval_pfq(a, b, y * std::exp(-ts.beta)).value;
  const double den = eval_pfq(a, b, y).value;
  return (ts.nbar() + 1.0) * num / den;
}

// P-distribution: scaled quotient of the family's Meijer G at stretched and
// plain arguments.
inline double p_function(const ThermalSpec& ts, double x) {
  ts.validate();
  if (!(x > 0.0)) throw domain_error("p_function: requires |z|^2 > 0");
  const MomentProblem mp = make_moment_problem(ts.family, ts.f, ts.m, ts.p);
  const double nb = ts.nbar();
  const double stretch = (nb + 1.0) / nb;
  const double num = meijer_g(mp.g_at(stretch * x)).value;
  const double den = meijer_g(mp.g_at(x)).value;
  return (1.0 / nb) * std::pow(stretch, ts.p) * num / den;
}

struct ThermalStats {
  // direct Boltzmann-weighted traces (normative)
  double mean = 0.0;
  double mean2 = 0.0;
  double variance = 0.0;
  double g2 = 0.0;
  double mandel_q = 0.0;
  // nbar-based closed forms, evaluated as written
  double mean_closed = 0.0;
  double mean2_closed = 0.0;
  double g2_closed = 0.0;
  double mandel_q_closed = 0.0;
  double max_rel_discrepancy = 0.0;  // reported, never asserted equal
};

// Direct traces sum_n w_n (m+n+p)^k with w_n = exp(-beta e_n)/Z, alongside
// the closed nbar expressions (whose (m+p+1) denominators are known to
// differ from the direct trace; the gap is reported).
inline ThermalStats thermal_stats(const ThermalSpec& ts) {
  ts.validate();
  ThermalStats st;
  const double base = ts.m + ts.p;
  {
    detail::Kahan s0, s1, s2;
    double term = 1.0;
    s0.add(1.0);
    s1.add(base);
    s2.add(base * base);
    bool converged = false;
    for (int n = 0; n < 200000 && !converged; ++n) {
      const double gap = excitation(ts.family, ts.m, n + 1) -
                         excitation(ts.family, ts.m, n);
      const double q = std::exp(-ts.beta * gap);
      term *= q;
      const double w = base + n + 1.0;
      s0.add(term);
      s1.add(term * w);
      s2.add(term * w * w);
      if (q < 0.999 && term * detail::poly_geom_tail(w, q, 2) <=
                           1e-15 * std::max(s2.value(), 1e-300))
        converged = true;
    }
    if (!converged)
      throw convergence_error("thermal_stats: trace sum did not converge");
    st.mean = s1.value() / s0.value();
    st.mean2 = s2.value() / s0.value();
  }
  st.variance = st.mean2 - st.mean * st.mean;
  st.g2 = (st.mean2 - st.mean) / (st.mean * st.mean);
  st.mandel_q = st.mean * (st.g2 - 1.0);

  // Closed-form route: geometric sums in nbar/(nbar+1) with (m+p+1) denominators.
  const double nb = ts.nbar();
  const double qg = nb / (nb + 1.0);
  {
    detail::Kahan s1, s2;
    double term = 1.0 / (nb + 1.0);
    const double mp1 = base + 1.0;
    s1.add(term);
    s2.add(term);
    for (int n = 1; n < 200000; ++n) {
      term *= qg;
      const double f = 1.0 + n / mp1;
      s1.add(term * f);
      s2.add(term * f * f);
      if (term * detail::poly_geom_tail(1.0 + n / mp1, qg, 2) * 4.0 <=
          1e-15 * std::max(s2.value(), 1e-300))
        break;
    }
    st.mean_closed = base * s1.value();
    st.mean2_closed = base * base * s2.value();
  }
  if (base > 0.0) {
    const double a = base + 1.0;
    st.g2_closed =
        1.0 - ((a * a + nb) - nb * nb * base) / (base * (a + nb) * (a + nb));
    st.mandel_q_closed = (nb * nb * base - (a * a + nb)) / (a * (a + nb));
  } else {
    st.g2_closed = std::numeric_limits<double>::quiet_NaN();
    st.mandel_q_closed = std::numeric_limits<double>::quiet_NaN();
  }

  auto rel = [](double x, double y) {
    return std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-300});
  };
  st.max_rel_discrepancy =
      std::max({rel(st.mean, st.mean_closed), rel(st.mean2, st.mean2_closed),
                std::isnan(st.g2_closed) ? 0.0 : rel(st.g2, st.g2_closed),
                std::isnan(st.mandel_q_closed)
                    ? 0.0
                    : rel(st.mandel_q, st.mandel_q_closed)});
  return st;
}

// --- quadrature checks against the overcompleteness measure ---

// Tr rho over the coherent-state resolution: int d2z w_p(x) <z|rho|z>.
inline double husimi_trace(const ThermalSpec& ts, const MomentProblem& mp,
                           double rel_tol = 1e-8) {
  std::unordered_map<double, double> cache;
  auto f = [&](double x) -> double {
    if (x <= 0.0) return 0.0;
    auto it = cache.find(x);
    if (it != cache.end()) return it->second;
    const double v =
        kPi * weight(mp, x) * husimi_q(ts, std::sqrt(x));
    cache.emplace(x, v);
    return v;
  };
  return integrate_decaying(f, 1.0, rel_tol, 1e-12).value;
}

namespace detail {

// Memoized pi * w_p(x) * P(x), the radial factor shared by the P-function
// normalization and every diagonal reconstruction.
class WeightedPCache {
 public:
  WeightedPCache(const ThermalSpec& ts, const MomentProblem& mp)
      : ts_(ts), mp_(mp) {}
  double operator()(double x) {
    auto it = cache_.find(x);
    if (it != cache_.end()) return it->second;
    const double v = kPi * weight(mp_, x) * p_function(ts_, x);
    cache_.emplace(x, v);
    return v;
  }

 private:
  const ThermalSpec& ts_;
  const MomentProblem& mp_;
  std::unordered_map<double, double> cache_;
};

}  // namespace detail

// int d2z w_p(x) P(x); must come out as 1.
inline double p_function_normalization(const ThermalSpec& ts,
                                       const MomentProblem& mp,
                                       double rel_tol = 1e-8) {
  detail::WeightedPCache wp(ts, mp);
  auto f = [&](double x) { return x > 0.0 ? wp(x) : 0.0; };
  return integrate_decaying(f, 1.0, rel_tol, 1e-12).value;
}

// Diagonal reconstructions int d2z w_p P(x) |<n+p|z>|^2 for n = 0..n_max.
inline std::vector<double> p_function_diagonals(const ThermalSpec& ts,
                                                const MomentProblem& mp,
                                                int n_max,
                                                double rel_tol = 1e-8) {
  CoefficientTable kt(ts.family, ts.f, ts.m, ts.p);
  detail::WeightedPCache wp(ts, mp);
  std::vector<double> out;
  for (int n = 0; n <= n_max; ++n) {
    const double log_k2 = 2.0 * kt.log_k(n).log_abs;
    auto f = [&](double x) -> double {
      if (x <= 0.0) return 0.0;
      const double log_s = detail::log_norm_series(kt, x).log_value;
      return wp(x) * std::exp(n * std::log(x) - log_k2 - log_s);
    };
    out.push_back(
        integrate_decaying(f, std::max(1.0, double(n)), rel_tol, 1e-12).value);
  }
  return out;
}

inline double p_function_diagonal(const ThermalSpec& ts,
                                  const MomentProblem& mp, int n,
                                  double rel_tol = 1e-8) {
  return p_function_diagonals(ts, mp, n, rel_tol).back();
}

}  // namespace gpahcs
