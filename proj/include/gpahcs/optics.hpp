#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "gpahcs/errors.hpp"
#include "gpahcs/states.hpp"

namespace gpahcs {

enum class StatsMethod { series, closed_form };

struct StatsReport {
  double mean_n = 0.0;
  double mean_n2 = 0.0;
  double variance = 0.0;
  double mandel_q = 0.0;
  double g2 = 0.0;
  double snr = 0.0;
  double snr_alt = 0.0;  // (<N> - m - p)/dN, the alternative numerator reading
  StatsMethod method = StatsMethod::series;
  bool closed_form_fallback = false;
};

namespace detail {

struct MomentPair {
  double mean = 0.0;
  double mean2 = 0.0;
};

// <N>, <N^2> from the amplitude series sum (m+p+n)^k x^n / |K_n|^2.
inline MomentPair series_moments(CoefficientTable& kt, double x, int m, int p,
                                 double rtol = 1e-15) {
  Kahan s0, s1, s2;
  double term = 1.0;
  const double base = m + p;
  s0.add(1.0);
  s1.add(base);
  s2.add(base * base);
  if (x > 0.0) {
    bool converged = false;
    for (int n = 0; n < 200000; ++n) {
      const double rho = x * kt.weight_ratio(n);
      term *= rho;
      const double w = base + n + 1.0;
      s0.add(term);
      s1.add(term * w);
      s2.add(term * w * w);
      if (term > 1e250) {
        // renormalize all three accumulators together
        const double f = 1e-250;
        s0 = Kahan{s0.value() * f, 0.0};
        s1 = Kahan{s1.value() * f, 0.0};
        s2 = Kahan{s2.value() * f, 0.0};
        term *= f;
      }
      if (rho < 0.9 &&
          term * poly_geom_tail(w, rho, 2) <= rtol * s2.value()) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw convergence_error("series_moments: series did not converge");
  }
  return {s1.value() / s0.value(), s2.value() / s0.value()};
}

// Closed pFq route: mean = (m+p) F_{k+1}/F_k with verbatim
// parameter lists; at m+p = 0 those lists degenerate (a zero lower
// parameter annihilated by the prefactor), so the removable limit is summed
// term-by-term instead.
inline MomentPair closed_moments(const StateSpec& spec) {
  const NormClosedForm base =
      norm_closed_form(spec.family, spec.f, spec.m, spec.p);
  const double y = base.arg_scale * std::norm(spec.z);
  const double mp = spec.m + spec.p;

  if (mp > 0.0) {
    std::vector<double> a1 = base.a, b1 = base.b;
    a1.push_back(mp + 1.0);
    b1.push_back(mp);
    std::vector<double> a2 = a1, b2 = b1;
    a2.push_back(mp + 1.0);
    b2.push_back(mp);
    const double f0 = eval_pfq(base.a, base.b, y).value;
    const double f1 = eval_pfq(a1, b1, y).value;
    const double f2 = eval_pfq(a2, b2, y).value;
    return {mp * f1 / f0, mp * mp * f2 / f0};
  }

  // m + p = 0: mean = sum n t_n / sum t_n over the base series terms.
  Kahan s0, s1, s2;
  double term = 1.0;
  s0.add(1.0);
  bool converged = (y == 0.0);
  for (int k = 0; !converged && k < 200000; ++k) {
    double ratio = y / (k + 1.0);
    for (double ai : base.a) ratio *= (ai + k);
    for (double bj : base.b) ratio /= (bj + k);
    term *= ratio;
    const double n = k + 1.0;
    s0.add(term);
    s1.add(term * n);
    s2.add(term * n * n);
    if (std::abs(ratio) < 0.9 &&
        std::abs(term) * poly_geom_tail(n, std::abs(ratio), 2) <=
            1e-15 * std::abs(s2.value()) + 1e-300) {
      converged = true;
    }
  }
  if (!converged)
    throw convergence_error("closed_moments: series did not converge");
  return {s1.value() / s0.value(), s2.value() / s0.value()};
}

}  // namespace detail

// Both routes for (<N>, <N^2>); raises if they disagree beyond 1e-9
// relative.  Returns the series-route values.
inline std::pair<double, double> number_moments(const StateSpec& spec) {
  spec.validate();
  CoefficientTable kt(spec.family, spec.f, spec.m, spec.p);
  const detail::MomentPair s =
      detail::series_moments(kt, std::norm(spec.z), spec.m, spec.p);
  bool fallback = false;
  try {
    const detail::MomentPair c = detail::closed_moments(spec);
    const double d1 = std::abs(s.mean - c.mean) /
                      std::max(std::abs(s.mean), 1e-300);
    const double d2 = std::abs(s.mean2 - c.mean2) /
                      std::max(std::abs(s.mean2), 1e-300);
    if (d1 > 1e-9 || d2 > 1e-9)
      throw consistency_error(
          "number_moments: series and closed-form routes disagree");
  } catch (const convergence_error&) {
    fallback = true;  // closed route unavailable; series stands alone
    (void)fallback;
  }
  return {s.mean, s.mean2};
}

inline StatsReport photon_statistics(const StateSpec& spec,
                                     StatsMethod method = StatsMethod::series) {
  spec.validate();
  StatsReport rep;
  rep.method = method;
  detail::MomentPair mp;
  if (method == StatsMethod::series) {
    CoefficientTable kt(spec.family, spec.f, spec.m, spec.p);
    mp = detail::series_moments(kt, std::norm(spec.z), spec.m, spec.p);
  } else {
    try {
      mp = detail::closed_moments(spec);
    } catch (const convergence_error&) {
      CoefficientTable kt(spec.family, spec.f, spec.m, spec.p);
      mp = detail::series_moments(kt, std::norm(spec.z), spec.m, spec.p);
      rep.closed_form_fallback = true;
    }
  }
  rep.mean_n = mp.mean;
  rep.mean_n2 = mp.mean2;
  rep.variance = mp.mean2 - mp.mean * mp.mean;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rep.mandel_q = rep.mean_n > 0.0 ? rep.variance / rep.mean_n - 1.0 : nan;
  rep.g2 = rep.mean_n > 0.0 ? (rep.mean_n2 - rep.mean_n) / (rep.mean_n * rep.mean_n)
                            : nan;
  if (rep.variance > 0.0) {
    const double dn = std::sqrt(rep.variance);
    rep.snr = (rep.mean_n - spec.p) / dn;
    rep.snr_alt = (rep.mean_n - spec.m - spec.p) / dn;
  } else {
    rep.snr = nan;
    rep.snr_alt = nan;
  }
  return rep;
}

inline double mandel_q(const StateSpec& spec) {
  const auto [mean, mean2] = number_moments(spec);
  if (!(mean > 0.0)) throw domain_error("mandel_q: requires <N> > 0");
  return (mean2 - mean * mean) / mean - 1.0;
}

inline double g2(const StateSpec& spec) {
  const auto [mean, mean2] = number_moments(spec);
  if (!(mean > 0.0)) throw domain_error("g2: requires <N> > 0");
  return (mean2 - mean) / (mean * mean);
}

// P_n over Fock labels n = 0..n_max, as |amplitude|^2 of the built state;
// identically zero below the added-photon offset.
inline std::vector<double> pnd(const StateSpec& spec, int n_max) {
  spec.validate();
  const Coefficients c = build_state(spec);
  std::vector<double> out(n_max + 1, 0.0);
  for (int n = spec.p; n <= n_max; ++n) {
    const int idx = n - c.offset;
    if (idx >= 0 && idx < static_cast<int>(c.amplitudes.size()))
      out[n] = std::norm(c.amplitudes[idx]);
  }
  return out;
}

inline double pnd_at(const StateSpec& spec, int n) {
  if (n < 0) throw domain_error("pnd_at: n must be nonnegative");
  if (n < spec.p) return 0.0;
  return pnd(spec, n)[n];
}

inline double snr(const StateSpec& spec) {
  const auto [mean, mean2] = number_moments(spec);
  const double var = mean2 - mean * mean;
  if (!(var > 0.0)) throw domain_error("snr: zero fluctuation (Fock limit)");
  return (mean - spec.p) / std::sqrt(var);
}

// Ratio of the p-added SNR to the p = 0 SNR at the same z, m.
inline double snr_ratio(const StateSpec& spec) {
  StateSpec ref = spec;
  ref.p = 0;
  return snr(spec) / snr(ref);
}

}  // namespace gpahcs
