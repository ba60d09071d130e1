#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "gpahcs/errors.hpp"

namespace gpahcs {

inline constexpr double kPi = 3.14159265358979323846264338328;
inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

namespace detail {

inline bool is_nonpositive_integer(double x) {
  return x < 0.5 && std::abs(x - std::round(x)) < 1e-9 * std::max(1.0, std::abs(x));
}

// Compensated accumulator (Kahan-Neumaier).
struct Kahan {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

// Tail of sum_{j>=1} (c + j)^k rho^j for 0 <= rho < 1, relative to a unit
// term at j = 0; k <= 2.  Used to certify truncation of moment-weighted
// series with geometrically decaying terms.
inline double poly_geom_tail(double c, double rho, int k) {
  const double g1 = rho / (1.0 - rho);
  const double g2 = rho / ((1.0 - rho) * (1.0 - rho));
  const double g3 = rho * (1.0 + rho) / ((1.0 - rho) * (1.0 - rho) * (1.0 - rho));
  if (k == 0) return g1;
  if (k == 1) return c * g1 + g2;
  return c * c * g1 + 2.0 * c * g2 + g3;
}

// Lanczos approximation, g = 7, 9 coefficients. Valid for Re(z) > 0.5.
inline constexpr double kLanczosG = 7.0;
inline constexpr double kLanczosCoef[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,       -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};

template <typename T>
T lanczos_log_gamma(T z) {
  z -= 1.0;
  T acc = kLanczosCoef[0];
  for (int i = 1; i < 9; ++i) acc += kLanczosCoef[i] / (z + static_cast<double>(i));
  T t = z + (kLanczosG + 0.5);
  return 0.5 * kLogTwoPi + (z + 0.5) * std::log(t) - t + std::log(acc);
}

// log(sin(w)) up to an additive multiple of 2*pi*i; stable for large |Im w|.
inline std::complex<double> log_sin(std::complex<double> w) {
  const std::complex<double> iw(-w.imag(), w.real());
  if (w.imag() > 0.0) {
    return -iw + std::log(1.0 - std::exp(2.0 * iw)) +
           std::log(std::complex<double>(0.0, 0.5));
  }
  return iw + std::log(1.0 - std::exp(-2.0 * iw)) +
         std::log(std::complex<double>(0.0, -0.5));
}

}  // namespace detail

// ln Gamma(x) for x > 0.
inline double log_gamma(double x) {
  if (!(x > 0.0)) throw domain_error("log_gamma: argument must be positive");
  if (x < 0.5)
    return std::log(kPi) - std::log(std::sin(kPi * x)) -
           detail::lanczos_log_gamma(1.0 - x);
  return detail::lanczos_log_gamma(x);
}

// ln Gamma(z), principal value up to 2*pi*i (callers only exponentiate).
inline std::complex<double> log_gamma(std::complex<double> z) {
  if (z.real() >= 0.5) return detail::lanczos_log_gamma(z);
  return std::log(kPi) - detail::log_sin(kPi * z) -
         detail::lanczos_log_gamma(1.0 - z);
}

// Magnitude-and-sign representation for quantities built from Gamma ratios.
struct SignedLog {
  double log_abs = 0.0;
  double sign = 1.0;  // -1, 0 or +1
  double value() const { return sign * std::exp(log_abs); }
  SignedLog operator*(const SignedLog& o) const { return {log_abs + o.log_abs, sign * o.sign}; }
  SignedLog operator/(const SignedLog& o) const { return {log_abs - o.log_abs, sign * o.sign}; }
};

// ln |Gamma(x)| with sign, for any real x away from the poles.
inline SignedLog log_gamma_signed(double x) {
  if (detail::is_nonpositive_integer(x))
    throw domain_error("log_gamma_signed: pole at nonpositive integer");
  if (x > 0.0) return {log_gamma(x), 1.0};
  // Reflection; Gamma alternates sign between consecutive negative integers.
  double log_abs = std::log(kPi) - std::log(std::abs(std::sin(kPi * x))) -
                   log_gamma(1.0 - x);
  double sign = (static_cast<long long>(std::floor(x)) % 2 == 0) ? 1.0 : -1.0;
  return {log_abs, sign};
}

inline double digamma(double x) {
  if (detail::is_nonpositive_integer(x)) throw domain_error("digamma: pole");
  double acc = 0.0;
  while (x < 14.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  double inv = 1.0 / x, inv2 = inv * inv;
  return acc + std::log(x) - 0.5 * inv -
         inv2 * (1.0 / 12.0 -
                 inv2 * (1.0 / 120.0 -
                         inv2 * (1.0 / 252.0 -
                                 inv2 * (1.0 / 240.0 -
                                         inv2 * (1.0 / 132.0 -
                                                 inv2 * (691.0 / 32760.0))))));
}

inline double trigamma(double x) {
  if (detail::is_nonpositive_integer(x)) throw domain_error("trigamma: pole");
  double acc = 0.0;
  while (x < 14.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  double inv = 1.0 / x, inv2 = inv * inv;
  return acc +
         inv * (1.0 +
                inv * (0.5 +
                       inv * (1.0 / 6.0 -
                              inv2 * (1.0 / 30.0 -
                                      inv2 * (1.0 / 42.0 -
                                              inv2 * (1.0 / 30.0 -
                                                      inv2 * (5.0 / 66.0)))))));
}

// Rising factorial a(a+1)...(a+k-1); exactly zero when the range crosses a
// nonpositive-integer zero of the product.
inline double pochhammer(double a, int k) {
  if (k < 0) throw domain_error("pochhammer: negative order");
  if (k == 0) return 1.0;
  if (a <= 0.0 && a == std::floor(a) && a + k - 1 >= 0.0) return 0.0;
  double log_abs = 0.0, sign = 1.0;
  for (int j = 0; j < k; ++j) {
    double f = a + j;
    if (f < 0.0) sign = -sign;
    log_abs += std::log(std::abs(f));
  }
  return sign * std::exp(log_abs);
}

struct SeriesResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  int terms_used = 1;
};

// Generalized hypergeometric series pFq(a; b; x), summed with a certified
// geometric-majorant tail bound rather than a bare "term < eps" stop.
inline SeriesResult eval_pfq(const std::vector<double>& a,
                             const std::vector<double>& b, double x,
                             double rtol = 1e-14) {
  for (double bj : b)
    if (detail::is_nonpositive_integer(bj))
      throw domain_error("eval_pfq: lower parameter is a nonpositive integer");

  const int p = static_cast<int>(a.size());
  const int q = static_cast<int>(b.size());

  bool terminating = false;
  for (double ai : a)
    if (detail::is_nonpositive_integer(ai)) terminating = true;

  if (x != 0.0 && !terminating) {
    if (p > q + 1)
      throw convergence_error("eval_pfq: series diverges for p > q+1");
    if (p == q + 1 && std::abs(x) >= 1.0)
      throw convergence_error("eval_pfq: p = q+1 series requires |x| < 1");
  }

  double param_scale = 1.0;
  for (double ai : a) param_scale = std::max(param_scale, std::abs(ai));
  for (double bj : b) param_scale = std::max(param_scale, std::abs(bj));
  const long min_terms = static_cast<long>(2.0 * param_scale) + 16;
  const long max_terms = 2000000;

  detail::Kahan sum;
  sum.add(1.0);
  double term = 1.0;
  double sum_abs = 1.0;
  double tail = 0.0;
  long k = 0;
  bool converged = false;
  for (; k < max_terms; ++k) {
    double ratio = x / (k + 1.0);
    for (double ai : a) ratio *= (ai + k);
    for (double bj : b) ratio /= (bj + k);
    term *= ratio;
    if (term == 0.0) {
      tail = 0.0;
      converged = true;
      ++k;
      break;
    }
    sum.add(term);
    sum_abs += std::abs(term);
    if (k + 1 >= min_terms) {
      double rho = std::abs(ratio);
      if (p == q + 1) rho = std::max(rho, std::abs(x));
      if (rho < 0.999) {
        tail = std::abs(term) * rho / (1.0 - rho);
        if (tail <= rtol * std::max(std::abs(sum.value()),
                                    std::numeric_limits<double>::min())) {
          converged = true;
          ++k;
          break;
        }
      }
    }
  }
  if (!converged)
    throw convergence_error("eval_pfq: no convergence within term budget",
                            sum.value());
  double roundoff = 4.0 * std::numeric_limits<double>::epsilon() * sum_abs;
  return {sum.value(), tail + roundoff, static_cast<int>(k + 1)};
}

// Modified Bessel I_nu via its 0F1 series.
inline double bessel_i(double nu, double x) {
  if (!(x > 0.0)) throw domain_error("bessel_i: requires x > 0");
  if (nu < 0.0 && nu == std::floor(nu)) nu = -nu;  // I_{-n} = I_n
  SeriesResult f = eval_pfq({}, {nu + 1.0}, 0.25 * x * x, 1e-15);
  SignedLog lg = log_gamma_signed(nu + 1.0);
  return lg.sign * std::exp(nu * std::log(0.5 * x) - lg.log_abs) * f.value;
}

// Modified Bessel K_nu from the integral over cosh, evaluated by a
// trapezoid rule with step halving (integrand decays doubly exponentially).
inline double bessel_k(double nu, double x) {
  if (!(x > 0.0)) throw domain_error("bessel_k: requires x > 0");
  nu = std::abs(nu);
  auto f = [&](double t) {
    // exp(-x cosh t) cosh(nu t), in log form to dodge overflow
    double ct = std::cosh(t);
    double lc = (nu * t > 30.0) ? nu * t - std::log(2.0) + std::log1p(std::exp(-2.0 * nu * t))
                                : std::log(std::cosh(nu * t));
    return std::exp(lc - x * ct);
  };
  double prev = 0.0;
  double cur = 0.0;
  for (int level = 0; level < 14; ++level) {
    double h = 0.5 / (1 << level);
    detail::Kahan acc;
    acc.add(0.5 * f(0.0));
    int quiet = 0;
    for (long k = 1; k < 100000; ++k) {
      double v = f(k * h);
      acc.add(v);
      if (v < 1e-19 * std::max(acc.value(), 1e-300)) {
        if (++quiet >= 4) break;
      } else {
        quiet = 0;
      }
    }
    cur = h * acc.value();
    if (level >= 2 && std::abs(cur - prev) <= 1e-13 * std::abs(cur)) return cur;
    prev = cur;
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Meijer G via Mellin-Barnes contour quadrature.
// ---------------------------------------------------------------------------

// Parameter lists (a_1..a_p; b_1..b_q) with index signature (m,n,p,q) and a
// positive real argument.  The Mellin transform of the function is
//   chi(s) = prod_{j<=m} Gamma(b_j+s) prod_{j<=n} Gamma(1-a_j-s)
//          / [prod_{j>m} Gamma(1-b_j-s) prod_{j>n} Gamma(a_j+s)].
struct GParams {
  int m = 0, n = 0;
  std::vector<double> a, b;
  double x = 1.0;
  double contour_lower = -std::numeric_limits<double>::infinity();
  double contour_upper = std::numeric_limits<double>::infinity();

  GParams(int m_, int n_, std::vector<double> a_, std::vector<double> b_,
          double x_)
      : m(m_), n(n_), a(std::move(a_)), b(std::move(b_)), x(x_) {
    const int p_ = static_cast<int>(a.size());
    const int q_ = static_cast<int>(b.size());
    if (m < 0 || n < 0 || m > q_ || n > p_)
      throw domain_error("GParams: require 0 <= m <= q and 0 <= n <= p");
    if (!(x > 0.0)) throw domain_error("GParams: argument must be positive");
    // Poles of Gamma(b_j+s) sit at s = -b_j - k; poles of Gamma(1-a_i-s) at
    // s = 1-a_i+l.  Coincidence means a_i - b_j is a positive integer.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        double d = a[i] - b[j];
        if (d > 0.5 && std::abs(d - std::round(d)) < 1e-12 * std::max(1.0, d))
          throw domain_error("GParams: left and right pole families coincide");
      }
    for (int j = 0; j < m; ++j) contour_lower = std::max(contour_lower, -b[j]);
    for (int i = 0; i < n; ++i) contour_upper = std::min(contour_upper, 1.0 - a[i]);
    if (!(contour_lower < contour_upper))
      throw domain_error("GParams: no vertical contour separates the poles");
  }

  int p() const { return static_cast<int>(a.size()); }
  int q() const { return static_cast<int>(b.size()); }
};

struct ContourResult {
  std::complex<double> value{0.0, 0.0};
  double abs_error_estimate = 0.0;
  long nodes_used = 0;
};

namespace detail {

// d/ds log chi(s) on the real axis, defined for G^{m,0}_{p,m} signatures.
inline double chi_log_deriv(const GParams& g, double s) {
  double acc = 0.0;
  for (int j = 0; j < g.m; ++j) acc += digamma(g.b[j] + s);
  for (int i = g.n; i < g.p(); ++i) acc -= digamma(g.a[i] + s);
  return acc;
}

inline double chi_log_deriv2(const GParams& g, double s) {
  double acc = 0.0;
  for (int j = 0; j < g.m; ++j) acc += trigamma(g.b[j] + s);
  for (int i = g.n; i < g.p(); ++i) acc -= trigamma(g.a[i] + s);
  return acc;
}

// Real-axis saddle of chi(s) x^{-s}: solves chi'(s)/chi(s) = ln x.  Keeps a
// 0.5 margin from the rightmost numerator pole so the integrand stays
// analytic in a strip around the contour.
inline double contour_abscissa(const GParams& g) {
  const double lo_margin = g.contour_lower + 0.5;
  const bool saddle_ok = (g.n == 0 && g.m == g.q() && g.m > 0);
  if (!saddle_ok) {
    if (std::isfinite(g.contour_upper))
      return 0.5 * (g.contour_lower + g.contour_upper);
    return lo_margin + 0.5;
  }
  const double target = std::log(g.x);
  if (chi_log_deriv(g, lo_margin) >= target) return lo_margin;
  double lo = lo_margin, hi = std::max(lo_margin + 1.0, 2.0);
  while (chi_log_deriv(g, hi) < target) {
    hi = lo_margin + 2.0 * (hi - lo_margin);
    if (hi > 1e9) return 1e9;
  }
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    if (chi_log_deriv(g, mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Contour integral (1/2*pi*i) int chi(s) x^{-s} ds along Re(s) = s0, using a
// sinh-stretched trapezoid rule with adaptive step halving.  Repeated b_j
// (higher-order poles) need no special handling: the contour never touches
// the poles.
inline ContourResult meijer_g_contour(const GParams& g) {
  const double cstar = g.m + g.n - 0.5 * (g.p() + g.q());
  if (!(cstar > 0.0))
    throw convergence_error(
        "meijer_g: integrand does not decay on a vertical contour");

  const double s0 = detail::contour_abscissa(g);
  double curvature = 1.0;
  if (g.n == 0 && g.m == g.q() && g.m > 0)
    curvature = detail::chi_log_deriv2(g, s0);
  const double scale =
      (curvature > 0.0) ? std::clamp(std::sqrt(2.0 / curvature), 0.5, 1e5) : 1.0;
  const double log_x = std::log(g.x);

  auto node = [&](double t) -> std::complex<double> {
    const std::complex<double> s(s0, t);
    std::complex<double> w(0.0, 0.0);
    for (int j = 0; j < g.m; ++j) w += log_gamma(g.b[j] + s);
    for (int i = 0; i < g.n; ++i) w += log_gamma(1.0 - g.a[i] - s);
    for (int j = g.m; j < g.q(); ++j) w -= log_gamma(1.0 - g.b[j] - s);
    for (int i = g.n; i < g.p(); ++i) w -= log_gamma(g.a[i] + s);
    w -= s * log_x;
    return std::exp(w);
  };

  const long budget = 1L << 20;
  long nodes = 0;
  std::complex<double> prev(0.0, 0.0), cur(0.0, 0.0);
  double diff = std::numeric_limits<double>::infinity();
  double sum_abs = 0.0;
  for (int level = 0;; ++level) {
    const double h = 0.5 / (1 << level);
    std::complex<double> acc = node(0.0) * scale;  // u = 0, weight A cosh(0)
    sum_abs = std::abs(acc);
    ++nodes;
    for (int dir : {+1, -1}) {
      int quiet = 0;
      for (long k = 1;; ++k) {
        const double u = dir * k * h;
        const double t = scale * std::sinh(u);
        const double w = scale * std::cosh(u);
        const std::complex<double> v = node(t) * w;
        acc += v;
        sum_abs += std::abs(v);
        ++nodes;
        if (nodes > budget)
          throw convergence_error("meijer_g: node budget exhausted",
                                  std::abs(cur) / (2.0 * kPi));
        if (std::abs(v) < 1e-18 * std::max(sum_abs, 1e-300)) {
          if (++quiet >= 6) break;
        } else {
          quiet = 0;
        }
        if (std::abs(u) > 12.0) break;  // sinh(12) ~ 8e4: far past any decay
      }
    }
    cur = acc * h;
    if (level >= 2) {
      diff = std::abs(cur - prev);
      if (diff <= 1e-10 || diff <= 1e-10 * std::abs(cur)) break;
    }
    if (level >= 14)
      throw convergence_error("meijer_g: contour quadrature did not settle",
                              std::abs(cur) / (2.0 * kPi));
    prev = cur;
  }
  const double inv2pi = 1.0 / (2.0 * kPi);
  ContourResult r;
  r.value = cur * inv2pi;
  r.abs_error_estimate =
      diff * inv2pi +
      8.0 * std::numeric_limits<double>::epsilon() * sum_abs * 0.5 * inv2pi;
  r.nodes_used = nodes;
  return r;
}

// Real-valued Meijer G for real parameter lists and positive argument.  The
// contour sum is conjugate-symmetric, so any residual imaginary part is a
// numerical diagnostic and must stay below the error estimate.
inline SeriesResult meijer_g(const GParams& g) {
  ContourResult c = meijer_g_contour(g);
  const double im = std::abs(c.value.imag());
  if (im > 10.0 * c.abs_error_estimate + 1e-13 * std::abs(c.value.real()))
    throw convergence_error("meijer_g: contour sum lost conjugate symmetry",
                            c.value.real());
  return {c.value.real(), c.abs_error_estimate + im,
          static_cast<int>(std::min<long>(c.nodes_used,
                                          std::numeric_limits<int>::max()))};
}

// Closed-form Mellin transform of the Meijer G defined by `g`, i.e. the
// Gamma-ratio chi(s).  This is an oracle: no quadrature involved.
inline double mellin_moment(const GParams& g, double s) {
  SignedLog acc{0.0, 1.0};
  auto numerator = [&](double arg) {
    if (detail::is_nonpositive_integer(arg))
      throw domain_error("mellin_moment: Gamma pole at requested moment");
    acc = acc * log_gamma_signed(arg);
  };
  bool zero = false;
  auto denominator = [&](double arg) {
    if (detail::is_nonpositive_integer(arg)) {
      zero = true;  // 1/Gamma vanishes
      return;
    }
    acc = acc / log_gamma_signed(arg);
  };
  for (int j = 0; j < g.m; ++j) numerator(g.b[j] + s);
  for (int i = 0; i < g.n; ++i) numerator(1.0 - g.a[i] - s);
  for (int j = g.m; j < g.q(); ++j) denominator(1.0 - g.b[j] - s);
  for (int i = g.n; i < g.p(); ++i) denominator(g.a[i] + s);
  if (zero) return 0.0;
  return acc.value();
}

}  // namespace gpahcs
