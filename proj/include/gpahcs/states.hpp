#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gpahcs/coefficients.hpp"
#include "gpahcs/errors.hpp"
#include "gpahcs/family.hpp"
#include "gpahcs/quadrature.hpp"
#include "gpahcs/specfun.hpp"

namespace gpahcs {

// One GPAH-CS: label z, derivative order m, added-photon count p, plus the
// family and f-choice that fix the expansion coefficients.
struct StateSpec {
  std::complex<double> z{0.0, 0.0};
  int m = 0;
  int p = 0;
  FamilySpec family = FamilySpec::hermite();
  FChoice f = FChoice::constant(1.0);

  void validate() const {
    if (m < 0 || p < 0) throw domain_error("StateSpec: m, p must be nonnegative");
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw domain_error("StateSpec: z must be finite");
  }
};

// ---------------------------------------------------------------------------
// Expansion coefficients K_n^p(m)
// ---------------------------------------------------------------------------

// Incremental table of log |K_n^p| built from the running excitation product;
// K_0^p = 1/sqrt(eps_p) and
//   K_{n+1}/K_n = e_{n+1} / (sqrt(e_{n+p+1}) f(r_{m+n+2})).
class CoefficientTable {
 public:
  CoefficientTable(const FamilySpec& fam, const FChoice& f, int m, int p)
      : fam_(fam), f_(f), m_(m), p_(p) {
    if (m < 0 || p < 0) throw domain_error("CoefficientTable: negative index");
    if (f.kind == FChoice::Kind::sqrt_linear) {
      if (!fam.quadratic_sigma())
        throw domain_error(
            "CoefficientTable: sqrt_linear requires a quadratic-sigma family");
      if (!(m + 0.5 * fam.mu > 0.0))
        throw domain_error("CoefficientTable: sqrt_linear requires m + nu > 0");
    }
    logk_.push_back({-0.5 * log_excitation_product(fam_, m_, p_), 1.0});
  }

  const SignedLog& log_k(int n) {
    while (static_cast<int>(logk_.size()) <= n) extend();
    return logk_[n];
  }

  // |K_n|^2 / |K_{n+1}|^2 = e_{n+p+1} f(r_{m+n+2})^2 / e_{n+1}^2.
  // This is the x-free part of the weight ratio t_{n+1}/t_n and is strictly
  // decreasing in n for every family/f instance here, which certifies the
  // geometric tail bounds used below.
  double weight_ratio(int n) const {
    const double f2 = f_squared(n);
    const double e_top = excitation(fam_, m_, n + p_ + 1);
    const double e1 = excitation(fam_, m_, n + 1);
    return e_top * f2 / (e1 * e1);
  }

  int m() const { return m_; }
  int p() const { return p_; }
  const FamilySpec& family() const { return fam_; }
  const FChoice& f_choice() const { return f_; }

 private:
  double f_squared(int n) const {
    if (f_.kind == FChoice::Kind::constant) return f_.c * f_.c;
    return xi_linear(spectral_gap(fam_, m_ + n + 2), 0.5, -1.0);
  }

  void extend() {
    const int n = static_cast<int>(logk_.size()) - 1;
    const SignedLog& prev = logk_.back();
    const double e1 = excitation(fam_, m_, n + 1);
    const double e_top = excitation(fam_, m_, n + p_ + 1);
    double log_abs = prev.log_abs + std::log(e1) - 0.5 * std::log(e_top);
    double sign = prev.sign;
    if (f_.kind == FChoice::Kind::constant) {
      log_abs -= std::log(std::abs(f_.c));
      if (f_.c < 0.0) sign = -sign;
    } else {
      log_abs -= 0.5 * std::log(f_squared(n));
    }
    logk_.push_back({log_abs, sign});
  }

  FamilySpec fam_;
  FChoice f_;
  int m_, p_;
  std::vector<SignedLog> logk_;
};

inline SignedLog log_k_np(const FamilySpec& fam, const FChoice& f, int m,
                          int p, int n) {
  CoefficientTable t(fam, f, m, p);
  return t.log_k(n);
}

// Closed Gamma forms of K_n^p used for validation against the running
// product route.
inline SignedLog log_k_np_closed(const FamilySpec& fam, const FChoice& f,
                                 int m, int p, int n) {
  if (!fam.quadratic_sigma()) {
    // Gamma(n+1)/sqrt(Gamma(n+p+1)) / c^n
    double la = log_gamma(n + 1.0) - 0.5 * log_gamma(n + p + 1.0) -
                n * std::log(std::abs(f.c));
    double sign = (f.c < 0.0 && n % 2 == 1) ? -1.0 : 1.0;
    return {la, sign};
  }
  const double mu = fam.mu;
  if (f.kind == FChoice::Kind::constant) {
    double la = log_gamma(n + 1.0) + log_gamma(n + 2.0 * m + mu) -
                0.5 * (log_gamma(2.0 * m + mu) + log_gamma(n + p + 1.0) +
                       log_gamma(n + p + 2.0 * m + mu)) -
                n * std::log(std::abs(f.c));
    double sign = (f.c < 0.0 && n % 2 == 1) ? -1.0 : 1.0;
    return {la, sign};
  }
  const double nu = 0.5 * mu;
  double la = 0.5 * (2.0 * log_gamma(n + 1.0) + 2.0 * log_gamma(n + 2.0 * m + mu) +
                     log_gamma(m + nu) - log_gamma(2.0 * m + mu) -
                     log_gamma(n + p + 1.0) - log_gamma(n + p + 2.0 * m + mu) -
                     log_gamma(n + m + nu));
  return {la, 1.0};
}

// ---------------------------------------------------------------------------
// Normalization series S_p(w) = sum_n w^n / |K_n^p|^2
// ---------------------------------------------------------------------------

namespace detail {

// Complex value carried as mantissa * exp(log_shift).
struct ScaledComplex {
  std::complex<double> mant{0.0, 0.0};
  double log_shift = 0.0;
  std::complex<double> value() const { return mant * std::exp(log_shift); }
};

// Evaluates S_p(w); the leading term 1/|K_0|^2 is factored into log_shift.
inline ScaledComplex overlap_series(CoefficientTable& kt,
                                    std::complex<double> w,
                                    double rtol = 1e-15) {
  ScaledComplex out;
  out.log_shift = -2.0 * kt.log_k(0).log_abs;
  std::complex<double> term(1.0, 0.0);
  std::complex<double> sum(1.0, 0.0);
  const double aw = std::abs(w);
  if (aw == 0.0) {
    out.mant = sum;
    return out;
  }
  for (int n = 0; n < 200000; ++n) {
    const double rho = aw * kt.weight_ratio(n);
    term *= w * kt.weight_ratio(n);
    sum += term;
    if (std::abs(sum) > 1e250 || std::abs(term) > 1e250) {
      sum *= 1e-250;
      term *= 1e-250;
      out.log_shift += std::log(1e250);
    }
    if (rho < 0.999) {
      const double tail = std::abs(term) * rho / (1.0 - rho);
      if (tail <= rtol * std::abs(sum)) {
        out.mant = sum;
        return out;
      }
    }
  }
  throw convergence_error("overlap_series: no convergence");
}

// ln S_p(x) for real x >= 0 together with the certified relative tail.
struct LogSeries {
  double log_value = 0.0;
  double tail_rel = 0.0;
  int terms = 1;
};

inline LogSeries log_norm_series(CoefficientTable& kt, double x,
                                 double rtol = 1e-15) {
  if (x < 0.0) throw domain_error("log_norm_series: x must be nonnegative");
  LogSeries out;
  double shift = -2.0 * kt.log_k(0).log_abs;
  double term = 1.0, sum = 1.0;
  if (x == 0.0) {
    out.log_value = shift;
    return out;
  }
  for (int n = 0; n < 200000; ++n) {
    const double rho = x * kt.weight_ratio(n);
    term *= rho;
    sum += term;
    if (sum > 1e250) {
      sum *= 1e-250;
      term *= 1e-250;
      shift += std::log(1e250);
    }
    if (rho < 0.999) {
      const double tail = term * rho / (1.0 - rho);
      if (tail <= rtol * sum) {
        out.log_value = std::log(sum) + shift;
        out.tail_rel = tail / sum;
        out.terms = n + 2;
        return out;
      }
    }
  }
  throw convergence_error("log_norm_series: no convergence");
}

}  // namespace detail

// pFq closed form of the normalization series: 1/N_p^2 = exp(log_prefactor)
// * pFq(a; b; arg_scale * x).
struct NormClosedForm {
  double log_prefactor = 0.0;
  std::vector<double> a, b;
  double arg_scale = 1.0;
};

inline NormClosedForm norm_closed_form(const FamilySpec& fam, const FChoice& f,
                                       int m, int p) {
  NormClosedForm form;
  if (!fam.quadratic_sigma()) {
    form.log_prefactor = log_gamma(p + 1.0);
    form.a = {p + 1.0};
    form.b = {1.0};
    form.arg_scale = f.c * f.c;
    return form;
  }
  const double mu = fam.mu;
  form.log_prefactor =
      log_gamma(p + 1.0) + log_gamma(2.0 * m + p + mu) - log_gamma(2.0 * m + mu);
  if (f.kind == FChoice::Kind::constant) {
    form.a = {p + 1.0, 2.0 * m + p + mu};
    form.b = {1.0, 2.0 * m + mu, 2.0 * m + mu};
    form.arg_scale = f.c * f.c;
  } else {
    form.a = {p + 1.0, 2.0 * m + p + mu, m + 0.5 * mu};
    form.b = {1.0, 2.0 * m + mu, 2.0 * m + mu};
    form.arg_scale = 1.0;
  }
  return form;
}

inline double normalization_closed(const StateSpec& spec) {
  spec.validate();
  const NormClosedForm form =
      norm_closed_form(spec.family, spec.f, spec.m, spec.p);
  const double x = std::norm(spec.z);
  SeriesResult fq = eval_pfq(form.a, form.b, form.arg_scale * x);
  return std::exp(-0.5 * (form.log_prefactor + std::log(fq.value)));
}

// N_p(|z|^2, m) from the coefficient series, cross-checked against the
// family's pFq closed form.
inline double normalization(const StateSpec& spec) {
  spec.validate();
  CoefficientTable kt(spec.family, spec.f, spec.m, spec.p);
  const double x = std::norm(spec.z);
  const double n_series =
      std::exp(-0.5 * detail::log_norm_series(kt, x).log_value);
  const double n_closed = normalization_closed(spec);
  if (std::abs(n_series - n_closed) > 1e-10 * std::abs(n_closed))
    throw consistency_error(
        "normalization: series and closed-form routes disagree");
  return n_series;
}

// Normalized amplitude vector c_n = N_p z^n / K_n^p with certified tail.
inline Coefficients build_state(const StateSpec& spec, double tol = 1e-15) {
  spec.validate();
  CoefficientTable kt(spec.family, spec.f, spec.m, spec.p);
  const double x = std::norm(spec.z);
  const detail::LogSeries s = detail::log_norm_series(kt, x, tol);
  const double log_n = -0.5 * s.log_value;

  Coefficients out;
  out.offset = spec.p;
  out.tail_bound = s.tail_rel;
  const int count = s.terms;
  out.amplitudes.reserve(count);
  const double az = std::abs(spec.z);
  const double ph = std::arg(spec.z);
  for (int n = 0; n < count; ++n) {
    if (n > 0 && az == 0.0) break;
    const SignedLog& lk = kt.log_k(n);
    const double mag = std::exp(log_n + n * std::log(az > 0.0 ? az : 1.0) - lk.log_abs);
    out.amplitudes.push_back(lk.sign * std::polar(mag, n * ph));
  }
  return out;
}

// <z_B; m|_{p_B} |z_A; m>_{p_A}; requires matching family, f and m.
inline std::complex<double> inner_product(const StateSpec& ket,
                                          const StateSpec& bra) {
  ket.validate();
  bra.validate();
  if (ket.family.kind != bra.family.kind || ket.m != bra.m ||
      ket.f.kind != bra.f.kind || ket.family.mu != bra.family.mu ||
      (ket.f.kind == FChoice::Kind::constant && ket.f.c != bra.f.c))
    throw domain_error("inner_product: states live in different chains");
  if (ket.p < bra.p) return std::conj(inner_product(bra, ket));

  const int q = ket.p - bra.p;
  CoefficientTable kt_ket(ket.family, ket.f, ket.m, ket.p);
  CoefficientTable kt_bra(bra.family, bra.f, bra.m, bra.p);

  const std::complex<double> w = std::conj(bra.z) * ket.z;
  const double aw = std::abs(w);

  // Series sum_n w^n / (K^{p_B}_{n+q} K^{p_A}_n); the per-step magnitude
  // ratio shares e_{n+p_A+1} between both coefficient chains.
  const SignedLog lk0 = kt_bra.log_k(q) * kt_ket.log_k(0);
  std::complex<double> term(lk0.sign, 0.0);
  std::complex<double> sum = term;
  double log_shift = -lk0.log_abs;
  if (aw > 0.0) {
    bool converged = false;
    for (int n = 0; n < 200000; ++n) {
      // Signs cancel pairwise between the two coefficient chains, so the
      // per-step ratio is the product of the two log-magnitude ratios.
      const double f_ket = std::exp(kt_ket.log_k(n).log_abs - kt_ket.log_k(n + 1).log_abs);
      const double f_bra = std::exp(kt_bra.log_k(n + q).log_abs - kt_bra.log_k(n + q + 1).log_abs);
      const double rho = aw * f_ket * f_bra;
      term *= w * f_ket * f_bra;
      sum += term;
      if (std::abs(sum) > 1e250 || std::abs(term) > 1e250) {
        sum *= 1e-250;
        term *= 1e-250;
        log_shift += std::log(1e250);
      }
      if (rho < 0.999 &&
          std::abs(term) * rho / (1.0 - rho) <= 1e-15 * std::abs(sum)) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw convergence_error("inner_product: series did not converge");
  }

  const double x_ket = std::norm(ket.z), x_bra = std::norm(bra.z);
  const double log_n_ket = -0.5 * detail::log_norm_series(kt_ket, x_ket).log_value;
  const double log_n_bra = -0.5 * detail::log_norm_series(kt_bra, x_bra).log_value;

  std::complex<double> pref(1.0, 0.0);
  double log_pref = log_n_ket + log_n_bra;
  if (q > 0) {
    const double azb = std::abs(bra.z);
    if (azb == 0.0) return 0.0;  // (z_B*)^q kills every term
    log_pref += q * std::log(azb);
    pref *= std::polar(1.0, -q * std::arg(bra.z));
  }
  return pref * sum * std::exp(log_pref + log_shift);
}

// Reproducing kernel K(z, z') = N_p(|z|^2) N_p(|z'|^2) / N_p^2(z'* z).
inline std::complex<double> kernel(const FamilySpec& fam, const FChoice& f,
                                   int m, int p, std::complex<double> z,
                                   std::complex<double> zp) {
  CoefficientTable kt(fam, f, m, p);
  const detail::ScaledComplex sw = detail::overlap_series(kt, std::conj(zp) * z);
  const detail::LogSeries sx = detail::log_norm_series(kt, std::norm(z));
  const detail::LogSeries sxp = detail::log_norm_series(kt, std::norm(zp));
  return sw.mant *
         std::exp(sw.log_shift - 0.5 * (sx.log_value + sxp.log_value));
}

struct KernelReport {
  double max_hermiticity_dev = 0.0;
  double max_diag_dev = 0.0;
  std::vector<double> idempotence_residuals;
  double max_idempotence_residual = 0.0;
};

// Certifies hermiticity, K(z,z) = 1 and idempotence under the measure
// `weight_fn` (the overcompleteness weight as a function of x = |z|^2).
inline KernelReport check_kernel_properties(
    const FamilySpec& fam, const FChoice& f, int m, int p,
    const std::function<double(double)>& weight_fn,
    const std::vector<std::pair<std::complex<double>, std::complex<double>>>&
        pairs,
    int angular_points = 128, double radial_rel_tol = 1e-7) {
  KernelReport rep;
  for (const auto& [z, zp] : pairs) {
    const std::complex<double> k12 = kernel(fam, f, m, p, z, zp);
    const std::complex<double> k21 = kernel(fam, f, m, p, zp, z);
    rep.max_hermiticity_dev =
        std::max(rep.max_hermiticity_dev, std::abs(k12 - std::conj(k21)));
    rep.max_diag_dev = std::max(
        {rep.max_diag_dev, std::abs(kernel(fam, f, m, p, z, z) - 1.0),
         std::abs(kernel(fam, f, m, p, zp, zp) - 1.0)});

    // int d2z'' w(|z''|^2) K(z, z'') K(z'', z'), radial x angular product grid.
    CoefficientTable kt(fam, f, m, p);
    const detail::LogSeries sx = detail::log_norm_series(kt, std::norm(z));
    const detail::LogSeries sxp = detail::log_norm_series(kt, std::norm(zp));
    auto angular = [&](double x) -> std::complex<double> {
      const double r = std::sqrt(x);
      const detail::LogSeries sxq = detail::log_norm_series(kt, x);
      std::complex<double> acc(0.0, 0.0);
      for (int j = 0; j < angular_points; ++j) {
        const double th = 2.0 * kPi * j / angular_points;
        const std::complex<double> zq = std::polar(r, th);
        const detail::ScaledComplex s1 =
            detail::overlap_series(kt, std::conj(zq) * z);
        const detail::ScaledComplex s2 =
            detail::overlap_series(kt, std::conj(zp) * zq);
        acc += s1.mant * s2.mant *
               std::exp(s1.log_shift + s2.log_shift - sxq.log_value -
                        0.5 * (sx.log_value + sxp.log_value));
      }
      // d2z = (1/2) dx dtheta
      return weight_fn(x) * 0.5 * (2.0 * kPi / angular_points) * acc;
    };
    std::unordered_map<double, std::complex<double>> cache;
    auto cached = [&](double x) -> std::complex<double> {
      if (x <= 0.0) return {0.0, 0.0};
      auto it = cache.find(x);
      if (it != cache.end()) return it->second;
      const std::complex<double> v = angular(x);
      cache.emplace(x, v);
      return v;
    };
    const double x0 = std::max({1.0, std::norm(z), std::norm(zp)});
    QuadResult re_part = integrate_decaying(
        [&](double x) { return cached(x).real(); }, x0, radial_rel_tol, 1e-11);
    QuadResult im_part = integrate_decaying(
        [&](double x) { return cached(x).imag(); }, x0, radial_rel_tol, 1e-11);
    const double residual =
        std::abs(std::complex<double>(re_part.value, im_part.value) - k12);
    rep.idempotence_residuals.push_back(residual);
    rep.max_idempotence_residual =
        std::max(rep.max_idempotence_residual, residual);
  }
  return rep;
}

struct ContinuityRow {
  double delta = 0.0;
  double dist_sq_direct = 0.0;   // sum |c_n - c'_n|^2
  double dist_sq_overlap = 0.0;  // 2 [1 - Re <z'|z>]
};

struct ContinuityReport {
  std::vector<ContinuityRow> rows;
  bool monotone_decreasing = true;
  double max_identity_gap = 0.0;  // |direct - overlap| over the rows
};

// ||z,m>_p - |z',m>_p||^2 along z' = z + delta for a shrinking delta
// sequence; both the direct amplitude distance and the overlap identity.
inline ContinuityReport label_continuity_check(const StateSpec& spec,
                                               const std::vector<double>& deltas) {
  ContinuityReport rep;
  const Coefficients base = build_state(spec);
  for (double d : deltas) {
    StateSpec moved = spec;
    moved.z = spec.z + d;
    const Coefficients other = build_state(moved);
    const size_t len = std::max(base.amplitudes.size(), other.amplitudes.size());
    double dist = 0.0;
    for (size_t i = 0; i < len; ++i) {
      const std::complex<double> a =
          i < base.amplitudes.size() ? base.amplitudes[i] : 0.0;
      const std::complex<double> b =
          i < other.amplitudes.size() ? other.amplitudes[i] : 0.0;
      dist += std::norm(a - b);
    }
    const double overlap =
        2.0 * (1.0 - inner_product(spec, moved).real());
    rep.rows.push_back({d, dist, overlap});
    rep.max_identity_gap =
        std::max(rep.max_identity_gap, std::abs(dist - overlap));
  }
  for (size_t i = 1; i < rep.rows.size(); ++i)
    if (!(rep.rows[i].dist_sq_direct < rep.rows[i - 1].dist_sq_direct))
      rep.monotone_decreasing = false;
  return rep;
}

}  // namespace gpahcs
