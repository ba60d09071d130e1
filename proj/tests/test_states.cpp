#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "gpahcs/measure.hpp"
#include "gpahcs/states.hpp"

using namespace gpahcs;

namespace {

StateSpec hermite_spec(std::complex<double> z, int m, int p, double c = 1.0) {
  StateSpec s;
  s.family = FamilySpec::hermite();
  s.f = FChoice::constant(c);
  s.z = z;
  s.m = m;
  s.p = p;
  return s;
}

StateSpec jacobi_spec(std::complex<double> z, int m, int p, double mu) {
  StateSpec s;
  s.family = FamilySpec::jacobi_mu(mu);
  s.f = FChoice::constant(1.0);
  s.z = z;
  s.m = m;
  s.p = p;
  return s;
}

StateSpec sqrtxi_spec(std::complex<double> z, int m, int p, double nu) {
  StateSpec s;
  s.family = FamilySpec::jacobi_mu(2.0 * nu);
  s.f = FChoice::sqrt_linear();
  s.z = z;
  s.m = m;
  s.p = p;
  return s;
}

}  // namespace

TEST_CASE("expansion coefficients against closed Gamma forms", "[states]") {
  // Gamma(3)/sqrt(Gamma(4)) = 2/sqrt(6)
  SignedLog k = log_k_np(FamilySpec::hermite(), FChoice::constant(1.0), 0, 1, 2);
  CHECK(k.value() == Catch::Approx(2.0 / std::sqrt(6.0)).epsilon(1e-13));

  // K_0^p = 1/sqrt(eps_p): Hermite, p = 2
  SignedLog k0 = log_k_np(FamilySpec::hermite(), FChoice::constant(1.0), 4, 2, 0);
  CHECK(k0.value() == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));

  // p = 0 reduction for the quadratic family: K_n^0 = sqrt(eps_n)
  FamilySpec j = FamilySpec::jacobi_mu(1.5);
  for (int n : {0, 1, 4, 9}) {
    SignedLog kj = log_k_np(j, FChoice::constant(1.0), 2, 0, n);
    CHECK(kj.log_abs ==
          Catch::Approx(0.5 * log_excitation_product(j, 2, n)).margin(1e-12));
  }
}

TEST_CASE("running-product K matches the closed form across instances",
          "[states]") {
  struct Case {
    FamilySpec fam;
    FChoice f;
  };
  const Case cases[] = {
      {FamilySpec::hermite(), FChoice::constant(1.0)},
      {FamilySpec::hermite(), FChoice::constant(-2.5)},
      {FamilySpec::laguerre(1.0), FChoice::constant(0.7)},
      {FamilySpec::jacobi_mu(2.0), FChoice::constant(1.0)},
      {FamilySpec::hypergeometric_mu(0.5), FChoice::constant(1.0)},
      {FamilySpec::jacobi_mu(4.0), FChoice::sqrt_linear()},
  };
  for (const auto& c : cases) {
    for (int m : {0, 2}) {
      for (int p : {0, 1, 3}) {
        for (int n : {0, 1, 5, 40, 200}) {
          SignedLog a = log_k_np(c.fam, c.f, m, p, n);
          SignedLog b = log_k_np_closed(c.fam, c.f, m, p, n);
          CHECK(a.sign == b.sign);
          CHECK(a.log_abs == Catch::Approx(b.log_abs).margin(1e-11));
        }
      }
    }
  }
}

TEST_CASE("normalization closed forms", "[states]") {
  // canonical coherent state: N_0 = exp(-|cz|^2/2)
  for (double az : {0.3, 1.0, 2.0}) {
    StateSpec s = hermite_spec({az, 0.0}, 3, 0);
    CHECK(normalization(s) == Catch::Approx(std::exp(-0.5 * az * az)).epsilon(1e-12));
  }
  // c kept explicit
  StateSpec sc = hermite_spec({0.5, 0.5}, 0, 0, 2.0);
  CHECK(normalization(sc) ==
        Catch::Approx(std::exp(-0.5 * 4.0 * 0.5)).epsilon(1e-12));

  // Hermite p=1, |z|^2 = 1: (2e)^{-1/2}
  StateSpec s1 = hermite_spec({1.0, 0.0}, 0, 1);
  CHECK(normalization(s1) ==
        Catch::Approx(0.42888194248035339824009482064).epsilon(1e-12));

  // z = 0, p = 2: single surviving term |K_0^2| = 1/sqrt(2)
  StateSpec s0 = hermite_spec({0.0, 0.0}, 0, 2);
  CHECK(normalization(s0) == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("normalization series equals the pFq closed form on a grid",
          "[states]") {
  for (double az : {0.1, 0.5, 1.0, 2.0, 4.0}) {
    for (int p = 0; p <= 4; ++p) {
      StateSpec cases[] = {hermite_spec({az, 0.0}, 2, p),
                           jacobi_spec({0.0, az}, 1, p, 2.0),
                           sqrtxi_spec({az / std::sqrt(2.0), az / std::sqrt(2.0)}, 1, p, 1.0)};
      for (const StateSpec& s : cases) {
        const double series = normalization(s);  // internally cross-checked
        const double closed = normalization_closed(s);
        CHECK(series == Catch::Approx(closed).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("p = 0 normalization reductions to Bessel forms", "[states]") {
  // 1/N_0^2 = 0F1(; 2m+mu; x) = Gamma(2m+mu) x^{(1-2m-mu)/2} I_{2m+mu-1}(2 sqrt x)
  for (double mu : {1.5, 2.0}) {
    for (int m : {0, 1, 4}) {
      for (double x : {0.4, 1.0, 4.0}) {
        StateSpec s = jacobi_spec({std::sqrt(x), 0.0}, m, 0, mu);
        const double w = 2.0 * m + mu;
        const double bess = std::exp(log_gamma(w)) *
                            std::pow(x, 0.5 * (1.0 - w)) *
                            bessel_i(w - 1.0, 2.0 * std::sqrt(x));
        CHECK(normalization(s) ==
              Catch::Approx(1.0 / std::sqrt(bess)).epsilon(1e-10));
      }
    }
  }
  // sqrt-linear f: 1/N_0^2 = 1F1(m+nu; 2m+2nu; x)
  //   = 2^{2m+2nu-1} x^{1/2-m-nu} e^{x/2} I_{m+nu-1/2}(x/2) Gamma(m+nu+1/2)
  for (double nu : {1.0, 2.0}) {
    for (int m : {1, 3}) {
      for (double x : {0.7, 2.25}) {
        StateSpec s = sqrtxi_spec({std::sqrt(x), 0.0}, m, 0, nu);
        const double a = m + nu;
        const double bess = std::pow(2.0, 2.0 * a - 1.0) *
                            std::pow(x, 0.5 - a) * std::exp(0.5 * x) *
                            bessel_i(a - 0.5, 0.5 * x) *
                            std::exp(log_gamma(a + 0.5));
        CHECK(normalization(s) ==
              Catch::Approx(1.0 / std::sqrt(bess)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("build_state produces a certified unit vector", "[states]") {
  StateSpec cases[] = {hermite_spec({2.0, 1.0}, 2, 3),
                       jacobi_spec({-1.0, 2.2}, 0, 2, 0.5),
                       sqrtxi_spec({3.0, -0.5}, 2, 4, 2.8)};
  for (const StateSpec& s : cases) {
    Coefficients c = build_state(s);
    CHECK(c.offset == s.p);
    CHECK(c.norm_sq() == Catch::Approx(1.0).margin(1e-12));
    CHECK(c.tail_bound < 1e-14);
    // truncation certificate: the last kept amplitude is already negligible
    CHECK(std::norm(c.amplitudes.back()) < 1e-14);
  }

  // z = 0: unit vector at Fock label p
  Coefficients delta = build_state(hermite_spec({0.0, 0.0}, 1, 3));
  REQUIRE(delta.amplitudes.size() == 1);
  CHECK(std::abs(delta.amplitudes[0]) == Catch::Approx(1.0));
  CHECK(delta.offset == 3);
}

TEST_CASE("canonical coherent amplitudes at p = 0", "[states]") {
  const std::complex<double> z{0.7, -0.4};
  Coefficients c = build_state(hermite_spec(z, 0, 0));
  const double x = std::norm(z);
  for (size_t n = 0; n < 12; ++n) {
    const std::complex<double> expect =
        std::exp(-0.5 * x) * std::pow(z, n) /
        std::sqrt(std::exp(log_gamma(n + 1.0)));
    CHECK(std::abs(c.amplitudes[n] - expect) < 1e-13);
  }
}

TEST_CASE("quadratic-family amplitudes follow the Pochhammer form", "[states]") {
  const std::complex<double> z{1.2, 0.5};
  const double mu = 2.0;
  const int m = 1;
  Coefficients c = build_state(jacobi_spec(z, m, 0, mu));
  const double n0 = normalization(jacobi_spec(z, m, 0, mu));
  for (size_t n = 0; n < 10; ++n) {
    const double denom = std::exp(
        0.5 * (log_gamma(n + 1.0) +
               log_gamma(n + 2.0 * m + mu) - log_gamma(2.0 * m + mu)));
    const std::complex<double> expect = n0 * std::pow(z, n) / denom;
    CHECK(std::abs(c.amplitudes[n] - expect) < 1e-13);
  }
}

TEST_CASE("eigenstate recurrence at p = 0", "[states]") {
  StateSpec cases[] = {hermite_spec({1.5, 0.7}, 2, 0, 1.3),
                       jacobi_spec({0.9, -1.1}, 1, 0, 1.5),
                       sqrtxi_spec({2.0, 0.1}, 0, 0, 2.0)};
  for (const StateSpec& s : cases) {
    Coefficients c = build_state(s);
    for (size_t n = 0; n + 1 < c.amplitudes.size(); ++n) {
      const double e_next = excitation(s.family, s.m, static_cast<int>(n) + 1);
      const double fr = f_value(
          s.family, s.f, spectral_gap(s.family, s.m + static_cast<int>(n) + 2));
      const std::complex<double> lhs = std::sqrt(e_next) * c.amplitudes[n + 1];
      const std::complex<double> rhs = s.z * fr * c.amplitudes[n];
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("inner product reference cases", "[states]") {
  StateSpec a = hermite_spec({1.3, 0.2}, 1, 2);
  CHECK(std::abs(inner_product(a, a) - 1.0) < 1e-12);

  // mismatched chains are rejected
  StateSpec other = jacobi_spec({1.3, 0.2}, 1, 2, 2.0);
  CHECK_THROWS_AS(inner_product(a, other), domain_error);

  // p = p' = 0 quadratic family: 0F1 quotient
  const std::complex<double> z{0.8, 0.4}, zp{-0.3, 1.1};
  const double mu = 2.0;
  const int m = 1;
  StateSpec ka = jacobi_spec(z, m, 0, mu);
  StateSpec kb = jacobi_spec(zp, m, 0, mu);
  const double w = 2.0 * m + mu;
  // series for 0F1(; w; u) at complex argument
  std::complex<double> num(0.0, 0.0), term(1.0, 0.0);
  const std::complex<double> u = std::conj(zp) * z;
  for (int k = 0; k < 80; ++k) {
    if (k > 0) term *= u / ((w + k - 1.0) * k);
    num += term;
  }
  const double den = std::sqrt(eval_pfq({}, {w}, std::norm(zp)).value *
                               eval_pfq({}, {w}, std::norm(z)).value);
  CHECK(std::abs(inner_product(ka, kb) - num / den) < 1e-12);

  // z' = 0, p' = p: single-term collapse
  StateSpec origin = hermite_spec({0.0, 0.0}, 1, 2);
  StateSpec at = hermite_spec({1.7, -0.6}, 1, 2);
  const std::complex<double> got = inner_product(at, origin);
  CoefficientTable kt(at.family, at.f, 1, 2);
  const double expect = normalization(at) * normalization(origin) *
                        std::exp(-2.0 * kt.log_k(0).log_abs);
  CHECK(std::abs(got - expect) < 1e-12);
}

TEST_CASE("hermite inner product against the 1F1 closed form", "[states]") {
  // p >= p' with the confluent closed form (real z z'* for a real check)
  const double c = 1.0;
  StateSpec ket = hermite_spec({1.4, 0.0}, 2, 3, c);
  StateSpec bra = hermite_spec({0.9, 0.0}, 2, 1, c);
  const int p = 3, pp = 1, q = p - pp;
  const double u = 0.9 * 1.4;  // z'* z
  const double closed =
      normalization(bra) * normalization(ket) * std::pow(0.9 * c, q) *
      std::exp(log_gamma(p + 1.0) - log_gamma(q + 1.0)) *
      eval_pfq({p + 1.0}, {q + 1.0}, c * c * u).value;
  CHECK(inner_product(ket, bra).real() == Catch::Approx(closed).epsilon(1e-11));
  CHECK(std::abs(inner_product(ket, bra).imag()) < 1e-13);

  // conjugate swap covers p < p'
  CHECK(std::abs(inner_product(bra, ket) -
                 std::conj(inner_product(ket, bra))) < 1e-13);
}

TEST_CASE("states with different p are distinct", "[states]") {
  StateSpec a = hermite_spec({1.0, 0.5}, 1, 1);
  StateSpec b = hermite_spec({1.0, 0.5}, 1, 3);
  const double gap = 2.0 * (1.0 - inner_product(a, b).real());
  CHECK(gap > 1e-3);
}

TEST_CASE("kernel hermiticity, diagonal and conjugation", "[states]") {
  const FamilySpec fam = FamilySpec::jacobi_mu(1.5);
  const FChoice f = FChoice::constant(1.0);
  const std::complex<double> z{1.1, -0.7}, zp{0.4, 0.9};
  const std::complex<double> k12 = kernel(fam, f, 1, 2, z, zp);
  const std::complex<double> k21 = kernel(fam, f, 1, 2, zp, z);
  CHECK(std::abs(k12 - std::conj(k21)) < 1e-13);
  CHECK(std::abs(kernel(fam, f, 1, 2, z, z) - 1.0) < 1e-13);
  // kernel must agree with the inner product definition
  StateSpec ka = jacobi_spec(z, 1, 2, 1.5);
  StateSpec kb = jacobi_spec(zp, 1, 2, 1.5);
  CHECK(std::abs(k12 - inner_product(ka, kb)) < 1e-12);
}

TEST_CASE("kernel idempotence under the overcompleteness measure", "[states]") {
  const FamilySpec fam = FamilySpec::hermite();
  const FChoice f = FChoice::constant(1.0);
  const int m = 0, p = 1;
  MomentProblem mp = make_moment_problem(fam, f, m, p);
  std::unordered_map<double, double> wcache;
  auto weight_fn = [&](double x) {
    auto it = wcache.find(x);
    if (it != wcache.end()) return it->second;
    const double v = weight(mp, x);
    wcache.emplace(x, v);
    return v;
  };
  std::vector<std::pair<std::complex<double>, std::complex<double>>> pairs = {
      {{0.9, 0.3}, {-0.2, 0.8}},
      {{1.4, 0.0}, {0.5, -0.5}},
  };
  KernelReport rep = check_kernel_properties(fam, f, m, p, weight_fn, pairs);
  CHECK(rep.max_hermiticity_dev < 1e-12);
  CHECK(rep.max_diag_dev < 1e-12);
  CHECK(rep.max_idempotence_residual < 1e-6);
}

TEST_CASE("label continuity", "[states]") {
  StateSpec s = hermite_spec({1.0, 0.0}, 0, 1);
  std::vector<double> deltas;
  for (int k = 1; k <= 6; ++k) deltas.push_back(std::pow(10.0, -k));
  ContinuityReport rep = label_continuity_check(s, deltas);
  REQUIRE(rep.rows.size() == 6);
  CHECK(rep.monotone_decreasing);
  CHECK(rep.max_identity_gap < 1e-10);
  // quadratic local behavior: two decades per step once delta is small
  for (size_t i = 1; i < rep.rows.size(); ++i) {
    const double ratio = rep.rows[i - 1].dist_sq_direct / rep.rows[i].dist_sq_direct;
    if (i >= 2) CHECK(ratio == Catch::Approx(100.0).epsilon(0.15));
  }
  // identical labels: zero distance
  ContinuityReport same = label_continuity_check(s, {0.0});
  CHECK(same.rows[0].dist_sq_direct == 0.0);
}
