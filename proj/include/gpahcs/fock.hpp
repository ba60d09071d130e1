#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "gpahcs/coefficients.hpp"
#include "gpahcs/errors.hpp"
#include "gpahcs/family.hpp"

namespace gpahcs {

// Truncated m-chain Fock space: basis |0>..|D-1> stand for |m>..|m+D-1> of
// the underlying ladder.
struct FockSpace {
  FamilySpec family = FamilySpec::hermite();
  int m = 0;
  int dim = 2;

  FockSpace(const FamilySpec& fam, int m_, int dim_)
      : family(fam), m(m_), dim(dim_) {
    if (m < 0) throw domain_error("FockSpace: m must be nonnegative");
    if (dim < 2) throw domain_error("FockSpace: dimension must be >= 2");
    for (int n = 1; n < dim; ++n)
      if (!(excitation(family, m, n) > 0.0))
        throw domain_error("FockSpace: nonpositive excitation inside truncation");
  }
};

// Dense real matrix, row-major.
class OperatorMatrix {
 public:
  explicit OperatorMatrix(int dim) : dim_(dim), e_(dim * dim, 0.0) {}
  double& at(int i, int j) { return e_[i * dim_ + j]; }
  double at(int i, int j) const { return e_[i * dim_ + j]; }
  int dim() const { return dim_; }

  OperatorMatrix operator*(const OperatorMatrix& o) const {
    OperatorMatrix r(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int k = 0; k < dim_; ++k) {
        const double v = at(i, k);
        if (v == 0.0) continue;
        for (int j = 0; j < dim_; ++j) r.at(i, j) += v * o.at(k, j);
      }
    return r;
  }
  OperatorMatrix operator-(const OperatorMatrix& o) const {
    OperatorMatrix r(dim_);
    for (int i = 0; i < dim_ * dim_; ++i) r.e_[i] = e_[i] - o.e_[i];
    return r;
  }
  OperatorMatrix scaled(double s) const {
    OperatorMatrix r(dim_);
    for (int i = 0; i < dim_ * dim_; ++i) r.e_[i] = s * e_[i];
    return r;
  }
  OperatorMatrix transposed() const {
    OperatorMatrix r(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) r.at(j, i) = at(i, j);
    return r;
  }

  // Max-norm over rows/cols 0..dim-2; the truncation boundary row is wrong
  // by construction in any finite matrix realization.
  double interior_max_norm() const {
    double mx = 0.0;
    for (int i = 0; i + 1 < dim_; ++i)
      for (int j = 0; j + 1 < dim_; ++j) mx = std::max(mx, std::abs(at(i, j)));
    return mx;
  }

  std::vector<std::complex<double>> apply(
      const std::vector<std::complex<double>>& v) const {
    std::vector<std::complex<double>> r(dim_, {0.0, 0.0});
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        if (at(i, j) != 0.0) r[i] += at(i, j) * v[j];
    return r;
  }

 private:
  int dim_;
  std::vector<double> e_;
};

struct LadderOperators {
  FockSpace space;
  OperatorMatrix lowering;  // <n-1|a|n> = sqrt(e_n)
  OperatorMatrix raising;   // <n+1|a+|n> = sqrt(e_{n+1})
  OperatorMatrix number;    // diag m+n
  OperatorMatrix gap;       // diag r_{m+n+1} = -(m+n) sigma'' - tau'
};

inline LadderOperators build_ladder(const FockSpace& space) {
  const int d = space.dim;
  LadderOperators ops{space, OperatorMatrix(d), OperatorMatrix(d),
                      OperatorMatrix(d), OperatorMatrix(d)};
  for (int n = 1; n < d; ++n) {
    const double e = excitation(space.family, space.m, n);
    ops.lowering.at(n - 1, n) = std::sqrt(e);
  }
  ops.raising = ops.lowering.transposed();
  for (int n = 0; n < d; ++n) {
    ops.number.at(n, n) = space.m + n;
    ops.gap.at(n, n) = spectral_gap(space.family, space.m + n + 1);
  }
  return ops;
}

struct AlgebraReport {
  double ladder_commutator_dev = 0.0;   // ||[a, a+] - R||
  double raising_gap_dev = 0.0;         // ||[a+, R] - sigma'' a+||
  double lowering_gap_dev = 0.0;        // ||[a, R] + sigma'' a||
  double max_deviation() const {
    return std::max({ladder_commutator_dev, raising_gap_dev, lowering_gap_dev});
  }
};

// Deviations of the three defining commutation relations on the interior
// block (truncation boundary excluded).
inline AlgebraReport check_algebra(const FockSpace& space) {
  if (space.dim < 3)
    throw domain_error("check_algebra: need dim >= 3 for a nonempty interior");
  const LadderOperators ops = build_ladder(space);
  const double spp = space.family.sigma_pp;
  auto comm = [](const OperatorMatrix& x, const OperatorMatrix& y) {
    return x * y - y * x;
  };
  AlgebraReport rep;
  rep.ladder_commutator_dev =
      (comm(ops.lowering, ops.raising) - ops.gap).interior_max_norm();
  rep.raising_gap_dev =
      (comm(ops.raising, ops.gap) - ops.raising.scaled(spp)).interior_max_norm();
  rep.lowering_gap_dev =
      (comm(ops.lowering, ops.gap) - ops.lowering.scaled(-spp)).interior_max_norm();
  return rep;
}

// (a+)^p applied by literal matrix application; offset bookkeeping keeps the
// amplitudes aligned with their Fock labels.
inline Coefficients photon_add(const FockSpace& space, const Coefficients& vec,
                               int p) {
  if (p < 0) throw domain_error("photon_add: p must be nonnegative");
  const int d = space.dim;
  const int top = vec.offset + static_cast<int>(vec.amplitudes.size()) - 1;
  if (top + p > d - 1)
    throw dimension_error("photon_add: truncation has no headroom for p quanta");
  if (p == 0) return vec;

  const LadderOperators ops = build_ladder(space);
  std::vector<std::complex<double>> full(d, {0.0, 0.0});
  for (size_t i = 0; i < vec.amplitudes.size(); ++i)
    full[vec.offset + i] = vec.amplitudes[i];
  for (int k = 0; k < p; ++k) full = ops.raising.apply(full);

  Coefficients out;
  out.offset = vec.offset + p;
  out.tail_bound = vec.tail_bound;
  out.amplitudes.assign(full.begin() + out.offset, full.end());
  while (!out.amplitudes.empty() && std::abs(out.amplitudes.back()) == 0.0)
    out.amplitudes.pop_back();
  return out;
}

}  // namespace gpahcs
