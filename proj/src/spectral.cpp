#include "fraclab/spectral.hpp"

#include "fraclab/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

namespace fraclab {

namespace {

void check_sigma(int n, double sigma) {
  if (!(sigma > 0.0) || !(sigma < 0.5 * n)) {
    std::ostringstream os;
    os << "sigma = " << sigma << " outside (0, n/2) = (0, " << 0.5 * n << ")";
    throw ParameterDomainError(os.str());
  }
}

double gamma_ratio(double a, double b) { return boost::math::tgamma_ratio(a, b); }

// (1 - t^2)^{l/2}, without pow for the common small cases.
double sine_power(double t, int l) {
  if (l == 0) return 1.0;
  const double s2 = std::max(0.0, 1.0 - t * t);
  if (l == 2) return s2;
  return std::pow(s2, 0.5 * l);
}

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

double c_n_sigma(int n, double sigma) {
  check_sigma(n, sigma);
  return gamma_ratio(0.5 * n + sigma, 0.5 * n - sigma);
}

double psigma_eigenvalue(int n, double sigma, int k) {
  check_sigma(n, sigma);
  if (k < 0) throw ParameterDomainError("harmonic degree must be nonnegative");
  const double h = k + 0.5 * n;
  return gamma_ratio(h + sigma, h - sigma);
}

Eigen::VectorXd psigma_spectrum(int n, double sigma, int L) {
  Eigen::VectorXd out(L + 1);
  for (int k = 0; k <= L; ++k) out[k] = psigma_eigenvalue(n, sigma, k);
  return out;
}

double beckner_constant(int n, double sigma) {
  return std::pow(sphere_area(n), 2.0 * sigma / n) * c_n_sigma(n, sigma);
}

double critical_exponent(int n, double sigma) {
  check_sigma(n, sigma);
  return 2.0 * n / (n - 2.0 * sigma);
}

void gegenbauer_ratio(int count, double mu, double t, double* out) {
  if (count <= 0) return;
  out[0] = 1.0;
  if (count == 1) return;
  out[1] = t;
  for (int j = 2; j < count; ++j) {
    out[j] = (2.0 * (j + mu - 1.0) * t * out[j - 1] - (j - 1.0) * out[j - 2]) / (j + 2.0 * mu - 1.0);
  }
}

// ---------------------------------------------------------------------------
// HarmonicBasis

long HarmonicBasis::space_dimension(int n, int L, Symmetry symmetry) {
  if (symmetry == Symmetry::zonal) return L + 1;
  if (n == 2) return static_cast<long>(L + 1) * (L + 1);
  if (symmetry == Symmetry::axial) return static_cast<long>(L + 1) * (L + 2) / 2;
  return static_cast<long>(L + 1) * (L + 2) * (2 * L + 3) / 6;
}

std::shared_ptr<const HarmonicBasis> HarmonicBasis::create(int n, int L, Symmetry symmetry) {
  return std::shared_ptr<const HarmonicBasis>(new HarmonicBasis(n, L, symmetry));
}

HarmonicBasis::HarmonicBasis(int n, int L, Symmetry symmetry) : n_(n), L_(L), symmetry_(symmetry) {
  if (n < 2) throw UnsupportedDimensionError("harmonic bases require n >= 2");
  if (L < 0) throw ParameterDomainError("truncation degree must be nonnegative");
  if (symmetry == Symmetry::full && n > 3) {
    throw UnsupportedDimensionError("full harmonic bases are limited to n <= 3; use zonal mode");
  }
  if (symmetry == Symmetry::axial && n != 3) {
    throw UnsupportedDimensionError("axial harmonic bases exist only for n = 3");
  }

  // Bottom level.
  std::vector<int> sub_degree;
  if (symmetry == Symmetry::zonal) {
    base_.trivial = true;
    base_.m = {0};
    base_.is_sine = {0};
    base_.norm = {1.0};
    sub_degree = {0};
  } else {
    base_.m_max = symmetry == Symmetry::axial ? 0 : L;
    const int M = symmetry == Symmetry::axial ? 1 : 2 * L + 2;
    const double w = 2.0 * std::numbers::pi / M;
    auto add = [&](int m, int sine) {
      double s = 0.0;
      for (int j = 0; j < M; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / M;
        const double v = sine ? std::sin(m * phi) : std::cos(m * phi);
        s += w * v * v;
      }
      base_.m.push_back(m);
      base_.is_sine.push_back(sine);
      base_.norm.push_back(1.0 / std::sqrt(s));
      sub_degree.push_back(m);
    };
    add(0, 0);
    for (int m = 1; m <= base_.m_max; ++m) {
      add(m, 0);
      add(m, 1);
    }
  }

  // Polar levels from the innermost sphere outwards.
  std::vector<int> dims;
  if (symmetry == Symmetry::zonal) {
    dims = {n};
  } else {
    for (int d = 2; d <= n; ++d) dims.push_back(d);
  }
  const double latitude_weight = symmetry == Symmetry::zonal ? sphere_area(n - 1) : 1.0;
  std::vector<PolarLevel> inner_to_outer;
  std::vector<double> ratio(L + 1);
  for (int d : dims) {
    PolarLevel lev;
    lev.dim = d;
    lev.sub_degree = sub_degree;
    lev.offset.assign(L + 2, 0);
    lev.prefix.assign(L + 1, 0);
    for (int k = 0; k <= L; ++k) {
      int count = 0;
      for (int sd : sub_degree) count += sd <= k ? 1 : 0;
      lev.prefix[k] = count;
      lev.offset[k + 1] = lev.offset[k] + count;
    }
    lev.size = static_cast<int>(lev.offset[L + 1]);
    for (std::size_t s = 0; s < sub_degree.size(); ++s) {
      if (lev.distinct.empty() || lev.distinct.back() != sub_degree[s]) lev.distinct.push_back(sub_degree[s]);
    }

    // Gauss rule with L + 1 nodes integrates the degree-2L products exactly.
    const PolarRule rule = gauss_gegenbauer(L + 1, 0.5 * (d - 2));
    lev.norm.assign(L + 1, {});
    for (int l : lev.distinct) {
      if (l > L) continue;
      const double mu = l + 0.5 * (d - 1);
      std::vector<double> acc(L - l + 1, 0.0);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = rule.nodes[i];
        const double s = sine_power(t, l);
        gegenbauer_ratio(L - l + 1, mu, t, ratio.data());
        const double w = rule.weights[i] * latitude_weight;
        for (int j = 0; j <= L - l; ++j) acc[j] += w * (s * ratio[j]) * (s * ratio[j]);
      }
      lev.norm[l].resize(L - l + 1);
      for (int j = 0; j <= L - l; ++j) lev.norm[l][j] = 1.0 / std::sqrt(acc[j]);
    }

    sub_degree.clear();
    for (int k = 0; k <= L; ++k) {
      for (int s = 0; s < lev.prefix[k]; ++s) sub_degree.push_back(k);
    }
    inner_to_outer.push_back(std::move(lev));
  }
  levels_.assign(inner_to_outer.rbegin(), inner_to_outer.rend());
  degree_ = sub_degree;
}

Eigen::VectorXd HarmonicBasis::evaluate_all(const Eigen::VectorXd& x) const {
  if (x.size() != n_ + 1) throw ConfigurationError("point dimension does not match the basis");
  // Polar coordinates, outermost first.
  std::vector<double> ts(levels_.size());
  Eigen::VectorXd y = x;
  double phi = 0.0;
  for (std::size_t p = 0; p < levels_.size(); ++p) {
    const int d = levels_[p].dim;
    const double t = std::clamp(y[d], -1.0, 1.0);
    ts[p] = t;
    const double r = std::sqrt(std::max(0.0, 1.0 - t * t));
    if (r > 1e-300) {
      y.head(d) /= r;
    } else {
      y.head(d).setZero();
      y[d - 1] = 1.0;
    }
  }
  if (!base_.trivial) phi = std::atan2(y[1], y[0]);

  std::vector<double> vals(base_.size());
  for (int s = 0; s < base_.size(); ++s) {
    const int m = base_.m[s];
    if (symmetry_ == Symmetry::axial) {
      vals[s] = base_.norm[s];
    } else {
      vals[s] = base_.norm[s] * (base_.is_sine[s] ? std::sin(m * phi) : std::cos(m * phi));
    }
  }
  std::vector<double> ratio(L_ + 1);
  for (std::size_t p = levels_.size(); p-- > 0;) {
    const PolarLevel& lev = levels_[p];
    const double t = ts[p];
    std::vector<double> next(lev.size, 0.0);
    for (int l : lev.distinct) {
      if (l > L_) continue;
      const double mu = l + 0.5 * (lev.dim - 1);
      gegenbauer_ratio(L_ - l + 1, mu, t, ratio.data());
      const double s = sine_power(t, l);
      const int begin = l > 0 ? lev.prefix[l - 1] : 0;
      const int end = lev.prefix[l];
      for (int j = 0; j <= L_ - l; ++j) {
        const double pv = lev.norm[l][j] * s * ratio[j];
        for (int sub = begin; sub < end; ++sub) next[lev.offset[l + j] + sub] = pv * vals[sub];
      }
    }
    vals.swap(next);
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::string HarmonicBasis::label(Eigen::Index i) const {
  if (i < 0 || i >= size()) throw ConfigurationError("basis index out of range");
  std::ostringstream os;
  long idx = static_cast<long>(i);
  for (std::size_t p = 0; p < levels_.size(); ++p) {
    const PolarLevel& lev = levels_[p];
    int k = 0;
    while (lev.offset[k + 1] <= idx) ++k;
    os << (p == 0 ? "k=" : " l=") << k;
    idx -= lev.offset[k];
  }
  if (!base_.trivial) {
    os << " m=" << base_.m[idx] << (base_.m[idx] == 0 ? "" : (base_.is_sine[idx] ? "s" : "c"));
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// SpectralField

SpectralField::SpectralField(std::shared_ptr<const HarmonicBasis> basis, Eigen::VectorXd coeffs)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
  if (!basis_) throw ConfigurationError("spectral field without a basis");
  if (coeffs_.size() != basis_->size()) {
    throw InvariantViolation("coefficient count does not match the harmonic space dimension");
  }
  if (!coeffs_.allFinite()) throw InvariantViolation("spectral field has non-finite coefficients");
}

SpectralField SpectralField::zero(std::shared_ptr<const HarmonicBasis> basis) {
  const Eigen::Index m = basis->size();
  return SpectralField(std::move(basis), Eigen::VectorXd::Zero(m));
}

double SpectralField::evaluate(const Eigen::VectorXd& x) const { return basis_->evaluate_all(x).dot(coeffs_); }

void require_same_space(const SpectralField& a, const SpectralField& b) {
  if (!a.basis().same_space(b.basis())) {
    throw ConfigurationError("fields live on different harmonic spaces (dimension, truncation or symmetry)");
  }
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same_space(*this, other);
  coeffs_ += other.coeffs_;
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_same_space(*this, other);
  coeffs_ -= other.coeffs_;
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

// ---------------------------------------------------------------------------
// SphericalTransform

SphericalTransform::SphericalTransform(std::shared_ptr<const HarmonicBasis> basis,
                                       std::shared_ptr<const QuadratureGrid> grid)
    : basis_(std::move(basis)), grid_(std::move(grid)) {
  if (!basis_ || !grid_) throw ConfigurationError("transform needs a basis and a grid");
  if (basis_->dimension() != grid_->dimension || basis_->symmetry() != grid_->symmetry) {
    throw ConfigurationError("grid and basis differ in dimension or symmetry");
  }
  if (grid_->degree < basis_->truncation()) {
    std::ostringstream os;
    os << "grid built for degree " << grid_->degree << " cannot resolve truncation " << basis_->truncation();
    throw ConfigurationError(os.str());
  }
  const auto& base = basis_->base();
  if (!base.trivial) {
    const int M = grid_->azimuth_count;
    fourier_analysis_.resize(M, base.size());
    fourier_synthesis_.resize(base.size(), M);
    for (int j = 0; j < M; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / M;
      for (int s = 0; s < base.size(); ++s) {
        const int m = base.m[s];
        const double v = base.norm[s] * (base.is_sine[s] ? std::sin(m * phi) : std::cos(m * phi));
        fourier_analysis_(j, s) = grid_->azimuth_weights[j] * v;
        fourier_synthesis_(s, j) = v;
      }
    }
  }
}

Eigen::VectorXd SphericalTransform::forward_raw(const Eigen::VectorXd& samples) const {
  const QuadratureGrid& g = *grid_;
  if (static_cast<std::size_t>(samples.size()) != g.size()) {
    throw ConfigurationError("sample vector does not match the grid size");
  }
  const auto& base = basis_->base();
  const auto& levels = basis_->levels();
  const int L = basis_->truncation();

  std::size_t rows = 1;
  for (const auto& r : g.polar) rows *= r.nodes.size();

  std::vector<double> cur;
  int width;  // labels of the current innermost representation
  if (base.trivial) {
    const double latitude = sphere_area(g.dimension - 1);
    cur.assign(samples.data(), samples.data() + samples.size());
    for (double& v : cur) v *= latitude;
    width = 1;
  } else {
    const int M = g.azimuth_count;
    Eigen::Map<const RowMajor> in(samples.data(), static_cast<Eigen::Index>(rows), M);
    RowMajor out = in * fourier_analysis_;
    cur.assign(out.data(), out.data() + out.size());
    width = base.size();
  }

  std::vector<double> ratio(L + 1), vals(L + 1);
  for (std::size_t p = levels.size(); p-- > 0;) {
    const auto& lev = levels[p];
    const PolarRule& rule = g.polar[p];
    const std::size_t Q = rule.nodes.size();
    rows /= Q;
    std::vector<double> next(rows * lev.size, 0.0);
    for (int l : lev.distinct) {
      if (l > L) continue;
      const double mu = l + 0.5 * (lev.dim - 1);
      const int begin = l > 0 ? lev.prefix[l - 1] : 0;
      const int end = lev.prefix[l];
      for (std::size_t i = 0; i < Q; ++i) {
        const double t = rule.nodes[i];
        gegenbauer_ratio(L - l + 1, mu, t, ratio.data());
        const double s = rule.weights[i] * sine_power(t, l);
        for (int j = 0; j <= L - l; ++j) vals[j] = s * lev.norm[l][j] * ratio[j];
        for (std::size_t r = 0; r < rows; ++r) {
          const double* in = &cur[(r * Q + i) * width];
          double* out = &next[r * lev.size];
          for (int sub = begin; sub < end; ++sub) {
            const double gv = in[sub];
            if (gv == 0.0) continue;
            for (int j = 0; j <= L - l; ++j) out[lev.offset[l + j] + sub] += vals[j] * gv;
          }
        }
      }
    }
    cur.swap(next);
    width = lev.size;
  }
  return Eigen::Map<Eigen::VectorXd>(cur.data(), static_cast<Eigen::Index>(cur.size()));
}

SpectralField SphericalTransform::forward(const Eigen::VectorXd& samples) const {
  return SpectralField(basis_, forward_raw(samples));
}

Eigen::VectorXd SphericalTransform::inverse(const SpectralField& field) const {
  if (!field.basis().same_space(*basis_)) {
    throw ConfigurationError("field does not belong to this transform's harmonic space");
  }
  const QuadratureGrid& g = *grid_;
  const auto& base = basis_->base();
  const auto& levels = basis_->levels();
  const int L = basis_->truncation();

  std::vector<double> cur(field.coefficients().data(), field.coefficients().data() + field.coefficients().size());
  std::size_t rows = 1;
  std::vector<double> ratio(L + 1), vals(L + 1);
  for (std::size_t p = 0; p < levels.size(); ++p) {
    const auto& lev = levels[p];
    const PolarRule& rule = g.polar[p];
    const std::size_t Q = rule.nodes.size();
    const int width = static_cast<int>(lev.sub_degree.size());
    std::vector<double> next(rows * Q * width, 0.0);
    for (int l : lev.distinct) {
      if (l > L) continue;
      const double mu = l + 0.5 * (lev.dim - 1);
      const int begin = l > 0 ? lev.prefix[l - 1] : 0;
      const int end = lev.prefix[l];
      for (std::size_t i = 0; i < Q; ++i) {
        const double t = rule.nodes[i];
        gegenbauer_ratio(L - l + 1, mu, t, ratio.data());
        const double s = sine_power(t, l);
        for (int j = 0; j <= L - l; ++j) vals[j] = s * lev.norm[l][j] * ratio[j];
        for (std::size_t r = 0; r < rows; ++r) {
          const double* in = &cur[r * lev.size];
          double* out = &next[(r * Q + i) * width];
          for (int sub = begin; sub < end; ++sub) {
            double acc = 0.0;
            for (int j = 0; j <= L - l; ++j) acc += vals[j] * in[lev.offset[l + j] + sub];
            out[sub] = acc;
          }
        }
      }
    }
    cur.swap(next);
    rows *= Q;
  }

  if (base.trivial) {
    return Eigen::Map<Eigen::VectorXd>(cur.data(), static_cast<Eigen::Index>(cur.size()));
  }
  Eigen::Map<const RowMajor> in(cur.data(), static_cast<Eigen::Index>(rows), base.size());
  RowMajor out = in * fourier_synthesis_;
  return Eigen::Map<const Eigen::VectorXd>(out.data(), out.size());
}

// ---------------------------------------------------------------------------

SpectralField SpectralSpace::constant(double c) const {
  SpectralField f = SpectralField::zero(basis);
  // The degree-0 basis function is 1 / sqrt(omega_n).
  f.coefficients()[0] = c * std::sqrt(sphere_area(basis->dimension()));
  return f;
}

std::shared_ptr<const SpectralSpace> make_space(int n, int L, Symmetry symmetry) {
  auto space = std::make_shared<SpectralSpace>();
  space->basis = HarmonicBasis::create(n, L, symmetry);
  space->grid = std::make_shared<const QuadratureGrid>(build_grid(n, L, symmetry));
  space->transform = std::make_shared<const SphericalTransform>(space->basis, space->grid);
  return space;
}

SpectralField apply_psigma(const SpectralField& u, double sigma) {
  const auto& deg = u.basis().degrees();
  const Eigen::VectorXd spec = psigma_spectrum(u.dimension(), sigma, u.truncation());
  Eigen::VectorXd c = u.coefficients();
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= spec[deg[i]];
  return SpectralField(u.basis_ptr(), std::move(c));
}

SpectralField apply_psigma_inverse(const SpectralField& u, double sigma) {
  const auto& deg = u.basis().degrees();
  const Eigen::VectorXd spec = psigma_spectrum(u.dimension(), sigma, u.truncation());
  Eigen::VectorXd c = u.coefficients();
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] /= spec[deg[i]];
  return SpectralField(u.basis_ptr(), std::move(c));
}

Eigen::VectorXd hsigma_weights(const HarmonicBasis& basis, double sigma) {
  const Eigen::VectorXd spec = psigma_spectrum(basis.dimension(), sigma, basis.truncation());
  Eigen::VectorXd w(basis.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = spec[basis.degrees()[i]];
  return w;
}

double hsigma_inner(const SpectralField& u, const SpectralField& v, double sigma) {
  require_same_space(u, v);
  const auto& deg = u.basis().degrees();
  const Eigen::VectorXd spec = psigma_spectrum(u.dimension(), sigma, u.truncation());
  const Eigen::VectorXd& a = u.coefficients();
  const Eigen::VectorXd& b = v.coefficients();
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += spec[deg[i]] * a[i] * b[i];
  return s;
}

double hsigma_norm(const SpectralField& u, double sigma) { return std::sqrt(std::max(0.0, hsigma_inner(u, u, sigma))); }

double l2_inner(const SpectralField& u, const SpectralField& v) {
  require_same_space(u, v);
  return u.coefficients().dot(v.coefficients());
}

double l2_norm(const SpectralField& u) { return u.coefficients().norm(); }

double yamabe_quotient(const SpectralField& u, double sigma, const SpectralSpace& space) {
  const int n = u.dimension();
  const double q = critical_exponent(n, sigma);
  const double energy = hsigma_inner(u, u, sigma);
  if (!(energy > 0.0)) throw DegenerateInputError("Yamabe quotient of the zero field");
  const Eigen::VectorXd vals = space.synthesize(u);
  const Eigen::VectorXd powered = vals.array().abs().pow(q).matrix();
  const double denom = space.grid->integrate(powered);
  if (!(denom > 0.0)) throw DegenerateInputError("Yamabe quotient: vanishing L^q norm");
  return energy / std::pow(denom, 2.0 / q);
}

}  // namespace fraclab
