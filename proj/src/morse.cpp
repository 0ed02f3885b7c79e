#include "fraclab/morse.hpp"

#include "fraclab/errors.hpp"
#include "fraclab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace fraclab {

namespace {

std::string point_string(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os.precision(8);
  os << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

struct NewtonOutcome {
  Eigen::VectorXd x;
  double gradient_norm = 0.0;
  bool converged = false;
};

NewtonOutcome riemannian_newton(const SphereFunction& K, Eigen::VectorXd x, double tolerance,
                                const CriticalPointOptions& o) {
  NewtonOutcome out;
  for (int it = 0; it < o.max_newton; ++it) {
    const Eigen::VectorXd g = riemannian_gradient(K, x);
    const Eigen::MatrixXd frame = tangent_basis(x);
    const Eigen::MatrixXd H = intrinsic_hessian(K, x, frame);
    const Eigen::VectorXd rhs = -(frame.transpose() * g);
    Eigen::VectorXd xi = H.colPivHouseholderQr().solve(rhs);
    if (!xi.allFinite()) break;
    const double len = xi.norm();
    if (len > o.max_step) xi *= o.max_step / len;
    x = exp_map(x, frame * xi);
    x.normalize();
    if (len < 1e-14) break;
  }
  out.gradient_norm = riemannian_gradient(K, x).norm();
  out.converged = out.gradient_norm <= tolerance;
  out.x = std::move(x);
  return out;
}

double level_exponent(int n, double sigma) { return (n - 2.0 * sigma) / (2.0 * sigma); }

void require_k_plus(const std::vector<CriticalPointRecord>& members) {
  if (members.empty()) throw ParameterDomainError("a critical point at infinity needs at least one member");
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (!members[i].in_k_plus) {
      throw ParameterDomainError("member " + point_string(members[i].location.coords()) +
                                 " is not in K+ (Laplacian of K is not negative there)");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (geodesic_distance(members[i].location, members[j].location) < 1e-12) {
        throw ParameterDomainError("members of a critical point at infinity must be distinct");
      }
    }
  }
}

}  // namespace

std::vector<CriticalPointRecord> find_critical_points(const SphereFunction& K, int n,
                                                      const CriticalPointOptions& options) {
  if (n < 1) throw ParameterDomainError("sphere dimension must be positive");
  if (K.dimension != 0 && K.dimension != n) throw ConfigurationError("K is defined on a sphere of another dimension");
  const int starts = options.starts > 0 ? options.starts : 96 * (n + 1);

  std::vector<Eigen::VectorXd> net;
  for (int j = 1; j <= n + 1; ++j) {
    net.push_back(SpherePoint::axis(n, j).coords());
    net.push_back(-SpherePoint::axis(n, j).coords());
  }
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd v(n + 1);
    for (Eigen::Index i = 0; i <= n; ++i) v[i] = normal(rng);
    net.push_back(v.normalized());
  }

  double k_scale = 0.0, grad_scale = 0.0;
  for (const auto& x : net) {
    const double k = K.value(x);
    if (!(k > 0.0)) throw InvalidKError("K must be positive; K = " + std::to_string(k) + " at " + point_string(x));
    k_scale = std::max(k_scale, std::abs(k));
    grad_scale = std::max(grad_scale, riemannian_gradient(K, x).norm());
  }
  if (!(grad_scale > 0.0)) {
    throw NondegeneracyError("K is constant on the start net: every point is a degenerate critical point");
  }
  const double tolerance = options.gradient_tolerance * grad_scale;

  std::vector<Eigen::VectorXd> found;
  for (const auto& x0 : net) {
    const NewtonOutcome r = riemannian_newton(K, x0, tolerance, options);
    if (!r.converged) continue;
    const SpherePoint p = SpherePoint::normalized(r.x);
    const bool duplicate = std::any_of(found.begin(), found.end(), [&](const Eigen::VectorXd& y) {
      return geodesic_distance(p, SpherePoint::normalized(y)) < options.dedup_radius;
    });
    if (!duplicate) found.push_back(p.coords());
  }

  std::vector<CriticalPointRecord> out;
  for (const auto& x : found) {
    const Eigen::MatrixXd frame = tangent_basis(x);
    const Eigen::MatrixXd H = intrinsic_hessian(K, x, frame);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = eig.eigenvalues();
    const double margin = ev.cwiseAbs().minCoeff() / k_scale;
    if (!(margin >= options.nondegeneracy_floor)) {
      std::ostringstream os;
      os << "K violates nondegeneracy at " << point_string(x) << ": min |Hessian eigenvalue| / max K = " << margin
         << " < " << options.nondegeneracy_floor;
      throw NondegeneracyError(os.str());
    }
    const double lap = H.trace();
    out.push_back({SpherePoint::normalized(x), K.value(x), riemannian_gradient(K, x).norm(),
                   static_cast<int>((ev.array() < 0.0).count()), lap, lap < 0.0, margin, ev});
  }
  std::sort(out.begin(), out.end(), [](const CriticalPointRecord& a, const CriticalPointRecord& b) {
    if (a.k_value != b.k_value) return a.k_value > b.k_value;
    return std::lexicographical_compare(a.location.coords().begin(), a.location.coords().end(),
                                        b.location.coords().begin(), b.location.coords().end());
  });
  return out;
}

int a1_index(const std::vector<CriticalPointRecord>& records, int n) {
  int a1 = 0;
  for (const auto& r : records) {
    if (r.in_k_plus) a1 += (n - r.morse_index) % 2 == 0 ? 1 : -1;
  }
  return a1;
}

int a2_bruteforce(const std::vector<bool>& parities) {
  int a2 = 0;
  for (std::size_t i = 0; i < parities.size(); ++i) {
    for (std::size_t j = i + 1; j < parities.size(); ++j) a2 += parities[i] == parities[j] ? 1 : -1;
  }
  return a2;
}

std::vector<bool> k_plus_parities(const std::vector<CriticalPointRecord>& records, int n) {
  std::vector<bool> out;
  for (const auto& r : records) {
    if (r.in_k_plus) out.push_back((n - r.morse_index) % 2 != 0);
  }
  return out;
}

double infinity_level(const std::vector<CriticalPointRecord>& members, int n, double sigma) {
  require_k_plus(members);
  double sum = 0.0;
  for (const auto& m : members) sum += std::pow(m.k_value, -level_exponent(n, sigma));
  return beckner_constant(n, sigma) * std::pow(sum, 2.0 * sigma / n);
}

int infinity_index(const std::vector<CriticalPointRecord>& members, int n) {
  require_k_plus(members);
  int index = static_cast<int>(members.size()) - 1;
  for (const auto& m : members) index += n - m.morse_index;
  return index;
}

InfinityInventory enumerate_infinity(const std::vector<CriticalPointRecord>& records, int n, double sigma, int p_max) {
  if (p_max < 1) throw ParameterDomainError("p_max must be at least 1");
  InfinityInventory inv;
  inv.n = n;
  inv.sigma = sigma;
  inv.p_max = p_max;
  std::vector<std::size_t> plus;
  double k_plus_max = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].in_k_plus) {
      plus.push_back(i);
      k_plus_max = std::max(k_plus_max, records[i].k_value);
    }
  }
  const int m = static_cast<int>(plus.size());
  for (int p = 1; p <= std::min(p_max, m); ++p) {
    // Subsets of size p in lexicographic order.
    std::vector<int> pick(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) pick[static_cast<std::size_t>(i)] = i;
    while (true) {
      std::vector<CriticalPointRecord> members;
      InfinityCriticalPoint e;
      e.p = p;
      for (int i : pick) {
        e.members.push_back(plus[static_cast<std::size_t>(i)]);
        members.push_back(records[plus[static_cast<std::size_t>(i)]]);
      }
      e.level = infinity_level(members, n, sigma);
      e.index = infinity_index(members, n);
      inv.entries.push_back(std::move(e));
      int k = p - 1;
      while (k >= 0 && pick[static_cast<std::size_t>(k)] == m - p + k) --k;
      if (k < 0) break;
      ++pick[static_cast<std::size_t>(k)];
      for (int j = k + 1; j < p; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  std::stable_sort(inv.entries.begin(), inv.entries.end(),
                   [](const InfinityCriticalPoint& a, const InfinityCriticalPoint& b) { return a.level < b.level; });
  // A (p_max + 1)-tuple has level at least S (p_max + 1)^{2 sigma / n} / K_max^{(n - 2 sigma)/n}.
  inv.complete_below = m <= p_max ? std::numeric_limits<double>::infinity()
                                  : beckner_constant(n, sigma) * std::pow(p_max + 1.0, 2.0 * sigma / n) /
                                        std::pow(k_plus_max, (n - 2.0 * sigma) / n);
  return inv;
}

int euler_sublevel(const InfinityInventory& inventory, double level) {
  if (level > inventory.complete_below) {
    std::ostringstream os;
    os << "sublevel " << level << " exceeds the range " << inventory.complete_below << " covered by p <= "
       << inventory.p_max;
    throw IncompleteInventoryError(os.str());
  }
  int chi = 0;
  for (const auto& e : inventory.entries) {
    if (e.level < level) chi += e.index % 2 == 0 ? 1 : -1;
  }
  return chi;
}

Band band_check(double k_max, double k_min, int n, double sigma, int ell) {
  if (ell < 1) throw ParameterDomainError("band index ell must be at least 1");
  if (!(k_min > 0.0) || !(k_max >= k_min)) throw InputError("band_check needs 0 < k_min <= k_max");
  const double S = beckner_constant(n, sigma);
  const double e = (n - 2.0 * sigma) / n;
  const double a = 2.0 * sigma / n;
  Band b;
  b.ell = ell;
  b.c_min = S * std::pow(ell, a) / std::pow(k_max, e);
  b.c_max = S * std::pow(ell, a) / std::pow(k_min, e);
  b.c_max_stretched = b.c_max * std::pow(k_max / k_min, e);
  b.c_min_next = S * std::pow(ell + 1.0, a) / std::pow(k_max, e);
  b.threshold = std::pow((ell + 1.0) / ell, sigma / (n - 2.0 * sigma));
  b.separated = k_max / k_min < b.threshold;
  return b;
}

ExistenceReport existence_verdict(const std::vector<CriticalPointRecord>& records, int n, double sigma, int p_max) {
  if (records.empty()) throw InputError("no critical points given");
  double k_max = records.front().k_value, k_min = records.front().k_value;
  for (const auto& r : records) {
    k_max = std::max(k_max, r.k_value);
    k_min = std::min(k_min, r.k_value);
  }
  return existence_verdict(records, k_max, k_min, n, sigma, p_max);
}

ExistenceReport existence_verdict(const std::vector<CriticalPointRecord>& records, double k_max, double k_min, int n,
                                  double sigma, int p_max) {
  if (n < 3 || !(sigma > 0.0) || !(sigma < (n - 2) / 2.0)) {
    std::ostringstream os;
    os << "existence criteria need n >= 3 and sigma in (0, (n - 2)/2); got n = " << n << ", sigma = " << sigma;
    throw HypothesisError(os.str());
  }
  if (!(k_min > 0.0) || !(k_max >= k_min)) throw InputError("existence_verdict needs 0 < k_min <= k_max");
  for (const auto& r : records) {
    if (r.location.dimension() != n) throw InputError("critical point record of another dimension");
    if (r.k_value > k_max * (1.0 + 1e-12) || r.k_value < k_min * (1.0 - 1e-12)) {
      throw InputError("critical value " + std::to_string(r.k_value) + " lies outside [k_min, k_max]");
    }
    if (r.in_k_plus != (r.laplacian < 0.0)) throw InputError("record has in_k_plus inconsistent with its Laplacian");
  }

  ExistenceReport rep;
  rep.n = n;
  rep.sigma = sigma;
  rep.k_max = k_max;
  rep.k_min = k_min;
  rep.pinching_ratio = k_max / k_min;
  const double t = sigma / (n - 2.0 * sigma);
  rep.threshold_three_halves = std::pow(1.5, t);
  rep.threshold_two = std::pow(2.0, t);
  rep.records = records;
  rep.a1 = a1_index(records, n);
  const std::vector<bool> parities = k_plus_parities(records, n);
  rep.a2 = a2_bruteforce(parities);
  rep.k_plus_size = static_cast<int>(parities.size());
  rep.inventory = enumerate_infinity(records, n, sigma, p_max);
  for (int ell = 1; ell <= p_max; ++ell) {
    rep.bands.push_back(band_check(k_max, k_min, n, sigma, ell));
    EulerRow row;
    row.ell = ell;
    row.level = rep.bands.back().c_max * (1.0 + 1e-9);
    row.complete = row.level <= rep.inventory.complete_below;
    if (row.complete) row.chi = euler_sublevel(rep.inventory, row.level);
    rep.euler.push_back(row);
  }

  auto ratio_clause = [&](const std::string& name, double threshold) {
    std::ostringstream os;
    os.precision(12);
    os << "K_max / K_min = " << rep.pinching_ratio << (rep.pinching_ratio < threshold ? " < " : " >= ") << threshold;
    return Clause{name, rep.pinching_ratio < threshold, os.str()};
  };
  {
    Verdict& v = rep.multiplicity_criterion;
    v.clauses.push_back(ratio_clause("pinching below (3/2)^{sigma/(n-2sigma)}", rep.threshold_three_halves));
    v.clauses.push_back({"at least two points in K+", rep.k_plus_size >= 2, "#K+ = " + std::to_string(rep.k_plus_size)});
  }
  {
    Verdict& v = rep.index_criterion;
    v.clauses.push_back(ratio_clause("pinching below 2^{sigma/(n-2sigma)}", rep.threshold_two));
    v.clauses.push_back({"A1 != 1", rep.a1 != 1, "A1 = " + std::to_string(rep.a1)});
  }
  for (Verdict* v : {&rep.multiplicity_criterion, &rep.index_criterion}) {
    v->holds = std::all_of(v->clauses.begin(), v->clauses.end(), [](const Clause& c) { return c.satisfied; });
  }
  if (rep.a1 == 1 && rep.k_plus_size % 2 == 0) {
    rep.warnings.push_back("A1 = 1 with an even number of points in K+: the parities are inconsistent");
  }
  if (rep.k_plus_size == 0) rep.warnings.push_back("K+ is empty: K has no critical point with negative Laplacian");
  return rep;
}

}  // namespace fraclab
