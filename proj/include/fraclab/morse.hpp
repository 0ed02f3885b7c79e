#pragma once

#include "fraclab/sphere_function.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fraclab {

struct CriticalPointRecord {
  SpherePoint location;
  double k_value = 0.0;
  double gradient_norm = 0.0;
  int morse_index = 0;  // negative eigenvalues of the intrinsic Hessian
  double laplacian = 0.0;
  bool in_k_plus = false;           // laplacian < 0
  double nondegeneracy_margin = 0.0;  // min |Hessian eigenvalue| / max |K|
  Eigen::VectorXd hessian_eigenvalues;
};

struct CriticalPointOptions {
  int starts = 0;  // 0: 96 (n + 1) random starts plus the 2 (n + 1) axis points
  std::uint64_t seed = 1;
  int max_newton = 60;
  double max_step = 0.3;                 // geodesic trust radius of a Newton step
  double gradient_tolerance = 1e-8;      // relative to max |grad K|
  double dedup_radius = 1e-4;            // geodesic
  double nondegeneracy_floor = 1e-6;     // on min |Hessian eigenvalue| / max |K|
};

/// Multistart Riemannian Newton. Returns the distinct critical points sorted by
/// decreasing K. Throws NondegeneracyError naming the first point whose
/// Hessian margin is below the floor, InvalidKError if K <= 0 at a start.
std::vector<CriticalPointRecord> find_critical_points(const SphereFunction& K, int n,
                                                      const CriticalPointOptions& options = {});

/// sum over K+ of (-1)^{n - morse_index}.
int a1_index(const std::vector<CriticalPointRecord>& records, int n);

/// sum_{i<j} (-1)^{iota_i + iota_j}; parities[i] is true when iota_i is odd.
int a2_bruteforce(const std::vector<bool>& parities);

/// iota = n - morse_index of every K+ record, as odd/even flags.
std::vector<bool> k_plus_parities(const std::vector<CriticalPointRecord>& records, int n);

/// S (sum_i K(y_i)^{-(n - 2 sigma)/(2 sigma)})^{2 sigma / n}, S the Beckner constant.
/// Throws ParameterDomainError for members outside K+ or repeated members.
double infinity_level(const std::vector<CriticalPointRecord>& members, int n, double sigma);
/// p - 1 + sum_i (n - morse_index_i).
int infinity_index(const std::vector<CriticalPointRecord>& members, int n);

struct InfinityCriticalPoint {
  std::vector<std::size_t> members;  // indices into the record list
  int p = 0;
  double level = 0.0;
  int index = 0;
};

struct InfinityInventory {
  int n = 0;
  double sigma = 0.0;
  int p_max = 0;
  std::vector<InfinityCriticalPoint> entries;  // sorted by level
  // Every critical point at infinity with level below this is listed.
  double complete_below = 0.0;
};

/// All unordered subsets of K+ with 1..p_max members.
InfinityInventory enumerate_infinity(const std::vector<CriticalPointRecord>& records, int n, double sigma, int p_max);

/// sum of (-1)^{index} over entries with level < `level`. Throws
/// IncompleteInventoryError when level > complete_below.
int euler_sublevel(const InfinityInventory& inventory, double level);

struct Band {
  int ell = 0;
  double c_min = 0.0;         // C_min^{ell}
  double c_max = 0.0;         // C_max^{ell}
  double c_max_stretched = 0.0;  // C_max^{ell} (K_max / K_min)^{(n - 2 sigma)/n}
  double c_min_next = 0.0;    // C_min^{ell + 1}
  double threshold = 0.0;     // ((ell + 1) / ell)^{sigma / (n - 2 sigma)}
  bool separated = false;
};

/// C^{ell}_{min/max} = S ell^{2 sigma / n} / K_{max/min}^{(n - 2 sigma)/n}.
/// `separated` is the chain C_max^ell <= C_max^ell (K_max/K_min)^{(n-2s)/n} < C_min^{ell+1},
/// evaluated in its equivalent form K_max / K_min < threshold.
Band band_check(double k_max, double k_min, int n, double sigma, int ell);

struct Clause {
  std::string name;
  bool satisfied = false;
  std::string detail;
};

struct Verdict {
  bool holds = false;  // all clauses satisfied
  std::vector<Clause> clauses;
};

struct EulerRow {
  int ell = 0;
  double level = 0.0;  // just above C_max^{ell}
  bool complete = false;
  int chi = 0;
};

struct ExistenceReport {
  int n = 0;
  double sigma = 0.0;
  double k_max = 0.0;
  double k_min = 0.0;
  double pinching_ratio = 0.0;
  double threshold_three_halves = 0.0;  // (3/2)^{sigma / (n - 2 sigma)}
  double threshold_two = 0.0;           // 2^{sigma / (n - 2 sigma)}
  int a1 = 0;
  int a2 = 0;
  int k_plus_size = 0;
  std::vector<CriticalPointRecord> records;
  InfinityInventory inventory;
  std::vector<Band> bands;
  std::vector<EulerRow> euler;
  // ratio < (3/2)^{sigma/(n-2 sigma)} and #K+ >= 2.
  Verdict multiplicity_criterion;
  // ratio < 2^{sigma/(n-2 sigma)} and A1 != 1.
  Verdict index_criterion;
  std::vector<std::string> warnings;
};

/// Throws HypothesisError unless n >= 3 and sigma in (0, (n - 2) / 2), and
/// InputError if the records are inconsistent with k_max, k_min.
ExistenceReport existence_verdict(const std::vector<CriticalPointRecord>& records, double k_max, double k_min, int n,
                                  double sigma, int p_max = 2);

/// k_max and k_min taken from the records.
ExistenceReport existence_verdict(const std::vector<CriticalPointRecord>& records, int n, double sigma,
                                  int p_max = 2);

}  // namespace fraclab
