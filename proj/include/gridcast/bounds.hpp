#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridcast/correctness.hpp"
#include "gridcast/grid.hpp"
#include "gridcast/reliable_set.hpp"

namespace gridcast {

// Exact fraction arithmetic for the case-count pipeline; everything near
// 1 - 1e-5 stays rational until the final float evaluation.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d);

  double value() const { return static_cast<double>(num) / den; }
  bool operator==(const Rational&) const = default;
  bool operator>=(const Rational& o) const;
};

// Probability that a uniformly chosen correct node is in the reliable set,
// averaged over all single-Byzantine placements:
//   sum(count_i * size_i) / (placements * (placements - 1)).
// The histogram must cover every placement of the grid.
Rational alpha_from_counts(
    const std::vector<std::pair<long long, long long>>& histogram,
    long long grid_nodes);

// Two-case lower bound on the single-grid success probability:
//   g(mu) = mu^(n^2) + alpha * n^2 * (1 - mu) * mu^(n^2 - 1)
double g_bound(double mu, int n, double alpha);
// 1 - g(mu) without cancellation; feeds the gamma slope.
double one_minus_g(double mu, int n, double alpha);

// f(gamma, mu) = 1 - gamma * (1 - mu), the chord minorant of g on [beta, 1].
double linear_minorant(double gamma, double mu);

// Finite product H_k(mu) = prod_{i=1..k} f(gamma^i, mu). Requires gamma < 1.
double product_bound(double mu, double gamma, long long k);

// First index i0 with i^2 * gamma^i <= 1 and the sequence decreasing onward;
// scanning caps at 1e6. Requires 0 < gamma < 1.
long long i0_index(double gamma);

// Limit of H_k as k grows: the first i0 factors exactly, the tail replaced by
// the product identity prod(1 - x/i^2) = sin(pi sqrt x)/(pi sqrt x).
double product_bound_limit(double mu, double gamma);

// Partial product of the identity above, for self-checks.
double wallis_product(double x, long long terms);
double sinc_pi_sqrt(double x);  // continuous at x = 0

inline constexpr double kBetaThreshold = 1.0 - 1e-5;
inline constexpr double kTargetBound = 1.0 - 1e-4;

struct CertificateStep {
  std::string name;
  bool ok = false;
  double value = 0.0;
  std::string detail;
};

struct Certificate {
  bool pass = false;
  double alpha = 0.0;
  double beta = kBetaThreshold;
  double g_beta = 0.0;
  double gamma = 0.0;
  long long i0 = 0;
  double limit_bound = 0.0;
  double wallis_error = 0.0;
  // measured sign of the second difference of g on [beta, 1]
  long long concavity_positive_samples = 0;
  double concavity_max_second_difference = 0.0;
  std::vector<CertificateStep> steps;

  std::string first_failure() const;
};

// Evaluates the whole chain beta -> g(beta) -> gamma -> i0 -> limit bound and
// checks limit >= 1 - 1e-4, with a Wallis self-check at x = 0.25.
Certificate theorem3_certificate(int n, Rational alpha);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long long trials = 0;
  uint64_t seed = 0;
};

// Frequency of: the sampled n x n grid is Def-3 correct AND a uniformly
// chosen node lies in its base reliable set.
MonteCarloEstimate monte_carlo_P(double mu0, int n, long long trials,
                                 uint64_t seed, RelBaseCache* cache = nullptr);

// Mean reliable fraction of G_k under i.i.d. correctness mu. k <= 3.
MonteCarloEstimate monte_carlo_F(double mu, const GridSpec& spec,
                                 long long trials, uint64_t seed,
                                 RelBaseCache* cache = nullptr);

enum class PlacementMode { Exhaustive, Clustered, Random };

struct PlacementOutcome {
  std::vector<NodeId> byzantine;
  double fraction = 0.0;
  bool def3_correct = false;  // meaningful for k = 1
};

struct WorstCaseResult {
  long long placements = 0;
  double min_fraction = 1.0;
  std::vector<NodeId> argmin;
  bool all_def3_correct = true;  // k = 1 exhaustive only
  std::vector<PlacementOutcome> outcomes;  // capped unless exhaustive
};

// Minimum reliable fraction over Byzantine placements of size `budget`
// (the tolerated count is 2^(k-1)). Exhaustive mode requires k = 1 and
// budget 1; clustered packs all failures into single clusters; random draws
// `placements` uniform placements.
WorstCaseResult worst_case_experiment(const GridSpec& spec, int budget,
                                      PlacementMode mode, long long placements,
                                      uint64_t seed,
                                      RelBaseCache* cache = nullptr);

}  // namespace gridcast
