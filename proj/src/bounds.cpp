#include "gridcast/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gridcast {

Rational::Rational(long long n, long long d) : num(n), den(d) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

bool Rational::operator>=(const Rational& o) const {
  // denominators are positive after normalization
  return static_cast<__int128>(num) * o.den >=
         static_cast<__int128>(o.num) * den;
}

Rational alpha_from_counts(
    const std::vector<std::pair<long long, long long>>& histogram,
    long long grid_nodes) {
  long long placements = 0;
  long long weighted = 0;
  for (const auto& [count, size] : histogram) {
    if (count < 0 || size < 0 || size >= grid_nodes) {
      throw std::invalid_argument("malformed histogram entry");
    }
    placements += count;
    weighted += count * size;
  }
  if (placements != grid_nodes) {
    throw std::invalid_argument(
        "histogram covers " + std::to_string(placements) + " placements, grid has " +
        std::to_string(grid_nodes));
  }
  return Rational(weighted, grid_nodes * (grid_nodes - 1));
}

double g_bound(double mu, int n, double alpha) {
  const double m2 = static_cast<double>(n) * n;
  return std::pow(mu, m2) + alpha * m2 * (1.0 - mu) * std::pow(mu, m2 - 1.0);
}

double one_minus_g(double mu, int n, double alpha) {
  const double m2 = static_cast<double>(n) * n;
  // 1 - mu^(n^2) evaluated via expm1 to keep precision near mu = 1
  const double one_minus_pow = -std::expm1(m2 * std::log1p(mu - 1.0));
  return one_minus_pow - alpha * m2 * (1.0 - mu) * std::pow(mu, m2 - 1.0);
}

double linear_minorant(double gamma, double mu) {
  return 1.0 - gamma * (1.0 - mu);
}

double product_bound(double mu, double gamma, long long k) {
  if (!(gamma < 1.0)) {
    throw std::invalid_argument("product bound needs gamma < 1");
  }
  double prod = 1.0;
  double gpow = 1.0;
  for (long long i = 1; i <= k; ++i) {
    gpow *= gamma;
    prod *= linear_minorant(gpow, mu);
  }
  return prod;
}

long long i0_index(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("i0 search needs 0 < gamma < 1");
  }
  double gpow = 1.0;
  for (long long i = 1; i <= 1'000'000; ++i) {
    gpow *= gamma;
    const double h = static_cast<double>(i) * i * gpow;
    const double ratio = gamma * (1.0 + 1.0 / i) * (1.0 + 1.0 / i);
    if (h <= 1.0 && ratio < 1.0) return i;
  }
  throw std::invalid_argument("i0 not found below 1e6");
}

double sinc_pi_sqrt(double x) {
  if (x < 0.0) throw std::invalid_argument("sinc argument must be >= 0");
  if (x == 0.0) return 1.0;
  const double t = M_PI * std::sqrt(x);
  return std::sin(t) / t;
}

double product_bound_limit(double mu, double gamma) {
  const long long i0 = i0_index(gamma);
  double prod = 1.0;
  double gpow = 1.0;
  for (long long i = 1; i <= i0; ++i) {
    gpow *= gamma;
    prod *= linear_minorant(gpow, mu);
  }
  return prod * sinc_pi_sqrt(1.0 - mu);
}

double wallis_product(double x, long long terms) {
  double prod = 1.0;
  for (long long i = 1; i <= terms; ++i) {
    prod *= 1.0 - x / (static_cast<double>(i) * i);
  }
  return prod;
}

std::string Certificate::first_failure() const {
  for (const auto& s : steps) {
    if (!s.ok) return s.name;
  }
  return "";
}

Certificate theorem3_certificate(int n, Rational alpha) {
  Certificate cert;
  cert.alpha = alpha.value();
  cert.beta = kBetaThreshold;

  cert.g_beta = g_bound(cert.beta, n, cert.alpha);
  const double one_minus = one_minus_g(cert.beta, n, cert.alpha);
  cert.gamma = one_minus / (1.0 - cert.beta);
  cert.steps.push_back({"gamma_below_one", cert.gamma < 1.0, cert.gamma,
                        "gamma = (1 - g(beta)) / (1 - beta)"});

  if (cert.gamma < 1.0 && cert.gamma > 0.0) {
    bool i0_ok = true;
    try {
      cert.i0 = i0_index(cert.gamma);
    } catch (const std::invalid_argument&) {
      i0_ok = false;
    }
    cert.steps.push_back({"i0_found", i0_ok, static_cast<double>(cert.i0),
                          "first i with i^2 gamma^i <= 1, decreasing onward"});
    if (i0_ok) {
      cert.limit_bound = product_bound_limit(cert.beta, cert.gamma);
      cert.steps.push_back({"limit_bound", cert.limit_bound >= kTargetBound,
                            cert.limit_bound,
                            "limit bound at mu = beta vs 1 - 1e-4"});
    }
  } else {
    cert.steps.push_back({"i0_found", false, 0.0, "skipped: gamma >= 1"});
  }

  cert.wallis_error =
      std::abs(wallis_product(0.25, 1'000'000) - sinc_pi_sqrt(0.25));
  cert.steps.push_back({"wallis_identity", cert.wallis_error <= 1e-4,
                        cert.wallis_error,
                        "partial product vs sin(pi/2)/(pi/2) at x = 0.25"});

  // measured curvature of g on [beta, 1]; reported, not gated
  {
    const int samples = 2000;
    const double h = (1.0 - cert.beta) / (samples + 1);
    for (int t = 1; t <= samples; ++t) {
      const double x = cert.beta + t * h;
      const double d2 = g_bound(x - h, n, cert.alpha) -
                        2.0 * g_bound(x, n, cert.alpha) +
                        g_bound(x + h, n, cert.alpha);
      if (d2 > 0.0) ++cert.concavity_positive_samples;
      cert.concavity_max_second_difference =
          std::max(cert.concavity_max_second_difference, d2);
    }
    cert.steps.push_back(
        {"second_difference_sign", true,
         static_cast<double>(cert.concavity_positive_samples),
         "positive second-difference samples on [beta, 1] (informational)"});
  }

  cert.pass = true;
  for (const auto& s : cert.steps) {
    if (s.name != "second_difference_sign" && !s.ok) cert.pass = false;
  }
  return cert;
}

MonteCarloEstimate monte_carlo_P(double mu0, int n, long long trials,
                                 uint64_t seed, RelBaseCache* cache) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  RelBaseCache local_cache;
  if (!cache) cache = &local_cache;

  long long hits = 0;
  const long long nodes = static_cast<long long>(n) * n;
  for (long long t = 0; t < trials; ++t) {
    std::mt19937_64 rng(seed + 0x5851f42d4c957f2dull * static_cast<uint64_t>(t));
    const CorrectnessMap corr = sample_correctness(n, mu0, rng);
    std::uniform_int_distribution<long long> pick(0, nodes - 1);
    const NodeId chosen = node_at(pick(rng), n);
    const auto& entry = cache->get(corr);
    if (entry.def3_correct && entry.rel.contains(chosen)) ++hits;
  }
  const double p = static_cast<double>(hits) / trials;
  return MonteCarloEstimate{p, std::sqrt(p * (1.0 - p) / trials), trials,
                            seed};
}

MonteCarloEstimate monte_carlo_F(double mu, const GridSpec& spec,
                                 long long trials, uint64_t seed,
                                 RelBaseCache* cache) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (spec.k > 3) {
    throw std::invalid_argument("exact per-trial analysis is held to k <= 3");
  }
  RelBaseCache local_cache;
  if (!cache) cache = &local_cache;

  double sum = 0.0;
  double sum_sq = 0.0;
  for (long long t = 0; t < trials; ++t) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * static_cast<uint64_t>(t));
    const CorrectnessMap corr = sample_correctness(spec.side(), mu, rng);
    const double frac = rel_k(spec, corr, cache).fraction;
    sum += frac;
    sum_sq += frac * frac;
  }
  const double mean = sum / trials;
  const double var =
      trials > 1 ? std::max(0.0, (sum_sq - trials * mean * mean) / (trials - 1))
                 : 0.0;
  return MonteCarloEstimate{mean, std::sqrt(var / trials), trials, seed};
}

namespace {

PlacementOutcome evaluate_placement(const GridSpec& spec,
                                    const std::vector<NodeId>& byz,
                                    RelBaseCache* cache) {
  CorrectnessMap corr(spec.side());
  for (NodeId b : byz) corr.set_byzantine(b);
  PlacementOutcome out;
  out.byzantine = byz;
  if (spec.k == 1) {
    const auto& entry = cache->get(corr);
    out.fraction = entry.rel.fraction;
    out.def3_correct = entry.def3_correct;
  } else {
    out.fraction = rel_k(spec, corr, cache).fraction;
    out.def3_correct = true;  // Def 3 is a per-cluster notion
  }
  return out;
}

}  // namespace

WorstCaseResult worst_case_experiment(const GridSpec& spec, int budget,
                                      PlacementMode mode, long long placements,
                                      uint64_t seed, RelBaseCache* cache) {
  RelBaseCache local_cache;
  if (!cache) cache = &local_cache;

  WorstCaseResult result;
  auto consider = [&](const std::vector<NodeId>& byz, bool keep_outcome) {
    PlacementOutcome out = evaluate_placement(spec, byz, cache);
    ++result.placements;
    if (!out.def3_correct) result.all_def3_correct = false;
    if (out.fraction < result.min_fraction) {
      result.min_fraction = out.fraction;
      result.argmin = byz;
    }
    if (keep_outcome) result.outcomes.push_back(std::move(out));
  };

  switch (mode) {
    case PlacementMode::Exhaustive: {
      if (spec.k != 1 || budget != 1) {
        throw std::invalid_argument(
            "exhaustive mode enumerates single failures on k = 1 only");
      }
      for (int i = 0; i < spec.side(); ++i) {
        for (int j = 0; j < spec.side(); ++j) {
          consider({NodeId{i, j}}, true);
        }
      }
      break;
    }
    case PlacementMode::Clustered: {
      // all failures packed into one cluster, a few deterministic patterns
      if (spec.k < 2) {
        throw std::invalid_argument("clustered mode needs k >= 2");
      }
      const int macro_side = spec.side() / spec.n;
      const std::vector<NodeId> hosts = {
          NodeId{0, 0}, NodeId{macro_side / 2, macro_side / 2},
          NodeId{macro_side - 1, macro_side - 1}};
      for (NodeId host : hosts) {
        const NodeId origin{host.i * spec.n, host.j * spec.n};
        // pattern 1: packed along the top row of the cluster
        std::vector<NodeId> packed;
        for (int t = 0; t < budget; ++t) {
          packed.push_back(
              NodeId{origin.i + t / spec.n, origin.j + t % spec.n});
        }
        consider(packed, true);
        // pattern 2: spread to opposite cluster corners
        std::vector<NodeId> corners;
        const std::vector<NodeId> pool = {
            NodeId{origin.i, origin.j},
            NodeId{origin.i + spec.n - 1, origin.j + spec.n - 1},
            NodeId{origin.i, origin.j + spec.n - 1},
            NodeId{origin.i + spec.n - 1, origin.j}};
        for (int t = 0; t < budget && t < 4; ++t) corners.push_back(pool[t]);
        if (static_cast<int>(corners.size()) == budget) {
          consider(corners, true);
        }
      }
      break;
    }
    case PlacementMode::Random: {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<long long> pick(0, spec.node_count() - 1);
      for (long long t = 0; t < placements; ++t) {
        std::vector<NodeId> byz;
        while (static_cast<int>(byz.size()) < budget) {
          const NodeId v = node_at(pick(rng), spec.side());
          if (std::find(byz.begin(), byz.end(), v) == byz.end()) {
            byz.push_back(v);
          }
        }
        std::sort(byz.begin(), byz.end());
        consider(byz, result.outcomes.size() < 32);
      }
      break;
    }
  }
  return result;
}

}  // namespace gridcast
