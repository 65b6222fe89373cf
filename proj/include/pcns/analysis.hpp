#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

#include "pcns/core.hpp"
#include "pcns/error.hpp"

namespace pcns {

using Rational = boost::multiprecision::cpp_rational;

// Offspring law of one innocent prefix: two children with probability a,
// none otherwise.  a = 1/16 for the 16k-bucket scheme; a = 1/2 - eps for the
// ck-bucket variants.  Subcritical, so 0 < a < 1/2.
struct BranchingLaw {
  enum class Kind { fixed16, comp };

  double a = 0.0;
  Kind kind = Kind::comp;

  static BranchingLaw pcns16() noexcept { return {1.0 / 16.0, Kind::fixed16}; }
  static BranchingLaw comp(double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 0.5))
      fail(Errc::epsilon_out_of_range, "comp law needs epsilon in (0, 1/2)");
    return {0.5 - epsilon, Kind::comp};
  }
  static BranchingLaw subcritical(double a) {
    if (!(a > 0.0) || !(a < 0.5))
      fail(Errc::domain_error, "offspring law needs a in (0, 1/2)");
    return {a, Kind::comp};
  }

  double epsilon() const noexcept { return 0.5 - a; }
  double mean_children() const noexcept { return 2.0 * a; }
};

// Offspring PGF f(q) = (1 - a) + a q^2.
inline double f_eval(BranchingLaw law, double q) noexcept {
  return (1.0 - law.a) + law.a * q * q;
}

// The Mobius majorant of f used by the tail analysis: 6/(7-q) for a = 1/16
// (f + (q-1)(q-3)^2 / (16(7-q))), else 1 + 4a(q-1)/(3-q)
// (f + a(q-1)^3/(3-q)).  Dominates f on [1,7) resp. [1,3).
inline double g_majorant(BranchingLaw law, double q) {
  if (law.kind == BranchingLaw::Kind::fixed16) {
    if (q < 1.0 || q >= 7.0)
      fail(Errc::domain_error, "majorant domain is [1, 7)");
    return 6.0 / (7.0 - q);
  }
  if (q < 1.0 || q >= 3.0) fail(Errc::domain_error, "majorant domain is [1, 3)");
  return 1.0 + 4.0 * law.a * (q - 1.0) / (3.0 - q);
}

// Closed-form Mobius iterates used to bound PGF evaluations:
//   a = 1/16:      g^i(q) = 1 + 5(q-1) / (6^i (6-q) + (q-1)),   q in [1, 6]
//   a = 1/2 - eps: g^i(q) = 1 + 2(q-1) / ((3-q)(1+2eps)^i + (q-1)), q in [1, 3)
// Each family is the iterate group of its own i = 1 member (fixed points
// {1,6} with multiplier 1/6, resp. {1,3} with multiplier 1/(1+2eps)), so
// i-fold numeric iteration of moebius_iterate(law, 1, .) reproduces it
// exactly.
inline double moebius_iterate(BranchingLaw law, unsigned i, double q) {
  if (law.kind == BranchingLaw::Kind::fixed16) {
    if (q < 1.0 || q > 6.0)
      fail(Errc::domain_error, "iterate domain is [1, 6]");
    const double p6 = std::pow(6.0, static_cast<double>(i));
    return 1.0 + 5.0 * (q - 1.0) / (p6 * (6.0 - q) + (q - 1.0));
  }
  if (q < 1.0 || q >= 3.0) fail(Errc::domain_error, "iterate domain is [1, 3)");
  const double lam = 1.0 + 2.0 * law.epsilon();
  const double pl = std::pow(lam, static_cast<double>(i));
  return 1.0 + 2.0 * (q - 1.0) / ((3.0 - q) * pl + (q - 1.0));
}

namespace detail {

// ln f(e^lq) without leaving log space; the iterates explode doubly
// exponentially above the second fixed point of f.
inline double log_f_of_exp(BranchingLaw law, double lq) noexcept {
  const double two_lq = 2.0 * lq;
  if (two_lq > 40.0)  // (1-a) is invisible next to a*q^2
    return std::log(law.a) + two_lq +
           std::log1p((1.0 - law.a) / law.a * std::exp(-two_lq));
  return std::log((1.0 - law.a) + law.a * std::exp(two_lq));
}

inline double log_F_recurrence_impl(BranchingLaw law, std::uint64_t k,
                                    unsigned levels, double lq) {
  if (levels == 0) return 0.0;
  // F_{l+1}(q) = F_l(f(q)) * q^k
  return log_F_recurrence_impl(law, k, levels - 1, log_f_of_exp(law, lq)) +
         static_cast<double>(k) * lq;
}

}  // namespace detail

// ln F_l(q) by the recurrence F_{log2k} = 1, F_{l+1}(q) = F_l(f(q)) q^k,
// where `levels` = l - log2k is the number of recurrence steps.
inline double log_F_recurrence(BranchingLaw law, std::uint64_t k,
                               unsigned levels, double q) {
  if (!(q >= 1.0)) fail(Errc::domain_error, "F is evaluated at q >= 1");
  const double v = detail::log_F_recurrence_impl(law, k, levels, std::log(q));
  if (!std::isfinite(v)) fail(Errc::overflow, "F recurrence overflowed");
  return v;
}

inline double F_eval_recurrence(BranchingLaw law, std::uint64_t k,
                                unsigned levels, double q) {
  const double lv = log_F_recurrence(law, k, levels, q);
  if (lv >= std::log(std::numeric_limits<double>::max()))
    fail(Errc::overflow, "F value exceeds double range");
  return std::exp(lv);
}

// ln of the unrolled product  prod_{i=0}^{levels-1} f^i(q)^k;  equal to the
// recurrence by construction, computed bottom-up as an independent route.
inline double log_F_product(BranchingLaw law, std::uint64_t k, unsigned levels,
                            double q) {
  if (!(q >= 1.0)) fail(Errc::domain_error, "F is evaluated at q >= 1");
  double lq = std::log(q);
  double sum = 0.0;
  for (unsigned i = 0; i < levels; ++i) {
    sum += static_cast<double>(k) * lq;
    lq = detail::log_f_of_exp(law, lq);
  }
  if (!std::isfinite(sum)) fail(Errc::overflow, "F product overflowed");
  return sum;
}

// Mean excess E[N_l] after `levels` steps of F'_{l+1}(1) = F'_l(1) 2a + k.
inline double F_mean(BranchingLaw law, std::uint64_t k, unsigned levels) noexcept {
  double mean = 0.0;
  for (unsigned i = 0; i < levels; ++i)
    mean = mean * law.mean_children() + static_cast<double>(k);
  return mean;
}

// Fixed point of the mean recurrence, k / (1 - 2a); 8k/7 for a = 1/16.
inline double F_mean_limit(BranchingLaw law, std::uint64_t k) noexcept {
  return static_cast<double>(k) / (1.0 - law.mean_children());
}

// A Chernoff/Markov tail bound.  value may underflow to zero; log_value is
// authoritative.  A bound >= 1 carries no information and is tagged vacuous
// rather than clamped.
struct TailBound {
  unsigned levels = 0;
  double q = 0.0;
  double threshold = 0.0;
  double log_value = 0.0;
  double value = 0.0;
  bool vacuous = false;
  double cap_log = std::numeric_limits<double>::quiet_NaN();
};

// Pr{N >= t} <= prod_i g^i(q)^k / q^t with the closed-form iterates.
inline TailBound excess_tail_bound(BranchingLaw law, std::uint64_t k,
                                   unsigned levels, double q, double t) {
  double sum = 0.0;
  for (unsigned i = 0; i < levels; ++i)
    sum += std::log(moebius_iterate(law, i, q));
  TailBound b;
  b.levels = levels;
  b.q = q;
  b.threshold = t;
  b.log_value = static_cast<double>(k) * sum - t * std::log(q);
  b.value = std::exp(b.log_value);
  b.vacuous = b.log_value >= 0.0;
  return b;
}

// The paper's standard instances: q = 5, t = 5k against e^{-k} for a = 1/16;
// q = 2, t = 2k/eps against e^{-k} for the ck variants (needs eps < 1/8).
inline TailBound chernoff_excess_bound(BranchingLaw law, std::uint64_t k,
                                       unsigned levels) {
  double q, t;
  if (law.kind == BranchingLaw::Kind::fixed16) {
    q = 5.0;
    t = 5.0 * static_cast<double>(k);
  } else {
    const double eps = law.epsilon();
    if (!(eps > 0.0) || !(eps < 0.125))
      fail(Errc::epsilon_out_of_range, "the e^{-k} cap needs epsilon < 1/8");
    q = 2.0;
    t = 2.0 * static_cast<double>(k) / eps;
  }
  TailBound b = excess_tail_bound(law, k, levels, q, t);
  b.cap_log = -static_cast<double>(k);
  if (b.log_value > b.cap_log + 1e-9)
    fail(Errc::domain_error, "excess bound exceeded its e^{-k} cap");
  return b;
}

// Total progeny of one individual (the individual itself included).
// Dwass:  Pr{M = m} = (1/m) [t^{m-1}] f(t)^m,  zero for even m, and for
// m = 2j+1:  C(2j+1, j) a^j (1-a)^{j+1} / (2j+1).
inline double total_progeny_log_pmf(BranchingLaw law, std::uint64_t m) {
  if (m == 0) fail(Errc::domain_error, "total progeny starts at 1");
  if (m % 2 == 0) return -std::numeric_limits<double>::infinity();
  const std::uint64_t j = (m - 1) / 2;
  const double lj = static_cast<double>(j);
  const double lchoose = std::lgamma(2.0 * lj + 2.0) -
                         std::lgamma(lj + 1.0) - std::lgamma(lj + 2.0);
  return lchoose + lj * std::log(law.a) + (lj + 1.0) * std::log1p(-law.a) -
         std::log(2.0 * lj + 1.0);
}

inline double total_progeny_pmf(BranchingLaw law, std::uint64_t m) {
  if (m != 0 && m % 2 == 0) return 0.0;
  return std::exp(total_progeny_log_pmf(law, m));
}

// Same pmf in exact rational arithmetic for a = a_num/a_den.
inline Rational total_progeny_pmf_exact(std::uint64_t a_num,
                                        std::uint64_t a_den, std::uint64_t m) {
  if (a_den == 0 || a_num == 0 || 2 * a_num >= a_den)
    fail(Errc::domain_error, "need 0 < a_num/a_den < 1/2");
  if (m == 0) fail(Errc::domain_error, "total progeny starts at 1");
  if (m % 2 == 0) return Rational(0);
  using boost::multiprecision::cpp_int;
  const std::uint64_t j = (m - 1) / 2;
  cpp_int choose = 1;
  for (std::uint64_t i = 0; i < j; ++i) {
    choose *= (2 * j + 1 - i);
    choose /= (i + 1);
  }
  const cpp_int num = cpp_int(a_num), den = cpp_int(a_den);
  Rational r(choose, cpp_int(2 * j + 1));
  r *= Rational(boost::multiprecision::pow(num, static_cast<unsigned>(j)),
                boost::multiprecision::pow(den, static_cast<unsigned>(j)));
  r *= Rational(boost::multiprecision::pow(den - num, static_cast<unsigned>(j + 1)),
                boost::multiprecision::pow(den, static_cast<unsigned>(j + 1)));
  return r;
}

// PGF of the total progeny via the Catalan generating function,
//   h(q) = (1-a) q (1 - sqrt(1 - 4a(1-a)q^2)) / (2a(1-a)q^2),
// evaluated in the cancellation-free equivalent form
//   h(q) = 2(1-a) q / (1 + sqrt(1 - 4a(1-a)q^2)).
// Converges iff 4a(1-a)q^2 <= 1.
inline double h_inf_eval(BranchingLaw law, double q) {
  if (q < 0.0) fail(Errc::domain_error, "h is evaluated at q >= 0");
  const double x = 4.0 * law.a * (1.0 - law.a) * q * q;
  if (x > 1.0) fail(Errc::divergence_domain, "outside the convergence disk");
  return 2.0 * (1.0 - law.a) * q / (1.0 + std::sqrt(1.0 - x));
}

// h'(1) = 1/(1 - 2a): the mean total progeny.  8/7 for a = 1/16.
inline double h_inf_mean(BranchingLaw law) noexcept {
  return 1.0 / (1.0 - law.mean_children());
}

// Pr{prefixes handled >= t} <= h(q)^{k*levels} / q^t.
inline TailBound progeny_tail_bound(BranchingLaw law, std::uint64_t k,
                                    unsigned levels, double q, double t) {
  const double lh = std::log(h_inf_eval(law, q));
  TailBound b;
  b.levels = levels;
  b.q = q;
  b.threshold = t;
  b.log_value =
      static_cast<double>(k) * static_cast<double>(levels) * lh - t * std::log(q);
  b.value = std::exp(b.log_value);
  b.vacuous = b.log_value >= 0.0;
  return b;
}

// The scheme-standard TLE bound with its cap:
//   16k buckets: q = 2, t = 3k log2(n),        bound <= n^{-k}
//   ck buckets:  q = 1 + eps^2, t = k log2(n)/eps^2, bound <= 2 n^{-k}
// (pcns-dd runs its tree only up to log2(n/k); n/k replaces n there).
inline TailBound tle_probability_bound(const SchemeParams& p) {
  const std::uint64_t span =
      p.scheme == Scheme::pcns_dd ? p.n / p.k : p.n;
  const auto levels = static_cast<unsigned>(std::countr_zero(span));
  TailBound b;
  if (p.scheme == Scheme::pcns16) {
    b = progeny_tail_bound(BranchingLaw::pcns16(), p.k, levels, 2.0,
                           3.0 * static_cast<double>(p.k) * levels);
    b.cap_log = -static_cast<double>(p.k) * std::log(static_cast<double>(span));
  } else {
    const double e2 = p.epsilon * p.epsilon;
    b = progeny_tail_bound(BranchingLaw::comp(p.epsilon), p.k, levels,
                           1.0 + e2,
                           static_cast<double>(p.k) * levels / e2);
    b.cap_log = std::log(2.0) -
                static_cast<double>(p.k) * std::log(static_cast<double>(span));
  }
  if (b.log_value > b.cap_log + 1e-9)
    fail(Errc::domain_error, "TLE bound exceeded its cap");
  return b;
}

// Total error budget as the analysis composes it: unlucky-survivor term +
// long-list term + TLE term.
//   16k buckets: 5 k^{-3}            + e^{-k} + n^{-k}
//   ck buckets:  2 / (eps k^{2 eps}) + e^{-k} + 2 n^{-k}
//   pcns-dd:     e^{-k} + (n/k)^{-k}   (the DD finisher's own failure rate is
//                measured empirically, not bounded here)
inline double wa_probability_bound(const SchemeParams& p) {
  const double k = static_cast<double>(p.k);
  const double ln_n = std::log(static_cast<double>(p.n));
  switch (p.scheme) {
    case Scheme::pcns16:
      return 5.0 * std::pow(k, -3.0) + std::exp(-k) + std::exp(-k * ln_n);
    case Scheme::pcns_comp:
      return 2.0 / (p.epsilon * std::pow(k, 2.0 * p.epsilon)) + std::exp(-k) +
             2.0 * std::exp(-k * ln_n);
    case Scheme::pcns_dd:
      return std::exp(-k) +
             std::exp(-k * std::log(static_cast<double>(p.n / p.k)));
  }
  return 0.0;
}

// log2 of the number of candidate infection sets, sum_{i<=k} C(n, i);
// no nonadaptive scheme can resolve them with fewer tests.
inline double info_bound(std::uint64_t n, std::uint64_t k) {
  if (k > n) fail(Errc::domain_error, "k must not exceed n");
  const double dn = static_cast<double>(n);
  double log_sum = -std::numeric_limits<double>::infinity();
  for (std::uint64_t i = 0; i <= k; ++i) {
    const double di = static_cast<double>(i);
    const double term = std::lgamma(dn + 1.0) - std::lgamma(di + 1.0) -
                        std::lgamma(dn - di + 1.0);
    const double hi = std::max(log_sum, term);
    log_sum = hi + std::log(std::exp(log_sum - hi) + std::exp(term - hi));
  }
  return log_sum / std::log(2.0);
}

}  // namespace pcns
