#include <algorithm>
#include <cmath>
#include <numeric>

#include "allconcur/analysis.hpp"

namespace allconcur {

Rational Rational::of(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw GraphError("zero denominator");
  const auto g = std::gcd(num, den);
  if (g == 0) return Rational{0, 1};
  return Rational{num / g, den / g};
}

std::string Rational::to_string() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const auto lhs = static_cast<unsigned __int128>(a.num) * b.den;
  const auto rhs = static_cast<unsigned __int128>(b.num) * a.den;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

bool operator<=(const Rational& a, std::uint64_t b) { return a.num <= static_cast<unsigned __int128>(b) * a.den; }

std::size_t moore_lower_bound(std::size_t n, std::size_t d) {
  if (d < 2) throw GraphError("Moore bound needs degree >= 2");
  const unsigned __int128 target = static_cast<unsigned __int128>(n) * (d - 1) + d;
  unsigned __int128 power = 1;
  std::size_t e = 0;
  while (power < target) {
    power *= d;
    ++e;
  }
  return e == 0 ? 0 : e - 1;
}

double reliability(std::size_t n, std::size_t k, double p_f) {
  if (!(p_f >= 0.0 && p_f <= 1.0)) throw GraphError("failure probability must lie in [0,1]");
  if (k < 1 || k > n) throw GraphError("connectivity must lie in [1,n]");
  if (p_f == 0.0) return 1.0;
  if (p_f == 1.0) return 0.0;

  // log of C(n,i) p^i (1-p)^(n-i), advanced by the term ratio, then summed
  // relative to the largest term.
  const long double log_p = std::log(static_cast<long double>(p_f));
  const long double log_q = std::log1p(-static_cast<long double>(p_f));
  std::vector<long double> logs(k);
  logs[0] = static_cast<long double>(n) * log_q;
  for (std::size_t i = 1; i < k; ++i) {
    logs[i] = logs[i - 1] + std::log(static_cast<long double>(n - i + 1)) - std::log(static_cast<long double>(i)) +
              log_p - log_q;
  }
  const long double peak = *std::max_element(logs.begin(), logs.end());
  long double sum = 0;
  for (long double l : logs) sum += std::exp(l - peak);
  const long double result = std::exp(peak + std::log(sum));
  return static_cast<double>(std::min<long double>(result, 1.0L));
}

double ReliabilityParams::p_f() const {
  if (!(mttf > 0.0) || delta < 0.0) throw GraphError("reliability parameters must be positive");
  return -std::expm1(-delta / mttf);
}

std::size_t choose_degree(std::size_t n, double target, const ReliabilityParams& rel) {
  if (!(target < 1.0)) throw GraphError("reliability target must be below 1");
  const double p_f = rel.p_f();
  for (std::size_t d = 3; 2 * d <= n; ++d) {
    if (reliability(n, d, p_f) >= target) return d;
  }
  throw GraphError("no degree d with 2d <= " + std::to_string(n) + " reaches the reliability target");
}

GraphReport analyze(const Digraph& g, const std::vector<std::size_t>& fs, const EstimateOptions& opts) {
  GraphReport report;
  report.n = g.size();
  report.d = g.regular_degree().value_or(g.max_degree());
  report.diameter = diameter(g);
  report.connectivity = vertex_connectivity(g);
  report.moore_lower = report.d >= 2 ? moore_lower_bound(report.n, report.d) : 0;
  for (std::size_t f : fs) {
    if (f >= report.connectivity) {
      throw GraphError("f=" + std::to_string(f) + " is not below the connectivity " +
                       std::to_string(report.connectivity));
    }
    const auto est = fault_diameter_estimate(g, f, opts);
    report.fault.push_back(FaultBound{f, est.avg_lower, est.delta_hat});
  }
  return report;
}

}  // namespace allconcur
