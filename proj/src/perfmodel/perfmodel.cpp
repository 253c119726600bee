#include "allconcur/perfmodel.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace allconcur {

void LogPParams::validate() const {
  if (L < 0 || o < 0 || g < 0) throw std::invalid_argument("LogP parameters must be non-negative");
}

double msg_time(const LogPParams& p) {
  p.validate();
  return p.L + 2 * p.o;
}

double send_overhead(const LogPParams& p) {
  p.validate();
  const double extra = p.d > 0 ? static_cast<double>(p.d - 1) / 2.0 : 0.0;
  return p.o + extra * p.o;
}

double rbcast_time(const LogPParams& p) {
  if (p.D < 1) throw std::invalid_argument("diameter must be at least 1");
  return (p.L + send_overhead(p) + p.o) * static_cast<double>(p.D);
}

double round_trip_time(const LogPParams& p) { return 2 * rbcast_time(p); }

double work_bound(const LogPParams& p) {
  p.validate();
  if (p.n < 1) throw std::invalid_argument("need at least one server");
  return 2.0 * static_cast<double>(p.n - 1) * static_cast<double>(p.d) * p.o;
}

double depth_within_faultdiameter_prob(std::size_t n, std::size_t d, double o, double mttf, double rounds) {
  if (o < 0 || !(mttf > 0) || rounds < 0) throw std::invalid_argument("need o >= 0, mttf > 0, rounds >= 0");
  const double exponent = -static_cast<double>(n) * static_cast<double>(d) * o / mttf;
  return std::exp(exponent * rounds);
}

MessageCounts message_counts(std::size_t n, std::size_t d, std::size_t f) { return {n * d, f * d * d}; }

void write_model_csv(std::ostream& out, const std::vector<ModelRow>& rows) {
  out << "n,d,D,model_latency,work_bound\n";
  char buf[64];
  for (const auto& r : rows) {
    out << r.n << ',' << r.d << ',' << r.D << ',';
    std::snprintf(buf, sizeof buf, "%.9g", r.model_latency);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.9g", r.work_bound);
    out << buf << '\n';
  }
}

}  // namespace allconcur
