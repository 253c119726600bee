#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

namespace allconcur {

/// LogP parameters in seconds plus the overlay shape.
struct LogPParams {
  double L = 0;  // latency
  double o = 0;  // per-message overhead
  double g = 0;  // gap; carried for reports, assumed below o
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t D = 0;  // overlay diameter

  void validate() const;
};

/// L + 2o
double msg_time(const LogPParams& p);

/// Sender overhead with contention over d successors: o + (d-1)/2 * o.
double send_overhead(const LogPParams& p);

/// One-way dissemination latency (L + o_s + o) * D.
double rbcast_time(const LogPParams& p);

/// Request/response latency: twice rbcast_time.
double round_trip_time(const LogPParams& p);

/// 2(n-1) d o
double work_bound(const LogPParams& p);

/// exp(-n d o / mttf) per round, raised to `rounds`.
double depth_within_faultdiameter_prob(std::size_t n, std::size_t d, double o, double mttf, double rounds);

struct MessageCounts {
  std::size_t bcast = 0;
  std::size_t fail = 0;
};

/// Per-server receive bounds: n*d broadcasts and f*d^2 notifications.
MessageCounts message_counts(std::size_t n, std::size_t d, std::size_t f);

struct ModelRow {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t D = 0;
  double model_latency = 0;
  double work_bound = 0;
};

/// Header "n,d,D,model_latency,work_bound" then one line per row; times in
/// seconds.
void write_model_csv(std::ostream& out, const std::vector<ModelRow>& rows);

}  // namespace allconcur
