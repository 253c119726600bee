#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "allconcur/protocol.hpp"
#include "allconcur/units.hpp"

namespace allconcur {

class FdError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class FdKind { Oracle, Heartbeat };

std::string to_string(FdKind kind);
FdKind parse_fd_kind(const std::string& text);

struct FdConfig {
  double hb_period = 0.010;  // seconds
  double timeout = 0.100;    // seconds
  FdKind kind = FdKind::Oracle;
  /// Timeout multiplier after each false suspicion (eventual accuracy).
  double escalation_factor = 2.0;
  /// Oracle: delay between a crash and its suspicion; defaults to timeout.
  std::optional<double> detection_latency;

  /// Throws FdError when an invariant is violated.
  void validate() const;
  double oracle_latency() const { return detection_latency.value_or(timeout); }
};

/// Link delay distribution.
struct DelayModel {
  enum class Kind { Constant, Uniform, Exponential };
  Kind kind = Kind::Constant;
  double a = 0;  // constant value, uniform low bound, or exponential mean
  double b = 0;  // uniform high bound
  std::uint64_t seed = 1;

  static DelayModel constant(double value, std::uint64_t seed = 1);
  static DelayModel uniform(double lo, double hi, std::uint64_t seed = 1);
  static DelayModel exponential(double mean, std::uint64_t seed = 1);

  /// "const:1ms", "uniform:1ms:3ms" or "exp:10ms".
  static DelayModel parse(const std::string& text, std::uint64_t seed = 1);
  std::string to_string() const;

  /// Pr[T > t], t in seconds.
  double tail(double t) const;
  /// Largest possible sample; infinity for unbounded models.
  double upper_bound() const;
  void validate() const;
};

/// Deterministic sample stream of a DelayModel; identical (model, stream)
/// pairs yield identical sequences on every platform.
class DelaySampler {
 public:
  explicit DelaySampler(const DelayModel& model, std::uint64_t stream = 0);
  double sample_seconds();
  /// Sample rounded up to whole nanoseconds.
  Nanos sample();

 private:
  double unit();  // uniform in [0,1)
  DelayModel model_;
  std::mt19937_64 rng_;
};

/// Predecessors not heard from within the timeout: now - last > timeout.
std::vector<ServerId> monitor_step(Nanos now, const std::map<ServerId, Nanos>& last_heard, Nanos timeout);
std::vector<ServerId> monitor_step(Nanos now, const std::map<ServerId, Nanos>& last_heard, const FdConfig& cfg);

using TailFn = std::function<double(double)>;

/// (1 - prod_{k=1}^{floor(to/hb)} Pr[T > to - k*hb])^(n*d); 0 when the
/// product is empty.
double accuracy_probability(const FdConfig& cfg, std::size_t n, std::size_t d, const TailFn& tail);

struct AccuracyEstimate {
  std::size_t trials = 0;
  std::size_t accurate = 0;
  double frequency() const { return trials == 0 ? 0.0 : static_cast<double>(accurate) / static_cast<double>(trials); }
  /// Standard error of frequency().
  double sigma() const;
};

/// Simulates one timeout window on each of the n*d monitored links with
/// independent heartbeat delays. A trial is accurate when every link sees a
/// heartbeat arrive within the window.
AccuracyEstimate accuracy_monte_carlo(const FdConfig& cfg, std::size_t n, std::size_t d, const DelayModel& delay,
                                      std::size_t trials, std::uint64_t seed);

}  // namespace allconcur
