#include "allconcur/fd.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace allconcur {

std::string to_string(FdKind kind) { return kind == FdKind::Oracle ? "oracle" : "heartbeat"; }

FdKind parse_fd_kind(const std::string& text) {
  if (text == "oracle") return FdKind::Oracle;
  if (text == "heartbeat") return FdKind::Heartbeat;
  throw FdError("unknown failure detector kind '" + text + "'");
}

void FdConfig::validate() const {
  if (!(hb_period > 0)) throw FdError("heartbeat period must be positive");
  if (!(timeout > 0)) throw FdError("timeout must be positive");
  if (kind == FdKind::Heartbeat && timeout < hb_period) throw FdError("timeout must be at least the heartbeat period");
  if (!(escalation_factor >= 1)) throw FdError("escalation factor must be >= 1");
  if (detection_latency && *detection_latency < 0) throw FdError("detection latency must be non-negative");
}

DelayModel DelayModel::constant(double value, std::uint64_t seed) { return {Kind::Constant, value, 0, seed}; }
DelayModel DelayModel::uniform(double lo, double hi, std::uint64_t seed) { return {Kind::Uniform, lo, hi, seed}; }
DelayModel DelayModel::exponential(double mean, std::uint64_t seed) { return {Kind::Exponential, mean, 0, seed}; }

DelayModel DelayModel::parse(const std::string& text, std::uint64_t seed) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.empty()) throw FdError("empty delay model");
  DelayModel m;
  try {
    if ((parts[0] == "const" || parts[0] == "constant") && parts.size() == 2) {
      m = constant(parse_duration(parts[1]), seed);
    } else if (parts[0] == "uniform" && parts.size() == 3) {
      m = uniform(parse_duration(parts[1]), parse_duration(parts[2]), seed);
    } else if ((parts[0] == "exp" || parts[0] == "exponential") && parts.size() == 2) {
      m = exponential(parse_duration(parts[1]), seed);
    } else {
      throw FdError("delay model must be const:<t>, uniform:<lo>:<hi> or exp:<mean>, got '" + text + "'");
    }
  } catch (const std::invalid_argument& e) {
    throw FdError(e.what());
  }
  m.validate();
  return m;
}

std::string DelayModel::to_string() const {
  switch (kind) {
    case Kind::Constant: return "const:" + format_duration(a);
    case Kind::Uniform: return "uniform:" + format_duration(a) + ":" + format_duration(b);
    case Kind::Exponential: return "exp:" + format_duration(a);
  }
  return "?";
}

void DelayModel::validate() const {
  if (a < 0 || b < 0) throw FdError("delays must be non-negative");
  if (kind == Kind::Uniform && b < a) throw FdError("uniform delay needs lo <= hi");
  if (kind == Kind::Exponential && !(a > 0)) throw FdError("exponential mean must be positive");
}

double DelayModel::tail(double t) const {
  switch (kind) {
    case Kind::Constant: return t < a ? 1.0 : 0.0;
    case Kind::Uniform:
      if (t < a) return 1.0;
      if (t >= b) return 0.0;
      return (b - t) / (b - a);
    case Kind::Exponential: return t <= 0 ? 1.0 : std::exp(-t / a);
  }
  return 0.0;
}

double DelayModel::upper_bound() const {
  switch (kind) {
    case Kind::Constant: return a;
    case Kind::Uniform: return b;
    case Kind::Exponential: return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

DelaySampler::DelaySampler(const DelayModel& model, std::uint64_t stream)
    : model_(model), rng_(model.seed ^ (stream * 0x9E3779B97F4A7C15ULL)) {
  model_.validate();
}

double DelaySampler::unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

double DelaySampler::sample_seconds() {
  switch (model_.kind) {
    case DelayModel::Kind::Constant: return model_.a;
    case DelayModel::Kind::Uniform: return model_.a + (model_.b - model_.a) * unit();
    case DelayModel::Kind::Exponential: return -model_.a * std::log1p(-unit());
  }
  return 0.0;
}

Nanos DelaySampler::sample() { return to_nanos(sample_seconds()); }

std::vector<ServerId> monitor_step(Nanos now, const std::map<ServerId, Nanos>& last_heard, Nanos timeout) {
  std::vector<ServerId> suspects;
  for (const auto& [pred, last] : last_heard) {
    if (now - last > timeout) suspects.push_back(pred);
  }
  return suspects;
}

std::vector<ServerId> monitor_step(Nanos now, const std::map<ServerId, Nanos>& last_heard, const FdConfig& cfg) {
  return monitor_step(now, last_heard, to_nanos(cfg.timeout));
}

double accuracy_probability(const FdConfig& cfg, std::size_t n, std::size_t d, const TailFn& tail) {
  if (!(cfg.hb_period > 0) || !(cfg.timeout > 0)) throw FdError("periods must be positive");
  const Nanos hb = to_nanos(cfg.hb_period);
  const Nanos to = to_nanos(cfg.timeout);
  const Nanos beats = to / hb;
  if (beats == 0) return 0.0;
  double product = 1.0;
  for (Nanos k = 1; k <= beats; ++k) {
    const double p = tail(to_seconds(to - k * hb));
    if (!(p >= 0.0 && p <= 1.0)) throw FdError("tail probability outside [0,1]");
    product *= p;
  }
  return std::pow(1.0 - product, static_cast<double>(n * d));
}

double AccuracyEstimate::sigma() const {
  if (trials == 0) return 0.0;
  const double p = frequency();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

AccuracyEstimate accuracy_monte_carlo(const FdConfig& cfg, std::size_t n, std::size_t d, const DelayModel& delay,
                                      std::size_t trials, std::uint64_t seed) {
  cfg.validate();
  DelayModel model = delay;
  model.seed = seed;
  DelaySampler sampler(model);
  const Nanos hb = to_nanos(cfg.hb_period);
  const Nanos to = to_nanos(cfg.timeout);
  const Nanos beats = to / hb;
  // heartbeats sent before the window can still land inside it
  constexpr Nanos kEarlier = 16;
  const std::size_t links = n * d;

  AccuracyEstimate est;
  est.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    bool all_links = true;
    for (std::size_t link = 0; link < links; ++link) {
      bool heard = false;
      for (Nanos k = -kEarlier; k <= beats; ++k) {
        const Nanos arrival = k * hb + sampler.sample();
        if (arrival > 0 && arrival <= to) heard = true;
      }
      if (!heard) all_links = false;
    }
    if (all_links) ++est.accurate;
  }
  return est;
}

}  // namespace allconcur
