#include "allconcur/units.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace allconcur {

double parse_duration(std::string_view text) {
  std::size_t split = 0;
  while (split < text.size() &&
         (std::isdigit(static_cast<unsigned char>(text[split])) || text[split] == '.' || text[split] == 'e' ||
          text[split] == 'E' || text[split] == '-' || text[split] == '+')) {
    // stop on a unit letter that merely looks like an exponent
    if ((text[split] == 'e' || text[split] == 'E') && split + 1 < text.size() &&
        !std::isdigit(static_cast<unsigned char>(text[split + 1])) && text[split + 1] != '-' && text[split + 1] != '+') {
      break;
    }
    ++split;
  }
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + split, value);
  if (split == 0 || ec != std::errc{} || ptr != text.data() + split) {
    throw std::invalid_argument("bad duration '" + std::string(text) + "'");
  }
  const std::string_view unit = text.substr(split);
  double scale = 0;
  if (unit.empty() || unit == "s") {
    scale = 1;
  } else if (unit == "ns") {
    scale = 1e-9;
  } else if (unit == "us") {
    scale = 1e-6;
  } else if (unit == "ms") {
    scale = 1e-3;
  } else if (unit == "min") {
    scale = 60;
  } else if (unit == "h") {
    scale = 3600;
  } else if (unit == "d") {
    scale = 24 * 3600;
  } else if (unit == "y") {
    scale = kYear;
  } else {
    throw std::invalid_argument("unknown duration unit in '" + std::string(text) + "'");
  }
  if (value < 0) throw std::invalid_argument("negative duration '" + std::string(text) + "'");
  return value * scale;
}

Nanos to_nanos(double seconds) {
  // values within float noise of a whole nanosecond are not bumped up
  const double ns = seconds * 1e9;
  const double whole = std::floor(ns);
  const double noise = std::max(1e-6, std::abs(ns) * 8 * std::numeric_limits<double>::epsilon());
  return static_cast<Nanos>(ns - whole < noise ? whole : whole + 1);
}

double to_seconds(Nanos ns) { return static_cast<double>(ns) * 1e-9; }

std::string format_duration(double seconds) {
  char buf[64];
  if (seconds >= 1 || seconds == 0) {
    std::snprintf(buf, sizeof buf, "%gs", seconds);
  } else if (seconds >= 1e-3) {
    std::snprintf(buf, sizeof buf, "%gms", seconds * 1e3);
  } else if (seconds >= 1e-6) {
    std::snprintf(buf, sizeof buf, "%gus", seconds * 1e6);
  } else {
    std::snprintf(buf, sizeof buf, "%gns", seconds * 1e9);
  }
  return buf;
}

}  // namespace allconcur
