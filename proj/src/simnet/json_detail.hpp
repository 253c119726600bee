#pragma once

#include "allconcur/fd.hpp"
#include "json.hpp"

namespace allconcur {

// shared by scenario and trace serialization
DelayModel delay_of(const nlohmann::ordered_json& v, std::uint64_t seed);
nlohmann::ordered_json delay_json(const DelayModel& m);

}  // namespace allconcur
