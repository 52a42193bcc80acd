#pragma once

#include <nlohmann/json.hpp>

#include "sticky/chain.hpp"
#include "sticky/density_check.hpp"
#include "sticky/form.hpp"
#include "sticky/quadrature.hpp"

namespace sticky {

// Keys of per-stratum maps are StratumIndex::bit_string(n), coordinate 1
// first ('1' = wet). Maps preserve enumerate_strata order.
nlohmann::ordered_json to_json(const QuadratureResult& q, std::size_t n);
nlohmann::ordered_json to_json(const IbpReport& r, std::size_t n);
nlohmann::ordered_json to_json(const DensityReport& r);
nlohmann::ordered_json to_json(const BoundaryMassRatio& r);

}  // namespace sticky
