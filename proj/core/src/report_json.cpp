#include "sticky/report_json.hpp"

namespace sticky {

nlohmann::ordered_json to_json(const QuadratureResult& q, std::size_t n) {
  nlohmann::ordered_json j;
  j["value"] = q.value;
  auto& per = j["per_stratum"] = nlohmann::ordered_json::object();
  for (const auto& [b, v] : q.per_stratum) per[b.bit_string(n)] = v;
  j["est_truncation_error"] = q.est_truncation_error;
  return j;
}

nlohmann::ordered_json to_json(const IbpReport& r, std::size_t n) {
  nlohmann::ordered_json j;
  j["form_value"] = r.form_value;
  j["ibp_value"] = r.ibp_value;
  j["abs_residual"] = r.abs_residual;
  j["rel_residual"] = r.rel_residual;
  auto& per = j["per_stratum"] = nlohmann::ordered_json::object();
  for (const auto& s : r.per_stratum)
    per[s.stratum.bit_string(n)] = {{"form", s.form}, {"ibp", s.ibp}};
  return j;
}

nlohmann::ordered_json to_json(const DensityReport& r) {
  return {{"mass", r.mass},
          {"mass_truncation", r.mass_truncation},
          {"drift_l2", r.drift_l2},
          {"drift_truncation", r.drift_truncation},
          {"gradient_max_abs_error", r.gradient.max_abs_error},
          {"gradient_ok", r.gradient.ok},
          {"finite", r.finite},
          {"ok", r.ok}};
}

nlohmann::ordered_json to_json(const BoundaryMassRatio& r) {
  return {{"coordinate", r.coordinate + 1}, {"beta", r.beta}, {"ratio", r.ratio},
          {"a", r.a},                       {"b", r.b}};
}

}  // namespace sticky
