#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cardlab/estimator.hpp"

namespace cardlab {

/// Names accepted by make_estimator, in report order.
const std::vector<std::string>& estimator_names();

/// Fills every parameter of estimator `name` from `params`, falling back to
/// defaults; `seed` is used unless params carries one. Unknown keys throw.
nlohmann::ordered_json resolve_estimator_params(const std::string& name, const nlohmann::json& params, std::uint64_t seed);

/// Builds an unfitted estimator from resolved (or partial) parameters.
std::unique_ptr<Estimator> make_estimator(const std::string& name, const nlohmann::json& params, std::uint64_t seed);

}  // namespace cardlab
