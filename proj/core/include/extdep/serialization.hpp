#pragma once

#include "extdep/angular_model.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace extdep {

// Key-value model document:
//   family = HR
//   d = 3
//   lambda_1_2 = 0.65
//   ...
// Parameters appear in the canonical order of AngularModel::parameter_names.
std::string model_to_text(const AngularModel& m);
AngularModel model_from_text(std::string_view text);

void save_model(const AngularModel& m, const std::string& path);
AngularModel load_model(const std::string& path);

// "key = value" lines; blank lines and lines starting with '#' are skipped.
// Throws DataError on malformed lines or repeated keys.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

}  // namespace extdep
