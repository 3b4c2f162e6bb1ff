#pragma once

#include "extdep/bayes.hpp"
#include "extdep/inference.hpp"
#include "extdep/margins.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace extdep::cli {

struct NamedMargin {
  std::string column;
  MarginalModel model;
};

nlohmann::json margins_to_json(const std::vector<NamedMargin>& margins, std::size_t n_rows);
std::vector<NamedMargin> load_margins(const std::string& path);

nlohmann::json fit_to_json(const FitResult& fit);
nlohmann::json chain_to_json(const PosteriorChain& chain);
void write_chain_csv(const std::string& path, const PosteriorChain& chain);

// Files are written in binary mode so output is identical across platforms.
void write_file(const std::string& path, const std::string& content);
void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace extdep::cli
