#include "report.hpp"

#include "extdep/csv.hpp"
#include "extdep/error.hpp"

#include <fstream>
#include <sstream>

namespace extdep::cli {

using nlohmann::json;

namespace {

json to_array(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_array(m.row(i).transpose()));
  return rows;
}

}  // namespace

json margins_to_json(const std::vector<NamedMargin>& margins, std::size_t n_rows) {
  json cols = json::array();
  for (const auto& [name, m] : margins) {
    cols.push_back({{"name", name},
                    {"threshold_quantile", m.threshold_quantile()},
                    {"threshold", m.threshold_value()},
                    {"scale", m.gpd_scale()},
                    {"shape", m.gpd_shape()},
                    {"below", m.below()}});
  }
  return {{"observations", n_rows}, {"columns", cols}};
}

std::vector<NamedMargin> load_margins(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open margins file '" + path + "'");
  std::vector<NamedMargin> out;
  try {
    const json j = json::parse(in);
    for (const auto& c : j.at("columns")) {
      out.push_back({c.at("name").get<std::string>(),
                     MarginalModel(c.at("threshold_quantile").get<double>(), c.at("threshold").get<double>(),
                                   c.at("scale").get<double>(), c.at("shape").get<double>(),
                                   c.at("below").get<std::vector<double>>())});
    }
  } catch (const json::exception& e) {
    throw DataError("malformed margins file '" + path + "': " + e.what());
  }
  if (out.empty()) throw DataError("margins file '" + path + "' lists no columns");
  return out;
}

json fit_to_json(const FitResult& fit) {
  json params = json::array();
  for (int i = 0; i < fit.parameter_count(); ++i) {
    params.push_back({{"name", fit.names[i]},
                      {"estimate", fit.theta_hat[i]},
                      {"std_error", fit.covariance_ok ? json(fit.std_errors[i]) : json(nullptr)}});
  }
  json starts = json::array();
  for (const auto& s : fit.starts)
    starts.push_back({{"index", s.index}, {"loglik", s.loglik}, {"converged", s.converged},
                      {"iterations", s.iterations}, {"message", s.message}});
  return {{"family", std::string(family_code(fit.family()))},
          {"d", fit.model.dim()},
          {"m", fit.m},
          {"parameters", params},
          {"loglik", fit.loglik},
          {"tic", fit.covariance_ok ? json(fit.tic) : json(nullptr)},
          {"bic", fit.bic},
          {"converged", fit.converged},
          {"covariance_ok", fit.covariance_ok},
          {"covariance", fit.covariance_ok ? to_rows(fit.sandwich_cov) : json(nullptr)},
          {"best_start", fit.best_start},
          {"iterations", fit.iterations},
          {"evaluations", fit.evaluations},
          {"starts", starts},
          {"warnings", fit.warnings}};
}

json chain_to_json(const PosteriorChain& chain) {
  json summaries = json::array();
  for (const auto& s : chain.summaries)
    summaries.push_back({{"name", s.name}, {"mean", s.mean}, {"sd", s.sd}, {"lower", s.lower},
                         {"upper", s.upper}, {"geweke_z", s.geweke_z}, {"hw_passed", s.hw_passed},
                         {"hw_start", s.hw_start}});
  return {{"family", std::string(family_code(chain.family))},
          {"d", chain.d},
          {"seed", chain.seed},
          {"n_iter", chain.n_iter},
          {"burn_in", chain.burn_in},
          {"retained", chain.draws.rows()},
          {"acceptance_rate", chain.acceptance_rate},
          {"burn_in_acceptance_rate", chain.burn_in_acceptance_rate},
          {"proposal_sd", to_array(chain.proposal_sd)},
          {"summaries", summaries},
          {"warnings", chain.warnings}};
}

void write_chain_csv(const std::string& path, const PosteriorChain& chain) {
  std::ostringstream out;
  write_csv_row(out, chain.names);
  std::vector<std::string> fields(chain.names.size());
  for (Eigen::Index i = 0; i < chain.draws.rows(); ++i) {
    for (Eigen::Index j = 0; j < chain.draws.cols(); ++j) fields[j] = format_double(chain.draws(i, j));
    write_csv_row(out, fields);
  }
  write_file(path, out.str());
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << content;
  if (!out) throw DataError("failed writing '" + path + "'");
}

void write_json(const std::string& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

}  // namespace extdep::cli
