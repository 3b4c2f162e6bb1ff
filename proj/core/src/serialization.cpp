#include "extdep/serialization.hpp"

#include "extdep/csv.hpp"
#include "extdep/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace extdep {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw DataError("value of '" + key + "' is not a number: '" + v + "'");
  return x;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::size_t lineno = 0, pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw DataError("line " + std::to_string(lineno) + ": empty key");
    if (!seen.insert(key).second) throw DataError("key '" + key + "' appears twice");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

std::string model_to_text(const AngularModel& m) {
  std::ostringstream os;
  os << "family = " << family_code(m.family()) << '\n';
  os << "d = " << m.dim() << '\n';
  const auto names = m.parameter_names();
  const auto values = m.parameters();
  for (std::size_t k = 0; k < names.size(); ++k) os << names[k] << " = " << format_double(values[k]) << '\n';
  return os.str();
}

AngularModel model_from_text(std::string_view text) {
  const auto kv = parse_key_values(text);
  std::map<std::string, std::string> map(kv.begin(), kv.end());
  if (!map.count("family") || !map.count("d")) throw DataError("model document needs 'family' and 'd'");
  Family f;
  try {
    f = parse_family(map["family"]);
  } catch (const ValidationError& e) {
    throw DataError(e.what());
  }
  const double dv = parse_number("d", map["d"]);
  if (dv != std::floor(dv) || dv < 2 || dv > 4) throw DataError("model dimension must be 2, 3 or 4");
  const int d = static_cast<int>(dv);

  // Names depend only on family and d; build them from a placeholder model.
  std::vector<std::string> names;
  switch (f) {
    case Family::TiltedDirichlet: names = AngularModel::tilted_dirichlet(std::vector<double>(d, 1.0)).parameter_names(); break;
    case Family::HuslerReiss:
      names = AngularModel::husler_reiss(std::vector<double>(d * (d - 1) / 2, 1.0), d).parameter_names();
      break;
    case Family::ExtremalT:
      names = AngularModel::extremal_t(std::vector<double>(d * (d - 1) / 2, 0.0), 1.0, d).parameter_names();
      break;
    case Family::PairwiseBeta:
      if (d < 3) throw DataError("pairwise beta model requires d >= 3");
      names = AngularModel::pairwise_beta(1.0, std::vector<double>(d * (d - 1) / 2, 1.0), d).parameter_names();
      break;
    case Family::AsymLogistic: {
      std::vector<double> beta(d, 0.5);
      names = AngularModel::asym_logistic_exchangeable(2.0, beta).parameter_names();
      break;
    }
  }
  std::vector<double> theta;
  for (const auto& n : names) {
    auto it = map.find(n);
    if (it == map.end()) throw DataError("model document is missing parameter '" + n + "'");
    theta.push_back(parse_number(n, it->second));
    map.erase(it);
  }
  map.erase("family");
  map.erase("d");
  if (!map.empty()) throw DataError("unknown key '" + map.begin()->first + "' in model document");
  return AngularModel::from_parameters(f, d, theta);
}

void save_model(const AngularModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << model_to_text(m);
}

AngularModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_text(ss.str());
}

}  // namespace extdep
