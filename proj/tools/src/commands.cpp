#include "commands.hpp"

#include "report.hpp"

#include "extdep/angular_model.hpp"
#include "extdep/bayes.hpp"
#include "extdep/csv.hpp"
#include "extdep/diagnostics.hpp"
#include "extdep/inference.hpp"
#include "extdep/margins.hpp"
#include "extdep/parameterization.hpp"
#include "extdep/sampling.hpp"
#include "extdep/serialization.hpp"
#include "extdep/summaries.hpp"

#include <boost/math/distributions/beta.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <sstream>

namespace extdep::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Smallest distribution value used for thresholds below every observation.
constexpr double kMinCdf = 1e-300;

std::string out_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void prepare_output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir + "'");
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string join(const std::vector<std::string>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += v[i];
  }
  return s;
}

std::string fmt(double x) { return format_double(x); }

Family parse_family_option(const std::string& s) {
  try {
    return parse_family(s);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

std::size_t margin_index(const std::vector<NamedMargin>& margins, const std::string& col) {
  for (std::size_t j = 0; j < margins.size(); ++j)
    if (margins[j].column == col) return j;
  throw ConfigError("column '" + col + "' is not in the margins file");
}

AngularModel load_checked_model(const std::string& path, std::size_t d) {
  AngularModel m = load_model(path);
  if (static_cast<std::size_t>(m.dim()) != d)
    throw DataError("model dimension " + std::to_string(m.dim()) + " does not match " + std::to_string(d) +
                    " margins");
  return m;
}

struct FrechetThreshold {
  double y;
  std::vector<std::string> flags;
};

// Raw threshold to the unit Frechet scale through the fitted margin.
FrechetThreshold to_frechet(const MarginalModel& m, double x) {
  FrechetThreshold t{0.0, {}};
  if (x < m.threshold_value()) t.flags.push_back("below_threshold");
  double F = m.cdf(x);
  if (F >= 1.0) {
    t.flags.push_back("above_support");
    t.y = kInf;
    return t;
  }
  if (F <= 0.0) {
    t.flags.push_back("below_data_range");
    F = kMinCdf;
  }
  t.y = -1.0 / std::log(F);
  return t;
}

void estimate_flags(const ProbabilityEstimate& e, std::vector<std::string>& flags) {
  for (const auto& w : e.warnings) {
    if (w.find("radius") != std::string::npos) flags.push_back("low_radius");
    if (w.find("0.5") != std::string::npos) flags.push_back("out_of_regime");
  }
  if (e.clipped) flags.push_back("clipped");
}

// Raw columns of a data file, with missing entries (empty, NA, non-numeric)
// kept as NaN so that each event can use the rows it needs.
struct RawData {
  std::vector<std::vector<double>> columns;
  std::size_t rows = 0;
};

RawData read_raw(const std::string& path, const std::vector<NamedMargin>& margins) {
  const CsvTable t = read_csv(path);
  RawData r;
  r.rows = t.rows.size();
  for (const auto& m : margins) {
    const std::size_t c = t.column(m.column);
    std::vector<double> col(r.rows);
    for (std::size_t i = 0; i < r.rows; ++i) col[i] = parse_number(t.rows[i][c]).value_or(std::nan(""));
    r.columns.push_back(std::move(col));
  }
  return r;
}

// Rows where every involved coordinate is present, and how many of them
// realize the event. thresholds: NaN marks coordinates outside the event.
std::pair<std::size_t, std::size_t> count_event(const RawData& r, const std::vector<double>& thresholds,
                                                bool intersection) {
  std::size_t n = 0, hits = 0;
  for (std::size_t i = 0; i < r.rows; ++i) {
    bool complete = true, all = true, any = false;
    for (std::size_t j = 0; j < thresholds.size(); ++j) {
      if (std::isnan(thresholds[j])) continue;
      const double x = r.columns[j][i];
      if (std::isnan(x)) {
        complete = false;
        break;
      }
      const bool above = x > thresholds[j];
      all = all && above;
      any = any || above;
    }
    if (!complete) continue;
    ++n;
    if (intersection ? all : any) ++hits;
  }
  return {n, hits};
}

std::vector<std::string> empirical_fields(const std::optional<std::pair<std::size_t, std::size_t>>& c) {
  if (!c) return {"", "", "", "", ""};
  const auto [n, hits] = *c;
  if (n == 0) return {"0", "0", "", "", ""};
  const BinomialInterval ci = binomial_interval(hits, n);
  return {std::to_string(hits), std::to_string(n), fmt(ci.estimate), fmt(ci.lower), fmt(ci.upper)};
}

std::string face_label(Subset S, int d) {
  std::string s;
  for (int j = 0; j < d; ++j) {
    if (!subset_contains(S, j)) continue;
    if (!s.empty()) s += '+';
    s += std::to_string(j + 1);
  }
  return s;
}

void validate_fit_args(const FitArgs& a, std::vector<Family>& families, bool& mle, bool& bayes) {
  if (a.input.empty()) throw ConfigError("an input CSV is required");
  if (a.columns.size() < 2 || a.columns.size() > 4) throw ConfigError("select between 2 and 4 columns");
  if (std::set<std::string>(a.columns.begin(), a.columns.end()).size() != a.columns.size())
    throw ConfigError("columns must be distinct");
  if (!(a.threshold_quantile > 0.0 && a.threshold_quantile < 1.0))
    throw ConfigError("threshold quantile must lie in (0, 1)");
  if (a.families.empty()) throw ConfigError("at least one family is required");
  for (const auto& f : a.families) {
    const Family fam = parse_family_option(f);
    if (std::find(families.begin(), families.end(), fam) != families.end())
      throw ConfigError("family '" + f + "' listed twice");
    families.push_back(fam);
  }
  if (a.engine != "mle" && a.engine != "bayes" && a.engine != "both")
    throw ConfigError("engine must be mle, bayes or both");
  mle = a.engine != "bayes";
  bayes = a.engine != "mle";
  if (a.starts < 1) throw ConfigError("at least one optimizer start is required");
  if (bayes && a.burn_in >= a.mcmc_iter) throw ConfigError("burn-in must be shorter than the chain");
}

struct Ranked {
  std::string engine;
  std::vector<FitResult> fits;
};

void write_ranking(const std::string& dir, const std::vector<Ranked>& groups) {
  std::ostringstream csv;
  write_csv_row(csv, {"engine", "criterion", "rank", "family", "value", "parameters", "loglik"});
  json j = json::array();
  for (const auto& g : groups) {
    if (g.fits.empty()) continue;
    for (Criterion c : {Criterion::TIC, Criterion::BIC}) {
      const char* cname = c == Criterion::TIC ? "TIC" : "BIC";
      std::vector<RankEntry> ranks;
      if (g.fits.size() >= 2) {
        ranks = select_model(g.fits, c);
      } else {
        const auto& f = g.fits.front();
        ranks.push_back({0, f.family(), c == Criterion::BIC ? f.bic : (f.covariance_ok ? f.tic : kInf),
                         f.parameter_count()});
      }
      for (std::size_t r = 0; r < ranks.size(); ++r) {
        const auto& e = ranks[r];
        const std::string code(family_code(e.family));
        const double ll = g.fits[e.index].loglik;
        write_csv_row(csv, {g.engine, cname, std::to_string(r + 1), code, std::isfinite(e.value) ? fmt(e.value) : "",
                            std::to_string(e.parameters), fmt(ll)});
        j.push_back({{"engine", g.engine}, {"criterion", cname}, {"rank", r + 1}, {"family", code},
                     {"value", std::isfinite(e.value) ? json(e.value) : json(nullptr)},
                     {"parameters", e.parameters}, {"loglik", ll}});
      }
    }
  }
  write_file(out_path(dir, "ranking.csv"), csv.str());
  write_json(out_path(dir, "ranking.json"), j);
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const UnsupportedError*>(&e)) return kConfigFailure;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const ValidationError*>(&e)) return kDataFailure;
  return kNumericFailure;
}

BinomialInterval binomial_interval(std::size_t count, std::size_t n) {
  if (n == 0 || count > n) throw ValidationError("invalid binomial counts");
  const double p = static_cast<double>(count) / static_cast<double>(n);
  if (p < 0.02) {
    const double c = static_cast<double>(count), nn = static_cast<double>(n);
    const double lo = count == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<>(c, nn - c + 1), 0.025);
    const double hi = count == n ? 1.0 : boost::math::quantile(boost::math::beta_distribution<>(c + 1, nn - c), 0.975);
    return {p, lo, hi, true};
  }
  const double half = 1.959963984540054 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return {p, std::max(0.0, p - half), std::min(1.0, p + half), false};
}

int cmd_fit(const FitArgs& a) {
  std::vector<Family> families;
  bool mle = true, bayes = false;
  validate_fit_args(a, families, mle, bayes);

  const CsvTable table = read_csv(a.input);
  const Eigen::MatrixXd X = numeric_columns(table, a.columns);
  const auto n = static_cast<std::size_t>(X.rows());
  const int d = static_cast<int>(a.columns.size());
  const std::size_t k = a.k ? a.k : (d == 4 ? 200 : 100);
  if (k > n)
    throw ConfigError("k_excesses = " + std::to_string(k) + " exceeds the " + std::to_string(n) + " observations");
  prepare_output_dir(a.output_dir);

  std::vector<NamedMargin> margins;
  PointMatrix Y(static_cast<Eigen::Index>(n), d);
  for (int j = 0; j < d; ++j) {
    const Eigen::VectorXd col = X.col(j);
    const std::span<const double> xs(col.data(), n);
    try {
      margins.push_back({a.columns[j], fit_gpd_margin(xs, a.threshold_quantile)});
    } catch (const EstimationError& e) {
      throw DataError("column " + a.columns[j] + ": " + e.what());
    }
    const auto y = to_unit_frechet(xs, margins.back().model);
    for (std::size_t i = 0; i < n; ++i) Y(static_cast<Eigen::Index>(i), j) = y[i];
  }
  write_json(out_path(a.output_dir, "margins.json"), margins_to_json(margins, n));

  const PseudoPolarSample ex = select_extremes(to_pseudo_polar(Y), k);
  {
    std::ostringstream csv;
    std::vector<std::string> head{"row", "radius"};
    for (int j = 0; j < d; ++j) head.push_back("w" + std::to_string(j + 1));
    write_csv_row(csv, head);
    for (std::size_t i = 0; i < ex.size(); ++i) {
      std::vector<std::string> row{std::to_string(ex.source_rows[i] + 1), fmt(ex.radii[i])};
      for (int j = 0; j < d; ++j) row.push_back(fmt(ex.angles(i, j)));
      write_csv_row(csv, row);
    }
    write_file(out_path(a.output_dir, "excesses.csv"), csv.str());
  }
  const PointMatrix& W = ex.angles;

  FitOptions fopts;
  fopts.seed = a.seed;
  fopts.starts = a.starts;
  fopts.allow_small_sample = a.allow_small_sample;
  McmcOptions mopts;
  mopts.seed = a.seed;
  mopts.n_iter = a.mcmc_iter;
  mopts.burn_in = a.burn_in;

  Ranked mle_group{"mle", {}}, bayes_group{"bayes", {}};
  int status = kSuccess;
  auto fail = [&](Family f, const char* engine, const std::exception& e) {
    std::cerr << "error: " << family_code(f) << " (" << engine << "): " << e.what() << "\n";
    if (status == kSuccess) status = exit_code_for(e);
  };

  for (Family f : families) {
    const std::string code(family_code(f));
    if (mle) {
      try {
        FitResult fit = fit_mle(f, W, fopts);
        for (const auto& w : fit.warnings) std::cerr << "warning: " << code << ": " << w << "\n";
        save_model(fit.model, out_path(a.output_dir, code + "_model.txt"));
        write_json(out_path(a.output_dir, code + "_fit.json"), fit_to_json(fit));
        mle_group.fits.push_back(std::move(fit));
      } catch (const Error& e) {
        fail(f, "mle", e);
      }
    }
    if (bayes) {
      try {
        const PosteriorChain chain = mh_sample(f, W, default_prior(f, d), mopts);
        for (const auto& w : chain.warnings) std::cerr << "warning: " << code << ": " << w << "\n";
        write_chain_csv(out_path(a.output_dir, code + "_chain.csv"), chain);
        json meta = chain_to_json(chain);
        const ParameterCodec codec(f, d);
        const Eigen::VectorXd mean = chain.posterior_mean();
        save_model(codec.model(mean), out_path(a.output_dir, code + "_posterior_model.txt"));
        try {
          FitResult at_mean = evaluate_fit(codec, mean, nudge_interior(W), fopts.fd_step);
          meta["at_posterior_mean"] = {{"loglik", at_mean.loglik},
                                       {"tic", at_mean.covariance_ok ? json(at_mean.tic) : json(nullptr)},
                                       {"bic", at_mean.bic}};
          bayes_group.fits.push_back(std::move(at_mean));
        } catch (const Error& e) {
          meta["at_posterior_mean"] = {{"error", e.what()}};
          fail(f, "bayes", e);
        }
        write_json(out_path(a.output_dir, code + "_chain.json"), meta);
      } catch (const Error& e) {
        fail(f, "bayes", e);
      }
    }
  }
  write_ranking(a.output_dir, {mle_group, bayes_group});
  return status;
}

int cmd_predict(const PredictArgs& a) {
  if (a.model.empty() || a.margins.empty() || a.events.empty())
    throw ConfigError("predict needs --model, --margins and --events");
  const auto margins = load_margins(a.margins);
  const std::size_t d = margins.size();
  const AngularModel model = load_checked_model(a.model, d);
  const CsvTable events = read_csv(a.events);
  const std::size_t ev_col = events.column("event"), mode_col = events.column("mode");
  std::vector<std::optional<std::size_t>> cols(d);
  for (std::size_t c = 0; c < events.header.size(); ++c) {
    if (c == ev_col || c == mode_col) continue;
    bool found = false;
    for (std::size_t j = 0; j < d; ++j)
      if (margins[j].column == events.header[c]) {
        cols[j] = c;
        found = true;
      }
    if (!found) throw DataError("events column '" + events.header[c] + "' has no fitted margin");
  }
  std::optional<RawData> raw;
  if (!a.input.empty()) raw = read_raw(a.input, margins);
  prepare_output_dir(a.output_dir);

  std::ostringstream csv;
  write_csv_row(csv, {"event", "mode", "model_probability", "raw_probability", "flags", "empirical_count", "n",
                      "empirical_probability", "ci_lower", "ci_upper"});
  for (const auto& row : events.rows) {
    const std::string& name = row[ev_col];
    const std::string& mode = row[mode_col];
    bool intersection;
    if (mode == "intersection" || mode == "all")
      intersection = true;
    else if (mode == "union" || mode == "any")
      intersection = false;
    else
      throw DataError("event '" + name + "': mode must be intersection or union");

    std::vector<double> x(d, std::nan("")), y(d, kInf);
    std::vector<std::string> flags;
    bool impossible = false, involved = false;
    for (std::size_t j = 0; j < d; ++j) {
      if (!cols[j] || row[*cols[j]].empty()) continue;
      const auto v = parse_number(row[*cols[j]]);
      if (!v) throw DataError("event '" + name + "': bad threshold '" + row[*cols[j]] + "'");
      involved = true;
      x[j] = *v;
      FrechetThreshold t = to_frechet(margins[j].model, *v);
      for (auto& f : t.flags) flags.push_back(margins[j].column + ":" + f);
      // above the support: impossible for an intersection, irrelevant for a union
      if (std::isinf(t.y) && intersection) impossible = true;
      y[j] = t.y;
    }
    if (!involved) throw DataError("event '" + name + "' sets no thresholds");
    const bool any_finite = std::any_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });

    double prob = 0.0, raw_prob = 0.0;
    if (impossible || !any_finite) {
      flags.push_back("impossible");
    } else {
      const ProbabilityEstimate e =
          intersection ? prob_failure_region(model, y) : prob_union_exceed(model, y);
      estimate_flags(e, flags);
      prob = e.value;
      raw_prob = e.raw;
    }
    std::optional<std::pair<std::size_t, std::size_t>> counts;
    if (raw) counts = count_event(*raw, x, intersection);
    std::vector<std::string> out{name, intersection ? "intersection" : "union", fmt(prob), fmt(raw_prob),
                                 join(flags, ';')};
    for (auto& f : empirical_fields(counts)) out.push_back(std::move(f));
    write_csv_row(csv, out);
  }
  write_file(out_path(a.output_dir, "predictions.csv"), csv.str());
  return kSuccess;
}

int cmd_return_levels(const ReturnLevelArgs& a) {
  if (a.model.empty() || a.margins.empty() || a.free.empty())
    throw ConfigError("return-levels needs --model, --margins and --free");
  if (a.p.empty()) throw ConfigError("at least one probability is required");
  for (double p : a.p)
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("probabilities must lie in (0, 1)");
  if (a.points < 2) throw ConfigError("a contour needs at least two points");
  const auto margins = load_margins(a.margins);
  const std::size_t d = margins.size();
  const AngularModel model = load_checked_model(a.model, d);
  const std::size_t i = margin_index(margins, a.free);
  const bool pair = !a.free2.empty();
  const std::size_t j = pair ? margin_index(margins, a.free2) : i;
  if (pair && i == j) throw ConfigError("the two free columns must differ");

  std::vector<double> fixed_x(d, std::nan("")), fixed_y(d, kInf);
  for (const auto& item : a.fixed) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("fixed thresholds are written COL=value");
    const std::size_t c = margin_index(margins, item.substr(0, eq));
    if (c == i || c == j) throw ConfigError("a free column cannot also be fixed");
    const auto v = parse_number(item.substr(eq + 1));
    if (!v) throw ConfigError("bad fixed threshold '" + item + "'");
    const FrechetThreshold t = to_frechet(margins[c].model, *v);
    if (std::isinf(t.y)) throw DomainError("fixed threshold for " + margins[c].column + " is above the support");
    for (const auto& f : t.flags) std::cerr << "warning: " << margins[c].column << ": " << f << "\n";
    fixed_x[c] = *v;
    fixed_y[c] = t.y;
  }
  std::optional<RawData> raw;
  if (!a.input.empty()) raw = read_raw(a.input, margins);
  prepare_output_dir(a.output_dir);

  auto raw_level = [&](std::size_t c, double y, std::vector<std::string>& flags) {
    const double F = std::exp(-1.0 / y);
    if (F < margins[c].model.threshold_quantile()) flags.push_back(margins[c].column + ":below_threshold");
    return margins[c].model.quantile(F);
  };

  std::ostringstream csv;
  std::size_t solved = 0;
  if (!pair) {
    write_csv_row(csv, {"p", "return_period", "frechet_level", "level", "flags", "empirical_count", "n",
                        "empirical_probability", "ci_lower", "ci_upper"});
    for (double p : a.p) {
      std::vector<std::string> flags;
      std::string fy, fx;
      std::optional<std::pair<std::size_t, std::size_t>> counts;
      try {
        const double y = joint_return_level(model, p, static_cast<int>(i), fixed_y);
        const double level = raw_level(i, y, flags);
        fy = fmt(y);
        fx = fmt(level);
        ++solved;
        if (raw) {
          std::vector<double> thr = fixed_x;
          thr[i] = level;
          counts = count_event(*raw, thr, true);
        }
      } catch (const DomainError& e) {
        flags.push_back("unattainable");
        std::cerr << "warning: p = " << p << ": " << e.what() << "\n";
      }
      std::vector<std::string> out{fmt(p), fmt(1.0 / p), fy, fx, join(flags, ';')};
      for (auto& f : empirical_fields(counts)) out.push_back(std::move(f));
      write_csv_row(csv, out);
    }
  } else {
    write_csv_row(csv, {"p", "return_period", "point", "frechet_" + margins[i].column, "frechet_" + margins[j].column,
                        "level_" + margins[i].column, "level_" + margins[j].column, "flags"});
    for (double p : a.p) {
      std::vector<std::pair<double, double>> contour;
      try {
        contour = joint_return_contour(model, p, static_cast<int>(i), static_cast<int>(j), fixed_y, a.points);
        ++solved;
      } catch (const DomainError& e) {
        std::cerr << "warning: p = " << p << ": " << e.what() << "\n";
        continue;
      }
      for (std::size_t k = 0; k < contour.size(); ++k) {
        std::vector<std::string> flags;
        const auto [yi, yj] = contour[k];
        const double li = raw_level(i, yi, flags), lj = raw_level(j, yj, flags);
        write_csv_row(csv, {fmt(p), fmt(1.0 / p), std::to_string(k), fmt(yi), fmt(yj), fmt(li), fmt(lj),
                            join(flags, ';')});
      }
    }
  }
  write_file(out_path(a.output_dir, "return_levels.csv"), csv.str());
  if (solved == 0) throw DomainError("no requested probability is attainable given the fixed thresholds");
  return kSuccess;
}

int cmd_density_grid(const DensityGridArgs& a) {
  if (a.model.empty()) throw ConfigError("density-grid needs --model");
  if (a.resolution < 2) throw ConfigError("resolution must be at least 2");
  const AngularModel model = load_model(a.model);
  if (model.dim() != 3) throw UnsupportedError("density grids are only produced for trivariate models");
  prepare_output_dir(a.output_dir);

  // lattice w = (a, b, c) / (2R) with every part at least one step from the boundary
  const int steps = 2 * a.resolution;
  const double h = 1.0 / steps;
  std::ostringstream csv;
  write_csv_row(csv, {"w1", "w2", "w3", "log_density"});
  for (int i = 1; i <= steps - 2; ++i) {
    for (int j = 1; i + j <= steps - 1; ++j) {
      const std::array<double, 3> w{i * h, j * h, (steps - i - j) * h};
      write_csv_row(csv, {fmt(w[0]), fmt(w[1]), fmt(w[2]), fmt(log_angular_density(model, w))});
    }
  }
  write_file(out_path(a.output_dir, "density_grid.csv"), csv.str());

  std::ostringstream masses;
  write_csv_row(masses, {"face", "size", "mass"});
  for (const auto& fm : mass_decomposition(model))
    write_csv_row(masses, {face_label(fm.face, 3), std::to_string(subset_size(fm.face)), fmt(fm.mass)});
  write_file(out_path(a.output_dir, "masses.csv"), masses.str());
  return kSuccess;
}

int cmd_simulate(const SimulateArgs& a) {
  if (a.model.empty()) throw ConfigError("simulate needs --model");
  const AngularModel model = load_model(a.model);
  prepare_output_dir(a.output_dir);
  const PointMatrix W = sample_angular(model, a.n, a.seed);
  std::ostringstream csv;
  std::vector<std::string> fields;
  for (int j = 0; j < model.dim(); ++j) fields.push_back("w" + std::to_string(j + 1));
  write_csv_row(csv, fields);
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    for (int j = 0; j < model.dim(); ++j) fields[j] = fmt(W(i, j));
    write_csv_row(csv, fields);
  }
  write_file(out_path(a.output_dir, "simulated.csv"), csv.str());
  return kSuccess;
}

int cmd_diagnose(const DiagnoseArgs& a) {
  if (a.chain.empty()) throw ConfigError("diagnose needs --chain");
  const CsvTable t = read_csv(a.chain);
  const Eigen::MatrixXd draws = numeric_columns(t, t.header);
  prepare_output_dir(a.output_dir);
  const auto summaries = summarize_draws(draws, t.header);

  std::ostringstream csv;
  write_csv_row(csv, {"parameter", "draws", "mean", "sd", "lower", "upper", "geweke_z", "hw_passed", "hw_start",
                      "hw_p_value"});
  json j = json::array();
  for (std::size_t c = 0; c < summaries.size(); ++c) {
    const auto& s = summaries[c];
    const Eigen::VectorXd col = draws.col(static_cast<Eigen::Index>(c));
    const HeidelbergerWelchResult hw = heidelberger_welch(std::span<const double>(col.data(), col.size()));
    write_csv_row(csv, {s.name, std::to_string(draws.rows()), fmt(s.mean), fmt(s.sd), fmt(s.lower), fmt(s.upper),
                        fmt(s.geweke_z), hw.passed ? "true" : "false", std::to_string(hw.start_index),
                        fmt(hw.p_value)});
    j.push_back({{"parameter", s.name}, {"draws", draws.rows()}, {"mean", s.mean}, {"sd", s.sd},
                 {"lower", s.lower}, {"upper", s.upper}, {"geweke_z", s.geweke_z}, {"hw_passed", hw.passed},
                 {"hw_start", hw.start_index}, {"hw_p_value", hw.p_value}});
  }
  write_file(out_path(a.output_dir, "diagnostics.csv"), csv.str());
  write_json(out_path(a.output_dir, "diagnostics.json"), j);
  return kSuccess;
}

}  // namespace extdep::cli
