#pragma once

#include "extdep/mvgauss.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace extdep {

enum class Family { AsymLogistic, TiltedDirichlet, PairwiseBeta, HuslerReiss, ExtremalT };

// Short codes used in files and on the command line: AL, TD, PB, HR, ET.
std::string_view family_code(Family f);
std::string_view family_name(Family f);
Family parse_family(std::string_view s);

// Nonempty subset of {0, ..., d-1} encoded as a bitmask.
using Subset = std::uint32_t;
inline int subset_size(Subset s) { return __builtin_popcount(s); }
inline bool subset_contains(Subset s, int j) { return (s >> j) & 1u; }
inline Subset full_set(int d) { return (Subset{1} << d) - 1; }

// Row-major so that each row is a contiguous simplex point.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct AsymLogisticParams {
  int d = 0;
  std::vector<double> alpha;  // indexed by subset mask (entry 0 unused)
  Eigen::MatrixXd beta;       // (2^d) x d, beta(S, j) = 0 unless j in S

  // alpha on the full set, beta_j on the full set, 1 - beta_j at vertex j;
  // all other faces carry no mass.
  static AsymLogisticParams exchangeable(double alpha, std::span<const double> beta);
  int free_parameter_count() const { return (1 << (d - 1)) * (d + 2) - (2 * d + 1); }
};

struct TiltedDirichletParams {
  Eigen::VectorXd alpha;
};

struct PairwiseBetaParams {
  double alpha = 1.0;
  Eigen::MatrixXd beta;  // symmetric, diagonal unused
};

struct HuslerReissParams {
  Eigen::MatrixXd lambda;  // symmetric, diagonal unused
};

struct ExtremalTParams {
  CorrelationMatrix rho;
  double nu = 1.0;
};

namespace detail {
struct ModelCache;
}

// Immutable, validated angular measure H on the unit simplex. Every family is
// normalized as a probability measure, so each coordinate has mean 1/d.
class AngularModel {
public:
  using Params = std::variant<AsymLogisticParams, TiltedDirichletParams, PairwiseBetaParams, HuslerReissParams,
                              ExtremalTParams>;

  explicit AngularModel(AsymLogisticParams p);
  explicit AngularModel(TiltedDirichletParams p);
  explicit AngularModel(PairwiseBetaParams p);
  explicit AngularModel(HuslerReissParams p);
  explicit AngularModel(ExtremalTParams p);

  static AngularModel tilted_dirichlet(std::span<const double> alpha);
  // beta in pair order (1,2), (1,3), ..., (d-1,d), as in parameter vectors
  static AngularModel pairwise_beta(double alpha, std::span<const double> beta_pairs, int d);
  static AngularModel husler_reiss(std::span<const double> lambda_pairs, int d);
  static AngularModel extremal_t(std::span<const double> rho_pairs, double nu, int d);
  static AngularModel asym_logistic_exchangeable(double alpha, std::span<const double> beta);
  // Inverse of parameters(): rebuilds a model from its flat parameter vector.
  static AngularModel from_parameters(Family f, int d, std::span<const double> theta);

  Family family() const noexcept;
  int dim() const noexcept { return d_; }
  const Params& params() const noexcept { return params_; }
  template <class T>
  const T& as() const {
    return std::get<T>(params_);
  }

  // Flat parameter vector in the canonical order used by files and fits:
  // TD alpha_1..d; PB beta_12..beta_(d-1)d, alpha; HR lambda_12..; ET rho_12.., nu;
  // AL alpha_S for |S|>=2 then beta_(j,S) for every S and j in S (mask order).
  std::vector<double> parameters() const;
  std::vector<std::string> parameter_names() const;

  const detail::ModelCache& cache() const { return *cache_; }

private:
  void init();
  Params params_;
  int d_ = 0;
  std::shared_ptr<const detail::ModelCache> cache_;
};

// Indexes of pairs (i<j) in the canonical order.
std::vector<std::pair<int, int>> pair_list(int d);

// Interior density h(w) with respect to Lebesgue measure on (w_1..w_{d-1}).
// Throws DomainError unless every coordinate is strictly positive.
double angular_density(const AngularModel& m, std::span<const double> w);
double log_angular_density(const AngularModel& m, std::span<const double> w);
// Same density with log w supplied directly (no boundary check).
double log_angular_density_logw(const AngularModel& m, std::span<const double> logw);

// Density of H on the relative interior of face S; w has d entries with
// w_j = 0 outside S. |S| = d and |S| = 1 delegate to angular_density and
// vertex_mass. AL supports every face, ET every face (derived from the
// spectral representation); other families throw UnsupportedError for
// 1 < |S| < d.
double face_density(const AngularModel& m, Subset S, std::span<const double> w);
// log face density with log w_j for j in S (|S| entries, ascending j).
double log_face_density_logw(const AngularModel& m, Subset S, std::span<const double> logw_face);
bool face_supported(const AngularModel& m, Subset S);

double vertex_mass(const AngularModel& m, int j);

// Total H-mass of face S (relative interior). Quadrature where needed.
double face_mass(const AngularModel& m, Subset S, double tol = 1e-8);

// Faces that can carry mass, with their masses (vertices, edges, ..., interior).
struct FaceMass {
  Subset face;
  double mass;
};
std::vector<FaceMass> mass_decomposition(const AngularModel& m, double tol = 1e-8);

// Coordinate moments sum_S int w_j dH over atoms, faces and interior. Each
// equals 1/d for a valid angular measure.
Eigen::VectorXd angular_moments(const AngularModel& m, double tol = 1e-8);

// Exponent function V(y). Closed forms for AL, HR and ET; quadrature with
// relative tolerance tol for TD and PB. Infinite entries of y drop the
// corresponding coordinate.
double exponent_function(const AngularModel& m, std::span<const double> y, double tol = 1e-6);

// R(y) = d * int min_j (w_j / y_j) dH(w), by quadrature over the interior.
double tail_dependence_fn(const AngularModel& m, std::span<const double> y, double tol = 1e-6);

// Exponent-measure mass of {Y_j > y_j for all finite j}: survival-function
// sums for HR and ET, inclusion-exclusion for AL. Infinite entries mark
// coordinates that are not involved. TD/PB throw UnsupportedError.
double tail_dependence_closed_form(const AngularModel& m, std::span<const double> y);

// Pickands function A(t) = V(1/t_1, ..., 1/t_d) on the simplex.
double pickands(const AngularModel& m, std::span<const double> t, double tol = 1e-6);

bool has_closed_form_exponent(Family f);

}  // namespace extdep
