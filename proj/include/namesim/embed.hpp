#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "namesim/metrics.hpp"

namespace namesim {

/// n x p coordinates, one point per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct StressReport {
  double raw_stress = 0.0;
  /// raw_stress / sum_ij w_ij delta_ij^2 (0 when the denominator is 0).
  double normalized_stress = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

enum class InitMethod { random, classical };
enum class Optimizer { gradient_descent, smacof };

std::string_view to_string(InitMethod init);
std::string_view to_string(Optimizer optimizer);
InitMethod parse_init_method(std::string_view text);
Optimizer parse_optimizer(std::string_view text);

struct OptimizerOptions {
  std::size_t max_iters = 500;
  /// Stop once the relative stress change of an accepted step drops below tol.
  double tol = 1e-6;
  std::uint64_t seed = 0;
  InitMethod init = InitMethod::random;
  /// Explicit starting configuration; overrides `init` when set.
  std::optional<Matrix> initial;
  /// Rotate the final configuration onto its principal axes (stress is
  /// rotation invariant; this fixes the orientation).
  bool principal_axes = true;
  bool record_history = false;
  unsigned threads = 0;
};

struct EmbeddingProvenance {
  std::string optimizer;
  std::string init;
  std::size_t max_iters = 0;
  double tol = 0.0;
  std::uint64_t seed = 0;
};

struct Embedding {
  Matrix X;
  StressReport stress;
  EmbeddingProvenance provenance;
  /// Raw stress after every iteration when OptimizerOptions::record_history.
  std::vector<double> stress_history;

  std::size_t n() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(X.cols()); }
};

/// sum over ordered pairs of w_ij (d_ij(X) - delta_ij)^2, i.e. twice the sum
/// over i < j. Accumulated per row, then combined by pairwise summation.
double raw_stress(const Matrix& X, const DissimilarityMatrix& delta, unsigned threads = 0);

/// Analytic gradient of raw_stress. Coincident points contribute nothing.
Matrix stress_gradient(const Matrix& X, const DissimilarityMatrix& delta, unsigned threads = 0);

/// sum over ordered pairs of w_ij delta_ij^2.
double stress_denominator(const DissimilarityMatrix& delta);
StressReport stress_report(const Matrix& X, const DissimilarityMatrix& delta, unsigned threads = 0);

/// Torgerson scaling via block power iteration on the double-centred squared
/// dissimilarities.
Matrix classical_scaling(const DissimilarityMatrix& delta, std::size_t p, std::uint64_t seed = 0,
                         unsigned threads = 0);

/// Translates to zero column means and optionally rotates onto principal axes
/// (columns ordered by decreasing variance, sign fixed so the largest-magnitude
/// loading of each axis is positive).
void normalize_configuration(Matrix& X, bool principal_axes);

/// Adaptive-step gradient descent on raw stress: a step that increases stress
/// is rejected and the step halved; an accepted step grows it by 5%.
Embedding lsmds_gradient_descent(const DissimilarityMatrix& delta, std::size_t p,
                                 const OptimizerOptions& opts = {});

/// Guttman-transform majorization. Requires a connected weight graph.
Embedding lsmds_smacof(const DissimilarityMatrix& delta, std::size_t p, const OptimizerOptions& opts = {});

Embedding embed(const DissimilarityMatrix& delta, std::size_t p, Optimizer optimizer,
                const OptimizerOptions& opts = {});

struct SweepEntry {
  std::size_t p = 0;
  StressReport stress;
};

/// One embedding per dimension in `dims` (non-empty, strictly ascending); each
/// dimension after the first starts from the previous solution padded with
/// zero columns plus small seeded jitter.
std::vector<SweepEntry> stress_dimension_sweep(const DissimilarityMatrix& delta,
                                               const std::vector<std::size_t>& dims,
                                               const OptimizerOptions& opts = {},
                                               Optimizer optimizer = Optimizer::gradient_descent,
                                               std::vector<Embedding>* embeddings = nullptr);

/// CSV `name,v1,...,vp`.
void write_embedding_csv(const Embedding& emb, const std::vector<std::string>& names,
                         const std::filesystem::path& path);
/// Reads `name,v1,...,vp`; returns coordinates and fills `names` when given.
Matrix read_embedding_csv(const std::filesystem::path& path, std::vector<std::string>* names = nullptr);

/// CSV `p,raw_stress,normalized_stress,iterations,converged`.
void write_sweep_csv(const std::vector<SweepEntry>& sweep, const std::filesystem::path& path);

}  // namespace namesim
