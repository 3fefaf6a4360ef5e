#include "namesim/embed.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>

#include "namesim/error.hpp"
#include "namesim/parallel.hpp"
#include "namesim/random.hpp"

namespace namesim {

std::string_view to_string(InitMethod init) {
  return init == InitMethod::random ? "random" : "classical";
}

std::string_view to_string(Optimizer optimizer) {
  return optimizer == Optimizer::gradient_descent ? "gradient_descent" : "smacof";
}

InitMethod parse_init_method(std::string_view text) {
  if (text == "random") return InitMethod::random;
  if (text == "classical") return InitMethod::classical;
  throw InvalidArgument("unknown init method '" + std::string(text) + "'");
}

Optimizer parse_optimizer(std::string_view text) {
  if (text == "gd" || text == "gradient_descent") return Optimizer::gradient_descent;
  if (text == "smacof") return Optimizer::smacof;
  throw InvalidArgument("unknown optimizer '" + std::string(text) + "'");
}

namespace {

constexpr std::size_t kRowChunk = 32;

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

void check_shape(const Matrix& X, const DissimilarityMatrix& delta) {
  if (static_cast<std::size_t>(X.rows()) != delta.size()) {
    throw InvalidArgument("configuration has " + std::to_string(X.rows()) + " rows but the matrix has " +
                          std::to_string(delta.size()) + " points");
  }
  if (X.cols() < 1) throw InvalidArgument("configuration needs at least one column");
}

// offsets[i] + j is the condensed index of (i, j) for i < j.
std::vector<std::ptrdiff_t> row_offsets(std::size_t n) {
  std::vector<std::ptrdiff_t> off(n);
  for (std::size_t i = 0; i < n; ++i) {
    off[i] = static_cast<std::ptrdiff_t>(condensed_index(n, i, i + 1)) - static_cast<std::ptrdiff_t>(i + 1);
  }
  return off;
}

struct Evaluation {
  double raw = 0.0;
  Matrix grad;
};

// Row i accumulates over every j != i, so each row is owned by one chunk and
// the per-row partial sums do not depend on the schedule.
Evaluation evaluate(const Matrix& X, const DissimilarityMatrix& delta, bool want_grad, unsigned threads) {
  const std::size_t n = delta.size();
  const auto p = static_cast<std::size_t>(X.cols());
  const auto off = row_offsets(n);
  const double* values = delta.values().data();
  const double* weights = delta.has_weights() ? delta.weights()->data() : nullptr;
  const double* x = X.data();

  Evaluation out;
  if (want_grad) out.grad = Matrix::Zero(X.rows(), X.cols());
  std::vector<double> row_stress(n, 0.0);

  for_each_chunk(n, kRowChunk, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double* xi = x + i * p;
      double* gi = want_grad ? out.grad.data() + i * p : nullptr;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const std::ptrdiff_t k = i < j ? off[i] + static_cast<std::ptrdiff_t>(j) : off[j] + static_cast<std::ptrdiff_t>(i);
        const double w = weights ? weights[k] : 1.0;
        if (w == 0.0) continue;
        const double* xj = x + j * p;
        double d2 = 0.0;
        for (std::size_t c = 0; c < p; ++c) {
          const double diff = xi[c] - xj[c];
          d2 += diff * diff;
        }
        const double d = std::sqrt(d2);
        const double r = d - values[k];
        acc += w * r * r;
        if (gi && d > 0.0) {
          const double coef = 4.0 * w * r / d;
          for (std::size_t c = 0; c < p; ++c) gi[c] += coef * (xi[c] - xj[c]);
        }
      }
      row_stress[i] = acc;
    }
  });
  out.raw = pairwise_sum(row_stress);
  return out;
}

double max_weight_row_sum(const DissimilarityMatrix& delta) {
  const std::size_t n = delta.size();
  if (!delta.has_weights()) return static_cast<double>(n > 0 ? n - 1 : 0);
  std::vector<double> sums(n, 0.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      sums[i] += delta.weight(k);
      sums[j] += delta.weight(k);
    }
  }
  return n == 0 ? 0.0 : *std::max_element(sums.begin(), sums.end());
}

bool unit_weights(const DissimilarityMatrix& delta) {
  if (!delta.has_weights()) return true;
  const auto& w = *delta.weights();
  return std::all_of(w.begin(), w.end(), [](double v) { return v == 1.0; });
}

Matrix random_configuration(const DissimilarityMatrix& delta, std::size_t p, std::uint64_t seed) {
  double sum_sq = 0.0, count = 0.0;
  for (std::size_t k = 0; k < delta.values().size(); ++k) {
    if (delta.weight(k) > 0.0) {
      sum_sq += delta.values()[k] * delta.values()[k];
      count += 1.0;
    }
  }
  const double rms = count > 0.0 ? std::sqrt(sum_sq / count) : 1.0;
  // E|x_i - x_j|^2 = 2 p s^2 for i.i.d. N(0, s^2) coordinates.
  const double scale = rms / std::sqrt(2.0 * static_cast<double>(p));
  Rng rng(derive_seed(seed, tag_hash("embed_init")));
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix X(static_cast<Eigen::Index>(delta.size()), static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index c = 0; c < X.cols(); ++c) X(i, c) = scale * normal(rng);
  return X;
}

Matrix initial_configuration(const DissimilarityMatrix& delta, std::size_t p, const OptimizerOptions& opts,
                             std::string& label) {
  Matrix X;
  if (opts.initial) {
    X = *opts.initial;
    check_shape(X, delta);
    if (static_cast<std::size_t>(X.cols()) != p) throw InvalidArgument("initial configuration has wrong dimension");
    if (!X.allFinite()) throw InvalidArgument("initial configuration is not finite");
    label = "explicit";
  } else if (opts.init == InitMethod::classical) {
    X = classical_scaling(delta, p, opts.seed, opts.threads);
    label = "classical";
  } else {
    X = random_configuration(delta, p, opts.seed);
    label = "random";
  }
  normalize_configuration(X, false);
  return X;
}

EmbeddingProvenance make_provenance(Optimizer optimizer, const OptimizerOptions& opts, std::string init) {
  return {std::string(to_string(optimizer)), std::move(init), opts.max_iters, opts.tol, opts.seed};
}

void check_common(const DissimilarityMatrix& delta, std::size_t p, const OptimizerOptions& opts) {
  if (p < 1) throw InvalidArgument("embedding dimension must be at least 1");
  if (delta.size() < 2) throw InvalidArgument("need at least 2 points to embed");
  if (!(opts.tol >= 0.0)) throw InvalidArgument("tolerance must be non-negative");
}

void finish(Embedding& emb, const DissimilarityMatrix& delta, const OptimizerOptions& opts) {
  normalize_configuration(emb.X, opts.principal_axes);
  if (!emb.X.allFinite()) throw NumericalError("embedding contains non-finite coordinates");
  const std::size_t iterations = emb.stress.iterations;
  const bool converged = emb.stress.converged;
  emb.stress = stress_report(emb.X, delta, opts.threads);
  emb.stress.iterations = iterations;
  emb.stress.converged = converged;
}

}  // namespace

double raw_stress(const Matrix& X, const DissimilarityMatrix& delta, unsigned threads) {
  check_shape(X, delta);
  return evaluate(X, delta, false, threads).raw;
}

Matrix stress_gradient(const Matrix& X, const DissimilarityMatrix& delta, unsigned threads) {
  check_shape(X, delta);
  return evaluate(X, delta, true, threads).grad;
}

double stress_denominator(const DissimilarityMatrix& delta) {
  std::vector<double> terms(delta.values().size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    terms[k] = delta.weight(k) * delta.values()[k] * delta.values()[k];
  }
  return 2.0 * pairwise_sum(terms);
}

StressReport stress_report(const Matrix& X, const DissimilarityMatrix& delta, unsigned threads) {
  StressReport report;
  report.raw_stress = raw_stress(X, delta, threads);
  const double denom = stress_denominator(delta);
  report.normalized_stress = denom > 0.0 ? report.raw_stress / denom : 0.0;
  return report;
}

void normalize_configuration(Matrix& X, bool principal_axes) {
  if (X.rows() == 0) return;
  const Eigen::RowVectorXd mean = X.colwise().mean();
  X.rowwise() -= mean;
  if (!principal_axes || X.cols() < 2) return;
  const Eigen::MatrixXd scatter = (X.transpose() * X) / static_cast<double>(X.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
  if (eig.info() != Eigen::Success) throw NumericalError("principal axis rotation failed");
  // Eigen returns ascending eigenvalues; reverse for decreasing variance.
  Eigen::MatrixXd axes = eig.eigenvectors().rowwise().reverse();
  for (Eigen::Index c = 0; c < axes.cols(); ++c) {
    Eigen::Index arg = 0;
    axes.col(c).cwiseAbs().maxCoeff(&arg);
    if (axes(arg, c) < 0.0) axes.col(c) *= -1.0;
  }
  X = X * axes;
}

Matrix classical_scaling(const DissimilarityMatrix& delta, std::size_t p, std::uint64_t seed, unsigned threads) {
  const std::size_t n = delta.size();
  if (p < 1 || n < 2) throw InvalidArgument("classical scaling needs p >= 1 and n >= 2");
  const auto N = static_cast<Eigen::Index>(n);

  // Double-centred -1/2 D^2, stored densely. Row/column means of D^2.
  Eigen::MatrixXd B(N, N);
  for (std::size_t i = 0; i < n; ++i) {
    B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = delta(i, j);
      B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d * d;
      B(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d * d;
    }
  }
  const Eigen::VectorXd row_mean = B.rowwise().mean();
  const double grand = row_mean.mean();
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) B(i, j) = -0.5 * (B(i, j) - row_mean(i) - row_mean(j) + grand);

  // Shift by a Gershgorin bound so the spectrum is non-negative and the top-p
  // eigenvectors of B dominate the power iteration.
  const double shift = B.cwiseAbs().rowwise().sum().maxCoeff();
  const auto k = static_cast<Eigen::Index>(std::min<std::size_t>(n, p + 6));
  Rng rng(derive_seed(seed, tag_hash("classical_scaling")));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd Q(N, k);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index c = 0; c < k; ++c) Q(i, c) = normal(rng);

  for (int iter = 0; iter < 200; ++iter) {
    Eigen::MatrixXd Y(N, k);
    for_each_chunk(static_cast<std::size_t>(N), 64, threads, [&](std::size_t, std::size_t b, std::size_t e) {
      const auto rows = static_cast<Eigen::Index>(e - b);
      Y.middleRows(static_cast<Eigen::Index>(b), rows).noalias() = B.middleRows(static_cast<Eigen::Index>(b), rows) * Q;
    });
    Y += shift * Q;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, k);
  }
  const Eigen::MatrixXd T = Q.transpose() * B * Q;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
  if (eig.info() != Eigen::Success) throw NumericalError("classical scaling eigensolver failed");

  Matrix X(N, static_cast<Eigen::Index>(p));
  X.setZero();
  for (std::size_t c = 0; c < p && static_cast<Eigen::Index>(c) < k; ++c) {
    const Eigen::Index idx = k - 1 - static_cast<Eigen::Index>(c);
    const double lambda = std::max(0.0, eig.eigenvalues()(idx));
    X.col(static_cast<Eigen::Index>(c)) = Q * eig.eigenvectors().col(idx) * std::sqrt(lambda);
  }
  return X;
}

Embedding lsmds_gradient_descent(const DissimilarityMatrix& delta, std::size_t p, const OptimizerOptions& opts) {
  check_common(delta, p, opts);
  std::string init_label;
  Embedding emb;
  emb.X = initial_configuration(delta, p, opts, init_label);
  emb.provenance = make_provenance(Optimizer::gradient_descent, opts, init_label);

  Evaluation current = evaluate(emb.X, delta, true, opts.threads);
  if (!std::isfinite(current.raw)) throw NumericalError("initial stress is not finite");

  const double row_sum = max_weight_row_sum(delta);
  if (row_sum == 0.0) {
    emb.stress.converged = true;
    finish(emb, delta, opts);
    return emb;
  }
  // 1 / (4 lambda_max(V)); the Guttman step for unit weights.
  const double eta0 = unit_weights(delta) ? 1.0 / (4.0 * static_cast<double>(delta.size())) : 1.0 / (8.0 * row_sum);
  double eta = eta0;

  std::size_t iter = 0;
  bool converged = current.raw == 0.0;
  while (!converged && iter < opts.max_iters) {
    ++iter;
    Matrix trial = emb.X - eta * current.grad;
    Evaluation next = evaluate(trial, delta, true, opts.threads);
    if (!std::isfinite(next.raw)) {
      throw NumericalError("gradient descent diverged: non-finite stress at iteration " + std::to_string(iter));
    }
    if (next.raw < current.raw) {
      const double rel = (current.raw - next.raw) / current.raw;
      emb.X = std::move(trial);
      current = std::move(next);
      eta *= 1.05;
      if (rel < opts.tol || current.raw == 0.0) converged = true;
    } else {
      eta *= 0.5;
      if (eta < eta0 * 1e-12) converged = true;  // no descent left at machine precision
    }
    if (opts.record_history) emb.stress_history.push_back(current.raw);
  }
  emb.stress.iterations = iter;
  emb.stress.converged = converged;
  finish(emb, delta, opts);
  return emb;
}

namespace {

bool weight_graph_connected(const DissimilarityMatrix& delta) {
  const std::size_t n = delta.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::size_t components = n;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      if (delta.weight(k) <= 0.0) continue;
      const std::size_t a = find(i), b = find(j);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
  }
  return components == 1;
}

// (B(X) X)_i = sum_j w_ij delta_ij / d_ij (x_i - x_j), zero terms where d_ij = 0.
Matrix guttman_product(const Matrix& X, const DissimilarityMatrix& delta, unsigned threads) {
  const std::size_t n = delta.size();
  const auto p = static_cast<std::size_t>(X.cols());
  const auto off = row_offsets(n);
  const double* values = delta.values().data();
  const double* x = X.data();
  Matrix out = Matrix::Zero(X.rows(), X.cols());
  for_each_chunk(n, kRowChunk, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double* xi = x + i * p;
      double* oi = out.data() + i * p;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const std::ptrdiff_t k = i < j ? off[i] + static_cast<std::ptrdiff_t>(j) : off[j] + static_cast<std::ptrdiff_t>(i);
        const double w = delta.weight(static_cast<std::size_t>(k));
        if (w == 0.0) continue;
        const double* xj = x + j * p;
        double d2 = 0.0;
        for (std::size_t c = 0; c < p; ++c) {
          const double diff = xi[c] - xj[c];
          d2 += diff * diff;
        }
        if (d2 == 0.0) continue;
        const double coef = w * values[k] / std::sqrt(d2);
        for (std::size_t c = 0; c < p; ++c) oi[c] += coef * (xi[c] - xj[c]);
      }
    }
  });
  return out;
}

}  // namespace

Embedding lsmds_smacof(const DissimilarityMatrix& delta, std::size_t p, const OptimizerOptions& opts) {
  check_common(delta, p, opts);
  if (!weight_graph_connected(delta)) throw InvalidArgument("SMACOF requires a connected weight graph");
  std::string init_label;
  Embedding emb;
  emb.X = initial_configuration(delta, p, opts, init_label);
  emb.provenance = make_provenance(Optimizer::smacof, opts, init_label);

  const std::size_t n = delta.size();
  const auto N = static_cast<Eigen::Index>(n);
  const bool unit = unit_weights(delta);
  Eigen::MatrixXd v_pinv;
  if (!unit) {
    // V^+ = (V + 11')^{-1} - 11'/n^2
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(N, N);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j, ++k) {
        const double w = delta.weight(k);
        const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
        V(a, b) -= w;
        V(b, a) -= w;
        V(a, a) += w;
        V(b, b) += w;
      }
    }
    V.array() += 1.0;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(V);
    if (ldlt.info() != Eigen::Success) throw NumericalError("SMACOF: cannot factor the weight Laplacian");
    v_pinv = ldlt.solve(Eigen::MatrixXd::Identity(N, N));
    v_pinv.array() -= 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  }

  double stress = raw_stress(emb.X, delta, opts.threads);
  if (!std::isfinite(stress)) throw NumericalError("initial stress is not finite");
  std::size_t iter = 0;
  bool converged = stress == 0.0;
  while (!converged && iter < opts.max_iters) {
    ++iter;
    Matrix bx = guttman_product(emb.X, delta, opts.threads);
    if (unit) {
      emb.X = bx / static_cast<double>(n);
    } else {
      emb.X = v_pinv * bx;
    }
    const double next = raw_stress(emb.X, delta, opts.threads);
    if (!std::isfinite(next)) throw NumericalError("SMACOF produced non-finite stress");
    if (opts.record_history) emb.stress_history.push_back(next);
    const double rel = stress > 0.0 ? (stress - next) / stress : 0.0;
    stress = next;
    if (rel < opts.tol || stress == 0.0) converged = true;
  }
  emb.stress.iterations = iter;
  emb.stress.converged = converged;
  finish(emb, delta, opts);
  return emb;
}

Embedding embed(const DissimilarityMatrix& delta, std::size_t p, Optimizer optimizer, const OptimizerOptions& opts) {
  return optimizer == Optimizer::gradient_descent ? lsmds_gradient_descent(delta, p, opts)
                                                  : lsmds_smacof(delta, p, opts);
}

std::vector<SweepEntry> stress_dimension_sweep(const DissimilarityMatrix& delta, const std::vector<std::size_t>& dims,
                                               const OptimizerOptions& opts, Optimizer optimizer,
                                               std::vector<Embedding>* embeddings) {
  if (dims.empty()) throw InvalidArgument("dimension list is empty");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 1) throw InvalidArgument("dimensions must be >= 1");
    if (i > 0 && dims[i] <= dims[i - 1]) throw InvalidArgument("dimensions must be strictly ascending");
  }

  std::vector<SweepEntry> out;
  std::optional<Matrix> previous;
  for (std::size_t p : dims) {
    OptimizerOptions step = opts;
    if (previous) {
      const auto old_p = previous->cols();
      Matrix start = Matrix::Zero(previous->rows(), static_cast<Eigen::Index>(p));
      start.leftCols(old_p) = *previous;
      const double rms = std::sqrt(previous->squaredNorm() / static_cast<double>(previous->size()));
      Rng rng(derive_seed(opts.seed, tag_hash("sweep_jitter") + p));
      // Large enough to leave the saddle at zero; tiny jitter reads as converged.
      std::normal_distribution<double> normal(0.0, 0.1 * (rms > 0.0 ? rms : 1.0));
      for (Eigen::Index i = 0; i < start.rows(); ++i)
        for (Eigen::Index c = old_p; c < start.cols(); ++c) start(i, c) = normal(rng);
      step.initial = std::move(start);
    }
    Embedding emb = embed(delta, p, optimizer, step);
    if (previous && emb.stress.raw_stress > out.back().stress.raw_stress) {
      // Zero-padding the previous solution attains its stress exactly.
      const auto old_p = previous->cols();
      emb.X = Matrix::Zero(previous->rows(), static_cast<Eigen::Index>(p));
      emb.X.leftCols(old_p) = *previous;
      const auto iterations = emb.stress.iterations;
      emb.stress = out.back().stress;
      emb.stress.iterations = iterations;
    }
    out.push_back({p, emb.stress});
    previous = emb.X;
    if (embeddings) embeddings->push_back(std::move(emb));
  }
  return out;
}

void write_embedding_csv(const Embedding& emb, const std::vector<std::string>& names,
                         const std::filesystem::path& path) {
  if (names.size() != emb.n()) throw InvalidArgument("name count does not match embedding rows");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "name";
  for (std::size_t c = 1; c <= emb.p(); ++c) out << ",v" << c;
  out << '\n';
  for (std::size_t i = 0; i < emb.n(); ++i) {
    out << names[i];
    for (std::size_t c = 0; c < emb.p(); ++c) out << ',' << emb.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    out << '\n';
  }
  if (!out) throw IoError("error writing " + path.string());
}

Matrix read_embedding_csv(const std::filesystem::path& path, std::vector<std::string>* names) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty embedding file " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (cols < 1 || !line.starts_with("name,")) throw InvalidArgument("embedding header must be name,v1,...,vp");

  std::vector<double> data;
  std::vector<std::string> row_names;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::getline(fields, cell, ',');
    row_names.push_back(cell);
    std::size_t got = 0;
    while (std::getline(fields, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0) throw InvalidArgument("bad coordinate on line " + std::to_string(line_no));
      data.push_back(v);
      ++got;
    }
    if (got != cols) throw InvalidArgument("wrong column count on line " + std::to_string(line_no));
  }
  Matrix X(static_cast<Eigen::Index>(row_names.size()), static_cast<Eigen::Index>(cols));
  std::copy(data.begin(), data.end(), X.data());
  if (names) *names = std::move(row_names);
  return X;
}

void write_sweep_csv(const std::vector<SweepEntry>& sweep, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "p,raw_stress,normalized_stress,iterations,converged\n";
  for (const auto& e : sweep) {
    out << e.p << ',' << e.stress.raw_stress << ',' << e.stress.normalized_stress << ',' << e.stress.iterations << ','
        << (e.stress.converged ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("error writing " + path.string());
}

}  // namespace namesim
