#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "cocopnp/dataset.hpp"
#include "cocopnp/errors.hpp"
#include "cocopnp/linear_denoiser.hpp"
#include "cocopnp/small_net_denoiser.hpp"
#include "cocopnp/spectral.hpp"

namespace cocopnp {

enum class PenaltyGradient { finite_difference, spsa };

struct TrainingConfig {
  double alpha1 = 1.0;
  double alpha2 = 0.01;
  double epsilon = 0.1;
  double gamma = 0.25;
  double sigma_min = 0.0;
  double sigma_max = 50.0 / 255.0;
  int power_iters = kTrainingPowerIterations;
  int batch_size = 8;
  int steps = 500;
  /// Defaults to 1e-3 for the linear family and 1e-4 for the small net.
  std::optional<double> learning_rate;
  std::uint64_t seed = 0;
  Shape patch{4, 4, 1};
  Eigen::Index hidden = 16;
  /// Directory of PNGs; the synthetic generator is used when absent.
  std::optional<std::filesystem::path> dataset_dir;
  PenaltyGradient penalty_gradient = PenaltyGradient::finite_difference;
  double fd_step = 1e-5;
  /// Scale of the random perturbation added to the identity at start.
  double init_scale = 0.1;
  /// Consecutive loss increases treated as divergence.
  int divergence_window = 50;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
  PatchDataset make_dataset() const;
};

/// One training example: clean patch x, noise level, and the drawn noise.
struct TrainingSample {
  Image clean;
  double sigma = 0.0;
  Image noise;

  Image noisy() const { return clean + noise; }
};

/// sigma ~ U[sigma_min, sigma_max], noise ~ N(0, sigma^2) per pixel.
std::vector<TrainingSample> draw_batch(const PatchDataset& data,
                                       const TrainingConfig& cfg, int count,
                                       Xoshiro256& rng);

struct LossBreakdown {
  /// Mean absolute error per pixel, averaged over the batch.
  double data_l1 = 0.0;
  /// Batch mean of ||J - J^T||.
  double hamiltonian = 0.0;
  /// Batch mean of max{||2 gamma J - I||, 1 - epsilon}.
  double spectral = 0.0;
  double total = 0.0;
};

/// Evaluates the three loss terms at the noisy points of `batch`, with
/// cfg.power_iters power iterations seeded from `seed`.
LossBreakdown loss_terms(const Denoiser& d,
                         const std::vector<TrainingSample>& batch,
                         const TrainingConfig& cfg, std::uint64_t seed);

struct LossRecord {
  int step = 0;
  LossBreakdown loss;
};

void write_loss_csv(std::ostream& out, const std::vector<LossRecord>& log);

/// Loss rose for cfg.divergence_window consecutive steps or became
/// non-finite.
class TrainingDivergence : public NumericalError {
 public:
  TrainingDivergence(const std::string& what, std::vector<LossRecord> log)
      : NumericalError(what), log_(std::move(log)) {}
  const std::vector<LossRecord>& log() const { return log_; }

 private:
  std::vector<LossRecord> log_;
};

/// Watches the total loss after each step and throws TrainingDivergence.
class DivergenceMonitor {
 public:
  explicit DivergenceMonitor(int window) : window_(window) {}
  /// Inspects log.back(); the whole log travels with the exception.
  void observe(const std::vector<LossRecord>& log);

 private:
  int window_;
  int rises_ = 0;
  double previous_ = std::numeric_limits<double>::infinity();
};

/// Gradient of alpha1 ||W - W^T|| + alpha2 max{||2 gamma W - I||, 1 - eps}
/// from the top singular pairs (zero hinge contribution below 1 - eps).
Eigen::MatrixXd linear_penalty_gradient(const Eigen::MatrixXd& w,
                                        const TrainingConfig& cfg);
/// The penalty itself, with exact singular values.
double linear_penalty_value(const Eigen::MatrixXd& w,
                            const TrainingConfig& cfg);

/// Proximal step of c ||A|| (spectral norm) at A: A minus its projection onto
/// the nuclear-norm ball of radius c.
Eigen::MatrixXd spectral_norm_prox(const Eigen::MatrixXd& a, double c);

struct CertificationRow {
  int point_id = 0;
  double sigma = 0.0;
  SpectralReport report;
};

/// Slack on the cocoercivity bound so that maps with norm exactly 1 (the
/// DCT reflection 2J - I) are not failed by rounding.
inline constexpr double kCocoPassTolerance = 1e-9;

struct CertificationSummary {
  std::vector<CertificationRow> rows;
  double mean_symmetry = 0.0;
  double max_coco = 0.0;
  /// Fraction of points with norm_coco <= 1 + kCocoPassTolerance.
  double coco_pass_fraction = 0.0;
};

/// Both spectral norms at each point, with per-point seeds derived from
/// `seed`. Power iteration stops early at kCertificationEarlyStop.
CertificationSummary certify_denoiser(
    const Denoiser& d, const std::vector<TrainingSample>& points, double gamma,
    int iterations, std::uint64_t seed);

void write_certification_csv(std::ostream& out, const CertificationSummary& s);

template <typename D>
struct TrainingResult {
  D denoiser;
  std::vector<LossRecord> log;
  CertificationSummary certification;
};

/// Trains D(x) = W x + b from W = I + init_scale G / sqrt(n), b = 0.
/// Data and spectral terms take subgradient steps; the Hamiltonian term is
/// applied as an exact proximal step on the antisymmetric part of W.
TrainingResult<LinearDenoiser> train_linear(const TrainingConfig& cfg);

/// Trains a SmallNetDenoiser of width cfg.hidden. The data term uses the
/// exact reverse-mode gradient; penalty gradients differentiate the
/// bilinear forms p^T J(theta) q at frozen singular vectors by central
/// differences (or SPSA).
TrainingResult<SmallNetDenoiser> train_small_net(const TrainingConfig& cfg);

/// Gradient over theta of the batch-mean penalty alpha1 ||J - J^T|| +
/// alpha2 max{||2 gamma J - I||, 1 - eps} at fixed points, computed with
/// the method selected in cfg.
Eigen::VectorXd small_net_penalty_gradient(
    const SmallNetDenoiser& d, const std::vector<TrainingSample>& batch,
    const TrainingConfig& cfg, std::uint64_t seed);

}  // namespace cocopnp
