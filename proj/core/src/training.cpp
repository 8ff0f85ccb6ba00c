#include "cocopnp/training.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>

#include <Eigen/SVD>

namespace cocopnp {

void TrainingConfig::validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(alpha1 >= 0.0 && std::isfinite(alpha1), "alpha1 must be nonnegative");
  require(alpha2 >= 0.0 && std::isfinite(alpha2), "alpha2 must be nonnegative");
  require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0,1)");
  require(gamma > 0.0 && std::isfinite(gamma), "gamma must be positive");
  require(sigma_min >= 0.0 && sigma_max >= sigma_min && std::isfinite(sigma_max),
          "sigma range must be nonnegative and ordered");
  require(power_iters >= 1, "power_iters must be at least 1");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(steps >= 0, "steps must be nonnegative");
  require(!learning_rate || *learning_rate > 0.0, "learning_rate must be positive");
  require(patch.height > 0 && patch.width > 0, "patch dimensions must be positive");
  require(patch.channels == 1 || patch.channels == 3, "patch channels must be 1 or 3");
  require(hidden >= 1, "hidden must be at least 1");
  require(fd_step > 0.0, "fd_step must be positive");
  require(init_scale >= 0.0, "init_scale must be nonnegative");
  require(divergence_window >= 1, "divergence_window must be at least 1");
}

PatchDataset TrainingConfig::make_dataset() const {
  if (dataset_dir) return PatchDataset::from_directory(*dataset_dir, patch);
  return PatchDataset::synthetic(patch);
}

std::vector<TrainingSample> draw_batch(const PatchDataset& data,
                                       const TrainingConfig& cfg, int count,
                                       Xoshiro256& rng) {
  std::vector<TrainingSample> batch;
  batch.reserve(count);
  std::normal_distribution<double> normal;
  for (int i = 0; i < count; ++i) {
    TrainingSample s;
    s.clean = data.sample(rng);
    s.sigma = cfg.sigma_min + (cfg.sigma_max - cfg.sigma_min) * rng.uniform();
    s.noise = Image::zeros_like(s.clean);
    for (Eigen::Index k = 0; k < s.noise.size(); ++k) {
      s.noise.values()[k] = s.sigma * normal(rng);
    }
    batch.push_back(std::move(s));
  }
  return batch;
}

namespace {

double mean_abs(const Image& a) {
  return a.size() == 0 ? 0.0 : a.values().cwiseAbs().mean();
}

Eigen::VectorXd sign(const Eigen::VectorXd& v) {
  return v.unaryExpr([](double x) { return double((x > 0.0) - (x < 0.0)); });
}

void finish(LossBreakdown& l, const TrainingConfig& cfg) {
  l.total = l.data_l1 + cfg.alpha1 * l.hamiltonian + cfg.alpha2 * l.spectral;
}

}  // namespace

LossBreakdown loss_terms(const Denoiser& d,
                         const std::vector<TrainingSample>& batch,
                         const TrainingConfig& cfg, std::uint64_t seed) {
  if (batch.empty()) throw DomainError("loss_terms needs a nonempty batch");
  LossBreakdown l;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const TrainingSample& s = batch[i];
    const Image y = s.noisy();
    l.data_l1 += mean_abs(d.apply(y, s.sigma) - s.clean);
    l.hamiltonian += symmetry_error(d, y, s.sigma, cfg.power_iters,
                                    derive_seed(seed, 2 * i))
                         .norm_symmetry;
    l.spectral += std::max(cocoercivity_norm(d, y, s.sigma, cfg.gamma,
                                             cfg.power_iters,
                                             derive_seed(seed, 2 * i + 1))
                               .norm_coco,
                           1.0 - cfg.epsilon);
  }
  const double n = static_cast<double>(batch.size());
  l.data_l1 /= n;
  l.hamiltonian /= n;
  l.spectral /= n;
  finish(l, cfg);
  return l;
}

void write_loss_csv(std::ostream& out, const std::vector<LossRecord>& log) {
  const auto old_precision = out.precision(12);
  out << "step,data_l1,hamiltonian,spectral,total\n";
  for (const LossRecord& r : log) {
    out << r.step << ',' << r.loss.data_l1 << ',' << r.loss.hamiltonian << ','
        << r.loss.spectral << ',' << r.loss.total << '\n';
  }
  out.precision(old_precision);
}

namespace {

struct TopPair {
  double value;
  Eigen::VectorXd left;
  Eigen::VectorXd right;
};

TopPair top_singular_pair(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU |
                                               Eigen::ComputeFullV);
  return {svd.singularValues()[0], svd.matrixU().col(0), svd.matrixV().col(0)};
}

Eigen::MatrixXd coco_matrix(const Eigen::MatrixXd& w, double gamma) {
  return 2.0 * gamma * w -
         Eigen::MatrixXd::Identity(w.rows(), w.cols());
}

}  // namespace

Eigen::MatrixXd linear_penalty_gradient(const Eigen::MatrixXd& w,
                                        const TrainingConfig& cfg) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(w.rows(), w.cols());
  if (cfg.alpha1 > 0.0) {
    const TopPair sym = top_singular_pair(w - w.transpose());
    if (sym.value > 0.0) {
      grad += cfg.alpha1 * (sym.left * sym.right.transpose() -
                            sym.right * sym.left.transpose());
    }
  }
  if (cfg.alpha2 > 0.0) {
    const TopPair coco = top_singular_pair(coco_matrix(w, cfg.gamma));
    if (coco.value > 1.0 - cfg.epsilon) {
      grad += cfg.alpha2 * 2.0 * cfg.gamma * coco.left * coco.right.transpose();
    }
  }
  return grad;
}

double linear_penalty_value(const Eigen::MatrixXd& w,
                            const TrainingConfig& cfg) {
  const double sym = top_singular_pair(w - w.transpose()).value;
  const double coco = top_singular_pair(coco_matrix(w, cfg.gamma)).value;
  return cfg.alpha1 * sym + cfg.alpha2 * std::max(coco, 1.0 - cfg.epsilon);
}

Eigen::MatrixXd spectral_norm_prox(const Eigen::MatrixXd& a, double c) {
  if (!(c >= 0.0)) throw DomainError("prox weight must be nonnegative");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU |
                                               Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  if (s.sum() <= c) return Eigen::MatrixXd::Zero(a.rows(), a.cols());
  // Singular values become min(s_i, theta) with sum (s_i - theta)_+ = c.
  double lo = 0.0;
  double hi = s[0];
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, s[0]); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double excess = (s.array() - mid).max(0.0).sum();
    if (excess > c) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double theta = 0.5 * (lo + hi);
  const Eigen::VectorXd clipped = s.array().min(theta);
  return svd.matrixU() * clipped.asDiagonal() * svd.matrixV().transpose();
}

CertificationSummary certify_denoiser(
    const Denoiser& d, const std::vector<TrainingSample>& points, double gamma,
    int iterations, std::uint64_t seed) {
  CertificationSummary summary;
  double symmetry_sum = 0.0;
  int passed = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const TrainingSample& s = points[i];
    const Image y = s.noisy();
    SpectralReport coco =
        cocoercivity_norm(d, y, s.sigma, gamma, iterations,
                          derive_seed(seed, 2 * i), kCertificationEarlyStop);
    const SpectralReport sym =
        symmetry_error(d, y, s.sigma, iterations, derive_seed(seed, 2 * i + 1),
                       kCertificationEarlyStop);
    coco.norm_symmetry = sym.norm_symmetry;
    coco.iterations_used = std::max(coco.iterations_used, sym.iterations_used);
    coco.last_rayleigh_delta =
        std::max(coco.last_rayleigh_delta, sym.last_rayleigh_delta);

    symmetry_sum += coco.norm_symmetry;
    summary.max_coco = std::max(summary.max_coco, coco.norm_coco);
    if (coco.norm_coco <= 1.0 + kCocoPassTolerance) ++passed;
    summary.rows.push_back({static_cast<int>(i), s.sigma, std::move(coco)});
  }
  if (!points.empty()) {
    summary.mean_symmetry = symmetry_sum / points.size();
    summary.coco_pass_fraction = static_cast<double>(passed) / points.size();
  }
  return summary;
}

void write_certification_csv(std::ostream& out, const CertificationSummary& s) {
  const auto old_precision = out.precision(12);
  out << "point_id,sigma,gamma,norm_coco,norm_symmetry,iterations_used\n";
  for (const CertificationRow& r : s.rows) {
    out << r.point_id << ',' << r.sigma << ',' << r.report.gamma << ','
        << r.report.norm_coco << ',' << r.report.norm_symmetry << ','
        << r.report.iterations_used << '\n';
  }
  out.precision(old_precision);
}

namespace {

constexpr int kCertificationPoints = 16;

// Tracks consecutive loss increases and non-finite losses.
std::vector<TrainingSample> certification_points(const PatchDataset& data,
                                                 const TrainingConfig& cfg) {
  Xoshiro256 rng(derive_seed(cfg.seed, 0xCE27));
  return draw_batch(data, cfg, kCertificationPoints, rng);
}

}  // namespace

void DivergenceMonitor::observe(const std::vector<LossRecord>& log) {
  const double total = log.back().loss.total;
  if (!std::isfinite(total)) {
    throw TrainingDivergence("training loss became non-finite at step " +
                                 std::to_string(log.back().step),
                             log);
  }
  rises_ = total > previous_ ? rises_ + 1 : 0;
  previous_ = total;
  if (rises_ >= window_) {
    throw TrainingDivergence("training loss increased for " +
                                 std::to_string(window_) + " consecutive steps",
                             log);
  }
}

TrainingResult<LinearDenoiser> train_linear(const TrainingConfig& cfg) {
  cfg.validate();
  const PatchDataset data = cfg.make_dataset();
  const double lr = cfg.learning_rate.value_or(1e-3);
  const Eigen::Index n = cfg.patch.size();

  Xoshiro256 init_rng(derive_seed(cfg.seed, 1));
  std::normal_distribution<double> normal;
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      w(i, j) += cfg.init_scale * normal(init_rng) / std::sqrt(double(n));
    }
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);

  Xoshiro256 rng(derive_seed(cfg.seed, 2));
  std::vector<LossRecord> log;
  DivergenceMonitor monitor(cfg.divergence_window);
  for (int step = 0; step < cfg.steps; ++step) {
    const std::vector<TrainingSample> batch =
        draw_batch(data, cfg, cfg.batch_size, rng);

    LossBreakdown loss;
    Eigen::MatrixXd grad_w = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd grad_b = Eigen::VectorXd::Zero(n);
    const double scale = 1.0 / (double(batch.size()) * double(n));
    for (const TrainingSample& s : batch) {
      const Eigen::VectorXd y = s.noisy().values();
      const Eigen::VectorXd r = w * y + b - s.clean.values();
      loss.data_l1 += r.cwiseAbs().sum() * scale;
      const Eigen::VectorXd g = sign(r) * scale;
      grad_w += g * y.transpose();
      grad_b += g;
    }
    loss.hamiltonian = top_singular_pair(w - w.transpose()).value;
    loss.spectral = std::max(top_singular_pair(coco_matrix(w, cfg.gamma)).value,
                             1.0 - cfg.epsilon);
    finish(loss, cfg);
    log.push_back({step, loss});
    monitor.observe(log);

    TrainingConfig spectral_only = cfg;
    spectral_only.alpha1 = 0.0;
    w -= lr * (grad_w + linear_penalty_gradient(w, spectral_only));
    b -= lr * grad_b;
    if (cfg.alpha1 > 0.0) {
      // alpha1 ||W - W^T|| = 2 alpha1 ||A|| with A the antisymmetric part.
      const Eigen::MatrixXd a = 0.5 * (w - w.transpose());
      const Eigen::MatrixXd s = 0.5 * (w + w.transpose());
      Eigen::MatrixXd a_next = spectral_norm_prox(a, 2.0 * lr * cfg.alpha1);
      a_next = 0.5 * (a_next - a_next.transpose());
      w = s + a_next;
    }
  }

  LinearDenoiser trained(w, b, cfg.gamma, cfg.patch);
  CertificationSummary cert =
      certify_denoiser(trained, certification_points(data, cfg), cfg.gamma,
                       kCertificationPowerIterations, derive_seed(cfg.seed, 3));
  return {std::move(trained), std::move(log), std::move(cert)};
}

namespace {

struct FrozenPenalty {
  struct Term {
    Eigen::VectorXd y;
    double sigma;
    Eigen::VectorXd p, q;
    double weight;
  };
  std::vector<Term> terms;
  double hamiltonian = 0.0;
  double spectral = 0.0;

  // Sum of weight * p^T J(theta) q, the penalty's theta-dependent part with
  // the singular vectors held fixed.
  double value(const SmallNetDenoiser& d, const Eigen::VectorXd& theta) const {
    double v = 0.0;
    for (const Term& t : terms) {
      v += t.weight * d.bilinear_jacobian(theta, t.y, t.sigma, t.p, t.q);
    }
    return v;
  }
};

FrozenPenalty freeze_penalty(const SmallNetDenoiser& d,
                             const std::vector<TrainingSample>& batch,
                             const TrainingConfig& cfg, std::uint64_t seed) {
  FrozenPenalty fp;
  const double inv_b = 1.0 / double(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const TrainingSample& s = batch[i];
    const Image y = s.noisy();
    const PowerIterationResult sym =
        power_iteration(symmetry_map(d, y, s.sigma), cfg.power_iters,
                        derive_seed(seed, 2 * i));
    fp.hamiltonian += sym.value * inv_b;
    if (cfg.alpha1 > 0.0 && sym.value > 0.0) {
      // ||J - J^T|| = p^T J q - q^T J p.
      const double w = cfg.alpha1 * inv_b;
      fp.terms.push_back({y.values(), s.sigma, sym.left_vector, sym.vector, w});
      fp.terms.push_back({y.values(), s.sigma, sym.vector, sym.left_vector, -w});
    }
    const PowerIterationResult coco =
        power_iteration(cocoercivity_map(d, y, s.sigma, cfg.gamma),
                        cfg.power_iters, derive_seed(seed, 2 * i + 1));
    fp.spectral += std::max(coco.value, 1.0 - cfg.epsilon) * inv_b;
    if (cfg.alpha2 > 0.0 && coco.value > 1.0 - cfg.epsilon) {
      // ||2 gamma J - I|| = 2 gamma p^T J q - p^T q.
      fp.terms.push_back({y.values(), s.sigma, coco.left_vector, coco.vector,
                          cfg.alpha2 * 2.0 * cfg.gamma * inv_b});
    }
  }
  return fp;
}

Eigen::VectorXd frozen_gradient(const SmallNetDenoiser& d,
                                const FrozenPenalty& fp,
                                const TrainingConfig& cfg, std::uint64_t seed) {
  const Eigen::VectorXd& theta = d.parameters();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
  if (fp.terms.empty()) return grad;
  const double h = cfg.fd_step;
  if (cfg.penalty_gradient == PenaltyGradient::finite_difference) {
    Eigen::VectorXd probe = theta;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      probe[k] = theta[k] + h;
      const double up = fp.value(d, probe);
      probe[k] = theta[k] - h;
      const double down = fp.value(d, probe);
      probe[k] = theta[k];
      grad[k] = (up - down) / (2.0 * h);
    }
  } else {
    Xoshiro256 rng(seed);
    Eigen::VectorXd delta(theta.size());
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      delta[k] = (rng() & 1u) ? 1.0 : -1.0;
    }
    const double up = fp.value(d, theta + h * delta);
    const double down = fp.value(d, theta - h * delta);
    grad = ((up - down) / (2.0 * h)) * delta;
  }
  return grad;
}

}  // namespace

Eigen::VectorXd small_net_penalty_gradient(
    const SmallNetDenoiser& d, const std::vector<TrainingSample>& batch,
    const TrainingConfig& cfg, std::uint64_t seed) {
  if (batch.empty()) throw DomainError("penalty gradient needs a nonempty batch");
  const FrozenPenalty fp = freeze_penalty(d, batch, cfg, seed);
  return frozen_gradient(d, fp, cfg, derive_seed(seed, 0x5B5A));
}

TrainingResult<SmallNetDenoiser> train_small_net(const TrainingConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = cfg.patch.size();
  if (SmallNetDenoiser::parameter_count(n, cfg.hidden) >
      SmallNetDenoiser::kMaxParameters) {
    throw ConfigError("small net would have " +
                      std::to_string(SmallNetDenoiser::parameter_count(n, cfg.hidden)) +
                      " parameters; the limit is " +
                      std::to_string(SmallNetDenoiser::kMaxParameters));
  }
  const PatchDataset data = cfg.make_dataset();
  const double lr = cfg.learning_rate.value_or(1e-4);

  SmallNetDenoiser net =
      SmallNetDenoiser::make_random(cfg.patch, cfg.hidden, derive_seed(cfg.seed, 1))
          .with_claimed_gamma(cfg.gamma);

  Xoshiro256 rng(derive_seed(cfg.seed, 2));
  std::vector<LossRecord> log;
  DivergenceMonitor monitor(cfg.divergence_window);
  for (int step = 0; step < cfg.steps; ++step) {
    const std::vector<TrainingSample> batch =
        draw_batch(data, cfg, cfg.batch_size, rng);
    const std::uint64_t step_seed = derive_seed(cfg.seed, 1000 + step);

    LossBreakdown loss;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.parameters().size());
    const double scale = 1.0 / (double(batch.size()) * double(n));
    for (const TrainingSample& s : batch) {
      const Eigen::VectorXd y = s.noisy().values();
      const Eigen::VectorXd r =
          net.apply(s.noisy(), s.sigma).values() - s.clean.values();
      loss.data_l1 += r.cwiseAbs().sum() * scale;
      grad += net.parameter_gradient(y, s.sigma, sign(r) * scale);
    }
    const FrozenPenalty fp = freeze_penalty(net, batch, cfg, step_seed);
    loss.hamiltonian = fp.hamiltonian;
    loss.spectral = fp.spectral;
    finish(loss, cfg);
    log.push_back({step, loss});
    monitor.observe(log);

    grad += frozen_gradient(net, fp, cfg, derive_seed(step_seed, 0x5B5A));
    net = net.with_parameters(net.parameters() - lr * grad);
  }

  CertificationSummary cert =
      certify_denoiser(net, certification_points(data, cfg), cfg.gamma,
                       kCertificationPowerIterations, derive_seed(cfg.seed, 3));
  return {std::move(net), std::move(log), std::move(cert)};
}

}  // namespace cocopnp
