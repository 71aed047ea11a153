#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

#include "vibrom/frfarc.hpp"
#include "vibrom/net.hpp"
#include "vibrom/rsvd.hpp"

namespace vibrom {

// POD-DL-ROM surrogate: randomized-SVD compression, dense autoencoder and
// feedforward reduced-dynamics network over (phase, beta, s), trained
// jointly; inference never evaluates the encoder.

struct SnapshotSet {
  Eigen::MatrixXd matrix;  // N_h x N_s displacement snapshots
  Eigen::MatrixXd params;  // N_s x 3: (t_hat in [0,1), beta, s)
  int samples_per_period = 0;
  std::vector<std::string> provenance;  // one entry per source curve
};

// Per-feature affine maps; applied column-wise to batches.
struct FeatureScaling {
  Eigen::VectorXd input_shift, input_scale;    // x -> (x - shift) / scale
  Eigen::VectorXd output_shift, output_scale;  // POD coordinates, standardized
};

struct TrainingConfig {
  int latent_dim = 2;
  std::vector<int> encoder_hidden = {64, 32};
  std::vector<int> dfnn_hidden = {32, 32};
  std::string activation = "tanh";
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 200;
  double weight_rec = 0.5;
  double weight_lat = 0.5;
  double validation_fraction = 0.1;
  std::uint64_t seed = 1;
};

struct DlRomModel {
  PodBasis pod;
  Mlp encoder, decoder, dfnn;
  FeatureScaling scaling;
  int latent_dim = 0;
  TrainingConfig config;
  // training-range hull per input feature, for extrapolation flagging
  Eigen::VectorXd input_lo, input_hi;
};

struct TrainingLogEntry {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainingResult {
  DlRomModel model;
  std::vector<TrainingLogEntry> log;
  double best_val_loss = 0.0;
};

// Two-term loss over a batch of scaled POD coordinates `u` (p x batch is
// wrong; u is N x batch) and scaled DFNN inputs `x` (3 x batch):
//   L = w_rec * mean|u - D(E(u))|^2 + w_lat * mean|E(u) - dfnn(x)|^2
// Gradients are accumulated into the per-network gradient structs.
double dlrom_loss_and_gradient(const Mlp& encoder, const Mlp& decoder, const Mlp& dfnn,
                               const Eigen::MatrixXd& u, const Eigen::MatrixXd& x,
                               double w_rec, double w_lat,
                               MlpGradient* g_enc, MlpGradient* g_dec, MlpGradient* g_dfnn);

TrainingResult train(const SnapshotSet& snapshots, const PodBasis& pod,
                     const TrainingConfig& cfg);

struct InferenceResult {
  Eigen::VectorXd state;     // reconstructed N_h displacement
  bool extrapolated = false; // inputs exceeded the training hull by >10%
};

InferenceResult infer(const DlRomModel& model, double t_hat, double beta, double s);

// FRF reconstruction at a (possibly held-out) beta: for each s in s_grid,
// sweep one period of t_hat, apply max_t |functional . U|, and recover
// omega by interpolating frf_lookup across the training-beta family.
struct ReconstructedFrf {
  std::vector<double> s;
  std::vector<double> omega;
  std::vector<double> amplitude;
};

ReconstructedFrf reconstruct_frf(const DlRomModel& model, double beta,
                                 const std::vector<double>& s_grid,
                                 const std::vector<const ArcParametrizedFrf*>& family,
                                 const std::vector<double>& family_betas,
                                 const Eigen::VectorXd& functional,
                                 int samples_per_period);

// Scaled-POD-coordinate helpers shared by training and inference.
Eigen::MatrixXd scale_inputs(const FeatureScaling& sc, const Eigen::MatrixXd& raw_cols);
Eigen::MatrixXd unscale_outputs(const FeatureScaling& sc, const Eigen::MatrixXd& scaled);
Eigen::MatrixXd scale_outputs(const FeatureScaling& sc, const Eigen::MatrixXd& raw);

}  // namespace vibrom
