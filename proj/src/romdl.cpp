#include "vibrom/romdl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace vibrom {

Eigen::MatrixXd scale_inputs(const FeatureScaling& sc, const Eigen::MatrixXd& raw) {
  return ((raw.colwise() - sc.input_shift).array().colwise() / sc.input_scale.array())
      .matrix();
}

Eigen::MatrixXd scale_outputs(const FeatureScaling& sc, const Eigen::MatrixXd& raw) {
  return ((raw.colwise() - sc.output_shift).array().colwise() / sc.output_scale.array())
      .matrix();
}

Eigen::MatrixXd unscale_outputs(const FeatureScaling& sc, const Eigen::MatrixXd& scaled) {
  return ((scaled.array().colwise() * sc.output_scale.array()).matrix().colwise() +
          sc.output_shift);
}

double dlrom_loss_and_gradient(const Mlp& encoder, const Mlp& decoder, const Mlp& dfnn,
                               const Eigen::MatrixXd& u, const Eigen::MatrixXd& x,
                               double w_rec, double w_lat,
                               MlpGradient* g_enc, MlpGradient* g_dec, MlpGradient* g_dfnn) {
  const double batch = static_cast<double>(u.cols());
  ForwardCache c_enc, c_dec, c_dfnn;
  Eigen::MatrixXd lat = encoder.forward(u, c_enc);
  Eigen::MatrixXd rec = decoder.forward(lat, c_dec);
  Eigen::MatrixXd lat_hat = dfnn.forward(x, c_dfnn);

  Eigen::MatrixXd e_rec = rec - u;
  Eigen::MatrixXd e_lat = lat - lat_hat;
  double loss = (w_rec * e_rec.squaredNorm() + w_lat * e_lat.squaredNorm()) / batch;

  if (g_enc && g_dec && g_dfnn) {
    Eigen::MatrixXd d_rec = (2.0 * w_rec / batch) * e_rec;
    Eigen::MatrixXd d_lat_from_dec = decoder.backward(c_dec, d_rec, *g_dec);
    Eigen::MatrixXd d_lat = d_lat_from_dec + (2.0 * w_lat / batch) * e_lat;
    encoder.backward(c_enc, d_lat, *g_enc);
    Eigen::MatrixXd d_lat_hat = (-2.0 * w_lat / batch) * e_lat;
    dfnn.backward(c_dfnn, d_lat_hat, *g_dfnn);
  }
  return loss;
}

namespace {

FeatureScaling fit_scaling(const Eigen::MatrixXd& pod_coords,
                           const Eigen::MatrixXd& params_cols) {
  FeatureScaling sc;
  Eigen::VectorXd lo = params_cols.rowwise().minCoeff();
  Eigen::VectorXd hi = params_cols.rowwise().maxCoeff();
  // inputs to [-1, 1] per feature
  sc.input_shift = 0.5 * (lo + hi);
  sc.input_scale = (0.5 * (hi - lo)).cwiseMax(1e-12);
  // POD coordinates standardized per coordinate
  sc.output_shift = pod_coords.rowwise().mean();
  Eigen::MatrixXd centered = pod_coords.colwise() - sc.output_shift;
  sc.output_scale = (centered.array().square().rowwise().mean()).sqrt().cwiseMax(1e-12);
  return sc;
}

}  // namespace

TrainingResult train(const SnapshotSet& snapshots, const PodBasis& pod,
                     const TrainingConfig& cfg) {
  const int n_samples = static_cast<int>(snapshots.matrix.cols());
  if (n_samples != snapshots.params.rows())
    throw std::invalid_argument("train: snapshot/param count mismatch");
  const int pod_dim = static_cast<int>(pod.basis.cols());

  Eigen::MatrixXd pod_coords = pod.basis.transpose() * snapshots.matrix;  // N x N_s
  Eigen::MatrixXd params_cols = snapshots.params.transpose();             // 3 x N_s

  TrainingResult result;
  DlRomModel& model = result.model;
  model.pod = pod;
  model.latent_dim = cfg.latent_dim;
  model.config = cfg;
  model.scaling = fit_scaling(pod_coords, params_cols);
  model.input_lo = params_cols.rowwise().minCoeff();
  model.input_hi = params_cols.rowwise().maxCoeff();

  Eigen::MatrixXd u_all = scale_outputs(model.scaling, pod_coords);
  Eigen::MatrixXd x_all = scale_inputs(model.scaling, params_cols);

  std::mt19937_64 rng(cfg.seed);
  Activation act = activation_from_string(cfg.activation);
  std::vector<int> enc_sizes{pod_dim};
  enc_sizes.insert(enc_sizes.end(), cfg.encoder_hidden.begin(), cfg.encoder_hidden.end());
  enc_sizes.push_back(cfg.latent_dim);
  std::vector<int> dec_sizes(enc_sizes.rbegin(), enc_sizes.rend());
  std::vector<int> dfnn_sizes{3};
  dfnn_sizes.insert(dfnn_sizes.end(), cfg.dfnn_hidden.begin(), cfg.dfnn_hidden.end());
  dfnn_sizes.push_back(cfg.latent_dim);

  model.encoder = make_mlp(enc_sizes, act, rng);
  model.decoder = make_mlp(dec_sizes, act, rng);
  model.dfnn = make_mlp(dfnn_sizes, act, rng);

  // deterministic shuffled validation split
  std::vector<int> order(n_samples);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  int n_val = std::max(1, static_cast<int>(cfg.validation_fraction * n_samples));
  n_val = std::min(n_val, n_samples - 1);
  std::vector<int> val_idx(order.begin(), order.begin() + n_val);
  std::vector<int> train_idx(order.begin() + n_val, order.end());

  auto gather = [](const Eigen::MatrixXd& m, const std::vector<int>& idx) {
    Eigen::MatrixXd out(m.rows(), idx.size());
    for (size_t j = 0; j < idx.size(); ++j) out.col(j) = m.col(idx[j]);
    return out;
  };
  Eigen::MatrixXd u_val = gather(u_all, val_idx);
  Eigen::MatrixXd x_val = gather(x_all, val_idx);

  AdamState adam_enc(model.encoder), adam_dec(model.decoder), adam_dfnn(model.dfnn);

  Mlp best_enc = model.encoder, best_dec = model.decoder, best_dfnn = model.dfnn;
  double best_val = std::numeric_limits<double>::infinity();

  const int n_train = static_cast<int>(train_idx.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double epoch_loss = 0.0;
    int n_batches = 0;
    for (int start = 0; start < n_train; start += cfg.batch_size) {
      int count = std::min(cfg.batch_size, n_train - start);
      std::vector<int> batch(train_idx.begin() + start, train_idx.begin() + start + count);
      Eigen::MatrixXd u = gather(u_all, batch);
      Eigen::MatrixXd x = gather(x_all, batch);
      MlpGradient g_enc = model.encoder.zero_gradient();
      MlpGradient g_dec = model.decoder.zero_gradient();
      MlpGradient g_dfnn = model.dfnn.zero_gradient();
      double loss = dlrom_loss_and_gradient(model.encoder, model.decoder, model.dfnn, u, x,
                                            cfg.weight_rec, cfg.weight_lat, &g_enc, &g_dec,
                                            &g_dfnn);
      if (!std::isfinite(loss))
        throw SolverError("train: loss diverged at epoch " + std::to_string(epoch));
      adam_enc.update(model.encoder, g_enc, cfg.learning_rate);
      adam_dec.update(model.decoder, g_dec, cfg.learning_rate);
      adam_dfnn.update(model.dfnn, g_dfnn, cfg.learning_rate);
      epoch_loss += loss;
      ++n_batches;
    }
    double val_loss = dlrom_loss_and_gradient(model.encoder, model.decoder, model.dfnn,
                                              u_val, x_val, cfg.weight_rec, cfg.weight_lat,
                                              nullptr, nullptr, nullptr);
    result.log.push_back({epoch, epoch_loss / n_batches, val_loss});
    if (val_loss < best_val) {
      best_val = val_loss;
      best_enc = model.encoder;
      best_dec = model.decoder;
      best_dfnn = model.dfnn;
    }
  }

  model.encoder = best_enc;
  model.decoder = best_dec;
  model.dfnn = best_dfnn;
  result.best_val_loss = best_val;
  return result;
}

InferenceResult infer(const DlRomModel& model, double t_hat, double beta, double s) {
  Eigen::VectorXd raw(3);
  raw << t_hat, beta, s;
  InferenceResult out;
  for (int i = 0; i < 3; ++i) {
    double span = std::max(model.input_hi(i) - model.input_lo(i), 1e-12);
    if (raw(i) < model.input_lo(i) - 0.1 * span || raw(i) > model.input_hi(i) + 0.1 * span)
      out.extrapolated = true;
  }
  Eigen::MatrixXd x = scale_inputs(model.scaling, raw);
  Eigen::MatrixXd lat = model.dfnn.forward(x);
  Eigen::MatrixXd coords = unscale_outputs(model.scaling, model.decoder.forward(lat));
  out.state = model.pod.basis * coords.col(0);
  return out;
}

ReconstructedFrf reconstruct_frf(const DlRomModel& model, double beta,
                                 const std::vector<double>& s_grid,
                                 const std::vector<const ArcParametrizedFrf*>& family,
                                 const std::vector<double>& family_betas,
                                 const Eigen::VectorXd& functional,
                                 int samples_per_period) {
  if (family.size() != family_betas.size() || family.empty())
    throw std::invalid_argument("reconstruct_frf: inconsistent family");

  // bracket beta in the training family (clamped linear interpolation)
  size_t hi = 0;
  while (hi < family_betas.size() && family_betas[hi] < beta) ++hi;
  size_t lo;
  double t;
  if (hi == 0) {
    lo = hi = 0;
    t = 0.0;
  } else if (hi == family_betas.size()) {
    lo = hi = family_betas.size() - 1;
    t = 0.0;
  } else {
    lo = hi - 1;
    t = (beta - family_betas[lo]) / (family_betas[hi] - family_betas[lo]);
  }

  ReconstructedFrf out;
  for (double s : s_grid) {
    double a_max = 0.0;
    for (int k = 0; k < samples_per_period; ++k) {
      double t_hat = static_cast<double>(k) / samples_per_period;
      InferenceResult r = infer(model, t_hat, beta, s);
      a_max = std::max(a_max, std::abs(functional.dot(r.state)));
    }
    double w_lo = frf_lookup(*family[lo], s).first;
    double w_hi = frf_lookup(*family[hi], s).first;
    out.s.push_back(s);
    out.omega.push_back(w_lo + t * (w_hi - w_lo));
    out.amplitude.push_back(a_max);
  }
  return out;
}

}  // namespace vibrom
