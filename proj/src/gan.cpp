// SPDX-License-Identifier: Apache-2.0
#include "gan.hpp"

#include <algorithm>
#include <ostream>

namespace pmugan {

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.batch < 1) throw ConfigError("train.batch must be >= 1");
  if (cfg.iterations < 0) throw ConfigError("train.iterations must be >= 0");
  if (cfg.d_steps < 1 || cfg.g_steps < 1) throw ConfigError("train step counts must be >= 1");
  if (!(cfg.noise_sigma > 0)) throw ConfigError("train.noise_sigma must be > 0");
  if (cfg.noise_dim < 1) throw ConfigError("train.noise_dim must be >= 1");
  if (!(cfg.eq_eps > 0 && cfg.eq_eps < 0.5)) throw ConfigError("train.eq_eps must be in (0, 0.5)");
  if (cfg.max_restarts < 0) throw ConfigError("train.max_restarts must be >= 0");
  if (!(cfg.lr_d > 0) || !(cfg.lr_g > 0)) throw ConfigError("learning rates must be > 0");
  if (!(cfg.holdout_frac > 0 && cfg.holdout_frac < 1))
    throw ConfigError("train.holdout_frac must be in (0, 1)");
}

Mat sample_noise_block(Rng& rng, double mu, double sigma, int window, int noise_dim) {
  Mat z(window, noise_dim);
  for (double& v : z.a) v = mu + sigma * rng.gaussian();
  return z;
}

double d_loss(const NetworkParams& D, const std::vector<Mat>& real,
              const std::vector<Mat>& fake) {
  if (real.size() != fake.size() || real.empty())
    throw DataError("d_loss: batch sizes must match and be non-empty");
  const double n = static_cast<double>(real.size());
  double loss = 0.0;
  DiscCache c;
  for (const Mat& x : real) {
    discriminator_forward(D, x, &c);
    loss -= log_sigmoid(c.logit);
  }
  for (const Mat& x : fake) {
    discriminator_forward(D, x, &c);
    loss -= log1m_sigmoid(c.logit);
  }
  loss /= n;
  if (!std::isfinite(loss)) throw DataError("d_loss: non-finite loss");
  return loss;
}

double g_loss(const NetworkParams& D, const std::vector<Mat>& fake, bool non_saturating) {
  if (fake.empty()) throw DataError("g_loss: empty batch");
  const double n = static_cast<double>(fake.size());
  double loss = 0.0;
  DiscCache c;
  for (const Mat& x : fake) {
    discriminator_forward(D, x, &c);
    loss += non_saturating ? -log_sigmoid(c.logit) : log1m_sigmoid(c.logit);
  }
  loss /= n;
  if (!std::isfinite(loss)) throw DataError("g_loss: non-finite loss");
  return loss;
}

double value_function(const NetworkParams& D, const NetworkParams& G,
                      const std::vector<Mat>& real, const std::vector<Mat>& noise) {
  if (real.empty() || noise.empty()) throw DataError("value_function: empty batch");
  DiscCache c;
  double vr = 0.0;
  for (const Mat& x : real) {
    discriminator_forward(D, x, &c);
    vr += log_sigmoid(c.logit);
  }
  double vf = 0.0;
  for (const Mat& z : noise) {
    const Mat fake = generator_forward(G, z);
    discriminator_forward(D, fake, &c);
    vf += log1m_sigmoid(c.logit);
  }
  return vr / static_cast<double>(real.size()) + vf / static_cast<double>(noise.size());
}

double d_loss_grad(const NetworkParams& D, const std::vector<Mat>& real,
                   const std::vector<Mat>& fake, NetworkParams* grads,
                   double* mean_real, double* mean_fake) {
  const double n = static_cast<double>(real.size());
  double loss = 0.0, mr = 0.0, mf = 0.0;
  DiscCache c;
  for (const Mat& x : real) {
    const double score = discriminator_forward(D, x, &c);
    mr += score;
    loss -= log_sigmoid(c.logit);
    const double dlogit = -(1.0 - sigmoid(c.logit)) / n;
    discriminator_backward(D, c, dlogit, grads);
  }
  for (const Mat& x : fake) {
    const double score = discriminator_forward(D, x, &c);
    mf += score;
    loss -= log1m_sigmoid(c.logit);
    const double dlogit = sigmoid(c.logit) / n;
    discriminator_backward(D, c, dlogit, grads);
  }
  if (mean_real) *mean_real = mr / n;
  if (mean_fake) *mean_fake = mf / n;
  return loss / n;
}

double g_loss_grad(const NetworkParams& D, const NetworkParams& G,
                   const std::vector<Mat>& noise, bool non_saturating, NetworkParams* grads) {
  const double n = static_cast<double>(noise.size());
  double loss = 0.0;
  NetworkParams d_sink = zeros_like(D);  // discriminator grads are discarded here
  GenCache gc;
  DiscCache dc;
  for (const Mat& z : noise) {
    const Mat fake = generator_forward(G, z, &gc);
    discriminator_forward(D, fake, &dc);
    const double s = sigmoid(dc.logit);
    double dlogit;
    if (non_saturating) {
      loss += -log_sigmoid(dc.logit);
      dlogit = -(1.0 - s) / n;
    } else {
      loss += log1m_sigmoid(dc.logit);
      dlogit = -s / n;
    }
    Mat dinput;
    discriminator_backward(D, dc, dlogit, &d_sink, &dinput);
    generator_backward(G, gc, dinput, grads);
  }
  return loss / n;
}

EquilibriumCheck check_equilibrium(const NetworkParams& D, const std::vector<Mat>& held_out,
                                   const NetworkParams& G, const TrainConfig& cfg, Rng& rng) {
  if (held_out.empty()) throw DataError("check_equilibrium: empty held-out set");
  EquilibriumCheck out;
  double mr = 0.0;
  for (const Mat& x : held_out) mr += discriminator_forward(D, x);
  out.m_real = mr / static_cast<double>(held_out.size());
  double mf = 0.0;
  const int window = held_out.front().rows;
  for (size_t i = 0; i < held_out.size(); ++i) {
    const Mat z = sample_noise_block(rng, cfg.noise_mu, cfg.noise_sigma, window, cfg.noise_dim);
    mf += discriminator_forward(D, generator_forward(G, z));
  }
  out.m_fake = mf / static_cast<double>(held_out.size());
  out.pass = std::abs(out.m_real - 0.5) <= cfg.eq_eps && std::abs(out.m_fake - 0.5) <= cfg.eq_eps;
  return out;
}

namespace {

void assert_finite(const NetworkParams& net, const char* what) {
  bool ok = true;
  for_each_param(const_cast<NetworkParams&>(net), [&ok](double& v) {
    if (!std::isfinite(v)) ok = false;
  });
  if (!ok) throw DataError(std::string("training diverged: non-finite parameter in ") + what);
}

}  // namespace

TrainedGan train_gan(const std::vector<Mat>& normalized_blocks, const Normalizer& norm,
                     FeatureSet set, int window, const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (normalized_blocks.empty()) throw DataError("train_gan: empty block set");
  const int nf = feature_count(set);
  for (const Mat& b : normalized_blocks)
    if (b.rows != window || b.cols != nf)
      throw DataError("train_gan: block shape does not match window/feature set");

  // trailing fraction held out for the equilibrium check
  size_t n_hold = static_cast<size_t>(normalized_blocks.size() * cfg.holdout_frac);
  n_hold = std::clamp<size_t>(n_hold, 1, normalized_blocks.size() - 1);
  const size_t n_train = normalized_blocks.size() - n_hold;
  const std::vector<Mat> holdout(normalized_blocks.end() - static_cast<long>(n_hold),
                                 normalized_blocks.end());

  TrainedGan result;
  result.normalizer = norm;
  result.set = set;
  result.window = window;
  result.noise_dim = cfg.noise_dim;

  for (int attempt = 0; attempt <= cfg.max_restarts; ++attempt) {
    // derived restart seeds keep reruns reproducible
    Rng rng(cfg.seed + static_cast<std::uint64_t>(attempt) * 2654435761ULL);
    NetworkParams D = make_discriminator(nf, cfg.disc_hidden1, cfg.disc_hidden2, rng);
    NetworkParams G = make_generator(cfg.noise_dim, cfg.gen_hidden1, cfg.gen_hidden2, nf, rng);
    AdamState adam_d(D, {cfg.lr_d, cfg.beta1, cfg.beta2, cfg.adam_eps});
    AdamState adam_g(G, {cfg.lr_g, cfg.beta1, cfg.beta2, cfg.adam_eps});

    TrainDiagnostics diag;
    diag.restarts = attempt;
    diag.non_saturating = cfg.non_saturating;
    diag.trace.reserve(static_cast<size_t>(cfg.iterations));

    std::vector<Mat> real(static_cast<size_t>(cfg.batch));
    std::vector<Mat> fake(static_cast<size_t>(cfg.batch));
    std::vector<Mat> noise(static_cast<size_t>(cfg.batch));

    for (int iter = 0; iter < cfg.iterations; ++iter) {
      IterStats st;
      st.iter = iter;
      for (int s = 0; s < cfg.d_steps; ++s) {
        for (int i = 0; i < cfg.batch; ++i) {
          real[static_cast<size_t>(i)] = normalized_blocks[rng.index(n_train)];
          const Mat z = sample_noise_block(rng, cfg.noise_mu, cfg.noise_sigma, window, cfg.noise_dim);
          fake[static_cast<size_t>(i)] = generator_forward(G, z);
        }
        NetworkParams grads = zeros_like(D);
        st.d_loss = d_loss_grad(D, real, fake, &grads, &st.m_real, &st.m_fake);
        adam_step(adam_d, D, grads);
        assert_finite(D, "discriminator");
      }
      for (int s = 0; s < cfg.g_steps; ++s) {
        for (int i = 0; i < cfg.batch; ++i)
          noise[static_cast<size_t>(i)] =
              sample_noise_block(rng, cfg.noise_mu, cfg.noise_sigma, window, cfg.noise_dim);
        NetworkParams grads = zeros_like(G);
        st.g_loss = g_loss_grad(D, G, noise, cfg.non_saturating, &grads);
        adam_step(adam_g, G, grads);
        assert_finite(G, "generator");
      }
      st.value_fn = -st.d_loss;  // identical batches, so V(G,D) = -d_loss
      if (!std::isfinite(st.d_loss) || !std::isfinite(st.g_loss))
        throw DataError("training diverged: non-finite loss");
      diag.trace.push_back(st);
    }

    const EquilibriumCheck eq = check_equilibrium(D, holdout, G, cfg, rng);
    diag.m_real = eq.m_real;
    diag.m_fake = eq.m_fake;
    diag.converged = eq.pass;

    result.discriminator = std::move(D);
    result.generator = std::move(G);
    result.diag = std::move(diag);
    if (result.diag.converged) break;
  }
  return result;
}

void write_diagnostics_csv(std::ostream& os, const TrainDiagnostics& diag) {
  os << "iter,d_loss,g_loss,value_fn,m_real,m_fake\n";
  for (const IterStats& s : diag.trace) {
    os << s.iter << ',' << fmt_g17(s.d_loss) << ',' << fmt_g17(s.g_loss) << ','
       << fmt_g17(s.value_fn) << ',' << fmt_g17(s.m_real) << ',' << fmt_g17(s.m_fake) << '\n';
  }
}

}  // namespace pmugan
