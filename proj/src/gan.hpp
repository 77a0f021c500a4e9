// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nn.hpp"
#include "phasor.hpp"

namespace pmugan {

struct TrainConfig {
  int batch = 64;             // N, samples per training batch
  int iterations = 1500;
  int d_steps = 1;
  int g_steps = 1;
  std::uint64_t seed = 42;
  double noise_mu = 0.0;      // z ~ N(mu, sigma^2), i.i.d. per entry
  double noise_sigma = 1.0;
  int noise_dim = 8;
  double eq_eps = 0.15;       // |mean D - 0.5| tolerance at equilibrium
  int max_restarts = 3;
  bool non_saturating = false;  // generator loss variant, see g_loss
  double lr_d = 1e-3;
  double lr_g = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int disc_hidden1 = 32;
  int disc_hidden2 = 16;
  int gen_hidden1 = 32;
  int gen_hidden2 = 32;
  double holdout_frac = 0.1;  // tail fraction of blocks held out for the equilibrium check
};

void validate_train_config(const TrainConfig& cfg);

struct IterStats {
  int iter = 0;
  double d_loss = 0, g_loss = 0, value_fn = 0;
  double m_real = 0, m_fake = 0;  // batch-mean discriminator outputs
};

struct TrainDiagnostics {
  std::vector<IterStats> trace;
  int restarts = 0;
  bool converged = false;
  double m_real = 0, m_fake = 0;  // held-out equilibrium metrics of the final attempt
  bool non_saturating = false;
};

// A trained adversarial pair plus everything scoring needs.
struct TrainedGan {
  NetworkParams discriminator;
  NetworkParams generator;
  Normalizer normalizer;
  FeatureSet set = FeatureSet::All12;
  int window = 40;
  int noise_dim = 8;
  TrainDiagnostics diag;
};

// W x noise_dim matrix of i.i.d. Gaussian draws.
Mat sample_noise_block(Rng& rng, double mu, double sigma, int window, int noise_dim);

// Discriminator loss: -(1/N) sum [log D(x_i) + log(1 - D(fake_i))], the
// minimized negation of the paper's maximized objective. Computed from
// pre-sigmoid logits.
double d_loss(const NetworkParams& D, const std::vector<Mat>& real,
              const std::vector<Mat>& fake);

// Generator loss: (1/N) sum log(1 - D(fake_i)); with non_saturating,
// -(1/N) sum log D(fake_i).
double g_loss(const NetworkParams& D, const std::vector<Mat>& fake, bool non_saturating);

// Empirical min-max value function on the given batches (equals -d_loss when
// evaluated on identical batches).
double value_function(const NetworkParams& D, const NetworkParams& G,
                      const std::vector<Mat>& real, const std::vector<Mat>& noise);

// Loss-and-gradient forms used by the training loop (grads accumulated).
double d_loss_grad(const NetworkParams& D, const std::vector<Mat>& real,
                   const std::vector<Mat>& fake, NetworkParams* grads,
                   double* mean_real = nullptr, double* mean_fake = nullptr);
double g_loss_grad(const NetworkParams& D, const NetworkParams& G,
                   const std::vector<Mat>& noise, bool non_saturating, NetworkParams* grads);

struct EquilibriumCheck {
  bool pass = false;
  double m_real = 0;
  double m_fake = 0;
};

// Operational surrogate for the optimum conditions: at p_g = p_data the
// optimal discriminator outputs 1/2, so both the held-out real mean and the
// fresh-fake mean of D must sit within eq_eps of 0.5.
EquilibriumCheck check_equilibrium(const NetworkParams& D, const std::vector<Mat>& held_out,
                                   const NetworkParams& G, const TrainConfig& cfg, Rng& rng);

// Adversarial training over normalized feature blocks. Splits off the trailing
// holdout_frac of blocks for the equilibrium check, restarts with fresh
// initializations (derived seeds) on failure, and never throws on
// non-convergence: the returned diagnostics carry converged=false instead.
TrainedGan train_gan(const std::vector<Mat>& normalized_blocks, const Normalizer& norm,
                     FeatureSet set, int window, const TrainConfig& cfg);

// Diagnostics CSV: iter,d_loss,g_loss,value_fn,m_real,m_fake
void write_diagnostics_csv(std::ostream& os, const TrainDiagnostics& diag);

}  // namespace pmugan
