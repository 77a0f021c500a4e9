// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "common.hpp"

namespace pmugan {

// Gate order used throughout: input, forget, output, candidate.
enum Gate { kGateI = 0, kGateF = 1, kGateO = 2, kGateG = 3 };
inline constexpr int kGates = 4;

struct LstmLayerParams {
  int input_dim = 0;
  int hidden_dim = 0;
  Mat wx[kGates];  // hidden x input
  Mat wh[kGates];  // hidden x hidden
  Vec b[kGates];   // hidden

  LstmLayerParams() = default;
  LstmLayerParams(int in, int hidden);
};

struct DenseParams {
  Mat w;  // out x in
  Vec b;  // out
  DenseParams() = default;
  DenseParams(int in, int out) : w(out, in), b(static_cast<size_t>(out), 0.0) {}
};

enum class OutputActivation { Sigmoid, Tanh };

// Stacked LSTM layers with a dense head. The sigmoid head is applied to the
// final hidden state only (discriminator, scalar score); the tanh head is
// applied per time step (generator, one feature row per step).
struct NetworkParams {
  std::vector<LstmLayerParams> lstm;
  DenseParams head;
  OutputActivation output_activation = OutputActivation::Sigmoid;
};

NetworkParams make_discriminator(int feature_dim, int hidden1, int hidden2, Rng& rng);
NetworkParams make_generator(int noise_dim, int hidden1, int hidden2, int feature_dim, Rng& rng);

size_t param_count(const NetworkParams& net);

// Iterate all parameters (and, in the zip form, a same-shaped companion
// container) in a fixed order. Gradient and Adam-moment containers are just
// NetworkParams of the same architecture.
void for_each_param(NetworkParams& net, const std::function<void(double&)>& f);
void zip_params(NetworkParams& a, const NetworkParams& b,
                const std::function<void(double&, double)>& f);
NetworkParams zeros_like(const NetworkParams& net);

// ---- forward / backward ----------------------------------------------------

// Cached activations for one LSTM layer over a window. Post-activation gate
// values are enough to rebuild every local derivative.
struct LstmCache {
  Mat x;       // W x input_dim
  Mat i, f, o, g;  // W x hidden
  Mat c, h;        // W x hidden
  Mat tanh_c;      // W x hidden
};

// h_seq plus final states; h0/c0 default to zero when null.
void lstm_forward(const LstmLayerParams& p, const Mat& x_seq,
                  const double* h0, const double* c0, LstmCache* cache);

// Accumulates parameter gradients into `grads` (same shape as `p`) and writes
// the gradient w.r.t. the layer input into dx (W x input_dim). dh_seq carries
// the gradient w.r.t. every h_t coming from above.
void lstm_backward(const LstmLayerParams& p, const LstmCache& cache, const Mat& dh_seq,
                   LstmLayerParams* grads, Mat* dx);

struct DiscCache {
  std::vector<LstmCache> layers;
  double logit = 0.0;
};

// Scalar discriminator output D(x) in (0, 1); sigma(logit) clamped away from
// exact 0/1 so downstream code can rely on the open interval.
double discriminator_forward(const NetworkParams& net, const Mat& block, DiscCache* cache = nullptr);

// dlogit -> parameter grads (accumulated) + optional gradient w.r.t. the input block.
void discriminator_backward(const NetworkParams& net, const DiscCache& cache, double dlogit,
                            NetworkParams* grads, Mat* dinput = nullptr);

struct GenCache {
  std::vector<LstmCache> layers;
  Mat y;  // W x F, tanh output
};

Mat generator_forward(const NetworkParams& net, const Mat& z_seq, GenCache* cache = nullptr);

void generator_backward(const NetworkParams& net, const GenCache& cache, const Mat& dy,
                        NetworkParams* grads);

double sigmoid(double x);
// log(sigmoid(x)) and log(1 - sigmoid(x)) computed without forming the sigmoid
double log_sigmoid(double logit);
double log1m_sigmoid(double logit);

// ---- Adam -------------------------------------------------------------------

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  NetworkParams m;  // first moments, same shape as the parameters
  NetworkParams v;  // second moments
  std::int64_t t = 0;

  AdamState() = default;
  AdamState(const NetworkParams& shape, const AdamConfig& c)
      : cfg(c), m(zeros_like(shape)), v(zeros_like(shape)) {}
};

// One bias-corrected Adam update of `params` from `grads`.
void adam_step(AdamState& state, NetworkParams& params, const NetworkParams& grads);

// ---- gradient checking -------------------------------------------------------

struct GradCheckReport {
  double max_rel_err = 0.0;
  size_t worst_index = 0;
  bool pass = true;
};

// Compares `analytic` against central finite differences of `loss` (step h)
// parameter-by-parameter. `loss` must be a pure function of `net`.
GradCheckReport gradient_check(NetworkParams& net, const NetworkParams& analytic,
                               const std::function<double()>& loss, double tol,
                               double h = 1e-5);

// ---- serialization ------------------------------------------------------------

// Text form used inside the model file: architecture descriptor followed by
// row-major weight listings at 17 significant digits.
void write_network(std::ostream& os, const NetworkParams& net);
NetworkParams read_network(std::istream& is);

}  // namespace pmugan
