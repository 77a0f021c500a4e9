// SPDX-License-Identifier: Apache-2.0
#include "nn.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace pmugan {

LstmLayerParams::LstmLayerParams(int in, int hidden) : input_dim(in), hidden_dim(hidden) {
  for (int k = 0; k < kGates; ++k) {
    wx[k] = Mat(hidden, in);
    wh[k] = Mat(hidden, hidden);
    b[k].assign(static_cast<size_t>(hidden), 0.0);
  }
}

namespace {

void init_uniform(Mat& m, double k, Rng& rng) {
  for (double& v : m.a) v = rng.uniform(-k, k);
}

void init_lstm(LstmLayerParams& p, Rng& rng) {
  const double kx = 1.0 / std::sqrt(static_cast<double>(p.input_dim));
  const double kh = 1.0 / std::sqrt(static_cast<double>(p.hidden_dim));
  for (int k = 0; k < kGates; ++k) {
    init_uniform(p.wx[k], kx, rng);
    init_uniform(p.wh[k], kh, rng);
  }
  // forget bias at +1 so early training does not flush the cell state
  std::fill(p.b[kGateF].begin(), p.b[kGateF].end(), 1.0);
}

void init_dense(DenseParams& d, Rng& rng) {
  init_uniform(d.w, 1.0 / std::sqrt(static_cast<double>(d.w.cols)), rng);
}

}  // namespace

NetworkParams make_discriminator(int feature_dim, int hidden1, int hidden2, Rng& rng) {
  NetworkParams net;
  net.lstm.emplace_back(feature_dim, hidden1);
  net.lstm.emplace_back(hidden1, hidden2);
  net.head = DenseParams(hidden2, 1);
  net.output_activation = OutputActivation::Sigmoid;
  for (auto& l : net.lstm) init_lstm(l, rng);
  init_dense(net.head, rng);
  return net;
}

NetworkParams make_generator(int noise_dim, int hidden1, int hidden2, int feature_dim, Rng& rng) {
  NetworkParams net;
  net.lstm.emplace_back(noise_dim, hidden1);
  net.lstm.emplace_back(hidden1, hidden2);
  net.head = DenseParams(hidden2, feature_dim);
  net.output_activation = OutputActivation::Tanh;
  for (auto& l : net.lstm) init_lstm(l, rng);
  init_dense(net.head, rng);
  return net;
}

namespace {

struct ParamSeg {
  double* p;
  size_t n;
};

std::vector<ParamSeg> param_segments(NetworkParams& net) {
  std::vector<ParamSeg> segs;
  for (auto& l : net.lstm) {
    for (int k = 0; k < kGates; ++k) segs.push_back({l.wx[k].a.data(), l.wx[k].size()});
    for (int k = 0; k < kGates; ++k) segs.push_back({l.wh[k].a.data(), l.wh[k].size()});
    for (int k = 0; k < kGates; ++k) segs.push_back({l.b[k].data(), l.b[k].size()});
  }
  segs.push_back({net.head.w.a.data(), net.head.w.size()});
  segs.push_back({net.head.b.data(), net.head.b.size()});
  return segs;
}

}  // namespace

size_t param_count(const NetworkParams& net) {
  size_t n = 0;
  auto segs = param_segments(const_cast<NetworkParams&>(net));
  for (const auto& s : segs) n += s.n;
  return n;
}

void for_each_param(NetworkParams& net, const std::function<void(double&)>& f) {
  for (auto& s : param_segments(net))
    for (size_t i = 0; i < s.n; ++i) f(s.p[i]);
}

void zip_params(NetworkParams& a, const NetworkParams& b,
                const std::function<void(double&, double)>& f) {
  auto sa = param_segments(a);
  auto sb = param_segments(const_cast<NetworkParams&>(b));
  for (size_t k = 0; k < sa.size(); ++k)
    for (size_t i = 0; i < sa[k].n; ++i) f(sa[k].p[i], sb[k].p[i]);
}

NetworkParams zeros_like(const NetworkParams& net) {
  NetworkParams z;
  for (const auto& l : net.lstm) z.lstm.emplace_back(l.input_dim, l.hidden_dim);
  z.head = DenseParams(net.head.w.cols, net.head.w.rows);
  z.output_activation = net.output_activation;
  return z;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

double softplus(double x) { return x > 35.0 ? x : std::log1p(std::exp(x)); }

inline double dtanh_from_y(double y) { return 1.0 - y * y; }
inline double dsigmoid_from_y(double y) { return y * (1.0 - y); }

// y = b + Wx (W row-major out x in)
void affine(const Mat& w, const double* b, const double* x, double* y) {
  const int R = w.rows, C = w.cols;
  const double* wp = w.a.data();
  for (int r = 0; r < R; ++r) {
    double acc = b ? b[r] : 0.0;
    const double* row = wp + static_cast<size_t>(r) * C;
    for (int j = 0; j < C; ++j) acc += row[j] * x[j];
    y[r] = acc;
  }
}

// y += Wx
void matvec_add(const Mat& w, const double* x, double* y) {
  const int R = w.rows, C = w.cols;
  const double* wp = w.a.data();
  for (int r = 0; r < R; ++r) {
    double acc = 0.0;
    const double* row = wp + static_cast<size_t>(r) * C;
    for (int j = 0; j < C; ++j) acc += row[j] * x[j];
    y[r] += acc;
  }
}

// x += W^T v
void matTvec_add(const Mat& w, const double* v, double* x) {
  const int R = w.rows, C = w.cols;
  const double* wp = w.a.data();
  for (int r = 0; r < R; ++r) {
    const double vr = v[r];
    if (vr == 0.0) continue;
    const double* row = wp + static_cast<size_t>(r) * C;
    for (int j = 0; j < C; ++j) x[j] += row[j] * vr;
  }
}

// G += v x^T
void outer_add(Mat& g, const double* v, const double* x) {
  const int R = g.rows, C = g.cols;
  double* gp = g.a.data();
  for (int r = 0; r < R; ++r) {
    const double vr = v[r];
    if (vr == 0.0) continue;
    double* row = gp + static_cast<size_t>(r) * C;
    for (int j = 0; j < C; ++j) row[j] += vr * x[j];
  }
}

}  // namespace

void lstm_forward(const LstmLayerParams& p, const Mat& x_seq,
                  const double* h0, const double* c0, LstmCache* cache) {
  const int W = x_seq.rows;
  const int H = p.hidden_dim;
  if (x_seq.cols != p.input_dim) throw DataError("lstm_forward: input width mismatch");
  cache->x = x_seq;
  for (Mat* m : {&cache->i, &cache->f, &cache->o, &cache->g, &cache->c, &cache->h, &cache->tanh_c})
    *m = Mat(W, H);

  Vec zero(static_cast<size_t>(H), 0.0);
  const double* h_prev = h0 ? h0 : zero.data();
  const double* c_prev = c0 ? c0 : zero.data();
  Vec pre(static_cast<size_t>(H));
  for (int t = 0; t < W; ++t) {
    const double* xt = x_seq.row(t);
    double* it = cache->i.row(t);
    double* ft = cache->f.row(t);
    double* ot = cache->o.row(t);
    double* gt = cache->g.row(t);
    for (int k = 0; k < kGates; ++k) {
      affine(p.wx[k], p.b[k].data(), xt, pre.data());
      matvec_add(p.wh[k], h_prev, pre.data());
      double* dst = (k == kGateI) ? it : (k == kGateF) ? ft : (k == kGateO) ? ot : gt;
      if (k == kGateG) {
        for (int r = 0; r < H; ++r) dst[r] = std::tanh(pre[r]);
      } else {
        for (int r = 0; r < H; ++r) dst[r] = sigmoid(pre[r]);
      }
    }
    double* ct = cache->c.row(t);
    double* ht = cache->h.row(t);
    double* tc = cache->tanh_c.row(t);
    for (int r = 0; r < H; ++r) {
      ct[r] = ft[r] * c_prev[r] + it[r] * gt[r];
      tc[r] = std::tanh(ct[r]);
      ht[r] = ot[r] * tc[r];
    }
    h_prev = ht;
    c_prev = ct;
  }
}

void lstm_backward(const LstmLayerParams& p, const LstmCache& cache, const Mat& dh_seq,
                   LstmLayerParams* grads, Mat* dx) {
  const int W = cache.x.rows;
  const int H = p.hidden_dim;
  *dx = Mat(W, p.input_dim);
  Vec dh_next(static_cast<size_t>(H), 0.0);
  Vec dc_next(static_cast<size_t>(H), 0.0);
  Vec dh(static_cast<size_t>(H)), dc(static_cast<size_t>(H));
  Vec dpre[kGates];
  for (auto& v : dpre) v.assign(static_cast<size_t>(H), 0.0);
  Vec zero(static_cast<size_t>(H), 0.0);

  for (int t = W - 1; t >= 0; --t) {
    const double* it = cache.i.row(t);
    const double* ft = cache.f.row(t);
    const double* ot = cache.o.row(t);
    const double* gt = cache.g.row(t);
    const double* tc = cache.tanh_c.row(t);
    const double* c_prev = (t > 0) ? cache.c.row(t - 1) : zero.data();
    const double* h_prev = (t > 0) ? cache.h.row(t - 1) : zero.data();

    for (int r = 0; r < H; ++r) {
      dh[r] = dh_seq(t, r) + dh_next[r];
      dc[r] = dc_next[r] + dh[r] * ot[r] * dtanh_from_y(tc[r]);
      dpre[kGateO][r] = dh[r] * tc[r] * dsigmoid_from_y(ot[r]);
      dpre[kGateI][r] = dc[r] * gt[r] * dsigmoid_from_y(it[r]);
      dpre[kGateG][r] = dc[r] * it[r] * dtanh_from_y(gt[r]);
      dpre[kGateF][r] = dc[r] * c_prev[r] * dsigmoid_from_y(ft[r]);
      dc_next[r] = dc[r] * ft[r];
    }

    const double* xt = cache.x.row(t);
    double* dxt = dx->row(t);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (int k = 0; k < kGates; ++k) {
      outer_add(grads->wx[k], dpre[k].data(), xt);
      outer_add(grads->wh[k], dpre[k].data(), h_prev);
      for (int r = 0; r < H; ++r) grads->b[k][r] += dpre[k][r];
      matTvec_add(p.wx[k], dpre[k].data(), dxt);
      matTvec_add(p.wh[k], dpre[k].data(), dh_next.data());
    }
  }
}

namespace {

// largest double below 1; keeps scores inside the open interval (0, 1)
constexpr double kScoreMax = 0x1.fffffffffffffp-1;
constexpr double kScoreMin = 1e-300;

void run_stack(const NetworkParams& net, const Mat& input, std::vector<LstmCache>* layers) {
  layers->resize(net.lstm.size());
  const Mat* x = &input;
  for (size_t l = 0; l < net.lstm.size(); ++l) {
    lstm_forward(net.lstm[l], *x, nullptr, nullptr, &(*layers)[l]);
    x = &(*layers)[l].h;
  }
}

}  // namespace

double discriminator_forward(const NetworkParams& net, const Mat& block, DiscCache* cache) {
  if (net.output_activation != OutputActivation::Sigmoid)
    throw DataError("discriminator_forward: net is not discriminator-shaped");
  if (!all_finite(block.a.data(), block.size()))
    throw DataError("discriminator_forward: non-finite input");
  DiscCache local;
  DiscCache* c = cache ? cache : &local;
  run_stack(net, block, &c->layers);
  const Mat& h_top = c->layers.back().h;
  const double* h_last = h_top.row(h_top.rows - 1);
  double logit = 0.0;
  affine(net.head.w, net.head.b.data(), h_last, &logit);
  c->logit = logit;
  return std::clamp(sigmoid(logit), kScoreMin, kScoreMax);
}

void discriminator_backward(const NetworkParams& net, const DiscCache& cache, double dlogit,
                            NetworkParams* grads, Mat* dinput) {
  const int W = cache.layers.front().x.rows;
  const Mat& h_top = cache.layers.back().h;
  const double* h_last = h_top.row(W - 1);

  // head: single output row
  for (int j = 0; j < net.head.w.cols; ++j) grads->head.w(0, j) += dlogit * h_last[j];
  grads->head.b[0] += dlogit;

  Mat dh(W, net.lstm.back().hidden_dim);
  matTvec_add(net.head.w, &dlogit, dh.row(W - 1));

  for (size_t l = net.lstm.size(); l-- > 0;) {
    Mat dx;
    lstm_backward(net.lstm[l], cache.layers[l], dh, &grads->lstm[l], &dx);
    if (l > 0)
      dh = std::move(dx);
    else if (dinput)
      *dinput = std::move(dx);
  }
}

Mat generator_forward(const NetworkParams& net, const Mat& z_seq, GenCache* cache) {
  if (net.output_activation != OutputActivation::Tanh)
    throw DataError("generator_forward: net is not generator-shaped");
  GenCache local;
  GenCache* c = cache ? cache : &local;
  run_stack(net, z_seq, &c->layers);
  const Mat& h_top = c->layers.back().h;
  const int W = h_top.rows;
  const int F = net.head.w.rows;
  c->y = Mat(W, F);
  for (int t = 0; t < W; ++t) {
    affine(net.head.w, net.head.b.data(), h_top.row(t), c->y.row(t));
    double* yt = c->y.row(t);
    for (int j = 0; j < F; ++j) yt[j] = std::tanh(yt[j]);
  }
  return c->y;
}

void generator_backward(const NetworkParams& net, const GenCache& cache, const Mat& dy,
                        NetworkParams* grads) {
  const Mat& h_top = cache.layers.back().h;
  const int W = h_top.rows;
  const int F = net.head.w.rows;
  Mat dh(W, net.lstm.back().hidden_dim);
  Vec dpre(static_cast<size_t>(F));
  for (int t = 0; t < W; ++t) {
    const double* yt = cache.y.row(t);
    for (int j = 0; j < F; ++j) dpre[j] = dy(t, j) * dtanh_from_y(yt[j]);
    outer_add(grads->head.w, dpre.data(), h_top.row(t));
    for (int j = 0; j < F; ++j) grads->head.b[j] += dpre[j];
    matTvec_add(net.head.w, dpre.data(), dh.row(t));
  }
  for (size_t l = net.lstm.size(); l-- > 0;) {
    Mat dx;
    lstm_backward(net.lstm[l], cache.layers[l], dh, &grads->lstm[l], &dx);
    if (l > 0) dh = std::move(dx);
  }
}

double log_sigmoid(double logit) { return -softplus(-logit); }
double log1m_sigmoid(double logit) { return -softplus(logit); }

void adam_step(AdamState& state, NetworkParams& params, const NetworkParams& grads) {
  state.t += 1;
  const auto& c = state.cfg;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
  auto sp = param_segments(params);
  auto sg = param_segments(const_cast<NetworkParams&>(grads));
  auto sm = param_segments(state.m);
  auto sv = param_segments(state.v);
  for (size_t k = 0; k < sp.size(); ++k) {
    for (size_t i = 0; i < sp[k].n; ++i) {
      const double g = sg[k].p[i];
      double& m = sm[k].p[i];
      double& v = sv[k].p[i];
      m = c.beta1 * m + (1.0 - c.beta1) * g;
      v = c.beta2 * v + (1.0 - c.beta2) * g * g;
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      sp[k].p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

GradCheckReport gradient_check(NetworkParams& net, const NetworkParams& analytic,
                               const std::function<double()>& loss, double tol, double h) {
  GradCheckReport rep;
  auto sp = param_segments(net);
  auto sa = param_segments(const_cast<NetworkParams&>(analytic));
  size_t idx = 0;
  for (size_t k = 0; k < sp.size(); ++k) {
    for (size_t i = 0; i < sp[k].n; ++i, ++idx) {
      double& p = sp[k].p[i];
      const double saved = p;
      p = saved + h;
      const double lp = loss();
      p = saved - h;
      const double lm = loss();
      p = saved;
      const double num = (lp - lm) / (2.0 * h);
      const double ana = sa[k].p[i];
      const double rel = std::abs(ana - num) / std::max({std::abs(ana), std::abs(num), 1e-6});
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst_index = idx;
      }
    }
  }
  rep.pass = !(rep.max_rel_err >= tol);
  return rep;
}

namespace {

void write_values(std::ostream& os, const double* p, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    if (i) os << ' ';
    os << fmt_g17(p[i]);
  }
  os << '\n';
}

}  // namespace

void write_network(std::ostream& os, const NetworkParams& net) {
  os << "lstm_layers " << net.lstm.size() << '\n';
  for (const auto& l : net.lstm) os << "lstm " << l.input_dim << ' ' << l.hidden_dim << '\n';
  os << "dense " << net.head.w.cols << ' ' << net.head.w.rows << ' '
     << (net.output_activation == OutputActivation::Sigmoid ? "sigmoid" : "tanh") << '\n';
  os << "weights " << param_count(net) << '\n';
  auto segs = param_segments(const_cast<NetworkParams&>(net));
  for (const auto& s : segs) write_values(os, s.p, s.n);
}

NetworkParams read_network(std::istream& is) {
  std::string tok;
  size_t n_layers = 0;
  if (!(is >> tok >> n_layers) || tok != "lstm_layers")
    throw DataError("model file: expected lstm_layers");
  NetworkParams net;
  int prev_out = -1;
  for (size_t l = 0; l < n_layers; ++l) {
    int in = 0, hidden = 0;
    if (!(is >> tok >> in >> hidden) || tok != "lstm" || in <= 0 || hidden <= 0)
      throw DataError("model file: bad lstm layer descriptor");
    if (prev_out >= 0 && in != prev_out) throw DataError("model file: layer dims do not chain");
    net.lstm.emplace_back(in, hidden);
    prev_out = hidden;
  }
  int din = 0, dout = 0;
  std::string act;
  if (!(is >> tok >> din >> dout >> act) || tok != "dense" || din <= 0 || dout <= 0)
    throw DataError("model file: bad dense descriptor");
  if (prev_out >= 0 && din != prev_out) throw DataError("model file: dense dim does not chain");
  net.head = DenseParams(din, dout);
  if (act == "sigmoid") net.output_activation = OutputActivation::Sigmoid;
  else if (act == "tanh") net.output_activation = OutputActivation::Tanh;
  else throw DataError("model file: bad activation '" + act + "'");
  size_t count = 0;
  if (!(is >> tok >> count) || tok != "weights") throw DataError("model file: expected weights");
  if (count != param_count(net)) throw DataError("model file: weight count mismatch");
  for (auto& s : param_segments(net))
    for (size_t i = 0; i < s.n; ++i)
      if (!(is >> s.p[i])) throw DataError("model file: truncated weights");
  return net;
}

}  // namespace pmugan
