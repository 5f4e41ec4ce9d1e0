#include "bnmt/nn/layers.hpp"

#include <algorithm>
#include <cmath>

namespace bnmt::nn {

Linear Linear::declare(ParameterSet& ps, const std::string& name, Eigen::Index in, Eigen::Index out) {
  Linear l;
  l.w = &ps.add(name + ".w", out, in);
  l.b = &ps.add(name + ".b", out, 1);
  return l;
}

Linear Linear::bind(ParameterSet& ps) const {
  return Linear{&ps[w->name], &ps[b->name]};
}

Var Linear::operator()(Tape& t, Var x) const {
  return add(matmul(t.param(*w), x), t.param(*b));
}

Lstm Lstm::declare(ParameterSet& ps, const std::string& name, Eigen::Index in, Eigen::Index hidden) {
  Lstm l;
  l.w = &ps.add(name + ".w", 4 * hidden, in + hidden);
  l.b = &ps.add(name + ".b", 4 * hidden, 1);
  l.hidden = hidden;
  return l;
}

void init_lstm_bias(Lstm& l) {
  l.b->value.setZero();
  l.b->value.middleRows(l.hidden, l.hidden).setOnes();
}

std::vector<Var> Lstm::run(Tape& t, const std::vector<Var>& xs, bool reverse) const {
  const Eigen::Index h = hidden;
  Var wv = t.param(*w), bv = t.param(*b);
  Var hs = t.constant(Matrix::Zero(h, 1));
  Var cs = t.constant(Matrix::Zero(h, 1));
  std::vector<Var> out(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const std::size_t i = reverse ? xs.size() - 1 - k : k;
    const Var in[2] = {xs[i], hs};
    Var gates = add(matmul(wv, concat_rows(in)), bv);
    Var ig = sigmoid(slice_rows(gates, 0, h));
    Var fg = sigmoid(slice_rows(gates, h, h));
    Var cand = nn::tanh(slice_rows(gates, 2 * h, h));
    Var og = sigmoid(slice_rows(gates, 3 * h, h));
    cs = add(mul(fg, cs), mul(ig, cand));
    hs = mul(og, nn::tanh(cs));
    out[i] = hs;
  }
  return out;
}

Gru Gru::declare(ParameterSet& ps, const std::string& name, Eigen::Index in, Eigen::Index hidden) {
  Gru g;
  g.w = &ps.add(name + ".w", 3 * hidden, in);
  g.u = &ps.add(name + ".u", 2 * hidden, hidden);
  g.uh = &ps.add(name + ".uh", hidden, hidden);
  g.b = &ps.add(name + ".b", 3 * hidden, 1);
  g.hidden = hidden;
  return g;
}

Var Gru::step(Tape& t, Var x, Var h) const {
  const Eigen::Index n = hidden;
  Var wx = add(matmul(t.param(*w), x), t.param(*b));
  Var uzr = matmul(t.param(*u), h);
  Var z = sigmoid(add(slice_rows(wx, 0, n), slice_rows(uzr, 0, n)));
  Var r = sigmoid(add(slice_rows(wx, n, n), slice_rows(uzr, n, n)));
  Var cand = nn::tanh(add(slice_rows(wx, 2 * n, n), matmul(t.param(*uh), mul(r, h))));
  return add(mul(one_minus(z), h), mul(z, cand));
}

std::vector<Var> Gru::run(Tape& t, const std::vector<Var>& xs, bool reverse) const {
  Var h = t.constant(Matrix::Zero(hidden, 1));
  std::vector<Var> out(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const std::size_t i = reverse ? xs.size() - 1 - k : k;
    h = step(t, xs[i], h);
    out[i] = h;
  }
  return out;
}

GradCheckResult check_gradients(ParameterSet& params, const std::function<double()>& loss,
                                std::size_t n_probes, Rng& rng, double step, double floor) {
  GradCheckResult res;
  const std::size_t total = params.num_scalars();
  std::vector<std::size_t> idx(total);
  for (std::size_t i = 0; i < total; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(n_probes, total));
  for (std::size_t k : idx) {
    double& x = params.scalar(k);
    const double saved = x;
    x = saved + step;
    const double up = loss();
    x = saved - step;
    const double down = loss();
    x = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double analytic = params.grad_scalar(k);
    const double rel = std::fabs(analytic - numeric) /
                       std::max({std::fabs(analytic), std::fabs(numeric), floor});
    if (rel >= res.max_relative_error) {
      res.max_relative_error = rel;
      res.worst_index = k;
      res.analytic_at_worst = analytic;
      res.numeric_at_worst = numeric;
    }
    ++res.probes;
  }
  return res;
}

}  // namespace bnmt::nn
