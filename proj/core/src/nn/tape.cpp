#include "bnmt/nn/tape.hpp"

#include <algorithm>
#include <cmath>

#include "bnmt/common/error.hpp"

namespace bnmt::nn {

void Tape::clear() {
  nodes_.clear();
  param_nodes_.clear();
}

const Matrix& Tape::value(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.external ? *n.external : n.value;
}

Var Tape::push(Matrix value, Backward backward) {
  Node n;
  n.value = std::move(value);
  if (record_) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var{this, it->second};
  Node n;
  n.external = &p.value;
  n.sink = &p.grad;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_[&p] = id;
  return Var{this, id};
}

Var Tape::constant(Matrix value) { return push(std::move(value), nullptr); }

Var Tape::lookup(Parameter& table, int index) {
  if (index < 0 || index >= table.value.cols()) throw UsageError("embedding index out of range");
  Parameter* t = &table;
  return push(table.value.col(index), [t, index](Tape&, const Matrix& g, const Matrix&) {
    if (t->grad.size() == 0) t->grad = Matrix::Zero(t->value.rows(), t->value.cols());
    t->grad.col(index) += g;
  });
}

void Tape::accumulate(int id, const Matrix& g) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.sink) {
    if (n.sink->size() == 0) *n.sink = Matrix::Zero(n.external->rows(), n.external->cols());
    *n.sink += g;
    return;
  }
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(std::span<const std::pair<Var, double>> seeds) {
  if (!record_) throw UsageError("backward on a tape that does not record");
  int top = -1;
  for (const auto& [v, s] : seeds) {
    accumulate(v.id, Matrix::Constant(v.rows(), v.cols(), s));
    top = std::max(top, v.id);
  }
  for (int i = top; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.size() == 0 || !n.backward) continue;
    Matrix g = std::move(n.grad);
    n.grad = Matrix();
    n.backward(*this, g, n.value);
  }
}

void Tape::backward(Var root, double seed) {
  const std::pair<Var, double> s{root, seed};
  backward(std::span(&s, 1));
}

namespace {

void same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw UsageError(std::string(op) + ": shape mismatch");
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw UsageError("matmul: inner dimensions differ");
  Tape& t = *a.tape;
  return t.push(a.value() * b.value(), [a, b](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a.id, g * b.value().transpose());
    t.accumulate(b.id, a.value().transpose() * g);
  });
}

Var add(Var a, Var b) {
  Tape& t = *a.tape;
  if (b.cols() == 1 && a.cols() > 1 && a.rows() == b.rows()) {
    return t.push(a.value().colwise() + b.value().col(0), [a, b](Tape& t, const Matrix& g, const Matrix&) {
      t.accumulate(a.id, g);
      t.accumulate(b.id, g.rowwise().sum());
    });
  }
  same_shape(a, b, "add");
  return t.push(a.value() + b.value(), [a, b](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a.id, g);
    t.accumulate(b.id, g);
  });
}

Var sub(Var a, Var b) {
  same_shape(a, b, "sub");
  return a.tape->push(a.value() - b.value(), [a, b](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a.id, g);
    t.accumulate(b.id, -g);
  });
}

Var mul(Var a, Var b) {
  same_shape(a, b, "mul");
  return a.tape->push(a.value().cwiseProduct(b.value()), [a, b](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a.id, g.cwiseProduct(b.value()));
    t.accumulate(b.id, g.cwiseProduct(a.value()));
  });
}

Var scale(Var a, double s) {
  return a.tape->push(a.value() * s, [a, s](Tape& t, const Matrix& g, const Matrix&) { t.accumulate(a.id, g * s); });
}

Var one_minus(Var a) {
  return a.tape->push((1.0 - a.value().array()).matrix(),
                      [a](Tape& t, const Matrix& g, const Matrix&) { t.accumulate(a.id, -g); });
}

Var mul_const(Var a, const Matrix& c) {
  if (a.rows() != c.rows() || a.cols() != c.cols()) throw UsageError("mul_const: shape mismatch");
  return a.tape->push(a.value().cwiseProduct(c),
                      [a, c](Tape& t, const Matrix& g, const Matrix&) { t.accumulate(a.id, g.cwiseProduct(c)); });
}

Var tanh(Var a) {
  return a.tape->push(a.value().array().tanh().matrix(),
                      [a](Tape& t, const Matrix& g, const Matrix& y) {
                        t.accumulate(a.id, (g.array() * (1.0 - y.array().square())).matrix());
                      });
}

Var sigmoid(Var a) {
  Matrix y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return a.tape->push(std::move(y), [a](Tape& t, const Matrix& g, const Matrix& y) {
    t.accumulate(a.id, (g.array() * y.array() * (1.0 - y.array())).matrix());
  });
}

Var leaky_relu(Var a, double slope) {
  const Matrix& x = a.value();
  Matrix y = x.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
  return a.tape->push(std::move(y), [a, slope](Tape& t, const Matrix& g, const Matrix&) {
    const Matrix& x = a.value();
    t.accumulate(a.id, g.binaryExpr(x, [slope](double gv, double v) { return v > 0.0 ? gv : slope * gv; }));
  });
}

Var transpose(Var a) {
  return a.tape->push(a.value().transpose(), [a](Tape& t, const Matrix& g, const Matrix&) {
    t.accumulate(a.id, g.transpose());
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw UsageError("concat_rows: nothing to concatenate");
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts[0].cols();
  for (const Var& p : parts) {
    if (p.cols() != cols) throw UsageError("concat_rows: column counts differ");
    rows += p.rows();
  }
  Matrix y(rows, cols);
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    y.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  std::vector<Var> keep(parts.begin(), parts.end());
  return parts[0].tape->push(std::move(y), [keep](Tape& t, const Matrix& g, const Matrix&) {
    Eigen::Index r = 0;
    for (const Var& p : keep) {
      t.accumulate(p.id, g.middleRows(r, p.rows()));
      r += p.rows();
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw UsageError("concat_cols: nothing to concatenate");
  Eigen::Index cols = 0;
  const Eigen::Index rows = parts[0].rows();
  for (const Var& p : parts) {
    if (p.rows() != rows) throw UsageError("concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix y(rows, cols);
  Eigen::Index c = 0;
  for (const Var& p : parts) {
    y.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  std::vector<Var> keep(parts.begin(), parts.end());
  return parts[0].tape->push(std::move(y), [keep](Tape& t, const Matrix& g, const Matrix&) {
    Eigen::Index c = 0;
    for (const Var& p : keep) {
      t.accumulate(p.id, g.middleCols(c, p.cols()));
      c += p.cols();
    }
  });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index n) {
  if (start < 0 || n < 0 || start + n > a.rows()) throw UsageError("slice_rows: out of range");
  return a.tape->push(a.value().middleRows(start, n),
                      [a, start, n](Tape& t, const Matrix& g, const Matrix&) {
                        Matrix full = Matrix::Zero(a.rows(), a.cols());
                        full.middleRows(start, n) = g;
                        t.accumulate(a.id, full);
                      });
}

Var column(Var a, Eigen::Index j) {
  if (j < 0 || j >= a.cols()) throw UsageError("column: out of range");
  return a.tape->push(a.value().col(j), [a, j](Tape& t, const Matrix& g, const Matrix&) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    full.col(j) = g;
    t.accumulate(a.id, full);
  });
}

Var unfold(Var a, Eigen::Index width) {
  const Eigen::Index d = a.rows(), n = a.cols() - width + 1;
  if (width < 1 || n < 1) throw UsageError("unfold: window wider than the sequence");
  const Matrix& x = a.value();
  Matrix y(d * width, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index w = 0; w < width; ++w) y.block(w * d, c, d, 1) = x.col(c + w);
  }
  return a.tape->push(std::move(y), [a, width, d, n](Tape& t, const Matrix& g, const Matrix&) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    for (Eigen::Index c = 0; c < n; ++c) {
      for (Eigen::Index w = 0; w < width; ++w) full.col(c + w) += g.block(w * d, c, d, 1);
    }
    t.accumulate(a.id, full);
  });
}

Var max_over_columns(Var a) {
  const Matrix& x = a.value();
  Matrix y(x.rows(), 1);
  std::vector<Eigen::Index> arg(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    y(r, 0) = x.row(r).maxCoeff(&arg[static_cast<std::size_t>(r)]);
  }
  return a.tape->push(std::move(y), [a, arg](Tape& t, const Matrix& g, const Matrix&) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) full(r, arg[static_cast<std::size_t>(r)]) = g(r, 0);
    t.accumulate(a.id, full);
  });
}

Var softmax(Var a) {
  if (a.cols() != 1) throw UsageError("softmax expects a column");
  const Matrix& x = a.value();
  Matrix y = (x.array() - x.maxCoeff()).exp().matrix();
  y /= y.sum();
  return a.tape->push(std::move(y), [a](Tape& t, const Matrix& g, const Matrix& y) {
    const double dot = g.cwiseProduct(y).sum();
    t.accumulate(a.id, (y.array() * (g.array() - dot)).matrix());
  });
}

Var log_softmax(Var a) {
  if (a.cols() != 1) throw UsageError("log_softmax expects a column");
  const Matrix& x = a.value();
  const double m = x.maxCoeff();
  const double lse = m + std::log((x.array() - m).exp().sum());
  return a.tape->push((x.array() - lse).matrix(), [a](Tape& t, const Matrix& g, const Matrix& y) {
    t.accumulate(a.id, (g.array() - y.array().exp() * g.sum()).matrix());
  });
}

Var pick(Var a, Eigen::Index row, Eigen::Index col) {
  if (row < 0 || row >= a.rows() || col < 0 || col >= a.cols()) throw UsageError("pick: out of range");
  return a.tape->push(Matrix::Constant(1, 1, a.value()(row, col)),
                      [a, row, col](Tape& t, const Matrix& g, const Matrix&) {
                        Matrix full = Matrix::Zero(a.rows(), a.cols());
                        full(row, col) = g(0, 0);
                        t.accumulate(a.id, full);
                      });
}

Var sum(Var a) {
  return a.tape->push(Matrix::Constant(1, 1, a.value().sum()),
                      [a](Tape& t, const Matrix& g, const Matrix&) {
                        t.accumulate(a.id, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
                      });
}

}  // namespace bnmt::nn
