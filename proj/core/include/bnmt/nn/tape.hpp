#pragma once

#include <functional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bnmt/nn/parameters.hpp"

namespace bnmt::nn {

class Tape;

// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  double scalar() const { return value()(0, 0); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

// Reverse-mode recorder.  Values are computed eagerly; when recording is off
// no backward closures are kept, which is the inference path.
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }
  void clear();

  // Parameters enter once per tape; gradients flow straight into p.grad.
  Var param(Parameter& p);
  Var constant(Matrix value);
  // Column `index` of an embedding table stored one token per column.
  Var lookup(Parameter& table, int index);

  // Seeds each root with the given upstream gradient and propagates.
  void backward(std::span<const std::pair<Var, double>> seeds);
  void backward(Var root, double seed = 1.0);

  const Matrix& value(int id) const;

  // Used by operation implementations.
  // Receives the upstream gradient and the node's own value.
  using Backward = std::function<void(Tape&, const Matrix& grad, const Matrix& y)>;
  Var push(Matrix value, Backward backward);
  void accumulate(int id, const Matrix& g);

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Matrix* sink = nullptr;  // parameter gradient
    Matrix grad;
    Backward backward;
  };

  bool record_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
};

inline const Matrix& Var::value() const { return tape->value(id); }

Var matmul(Var a, Var b);
// Same shapes, or b a column broadcast across the columns of a.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double s);
Var one_minus(Var a);
Var mul_const(Var a, const Matrix& c);  // elementwise by a constant
Var tanh(Var a);
Var sigmoid(Var a);
Var leaky_relu(Var a, double slope = 0.01);
Var transpose(Var a);

Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index n);
Var column(Var a, Eigen::Index j);
// Columns t..t+width-1 stacked into one column, for every valid t.
Var unfold(Var a, Eigen::Index width);
// Row-wise maximum over columns.
Var max_over_columns(Var a);

Var softmax(Var column);
Var log_softmax(Var column);
Var pick(Var a, Eigen::Index row, Eigen::Index col = 0);
Var sum(Var a);

}  // namespace bnmt::nn
