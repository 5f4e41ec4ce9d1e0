#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bnmt/common/rng.hpp"

namespace bnmt::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

// Named parameters in insertion order with stable addresses.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet& other);
  ParameterSet& operator=(const ParameterSet& other);
  ParameterSet(ParameterSet&&) noexcept = default;
  ParameterSet& operator=(ParameterSet&&) noexcept = default;

  Parameter& add(const std::string& name, Eigen::Index rows, Eigen::Index cols);
  Parameter& operator[](const std::string& name);
  const Parameter& operator[](const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::vector<std::unique_ptr<Parameter>>& all() { return params_; }
  const std::vector<std::unique_ptr<Parameter>>& all() const { return params_; }

  // Uniform in [-s, s] with s = sqrt(6 / (rows + cols)); vectors get zeros.
  void init_glorot(Rng& rng);
  void init_uniform(double scale, Rng& rng);

  void zero_grad();
  double grad_norm() const;
  // Rescales gradients to max_norm when their norm exceeds it; returns the
  // norm before clipping.
  double clip_grad_norm(double max_norm);
  std::size_t num_scalars() const;
  bool all_finite() const;

  // Flat views across all parameters, in insertion order.
  double& scalar(std::size_t k);
  double grad_scalar(std::size_t k) const;

  // Text dump: "name rows cols" then the values in column-major order,
  // 17 significant digits so a round trip is exact.
  void save(std::ostream& os) const;
  // Shapes and names must match the parameters already declared.
  void load(std::istream& is);

 private:
  std::pair<Parameter*, Eigen::Index> locate(std::size_t k) const;

  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // l2, added to the gradient
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}
  AdamConfig& config() { return cfg_; }
  // Ascends when `maximize`, otherwise descends.
  void step(ParameterSet& params, bool maximize = false);
  long steps() const { return t_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<std::pair<Matrix, Matrix>> moments_;
};

void sgd_step(ParameterSet& params, double lr, bool maximize = false);

}  // namespace bnmt::nn
