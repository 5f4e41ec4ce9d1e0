#include "bnmt/nn/parameters.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "bnmt/common/error.hpp"

namespace bnmt::nn {

ParameterSet::ParameterSet(const ParameterSet& other) { *this = other; }

ParameterSet& ParameterSet::operator=(const ParameterSet& other) {
  if (this == &other) return *this;
  params_.clear();
  for (const auto& p : other.params_) params_.push_back(std::make_unique<Parameter>(*p));
  index_ = other.index_;
  return *this;
}

Parameter& ParameterSet::add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  if (index_.count(name)) throw UsageError("duplicate parameter " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = Matrix::Zero(rows, cols);
  p->grad = Matrix::Zero(rows, cols);
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterSet::operator[](const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw UsageError("unknown parameter " + name);
  return *params_[it->second];
}

const Parameter& ParameterSet::operator[](const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw UsageError("unknown parameter " + name);
  return *params_[it->second];
}

void ParameterSet::init_glorot(Rng& rng) {
  for (auto& p : params_) {
    if (p->value.cols() == 1) {
      p->value.setZero();
      continue;
    }
    const double s = std::sqrt(6.0 / static_cast<double>(p->value.rows() + p->value.cols()));
    for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] = s * (2.0 * uniform01(rng) - 1.0);
  }
}

void ParameterSet::init_uniform(double scale, Rng& rng) {
  for (auto& p : params_) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      p->value.data()[i] = scale * (2.0 * uniform01(rng) - 1.0);
    }
  }
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p->grad = Matrix::Zero(p->value.rows(), p->value.cols());
}

double ParameterSet::grad_norm() const {
  double s = 0.0;
  for (const auto& p : params_) {
    if (p->grad.size()) s += p->grad.squaredNorm();
  }
  return std::sqrt(s);
}

double ParameterSet::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (auto& p : params_) {
      if (p->grad.size()) p->grad *= f;
    }
  }
  return norm;
}

std::size_t ParameterSet::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

bool ParameterSet::all_finite() const {
  for (const auto& p : params_) {
    if (!p->value.allFinite()) return false;
  }
  return true;
}

std::pair<Parameter*, Eigen::Index> ParameterSet::locate(std::size_t k) const {
  for (const auto& p : params_) {
    const auto n = static_cast<std::size_t>(p->value.size());
    if (k < n) return {p.get(), static_cast<Eigen::Index>(k)};
    k -= n;
  }
  throw UsageError("flat parameter index out of range");
}

double& ParameterSet::scalar(std::size_t k) {
  auto [p, i] = locate(k);
  return p->value.data()[i];
}

double ParameterSet::grad_scalar(std::size_t k) const {
  auto [p, i] = locate(k);
  return p->grad.size() ? p->grad.data()[i] : 0.0;
}

void ParameterSet::save(std::ostream& os) const {
  os << "params " << params_.size() << '\n';
  os << std::setprecision(17);
  for (const auto& p : params_) {
    os << p->name << ' ' << p->value.rows() << ' ' << p->value.cols() << '\n';
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      os << p->value.data()[i] << (i + 1 == p->value.size() ? '\n' : ' ');
    }
    if (p->value.size() == 0) os << '\n';
  }
}

void ParameterSet::load(std::istream& is) {
  std::string tag;
  std::size_t n = 0;
  if (!(is >> tag >> n) || tag != "params") throw DataError("checkpoint: missing parameter header");
  if (n != params_.size()) {
    throw DataError("checkpoint: expected " + std::to_string(params_.size()) + " tensors, found " +
                    std::to_string(n));
  }
  for (auto& p : params_) {
    std::string name;
    Eigen::Index rows = 0, cols = 0;
    if (!(is >> name >> rows >> cols)) throw DataError("checkpoint: truncated tensor header");
    if (name != p->name || rows != p->value.rows() || cols != p->value.cols()) {
      throw DataError("checkpoint: tensor " + name + " does not match " + p->name);
    }
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      if (!(is >> p->value.data()[i])) throw DataError("checkpoint: truncated values of " + name);
    }
  }
}

void Adam::step(ParameterSet& params, bool maximize) {
  auto& all = params.all();
  if (moments_.size() != all.size()) {
    moments_.clear();
    for (const auto& p : all) {
      moments_.emplace_back(Matrix::Zero(p->value.rows(), p->value.cols()),
                            Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const double sign = maximize ? 1.0 : -1.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    Parameter& p = *all[i];
    if (p.grad.size() == 0) continue;
    Matrix g = p.grad;
    if (cfg_.weight_decay > 0.0) g += sign * -cfg_.weight_decay * p.value;
    auto& [m, v] = moments_[i];
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    p.value.array() += sign * cfg_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.eps);
  }
}

void sgd_step(ParameterSet& params, double lr, bool maximize) {
  const double sign = maximize ? 1.0 : -1.0;
  for (auto& p : params.all()) {
    if (p->grad.size()) p->value += sign * lr * p->grad;
  }
}

}  // namespace bnmt::nn
