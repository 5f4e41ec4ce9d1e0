#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bnmt/nn/parameters.hpp"
#include "bnmt/nn/tape.hpp"

namespace bnmt::nn {

// y = W x + b
struct Linear {
  Parameter* w = nullptr;
  Parameter* b = nullptr;

  static Linear declare(ParameterSet& ps, const std::string& name, Eigen::Index in, Eigen::Index out);
  Linear bind(ParameterSet& ps) const;
  Var operator()(Tape& t, Var x) const;
};

// Gates stacked as [input; forget; cell; output] over the input
// concatenated with the previous hidden state.
struct Lstm {
  Parameter* w = nullptr;  // 4H x (in + H)
  Parameter* b = nullptr;  // 4H x 1, forget gate initialised to 1
  Eigen::Index hidden = 0;

  static Lstm declare(ParameterSet& ps, const std::string& name, Eigen::Index in, Eigen::Index hidden);
  // Hidden states in input order; `reverse` runs right to left.
  std::vector<Var> run(Tape& t, const std::vector<Var>& xs, bool reverse) const;
};

// z, r gates and candidate with separate input and recurrent weights.
struct Gru {
  Parameter* w = nullptr;   // 3H x in
  Parameter* u = nullptr;   // 2H x H (update, reset)
  Parameter* uh = nullptr;  // H x H (candidate)
  Parameter* b = nullptr;   // 3H x 1
  Eigen::Index hidden = 0;

  static Gru declare(ParameterSet& ps, const std::string& name, Eigen::Index in, Eigen::Index hidden);
  Var step(Tape& t, Var x, Var h) const;
  std::vector<Var> run(Tape& t, const std::vector<Var>& xs, bool reverse) const;
};

// Sets LSTM forget-gate biases to 1.
void init_lstm_bias(Lstm& l);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t probes = 0;
};

// Compares params' current gradients against central differences of `loss`
// on `n_probes` randomly chosen scalars.  Relative error is
// |a - n| / max(|a|, |n|, floor).
GradCheckResult check_gradients(ParameterSet& params, const std::function<double()>& loss,
                                std::size_t n_probes, Rng& rng, double step = 1e-4,
                                double floor = 1e-6);

}  // namespace bnmt::nn
