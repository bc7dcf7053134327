#pragma once

#include "cl4srec/encoder.hpp"

#include <cstdint>

namespace cl4srec {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <class T>
struct OptimizerState {
  EncoderParams<T> m;
  EncoderParams<T> v;
  std::int64_t step = 0;

  static OptimizerState zeros(const EncoderHyper& hyper) {
    OptimizerState s;
    s.m = EncoderParams<T>::zeros(hyper);
    s.v = EncoderParams<T>::zeros(hyper);
    s.m.set_zero();
    s.v.set_zero();
    return s;
  }
};

/// True when every gradient entry is finite.
template <class T>
bool all_finite(const EncoderParams<T>& grads);

/// One bias-corrected Adam update. Returns false, leaving params and state
/// untouched, when a gradient entry is not finite.
template <class T>
bool adam_step(EncoderParams<T>& params, const EncoderParams<T>& grads, OptimizerState<T>& state, double lr,
               const AdamConfig& config = {});

/// Scalar Adam on a single tensor; used by adam_step and exposed for tests.
template <class T>
void adam_update(Mat<T>& param, const Mat<T>& grad, Mat<T>& m, Mat<T>& v, std::int64_t step, double lr,
                 const AdamConfig& config);

/// lr * max(floor, 1 - step / total_steps).
double linear_decay(double base_lr, std::int64_t step, std::int64_t total_steps, double floor_ratio);

}  // namespace cl4srec
