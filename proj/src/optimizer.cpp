#include "cl4srec/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace cl4srec {

template <class T>
bool all_finite(const EncoderParams<T>& grads) {
  bool ok = true;
  grads.for_each([&](const std::string&, const Mat<T>& g) { ok = ok && g.allFinite(); });
  return ok;
}

template <class T>
void adam_update(Mat<T>& param, const Mat<T>& grad, Mat<T>& m, Mat<T>& v, std::int64_t step, double lr,
                 const AdamConfig& c) {
  const T b1 = static_cast<T>(c.beta1), b2 = static_cast<T>(c.beta2);
  const T corr1 = static_cast<T>(1.0 - std::pow(c.beta1, static_cast<double>(step)));
  const T corr2 = static_cast<T>(1.0 - std::pow(c.beta2, static_cast<double>(step)));
  const T rate = static_cast<T>(lr), eps = static_cast<T>(c.epsilon);
  m.array() = b1 * m.array() + (T(1) - b1) * grad.array();
  v.array() = b2 * v.array() + (T(1) - b2) * grad.array().square();
  param.array() -= rate * (m.array() / corr1) / ((v.array() / corr2).sqrt() + eps);
}

template <class T>
bool adam_step(EncoderParams<T>& params, const EncoderParams<T>& grads, OptimizerState<T>& state, double lr,
               const AdamConfig& config) {
  if (!all_finite(grads)) return false;
  ++state.step;
  std::vector<Mat<T>*> p, m, v;
  std::vector<const Mat<T>*> g;
  params.for_each([&](const std::string&, Mat<T>& x) { p.push_back(&x); });
  grads.for_each([&](const std::string&, const Mat<T>& x) { g.push_back(&x); });
  state.m.for_each([&](const std::string&, Mat<T>& x) { m.push_back(&x); });
  state.v.for_each([&](const std::string&, Mat<T>& x) { v.push_back(&x); });
  for (std::size_t i = 0; i < p.size(); ++i) adam_update(*p[i], *g[i], *m[i], *v[i], state.step, lr, config);
  return true;
}

double linear_decay(double base_lr, std::int64_t step, std::int64_t total_steps, double floor_ratio) {
  if (total_steps <= 0) return base_lr;
  const double frac = 1.0 - static_cast<double>(step) / static_cast<double>(total_steps);
  return base_lr * std::max(floor_ratio, std::max(0.0, frac));
}

#define CL4SREC_INSTANTIATE(T)                                                                           \
  template bool all_finite(const EncoderParams<T>&);                                                     \
  template bool adam_step(EncoderParams<T>&, const EncoderParams<T>&, OptimizerState<T>&, double,        \
                          const AdamConfig&);                                                            \
  template void adam_update(Mat<T>&, const Mat<T>&, Mat<T>&, Mat<T>&, std::int64_t, double,              \
                            const AdamConfig&);

CL4SREC_INSTANTIATE(float)
CL4SREC_INSTANTIATE(double)
#undef CL4SREC_INSTANTIATE

}  // namespace cl4srec
