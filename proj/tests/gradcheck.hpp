#pragma once

// Tiny joint-objective fixture shared by the encoder unit tests and the
// acceptance binary: main loss over two windows plus lambda times the
// contrastive loss over two pairs of views, all in double precision.

#include "oracles.hpp"

#include "cl4srec/objective.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gradcheck {

using namespace cl4srec;

inline EncoderHyper tiny_hyper() {
  EncoderHyper h;
  h.num_items = 5;
  h.d = 4;
  h.heads = 2;
  h.layers = 1;
  h.max_len = 3;
  h.d_ff = 4;
  h.dropout = 0.2;
  return h;
}

inline EncoderParams<double> random_params(const EncoderHyper& hyper, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 0.5);
  auto p = EncoderParams<double>::zeros(hyper);
  p.for_each([&](const std::string& name, Mat<double>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng) + (name.find("gain") != std::string::npos ? 1.0 : 0.0);
  });
  return p;
}

struct Fixture {
  EncoderHyper hyper = tiny_hyper();
  double lambda = 0.5;
  std::uint64_t dropout_seed = 11;

  /// Returns L_main + lambda * L_cl; fills `grads` (zeroed first) if given.
  double loss(const EncoderParams<double>& params, EncoderParams<double>* grads) const {
    Rng rng(dropout_seed);
    const auto mask = hyper.mask_id();
    const std::vector<std::vector<ItemId>> inputs = {{1, 2, 3}, {2, 5}};
    const std::vector<std::vector<PredictionTarget>> per_window = {
        {{0, 0, 2, {5}}, {0, 1, 3, {1}}, {0, 2, 4, {2}}},
        {{1, 1, 5, {4}}, {1, 2, 3, {1}}},
    };
    std::vector<SequenceStates<double>> main_states;
    std::vector<PredictionTarget> targets;
    for (std::size_t w = 0; w < inputs.size(); ++w) {
      main_states.push_back(forward(make_window(inputs[w], 3), params, hyper, Mode::Train, &rng));
      targets.insert(targets.end(), per_window[w].begin(), per_window[w].end());
    }
    const std::vector<std::vector<ItemId>> view_items = {{1, mask, 3}, {2, 3, 4}, {5, 3}, {2, mask}};
    std::vector<SequenceStates<double>> views;
    for (const auto& v : view_items) views.push_back(forward(make_window(v, 3), params, hyper, Mode::Train, &rng));

    std::vector<const Mat<double>*> outs;
    for (const auto& s : main_states) outs.push_back(&s.output);
    std::vector<Mat<double>> d_main;
    for (const auto& s : main_states) d_main.push_back(Mat<double>::Zero(s.output.rows(), s.output.cols()));
    if (grads) grads->set_zero();
    const double lm = main_loss<double>(outs, targets, params.item_emb, grads ? &d_main : nullptr,
                                        grads ? &grads->item_emb : nullptr);

    Mat<double> reprs(static_cast<Eigen::Index>(views.size()), hyper.d);
    for (std::size_t i = 0; i < views.size(); ++i) reprs.row(static_cast<Eigen::Index>(i)) = views[i].representation();
    Mat<double> d_reprs;
    const double lc = contrastive_loss<double>(reprs, {true}, grads ? &d_reprs : nullptr);

    if (grads) {
      for (std::size_t i = 0; i < main_states.size(); ++i) backward(main_states[i], d_main[i], params, hyper, *grads);
      for (std::size_t i = 0; i < views.size(); ++i) {
        Mat<double> d_out = Mat<double>::Zero(views[i].output.rows(), views[i].output.cols());
        d_out.row(d_out.rows() - 1) = lambda * d_reprs.row(static_cast<Eigen::Index>(i));
        backward(views[i], d_out, params, hyper, *grads);
      }
    }
    return lm + lambda * lc;
  }
};

struct Result {
  double max_rel_error = 0;
  std::string worst;
  std::size_t checked = 0;
};

/// Relative error |a - b| / max(|a|, |b|); entries where both sides are
/// below `floor` in magnitude compare absolutely against `floor`.
inline Result run(std::uint64_t param_seed = 3, double step = 1e-5, double floor = 1e-7) {
  Fixture fx;
  auto params = random_params(fx.hyper, param_seed);
  auto grads = EncoderParams<double>::zeros(fx.hyper);
  fx.loss(params, &grads);
  Result r;
  oracle::finite_differences(
      params, grads, [&](const EncoderParams<double>& p) { return fx.loss(p, nullptr); },
      [&](const std::string& name, double fd, double an) {
        const double scale = std::max({std::abs(fd), std::abs(an), floor});
        const double rel = std::abs(fd - an) / scale;
        ++r.checked;
        if (rel > r.max_rel_error) {
          r.max_rel_error = rel;
          r.worst = name;
        }
      },
      step);
  return r;
}

}  // namespace gradcheck
