#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace cl4srec {

/// Dense item id. 0 is padding, 1..|V| are catalog items, |V|+1 is [mask].
using ItemId = std::uint32_t;
/// Dense user id, contiguous from 1.
using UserId = std::uint32_t;

inline constexpr ItemId kPaddingId = 0;

/// Every stochastic component draws from this engine so a single state
/// (serializable through operator<<) determines a run.
using Rng = std::mt19937_64;

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cl4srec
