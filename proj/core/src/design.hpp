#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mclab/mnl.hpp"

namespace mclab::detail {

// Observations flattened into one row of parameter-space regressors per
// available alternative.
struct design {
  std::size_t n_params{0};
  std::vector<std::size_t> first_row;  // per observation, plus end sentinel
  std::vector<std::size_t> chosen_row;
  std::vector<std::uint64_t> ids;
  std::vector<double> x;  // rows * n_params

  std::size_t n_obs() const { return ids.size(); }
  double const* row(std::size_t r) const { return x.data() + r * n_params; }
};

design compile(std::span<observation const> data, coefficient_table const& c);

likelihood evaluate(design const& d, std::vector<double> const& beta,
                    evaluation_options const& opts);

}  // namespace mclab::detail
