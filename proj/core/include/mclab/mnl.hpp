#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mclab/choiceset.hpp"
#include "mclab/coefficients.hpp"

namespace mclab {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// One choice situation: the variables of every alternative plus the chosen
// index. Missing variables are NaN.
struct observation {
  std::uint64_t id{0};
  mode_set available;
  std::array<std::array<double, kVariableCount>, kModeCount> x{};
  std::size_t chosen{0};

  double& at(mode m, variable v) { return x[index_of(m)][static_cast<std::size_t>(v)]; }
  double at(mode m, variable v) const {
    return x[index_of(m)][static_cast<std::size_t>(v)];
  }
};

observation blank_observation(std::uint64_t id);

// Assembles the variable vectors from a formed choice set. Throws data_error
// when the chosen mode is missing or unavailable.
observation make_observation(choice_set const& cs, household const& h,
                             person const& p, trip const& t);

// Linear utility of alternative m. Throws data_error naming the slot when an
// occupied slot's variable is missing.
double utility(observation const& obs, mode m, coefficient_table const& c);

// Logit probabilities over the available alternatives (exactly 0 elsewhere),
// computed with a max-utility shift.
std::array<double, kModeCount> probabilities(observation const& obs,
                                             coefficient_table const& c);
std::array<double, kModeCount> probabilities_from_utilities(
    std::array<double, kModeCount> const& v, mode_set available);

struct likelihood {
  double value{0.0};
  std::vector<double> gradient;
  // Row-major negative-semidefinite Hessian; empty unless requested.
  std::vector<double> hessian;
};

struct evaluation_options {
  unsigned workers{1};
  bool with_hessian{false};
};

// Log-likelihood and analytic gradient in one pass. Partial sums are formed
// over fixed-size blocks and combined in block order, so results do not
// depend on the worker count. Throws numerical_error with the observation
// id on a non-finite utility.
likelihood log_likelihood(std::span<observation const> data,
                          coefficient_table const& c,
                          evaluation_options const& opts = {});

// Equal shares over each observation's available set.
double null_log_likelihood(std::span<observation const> data);

// 1 - lnL / lnL0. Throws domain_error unless lnL0 < 0 and lnL0 <= lnL <= 0.
double mcfadden_index(double ln_l, double ln_l0);

// Inverse-CDF draw over the probabilities using a generator seeded from
// `seed`; identical seeds give identical choices.
mode simulate_choice(observation const& obs, coefficient_table const& c,
                     std::uint64_t seed);

struct estimate_options {
  int max_iterations{100};
  double gradient_tolerance{1e-6};
  double relative_tolerance{1e-10};
  int max_step_halvings{40};
  unsigned workers{1};
};

struct estimation_result {
  coefficient_table fitted;
  std::vector<double> std_errors;
  std::vector<double> t_stats;
  double log_likelihood{0.0};
  double null_log_likelihood{0.0};
  double mcfadden{0.0};
  int iterations{0};
  bool converged{false};
  std::string status;
  std::vector<double> trajectory;  // lnL at start and after every iteration
  std::size_t n_observations{0};
  std::size_t gradient_fallbacks{0};
};

// Newton-Raphson with analytic Hessian and step halving (lnL never
// decreases); falls back to gradient ascent when the Hessian is not negative
// definite. Throws identification_error naming collinear parameters,
// not_converged after max_iterations.
estimation_result estimate(std::span<observation const> data,
                           coefficient_table const& init,
                           estimate_options const& opts = {});

}  // namespace mclab
