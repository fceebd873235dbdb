#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "design.hpp"
#include "mclab/error.hpp"
#include "mclab/mnl.hpp"

namespace mclab {

namespace {

using matrix = Eigen::MatrixXd;
using vec = Eigen::VectorXd;

// Within-observation variation of the regressors (uniform weights over the
// available set). A parameter is unidentified iff it lies in the null space.
void check_identification(detail::design const& d,
                          coefficient_table const& c) {
  auto const P = d.n_params;
  matrix m = matrix::Zero(P, P);
  vec mean(P);
  for (auto n = std::size_t{0}; n != d.n_obs(); ++n) {
    auto const r0 = d.first_row[n];
    auto const r1 = d.first_row[n + 1];
    mean.setZero();
    for (auto r = r0; r != r1; ++r) {
      mean += Eigen::Map<vec const>(d.row(r), P);
    }
    mean /= static_cast<double>(r1 - r0);
    for (auto r = r0; r != r1; ++r) {
      vec const dx = Eigen::Map<vec const>(d.row(r), P) - mean;
      m.noalias() += dx * dx.transpose();
    }
  }

  std::vector<std::string> bad;
  vec scale(P);
  for (auto k = std::size_t{0}; k != P; ++k) {
    auto const s = m(k, k);
    if (!(s > 0.0)) {
      bad.push_back(c.parameters[k].name);
      scale(k) = 0.0;
    } else {
      scale(k) = 1.0 / std::sqrt(s);
    }
  }
  if (bad.empty()) {
    matrix const r = scale.asDiagonal() * m * scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<matrix> es{r};
    auto const& ev = es.eigenvalues();
    for (auto i = Eigen::Index{0}; i != ev.size(); ++i) {
      if (ev(i) > 1e-10 * std::max(1.0, ev(ev.size() - 1))) {
        continue;
      }
      vec const v = es.eigenvectors().col(i);
      for (auto k = std::size_t{0}; k != P; ++k) {
        auto const& name = c.parameters[k].name;
        if (std::abs(v(static_cast<Eigen::Index>(k))) > 1e-3 &&
            std::find(bad.begin(), bad.end(), name) == bad.end()) {
          bad.push_back(name);
        }
      }
    }
  }
  if (!bad.empty()) {
    std::string list;
    for (auto const& b : bad) {
      list += (list.empty() ? "" : ", ") + b;
    }
    throw identification_error{"parameters not identified: " + list, bad};
  }
}

double max_abs(std::vector<double> const& g) {
  auto m = 0.0;
  for (auto const x : g) {
    m = std::max(m, std::abs(x));
  }
  return m;
}

matrix as_matrix(std::vector<double> const& h, std::size_t P) {
  return Eigen::Map<matrix const>(h.data(), static_cast<Eigen::Index>(P),
                                  static_cast<Eigen::Index>(P));
}

}  // namespace

estimation_result estimate(std::span<observation const> data,
                           coefficient_table const& init,
                           estimate_options const& opts) {
  init.validate();
  if (data.empty()) {
    throw data_error{"no observations to estimate on"};
  }
  auto const d = detail::compile(data, init);
  auto const P = d.n_params;
  check_identification(d, init);

  evaluation_options const eo{opts.workers, true};
  auto beta = init.values();
  auto ev = detail::evaluate(d, beta, eo);

  estimation_result res;
  res.trajectory.push_back(ev.value);
  res.n_observations = d.n_obs();

  auto const try_eval = [&](std::vector<double> const& b)
      -> std::optional<likelihood> {
    try {
      return detail::evaluate(d, b, eo);
    } catch (numerical_error const&) {
      return std::nullopt;
    }
  };

  while (true) {
    if (max_abs(ev.gradient) < opts.gradient_tolerance) {
      res.converged = true;
      res.status = "converged: gradient below tolerance";
      break;
    }
    if (res.iterations >= opts.max_iterations) {
      break;
    }

    vec const g = Eigen::Map<vec const>(ev.gradient.data(),
                                        static_cast<Eigen::Index>(P));
    matrix const neg_h = -as_matrix(ev.hessian, P);
    vec step;
    Eigen::LLT<matrix> llt{neg_h};
    if (llt.info() == Eigen::Success) {
      step = llt.solve(g);
    } else {
      step = g / std::max(1.0, g.norm());
      ++res.gradient_fallbacks;
    }

    auto t = 1.0;
    std::optional<likelihood> next;
    std::vector<double> cand(P);
    for (auto h = 0; h <= opts.max_step_halvings; ++h, t *= 0.5) {
      for (auto k = std::size_t{0}; k != P; ++k) {
        cand[k] = beta[k] + t * step(static_cast<Eigen::Index>(k));
      }
      next = try_eval(cand);
      if (next && next->value >= ev.value) {
        break;
      }
      next.reset();
    }
    if (!next) {
      // no representable improvement along the step: at the optimum to
      // working precision iff the predicted gain is negligible
      auto const gain = 0.5 * g.dot(step);
      if (gain <= opts.relative_tolerance * std::max(1.0, std::abs(ev.value))) {
        res.converged = true;
        res.status = "converged: no further improvement";
        break;
      }
      throw not_converged{"line search failed after " +
                              std::to_string(opts.max_step_halvings) +
                              " halvings",
                          res.trajectory};
    }

    ++res.iterations;
    auto const rel = std::abs(next->value - ev.value) /
                     std::max(std::abs(ev.value), 1e-300);
    beta = cand;
    ev = std::move(*next);
    res.trajectory.push_back(ev.value);
    if (rel < opts.relative_tolerance &&
        max_abs(ev.gradient) < std::sqrt(opts.gradient_tolerance)) {
      res.converged = true;
      res.status = "converged: relative change below tolerance";
      break;
    }
  }
  if (!res.converged) {
    throw not_converged{"no convergence after " +
                            std::to_string(opts.max_iterations) +
                            " iterations",
                        res.trajectory};
  }

  res.fitted = init;
  res.fitted.set_values(beta);
  res.log_likelihood = ev.value;
  res.null_log_likelihood = null_log_likelihood(data);
  res.mcfadden = mcfadden_index(std::min(res.log_likelihood, 0.0),
                                res.null_log_likelihood);

  matrix const neg_h = -as_matrix(ev.hessian, P);
  Eigen::LDLT<matrix> ldlt{neg_h};
  matrix const cov = ldlt.solve(matrix::Identity(static_cast<Eigen::Index>(P),
                                                 static_cast<Eigen::Index>(P)));
  res.std_errors.resize(P);
  res.t_stats.resize(P);
  for (auto k = std::size_t{0}; k != P; ++k) {
    auto const var = cov(static_cast<Eigen::Index>(k),
                         static_cast<Eigen::Index>(k));
    res.std_errors[k] = var > 0.0 ? std::sqrt(var)
                                  : std::numeric_limits<double>::quiet_NaN();
    res.t_stats[k] = beta[k] / res.std_errors[k];
    res.fitted.parameters[k].t_stat = res.t_stats[k];
  }
  return res;
}

}  // namespace mclab
