#include "mclab/mnl.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "design.hpp"
#include "mclab/error.hpp"

namespace mclab {

namespace {

constexpr std::size_t kBlockSize = 512;

std::string slot_text(mode m, variable v) {
  return "(" + std::string{name_of(m)} + ", " + std::string{name_of(v)} + ")";
}

}  // namespace

observation blank_observation(std::uint64_t id) {
  observation o;
  o.id = id;
  for (auto& row : o.x) {
    row.fill(kMissing);
  }
  return o;
}

observation make_observation(choice_set const& cs, household const& h,
                             person const& p, trip const& t) {
  auto o = blank_observation(to_int(cs.trip));
  o.available = cs.available;
  auto const b = [](bool x) { return x ? 1.0 : 0.0; };
  for (auto const m : kAllModes) {
    if (cs.service.test(index_of(m))) {
      auto const& a = cs.alternatives[index_of(m)];
      o.at(m, variable::travel_time) = a.time_h;
      o.at(m, variable::transfers) = a.transfers;
      o.at(m, variable::access_distance) = a.access_mi;
      o.at(m, variable::egress_distance) = a.egress_mi;
      o.at(m, variable::fare) = a.fare;
    }
    o.at(m, variable::household_members) = h.n_members;
    o.at(m, variable::household_vehicles) = h.n_vehicles;
    o.at(m, variable::female) = b(p.is_female);
    o.at(m, variable::income) = h.income * 1e-5;
    o.at(m, variable::city_suburb_rush) = b(cs.flags.city_suburb_rush_in_tour);
    o.at(m, variable::cbd_rush) = b(cs.flags.dest_cbd_rush);
    o.at(m, variable::shopping) = b(t.trip_purpose == purpose::shop);
    o.at(m, variable::work) = b(t.trip_purpose == purpose::work);
    o.at(m, variable::weekend) = b(cs.flags.is_weekend);
    o.at(m, variable::dest_within_walk) = b(cs.flags.dest_within_walk);
    o.at(m, variable::age_over_65) = b(cs.flags.age_over_65);
    o.at(m, variable::constant) = 1.0;
  }
  if (!cs.chosen) {
    throw data_error{"trip " + std::to_string(o.id) + " has no chosen mode"};
  }
  if (!cs.available.test(index_of(*cs.chosen))) {
    throw data_error{"chosen mode of trip " + std::to_string(o.id) +
                     " is not available"};
  }
  o.chosen = index_of(*cs.chosen);
  return o;
}

double utility(observation const& obs, mode m, coefficient_table const& c) {
  auto v = 0.0;
  for (auto const& p : c.parameters) {
    for (auto const& s : p.slots) {
      if (s.m != m) {
        continue;
      }
      auto const x = obs.at(s.m, s.v);
      if (std::isnan(x)) {
        throw data_error{"observation " + std::to_string(obs.id) +
                         ": variable missing for slot " + slot_text(s.m, s.v) +
                         " of " + p.name};
      }
      v += p.value * x;
    }
  }
  return v;
}

std::array<double, kModeCount> probabilities_from_utilities(
    std::array<double, kModeCount> const& v, mode_set available) {
  std::array<double, kModeCount> pr{};
  auto vmax = -std::numeric_limits<double>::infinity();
  for (auto j = std::size_t{0}; j != kModeCount; ++j) {
    if (available.test(j)) {
      vmax = std::max(vmax, v[j]);
    }
  }
  if (!std::isfinite(vmax)) {
    throw numerical_error{"no finite utility among available alternatives"};
  }
  auto sum = 0.0;
  for (auto j = std::size_t{0}; j != kModeCount; ++j) {
    if (available.test(j)) {
      pr[j] = std::exp(v[j] - vmax);
      sum += pr[j];
    }
  }
  for (auto& x : pr) {
    x /= sum;
  }
  return pr;
}

std::array<double, kModeCount> probabilities(observation const& obs,
                                             coefficient_table const& c) {
  std::array<double, kModeCount> v{};
  for (auto const m : kAllModes) {
    if (obs.available.test(index_of(m))) {
      v[index_of(m)] = utility(obs, m, c);
      if (!std::isfinite(v[index_of(m)])) {
        throw numerical_error{"non-finite utility in observation " +
                              std::to_string(obs.id)};
      }
    }
  }
  return probabilities_from_utilities(v, obs.available);
}

namespace detail {

design compile(std::span<observation const> data, coefficient_table const& c) {
  design d;
  d.n_params = c.size();
  d.first_row.reserve(data.size() + 1);
  for (auto const& obs : data) {
    if (obs.chosen >= kModeCount || !obs.available.test(obs.chosen)) {
      throw data_error{"observation " + std::to_string(obs.id) +
                       ": chosen alternative is not available"};
    }
    d.first_row.push_back(d.x.size() / std::max<std::size_t>(d.n_params, 1));
    d.ids.push_back(obs.id);
    auto row = d.first_row.back();
    for (auto const m : kAllModes) {
      if (!obs.available.test(index_of(m))) {
        continue;
      }
      if (index_of(m) == obs.chosen) {
        d.chosen_row.push_back(row);
      }
      auto const base = d.x.size();
      d.x.resize(base + d.n_params, 0.0);
      for (auto k = std::size_t{0}; k != d.n_params; ++k) {
        auto const& p = c.parameters[k];
        for (auto const& s : p.slots) {
          if (s.m != m) {
            continue;
          }
          auto const x = obs.at(s.m, s.v);
          if (std::isnan(x)) {
            throw data_error{"observation " + std::to_string(obs.id) +
                             ": variable missing for slot " +
                             slot_text(s.m, s.v) + " of " + p.name};
          }
          d.x[base + k] += x;
        }
      }
      ++row;
    }
  }
  if (d.n_params == 0) {
    // rows carry no columns; count them separately
    d.first_row.clear();
    auto row = std::size_t{0};
    d.chosen_row.clear();
    for (auto const& obs : data) {
      d.first_row.push_back(row);
      for (auto j = std::size_t{0}; j != kModeCount; ++j) {
        if (obs.available.test(j)) {
          if (j == obs.chosen) {
            d.chosen_row.push_back(row);
          }
          ++row;
        }
      }
    }
    d.first_row.push_back(row);
  } else {
    d.first_row.push_back(d.x.size() / d.n_params);
  }
  return d;
}

namespace {

struct partial {
  double value{0.0};
  std::vector<double> gradient;
  std::vector<double> hessian;
  bool failed{false};
  std::uint64_t failed_id{0};
};

void evaluate_block(design const& d, std::vector<double> const& beta,
                    bool with_hessian, std::size_t from, std::size_t to,
                    partial& out) {
  auto const P = d.n_params;
  out.gradient.assign(P, 0.0);
  if (with_hessian) {
    out.hessian.assign(P * P, 0.0);
  }
  std::vector<double> v;
  std::vector<double> mean(P);
  for (auto n = from; n != to; ++n) {
    auto const r0 = d.first_row[n];
    auto const r1 = d.first_row[n + 1];
    v.resize(r1 - r0);
    auto vmax = -std::numeric_limits<double>::infinity();
    for (auto r = r0; r != r1; ++r) {
      auto u = 0.0;
      auto const* x = d.row(r);
      for (auto k = std::size_t{0}; k != P; ++k) {
        u += beta[k] * x[k];
      }
      if (!std::isfinite(u)) {
        out.failed = true;
        out.failed_id = d.ids[n];
        return;
      }
      v[r - r0] = u;
      vmax = std::max(vmax, u);
    }
    auto sum = 0.0;
    for (auto& u : v) {
      u = std::exp(u - vmax);
      sum += u;
    }
    auto const c = d.chosen_row[n];
    out.value += (std::log(v[c - r0]) - std::log(sum));
    std::fill(mean.begin(), mean.end(), 0.0);
    for (auto r = r0; r != r1; ++r) {
      auto const pr = v[r - r0] / sum;
      auto const* x = d.row(r);
      for (auto k = std::size_t{0}; k != P; ++k) {
        mean[k] += pr * x[k];
      }
    }
    auto const* xc = d.row(c);
    for (auto k = std::size_t{0}; k != P; ++k) {
      out.gradient[k] += xc[k] - mean[k];
    }
    if (with_hessian) {
      for (auto r = r0; r != r1; ++r) {
        auto const pr = v[r - r0] / sum;
        auto const* x = d.row(r);
        for (auto a = std::size_t{0}; a != P; ++a) {
          auto const da = pr * (x[a] - mean[a]);
          if (da == 0.0) {
            continue;
          }
          for (auto b = std::size_t{0}; b != P; ++b) {
            out.hessian[a * P + b] -= da * (x[b] - mean[b]);
          }
        }
      }
    }
  }
}

}  // namespace

likelihood evaluate(design const& d, std::vector<double> const& beta,
                    evaluation_options const& opts) {
  if (beta.size() != d.n_params) {
    throw consistency_error{"parameter vector size mismatch"};
  }
  auto const n_blocks = (d.n_obs() + kBlockSize - 1) / kBlockSize;
  std::vector<partial> parts(n_blocks);
  auto const run = [&](std::size_t first, std::size_t stride) {
    for (auto b = first; b < n_blocks; b += stride) {
      evaluate_block(d, beta, opts.with_hessian, b * kBlockSize,
                     std::min(d.n_obs(), (b + 1) * kBlockSize), parts[b]);
    }
  };
  auto const workers =
      std::max<std::size_t>(1, std::min<std::size_t>(opts.workers, n_blocks));
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (auto w = std::size_t{0}; w != workers; ++w) {
      pool.emplace_back([&, w] { run(w, workers); });
    }
  }

  auto const P = d.n_params;
  likelihood out;
  out.gradient.assign(P, 0.0);
  if (opts.with_hessian) {
    out.hessian.assign(P * P, 0.0);
  }
  for (auto const& p : parts) {
    if (p.failed) {
      throw numerical_error{"non-finite utility in observation " +
                            std::to_string(p.failed_id)};
    }
    out.value += p.value;
    for (auto k = std::size_t{0}; k != P; ++k) {
      out.gradient[k] += p.gradient[k];
    }
    for (auto k = std::size_t{0}; k != out.hessian.size(); ++k) {
      out.hessian[k] += p.hessian[k];
    }
  }
  if (!std::isfinite(out.value)) {
    throw numerical_error{"log-likelihood is not finite"};
  }
  return out;
}

}  // namespace detail

likelihood log_likelihood(std::span<observation const> data,
                          coefficient_table const& c,
                          evaluation_options const& opts) {
  auto const d = detail::compile(data, c);
  return detail::evaluate(d, c.values(), opts);
}

double null_log_likelihood(std::span<observation const> data) {
  auto s = 0.0;
  for (auto const& obs : data) {
    auto const n = obs.available.count();
    if (n == 0) {
      throw data_error{"observation " + std::to_string(obs.id) +
                       " has no available alternative"};
    }
    s -= std::log(static_cast<double>(n));
  }
  return s;
}

double mcfadden_index(double ln_l, double ln_l0) {
  if (!(ln_l0 < 0.0) || !(ln_l0 <= ln_l) || !(ln_l <= 0.0)) {
    throw domain_error{"McFadden index needs lnL0 < 0 and lnL0 <= lnL <= 0"};
  }
  return 1.0 - ln_l / ln_l0;
}

mode simulate_choice(observation const& obs, coefficient_table const& c,
                     std::uint64_t seed) {
  auto const pr = probabilities(obs, c);
  std::mt19937_64 gen{mix64(seed)};
  auto const u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  auto cum = 0.0;
  std::optional<mode> last;
  for (auto const m : kAllModes) {
    if (!obs.available.test(index_of(m))) {
      continue;
    }
    cum += pr[index_of(m)];
    last = m;
    if (u < cum) {
      return m;
    }
  }
  return *last;
}

}  // namespace mclab
