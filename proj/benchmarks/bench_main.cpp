#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mclab/altgen.hpp"
#include "mclab/choiceset.hpp"
#include "mclab/error.hpp"
#include "mclab/mnl.hpp"
#include "mclab/pipeline.hpp"
#include "mclab/survey.hpp"

namespace fs = std::filesystem;
using namespace mclab;

namespace {

// ---- likelihood -------------------------------------------------------------

std::vector<observation> random_data(std::size_t n) {
  std::mt19937_64 gen{1};
  std::uniform_real_distribution<double> u{0.0, 1.0};
  std::vector<observation> out;
  for (auto i = std::size_t{0}; i != n; ++i) {
    auto o = blank_observation(i);
    for (auto const m : kAllModes) {
      for (auto& x : o.x[index_of(m)]) {
        x = u(gen);
      }
      o.at(m, variable::constant) = 1.0;
      o.available.set(index_of(m), m == mode::walk || u(gen) < 0.6);
    }
    o.chosen = index_of(mode::walk);
    out.push_back(o);
  }
  return out;
}

coefficient_table table() {
  coefficient_table c;
  for (auto const m : kAllModes) {
    c.parameters.push_back({"TravelTime_" + std::string{name_of(m)}, -1.0,
                            {{m, variable::travel_time}}, {}});
    if (m != mode::walk) {
      c.parameters.push_back({"Constant_" + std::string{name_of(m)}, 0.1,
                              {{m, variable::constant}}, {}});
    }
  }
  return c;
}

void BM_LogLikelihood(benchmark::State& state) {
  auto const data = random_data(static_cast<std::size_t>(state.range(0)));
  auto const c = table();
  evaluation_options opts;
  opts.workers = static_cast<unsigned>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_likelihood(data, c, opts));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LogLikelihood)->Args({20000, 1})->Args({20000, 4});

void BM_LogLikelihoodHessian(benchmark::State& state) {
  auto const data = random_data(20000);
  auto const c = table();
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_likelihood(data, c, {1, true}));
  }
}
BENCHMARK(BM_LogLikelihoodHessian);

// ---- routing and choice sets on a small synthetic region -----------------------

struct region_data {
  population pop;
  feed_set feeds;
  region_config region;
  altgen_config altgen;
};

region_data const& synthetic() {
  static std::unique_ptr<region_data> w = [] {
    auto const dir = fs::temp_directory_path() / "mclab_bench_region";
    fs::remove_all(dir);
    synth_settings s;
    s.households = 300;
    std::ostringstream log;
    generate_synthetic(dir, s, 11, log);
    auto r = std::make_unique<region_data>();
    auto const cfg = load_pipeline_config(dir / "config.json");
    r->pop = build_tours(parse_survey(cfg.households.string(), cfg.persons.string(),
                                      cfg.trips.string()));
    for (auto const& [agency, path] : cfg.gtfs) {
      r->feeds.emplace(agency, gtfs::parse_feed(path.string(), agency));
    }
    r->region = cfg.region;
    r->altgen = cfg.altgen;
    return r;
  }();
  return *w;
}

void BM_RouteTransit(benchmark::State& state) {
  auto const& w = synthetic();
  std::size_t i = 0;
  for (auto _ : state) {
    auto const& t = w.pop.trips[i++ % w.pop.trips.size()];
    benchmark::DoNotOptimize(route_transit(w.feeds, w.altgen.cta_agency, t.origin,
                                           t.destination, t.depart, w.altgen));
  }
}
BENCHMARK(BM_RouteTransit);

void BM_GenerateAlternatives(benchmark::State& state) {
  auto const& w = synthetic();
  std::size_t i = 0;
  for (auto _ : state) {
    auto const& t = w.pop.trips[i++ % w.pop.trips.size()];
    benchmark::DoNotOptimize(generate_alternatives(t, w.feeds, nullptr, w.altgen, w.region));
  }
}
BENCHMARK(BM_GenerateAlternatives);

void BM_FormChoiceSets(benchmark::State& state) {
  auto const& w = synthetic();
  auto const timelines = build_timelines(w.pop);
  alternative_set all;
  for (auto const m : kAllModes) {
    all[index_of(m)] = alternative{m, true};
  }
  for (auto _ : state) {
    std::size_t formed = 0;
    for (auto const& tr : w.pop.tours) {
      auto const legs = w.pop.legs_of(tr);
      std::vector<std::optional<mode>> prior;
      for (auto const& l : legs) {
        prior.push_back(map_survey_mode(l.observed_mode));
      }
      auto const& p = w.pop.person_of(tr.person);
      auto const& h = w.pop.household_of(p.household);
      for (auto k = std::size_t{0}; k != legs.size(); ++k) {
        auto const flags = compute_context_flags(legs[k], tr, legs, p, w.region);
        try {
          benchmark::DoNotOptimize(form_choice_set(legs[k], all, flags, timelines.at(h.id),
                                                   h, tr, std::span{prior.data(), k}));
          ++formed;
        } catch (degenerate_choice_set const&) {
        }
      }
    }
    state.counters["trips"] = static_cast<double>(formed);
  }
}
BENCHMARK(BM_FormChoiceSets)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
