#include "mclab/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "mclab/analytics.hpp"
#include "mclab/csv.hpp"
#include "mclab/error.hpp"
#include "mclab/gtfs.hpp"
#include "mclab/survey.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mclab {

namespace {

// ---- config helpers --------------------------------------------------------

fs::path resolve(fs::path const& base, std::string const& p) {
  fs::path const q{p};
  return q.is_absolute() ? q : (base / q).lexically_normal();
}

json const* child(json const& j, char const* key) {
  auto const it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

std::string get_string(json const& j, char const* key, std::string const& path) {
  auto const* v = child(j, key);
  if (v == nullptr || !v->is_string()) {
    throw config_error{path + "." + key + ": expected a string"};
  }
  return v->get<std::string>();
}

double get_number(json const& j, char const* key, std::string const& path,
                  double fallback) {
  auto const* v = child(j, key);
  if (v == nullptr) {
    return fallback;
  }
  if (!v->is_number()) {
    throw config_error{path + "." + key + ": expected a number"};
  }
  return v->get<double>();
}

std::uint64_t get_uint(json const& j, char const* key, std::string const& path,
                       std::uint64_t fallback) {
  auto const* v = child(j, key);
  if (v == nullptr) {
    return fallback;
  }
  if (!v->is_number_unsigned()) {
    throw config_error{path + "." + key + ": expected a non-negative integer"};
  }
  return v->get<std::uint64_t>();
}

json const& get_object(json const& j, char const* key, std::string const& path) {
  auto const* v = child(j, key);
  if (v == nullptr || !v->is_object()) {
    throw config_error{path + "." + key + ": expected an object"};
  }
  return *v;
}

// ---- files -------------------------------------------------------------------

void write_text(fs::path const& p, std::string const& text) {
  std::ofstream out{p, std::ios::binary};
  if (!out) {
    throw io_error{"cannot write " + p.string()};
  }
  out << text;
  if (!out) {
    throw io_error{"write failed for " + p.string()};
  }
}

std::string read_text(fs::path const& p) {
  std::ifstream in{p, std::ios::binary};
  if (!in) {
    throw io_error{"cannot read " + p.string()};
  }
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json(fs::path const& p) {
  try {
    return json::parse(read_text(p));
  } catch (json::exception const& e) {
    throw data_error{p.string() + ": " + e.what()};
  }
}

std::vector<json> read_jsonl(fs::path const& p) {
  std::vector<json> out;
  std::istringstream in{read_text(p)};
  std::string line;
  auto n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) {
      continue;
    }
    try {
      out.push_back(json::parse(line));
    } catch (json::exception const& e) {
      throw data_error{p.string() + ":" + std::to_string(n) + ": " + e.what()};
    }
  }
  return out;
}

std::string display_path(pipeline_config const& cfg, fs::path const& p) {
  auto const in_out = p.lexically_relative(cfg.out);
  if (!in_out.empty() && *in_out.begin() != "..") {
    return "out/" + in_out.generic_string();
  }
  return p.lexically_relative(cfg.base_dir).generic_string();
}

fs::path artifact(pipeline_config const& cfg, char const* stage,
                  char const* name) {
  auto const p = cfg.out / stage / name;
  if (!fs::exists(p)) {
    throw stage_error{"missing artifact " + (fs::path{stage} / name).string() +
                      " under " + cfg.out.string() + "; run '" + stage +
                      "' first"};
  }
  return p;
}

void require_file(fs::path const& p, std::string const& key) {
  if (!fs::exists(p)) {
    throw config_error{key + ": " + p.string() + " does not exist"};
  }
}

std::uint64_t require_seed(pipeline_config const& cfg) {
  if (!cfg.seed) {
    throw config_error{"seed: required by this command"};
  }
  return *cfg.seed;
}

struct stage_record {
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  json parameters = json::object();
  json metadata = json::object();  // run-specific, kept out of the manifest
};

std::string utc_now() {
  auto const t = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- population serialization -----------------------------------------------

json point_json(geo_point const& p) {
  json j{{"lat", p.lat}, {"lon", p.lon}};
  if (p.zone) {
    j["zone"] = *p.zone;
  }
  return j;
}

geo_point point_from(json const& j) {
  geo_point p{j.at("lat").get<double>(), j.at("lon").get<double>(),
              std::nullopt};
  if (j.contains("zone")) {
    p.zone = j.at("zone").get<std::string>();
  }
  return p;
}

json stamp_json(time_stamp const& t) {
  return {{"date", format_iso_date(t.day())}, {"sec", t.seconds()}};
}

time_stamp stamp_from(json const& j) {
  return {parse_date(j.at("date").get<std::string>()),
          j.at("sec").get<std::int32_t>()};
}

json population_json(population const& pop) {
  json hh = json::array();
  for (auto const& h : pop.households) {
    hh.push_back({{"id", to_int(h.id)},
                  {"home", point_json(h.home)},
                  {"members", h.n_members},
                  {"vehicles", h.n_vehicles},
                  {"income", h.income}});
  }
  json pp = json::array();
  for (auto const& p : pop.persons) {
    pp.push_back({{"id", to_int(p.id)},
                  {"household", to_int(p.household)},
                  {"age", p.age},
                  {"female", p.is_female}});
  }
  json tt = json::array();
  for (auto const& t : pop.trips) {
    json j{{"id", to_int(t.id)},
           {"person", to_int(t.person)},
           {"origin", point_json(t.origin)},
           {"destination", point_json(t.destination)},
           {"depart", stamp_json(t.depart)},
           {"arrive", stamp_json(t.arrive)},
           {"mode", label_of(t.observed_mode)},
           {"purpose", name_of(t.trip_purpose)}};
    if (t.tour) {
      j["tour"] = to_int(*t.tour);
    }
    if (t.leg_index) {
      j["leg"] = *t.leg_index;
    }
    tt.push_back(std::move(j));
  }
  json tours = json::array();
  for (auto const& tr : pop.tours) {
    json ids = json::array();
    for (auto const id : tr.trips) {
      ids.push_back(to_int(id));
    }
    tours.push_back({{"id", to_int(tr.id)},
                     {"person", to_int(tr.person)},
                     {"trips", ids},
                     {"starts_at_home", tr.starts_at_home},
                     {"returns_home", tr.returns_home}});
  }
  return {{"households", hh}, {"persons", pp}, {"trips", tt}, {"tours", tours}};
}

population population_from(json const& j) {
  population pop;
  try {
    for (auto const& h : j.at("households")) {
      pop.households.push_back(household{
          household_id{h.at("id").get<std::uint64_t>()}, point_from(h.at("home")),
          h.at("members").get<std::uint32_t>(),
          h.at("vehicles").get<std::uint32_t>(), h.at("income").get<double>()});
    }
    for (auto const& p : j.at("persons")) {
      pop.persons.push_back(person{person_id{p.at("id").get<std::uint64_t>()},
                                   household_id{p.at("household").get<std::uint64_t>()},
                                   p.at("age").get<double>(),
                                   p.at("female").get<bool>()});
    }
    for (auto const& t : j.at("trips")) {
      trip tr;
      tr.id = trip_id{t.at("id").get<std::uint64_t>()};
      tr.person = person_id{t.at("person").get<std::uint64_t>()};
      tr.origin = point_from(t.at("origin"));
      tr.destination = point_from(t.at("destination"));
      tr.depart = stamp_from(t.at("depart"));
      tr.arrive = stamp_from(t.at("arrive"));
      tr.observed_mode = parse_raw_mode(t.at("mode").get<std::string>());
      tr.trip_purpose = parse_purpose(t.at("purpose").get<std::string>()).value();
      if (t.contains("tour")) {
        tr.tour = tour_id{t.at("tour").get<std::uint64_t>()};
      }
      if (t.contains("leg")) {
        tr.leg_index = t.at("leg").get<std::uint32_t>();
      }
      pop.trips.push_back(std::move(tr));
    }
    for (auto const& t : j.at("tours")) {
      tour tr;
      tr.id = tour_id{t.at("id").get<std::uint64_t>()};
      tr.person = person_id{t.at("person").get<std::uint64_t>()};
      for (auto const& id : t.at("trips")) {
        tr.trips.push_back(trip_id{id.get<std::uint64_t>()});
      }
      tr.starts_at_home = t.at("starts_at_home").get<bool>();
      tr.returns_home = t.at("returns_home").get<bool>();
      pop.tours.push_back(std::move(tr));
    }
  } catch (json::exception const& e) {
    throw data_error{std::string{"population.json: "} + e.what()};
  } catch (std::bad_optional_access const&) {
    throw data_error{"population.json: bad purpose"};
  }
  pop.reindex();
  return pop;
}

json rejections_json(rejection_report const& r, population const& pop) {
  return {{"households", r.households},
          {"persons", r.persons},
          {"trips", r.trips},
          {"households_read", r.households_read},
          {"persons_read", r.persons_read},
          {"trips_read", r.trips_read},
          {"households_retained", pop.households.size()},
          {"persons_retained", pop.persons.size()},
          {"trips_retained", pop.trips.size()},
          {"tours", pop.tours.size()}};
}

population load_population(pipeline_config const& cfg, stage_record& rec) {
  auto const p = artifact(cfg, "ingest", "population.json");
  rec.inputs.push_back(p);
  return population_from(read_json(p));
}

// ---- alternatives ----------------------------------------------------------

json alternative_json(alternative const& a) {
  return {{"mode", name_of(a.m)},     {"available", a.available},
          {"time_h", a.time_h},       {"access_mi", a.access_mi},
          {"egress_mi", a.egress_mi}, {"transfers", a.transfers},
          {"fare", a.fare}};
}

alternative alternative_from(json const& j) {
  alternative a;
  auto const m = parse_mode_name(j.at("mode").get<std::string>());
  if (!m) {
    throw data_error{"unknown mode " + j.at("mode").get<std::string>()};
  }
  a.m = *m;
  a.available = j.value("available", true);
  a.time_h = j.at("time_h").get<double>();
  a.access_mi = j.at("access_mi").get<double>();
  a.egress_mi = j.at("egress_mi").get<double>();
  a.transfers = j.at("transfers").get<std::uint32_t>();
  a.fare = j.at("fare").get<double>();
  return a;
}

std::map<std::uint64_t, alternative_set> load_alternatives(
    pipeline_config const& cfg, stage_record& rec) {
  auto const p = artifact(cfg, "altgen", "alternatives.jsonl");
  rec.inputs.push_back(p);
  std::map<std::uint64_t, alternative_set> out;
  try {
    for (auto const& line : read_jsonl(p)) {
      alternative_set set{};
      auto const& alts = line.at("alternatives");
      if (alts.size() != kModeCount) {
        throw data_error{"alternatives.jsonl: expected 8 alternatives"};
      }
      for (auto i = std::size_t{0}; i != kModeCount; ++i) {
        set[i] = alternative_from(alts[i]);
      }
      out[line.at("trip").get<std::uint64_t>()] = set;
    }
  } catch (json::exception const& e) {
    throw data_error{std::string{"alternatives.jsonl: "} + e.what()};
  }
  return out;
}

feed_set load_feeds(pipeline_config const& cfg, stage_record& rec) {
  feed_set feeds;
  for (auto const& [agency, dir] : cfg.gtfs) {
    require_file(dir, "gtfs." + agency);
    feeds.emplace(agency, gtfs::parse_feed(dir.string(), agency));
    for (auto const& e : fs::directory_iterator{dir}) {
      if (e.is_regular_file()) {
        rec.inputs.push_back(e.path());
      }
    }
  }
  std::sort(rec.inputs.begin(), rec.inputs.end());
  return feeds;
}

std::vector<json> load_records(pipeline_config const& cfg, stage_record& rec,
                               std::optional<fs::path> const& input) {
  fs::path p;
  if (input) {
    require_file(*input, "apply.input");
    p = *input;
  } else {
    p = artifact(cfg, "choicesets", "choicesets.jsonl");
  }
  rec.inputs.push_back(p);
  return read_jsonl(p);
}

coefficient_table load_preset(pipeline_config const& cfg, stage_record& rec) {
  if (!cfg.preset) {
    throw config_error{"apply.preset: required by this command"};
  }
  require_file(*cfg.preset, "apply.preset");
  rec.inputs.push_back(*cfg.preset);
  return load_coefficients(cfg.preset->string());
}

// ---- stages ----------------------------------------------------------------

void stage_ingest(pipeline_config const& cfg, fs::path const& dir,
                  stage_record& rec, std::ostream& log) {
  require_file(cfg.households, "survey.households");
  require_file(cfg.persons, "survey.persons");
  require_file(cfg.trips, "survey.trips");
  rec.inputs = {cfg.households, cfg.persons, cfg.trips};
  auto pop = parse_survey(cfg.households.string(), cfg.persons.string(),
                          cfg.trips.string());
  pop = build_tours(std::move(pop), cfg.chain_tolerance_m);
  rec.parameters["chain_tolerance_m"] = cfg.chain_tolerance_m;

  write_text(dir / "population.json", population_json(pop).dump() + "\n");
  write_text(dir / "rejections.json",
             rejections_json(pop.rejections, pop).dump(2) + "\n");
  rec.outputs = {dir / "population.json", dir / "rejections.json"};
  log << "ingest: " << pop.households.size() << " households, "
      << pop.persons.size() << " persons, " << pop.trips.size() << " trips, "
      << pop.tours.size() << " tours; " << pop.rejections.total_trips_rejected()
      << " trip rows rejected\n";
}

void stage_altgen(pipeline_config const& cfg, fs::path const& dir,
                  stage_record& rec, std::ostream& log) {
  auto const pop = load_population(cfg, rec);
  auto const feeds = load_feeds(cfg, rec);
  std::optional<routing_cache> cache;
  if (cfg.routing_cache) {
    require_file(*cfg.routing_cache, "routing_cache");
    rec.inputs.push_back(*cfg.routing_cache);
    cache = routing_cache::load(cfg.routing_cache->string());
  }
  rec.parameters["altgen"] = to_json(cfg.altgen);

  routing_cache recorded;
  std::string lines;
  std::size_t any_transit = 0;
  for (auto const& t : pop.trips) {
    auto const alts = generate_alternatives(t, feeds, cache ? &*cache : nullptr,
                                            cfg.altgen, cfg.region);
    json arr = json::array();
    for (auto const& a : alts) {
      arr.push_back(alternative_json(a));
      recorded.insert(make_cache_key(t.origin, t.destination, a.m, t.depart), a);
    }
    if (alts[index_of(mode::cta)].available || alts[index_of(mode::pace)].available ||
        alts[index_of(mode::hrail_slow)].available ||
        alts[index_of(mode::hrail_fast)].available) {
      ++any_transit;
    }
    lines += json{{"trip", to_int(t.id)}, {"alternatives", arr}}.dump();
    lines += '\n';
  }
  write_text(dir / "alternatives.jsonl", lines);
  write_text(dir / "routing_cache.jsonl", recorded.to_jsonl());
  rec.outputs = {dir / "alternatives.jsonl", dir / "routing_cache.jsonl"};
  log << "altgen: " << pop.trips.size() << " trips, " << any_transit
      << " with a transit alternative\n";
}

void stage_choicesets(pipeline_config const& cfg, fs::path const& dir,
                      stage_record& rec, std::ostream& log) {
  auto const pop = load_population(cfg, rec);
  auto const alts = load_alternatives(cfg, rec);
  auto const timelines = build_timelines(pop);
  rec.parameters["region"] = to_json(cfg.region);

  std::map<std::uint64_t, json> records;
  std::map<std::string, std::size_t> ineligible;
  std::map<std::string, std::size_t> repairs;
  json degenerate = json::array();
  std::size_t eligible = 0;
  for (auto const& tr : pop.tours) {
    auto const legs = pop.legs_of(tr);
    std::vector<std::optional<mode>> prior;
    for (auto const& l : legs) {
      prior.push_back(map_survey_mode(l.observed_mode));
    }
    auto const& p = pop.person_of(tr.person);
    auto const& h = pop.household_of(p.household);
    for (auto k = std::size_t{0}; k != legs.size(); ++k) {
      auto const& t = legs[k];
      auto const it = alts.find(to_int(t.id));
      if (it == alts.end()) {
        throw stage_error{"altgen output lacks trip " +
                          std::to_string(to_int(t.id)) + "; rerun 'altgen'"};
      }
      auto const flags = compute_context_flags(t, tr, legs, p, cfg.region);
      try {
        auto const cs = form_choice_set(
            t, it->second, flags, timelines.at(h.id), h, tr,
            std::span<std::optional<mode> const>{prior.data(), k});
        auto ok = true;
        if (k != 0) {
          ++ineligible["later_leg"];
          ok = false;
        } else if (!tr.complete()) {
          ++ineligible["incomplete_tour"];
          ok = false;
        } else if (!cs.chosen) {
          ++ineligible["excluded_mode"];
          ok = false;
        } else if (!cs.service.test(index_of(*cs.chosen))) {
          ++ineligible["chosen_without_service"];
          ok = false;
        }
        for (auto const& r : cs.repairs) {
          ++repairs[std::string{name_of(r.rule)}];
        }
        eligible += ok ? 1 : 0;
        records[to_int(t.id)] =
            choice_set_record(cs, h, p, t, static_cast<std::uint32_t>(k), ok);
      } catch (degenerate_choice_set const& e) {
        degenerate.push_back({{"trip", to_int(t.id)}, {"log", e.log()}});
      }
    }
  }

  std::string lines;
  for (auto const& [_, r] : records) {
    lines += r.dump();
    lines += '\n';
  }
  write_text(dir / "choicesets.jsonl", lines);
  std::size_t overruns = 0;
  for (auto const& [_, tl] : timelines) {
    overruns += tl.overruns();
  }
  json summary{{"choice_sets", records.size()},
               {"eligible_for_estimation", eligible},
               {"ineligible", ineligible},
               {"repairs", repairs},
               {"degenerate", degenerate},
               {"vehicle_overruns", overruns}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  rec.outputs = {dir / "choicesets.jsonl", dir / "summary.json"};
  log << "choicesets: " << records.size() << " sets, " << eligible
      << " eligible for estimation, " << degenerate.size() << " degenerate\n";
}

std::map<std::uint64_t, split_bucket> load_split(pipeline_config const& cfg,
                                                 stage_record& rec) {
  auto const p = artifact(cfg, "split", "split.csv");
  rec.inputs.push_back(p);
  auto const t = csv::read_file(p.string());
  auto const c = csv::require_columns(t, {"hh_id", "bucket"}, "split.csv");
  std::map<std::uint64_t, split_bucket> out;
  for (auto const& row : t.rows) {
    auto const id = csv::to_int(row[c[0]]);
    if (!id) {
      throw data_error{"split.csv: bad household id " + row[c[0]]};
    }
    out[static_cast<std::uint64_t>(*id)] =
        row[c[1]] == "train" ? split_bucket::train : split_bucket::test;
  }
  return out;
}

void stage_split(pipeline_config const& cfg, fs::path const& dir,
                 stage_record& rec, std::ostream& log) {
  auto const seed = require_seed(cfg);
  auto const pop = load_population(cfg, rec);
  auto const split = split_train_test(pop, cfg.train_fraction, seed);
  rec.parameters["train_fraction"] = cfg.train_fraction;
  rec.parameters["seed"] = seed;
  std::ostringstream out;
  csv::write_row(out, {"hh_id", "bucket"});
  for (auto const& [id, b] : split.buckets) {
    csv::write_row(out, {std::to_string(to_int(id)),
                         b == split_bucket::train ? "train" : "test"});
  }
  write_text(dir / "split.csv", out.str());
  rec.outputs = {dir / "split.csv"};
  log << "split: " << split.count(split_bucket::train) << " train / "
      << split.count(split_bucket::test) << " test households\n";
}

json parameters_json(coefficient_table const& t,
                     std::vector<double> const& se) {
  json arr = json::array();
  for (auto k = std::size_t{0}; k != t.size(); ++k) {
    auto const& p = t.parameters[k];
    json slots = json::array();
    for (auto const& s : p.slots) {
      slots.push_back({std::string{name_of(s.m)}, std::string{name_of(s.v)}});
    }
    arr.push_back({{"name", p.name},
                   {"value", p.value},
                   {"std_error", se[k]},
                   {"t_stat", p.t_stat.value_or(0.0)},
                   {"slots", slots}});
  }
  return arr;
}

void stage_estimate(pipeline_config const& cfg, fs::path const& dir,
                    stage_record& rec, std::ostream& log) {
  if (!cfg.estimation_spec) {
    throw config_error{"estimation.spec: required by 'estimate'"};
  }
  auto const records = load_records(cfg, rec, std::nullopt);
  auto const split = load_split(cfg, rec);
  require_file(*cfg.estimation_spec, "estimation.spec");
  rec.inputs.push_back(*cfg.estimation_spec);
  auto const init = load_coefficients(cfg.estimation_spec->string());

  std::vector<observation> train;
  std::vector<observation> test;
  for (auto const& r : records) {
    if (!r.value("eligible", false)) {
      continue;
    }
    auto const hh = r.at("household").get<std::uint64_t>();
    auto const it = split.find(hh);
    if (it == split.end()) {
      throw stage_error{"household " + std::to_string(hh) +
                        " missing from split.csv; rerun 'split'"};
    }
    (it->second == split_bucket::train ? train : test)
        .push_back(observation_from_record(r));
  }
  rec.parameters["max_iterations"] = cfg.estimation.max_iterations;
  rec.parameters["gradient_tolerance"] = cfg.estimation.gradient_tolerance;
  rec.parameters["relative_tolerance"] = cfg.estimation.relative_tolerance;

  auto const t0 = std::chrono::steady_clock::now();
  auto const res = estimate(train, init, cfg.estimation);
  auto const secs = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();

  json holdout = nullptr;
  if (!test.empty()) {
    auto const ll = log_likelihood(test, res.fitted).value;
    auto const ll0 = null_log_likelihood(test);
    holdout = {{"n_observations", test.size()},
               {"log_likelihood", ll},
               {"null_log_likelihood", ll0}};
    if (ll0 < 0.0 && ll >= ll0 && ll <= 0.0) {
      holdout["mcfadden_index"] = mcfadden_index(ll, ll0);
    }
  }
  json result{{"status", res.status},
              {"converged", res.converged},
              {"iterations", res.iterations},
              {"gradient_fallbacks", res.gradient_fallbacks},
              {"n_observations", res.n_observations},
              {"log_likelihood", res.log_likelihood},
              {"null_log_likelihood", res.null_log_likelihood},
              {"null_convention", "equal shares over available alternatives"},
              {"mcfadden_index", res.mcfadden},
              {"trajectory", res.trajectory},
              {"parameters", parameters_json(res.fitted, res.std_errors)},
              {"holdout", holdout}};
  write_text(dir / "result.json", result.dump(2) + "\n");
  save_coefficients(res.fitted, (dir / "coefficients.json").string());
  rec.metadata["estimate_seconds"] = secs;
  rec.outputs = {dir / "result.json", dir / "coefficients.json"};
  log << "estimate: " << res.n_observations << " observations, lnL "
      << res.log_likelihood << ", lnL0 " << res.null_log_likelihood
      << ", index " << res.mcfadden << ", " << res.iterations
      << " iterations (" << res.status << ")\n";
}

template <typename Fn>
void write_csv_file(fs::path const& p, Fn&& fn) {
  std::ostringstream out;
  fn(out);
  write_text(p, out.str());
}

void stage_analyze(pipeline_config const& cfg, fs::path const& dir,
                   stage_record& rec, std::ostream& log) {
  auto const pop = load_population(cfg, rec);
  auto const records = load_records(cfg, rec, std::nullopt);
  auto const timelines = build_timelines(pop);

  std::vector<choice_set> sets;
  std::vector<time_observation> times;
  for (auto const& r : records) {
    choice_set cs;
    cs.trip = trip_id{r.at("trip").get<std::uint64_t>()};
    cs.service = mode_set{r.at("service_mask").get<unsigned long>()};
    cs.available = mode_set{r.at("available_mask").get<unsigned long>()};
    auto const& t = pop.trip_of(cs.trip);
    for (auto const& a : r.at("alternatives")) {
      if (t.origin.zone && t.destination.zone) {
        times.push_back({*t.origin.zone, *t.destination.zone,
                         a.at("mode").get<std::string>(),
                         a.at("time_h").get<double>()});
      }
    }
    sets.push_back(std::move(cs));
  }

  std::vector<fs::path> outs;
  auto const sidecar = [&](std::string const& name, json params) {
    write_text(dir / (name + ".json"), params.dump(2) + "\n");
    outs.push_back(dir / (name + ".csv"));
    outs.push_back(dir / (name + ".json"));
  };

  auto const prev = previous_mode_crosstab(pop);
  write_csv_file(dir / "previous_mode.csv",
                 [&](std::ostream& o) { prev.write_csv(o); });
  sidecar("previous_mode", {{"filter", "previous leg of the same tour driven"},
                            {"columns", prev.columns},
                            {"percent_base", "column total"}});

  auto const viu = vehicle_in_use_mode_share(pop, timelines);
  write_csv_file(dir / "vehicle_in_use.csv",
                 [&](std::ostream& o) { write_share_csv(o, viu); });
  sidecar("vehicle_in_use",
          {{"filter", "households with exactly one vehicle"},
           {"busy_interval", "whole tour of a member whose first leg was driven"}});

  auto const avail = transit_availability_report(sets);
  write_csv_file(dir / "transit_availability.csv",
                 [&](std::ostream& o) { write_availability_csv(o, avail); });
  sidecar("transit_availability",
          {{"source", "router availability before constraints"},
           {"heavy_rail", "slow or fast access"},
           {"trips", sets.size()}});

  auto const by_zone = transit_availability_by_zone(sets, pop);
  write_csv_file(dir / "transit_availability_by_zone.csv", [&](std::ostream& o) {
    csv::write_row(o, {"zone", "trips", "any_transit", "percent"});
    for (auto const& z : by_zone) {
      csv::write_row(o, {z.zone, std::to_string(z.trips),
                         std::to_string(z.any_transit),
                         csv::format_double(z.trips == 0 ? 0.0
                                                         : 100.0 * z.any_transit /
                                                               z.trips)});
    }
  });
  sidecar("transit_availability_by_zone", {{"zone", "trip origin"}});

  auto const mismatch = od_transit_mismatch(sets, pop);
  write_csv_file(dir / "od_mismatch.csv", [&](std::ostream& o) {
    csv::write_row(o, {"agency", "without", "with"});
    for (auto const& m : mismatch) {
      csv::write_row(o, {m.agency, std::to_string(m.without),
                         std::to_string(m.with)});
    }
  });
  sidecar("od_mismatch",
          {{"filter", "zone pairs with trips both with and without the agency"}});

  auto const disp = travel_time_dispersion(times, 5);
  write_csv_file(dir / "dispersion.csv", [&](std::ostream& o) {
    csv::write_row(o, {"o_zone", "d_zone", "mode", "n", "mean_h", "std_h",
                       "ratio"});
    for (auto const& d : disp.records) {
      csv::write_row(o, {d.o_zone, d.d_zone, d.mode, std::to_string(d.n),
                         csv::format_double(d.mean), csv::format_double(d.std_dev),
                         csv::format_double(d.ratio)});
    }
  });
  write_csv_file(dir / "dispersion_histogram.csv", [&](std::ostream& o) {
    csv::write_row(o, {"mode", "bin_low", "bin_high", "groups"});
    for (auto const& [m, bins] : disp.histogram) {
      for (auto b = std::size_t{0}; b != bins.size(); ++b) {
        csv::write_row(o, {m, csv::format_double(b * disp.bin_width),
                           csv::format_double((b + 1) * disp.bin_width),
                           std::to_string(bins[b])});
      }
    }
  });
  sidecar("dispersion", {{"min_n", 5},
                         {"rule", "groups with more than min_n observations"},
                         {"std_convention", "population"},
                         {"bin_width", disp.bin_width},
                         {"time_unit", "hours"}});
  outs.push_back(dir / "dispersion_histogram.csv");

  auto const rider = ridership_by_zone(pop);
  write_csv_file(dir / "ridership_by_zone.csv", [&](std::ostream& o) {
    csv::write_row(o, {"zone", "transit", "total", "share"});
    for (auto const& z : rider) {
      csv::write_row(o, {z.zone, std::to_string(z.transit),
                         std::to_string(z.total), csv::format_double(z.share())});
    }
  });
  sidecar("ridership_by_zone",
          {{"transit", "any public transit label, including excluded ones"}});

  rec.outputs = outs;
  log << "analyze: " << outs.size() << " files\n";
}

void stage_apply(pipeline_config const& cfg, fs::path const& dir,
                 stage_record& rec, std::ostream& log) {
  auto const preset = load_preset(cfg, rec);
  auto const records = load_records(cfg, rec, cfg.apply_input);
  std::ostringstream out;
  std::vector<std::string> header{"trip"};
  for (auto const m : kAllModes) {
    header.emplace_back(name_of(m));
  }
  csv::write_row(out, header);
  for (auto const& r : records) {
    auto const obs = observation_from_record(r, false);
    auto const pr = probabilities(obs, preset);
    std::vector<std::string> row{std::to_string(obs.id)};
    for (auto const x : pr) {
      row.push_back(csv::format_double(x));
    }
    csv::write_row(out, row);
  }
  write_text(dir / "probabilities.csv", out.str());
  rec.outputs = {dir / "probabilities.csv"};
  log << "apply: scored " << records.size() << " choice sets\n";
}

void stage_simulate(pipeline_config const& cfg, fs::path const& dir,
                    stage_record& rec, std::ostream& log) {
  auto const seed = require_seed(cfg);
  auto const preset = load_preset(cfg, rec);
  auto const records = load_records(cfg, rec, cfg.apply_input);
  rec.parameters["seed"] = seed;
  std::ostringstream out;
  csv::write_row(out, {"trip", "mode"});
  for (auto const& r : records) {
    auto const obs = observation_from_record(r, false);
    auto const m = simulate_choice(obs, preset, mix64(seed) ^ obs.id);
    csv::write_row(out, {std::to_string(obs.id), std::string{name_of(m)}});
  }
  write_text(dir / "choices.csv", out.str());
  rec.outputs = {dir / "choices.csv"};
  log << "simulate: " << records.size() << " choices drawn\n";
}

void stage_synth(pipeline_config const& cfg, fs::path const& dir,
                 stage_record& rec, std::ostream& log) {
  auto const seed = require_seed(cfg);
  if (cfg.synth.truth) {
    rec.inputs.push_back(*cfg.synth.truth);
  }
  rec.parameters["seed"] = seed;
  rec.parameters["households"] = cfg.synth.households;
  generate_synthetic(dir, cfg.synth, seed, log);
  for (auto const& e : fs::recursive_directory_iterator{dir}) {
    auto const name = e.path().filename();
    if (e.is_regular_file() && name != "manifest.json" &&
        name != "run_metadata.json") {
      rec.outputs.push_back(e.path());
    }
  }
  std::sort(rec.outputs.begin(), rec.outputs.end());
}

using stage_fn = void (*)(pipeline_config const&, fs::path const&,
                          stage_record&, std::ostream&);

stage_fn stage_of(std::string_view name) {
  if (name == "ingest") return stage_ingest;
  if (name == "altgen") return stage_altgen;
  if (name == "choicesets") return stage_choicesets;
  if (name == "split") return stage_split;
  if (name == "estimate") return stage_estimate;
  if (name == "analyze") return stage_analyze;
  if (name == "apply") return stage_apply;
  if (name == "simulate") return stage_simulate;
  if (name == "synth") return stage_synth;
  return nullptr;
}

void run_stage(std::string_view name, pipeline_config const& cfg,
               std::ostream& log) {
  auto const fn = stage_of(name);
  if (fn == nullptr) {
    throw config_error{"unknown command " + std::string{name}};
  }
  auto const dir = cfg.out / std::string{name};
  fs::create_directories(dir);
  auto const started = utc_now();
  auto const t0 = std::chrono::steady_clock::now();

  stage_record rec;
  fn(cfg, dir, rec, log);

  json inputs = json::array();
  for (auto const& p : rec.inputs) {
    inputs.push_back({{"path", display_path(cfg, p)}, {"sha256", file_sha256(p)}});
  }
  json outputs = json::array();
  for (auto const& p : rec.outputs) {
    outputs.push_back(
        {{"path", display_path(cfg, p)}, {"sha256", file_sha256(p)}});
  }
  json manifest{{"stage", name},
                {"config", cfg.raw},
                {"seed", cfg.seed ? json(*cfg.seed) : json(nullptr)},
                {"parameters", rec.parameters},
                {"inputs", inputs},
                {"outputs", outputs}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  auto const secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  auto meta = json{{"stage", name},
                   {"started_utc", started},
                   {"finished_utc", utc_now()},
                   {"elapsed_seconds", secs}};
  meta.update(rec.metadata);
  write_text(dir / "run_metadata.json", meta.dump(2) + "\n");
}

}  // namespace

// ---- public ------------------------------------------------------------------

pipeline_config pipeline_config_from_json(json const& j, fs::path const& base) {
  if (!j.is_object()) {
    throw config_error{"config: expected an object"};
  }
  pipeline_config cfg;
  cfg.base_dir = base;
  cfg.raw = j;

  if (auto const* s = child(j, "survey")) {
    if (!s->is_object()) {
      throw config_error{"survey: expected an object"};
    }
    cfg.households = resolve(base, get_string(*s, "households", "survey"));
    cfg.persons = resolve(base, get_string(*s, "persons", "survey"));
    cfg.trips = resolve(base, get_string(*s, "trips", "survey"));
  }
  if (auto const* g = child(j, "gtfs")) {
    if (!g->is_object()) {
      throw config_error{"gtfs: expected an object"};
    }
    for (auto const& [agency, v] : g->items()) {
      if (!v.is_string()) {
        throw config_error{"gtfs." + agency + ": expected a directory"};
      }
      cfg.gtfs[agency] = resolve(base, v.get<std::string>());
    }
  }
  if (child(j, "routing_cache") != nullptr) {
    cfg.routing_cache = resolve(base, get_string(j, "routing_cache", "config"));
  }
  cfg.out = resolve(base, child(j, "out") != nullptr
                              ? get_string(j, "out", "config")
                              : std::string{"out"});

  if (auto const* r = child(j, "region")) {
    if (r->is_string()) {
      auto const p = resolve(base, r->get<std::string>());
      require_file(p, "region");
      cfg.region = load_region_config(p.string());
    } else {
      cfg.region = region_config_from_json(*r);
    }
  }
  if (auto const* a = child(j, "altgen")) {
    cfg.altgen = altgen_config_from_json(*a);
  }
  cfg.chain_tolerance_m =
      get_number(j, "chain_tolerance_m", "config", cfg.chain_tolerance_m);
  if (!(cfg.chain_tolerance_m >= 0.0)) {
    throw config_error{"chain_tolerance_m: must be non-negative"};
  }

  if (child(j, "seed") != nullptr) {
    cfg.seed = get_uint(j, "seed", "config", 0);
  }
  if (auto const* s = child(j, "split")) {
    auto const& so = get_object(j, "split", "config");
    cfg.train_fraction =
        get_number(so, "train_fraction", "split", cfg.train_fraction);
    if (child(*s, "seed") != nullptr) {
      cfg.seed = get_uint(so, "seed", "split", 0);
    }
  }
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
    throw config_error{"split.train_fraction: must lie in (0, 1)"};
  }

  if (child(j, "estimation") != nullptr) {
    auto const& e = get_object(j, "estimation", "config");
    if (child(e, "spec") != nullptr) {
      cfg.estimation_spec = resolve(base, get_string(e, "spec", "estimation"));
    }
    auto& o = cfg.estimation;
    o.max_iterations = static_cast<int>(
        get_uint(e, "max_iterations", "estimation", o.max_iterations));
    o.gradient_tolerance =
        get_number(e, "gradient_tolerance", "estimation", o.gradient_tolerance);
    o.relative_tolerance =
        get_number(e, "relative_tolerance", "estimation", o.relative_tolerance);
    o.max_step_halvings = static_cast<int>(
        get_uint(e, "max_step_halvings", "estimation", o.max_step_halvings));
    o.workers = static_cast<unsigned>(get_uint(e, "workers", "estimation", 1));
    if (o.max_iterations <= 0 || o.workers == 0 ||
        !(o.gradient_tolerance > 0.0) || !(o.relative_tolerance > 0.0)) {
      throw config_error{"estimation: iterations, workers and tolerances must "
                         "be positive"};
    }
  }
  if (child(j, "apply") != nullptr) {
    auto const& a = get_object(j, "apply", "config");
    if (child(a, "preset") != nullptr) {
      cfg.preset = resolve(base, get_string(a, "preset", "apply"));
    }
    if (child(a, "input") != nullptr) {
      cfg.apply_input = resolve(base, get_string(a, "input", "apply"));
    }
  }
  if (child(j, "synth") != nullptr) {
    auto const& s = get_object(j, "synth", "config");
    cfg.synth.households = get_uint(s, "households", "synth", cfg.synth.households);
    cfg.synth.days = static_cast<std::uint32_t>(
        get_uint(s, "days", "synth", cfg.synth.days));
    if (child(s, "start_date") != nullptr) {
      cfg.synth.start_date = get_string(s, "start_date", "synth");
      try {
        parse_date(cfg.synth.start_date);
      } catch (error const&) {
        throw config_error{"synth.start_date: not a date"};
      }
    }
    if (child(s, "truth") != nullptr) {
      cfg.synth.truth = resolve(base, get_string(s, "truth", "synth"));
    }
    if (cfg.synth.households == 0 || cfg.synth.days == 0) {
      throw config_error{"synth: households and days must be positive"};
    }
  }
  return cfg;
}

pipeline_config load_pipeline_config(fs::path const& path,
                                     config_overrides const& overrides) {
  if (!fs::exists(path)) {
    throw io_error{"config file " + path.string() + " does not exist"};
  }
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (json::exception const& e) {
    throw config_error{path.string() + ": " + e.what()};
  }
  auto cfg = pipeline_config_from_json(
      j, fs::absolute(path).parent_path().lexically_normal());
  if (overrides.seed) {
    cfg.seed = overrides.seed;
  }
  if (overrides.out) {
    cfg.out = fs::absolute(*overrides.out).lexically_normal();
  }
  if (overrides.input) {
    cfg.apply_input = fs::absolute(*overrides.input).lexically_normal();
  }
  return cfg;
}

void run_command(std::string_view name, pipeline_config const& cfg,
                 std::ostream& log) {
  if (name == "run") {
    for (auto const* s :
         {"ingest", "altgen", "choicesets", "split", "analyze", "estimate"}) {
      run_stage(s, cfg, log);
    }
    return;
  }
  run_stage(name, cfg, log);
}

json choice_set_record(choice_set const& cs, household const& h,
                       person const& p, trip const& t, std::uint32_t leg,
                       bool eligible) {
  json alts = json::array();
  for (auto const& a : cs.alternatives) {
    if (cs.service.test(index_of(a.m))) {
      alts.push_back({{"mode", name_of(a.m)},
                      {"time_h", a.time_h},
                      {"access_mi", a.access_mi},
                      {"egress_mi", a.egress_mi},
                      {"transfers", a.transfers},
                      {"fare", a.fare}});
    }
  }
  auto const entries = [](std::vector<constraint_entry> const& v) {
    json arr = json::array();
    for (auto const& e : v) {
      arr.push_back({{"rule", name_of(e.rule)}, {"mode", name_of(e.m)}});
    }
    return arr;
  };
  auto const& f = cs.flags;
  return {{"trip", to_int(cs.trip)},
          {"household", to_int(h.id)},
          {"person", to_int(p.id)},
          {"leg", leg},
          {"observed", label_of(t.observed_mode)},
          {"purpose", name_of(t.trip_purpose)},
          {"members", h.n_members},
          {"vehicles", h.n_vehicles},
          {"income", h.income},
          {"female", p.is_female},
          {"age", p.age},
          {"flags",
           {{"is_weekend", f.is_weekend},
            {"is_rush_hour", f.is_rush_hour},
            {"dest_cbd_rush", f.dest_cbd_rush},
            {"city_suburb_rush_in_tour", f.city_suburb_rush_in_tour},
            {"dest_within_walk", f.dest_within_walk},
            {"age_over_65", f.age_over_65}}},
          {"available_mask", to_mask(cs.available)},
          {"service_mask", to_mask(cs.service)},
          {"chosen", cs.chosen ? json(index_of(*cs.chosen)) : json(nullptr)},
          {"alternatives", alts},
          {"constraint_log", entries(cs.log)},
          {"repairs", entries(cs.repairs)},
          {"eligible", eligible}};
}

observation observation_from_record(json const& rec, bool require_chosen) {
  try {
    choice_set cs;
    cs.trip = trip_id{rec.at("trip").get<std::uint64_t>()};
    cs.available = mode_set{rec.at("available_mask").get<unsigned long>()};
    cs.service =
        mode_set{rec.value("service_mask", rec.at("available_mask").get<unsigned long>())};
    for (auto const m : kAllModes) {
      cs.alternatives[index_of(m)].m = m;
    }
    for (auto const& a : rec.at("alternatives")) {
      auto alt = alternative_from(a);
      alt.available = true;
      cs.alternatives[index_of(alt.m)] = alt;
      cs.service.set(index_of(alt.m));
    }
    for (auto const m : kAllModes) {
      if (cs.service.test(index_of(m)) &&
          !cs.alternatives[index_of(m)].available) {
        cs.service.reset(index_of(m));
      }
    }
    if (!require_chosen) {
      // scoring needs attributes, so repaired modes without service drop out
      cs.available &= cs.service;
    }
    if (cs.available.none()) {
      throw data_error{"trip " + std::to_string(to_int(cs.trip)) +
                       " has no available alternative"};
    }
    auto const chosen = rec.value("chosen", json(nullptr));
    if (!chosen.is_null()) {
      auto const c = chosen.get<std::size_t>();
      if (c >= kModeCount) {
        throw data_error{"chosen index out of range"};
      }
      cs.chosen = kAllModes[c];
      if (!require_chosen && !cs.available.test(c)) {
        cs.chosen.reset();
      }
    }
    if (!cs.chosen && require_chosen) {
      throw data_error{"trip " + std::to_string(to_int(cs.trip)) +
                       " has no chosen mode"};
    }
    if (!cs.chosen) {
      for (auto const m : kAllModes) {
        if (cs.available.test(index_of(m))) {
          cs.chosen = m;
          break;
        }
      }
    }
    auto const f = rec.value("flags", json::object());
    cs.flags.is_weekend = f.value("is_weekend", false);
    cs.flags.is_rush_hour = f.value("is_rush_hour", false);
    cs.flags.dest_cbd_rush = f.value("dest_cbd_rush", false);
    cs.flags.city_suburb_rush_in_tour = f.value("city_suburb_rush_in_tour", false);
    cs.flags.dest_within_walk = f.value("dest_within_walk", false);
    cs.flags.age_over_65 = f.value("age_over_65", false);

    household h;
    h.n_members = rec.value("members", 1U);
    h.n_vehicles = rec.value("vehicles", 0U);
    h.income = rec.value("income", 0.0);
    person p;
    p.is_female = rec.value("female", false);
    p.age = rec.value("age", 0.0);
    trip t;
    t.id = cs.trip;
    auto const purp = parse_purpose(rec.value("purpose", std::string{"Other"}));
    if (!purp) {
      throw data_error{"trip " + std::to_string(to_int(cs.trip)) +
                       ": bad purpose"};
    }
    t.trip_purpose = *purp;
    return make_observation(cs, h, p, t);
  } catch (json::exception const& e) {
    throw data_error{std::string{"choice set record: "} + e.what()};
  }
}

std::string file_sha256(fs::path const& p) {
  auto const data = read_text(p);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw io_error{"sha256 failed for " + p.string()};
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (auto i = 0U; i != len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

}  // namespace mclab
