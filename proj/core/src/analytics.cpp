#include "mclab/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "mclab/csv.hpp"

namespace mclab {

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string pct_of(std::size_t n, std::size_t total) {
  return pct(total == 0 ? 0.0 : 100.0 * static_cast<double>(n) / total);
}

std::optional<std::string> origin_zone(population const& pop, trip_id id) {
  return pop.trip_of(id).origin.zone;
}

}  // namespace

std::size_t cross_tab::column_total(std::size_t c) const {
  auto s = std::size_t{0};
  for (auto const& r : counts) {
    s += r[c];
  }
  return s;
}

double cross_tab::percent(std::size_t r, std::size_t c) const {
  auto const t = column_total(c);
  return t == 0 ? 0.0 : 100.0 * static_cast<double>(counts[r][c]) / t;
}

void cross_tab::write_csv(std::ostream& out) const {
  std::vector<std::string> header{"mode"};
  for (auto const& c : columns) {
    header.push_back(c + "_count");
    header.push_back(c + "_percent");
  }
  csv::write_row(out, header);
  for (auto r = std::size_t{0}; r != rows.size(); ++r) {
    std::vector<std::string> f{rows[r]};
    for (auto c = std::size_t{0}; c != columns.size(); ++c) {
      f.push_back(std::to_string(counts[r][c]));
      f.push_back(pct(percent(r, c)));
    }
    csv::write_row(out, f);
  }
  std::vector<std::string> total{"Total"};
  for (auto c = std::size_t{0}; c != columns.size(); ++c) {
    total.push_back(std::to_string(column_total(c)));
    total.push_back(pct(column_total(c) == 0 ? 0.0 : 100.0));
  }
  csv::write_row(out, total);
}

cross_tab previous_mode_crosstab(population const& pop) {
  std::array<std::array<std::size_t, 2>, kRawModeCount> tally{};
  for (auto const& tr : pop.tours) {
    for (auto i = std::size_t{1}; i < tr.trips.size(); ++i) {
      auto const& prev = pop.trip_of(tr.trips[i - 1]);
      if (prev.observed_mode != raw_mode::auto_driver) {
        continue;
      }
      auto const& cur = pop.trip_of(tr.trips[i]);
      auto const col = cur.trip_purpose == purpose::return_home ? 0 : 1;
      ++tally[static_cast<std::size_t>(cur.observed_mode)][col];
    }
  }
  cross_tab ct;
  ct.columns = {"ReturnHome", "Others"};
  for (auto r = std::size_t{0}; r != kRawModeCount; ++r) {
    if (tally[r][0] + tally[r][1] == 0) {
      continue;
    }
    ct.rows.emplace_back(label_of(static_cast<raw_mode>(r)));
    ct.counts.push_back({tally[r][0], tally[r][1]});
  }
  return ct;
}

std::vector<share_row> vehicle_in_use_mode_share(
    population const& pop,
    std::map<household_id, vehicle_timeline> const& timelines) {
  std::array<share_row, kRawModeCount> rows{};
  for (auto const& t : pop.trips) {
    auto const& p = pop.person_of(t.person);
    auto const& h = pop.household_of(p.household);
    if (h.n_vehicles != 1) {
      continue;
    }
    auto& row = rows[static_cast<std::size_t>(t.observed_mode)];
    ++row.total;
    auto const it = timelines.find(h.id);
    if (it != timelines.end() &&
        it->second.away_at(t.depart.absolute(), t.person) >= 1) {
      ++row.hits;
    }
  }
  std::vector<share_row> out;
  for (auto r = std::size_t{0}; r != kRawModeCount; ++r) {
    if (rows[r].total == 0) {
      continue;
    }
    rows[r].label = std::string{label_of(static_cast<raw_mode>(r))};
    out.push_back(rows[r]);
  }
  return out;
}

void write_share_csv(std::ostream& out, std::vector<share_row> const& rows) {
  csv::write_row(out, {"mode", "vehicle_in_use", "total", "percent"});
  for (auto const& r : rows) {
    csv::write_row(out, {r.label, std::to_string(r.hits),
                         std::to_string(r.total), pct_of(r.hits, r.total)});
  }
}

namespace {

bool has_cta(mode_set s) { return s.test(index_of(mode::cta)); }
bool has_pace(mode_set s) { return s.test(index_of(mode::pace)); }
bool has_rail(mode_set s) {
  return s.test(index_of(mode::hrail_slow)) || s.test(index_of(mode::hrail_fast));
}
bool has_any(mode_set s) { return has_cta(s) || has_pace(s) || has_rail(s); }

}  // namespace

std::vector<availability_column> transit_availability_report(
    std::span<choice_set const> sets) {
  std::vector<availability_column> cols{
      {"CTA"}, {"Pace"}, {"HeavyRail"}, {"AnyTransit"}};
  for (auto const& cs : sets) {
    bool const flags[] = {has_cta(cs.service), has_pace(cs.service),
                          has_rail(cs.service), has_any(cs.service)};
    for (auto i = 0; i != 4; ++i) {
      ++(flags[i] ? cols[i].available : cols[i].not_available);
    }
  }
  return cols;
}

void write_availability_csv(std::ostream& out,
                            std::vector<availability_column> const& cols) {
  csv::write_row(out, {"agency", "not_available", "not_available_percent",
                       "available", "available_percent", "sum"});
  for (auto const& c : cols) {
    csv::write_row(out, {c.label, std::to_string(c.not_available),
                         pct_of(c.not_available, c.sum()),
                         std::to_string(c.available),
                         pct_of(c.available, c.sum()), std::to_string(c.sum())});
  }
}

std::vector<zone_availability> transit_availability_by_zone(
    std::span<choice_set const> sets, population const& pop) {
  std::map<std::string, zone_availability> by_zone;
  for (auto const& cs : sets) {
    auto const z = origin_zone(pop, cs.trip);
    if (!z) {
      continue;
    }
    auto& row = by_zone[*z];
    row.zone = *z;
    ++row.trips;
    if (has_any(cs.service)) {
      ++row.any_transit;
    }
  }
  std::vector<zone_availability> out;
  for (auto& [_, r] : by_zone) {
    out.push_back(r);
  }
  return out;
}

std::vector<mismatch_row> od_transit_mismatch(std::span<choice_set const> sets,
                                              population const& pop) {
  using key = std::pair<std::string, std::string>;
  // per zone pair: [agency][has?]
  std::map<key, std::array<std::array<std::size_t, 2>, 3>> pairs;
  for (auto const& cs : sets) {
    auto const& t = pop.trip_of(cs.trip);
    if (!t.origin.zone || !t.destination.zone) {
      continue;
    }
    auto& cell = pairs[{*t.origin.zone, *t.destination.zone}];
    ++cell[0][has_cta(cs.service) ? 1 : 0];
    ++cell[1][has_pace(cs.service) ? 1 : 0];
    ++cell[2][has_rail(cs.service) ? 1 : 0];
  }
  std::vector<mismatch_row> out{{"CTA"}, {"Pace"}, {"Rail"}, {"Sum"}};
  for (auto const& [_, cell] : pairs) {
    for (auto a = 0; a != 3; ++a) {
      if (cell[a][0] > 0 && cell[a][1] > 0) {
        out[a].without += cell[a][0];
        out[a].with += cell[a][1];
      }
    }
  }
  for (auto a = 0; a != 3; ++a) {
    out[3].without += out[a].without;
    out[3].with += out[a].with;
  }
  return out;
}

dispersion_report travel_time_dispersion(std::span<time_observation const> obs,
                                         std::size_t min_n) {
  std::map<std::tuple<std::string, std::string, std::string>,
           std::vector<double>>
      groups;
  for (auto const& o : obs) {
    groups[{o.o_zone, o.d_zone, o.mode}].push_back(o.time);
  }
  dispersion_report rep;
  for (auto const& [k, times] : groups) {
    if (times.size() <= min_n) {
      continue;
    }
    auto const n = static_cast<double>(times.size());
    auto mean = 0.0;
    for (auto const t : times) {
      mean += t;
    }
    mean /= n;
    auto ss = 0.0;
    for (auto const t : times) {
      ss += (t - mean) * (t - mean);
    }
    dispersion_record r;
    std::tie(r.o_zone, r.d_zone, r.mode) = k;
    r.n = times.size();
    r.mean = mean;
    r.std_dev = std::sqrt(ss / n);
    r.ratio = mean == 0.0 ? 0.0 : r.std_dev / std::abs(mean);
    rep.records.push_back(r);

    auto& h = rep.histogram[r.mode];
    auto const bin = static_cast<std::size_t>(std::floor(r.ratio / rep.bin_width));
    if (h.size() <= bin) {
      h.resize(bin + 1, 0);
    }
    ++h[bin];
  }
  return rep;
}

std::vector<zone_share> ridership_by_zone(population const& pop) {
  std::map<std::string, zone_share> by_zone;
  for (auto const& t : pop.trips) {
    if (!t.origin.zone) {
      continue;
    }
    auto& z = by_zone[*t.origin.zone];
    z.zone = *t.origin.zone;
    ++z.total;
    if (is_transit_label(t.observed_mode)) {
      ++z.transit;
    }
  }
  std::vector<zone_share> out;
  for (auto& [_, z] : by_zone) {
    out.push_back(z);
  }
  return out;
}

}  // namespace mclab
