#include "mclab/gtfs.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "mclab/csv.hpp"
#include "mclab/error.hpp"

namespace mclab::gtfs {

namespace {

constexpr std::array<std::string_view, 7> kWeekdayColumns = {
    "monday", "tuesday", "wednesday", "thursday",
    "friday", "saturday", "sunday"};

std::string const& cell(std::vector<std::string> const& row, std::size_t i) {
  static std::string const kEmpty;
  return i < row.size() ? row[i] : kEmpty;
}

csv::table table_of(file_map const& files, std::string const& name,
                    bool required) {
  auto const it = files.find(name);
  if (it == files.end()) {
    if (required) {
      throw feed_error{"missing required file " + name};
    }
    return {};
  }
  return csv::parse(it->second);
}

template <typename T>
std::unordered_map<std::string, std::uint32_t> sort_and_index(
    std::vector<T>& v, std::string const& file) {
  std::sort(v.begin(), v.end(),
            [](T const& a, T const& b) { return a.id < b.id; });
  std::unordered_map<std::string, std::uint32_t> index;
  for (auto i = 0U; i != v.size(); ++i) {
    if (!index.emplace(v[i].id, i).second) {
      throw feed_error{file + ": duplicate id \"" + v[i].id + "\""};
    }
  }
  return index;
}

std::optional<std::int32_t> parse_time(std::string const& s) {
  if (s.empty()) {
    return std::nullopt;
  }
  try {
    auto const t = parse_hms(s);
    if (t >= kMaxSecondsOfDay) {
      return std::nullopt;
    }
    return t;
  } catch (domain_error const&) {
    return std::nullopt;
  }
}

}  // namespace

std::optional<std::uint32_t> feed::stop_index(std::string_view id) const {
  auto const it = stop_lookup_.find(std::string{id});
  return it == stop_lookup_.end() ? std::nullopt
                                  : std::optional<std::uint32_t>{it->second};
}

std::optional<std::uint32_t> feed::trip_index(std::string_view id) const {
  auto const it = trip_lookup_.find(std::string{id});
  return it == trip_lookup_.end() ? std::nullopt
                                  : std::optional<std::uint32_t>{it->second};
}

std::optional<std::uint32_t> feed::service_index(std::string_view id) const {
  auto const it = service_lookup_.find(std::string{id});
  return it == service_lookup_.end() ? std::nullopt
                                     : std::optional<std::uint32_t>{it->second};
}

bool feed::active_on(std::uint32_t s, date d) const {
  auto const& svc = services[s];
  return svc.start <= d && d <= svc.end &&
         svc.weekdays.test(iso_weekday_index(d));
}

void feed::finalize() {
  stop_lookup_.clear();
  trip_lookup_.clear();
  service_lookup_.clear();
  for (auto i = 0U; i != stops.size(); ++i) {
    stop_lookup_[stops[i].id] = i;
  }
  for (auto i = 0U; i != trips.size(); ++i) {
    trip_lookup_[trips[i].id] = i;
  }
  for (auto i = 0U; i != services.size(); ++i) {
    service_lookup_[services[i].id] = i;
  }

  trip_ranges_.assign(trips.size(), {0, 0});
  for (auto i = std::size_t{0}; i < stop_times.size();) {
    auto j = i;
    while (j < stop_times.size() && stop_times[j].trip == stop_times[i].trip) {
      ++j;
    }
    trip_ranges_[stop_times[i].trip] = {i, j};
    i = j;
  }

  stop_events_.assign(stops.size(), {});
  for (auto i = 0U; i != stop_times.size(); ++i) {
    stop_events_[stop_times[i].stop].push_back(i);
  }
  for (auto& ev : stop_events_) {
    std::sort(ev.begin(), ev.end(), [&](auto a, auto b) {
      auto const& x = stop_times[a];
      auto const& y = stop_times[b];
      return x.departure != y.departure ? x.departure < y.departure
                                        : x.trip < y.trip;
    });
  }
}

feed parse_feed(file_map const& files, std::string agency) {
  feed f;
  f.agency = std::move(agency);

  // Read every required table up front so a missing file is reported before
  // any content error.
  auto const stops_t = table_of(files, "stops.txt", true);
  auto const routes_t = table_of(files, "routes.txt", true);
  auto const trips_t = table_of(files, "trips.txt", true);
  auto const times_t = table_of(files, "stop_times.txt", true);
  auto const cal_t = table_of(files, "calendar.txt", true);

  auto const need = [](csv::table const& t,
                       std::vector<std::string_view> const& cols,
                       std::string const& file) {
    try {
      return csv::require_columns(t, cols, file);
    } catch (schema_error const& e) {
      throw feed_error{e.what()};
    }
  };

  {
    auto const c = need(stops_t, {"stop_id", "stop_lat", "stop_lon"}, "stops.txt");
    auto const name_col = stops_t.column("stop_name");
    auto const zone_col = stops_t.column("zone_id");
    for (auto const& row : stops_t.rows) {
      auto const lat = csv::to_double(cell(row, c[1]));
      auto const lon = csv::to_double(cell(row, c[2]));
      if (cell(row, c[0]).empty() || !lat || !lon || std::abs(*lat) > 90.0 ||
          std::abs(*lon) > 180.0) {
        ++f.rejected["stops.txt"];
        continue;
      }
      std::optional<std::string> zone;
      if (zone_col && !cell(row, *zone_col).empty()) {
        zone = cell(row, *zone_col);
      }
      f.stops.push_back(stop{cell(row, c[0]),
                             name_col ? cell(row, *name_col) : std::string{},
                             geo_point{*lat, *lon, zone}});
    }
  }
  auto const stop_idx = sort_and_index(f.stops, "stops.txt");

  {
    auto const c = need(routes_t, {"route_id"}, "routes.txt");
    auto const type_col = routes_t.column("route_type");
    for (auto const& row : routes_t.rows) {
      auto type = std::optional<long long>{3};
      if (type_col) {
        type = csv::to_int(cell(row, *type_col));
      }
      if (cell(row, c[0]).empty() || !type) {
        ++f.rejected["routes.txt"];
        continue;
      }
      f.routes.push_back(route{cell(row, c[0]), static_cast<int>(*type)});
    }
  }
  auto const route_idx = sort_and_index(f.routes, "routes.txt");

  {
    std::vector<std::string_view> cols = {"service_id"};
    cols.insert(cols.end(), kWeekdayColumns.begin(), kWeekdayColumns.end());
    cols.push_back("start_date");
    cols.push_back("end_date");
    auto const c = need(cal_t, cols, "calendar.txt");
    if (cal_t.rows.empty()) {
      throw feed_error{"calendar.txt has no service rows"};
    }
    for (auto const& row : cal_t.rows) {
      service s;
      s.id = cell(row, c[0]);
      auto ok = !s.id.empty();
      for (auto d = 0U; d != 7 && ok; ++d) {
        auto const& v = cell(row, c[1 + d]);
        ok = v == "0" || v == "1";
        s.weekdays.set(d, v == "1");
      }
      try {
        s.start = parse_date(cell(row, c[8]));
        s.end = parse_date(cell(row, c[9]));
      } catch (domain_error const&) {
        ok = false;
      }
      if (!ok || s.end < s.start) {
        ++f.rejected["calendar.txt"];
        continue;
      }
      f.services.push_back(std::move(s));
    }
    if (f.services.empty()) {
      throw feed_error{"calendar.txt has no valid service rows"};
    }
  }
  auto const service_idx = sort_and_index(f.services, "calendar.txt");

  {
    auto const c = need(trips_t, {"route_id", "service_id", "trip_id"}, "trips.txt");
    for (auto const& row : trips_t.rows) {
      auto const r = route_idx.find(cell(row, c[0]));
      auto const s = service_idx.find(cell(row, c[1]));
      if (cell(row, c[2]).empty() || r == route_idx.end() ||
          s == service_idx.end()) {
        ++f.rejected["trips.txt"];
        continue;
      }
      f.trips.push_back(trip{cell(row, c[2]), r->second, s->second});
    }
  }
  auto const trip_idx = sort_and_index(f.trips, "trips.txt");

  {
    auto const c = need(times_t,
                        {"trip_id", "arrival_time", "departure_time", "stop_id",
                         "stop_sequence"},
                        "stop_times.txt");
    for (auto const& row : times_t.rows) {
      auto const t = trip_idx.find(cell(row, c[0]));
      auto const s = stop_idx.find(cell(row, c[3]));
      auto const arr = parse_time(cell(row, c[1]));
      auto const dep = parse_time(cell(row, c[2]));
      auto const seq = csv::to_int(cell(row, c[4]));
      if (t == trip_idx.end() || s == stop_idx.end() || !arr || !dep || !seq ||
          *seq < 0 || *dep < *arr) {
        ++f.rejected["stop_times.txt"];
        continue;
      }
      f.stop_times.push_back(stop_time{t->second, s->second, *arr, *dep,
                                       static_cast<std::uint32_t>(*seq)});
    }
    std::sort(f.stop_times.begin(), f.stop_times.end(),
              [](stop_time const& a, stop_time const& b) {
                return a.trip != b.trip ? a.trip < b.trip
                                        : a.sequence < b.sequence;
              });
    for (auto i = std::size_t{1}; i < f.stop_times.size(); ++i) {
      auto const& a = f.stop_times[i - 1];
      auto const& b = f.stop_times[i];
      if (a.trip == b.trip && a.sequence == b.sequence) {
        throw feed_error{"stop_times.txt: duplicate stop_sequence " +
                         std::to_string(a.sequence) + " in trip " +
                         f.trips[a.trip].id};
      }
    }
  }

  if (auto const fa = table_of(files, "fare_attributes.txt", false);
      !fa.header.empty()) {
    auto const price_col = fa.column("price");
    auto const window_col = fa.column("transfer_duration");
    auto const transfer_col = fa.column("transfer_price");
    if (!price_col) {
      throw feed_error{"fare_attributes.txt: missing column \"price\""};
    }
    for (auto const& row : fa.rows) {
      auto const price = csv::to_double(cell(row, *price_col));
      auto window = std::optional<long long>{0};
      if (window_col && !cell(row, *window_col).empty()) {
        window = csv::to_int(cell(row, *window_col));
      }
      auto transfer = std::optional<double>{0.0};
      if (transfer_col && !cell(row, *transfer_col).empty()) {
        transfer = csv::to_double(cell(row, *transfer_col));
      }
      if (!price || !window || !transfer || *price < 0.0 || *window < 0 ||
          *transfer < 0.0) {
        ++f.rejected["fare_attributes.txt"];
        continue;
      }
      if (!f.fares) {
        f.fares = fare_rule{*price, *transfer,
                            static_cast<std::int32_t>(*window), {}};
      }
    }
  }
  if (auto const fb = table_of(files, "fare_distance_bands.txt", false);
      !fb.header.empty()) {
    auto const c = need(fb, {"max_miles", "price"}, "fare_distance_bands.txt");
    if (!f.fares) {
      throw feed_error{
          "fare_distance_bands.txt requires fare_attributes.txt"};
    }
    for (auto const& row : fb.rows) {
      auto const mi = csv::to_double(cell(row, c[0]));
      auto const price = csv::to_double(cell(row, c[1]));
      if (!mi || !price || *mi <= 0.0 || *price < 0.0) {
        ++f.rejected["fare_distance_bands.txt"];
        continue;
      }
      f.fares->distance_bands.emplace_back(*mi, *price);
    }
    std::sort(f.fares->distance_bands.begin(), f.fares->distance_bands.end());
  }

  f.finalize();
  return f;
}

feed parse_feed(std::string const& directory, std::string agency) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) {
    throw feed_error{"feed directory not found: " + directory};
  }
  file_map files;
  for (auto const& name :
       {"stops.txt", "routes.txt", "trips.txt", "stop_times.txt",
        "calendar.txt", "fare_attributes.txt", "fare_distance_bands.txt"}) {
    auto const p = fs::path{directory} / name;
    if (!fs::exists(p)) {
      continue;
    }
    std::ifstream in{p, std::ios::binary};
    if (!in) {
      throw io_error{"cannot open " + p.string()};
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    files[name] = ss.str();
  }
  return parse_feed(files, std::move(agency));
}

file_map serialize_feed(feed const& f) {
  file_map files;
  auto const emit = [&](std::string const& name,
                        std::vector<std::vector<std::string>> const& rows) {
    std::ostringstream out;
    for (auto const& r : rows) {
      csv::write_row(out, r);
    }
    files[name] = out.str();
  };

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"stop_id", "stop_name", "stop_lat", "stop_lon", "zone_id"});
  for (auto const& s : f.stops) {
    rows.push_back({s.id, s.name, csv::format_double(s.pos.lat),
                    csv::format_double(s.pos.lon), s.pos.zone.value_or("")});
  }
  emit("stops.txt", rows);

  rows = {{"route_id", "agency_id", "route_type"}};
  for (auto const& r : f.routes) {
    rows.push_back({r.id, f.agency, std::to_string(r.type)});
  }
  emit("routes.txt", rows);

  rows = {{"route_id", "service_id", "trip_id"}};
  for (auto const& t : f.trips) {
    rows.push_back({f.routes[t.route].id, f.services[t.service].id, t.id});
  }
  emit("trips.txt", rows);

  rows = {{"trip_id", "arrival_time", "departure_time", "stop_id",
           "stop_sequence"}};
  for (auto const& st : f.stop_times) {
    rows.push_back({f.trips[st.trip].id, format_hms(st.arrival),
                    format_hms(st.departure), f.stops[st.stop].id,
                    std::to_string(st.sequence)});
  }
  emit("stop_times.txt", rows);

  rows = {{"service_id", "monday", "tuesday", "wednesday", "thursday",
           "friday", "saturday", "sunday", "start_date", "end_date"}};
  for (auto const& s : f.services) {
    std::vector<std::string> r{s.id};
    for (auto d = 0U; d != 7; ++d) {
      r.push_back(s.weekdays.test(d) ? "1" : "0");
    }
    r.push_back(format_gtfs_date(s.start));
    r.push_back(format_gtfs_date(s.end));
    rows.push_back(std::move(r));
  }
  emit("calendar.txt", rows);

  if (f.fares) {
    emit("fare_attributes.txt",
         {{"fare_id", "price", "currency_type", "payment_method",
           "transfers", "transfer_duration", "transfer_price"},
          {"base", csv::format_double(f.fares->base), "USD", "0", "",
           std::to_string(f.fares->transfer_window_sec),
           csv::format_double(f.fares->transfer)}});
    if (!f.fares->distance_bands.empty()) {
      rows = {{"max_miles", "price"}};
      for (auto const& [mi, price] : f.fares->distance_bands) {
        rows.push_back({csv::format_double(mi), csv::format_double(price)});
      }
      emit("fare_distance_bands.txt", rows);
    }
  }
  return files;
}

void write_feed(feed const& f, std::string const& directory) {
  std::filesystem::create_directories(directory);
  for (auto const& [name, content] : serialize_feed(f)) {
    auto const p = std::filesystem::path{directory} / name;
    std::ofstream out{p, std::ios::binary};
    if (!out) {
      throw io_error{"cannot write " + p.string()};
    }
    out << content;
  }
}

bool service_active(feed const& f, std::string_view service_id, date d) {
  auto const s = f.service_index(service_id);
  if (!s) {
    throw key_error{"unknown service \"" + std::string{service_id} + "\""};
  }
  return f.active_on(*s, d);
}

std::vector<stop_hit> stops_within(feed const& f, geo_point const& p,
                                   double radius_miles) {
  if (!(radius_miles >= 0.0)) {
    throw domain_error{"search radius must be non-negative"};
  }
  // Great-circle distance is at least the meridian arc between latitudes.
  constexpr auto kMilesPerDegree = kEarthRadiusMiles * std::numbers::pi / 180.0;
  std::vector<stop_hit> hits;
  for (auto i = 0U; i != f.stops.size(); ++i) {
    auto const& pos = f.stops[i].pos;
    if (std::abs(pos.lat - p.lat) * kMilesPerDegree > radius_miles * 1.000001) {
      continue;
    }
    auto const d = haversine_miles(p, pos);
    if (d <= radius_miles) {
      hits.push_back(stop_hit{i, d});
    }
  }
  std::sort(hits.begin(), hits.end(), [](stop_hit const& a, stop_hit const& b) {
    return a.distance_miles != b.distance_miles
               ? a.distance_miles < b.distance_miles
               : a.stop < b.stop;
  });
  return hits;
}

void for_each_departure(
    feed const& f, std::uint32_t stop, std::int64_t from_abs,
    std::int64_t to_abs,
    std::function<void(std::uint32_t, std::int64_t)> const& visit) {
  if (to_abs < from_abs) {
    return;
  }
  auto const& events = f.stop_events(stop);
  if (events.empty()) {
    return;
  }
  auto const first_day = from_abs / kSecondsPerDay - 1;
  auto const last_day = to_abs / kSecondsPerDay;
  for (auto day = first_day; day <= last_day; ++day) {
    auto const base = day * kSecondsPerDay;
    auto const lo = from_abs - base;
    auto const hi = to_abs - base;
    if (hi < 0 || lo >= kMaxSecondsOfDay) {
      continue;
    }
    auto const service_day = date_from_day_number(day);
    auto it = std::lower_bound(events.begin(), events.end(), lo,
                               [&](std::uint32_t ev, std::int64_t v) {
                                 return f.stop_times[ev].departure < v;
                               });
    for (; it != events.end() && f.stop_times[*it].departure <= hi; ++it) {
      auto const& st = f.stop_times[*it];
      if (f.active_on(f.trips[st.trip].service, service_day)) {
        visit(*it, base + st.departure);
      }
    }
  }
}

std::vector<departure> departures(feed const& f, std::string_view stop_id,
                                  time_stamp from, time_stamp to) {
  auto const s = f.stop_index(stop_id);
  if (!s) {
    throw key_error{"unknown stop \"" + std::string{stop_id} + "\""};
  }
  if (to < from) {
    throw domain_error{"departure window ends before it starts"};
  }
  std::vector<std::pair<std::int64_t, std::uint32_t>> found;
  for_each_departure(f, *s, from.absolute(), to.absolute(),
                     [&](std::uint32_t ev, std::int64_t at) {
                       found.emplace_back(at, ev);
                     });
  std::sort(found.begin(), found.end(), [&](auto const& a, auto const& b) {
    if (a.first != b.first) {
      return a.first < b.first;
    }
    return f.trips[f.stop_times[a.second].trip].id <
           f.trips[f.stop_times[b.second].trip].id;
  });
  std::vector<departure> out;
  out.reserve(found.size());
  for (auto const& [at, ev] : found) {
    auto const& st = f.stop_times[ev];
    // Report the service day the trip belongs to, so times past midnight
    // keep the schedule's notation.
    auto const day = (at - st.departure) / kSecondsPerDay;
    out.push_back(departure{st.trip, f.trips[st.trip].route, st.stop,
                            time_stamp{date_from_day_number(day), st.departure}});
  }
  return out;
}

}  // namespace mclab::gtfs
