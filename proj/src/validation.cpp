#include "echovel/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "echovel/util.hpp"

namespace echovel {

using nlohmann::json;

void DroneCameraSpec::validate() const {
    if (!(focal_mm > 0.0) || !(sensor_w_mm > 0.0) || !(sensor_h_mm > 0.0) || image_w_px <= 0 ||
        image_h_px <= 0 || !(fps > 0.0)) {
        throw InvalidInput("drone camera spec fields must all be positive");
    }
}

void DroneTrack::validate() const {
    if (observations.size() < 2) {
        throw InvalidInput("drone track " + std::to_string(track_id) +
                           " needs at least 2 observations");
    }
    for (std::size_t i = 0; i < observations.size(); ++i) {
        if (!(observations[i].altitude_m > 0.0)) {
            throw InvalidInput("drone track " + std::to_string(track_id) +
                               ": altitude must be > 0");
        }
        if (i > 0 && observations[i].frame <= observations[i - 1].frame) {
            throw InvalidInput("drone track " + std::to_string(track_id) +
                               ": frame indices must be strictly increasing");
        }
    }
}

Gsd drone_gsd(const DroneCameraSpec& spec, double altitude_m) {
    spec.validate();
    if (!(altitude_m > 0.0)) throw InvalidInput("altitude must be > 0");
    return {altitude_m * spec.sensor_w_mm / (spec.focal_mm * spec.image_w_px),
            altitude_m * spec.sensor_h_mm / (spec.focal_mm * spec.image_h_px)};
}

double drone_distance(const DroneTrack& track, const DroneCameraSpec& spec,
                      DroneDistanceMetric metric) {
    track.validate();
    const DroneObservation& first = track.observations.front();
    const DroneObservation& last = track.observations.back();
    const Gsd gsd = drone_gsd(spec, (first.altitude_m + last.altitude_m) / 2.0);
    const double dx = (last.cx_px - first.cx_px) * gsd.w;
    const double dy = (last.cy_px - first.cy_px) * gsd.h;
    if (metric == DroneDistanceMetric::as_printed) {
        return std::abs(dx) + std::abs(dy);
    }
    return std::hypot(dx, dy);
}

double drone_velocity(const DroneTrack& track, const DroneCameraSpec& spec,
                      DroneDistanceMetric metric) {
    const double distance = drone_distance(track, spec, metric);
    const std::int64_t gap = track.observations.back().frame - track.observations.front().frame;
    if (gap <= 0) throw InvalidInput("drone track frame gap must be positive");
    return distance / static_cast<double>(gap) * spec.fps;
}

std::vector<DroneTrack> parse_drone_tracks_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("empty drone track CSV");
    // Tolerate an optional header row.
    auto is_header = line.find("track_id") != std::string::npos;
    std::vector<DroneTrack> tracks;
    auto find_track = [&tracks](std::int64_t id) -> DroneTrack& {
        for (auto& t : tracks) {
            if (t.track_id == id) return t;
        }
        tracks.push_back({id, {}});
        return tracks.back();
    };
    std::size_t lineno = 1;
    auto parse_line = [&](const std::string& row) {
        if (row.empty()) return;
        std::istringstream ss(row);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 5) {
            throw InvalidInput("drone CSV line " + std::to_string(lineno) +
                               ": expected 5 fields track_id,frame,cx_px,cy_px,altitude_m");
        }
        try {
            DroneObservation obs;
            const std::int64_t id = std::stoll(fields[0]);
            obs.frame = std::stoll(fields[1]);
            obs.cx_px = std::stod(fields[2]);
            obs.cy_px = std::stod(fields[3]);
            obs.altitude_m = std::stod(fields[4]);
            find_track(id).observations.push_back(obs);
        } catch (const std::exception&) {
            throw InvalidInput("drone CSV line " + std::to_string(lineno) + ": bad number");
        }
    };
    if (!is_header) parse_line(line);
    while (std::getline(in, line)) {
        ++lineno;
        parse_line(line);
    }
    for (auto& t : tracks) {
        std::sort(t.observations.begin(), t.observations.end(),
                  [](const DroneObservation& a, const DroneObservation& b) {
                      return a.frame < b.frame;
                  });
        t.validate();
    }
    return tracks;
}

KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) {
        throw InvalidInput("KS test needs two non-empty samples");
    }
    std::vector<double> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const std::size_t na = sa.size(), nb = sb.size();

    // Sweep the pooled sorted values; the CDF gap at each step is an exact
    // integer over na*nb.
    std::int64_t max_num = 0;
    std::size_t ia = 0, ib = 0;
    while (ia < na || ib < nb) {
        const double v = (ia < na && (ib == nb || sa[ia] <= sb[ib])) ? sa[ia] : sb[ib];
        while (ia < na && sa[ia] == v) ++ia;
        while (ib < nb && sb[ib] == v) ++ib;
        const std::int64_t num = std::abs(static_cast<std::int64_t>(ia) *
                                              static_cast<std::int64_t>(nb) -
                                          static_cast<std::int64_t>(ib) *
                                              static_cast<std::int64_t>(na));
        max_num = std::max(max_num, num);
    }
    KsResult out;
    out.statistic =
        static_cast<double>(max_num) / (static_cast<double>(na) * static_cast<double>(nb));

    if (out.statistic == 0.0) {
        out.p_value = 1.0;
        return out;
    }
    const double ne = static_cast<double>(na) * static_cast<double>(nb) /
                      (static_cast<double>(na) + static_cast<double>(nb));
    const double lambda =
        (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * out.statistic;
    if (lambda < 1e-3) {
        out.p_value = 1.0;
        return out;
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100000; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        if (term < 1e-12) break;
        sum += sign * term;
        sign = -sign;
    }
    out.p_value = std::min(1.0, std::max(0.0, 2.0 * sum));
    return out;
}

DescriptiveStats describe(const std::vector<double>& sample) {
    if (sample.empty()) throw InvalidInput("cannot describe an empty sample");
    DescriptiveStats out;
    out.n = sample.size();
    out.min = sample[0];
    out.max = sample[0];

    // One-pass streaming central moments (Welford/Pebay updates).
    double mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
    std::size_t n = 0;
    for (double x : sample) {
        out.min = std::min(out.min, x);
        out.max = std::max(out.max, x);
        const double n1 = static_cast<double>(n);
        ++n;
        const double nd = static_cast<double>(n);
        const double delta = x - mean;
        const double delta_n = delta / nd;
        const double delta_n2 = delta_n * delta_n;
        const double term1 = delta * delta_n * n1;
        mean += delta_n;
        m4 += term1 * delta_n2 * (nd * nd - 3.0 * nd + 3.0) + 6.0 * delta_n2 * m2 -
              4.0 * delta_n * m3;
        m3 += term1 * delta_n * (nd - 2.0) - 3.0 * delta_n * m2;
        m2 += term1;
    }
    out.mean = mean;
    const double nd = static_cast<double>(out.n);
    if (out.n >= 2) {
        out.stddev = std::sqrt(m2 / (nd - 1.0));
    }
    const double mu2 = m2 / nd;
    const double mu3 = m3 / nd;
    const double mu4 = m4 / nd;
    if (out.n >= 3 && mu2 > 0.0) {
        out.skewness = mu3 / std::pow(mu2, 1.5);
    }
    if (out.n >= 4 && mu2 > 0.0) {
        out.excess_kurtosis = mu4 / (mu2 * mu2) - 3.0;
    }
    return out;
}

namespace {

json stats_to_json(const DescriptiveStats& s) {
    json j;
    j["n"] = s.n;
    j["mean"] = s.mean;
    j["std"] = s.stddev ? json(*s.stddev) : json(nullptr);
    j["min"] = s.min;
    j["max"] = s.max;
    j["skewness"] = s.skewness ? json(*s.skewness) : json(nullptr);
    j["excess_kurtosis"] = s.excess_kurtosis ? json(*s.excess_kurtosis) : json(nullptr);
    return j;
}

}  // namespace

std::string ComparisonReport::to_json() const {
    json j;
    j["sample_a"] = stats_to_json(sample_a);
    j["sample_b"] = stats_to_json(sample_b);
    j["ks_statistic"] = ks_statistic;
    j["ks_p_value"] = ks_p_value;
    return j.dump();
}

ComparisonReport compare_samples(const std::vector<double>& a, const std::vector<double>& b) {
    ComparisonReport report;
    report.sample_a = describe(a);
    report.sample_b = describe(b);
    const KsResult ks = ks_two_sample(a, b);
    report.ks_statistic = ks.statistic;
    report.ks_p_value = ks.p_value;
    return report;
}

namespace {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

}  // namespace

TimeStamp parse_iso8601(const std::string& text) {
    // Accepted forms: YYYY-MM-DD[T ]hh:mm:ss[.frac][Z|+hh:mm|-hh:mm]
    int y = 0, mo = 0, d = 0, hh = 0, mi = 0, ss = 0;
    if (text.size() < 19 || text[4] != '-' || text[7] != '-' ||
        (text[10] != 'T' && text[10] != ' ') || text[13] != ':' || text[16] != ':') {
        throw InvalidInput("bad ISO 8601 timestamp: " + text);
    }
    auto num = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (text[i] < '0' || text[i] > '9') {
                throw InvalidInput("bad ISO 8601 timestamp: " + text);
            }
            v = v * 10 + (text[i] - '0');
        }
        return v;
    };
    y = num(0, 4);
    mo = num(5, 2);
    d = num(8, 2);
    hh = num(11, 2);
    mi = num(14, 2);
    ss = num(17, 2);
    std::size_t pos = 19;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    }
    int offset_s = 0;
    if (pos < text.size()) {
        if (text[pos] == 'Z') {
            ++pos;
        } else if (text[pos] == '+' || text[pos] == '-') {
            const int sign = text[pos] == '+' ? 1 : -1;
            ++pos;
            if (pos + 5 > text.size() || text[pos + 2] != ':') {
                throw InvalidInput("bad ISO 8601 offset: " + text);
            }
            offset_s = sign * (num(pos, 2) * 3600 + num(pos + 3, 2) * 60);
            pos += 5;
        }
    }
    if (pos != text.size()) throw InvalidInput("trailing characters in timestamp: " + text);
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || hh > 23 || mi > 59 || ss > 60) {
        throw InvalidInput("timestamp fields out of range: " + text);
    }
    TimeStamp t;
    t.second_of_day = hh * 3600 + mi * 60 + ss;
    t.epoch_s = days_from_civil(y, mo, d) * 86400 + t.second_of_day - offset_s;
    return t;
}

void GpsTrack::validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].speed_kmh < 0.0) {
            throw InvalidInput("gps track " + std::to_string(track_id) + ": negative speed");
        }
        if (i > 0 && points[i].time.epoch_s < points[i - 1].time.epoch_s) {
            throw InvalidInput("gps track " + std::to_string(track_id) +
                               ": timestamps must be non-decreasing");
        }
    }
}

std::vector<GpsMatch> match_gps_to_estimates(const std::vector<GpsTrack>& tracks,
                                             const std::vector<LocatedEstimate>& estimates,
                                             const GpsMatchOptions& options) {
    struct Candidate {
        const GpsTrack* track;
        const GpsPoint* point;
    };
    std::vector<Candidate> candidates;
    for (const auto& t : tracks) {
        for (const auto& p : t.points) {
            if (p.time.second_of_day >= options.window_start_s &&
                p.time.second_of_day <= options.window_end_s) {
                candidates.push_back({&t, &p});
            }
        }
    }

    // Deterministic estimate order so the result is independent of input
    // ordering.
    std::vector<const LocatedEstimate*> ordered;
    for (const auto& e : estimates) ordered.push_back(&e);
    std::sort(ordered.begin(), ordered.end(),
              [](const LocatedEstimate* a, const LocatedEstimate* b) {
                  if (a->image_id != b->image_id) return a->image_id < b->image_id;
                  return a->estimate.echo_id < b->estimate.echo_id;
              });

    const double buf2 = options.buffer_m * options.buffer_m;
    std::vector<GpsMatch> matches;
    for (const LocatedEstimate* est : ordered) {
        const Candidate* best = nullptr;
        double best_dt = 0.0;
        double best_dist = 0.0;
        for (const auto& c : candidates) {
            const double dx = c.point->x - est->red_world.x;
            const double dy = c.point->y - est->red_world.y;
            const double d2 = dx * dx + dy * dy;
            if (d2 > buf2) continue;
            const double dt =
                std::abs(static_cast<double>(c.point->time.epoch_s - est->capture.epoch_s));
            if (dt > options.time_tolerance_s) continue;
            const bool wins =
                best == nullptr || dt < best_dt ||
                (dt == best_dt &&
                 (c.track->track_id < best->track->track_id ||
                  (c.track->track_id == best->track->track_id && d2 < best_dist * best_dist)));
            if (wins) {
                best = &c;
                best_dt = dt;
                best_dist = std::sqrt(d2);
            }
        }
        if (best) {
            matches.push_back({est->image_id, est->estimate.echo_id, best->track->track_id,
                               est->estimate.speed_kmh, best->point->speed_kmh, best_dist,
                               best_dt});
        }
    }
    return matches;
}

namespace {

ResidualBucket bucket_stats(const std::vector<double>& values) {
    ResidualBucket b;
    b.n = values.size();
    if (values.empty()) return b;
    const DescriptiveStats s = describe(values);
    b.mean = s.mean;
    b.stddev = s.stddev;
    b.min = s.min;
    b.max = s.max;
    return b;
}

json bucket_to_json(const ResidualBucket& b) {
    json j;
    j["n"] = b.n;
    j["mean"] = b.mean ? json(*b.mean) : json(nullptr);
    j["std"] = b.stddev ? json(*b.stddev) : json(nullptr);
    j["min"] = b.min ? json(*b.min) : json(nullptr);
    j["max"] = b.max ? json(*b.max) : json(nullptr);
    return j;
}

}  // namespace

ResidualReport gps_residuals(const std::vector<GpsMatch>& pairs, double split_kmh) {
    if (pairs.empty()) throw InvalidInput("gps_residuals needs at least one matched pair");
    ResidualReport report;
    report.split_kmh = split_kmh;
    std::vector<double> low, high;
    for (const auto& p : pairs) {
        ResidualRow row;
        row.match = p;
        row.residual_kmh = p.predicted_kmh - p.gps_kmh;
        report.rows.push_back(row);
        (p.predicted_kmh < split_kmh ? low : high).push_back(row.residual_kmh);
    }
    std::sort(report.rows.begin(), report.rows.end(),
              [](const ResidualRow& a, const ResidualRow& b) {
                  if (a.match.image_id != b.match.image_id) {
                      return a.match.image_id < b.match.image_id;
                  }
                  return a.match.echo_id < b.match.echo_id;
              });
    report.low = bucket_stats(low);
    report.high = bucket_stats(high);
    return report;
}

std::string ResidualReport::to_json() const {
    json j;
    j["split_kmh"] = split_kmh;
    j["low_bucket"] = bucket_to_json(low);
    j["high_bucket"] = bucket_to_json(high);
    json rows_json = json::array();
    for (const auto& r : rows) {
        json e;
        e["image_id"] = r.match.image_id;
        e["echo_id"] = r.match.echo_id;
        e["gps_track_id"] = r.match.gps_track_id;
        e["predicted_kmh"] = r.match.predicted_kmh;
        e["gps_kmh"] = r.match.gps_kmh;
        e["residual_kmh"] = r.residual_kmh;
        e["distance_m"] = r.match.distance_m;
        e["time_delta_s"] = r.match.time_delta_s;
        rows_json.push_back(std::move(e));
    }
    j["residuals"] = std::move(rows_json);
    return j.dump();
}

}  // namespace echovel
