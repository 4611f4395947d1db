#pragma once

// File formats.
//
// Tensor container (little-endian): five uint64 header words
//   [magic "UCPTNSR3", I1, I2, I3, element tag]
// followed by I1*I2*I3 elements in the canonical first-index-fastest layout.
// Tag 1 = float64 values, tag 2 = uint8 binary (masks).
//
// Matrix CSV: one line per row, comma-separated, full double precision.

#include <bit>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "urbancp/error.hpp"
#include "urbancp/mask.hpp"
#include "urbancp/pipeline.hpp"
#include "urbancp/tensor.hpp"
#include "urbancp/urban.hpp"

namespace urbancp::io {

inline constexpr std::uint64_t kTensorMagic = 0x3352534E54504355ULL;  // "UCPTNSR3"
inline constexpr std::uint64_t kTagFloat64 = 1;
inline constexpr std::uint64_t kTagBinary = 2;

namespace detail {

inline void write_le(std::ostream& os, std::uint64_t v) {
  unsigned char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(v >> (8 * b));
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

inline std::uint64_t read_le(std::istream& is) {
  unsigned char bytes[8];
  is.read(reinterpret_cast<char*>(bytes), 8);
  if (!is) throw IoError("tensor container: truncated file");
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  return v;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Container {
  Dims dims;
  std::uint64_t tag;
  std::vector<double> values;
};

inline void write_container(const std::string& path, const Tensor3& t, std::uint64_t tag) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_le(os, kTensorMagic);
  for (Index d : t.dims()) write_le(os, static_cast<std::uint64_t>(d));
  write_le(os, tag);
  if (tag == kTagFloat64) {
    for (double v : t.data()) write_le(os, std::bit_cast<std::uint64_t>(v));
  } else {
    for (double v : t.data()) os.put(v != 0.0 ? 1 : 0);
  }
  if (!os) throw IoError("failed writing " + path);
}

inline Container read_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  if (read_le(is) != kTensorMagic)
    throw IoError(path + ": not a tensor container (bad magic)");
  Container c;
  for (auto& d : c.dims) {
    const auto v = read_le(is);
    if (v == 0 || v > (1ULL << 31)) throw IoError(path + ": invalid dimension in header");
    d = static_cast<Index>(v);
  }
  c.tag = read_le(is);
  if (c.tag != kTagFloat64 && c.tag != kTagBinary)
    throw IoError(path + ": unknown element tag " + std::to_string(c.tag));
  const auto n = static_cast<std::size_t>(c.dims[0] * c.dims[1] * c.dims[2]);
  c.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (c.tag == kTagFloat64) {
      c.values[i] = std::bit_cast<double>(read_le(is));
    } else {
      const int b = is.get();
      if (b == EOF) throw IoError("tensor container: truncated file");
      if (b != 0 && b != 1) throw IoError(path + ": binary payload holds a value other than 0/1");
      c.values[i] = b;
    }
  }
  if (is.peek() != EOF) throw IoError(path + ": trailing bytes after payload");
  return c;
}

}  // namespace detail

inline void write_tensor(const std::string& path, const Tensor3& t) {
  detail::write_container(path, t, kTagFloat64);
}

inline void write_mask(const std::string& path, const MaskTensor& w) {
  detail::write_container(path, w.values(), kTagBinary);
}

inline Tensor3 read_tensor(const std::string& path) {
  auto c = detail::read_container(path);
  return Tensor3(c.dims, std::move(c.values));
}

inline MaskTensor read_mask(const std::string& path) {
  auto c = detail::read_container(path);
  if (c.tag != kTagBinary) throw IoError(path + ": expected a binary mask container");
  return MaskTensor(Tensor3(c.dims, std::move(c.values)));
}

inline void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << detail::format_double(m(r, c));
    }
    os << '\n';
  }
  if (!os) throw IoError("failed writing " + path);
}

inline std::vector<std::string> split_csv_line(std::string_view line);

inline Matrix read_matrix_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split_csv_line(line)) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw IoError(path + ": non-numeric matrix entry '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(path + ": ragged matrix rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return m;
}

/// Mode-1 unfolding as CSV, for tools that do not read the container.
inline void write_tensor_mode1_csv(const std::string& path, const Tensor3& t) {
  write_matrix_csv(path, matricize(t, 1));
}

/// Splits one CSV record; double quotes delimit fields and "" escapes a quote.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          out.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        out.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back();
    } else {
      out.back() += ch;
    }
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

/// "YYYY-MM-DD HH:MM:SS" in UTC to epoch seconds.
inline std::optional<std::int64_t> parse_datetime(std::string_view s) {
  int y, mo, d, h, mi, sec;
  char tail;
  const std::string str(s);
  if (std::sscanf(str.c_str(), "%4d-%2d-%2d %2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &sec, &tail) != 6)
    return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 60) return std::nullopt;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + sec;
}

struct TrajectoryFile {
  std::vector<TrajectoryPoint> points;
  std::size_t rows = 0;
  std::size_t malformed_rows = 0;
};

namespace detail {
// Keeps at most `limit` distinct objects (0 = all) in first-seen order.
class ObjectLimit {
 public:
  explicit ObjectLimit(std::size_t limit) : limit_(limit) {}
  bool admit(const std::string& id) {
    if (limit_ == 0 || seen_.count(id)) return true;
    if (seen_.size() >= limit_) return false;
    seen_.insert(id);
    return true;
  }

 private:
  std::size_t limit_;
  std::unordered_set<std::string> seen_;
};
}  // namespace detail

/// T-drive style lines `taxi_id,datetime,longitude,latitude`, no header.
inline TrajectoryFile read_tdrive(std::istream& is, std::size_t max_objects = 0) {
  TrajectoryFile out;
  detail::ObjectLimit limit(max_objects);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++out.rows;
    const auto f = split_csv_line(line);
    if (f.size() != 4 || f[0].empty()) {
      ++out.malformed_rows;
      continue;
    }
    const auto ts = parse_datetime(f[1]);
    const auto lon = parse_double(f[2]);
    const auto lat = parse_double(f[3]);
    if (!ts || !lon || !lat) {
      ++out.malformed_rows;
      continue;
    }
    if (!limit.admit(f[0])) continue;
    out.points.push_back({f[0], *ts, *lat, *lon});
  }
  return out;
}

/// Porto style CSV with a header naming at least TIMESTAMP and POLYLINE; the
/// polyline is a JSON array of [lon, lat] sampled every 15 s from TIMESTAMP.
/// Each row is one trip, identified by TRIP_ID when present.
inline TrajectoryFile read_porto(std::istream& is, std::size_t max_objects = 0) {
  constexpr std::int64_t cadence = 15;
  TrajectoryFile out;
  std::string line;
  if (!std::getline(is, line)) return out;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    return std::nullopt;
  };
  const auto ts_col = column("TIMESTAMP");
  const auto poly_col = column("POLYLINE");
  const auto id_col = column("TRIP_ID");
  if (!ts_col || !poly_col) throw IoError("Porto trajectory file lacks TIMESTAMP/POLYLINE header");

  std::size_t trips = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++out.rows;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      ++out.malformed_rows;
      continue;
    }
    const auto start = parse_double(f[*ts_col]);
    nlohmann::json poly = nlohmann::json::parse(f[*poly_col], nullptr, false);
    if (!start || poly.is_discarded() || !poly.is_array()) {
      ++out.malformed_rows;
      continue;
    }
    std::vector<TrajectoryPoint> pts;
    bool ok = true;
    const std::string id = id_col ? f[*id_col] : "row" + std::to_string(out.rows);
    for (std::size_t n = 0; n < poly.size() && ok; ++n) {
      const auto& pair = poly[n];
      ok = pair.is_array() && pair.size() == 2 && pair[0].is_number() && pair[1].is_number();
      if (ok)
        pts.push_back({id, static_cast<std::int64_t>(*start) + cadence * static_cast<std::int64_t>(n),
                       pair[1].get<double>(), pair[0].get<double>()});
    }
    if (!ok) {
      ++out.malformed_rows;
      continue;
    }
    if (max_objects != 0 && trips >= max_objects) continue;
    ++trips;
    out.points.insert(out.points.end(), pts.begin(), pts.end());
  }
  return out;
}

struct PoiFile {
  std::vector<PoiRecord> pois;
  std::size_t malformed_rows = 0;
};

/// CSV with header `lat,lon,category`.
inline PoiFile read_pois(std::istream& is) {
  PoiFile out;
  std::string line;
  if (!std::getline(is, line)) return out;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() != 3 || header[0] != "lat" || header[1] != "lon" || header[2] != "category")
    throw IoError("POI file must start with header 'lat,lon,category'");
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    PoiRecord p;
    if (f.size() == 3) {
      const auto lat = parse_double(f[0]);
      const auto lon = parse_double(f[1]);
      if (lat && lon) p = {*lat, *lon, f[2]};
    }
    if (!p.valid()) {
      ++out.malformed_rows;
      continue;
    }
    out.pois.push_back(std::move(p));
  }
  return out;
}

}  // namespace urbancp::io
