#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "parapde/grid.hpp"

namespace parapde {

static_assert(std::endian::native == std::endian::little,
              "dataset payload format is little-endian float64");

using Dataset = std::variant<Field1D, Field2D>;

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("load_dataset: bad numeric value for key '" + key + "'");
  }
}

inline std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream stream(s);
  while (std::getline(stream, item, ',')) out.push_back(item);
  return out;
}

inline bool parse_flag(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::runtime_error("load_dataset: bad boolean value for key '" + key + "'");
}

inline void write_payload(const std::string& path, const std::vector<double>& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw std::runtime_error("save_dataset: write failed for " + path);
}

inline std::vector<double> read_payload(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
  const std::streamsize bytes = in.tellg();
  if (bytes % static_cast<std::streamsize>(sizeof(double)) != 0)
    throw std::runtime_error("load_dataset: payload size is not a multiple of 8 bytes");
  std::vector<double> data(static_cast<std::size_t>(bytes) / sizeof(double));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(data.data()), bytes);
  if (!in) throw std::runtime_error("load_dataset: read failed for " + path);
  return data;
}

inline std::map<std::string, std::string> read_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("load_dataset: malformed meta line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

inline const std::string& require_key(const std::map<std::string, std::string>& kv,
                                      const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error("load_dataset: meta missing key '" + key + "'");
  return it->second;
}

}  // namespace detail

// Datasets are stored as a pair of files: `<base>.meta` (UTF-8 key=value
// lines) and `<base>.f64` (little-endian float64, row-major over the declared
// dims, fields concatenated in declared order). For field1d the payload is
// u[i][j] with time fastest; for field2d each field is laid out (ix, iy, j)
// with time fastest.
inline void save_dataset(const Field1D& field, const std::string& base) {
  validate(field);
  const Eigen::Index n = field.grid.nx(), m = field.grid.nt();
  std::ofstream meta(base + ".meta", std::ios::trunc);
  if (!meta) throw std::runtime_error("save_dataset: cannot open " + base + ".meta");
  meta << "kind=field1d\n"
       << "dims=" << n << "," << m << "\n"
       << "dx=" << detail::format_double(field.grid.dx) << "\n"
       << "dt=" << detail::format_double(field.grid.dt) << "\n"
       << "x0=" << detail::format_double(field.grid.x[0]) << "\n"
       << "t0=" << detail::format_double(field.grid.t[0]) << "\n"
       << "periodic=" << (field.grid.periodic ? "true" : "false") << "\n"
       << "fields=u\n";
  if (!meta) throw std::runtime_error("save_dataset: write failed for " + base + ".meta");

  std::vector<double> payload(static_cast<std::size_t>(n * m));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      payload[static_cast<std::size_t>(i * m + j)] = field.u(i, j);
  detail::write_payload(base + ".f64", payload);
}

inline void save_dataset(const Field2D& field, const std::string& base) {
  validate(field);
  const Eigen::Index nx = field.grid.nx(), ny = field.grid.ny(), m = field.grid.nt();
  std::ofstream meta(base + ".meta", std::ios::trunc);
  if (!meta) throw std::runtime_error("save_dataset: cannot open " + base + ".meta");
  meta << "kind=field2d\n"
       << "dims=" << nx << "," << ny << "," << m << "\n"
       << "dx=" << detail::format_double(field.grid.dx) << "\n"
       << "dy=" << detail::format_double(field.grid.dy) << "\n"
       << "dt=" << detail::format_double(field.grid.dt) << "\n"
       << "x0=" << detail::format_double(field.grid.x[0]) << "\n"
       << "y0=" << detail::format_double(field.grid.y[0]) << "\n"
       << "t0=" << detail::format_double(field.grid.t[0]) << "\n"
       << "periodic=" << (field.grid.periodic_x ? "true" : "false") << ","
       << (field.grid.periodic_y ? "true" : "false") << "\n"
       << "fields=w,u,v\n";
  if (!meta) throw std::runtime_error("save_dataset: write failed for " + base + ".meta");

  const std::size_t per_field = static_cast<std::size_t>(nx * ny * m);
  std::vector<double> payload(3 * per_field);
  std::size_t offset = 0;
  for (const auto* comp : {&field.omega, &field.u, &field.v}) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::MatrixXd& snap = (*comp)[static_cast<std::size_t>(j)];
      for (Eigen::Index ix = 0; ix < nx; ++ix)
        for (Eigen::Index iy = 0; iy < ny; ++iy)
          payload[offset + static_cast<std::size_t>((ix * ny + iy) * m + j)] = snap(ix, iy);
    }
    offset += per_field;
  }
  detail::write_payload(base + ".f64", payload);
}

inline Dataset load_dataset(const std::string& base) {
  const auto kv = detail::read_meta(base + ".meta");
  static const std::vector<std::string> known = {"kind", "dims", "dx",       "dy",    "dt",
                                                 "x0",   "y0",   "t0",       "periodic",
                                                 "fields"};
  for (const auto& [key, value] : kv) {
    (void)value;
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key;
    if (!ok) throw std::runtime_error("load_dataset: unknown meta key '" + key + "'");
  }
  const std::string& kind = detail::require_key(kv, "kind");
  const auto dims = detail::split_csv(detail::require_key(kv, "dims"));
  const std::vector<double> payload = detail::read_payload(base + ".f64");

  auto dim_at = [&](std::size_t i) -> Eigen::Index {
    try {
      return static_cast<Eigen::Index>(std::stoll(dims.at(i)));
    } catch (const std::exception&) {
      throw std::runtime_error("load_dataset: bad dims entry");
    }
  };

  if (kind == "field1d") {
    if (dims.size() != 2) throw std::runtime_error("load_dataset: field1d needs dims=n,m");
    const Eigen::Index n = dim_at(0), m = dim_at(1);
    if (n <= 0 || m <= 0) throw std::runtime_error("load_dataset: nonpositive dims");
    if (payload.size() != static_cast<std::size_t>(n * m))
      throw std::runtime_error("load_dataset: payload length does not match dims");
    Field1D f;
    try {
      f.grid = make_grid1d(detail::parse_double(detail::require_key(kv, "x0"), "x0"),
                           detail::parse_double(detail::require_key(kv, "dx"), "dx"), n,
                           detail::parse_double(detail::require_key(kv, "t0"), "t0"),
                           detail::parse_double(detail::require_key(kv, "dt"), "dt"), m,
                           detail::parse_flag(detail::require_key(kv, "periodic"), "periodic"));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(std::string("load_dataset: ") + e.what());
    }
    f.u.resize(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        f.u(i, j) = payload[static_cast<std::size_t>(i * m + j)];
    if (!f.u.allFinite()) throw std::runtime_error("load_dataset: non-finite values in payload");
    return f;
  }
  if (kind == "field2d") {
    if (dims.size() != 3) throw std::runtime_error("load_dataset: field2d needs dims=nx,ny,m");
    const Eigen::Index nx = dim_at(0), ny = dim_at(1), m = dim_at(2);
    if (nx <= 0 || ny <= 0 || m <= 0) throw std::runtime_error("load_dataset: nonpositive dims");
    const auto field_names = detail::split_csv(detail::require_key(kv, "fields"));
    if (field_names != std::vector<std::string>{"w", "u", "v"})
      throw std::runtime_error("load_dataset: field2d expects fields=w,u,v");
    const std::size_t per_field = static_cast<std::size_t>(nx * ny * m);
    if (payload.size() != 3 * per_field)
      throw std::runtime_error("load_dataset: payload length does not match dims");
    const auto flags = detail::split_csv(detail::require_key(kv, "periodic"));
    if (flags.size() != 2) throw std::runtime_error("load_dataset: field2d periodic needs 2 flags");
    Field2D f;
    try {
      f.grid = make_grid2d(detail::parse_double(detail::require_key(kv, "x0"), "x0"),
                           detail::parse_double(detail::require_key(kv, "dx"), "dx"), nx,
                           detail::parse_double(detail::require_key(kv, "y0"), "y0"),
                           detail::parse_double(detail::require_key(kv, "dy"), "dy"), ny,
                           detail::parse_double(detail::require_key(kv, "t0"), "t0"),
                           detail::parse_double(detail::require_key(kv, "dt"), "dt"), m,
                           detail::parse_flag(flags[0], "periodic"),
                           detail::parse_flag(flags[1], "periodic"));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(std::string("load_dataset: ") + e.what());
    }
    std::size_t offset = 0;
    for (auto* comp : {&f.omega, &f.u, &f.v}) {
      comp->assign(static_cast<std::size_t>(m), Eigen::MatrixXd(nx, ny));
      for (Eigen::Index j = 0; j < m; ++j) {
        Eigen::MatrixXd& snap = (*comp)[static_cast<std::size_t>(j)];
        for (Eigen::Index ix = 0; ix < nx; ++ix)
          for (Eigen::Index iy = 0; iy < ny; ++iy)
            snap(ix, iy) = payload[offset + static_cast<std::size_t>((ix * ny + iy) * m + j)];
      }
      offset += per_field;
    }
    for (const auto* comp : {&f.omega, &f.u, &f.v})
      for (const Eigen::MatrixXd& snap : *comp)
        if (!snap.allFinite())
          throw std::runtime_error("load_dataset: non-finite values in payload");
    return f;
  }
  throw std::runtime_error("load_dataset: unknown kind '" + kind + "'");
}

}  // namespace parapde
