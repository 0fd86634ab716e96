#include "mckv/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mckv/errors.hpp"

namespace mckv {
namespace {

using json = nlohmann::json;

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  return os;
}

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw ConfigError("cannot open for reading: " + path);
  return is;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xFF);
  os.write(b, 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(os, bits);
}

double get_f64(std::istream& is) {
  const std::uint64_t bits = get_u64(is);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void write_density_csv(const GridDensity& d, const std::string& path) {
  auto os = open_out(path);
  os << "x,pi,pi_prime\n";
  for (std::size_t i = 0; i < d.grid.n_points; ++i) {
    os << fmt(d.grid.point(i)) << ',' << fmt(d.values[i]) << ',';
    if (d.derivative_values) os << fmt((*d.derivative_values)[i]);
    os << '\n';
  }
}

GridDensity read_density_csv(const std::string& path) {
  auto is = open_in(path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,pi", 0) != 0)
    throw ConfigError("density CSV: bad header in " + path);
  std::vector<double> xs, pis, dpis;
  bool has_d = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string ax, api, adp;
    std::getline(ls, ax, ',');
    std::getline(ls, api, ',');
    std::getline(ls, adp, ',');
    xs.push_back(std::stod(ax));
    pis.push_back(std::stod(api));
    if (adp.empty())
      has_d = false;
    else
      dpis.push_back(std::stod(adp));
  }
  if (xs.size() < 2) throw ConfigError("density CSV: too few rows");
  GridDensity d = GridDensity::from_values(Grid(xs.front(), xs.back(), xs.size()), pis);
  if (has_d && dpis.size() == xs.size()) d.derivative_values = std::move(dpis);
  return d;
}

void write_density_binary(const GridDensity& d, const std::string& path) {
  auto os = open_out(path, true);
  os.write("MKVD1", 5);
  put_u64(os, d.grid.n_points);
  put_f64(os, d.grid.x_min);
  put_f64(os, d.grid.x_max);
  put_f64(os, d.normalizer);
  const std::uint64_t has_d = d.derivative_values ? 1 : 0;
  put_u64(os, has_d);
  for (double v : d.values) put_f64(os, v);
  if (d.derivative_values)
    for (double v : *d.derivative_values) put_f64(os, v);
}

GridDensity read_density_binary(const std::string& path) {
  auto is = open_in(path, true);
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, "MKVD1", 5) != 0)
    throw ConfigError("density binary: bad magic in " + path);
  const std::uint64_t n = get_u64(is);
  const double lo = get_f64(is), hi = get_f64(is), z = get_f64(is);
  const std::uint64_t has_d = get_u64(is);
  std::vector<double> vals(n);
  for (auto& v : vals) v = get_f64(is);
  GridDensity d = GridDensity::from_values(Grid(lo, hi, n), std::move(vals));
  d.normalizer = z;
  if (has_d) {
    std::vector<double> dv(n);
    for (auto& v : dv) v = get_f64(is);
    d.derivative_values = std::move(dv);
  }
  if (!is) throw ConfigError("density binary: truncated file " + path);
  return d;
}

void write_ensemble_csv(const ParticleEnsemble& e, const std::string& path) {
  auto os = open_out(path);
  os << "index,position\n";
  for (std::size_t i = 0; i < e.positions.size(); ++i)
    os << i << ',' << fmt(e.positions[i]) << '\n';
  write_ensemble_sidecar(e, path + ".json");
}

ParticleEnsemble read_ensemble_csv(const std::string& path) {
  auto is = open_in(path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("index,position", 0) != 0)
    throw ConfigError("ensemble CSV: bad header in " + path);
  ParticleEnsemble e;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    e.positions.push_back(std::stod(line.substr(comma + 1)));
  }
  e.N = e.positions.size();
  std::ifstream sidecar(path + ".json");
  if (sidecar) read_ensemble_sidecar(e, path + ".json");
  return e;
}

void write_ensemble_binary(const ParticleEnsemble& e, const std::string& path) {
  auto os = open_out(path, true);
  os.write("MKVE1", 5);
  put_u64(os, e.positions.size());
  put_f64(os, e.T);
  put_f64(os, e.dt);
  put_u64(os, e.seed);
  for (double v : e.positions) put_f64(os, v);
}

ParticleEnsemble read_ensemble_binary(const std::string& path) {
  auto is = open_in(path, true);
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, "MKVE1", 5) != 0)
    throw ConfigError("ensemble binary: bad magic in " + path);
  ParticleEnsemble e;
  const std::uint64_t n = get_u64(is);
  e.T = get_f64(is);
  e.dt = get_f64(is);
  e.seed = get_u64(is);
  e.positions.resize(n);
  for (auto& v : e.positions) v = get_f64(is);
  e.N = n;
  if (!is) throw ConfigError("ensemble binary: truncated file " + path);
  return e;
}

void write_ensemble_sidecar(const ParticleEnsemble& e, const std::string& path) {
  json j;
  j["seed"] = e.seed;
  j["N"] = e.N;
  j["T"] = e.T;
  j["dt"] = e.dt;
  j["model_id"] = e.model_id;
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

void read_ensemble_sidecar(ParticleEnsemble& e, const std::string& path) {
  auto is = open_in(path);
  json j = json::parse(is, nullptr, true);
  e.seed = j.value("seed", std::uint64_t(0));
  e.T = j.value("T", 0.0);
  e.dt = j.value("dt", 0.0);
  e.model_id = j.value("model_id", std::string{});
}

void write_line_transform_csv(const LineTransform& t, const std::string& path) {
  auto os = open_out(path);
  os << "# a=" << fmt(t.a) << '\n' << "y,re,im\n";
  for (std::size_t k = 0; k < t.y_values.size(); ++k)
    os << fmt(t.y_values[k]) << ',' << fmt(t.values[k].real()) << ','
       << fmt(t.values[k].imag()) << '\n';
}

LineTransform read_line_transform_csv(const std::string& path) {
  auto is = open_in(path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("# a=", 0) != 0)
    throw ConfigError("line transform CSV: missing `# a=` header in " + path);
  LineTransform t;
  t.a = std::stod(line.substr(4));
  if (!std::getline(is, line) || line.rfind("y,re,im", 0) != 0)
    throw ConfigError("line transform CSV: bad column header in " + path);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string ay, are, aim;
    std::getline(ls, ay, ',');
    std::getline(ls, are, ',');
    std::getline(ls, aim, ',');
    t.y_values.push_back(std::stod(ay));
    t.values.emplace_back(std::stod(are), std::stod(aim));
  }
  return t;
}

void write_grid_function_csv(const GridFunction& f, const std::string& path,
                             const std::string& value_header) {
  auto os = open_out(path);
  os << "x," << value_header << '\n';
  for (std::size_t i = 0; i < f.grid.n_points; ++i)
    os << fmt(f.grid.point(i)) << ',' << fmt(f.values[i]) << '\n';
}

void write_estimates_csv(const GridFunction& pi_hat, const GridFunction& pi_prime_hat,
                         const GridFunction& l_hat, const std::string& path) {
  auto os = open_out(path);
  os << "y,pi_hat,pi_prime_hat,l_hat\n";
  for (std::size_t i = 0; i < pi_hat.grid.n_points; ++i)
    os << fmt(pi_hat.grid.point(i)) << ',' << fmt(pi_hat.values[i]) << ','
       << fmt(pi_prime_hat.values[i]) << ',' << fmt(l_hat.values[i]) << '\n';
}

}  // namespace mckv
