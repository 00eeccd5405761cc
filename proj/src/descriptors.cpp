#include "vanhove/descriptors.hpp"

#include <cmath>
#include <numbers>

#include "vanhove/errors.hpp"
#include "vanhove/io.hpp"

namespace vanhove::config {

ObjectReader::ObjectReader(const json& value, std::string path) : value_(&value), path_(std::move(path)) {
  if (!value.is_object()) fail(ErrorCode::config_error, (path_.empty() ? "/" : path_) + ": expected an object");
}

bool ObjectReader::has(const std::string& key) const { return value_->contains(key); }

const json* ObjectReader::find(const std::string& key) {
  const auto it = value_->find(key);
  if (it == value_->end()) return nullptr;
  used_.insert(key);
  return &*it;
}

const json& ObjectReader::at(const std::string& key) {
  const json* v = find(key);
  if (!v) error(key, "missing required field");
  return *v;
}

void ObjectReader::error(const std::string& key, const std::string& what) const {
  fail(ErrorCode::config_error, child(key) + ": " + what);
}

double ObjectReader::number(const std::string& key) {
  const json& v = at(key);
  if (!v.is_number()) error(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) error(key, "expected a finite number");
  return x;
}

double ObjectReader::number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

std::int64_t ObjectReader::integer(const std::string& key) {
  const json& v = at(key);
  if (!v.is_number_integer()) error(key, "expected an integer");
  return v.get<std::int64_t>();
}

std::int64_t ObjectReader::integer(const std::string& key, std::int64_t fallback) {
  return has(key) ? integer(key) : fallback;
}

std::string ObjectReader::string(const std::string& key) {
  const json& v = at(key);
  if (!v.is_string()) error(key, "expected a string");
  return v.get<std::string>();
}

std::string ObjectReader::string(const std::string& key, const std::string& fallback) {
  return has(key) ? string(key) : fallback;
}

bool ObjectReader::boolean(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const json& v = at(key);
  if (!v.is_boolean()) error(key, "expected true or false");
  return v.get<bool>();
}

std::vector<double> ObjectReader::numbers(const std::string& key) {
  const json& v = at(key);
  if (!v.is_array()) error(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number() || !std::isfinite(x.get<double>())) error(key, "expected an array of finite numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

ObjectReader ObjectReader::object(const std::string& key) { return ObjectReader(at(key), child(key)); }

void ObjectReader::finish() const {
  for (auto it = value_->begin(); it != value_->end(); ++it)
    if (!used_.contains(it.key())) error(it.key(), "unknown field");
}

CounterRng& DescriptorContext::random(const std::string& where) {
  if (!seed) fail(ErrorCode::config_error, where + ": randomized descriptor requires a seed");
  if (!rng) rng.emplace(*seed);
  used_randomness = true;
  return *rng;
}

GridPtr parse_grid(ObjectReader r) {
  const double omega_max = r.number("omega_max");
  const std::int64_t n = r.integer("n");
  const std::string scheme = r.string("scheme", "uniform");
  r.finish();
  if (!(omega_max > 0)) r.error("omega_max", "must be positive");
  if (n < 2) r.error("n", "must be at least 2");
  QuadratureScheme s = QuadratureScheme::uniform;
  if (scheme == "chebyshev")
    s = QuadratureScheme::chebyshev;
  else if (scheme != "uniform")
    r.error("scheme", "expected \"uniform\" or \"chebyshev\"");
  return make_grid(omega_max, static_cast<std::size_t>(n), s);
}

namespace {

double gaussian(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z);
}

double lorentzian(double x, double center, double gamma) {
  return gamma / std::numbers::pi / ((x - center) * (x - center) + gamma * gamma);
}

double positive(ObjectReader& r, const std::string& key) {
  const double v = r.number(key);
  if (!(v > 0)) r.error(key, "must be positive");
  return v;
}

std::filesystem::path resolve(const DescriptorContext& ctx, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : ctx.base_dir / path;
}

std::size_t column(const io::CsvTable& t, const std::string& name, const std::string& where) {
  for (std::size_t k = 0; k < t.header.size(); ++k)
    if (t.header[k] == name) return k;
  fail(ErrorCode::config_error, where + ": table lacks column '" + name + "'");
}

}  // namespace

SingularKernel parse_singular(ObjectReader r, const GridPtr& grid, DescriptorContext& ctx) {
  const EnergyGrid& g = *grid;
  const std::string type = r.string("type");
  std::vector<complex> v(g.size(), 0.0);
  if (type == "gaussian") {
    const double mu = r.number("mu"), sigma = positive(r, "sigma"), amp = r.number("amplitude", 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = amp * gaussian(g.point(i), mu, sigma);
  } else if (type == "lorentzian") {
    const double c = r.number("center"), gamma = positive(r, "gamma"), amp = r.number("amplitude", 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = amp * lorentzian(g.point(i), c, gamma);
  } else if (type == "uniform") {
    const double amp = r.number("amplitude", 1.0 / (g.omega_max() - g.omega_min()));
    std::fill(v.begin(), v.end(), complex(amp));
  } else if (type == "point") {
    const double omega = r.number("omega"), amp = r.number("amplitude", 1.0);
    if (omega < g.omega_min() || omega > g.omega_max()) r.error("omega", "lies outside the energy grid");
    const std::size_t k = g.nearest(omega);
    v[k] = amp / g.weight(k);
  } else if (type == "identity") {
    std::fill(v.begin(), v.end(), complex(1.0));
  } else if (type == "hamiltonian") {
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = g.point(i);
  } else if (type == "zero") {
  } else if (type == "random") {
    const double amp = r.number("amplitude", 1.0);
    CounterRng& rng = ctx.random(r.path());
    for (auto& x : v) x = amp * rng.uniform();
  } else if (type == "table") {
    const std::string where = r.child("path");
    const auto table = io::read_numeric_csv(resolve(ctx, r.string("path")));
    const std::size_t co = column(table, "omega", where), cr = column(table, "re", where),
                      ci = column(table, "im", where);
    std::vector<double> om;
    std::vector<complex> val;
    for (const auto& row : table.rows) {
      if (!om.empty() && !(row[co] > om.back())) fail(ErrorCode::config_error, where + ": omega must increase");
      om.push_back(row[co]);
      val.emplace_back(row[cr], row[ci]);
    }
    if (om.size() < 2) fail(ErrorCode::config_error, where + ": table needs at least two rows");
    // Linear interpolation onto the grid, zero outside the tabulated range.
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double w = g.point(i);
      if (w < om.front() || w > om.back()) continue;
      auto hi = static_cast<std::size_t>(std::upper_bound(om.begin(), om.end(), w) - om.begin());
      hi = std::clamp<std::size_t>(hi, 1, om.size() - 1);
      const double f = (w - om[hi - 1]) / (om[hi] - om[hi - 1]);
      v[i] = (1 - f) * val[hi - 1] + f * val[hi];
    }
  } else {
    r.error("type", "unknown singular kernel type '" + type + "'");
  }
  r.finish();
  return SingularKernel(grid, std::move(v));
}

RegularKernel parse_regular(ObjectReader r, const GridPtr& grid, DescriptorContext& ctx) {
  const EnergyGrid& g = *grid;
  const auto n = static_cast<Eigen::Index>(g.size());
  const std::string type = r.string("type");
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  const auto separable = [&](const std::vector<double>& f, double amp) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        m(i, j) = amp * f[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(j)];
  };
  if (type == "gaussian") {
    const double mu = r.number("mu"), sigma = positive(r, "sigma"), amp = r.number("amplitude", 1.0);
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = gaussian(g.point(i), mu, sigma);
    separable(f, amp);
  } else if (type == "lorentzian") {
    const double c = r.number("center"), gamma = positive(r, "gamma"), amp = r.number("amplitude", 1.0);
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = lorentzian(g.point(i), c, gamma);
    separable(f, amp);
  } else if (type == "zero") {
  } else if (type == "random") {
    const double amp = r.number("amplitude", 1.0);
    m = random_hermitian(ctx.random(r.path()), n) * (amp / static_cast<double>(n));
  } else if (type == "table") {
    const std::string where = r.child("path");
    const auto table = io::read_numeric_csv(resolve(ctx, r.string("path")));
    const std::size_t co = column(table, "omega", where), cp = column(table, "omega_prime", where),
                      cr = column(table, "re", where), ci = column(table, "im", where);
    const double tol = 1e-9 * std::max(1.0, g.omega_max());
    for (const auto& row : table.rows) {
      const std::size_t i = g.nearest(row[co]), j = g.nearest(row[cp]);
      if (std::abs(g.point(i) - row[co]) > tol || std::abs(g.point(j) - row[cp]) > tol)
        fail(ErrorCode::config_error, where + ": (" + io::format_double(row[co]) + ", " +
                                          io::format_double(row[cp]) + ") is not a grid node");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = complex(row[cr], row[ci]);
    }
  } else {
    r.error("type", "unknown regular kernel type '" + type + "'");
  }
  r.finish();
  return RegularKernel(grid, std::move(m));
}

StateFunctional parse_state(ObjectReader r, const GridPtr& grid, DescriptorContext& ctx) {
  SingularKernel singular = parse_singular(r.object("singular"), grid, ctx);
  RegularKernel regular = r.has("regular") ? parse_regular(r.object("regular"), grid, ctx) : RegularKernel::zero(grid);
  if (r.boolean("normalize", false)) {
    const EnergyGrid& g = *grid;
    double mass = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) mass += g.weight(i) * singular[i].real();
    if (!(mass > 0)) r.error("normalize", "singular part has no positive mass to normalize");
    std::vector<complex> v = singular.values();
    for (auto& x : v) x /= mass;
    singular = SingularKernel(grid, std::move(v));
  }
  r.finish();
  return StateFunctional(std::move(singular), std::move(regular));
}

Observable parse_observable(ObjectReader r, const GridPtr& grid, DescriptorContext& ctx) {
  SingularKernel singular = r.has("singular") ? parse_singular(r.object("singular"), grid, ctx)
                                              : SingularKernel::zero(grid);
  RegularKernel regular = r.has("regular") ? parse_regular(r.object("regular"), grid, ctx) : RegularKernel::zero(grid);
  r.finish();
  try {
    return Observable(std::move(singular), std::move(regular), true);
  } catch (const Error& e) {
    fail(ErrorCode::config_error, r.path() + ": " + e.what());
  }
}

}  // namespace vanhove::config
