#include "vanhove/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "vanhove/cosmo.hpp"
#include "vanhove/descriptors.hpp"
#include "vanhove/errors.hpp"
#include "vanhove/evolution.hpp"
#include "vanhove/io.hpp"
#include "vanhove/parallel.hpp"
#include "vanhove/pointer_basis.hpp"
#include "vanhove/reference.hpp"
#include "vanhove/trajectories.hpp"
#include "vanhove/wigner.hpp"

namespace vanhove::harness {

namespace fs = std::filesystem;
using config::DescriptorContext;
using config::ObjectReader;

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::evolve: return "evolve";
    case Kind::weak_limit: return "weak-limit";
    case Kind::wigner: return "wigner";
    case Kind::cosmo: return "cosmo";
    case Kind::validate: return "validate";
  }
  return "?";
}

std::optional<Kind> parse_kind(const std::string& name) {
  for (Kind k : {Kind::evolve, Kind::weak_limit, Kind::wigner, Kind::cosmo, Kind::validate})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

ExperimentConfig parse_config(const std::string& text, const fs::path& base_dir, const std::string& source) {
  ExperimentConfig cfg;
  try {
    cfg.document = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line:column.
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorCode::config_error, source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                      ": invalid JSON (" + e.what() + ")");
  }
  if (!cfg.document.is_object()) fail(ErrorCode::config_error, source + ": top level must be an object");
  const auto it = cfg.document.find("kind");
  if (it == cfg.document.end() || !it->is_string()) fail(ErrorCode::config_error, "/kind: missing required field");
  const auto kind = parse_kind(it->get<std::string>());
  if (!kind) fail(ErrorCode::config_error, "/kind: unknown experiment kind '" + it->get<std::string>() + "'");
  cfg.kind = *kind;
  if (const auto s = cfg.document.find("seed"); s != cfg.document.end()) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0))
      fail(ErrorCode::config_error, "/seed: expected a nonnegative integer");
    cfg.seed = s->get<std::uint64_t>();
  }
  if (const auto o = cfg.document.find("output"); o != cfg.document.end()) {
    if (!o->is_string()) fail(ErrorCode::config_error, "/output: expected a string");
    cfg.output = o->get<std::string>();
  }
  cfg.base_dir = base_dir;
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::config_error, path.string() + ": cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path(), path.string());
}

std::string config_hash(const ExperimentConfig& config) {
  json doc = config.document;
  doc.erase("output");
  if (config.seed) doc["seed"] = *config.seed;
  return io::sha256_hex(doc.dump());
}

namespace {

// JSON writer that prints floating-point values with 17 significant digits.
void dump(std::ostream& out, const json& v, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad << json(it.key()).dump() << ": ";
        dump(out, it.value(), indent, depth + 1);
      }
      out << "\n" << close << "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out << ",\n";
        out << pad;
        dump(out, v[k], indent, depth + 1);
      }
      out << "\n" << close << "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = v.get<double>();
      if (std::isfinite(x))
        out << io::format_double(x);
      else
        out << "null";
      return;
    }
    default:
      out << v.dump();
  }
}

std::string dump_json(const json& v) {
  std::ostringstream out;
  dump(out, v, 2, 0);
  out << "\n";
  return out.str();
}

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

/// Owns the output directory: writes artifacts, times stages, collects checks.
class Run {
 public:
  Run(Kind kind, std::string hash, fs::path dir) : dir_(std::move(dir)) {
    manifest_.kind = to_string(kind);
    manifest_.config_hash = std::move(hash);
    manifest_.version = VANHOVE_VERSION;
    fs::create_directories(dir_);
  }

  template <typename F>
  auto stage(const std::string& name, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    const auto record = [&] {
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
      manifest_.stages.push_back({name, dt.count()});
    };
    try {
      if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
        body();
        record();
      } else {
        auto result = body();
        record();
        return result;
      }
    } catch (const Error& e) {
      throw Error(e.code(), "stage '" + name + "': " + e.what());
    }
  }

  void text(const std::string& name, const std::function<void(std::ostream&)>& writer) {
    {
      std::ofstream out(dir_ / name, std::ios::binary);
      require(static_cast<bool>(out), ErrorCode::invalid_argument, "cannot write " + (dir_ / name).string());
      writer(out);
    }
    record(name);
  }
  void json_file(const std::string& name, const json& doc) {
    text(name, [&](std::ostream& out) { out << dump_json(doc); });
  }
  void phase_binary(const std::string& name, const PhaseField& field) {
    write_phase_binary(dir_ / name, field);
    record(name);
  }

  void check(const std::string& name, double value, double limit) {
    manifest_.checks.push_back({name, value, limit, value <= limit});
  }

  RunManifest finish() {
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << dump_json(manifest_.to_json());
    return manifest_;
  }

 private:
  void record(const std::string& name) {
    const fs::path p = dir_ / name;
    manifest_.artifacts.push_back({name, io::sha256_file(p), fs::file_size(p)});
  }

  fs::path dir_;
  RunManifest manifest_;
};

std::vector<double> parse_times(ObjectReader r) {
  std::vector<double> times;
  if (r.has("values")) {
    times = r.numbers("values");
  } else {
    const double start = r.number("start", 0.0), stop = r.number("stop");
    const std::int64_t count = r.integer("count");
    if (count < 1) r.error("count", "must be at least 1");
    for (std::int64_t k = 0; k < count; ++k)
      times.push_back(count == 1 ? start
                                 : start + (stop - start) * static_cast<double>(k) / static_cast<double>(count - 1));
  }
  r.finish();
  if (times.empty()) fail(ErrorCode::config_error, r.path() + ": no times given");
  return times;
}

PhaseGrid parse_phase_grid(ObjectReader r) {
  const double q_min = r.number("q_min"), q_max = r.number("q_max");
  const double p_min = r.number("p_min"), p_max = r.number("p_max");
  const std::int64_t nq = r.integer("nq"), np = r.integer("np");
  r.finish();
  if (nq < 2 || np < 2) fail(ErrorCode::config_error, r.path() + ": nq and np must be at least 2");
  if (!(q_max > q_min) || !(p_max > p_min)) fail(ErrorCode::config_error, r.path() + ": ranges must be non-degenerate");
  return PhaseGrid(q_min, q_max, static_cast<std::size_t>(nq), p_min, p_max, static_cast<std::size_t>(np));
}

PhaseField parse_hamiltonian(ObjectReader r, const PhaseGrid& grid) {
  const std::string type = r.string("type");
  const double mass = r.number("mass", 1.0);
  std::optional<PhaseField> h;
  if (type == "harmonic") {
    const double freq = r.number("frequency", 1.0);
    if (!(mass > 0) || !(freq > 0)) r.error("type", "mass and frequency must be positive");
    h = harmonic_hamiltonian(grid, mass, freq);
  } else if (type == "free") {
    if (!(mass > 0)) r.error("mass", "must be positive");
    h = free_hamiltonian(grid, mass);
  } else {
    r.error("type", "expected \"harmonic\" or \"free\"");
  }
  r.finish();
  return *h;
}

json violations_json(const std::vector<Violation>& vs) {
  json arr = json::array();
  for (const auto& v : vs) arr.push_back({{"invariant", v.invariant}, {"residual", v.residual}});
  return arr;
}

// ---------------------------------------------------------------------------

void run_evolve(ObjectReader& top, DescriptorContext& ctx, Run& run) {
  struct Parsed {
    GridPtr grid;
    StateFunctional state;
    Observable obs;
    std::vector<double> times;
    double threshold, floor, t_max;
  };
  const Parsed p = run.stage("parse", [&] {
    GridPtr grid = config::parse_grid(top.object("grid"));
    StateFunctional state = config::parse_state(top.object("state"), grid, ctx);
    Observable obs = config::parse_observable(top.object("observable"), grid, ctx);
    std::vector<double> times = parse_times(top.object("times"));
    const double threshold = top.number("threshold", 1e-2);
    if (!(threshold > 0 && threshold < 1)) top.error("threshold", "must lie in (0, 1)");
    double floor = 1e-8, t_max = 0.8 * recurrence_time(*grid);
    if (top.has("envelope")) {
      ObjectReader env = top.object("envelope");
      floor = env.number("floor", floor);
      t_max = env.number("t_max", t_max);
      env.finish();
    }
    return Parsed{grid, std::move(state), std::move(obs), std::move(times), threshold, floor, t_max};
  });
  const ValidationReport report = run.stage("validate", [&] { return validate_state(p.state); });
  run.check("state-violations", static_cast<double>(report.violations.size()), 0.0);
  const DecayProfile profile = run.stage("evolve", [&] { return decay_profile(p.state, p.obs, p.times); });

  json fit_json = nullptr;
  std::optional<double> t_d;
  run.stage("fit", [&] {
    t_d = decoherence_time(profile, p.threshold);
    if (profile.offdiag_abs.front() > 0.0) {
      try {
        const auto fit = fit_gaussian_envelope(profile, p.floor, p.t_max);
        fit_json = {{"rate", fit.rate}, {"log_amplitude", fit.log_amplitude}, {"r_squared", fit.r_squared},
                    {"samples", fit.samples}};
      } catch (const Error& e) {
        if (e.code() != ErrorCode::numerical) throw;
      }
    }
  });

  run.text("decay.csv", [&](std::ostream& out) { write_decay_csv(out, profile); });
  run.json_file("summary.json", {{"diag_value", profile.diag_value},
                                 {"offdiag_initial", profile.offdiag_abs.front()},
                                 {"recurrence_time", recurrence_time(*p.grid)},
                                 {"window_limit", 0.8 * recurrence_time(*p.grid)},
                                 {"threshold", p.threshold},
                                 {"decoherence_time", optional_number(t_d)},
                                 {"envelope", fit_json},
                                 {"violations", violations_json(report.violations)},
                                 {"warnings", violations_json(report.warnings)}});
}

void run_weak_limit(ObjectReader& top, DescriptorContext& ctx, Run& run) {
  GridPtr grid = config::parse_grid(top.object("grid"));
  const StateFunctional state = config::parse_state(top.object("state"), grid, ctx);
  const Observable obs = config::parse_observable(top.object("observable"), grid, ctx);
  const std::vector<double> times = parse_times(top.object("times"));
  const double t_min = top.number("t_min", 0.0);
  const double tolerance = top.number("tolerance", std::numeric_limits<double>::quiet_NaN());

  const StateFunctional limit = weak_limit(state);
  const double target = run.stage("weak-limit", [&] { return pair_real(limit, obs); });
  const std::vector<double> values = run.stage("evolve", [&] { return ExpectationSeries(state, obs).real_at(times); });
  double worst = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] >= t_min) worst = std::max(worst, std::abs(values[k] - target));
  if (!std::isnan(tolerance)) run.check("max-deviation", worst, tolerance);

  run.text("weak_limit.csv", [&](std::ostream& out) {
    io::write_row(out, {"omega", "re", "im"});
    for (std::size_t i = 0; i < grid->size(); ++i)
      io::write_row(out, {io::format_double(grid->point(i)), io::format_double(limit.singular()[i].real()),
                          io::format_double(limit.singular()[i].imag())});
  });
  run.text("deviation.csv", [&](std::ostream& out) {
    io::write_row(out, {"t", "expectation", "weak_limit", "deviation"});
    for (std::size_t k = 0; k < times.size(); ++k)
      io::write_row(out, {io::format_double(times[k]), io::format_double(values[k]), io::format_double(target),
                          io::format_double(std::abs(values[k] - target))});
  });
  run.json_file("summary.json", {{"weak_limit_value", target},
                                 {"t_min", t_min},
                                 {"max_deviation", worst},
                                 {"window_limit", 0.8 * recurrence_time(*grid)}});
}

void run_wigner(ObjectReader& top, DescriptorContext& ctx, Run& run) {
  GridPtr grid = config::parse_grid(top.object("grid"));
  const StateFunctional state = config::parse_state(top.object("state"), grid, ctx);
  const Observable obs = config::parse_observable(top.object("observable"), grid, ctx);
  const PhaseGrid pg = parse_phase_grid(top.object("phase_grid"));
  const PhaseField h = parse_hamiltonian(top.object("hamiltonian"), pg);
  const MollifierPolicy policy = top.has("epsilon") ? MollifierPolicy{top.number("epsilon")} : default_mollifier(h);
  const double tolerance = top.number("tolerance", std::numeric_limits<double>::quiet_NaN());

  const ClassicalDensity rho = run.stage("density", [&] { return classical_state_density(state.singular(), h, policy); });
  const PhaseField ow = run.stage("observable", [&] { return wigner_singular(obs.singular(), h); });
  const double classical = run.stage("classical", [&] { return classical_expectation(rho, ow); });
  const double quantum = run.stage("quantum", [&] {
    return pair_real(weak_limit(state), Observable(obs.singular(), RegularKernel::zero(grid)));
  });
  const double residual = run.stage("liouville", [&] { return liouville_residual(rho, h); });
  if (!std::isnan(tolerance)) run.check("classical-quantum", std::abs(classical - quantum), tolerance);

  run.text("density.csv", [&](std::ostream& out) { write_phase_csv(out, rho.field); });
  run.phase_binary("density.wpf", rho.field);
  run.phase_binary("observable.wpf", ow);
  run.json_file("summary.json", {{"epsilon", policy.epsilon},
                                 {"classical_expectation", classical},
                                 {"quantum_expectation", quantum},
                                 {"difference", std::abs(classical - quantum)},
                                 {"liouville_residual", residual},
                                 {"leakage", rho.leakage},
                                 {"density_min", rho.field.min()}});
}

cosmo::Potential parse_potential(ObjectReader r, const DescriptorContext& ctx) {
  const std::string family = r.string("family");
  std::optional<cosmo::Potential> pot;
  if (family == "constant" || family == "quadratic-cap") {
    const double lambda = r.number("lambda"), a1 = r.number("a1");
    if (!(a1 > 0)) r.error("a1", "must be positive");
    pot = family == "constant" ? cosmo::Potential::constant(lambda, a1) : cosmo::Potential::quadratic_cap(lambda, a1);
  } else if (family == "table") {
    const std::string p = r.string("path");
    const fs::path path = fs::path(p).is_absolute() ? fs::path(p) : ctx.base_dir / p;
    const auto table = io::read_numeric_csv(path);
    if (table.header.size() != 2 || table.header[0] != "a" || table.header[1] != "V")
      r.error("path", "potential table needs header a,V");
    std::vector<double> a, v;
    for (const auto& row : table.rows) a.push_back(row[0]), v.push_back(row[1]);
    try {
      pot = cosmo::Potential::table(std::move(a), std::move(v));
    } catch (const Error& e) {
      r.error("path", e.what());
    }
  } else {
    r.error("family", "expected constant, quadratic-cap or table");
  }
  r.finish();
  return *pot;
}

InvariantField parse_invariant(ObjectReader r, const PhaseGrid& pg) {
  const std::string field = r.string("field");
  const std::string source = r.string("source", "energy");
  InvariantField inv{PhaseField(pg, std::vector<double>(pg.size(), 0.0))};
  if (field == "momentum")
    inv.field = momentum_field(pg);
  else if (field == "coordinate")
    inv.field = coordinate_field(pg);
  else if (field == "free-hamiltonian")
    inv.field = free_hamiltonian(pg);
  else if (field == "harmonic-hamiltonian")
    inv.field = harmonic_hamiltonian(pg);
  else
    r.error("field", "expected momentum, coordinate, free-hamiltonian or harmonic-hamiltonian");
  if (source == "energy") {
    inv.source = InvariantField::Source::energy;
  } else if (source == "label") {
    inv.source = InvariantField::Source::label;
    const std::int64_t c = r.integer("coordinate", 0);
    if (c < 0) r.error("coordinate", "must be nonnegative");
    inv.coordinate = static_cast<std::size_t>(c);
  } else {
    r.error("source", "expected \"energy\" or \"label\"");
  }
  r.finish();
  return inv;
}

struct CosmoSetup {
  cosmo::Potential potential;
  double a0;
  int branch;
  double eta_max, tol;
  std::size_t samples;
  cosmo::ModeSet modes;
  std::shared_ptr<const cosmo::FockBasis> basis;
  std::optional<cosmo::CosmoState> state;
  double adiabatic_bound;
};

CosmoSetup parse_cosmo(ObjectReader& top, DescriptorContext& ctx) {
  cosmo::Potential potential = parse_potential(top.object("potential"), ctx);

  ObjectReader sf = top.object("scale_factor");
  const double a0 = sf.number("a0");
  const std::int64_t branch = sf.integer("branch", 1);
  const double eta_max = sf.number("eta_max"), tol = sf.number("tol", 1e-10);
  const std::int64_t samples = sf.integer("samples", 201);
  sf.finish();
  if (branch != 1 && branch != -1) sf.error("branch", "must be +1 or -1");
  if (a0 < 0 || a0 > potential.a1()) sf.error("a0", "must lie in [0, a1]");
  if (!(eta_max > 0)) sf.error("eta_max", "must be positive");
  if (!(tol > 0)) sf.error("tol", "must be positive");
  if (samples < 2) sf.error("samples", "must be at least 2");

  ObjectReader mr = top.object("modes");
  std::vector<double> k;
  if (mr.has("k")) {
    k = mr.numbers("k");
  } else {
    const std::string gen = mr.string("generator");
    if (gen != "sqrt-primes") mr.error("generator", "expected \"sqrt-primes\"");
    const std::int64_t count = mr.integer("count");
    if (count < 1) mr.error("count", "must be at least 1");
    k = cosmo::sqrt_prime_modes(static_cast<std::size_t>(count));
  }
  const double m = mr.number("m", 0.0), a_out = mr.number("a_out");
  const std::int64_t n_max = mr.integer("n_max", 1);
  const double omega_cut = mr.number("omega_cut", std::numeric_limits<double>::infinity());
  const double shell_tol = mr.number("shell_tol", 1e-9);
  mr.finish();
  if (!(a_out > potential.a1())) mr.error("a_out", "must exceed the potential support a1");
  if (n_max < 1) mr.error("n_max", "must be at least 1");
  cosmo::ModeSet modes = [&] {
    try {
      return cosmo::ModeSet::make(k, m, a_out);
    } catch (const Error& e) {
      mr.error("k", e.what());
    }
  }();
  auto basis = std::make_shared<const cosmo::FockBasis>(
      cosmo::enumerate_fock(modes, static_cast<int>(n_max), omega_cut, shell_tol));

  const double bound = top.number("adiabatic_bound", 1e-3);
  return CosmoSetup{std::move(potential), a0, static_cast<int>(branch), eta_max, tol,
                    static_cast<std::size_t>(samples), std::move(modes), std::move(basis), std::nullopt, bound};
}

cosmo::CosmoState parse_cosmo_state(ObjectReader r, const std::shared_ptr<const cosmo::FockBasis>& basis,
                                    DescriptorContext& ctx) {
  const std::string type = r.string("type");
  std::optional<cosmo::CosmoState> s;
  if (type == "thermal") {
    const double beta = r.number("beta");
    if (beta < 0) r.error("beta", "must be nonnegative");
    s = cosmo::thermal_state(basis, beta);
  } else if (type == "random") {
    s = cosmo::random_cosmo_state(basis, ctx.random(r.path()));
  } else {
    r.error("type", "expected \"thermal\" or \"random\"");
  }
  r.finish();
  return *s;
}

void run_cosmo(ObjectReader& top, DescriptorContext& ctx, Run& run) {
  CosmoSetup setup = run.stage("parse", [&] { return parse_cosmo(top, ctx); });
  setup.state = parse_cosmo_state(top.object("state"), setup.basis, ctx);
  // Only the oracle comparison reads these.
  if (top.has("observable")) top.at("observable");
  if (top.has("times")) top.at("times");

  struct TrajectorySetup {
    PhaseGrid grid;
    MollifierPolicy policy;
    std::vector<double> a0_points;
    std::vector<InvariantField> invariants;
  };
  std::optional<TrajectorySetup> traj;
  if (top.has("trajectories")) {
    ObjectReader tr = top.object("trajectories");
    const PhaseGrid pg = parse_phase_grid(tr.object("phase_grid"));
    const double eps = tr.number("epsilon");
    if (!(eps > 0)) tr.error("epsilon", "must be positive");
    std::vector<double> a0s = tr.numbers("a0_points");
    if (a0s.empty()) tr.error("a0_points", "must not be empty");
    std::vector<InvariantField> invs;
    const json& list = tr.at("invariants");
    if (!list.is_array() || list.empty()) tr.error("invariants", "expected a nonempty array");
    for (std::size_t k = 0; k < list.size(); ++k)
      invs.push_back(parse_invariant(ObjectReader(list[k], tr.child("invariants") + "/" + std::to_string(k)), pg));
    tr.finish();
    traj = TrajectorySetup{pg, MollifierPolicy{eps}, std::move(a0s), std::move(invs)};
  }

  const auto sol = run.stage("scale-factor", [&] {
    return cosmo::solve_scale_factor(setup.potential, setup.a0, setup.branch, setup.eta_max, setup.tol, setup.samples);
  });
  const double constraint = cosmo::constraint_residual(sol, setup.potential);
  run.check("constraint-residual", constraint, 10 * setup.tol);
  const double adiabatic = cosmo::adiabaticity(setup.modes, setup.potential);
  run.check("adiabaticity", adiabatic, setup.adiabatic_bound);

  const cosmo::CosmoState limit = run.stage("weak-limit", [&] { return cosmo::cosmo_weak_limit(*setup.state); });
  const auto pointer = run.stage("pointer-basis", [&] { return cosmo::diagonalize_remaining(limit); });
  double worst_offdiag = 0.0;
  for (std::size_t s = 0; s < pointer.size(); ++s)
    worst_offdiag = std::max(worst_offdiag, offdiagonal_residual(pointer[s], limit.shell_block(s)));
  run.check("pointer-offdiagonal", worst_offdiag, 1e-10);

  run.text("scale_factor.csv", [&](std::ostream& out) { cosmo::write_scale_factor_csv(out, sol); });
  run.text("spectrum.csv", [&](std::ostream& out) { cosmo::write_spectrum_csv(out, pointer); });

  json traj_json = nullptr;
  if (traj) {
    const TrajectoryResult result = run.stage("trajectories", [&] {
      return trajectory_ensemble(pointer, traj->invariants, traj->policy, traj->a0_points);
    });
    const double total = result.ensemble.total_probability();
    run.check("ensemble-probability", std::abs(total - 1.0), 1e-10);
    std::size_t degenerate = 0;
    for (const auto& e : result.ensemble.entries) degenerate += e.degenerate;
    run.text("ensemble.csv", [&](std::ostream& out) { write_ensemble_csv(out, result.ensemble); });
    run.phase_binary("density.wpf", result.density.field);
    traj_json = {{"components", result.ensemble.entries.size()},
                 {"degenerate", degenerate},
                 {"total_probability", total},
                 {"excluded_probability", result.density.leakage}};
  }

  json shells = json::array();
  for (const auto& s : setup.basis->shells) shells.push_back({{"omega", s.omega}, {"size", s.count}});
  run.json_file("summary.json",
                {{"freeze_eta", optional_number(sol.freeze_eta)},
                 {"constraint_residual", constraint},
                 {"adiabaticity", adiabatic},
                 {"basis_size", setup.basis->size()},
                 {"excluded_by_cut", setup.basis->excluded},
                 {"shells", shells},
                 {"initial_cross_shell", setup.state->cross_shell_residual()},
                 {"pointer_offdiagonal", worst_offdiag},
                 {"trajectories", traj_json}});
}

void run_validate(ObjectReader& top, DescriptorContext& ctx, Run& run) {
  GridPtr grid = config::parse_grid(top.object("grid"));
  const StateFunctional state = config::parse_state(top.object("state"), grid, ctx);
  const ValidationReport report = run.stage("validate", [&] { return validate_state(state); });
  run.check("state-violations", static_cast<double>(report.violations.size()), 0.0);
  run.json_file("report.json", {{"valid", report.ok()},
                                {"violations", violations_json(report.violations)},
                                {"warnings", violations_json(report.warnings)}});
}

DescriptorContext make_context(const ExperimentConfig& config) {
  DescriptorContext ctx;
  ctx.base_dir = config.base_dir;
  ctx.seed = config.seed;
  return ctx;
}

ObjectReader top_reader(const ExperimentConfig& config) {
  ObjectReader top(config.document, "");
  top.string("kind");
  if (top.has("seed")) top.at("seed");
  if (top.has("output")) top.at("output");
  if (top.has("oracle_tolerance")) top.number("oracle_tolerance");
  return top;
}

}  // namespace

bool RunManifest::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

json RunManifest::to_json() const {
  json arts = json::array(), st = json::array(), ch = json::array();
  for (const auto& a : artifacts) arts.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  for (const auto& s : stages) st.push_back({{"name", s.name}, {"wall_seconds", s.wall_seconds}});
  for (const auto& c : checks) ch.push_back({{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"pass", c.pass}});
  return {{"tool", "vanhove"}, {"version", version}, {"kind", kind}, {"config_hash", config_hash},
          {"artifacts", arts},  {"stages", st},       {"checks", ch}, {"status", passed() ? "pass" : "fail"}};
}

RunManifest run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
  DescriptorContext ctx = make_context(config);
  ObjectReader top = top_reader(config);
  Run run(config.kind, config_hash(config), out_dir);
  switch (config.kind) {
    case Kind::evolve: run_evolve(top, ctx, run); break;
    case Kind::weak_limit: run_weak_limit(top, ctx, run); break;
    case Kind::wigner: run_wigner(top, ctx, run); break;
    case Kind::cosmo: run_cosmo(top, ctx, run); break;
    case Kind::validate: run_validate(top, ctx, run); break;
  }
  top.finish();
  return run.finish();
}

// ---------------------------------------------------------------------------

json OracleReport::to_json() const {
  return {{"kind", kind},       {"oracle", oracle},       {"cases", cases}, {"max_abs", max_abs},
          {"max_rel", max_rel}, {"tolerance", tolerance}, {"pass", pass}};
}

namespace {

struct Deviation {
  std::size_t cases = 0;
  double max_abs = 0.0, max_rel = 0.0;
  void add(complex pipeline, complex oracle) {
    const double d = std::abs(pipeline - oracle);
    max_abs = std::max(max_abs, d);
    max_rel = std::max(max_rel, d / std::max(1.0, std::abs(oracle)));
    ++cases;
  }
};

// Trace of the block-diagonal (2n)-channel contraction: the singular channel
// as diag(w rho) * diag(O), the regular channel as (W rho W) * O.
complex dense_pairing(const StateFunctional& state, const Observable& obs) {
  const EnergyGrid& g = *state.grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(2 * n, 2 * n), o = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    r(i, i) = g.weight(ui) * state.singular()[ui];
    o(i, i) = obs.singular()[ui];
    for (Eigen::Index j = 0; j < n; ++j) {
      r(n + i, n + j) = g.weight(ui) * g.weight(static_cast<std::size_t>(j)) * state.regular()(ui, static_cast<std::size_t>(j));
      o(n + i, n + j) = obs.regular()(ui, static_cast<std::size_t>(j));
    }
  }
  const Eigen::MatrixXcd prod = r * o;
  std::vector<complex> diag(static_cast<std::size_t>(2 * n));
  for (Eigen::Index k = 0; k < 2 * n; ++k) diag[static_cast<std::size_t>(k)] = prod(k, k);
  return pairwise_sum<complex>(diag);
}

}  // namespace

OracleReport compare_oracle(const ExperimentConfig& config, const fs::path& out_dir) {
  DescriptorContext ctx = make_context(config);
  ObjectReader top = top_reader(config);
  OracleReport report;
  report.kind = to_string(config.kind);
  report.tolerance = top.number("oracle_tolerance", 1e-10);
  Deviation dev;

  switch (config.kind) {
    case Kind::evolve:
    case Kind::weak_limit:
    case Kind::validate: {
      GridPtr grid = config::parse_grid(top.object("grid"));
      if (2 * grid->size() > kOracleDimensionLimit)
        fail(ErrorCode::size_limit, "dense pairing oracle needs dimension " + std::to_string(2 * grid->size()) +
                                        " > " + std::to_string(kOracleDimensionLimit));
      const StateFunctional state = config::parse_state(top.object("state"), grid, ctx);
      const Observable obs = top.has("observable") ? config::parse_observable(top.object("observable"), grid, ctx)
                                                   : identity_observable(grid);
      report.oracle = "dense-contraction";
      dev.add(pair(state, obs), dense_pairing(state, obs));
      if (config.kind != Kind::validate && top.has("times")) {
        const std::vector<double> times = parse_times(top.object("times"));
        const ExpectationSeries series(state, obs);
        for (double t : times) dev.add(series.at(t), dense_pairing(reference::evolve(state, t), obs));
      }
      if (config.kind == Kind::evolve && top.has("threshold")) top.at("threshold");
      if (config.kind == Kind::evolve && top.has("envelope")) top.at("envelope");
      if (config.kind == Kind::weak_limit && top.has("t_min")) top.at("t_min");
      if (config.kind == Kind::weak_limit && top.has("tolerance")) top.at("tolerance");
      break;
    }
    case Kind::cosmo: {
      CosmoSetup setup = parse_cosmo(top, ctx);
      const std::size_t n = setup.basis->size();
      if (n > kOracleDimensionLimit)
        fail(ErrorCode::size_limit, "conjugation oracle needs dimension " + std::to_string(n) + " > " +
                                        std::to_string(kOracleDimensionLimit));
      setup.state = parse_cosmo_state(top.object("state"), setup.basis, ctx);
      const auto dim = static_cast<Eigen::Index>(n);
      ComplexMatrix obs;
      {
        ObjectReader orr = top.object("observable");
        const std::string type = orr.string("type");
        if (type == "identity")
          obs = ComplexMatrix::Identity(dim, dim);
        else if (type == "random")
          obs = random_hermitian(ctx.random(orr.path()), dim);
        else if (type == "number") {
          obs = ComplexMatrix::Zero(dim, dim);
          for (std::size_t i = 0; i < n; ++i) {
            int total = 0;
            for (int x : setup.basis->occupations[i]) total += x;
            obs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = static_cast<double>(total);
          }
        } else
          orr.error("type", "expected identity, random or number");
        orr.finish();
      }
      const std::vector<double> times =
          top.has("times") ? parse_times(top.object("times")) : std::vector<double>{0.0, 1.0, 10.0};
      if (top.has("trajectories")) top.at("trajectories");
      Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
      for (std::size_t i = 0; i < n; ++i)
        h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = setup.basis->shell_energy(i);
      const Eigen::MatrixXcd rho = setup.state->matrix();
      const Eigen::MatrixXcd o = obs;
      report.oracle = "exponential-conjugation";
      for (double t : times) {
        const Eigen::MatrixXcd u = (complex(0.0, -t) * h).exp();
        const complex oracle = (u * rho * u.adjoint() * o).trace();
        dev.add(cosmo::cosmo_expectation(*setup.state, obs, t), oracle);
      }
      break;
    }
    case Kind::wigner: {
      GridPtr grid = config::parse_grid(top.object("grid"));
      const StateFunctional state = config::parse_state(top.object("state"), grid, ctx);
      if (top.has("observable")) config::parse_observable(top.object("observable"), grid, ctx);
      const PhaseGrid pg = parse_phase_grid(top.object("phase_grid"));
      const PhaseField h = parse_hamiltonian(top.object("hamiltonian"), pg);
      const MollifierPolicy policy = top.has("epsilon") ? MollifierPolicy{top.number("epsilon")} : default_mollifier(h);
      if (top.has("tolerance")) top.at("tolerance");
      if (grid->size() * pg.size() > std::size_t{1} << 28)
        fail(ErrorCode::size_limit, "full-sum density oracle is too large for this grid");
      const ClassicalDensity fast = classical_state_density(state.singular(), h, policy);
      const ClassicalDensity full = reference::classical_state_density(state.singular(), h, policy);
      report.oracle = "full-shell-sum";
      for (std::size_t k = 0; k < fast.field.values().size(); ++k)
        dev.add(fast.field.values()[k], full.field.values()[k]);
      break;
    }
  }
  top.finish();
  report.cases = dev.cases;
  report.max_abs = dev.max_abs;
  report.max_rel = dev.max_rel;
  report.pass = dev.max_rel <= report.tolerance;
  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "oracle.json", std::ios::binary);
  out << dump_json(report.to_json());
  return report;
}

}  // namespace vanhove::harness
