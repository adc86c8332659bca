#include "homog/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace homog {

namespace {

struct Entry {
  std::string value;
  int line;
};

using Sections = std::map<std::string, std::map<std::string, Entry>>;

Sections tokenize(const std::string& text) {
  Sections out;
  std::istringstream is(text);
  std::string line, section;
  int ln = 0;
  while (std::getline(is, line)) {
    ++ln;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto l = line.find_first_not_of(" \t\r");
    if (l == std::string::npos) continue;
    auto r = line.find_last_not_of(" \t\r");
    line = line.substr(l, r - l + 1);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(ln, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(ln, "expected key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(ln, "empty key");
    if (section.empty()) throw ConfigError(ln, "key outside of a section");
    out[section][key] = {val, ln};
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const Sections& s) : s_(s) {}

  bool has(const std::string& sec, const std::string& key) const {
    auto it = s_.find(sec);
    return it != s_.end() && it->second.count(key) > 0;
  }
  const Entry& entry(const std::string& sec, const std::string& key) const {
    return s_.at(sec).at(key);
  }
  double num(const std::string& sec, const std::string& key, double dflt) const {
    if (!has(sec, key)) return dflt;
    const Entry& e = entry(sec, key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(e.value, &pos);
      if (pos != e.value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError(e.line, "expected a number for " + sec + "." + key + ", got '" + e.value +
                                    "'");
    }
  }
  long integer(const std::string& sec, const std::string& key, long dflt) const {
    if (!has(sec, key)) return dflt;
    const Entry& e = entry(sec, key);
    try {
      std::size_t pos = 0;
      const long v = std::stol(e.value, &pos);
      if (pos != e.value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError(e.line, "expected an integer for " + sec + "." + key);
    }
  }
  std::string str(const std::string& sec, const std::string& key, const std::string& dflt) const {
    return has(sec, key) ? entry(sec, key).value : dflt;
  }
  bool flag(const std::string& sec, const std::string& key, bool dflt) const {
    if (!has(sec, key)) return dflt;
    const Entry& e = entry(sec, key);
    if (e.value == "on" || e.value == "true" || e.value == "1") return true;
    if (e.value == "off" || e.value == "false" || e.value == "0") return false;
    throw ConfigError(e.line, "expected on/off for " + sec + "." + key);
  }
  std::vector<double> list(const std::string& sec, const std::string& key) const {
    std::vector<double> out;
    if (!has(sec, key)) return out;
    const Entry& e = entry(sec, key);
    std::istringstream ls(e.value);
    std::string tok;
    while (std::getline(ls, tok, ',')) {
      try {
        out.push_back(std::stod(tok));
      } catch (...) {
        throw ConfigError(e.line, "bad list entry '" + tok + "' in " + sec + "." + key);
      }
    }
    return out;
  }
  int line_of(const std::string& sec, const std::string& key) const {
    return entry(sec, key).line;
  }

 private:
  const Sections& s_;
};

}  // namespace

SimConfig parse_config_text(const std::string& text) {
  Sections secs = tokenize(text);
  Reader r(secs);
  SimConfig c;

  c.dim = static_cast<int>(r.integer("grid", "dim", 2));
  c.n[0] = static_cast<int>(r.integer("grid", "nx", r.integer("grid", "n", 64)));
  c.n[1] = static_cast<int>(r.integer("grid", "ny", r.integer("grid", "n", 64)));
  c.length[0] = r.num("grid", "lx", r.num("grid", "length", 1.0));
  c.length[1] = r.num("grid", "ly", r.num("grid", "length", 1.0));

  const std::string mcase = r.str("material", "case", "kelvin_voigt");
  try {
    c.material.mat_case = material_case_from_string(mcase);
  } catch (const std::exception& e) {
    throw ConfigError(r.has("material", "case") ? r.line_of("material", "case") : 0, e.what());
  }
  c.material.mu1 = r.num("material", "mu1", 1.0);
  c.material.mu2 = r.num("material", "mu2", c.material.mat_case == MaterialCase::fsi ? 0.0 : 1.0);
  c.material.nu1 = r.num("material", "nu1", 1.0);
  c.material.nu2 = r.num("material", "nu2", 1.0);
  c.material.rho1 = r.num("material", "rho1", 1.0);
  c.material.rho2 = r.num("material", "rho2", 1.0);

  const std::string kind = r.str("microstructure", "kind", "laminate");
  try {
    c.structure.kind = structure_kind_from_string(kind);
  } catch (const std::exception& e) {
    throw ConfigError(r.has("microstructure", "kind") ? r.line_of("microstructure", "kind") : 0,
                      e.what());
  }
  c.structure.vf = r.num("microstructure", "vf", 0.5);
  c.structure.epsilon = r.num("microstructure", "epsilon", 0.25);
  c.structure.direction = static_cast<int>(r.integer("microstructure", "direction", 0));
  c.structure.seed = static_cast<std::uint64_t>(r.integer("microstructure", "seed", 1));
  c.structure.min_gap = static_cast<int>(r.integer("microstructure", "min_gap", 2));

  c.T = r.num("time", "T", 0.1);
  c.dt = r.num("time", "dt", 0.0);
  c.K = static_cast<int>(r.integer("time", "K", 200));
  c.ds = r.num("time", "ds", 0.0);
  c.horizon = r.num("time", "horizon", 0.0);
  c.theta_scheme = r.num("time", "theta", 0.5);
  c.snapshot_every = static_cast<int>(r.integer("time", "snapshot_every", 0));

  c.tol = r.num("solver", "tol", 1e-10);
  c.iter_cap_per_n = static_cast<int>(r.integer("solver", "iter_cap_per_n", 50));
  c.mode = r.str("solver", "mode", "periodic-cell");
  if (c.mode != "periodic-cell" && c.mode != "dirichlet-rve")
    throw ConfigError(r.has("solver", "mode") ? r.line_of("solver", "mode") : 0,
                      "mode must be periodic-cell or dirichlet-rve");
  c.preconditioner = r.str("solver", "preconditioner", "fourier");
  c.kernel_backend = r.str("solver", "kernel_backend", "openmp");

  c.convection = r.flag("run", "convection", false);
  c.out = r.str("run", "out", "runs/out");
  c.seed = static_cast<std::uint64_t>(r.integer("run", "seed", 1));
  c.forcing = r.str("run", "forcing", "none");
  if (c.forcing != "none" && c.forcing != "shear_sine")
    throw ConfigError(r.has("run", "forcing") ? r.line_of("run", "forcing") : 0,
                      "forcing must be none or shear_sine");
  c.forcing_amplitude = r.num("run", "forcing_amplitude", 0.0);
  c.forcing_ramp = r.num("run", "forcing_ramp", 0.0);
  c.initial_velocity = r.str("run", "initial_velocity", "zero");
  if (c.initial_velocity != "zero" && c.initial_velocity != "random" &&
      c.initial_velocity != "shear_sine")
    throw ConfigError(r.has("run", "initial_velocity") ? r.line_of("run", "initial_velocity") : 0,
                      "initial_velocity must be zero, random or shear_sine");
  c.v0_amplitude = r.num("run", "v0_amplitude", 0.0);
  c.eps_list = r.list("run", "eps_list");

  // eager validation for line-precise diagnostics
  try {
    (void)c.make_grid();
    c.material.validate();
  } catch (const std::exception& e) {
    throw ConfigError(0, e.what());
  }
  if (c.theta_scheme < 0.5 || c.theta_scheme > 1.0)
    throw ConfigError(r.has("time", "theta") ? r.line_of("time", "theta") : 0,
                      "theta must lie in [0.5, 1]");
  return c;
}

SimConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return parse_config_text(os.str());
}

Grid SimConfig::make_grid() const {
  const BcMode bc = mode == "dirichlet-rve" ? BcMode::dirichlet : BcMode::periodic;
  return Grid(dim, n, length, bc);
}

SaddleOptions SimConfig::saddle_options() const {
  SaddleOptions o;
  o.tol = tol;
  o.iter_cap_per_n = iter_cap_per_n;
  if (preconditioner == "fourier")
    o.precond = Preconditioner::fourier;
  else if (preconditioner == "diagonal")
    o.precond = Preconditioner::diagonal;
  else if (preconditioner == "none")
    o.precond = Preconditioner::none;
  else
    throw std::runtime_error("unknown preconditioner '" + preconditioner + "'");
  return o;
}

Forcing SimConfig::make_forcing() const {
  Forcing f;
  if (forcing == "shear_sine") f.kind = Forcing::Kind::shear_sine;
  f.amplitude = forcing_amplitude;
  f.ramp = forcing_ramp;
  return f;
}

VectorField SimConfig::make_initial_velocity(const Grid& g) const {
  if (initial_velocity == "random" && v0_amplitude != 0.0)
    return make_random_divfree_velocity(g, seed, v0_amplitude);
  VectorField v(g);
  if (initial_velocity == "shear_sine" && v0_amplitude != 0.0) {
    Forcing f;
    f.kind = Forcing::Kind::shear_sine;
    f.amplitude = v0_amplitude;
    v = f.evaluate(g, 0.0);
  }
  return v;
}

double SimConfig::effective_dt(const Grid& g) const {
  if (dt > 0.0) return dt;
  const double h = std::min(g.h(0), g.h(1));
  const double rho_min = std::min(material.rho1, material.rho2);
  return h * h * rho_min / (4.0 * material.beta2());
}

CorrectorOptions SimConfig::corrector_options() const {
  CorrectorOptions o;
  o.K = K;
  o.ds = ds;
  o.horizon = horizon;
  o.saddle = saddle_options();
  return o;
}

int SimConfig::micro_steps(const Grid& g) const {
  return std::max(1, static_cast<int>(std::lround(T / effective_dt(g))));
}

std::string serialize_config(const SimConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "[grid]\n";
  os << "dim = " << c.dim << "\n";
  os << "nx = " << c.n[0] << "\nny = " << c.n[1] << "\n";
  os << "lx = " << c.length[0] << "\nly = " << c.length[1] << "\n";
  os << "\n[material]\n";
  os << "case = " << to_string(c.material.mat_case) << "\n";
  os << "mu1 = " << c.material.mu1 << "\nmu2 = " << c.material.mu2 << "\n";
  os << "nu1 = " << c.material.nu1 << "\nnu2 = " << c.material.nu2 << "\n";
  os << "rho1 = " << c.material.rho1 << "\nrho2 = " << c.material.rho2 << "\n";
  os << "\n[microstructure]\n";
  os << "kind = " << to_string(c.structure.kind) << "\n";
  os << "vf = " << c.structure.vf << "\n";
  os << "epsilon = " << c.structure.epsilon << "\n";
  os << "direction = " << c.structure.direction << "\n";
  os << "seed = " << c.structure.seed << "\n";
  os << "min_gap = " << c.structure.min_gap << "\n";
  os << "\n[time]\n";
  os << "T = " << c.T << "\ndt = " << c.dt << "\nK = " << c.K << "\nds = " << c.ds << "\n";
  os << "horizon = " << c.horizon << "\ntheta = " << c.theta_scheme << "\n";
  os << "snapshot_every = " << c.snapshot_every << "\n";
  os << "\n[solver]\n";
  os << "tol = " << c.tol << "\niter_cap_per_n = " << c.iter_cap_per_n << "\n";
  os << "mode = " << c.mode << "\npreconditioner = " << c.preconditioner << "\n";
  os << "kernel_backend = " << c.kernel_backend << "\n";
  os << "\n[run]\n";
  os << "convection = " << (c.convection ? "on" : "off") << "\n";
  os << "out = " << c.out << "\n";
  os << "seed = " << c.seed << "\n";
  os << "forcing = " << c.forcing << "\n";
  os << "forcing_amplitude = " << c.forcing_amplitude << "\n";
  os << "forcing_ramp = " << c.forcing_ramp << "\n";
  os << "initial_velocity = " << c.initial_velocity << "\n";
  os << "v0_amplitude = " << c.v0_amplitude << "\n";
  if (!c.eps_list.empty()) {
    os << "eps_list = ";
    for (std::size_t i = 0; i < c.eps_list.size(); ++i)
      os << (i ? "," : "") << c.eps_list[i];
    os << "\n";
  }
  return os.str();
}

std::uint64_t config_hash(const SimConfig& c) {
  const std::string s = serialize_config(c);
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace homog
