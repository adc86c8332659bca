#include "homog/microstructure.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

namespace homog {

StructureKind structure_kind_from_string(const std::string& s) {
  if (s == "laminate") return StructureKind::laminate;
  if (s == "checkerboard") return StructureKind::checkerboard;
  if (s == "random_inclusions") return StructureKind::random_inclusions;
  throw std::invalid_argument("unknown microstructure kind '" + s + "'");
}

std::string to_string(StructureKind k) {
  switch (k) {
    case StructureKind::laminate: return "laminate";
    case StructureKind::checkerboard: return "checkerboard";
    case StructureKind::random_inclusions: return "random_inclusions";
  }
  return "?";
}

std::uint64_t SplitMix64::next() {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return (next() >> 11) * 0x1.0p-53; }

int SplitMix64::uniform_int(int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next() % span);
}

namespace {

int period_cells(const StructureSpec& spec, const Grid& g, int axis) {
  const double cells = spec.epsilon * g.n[axis] / g.length[axis];
  const int pc = static_cast<int>(std::lround(cells));
  if (pc < 4)
    throw std::invalid_argument("unresolvable epsilon: " + std::to_string(cells) +
                                " cells per period (need >= 4)");
  if (g.n[axis] % pc != 0)
    throw std::invalid_argument("epsilon period (" + std::to_string(pc) +
                                " cells) must divide n (" + std::to_string(g.n[axis]) + ")");
  return pc;
}

void generate_laminate(const StructureSpec& spec, PhaseField& out) {
  const Grid& g = out.grid;
  const int axis = spec.direction;
  if (axis < 0 || axis >= g.dim) throw std::invalid_argument("laminate direction out of range");
  if (spec.vf <= 0.0) return;  // all phase 2
  if (spec.vf >= 1.0) {
    for (auto& v : out.theta0.values) v = 1.0;
    return;
  }
  const int pc = period_cells(spec, g, axis);
  const int stripe = static_cast<int>(std::lround(spec.vf * pc));
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i) {
      const int along = (axis == 0) ? i : j;
      out.theta0.at(i, j) = (along % pc) < stripe ? 1.0 : 0.0;
    }
}

void generate_checkerboard(const StructureSpec& spec, PhaseField& out) {
  const Grid& g = out.grid;
  const int pcx = period_cells(spec, g, 0);
  const int pcy = period_cells(spec, g, 1);
  if (pcx % 2 != 0 || pcy % 2 != 0)
    throw std::invalid_argument("checkerboard period must be an even cell count");
  const int hx = pcx / 2, hy = pcy / 2;
  // vf = 0.5 is the classic pattern; other fractions shrink the phase-1
  // squares (vf < 0.5) or the phase-2 squares (vf > 0.5) inside their tiles.
  const bool invert = spec.vf > 0.5;
  const double f = invert ? 1.0 - spec.vf : spec.vf;
  const int sx = std::min(hx, static_cast<int>(std::lround(hx * std::sqrt(2.0 * f))));
  const int sy = std::min(hy, static_cast<int>(std::lround(hy * std::sqrt(2.0 * f))));
  for (int j = 0; j < g.n[1]; ++j)
    for (int i = 0; i < g.n[0]; ++i) {
      const int ti = (i % pcx) / hx;  // 0 or 1 subtile
      const int tj = (j % pcy) / hy;
      const bool even_tile = (ti + tj) % 2 == 0;
      const int li = i % hx, lj = j % hy;
      const int ox = (hx - sx) / 2, oy = (hy - sy) / 2;
      const bool in_square = li >= ox && li < ox + sx && lj >= oy && lj < oy + sy;
      const bool one = even_tile && in_square;
      out.theta0.at(i, j) = (one != invert) ? 1.0 : 0.0;
    }
}

struct Inclusion {
  int i, j, side;
};

bool too_close(const Inclusion& a, const Inclusion& b, int gap, int nx, int ny, bool per) {
  // separation test on the torus: overlap of gap-dilated boxes
  auto overlap_1d = [per](int a0, int la, int b0, int lb, int n) {
    // does [a0, a0+la) intersect [b0, b0+lb), modulo n when periodic?
    if (!per) return a0 < b0 + lb && b0 < a0 + la;
    for (int shift : {-n, 0, n}) {
      const int bb = b0 + shift;
      if (a0 < bb + lb && bb < a0 + la) return true;
    }
    return false;
  };
  return overlap_1d(a.i - gap, a.side + 2 * gap, b.i, b.side, nx) &&
         overlap_1d(a.j - gap, a.side + 2 * gap, b.j, b.side, ny);
}

void generate_random_inclusions(const StructureSpec& spec, PhaseField& out) {
  const Grid& g = out.grid;
  if (spec.vf < 0.0 || spec.vf > 1.0) throw std::invalid_argument("vf out of [0,1]");
  const int pc = period_cells(spec, g, 0);
  const int nx = g.n[0], ny = g.n[1];
  const std::size_t total = out.theta0.values.size();
  const double tol = 2.0 / std::min(nx, ny);
  const int default_side = std::max(2, pc / 2);
  SplitMix64 rng(spec.seed);
  std::vector<Inclusion> placed;
  double measured = 0.0;
  int failures = 0;
  const int max_failures = 20000;
  while (spec.vf - measured > 0.5 * tol && failures < max_failures) {
    const double remaining = (spec.vf - measured) * static_cast<double>(total);
    int side = std::min(default_side, std::max(2, static_cast<int>(std::floor(std::sqrt(remaining)))));
    Inclusion cand{rng.uniform_int(0, nx - 1), rng.uniform_int(0, ny - 1), side};
    if (!g.periodic() &&
        (cand.i + side > nx || cand.j + side > ny || cand.i < spec.min_gap ||
         cand.j < spec.min_gap || cand.i + side + spec.min_gap > nx ||
         cand.j + side + spec.min_gap > ny)) {
      ++failures;
      continue;
    }
    bool ok = true;
    for (const auto& other : placed)
      if (too_close(cand, other, spec.min_gap, nx, ny, g.periodic())) {
        ok = false;
        break;
      }
    if (!ok) {
      ++failures;
      continue;
    }
    placed.push_back(cand);
    for (int dj = 0; dj < side; ++dj)
      for (int di = 0; di < side; ++di) {
        const int ci = (cand.i + di) % nx;
        const int cj = (cand.j + dj) % ny;
        out.theta0.at(ci, cj) = 1.0;
      }
    measured += static_cast<double>(side) * side / static_cast<double>(total);
  }
  if (!matrix_phase_connected(out) && !placed.empty()) {
    // drop the last inclusion; with min_gap >= 2 this cannot recur
    const Inclusion& last = placed.back();
    for (int dj = 0; dj < last.side; ++dj)
      for (int di = 0; di < last.side; ++di)
        out.theta0.at((last.i + di) % nx, (last.j + dj) % ny) = 0.0;
    placed.pop_back();
  }
}

}  // namespace

PhaseField generate_phase_field(const StructureSpec& spec, const Grid& grid) {
  validate(grid);
  if (grid.dim != 2) throw std::invalid_argument("phase generation implemented for dim 2");
  if (spec.vf < 0.0 || spec.vf > 1.0) throw std::invalid_argument("vf out of [0,1]");
  if (!(spec.epsilon > 0.0 && spec.epsilon <= 1.0))
    throw std::invalid_argument("epsilon out of (0,1]");
  PhaseField out;
  out.grid = grid;
  out.theta0 = ScalarField(grid, Staggering::cell);
  out.epsilon = spec.epsilon;
  out.descriptor = spec;
  switch (spec.kind) {
    case StructureKind::laminate: generate_laminate(spec, out); break;
    case StructureKind::checkerboard: generate_checkerboard(spec, out); break;
    case StructureKind::random_inclusions: generate_random_inclusions(spec, out); break;
  }
  return out;
}

double measure_volume_fraction(const PhaseField& phase) {
  double s = 0.0;
  for (double v : phase.theta0.values) s += v;
  return s / static_cast<double>(phase.theta0.values.size());
}

bool matrix_phase_connected(const PhaseField& phase) {
  const Grid& g = phase.grid;
  const int nx = g.n[0], ny = g.n[1];
  const auto& th = phase.theta0;
  std::size_t zeros = 0;
  int si = -1, sj = -1;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (th.at(i, j) == 0.0) {
        ++zeros;
        if (si < 0) {
          si = i;
          sj = j;
        }
      }
  if (zeros == 0) return true;
  std::vector<char> seen(static_cast<std::size_t>(nx) * ny, 0);
  std::deque<std::pair<int, int>> queue{{si, sj}};
  seen[th.idx(si, sj)] = 1;
  std::size_t visited = 0;
  while (!queue.empty()) {
    auto [i, j] = queue.front();
    queue.pop_front();
    ++visited;
    const int nbs[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
    for (auto& nb : nbs) {
      int ii = nb[0], jj = nb[1];
      if (g.periodic()) {
        ii = (ii + nx) % nx;
        jj = (jj + ny) % ny;
      } else if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) {
        continue;
      }
      const std::size_t id = th.idx(ii, jj);
      if (!seen[id] && th.at(ii, jj) == 0.0) {
        seen[id] = 1;
        queue.emplace_back(ii, jj);
      }
    }
  }
  return visited == zeros;
}

bool is_epsilon_periodic(const PhaseField& phase) {
  const Grid& g = phase.grid;
  const int nx = g.n[0], ny = g.n[1];
  const int sx = static_cast<int>(std::lround(phase.epsilon * nx / g.length[0]));
  const int sy = static_cast<int>(std::lround(phase.epsilon * ny / g.length[1]));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (phase.theta0.at(i, j) != phase.theta0.at((i + sx) % nx, j)) return false;
      if (phase.theta0.at(i, j) != phase.theta0.at(i, (j + sy) % ny)) return false;
    }
  return true;
}

}  // namespace homog
