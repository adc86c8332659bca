#include "homog/field_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace homog {

namespace {

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; byte swapping not implemented");

struct ComponentSpec {
  std::string tag;  // cell | node | face0 | face1
  std::size_t count = 0;
};

void write_header(std::ostream& os, const std::string& name, const std::string& kind,
                  const Grid& g, const std::vector<ComponentSpec>& comps) {
  os << "homog-field 1\n";
  os << "name " << name << "\n";
  os << "kind " << kind << "\n";
  os << "dim " << g.dim << "\n";
  os << "n " << g.n[0] << " " << g.n[1] << "\n";
  os << "length " << g.length[0] << " " << g.length[1] << "\n";
  os << "bc " << to_string(g.bc) << "\n";
  os << "components " << comps.size() << "\n";
  for (const auto& c : comps) os << "component " << c.tag << " " << c.count << "\n";
  os << "binary\n";
}

void write_payload(std::ostream& os, const std::vector<const ScalarField*>& parts) {
  for (const ScalarField* f : parts)
    os.write(reinterpret_cast<const char*>(f->values.data()),
             static_cast<std::streamsize>(f->values.size() * sizeof(double)));
}

ComponentSpec spec_of(const ScalarField& f) {
  ComponentSpec s;
  if (f.stag == Staggering::face)
    s.tag = "face" + std::to_string(f.face_axis);
  else
    s.tag = to_string(f.stag);
  s.count = f.values.size();
  return s;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  return os;
}

}  // namespace

void write_field(const std::string& path, const ScalarField& f, const std::string& name) {
  auto os = open_out(path);
  write_header(os, name, "scalar", f.grid, {spec_of(f)});
  write_payload(os, {&f});
}

void write_field(const std::string& path, const VectorField& f, const std::string& name) {
  auto os = open_out(path);
  write_header(os, name, "vector", f.grid, {spec_of(f[0]), spec_of(f[1])});
  write_payload(os, {&f[0], &f[1]});
}

void write_field(const std::string& path, const SymTensorField& f, const std::string& name) {
  auto os = open_out(path);
  write_header(os, name, "symtensor", f.grid,
               {spec_of(f.comp[0]), spec_of(f.comp[1]), spec_of(f.comp[2])});
  write_payload(os, {&f.comp[0], &f.comp[1], &f.comp[2]});
}

namespace {

ScalarField make_component(const Grid& g, const std::string& tag) {
  if (tag == "cell") return ScalarField(g, Staggering::cell);
  if (tag == "node") return ScalarField(g, Staggering::node);
  if (tag == "face0") return ScalarField(g, Staggering::face, 0);
  if (tag == "face1") return ScalarField(g, Staggering::face, 1);
  throw std::runtime_error("field file: unknown component tag '" + tag + "'");
}

}  // namespace

NamedField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open field file '" + path + "'");
  std::string line;
  if (!std::getline(is, line) || line != "homog-field 1")
    throw std::runtime_error("'" + path + "' is not a homog field file");

  NamedField out;
  Grid g;
  g.dim = 2;
  std::vector<ComponentSpec> comps;
  while (std::getline(is, line)) {
    if (line == "binary") break;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "name")
      ls >> out.name;
    else if (key == "kind")
      ls >> out.kind;
    else if (key == "dim")
      ls >> g.dim;
    else if (key == "n")
      ls >> g.n[0] >> g.n[1];
    else if (key == "length")
      ls >> g.length[0] >> g.length[1];
    else if (key == "bc") {
      std::string b;
      ls >> b;
      g.bc = bc_mode_from_string(b);
    } else if (key == "component") {
      ComponentSpec c;
      ls >> c.tag >> c.count;
      comps.push_back(c);
    }
  }
  validate(g);

  auto read_one = [&](const ComponentSpec& c) {
    ScalarField f = make_component(g, c.tag);
    if (f.values.size() != c.count)
      throw std::runtime_error("field file '" + path + "': component count " +
                               std::to_string(c.count) + " inconsistent with grid (expected " +
                               std::to_string(f.values.size()) + ")");
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(c.count * sizeof(double)));
    if (!is) throw std::runtime_error("field file '" + path + "': truncated payload");
    return f;
  };

  if (out.kind == "scalar") {
    if (comps.size() != 1) throw std::runtime_error("scalar field with != 1 component");
    out.scalar = read_one(comps[0]);
  } else if (out.kind == "vector") {
    if (comps.size() != 2) throw std::runtime_error("vector field with != 2 components");
    out.vector = VectorField(g);
    out.vector[0] = read_one(comps[0]);
    out.vector[1] = read_one(comps[1]);
  } else if (out.kind == "symtensor") {
    if (comps.size() != 3) throw std::runtime_error("symtensor field with != 3 components");
    out.tensor = SymTensorField(g);
    for (int c = 0; c < 3; ++c) out.tensor.comp[c] = read_one(comps[c]);
  } else {
    throw std::runtime_error("field file '" + path + "': unknown kind '" + out.kind + "'");
  }
  return out;
}

ScalarField read_scalar_field(const std::string& path) {
  NamedField f = read_field(path);
  if (f.kind != "scalar") throw std::runtime_error("'" + path + "' is not a scalar field");
  return std::move(f.scalar);
}

VectorField read_vector_field(const std::string& path) {
  NamedField f = read_field(path);
  if (f.kind != "vector") throw std::runtime_error("'" + path + "' is not a vector field");
  return std::move(f.vector);
}

SymTensorField read_symtensor_field(const std::string& path) {
  NamedField f = read_field(path);
  if (f.kind != "symtensor") throw std::runtime_error("'" + path + "' is not a symtensor field");
  return std::move(f.tensor);
}

}  // namespace homog
