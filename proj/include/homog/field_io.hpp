#pragma once

#include <iosfwd>
#include <string>

#include "homog/field.hpp"

namespace homog {

// Field files: plain-text header (name, dim, n, staggering, count per
// component), then the raw little-endian float64 payload. One file per
// field; vector / tensor fields store their components back to back.

void write_field(const std::string& path, const ScalarField& f, const std::string& name);
void write_field(const std::string& path, const VectorField& f, const std::string& name);
void write_field(const std::string& path, const SymTensorField& f, const std::string& name);

struct NamedField {
  std::string name;
  std::string kind;  // scalar | vector | symtensor
  ScalarField scalar;
  VectorField vector;
  SymTensorField tensor;
};

NamedField read_field(const std::string& path);
ScalarField read_scalar_field(const std::string& path);
VectorField read_vector_field(const std::string& path);
SymTensorField read_symtensor_field(const std::string& path);

}  // namespace homog
