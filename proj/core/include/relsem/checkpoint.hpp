#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "relsem/errors.hpp"
#include "relsem/nn.hpp"

namespace relsem::ckpt {

// Binary parameter manifest.
//
// Layout (all integers and floats little-endian):
//   magic   8 bytes  "RSLPRM01" (the trailing two digits are the version tag)
//   count   u32      number of parameters
//   entry*  count times:
//     name_len u32, name bytes
//     ndim     u32, ndim x u32 dims
//     values   product(dims) x f64
struct ManifestEntry {
    std::string name;
    std::vector<int> shape;
    std::vector<double> values;
};

void write_manifest(std::ostream& out, const nn::ParamMap& params);
std::vector<ManifestEntry> read_manifest(std::istream& in);

// Strict load: every manifest entry must name an existing parameter of the
// same shape, and every parameter must be covered.
void load_into(nn::ParamMap& params, const std::vector<ManifestEntry>& entries);

// Little-endian primitives shared with the model-archive format.  The `get`
// forms throw CheckpointError on a truncated stream.
void put_u32(std::ostream& out, uint32_t v);
void put_f64(std::ostream& out, double d);
void put_str(std::ostream& out, const std::string& s);
uint32_t get_u32(std::istream& in);
double get_f64(std::istream& in);
std::string get_str(std::istream& in);

}  // namespace relsem::ckpt
