#pragma once

#include <string>
#include <vector>

#include "calql/nn/mlp.hpp"

namespace calql::nn {

/// Binary tensor file: for each tensor, a u64 rank, u64 dims, then the data
/// as little-endian float64. Loaders validate shape/payload agreement.
void write_tensor_file(const std::string& path, const std::vector<const Tensor*>& tensors);
std::vector<Tensor> read_tensor_file(const std::string& path);

/// One network = `<prefix>.weights.bin` + text manifest `<prefix>.manifest`
/// carrying layer widths and the hidden activation.
void save_mlp(const Mlp& net, const std::string& prefix);
Mlp load_mlp(const std::string& prefix);

}  // namespace calql::nn
