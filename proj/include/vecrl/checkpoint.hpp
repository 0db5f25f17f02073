#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vecrl/tensor.hpp"

namespace vecrl {

// Flat binary tensor container. Layout: magic "SKTN", version u32, tensor
// count u32; per tensor: name length u32, name bytes, rank u32, dims u64
// each, then the f64 payload. All integers and floats little-endian.
void save_tensors(const std::string& path,
                  const std::vector<std::pair<std::string, Tensor>>& tensors);

std::vector<std::pair<std::string, Tensor>> load_tensors(const std::string& path);

}  // namespace vecrl
