#pragma once

#include <string>

#include "rkm/model.hpp"

namespace rkm::cli {

/// Binary layout, little endian: "RKM1", u32 n, u32 N, n*N f64 column-major
/// (one sample per column), N u32 labels. The seed is not stored.
void write_binary(const model::Dataset& data, const std::string& path);
model::Dataset read_binary(const std::string& path);

/// Header x0..x{n-1},label; one sample per row; 17 significant digits.
void write_csv(const model::Dataset& data, const std::string& path);
model::Dataset read_csv(const std::string& path);

} // namespace rkm::cli
