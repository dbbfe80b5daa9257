#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ecpe/parameters.hpp"

namespace ecpe::net {

inline constexpr char kCheckpointMagic[8] = {'E', 'C', 'P', 'E', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Named-tensor container; byte layout in README.md. All integers and
/// doubles are little-endian.
void write_tensors(std::ostream& out, const std::vector<std::pair<std::string, const ad::Tensor*>>& tensors);
std::vector<std::pair<std::string, ad::Tensor>> read_tensors(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, Parameters& params);
/// Throws FormatError on a bad header, truncation, trailing bytes, or a
/// tensor set that does not describe a model.
Parameters load_checkpoint(const std::filesystem::path& path);

}  // namespace ecpe::net
