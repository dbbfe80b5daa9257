#include "ecpe/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ecpe/errors.hpp"

namespace ecpe::net {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr std::uint32_t kMaxRank = 8;
constexpr std::uint32_t kMaxNameLength = 4096;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const char* what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw FormatError(std::string("checkpoint: truncated while reading ") + what);
  }
  return v;
}

}  // namespace

void write_tensors(std::ostream& out, const std::vector<std::pair<std::string, const ad::Tensor*>>& tensors) {
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t->rank()));
    for (std::size_t d : t->shape()) put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(t->data().data()), static_cast<std::streamsize>(t->size() * sizeof(double)));
  }
}

std::vector<std::pair<std::string, ad::Tensor>> read_tensors(std::istream& in) {
  char magic[sizeof kCheckpointMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw FormatError("checkpoint: bad magic");
  }
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  const auto count = get<std::uint32_t>(in, "tensor count");
  std::vector<std::pair<std::string, ad::Tensor>> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = get<std::uint32_t>(in, "name length");
    if (name_len == 0 || name_len > kMaxNameLength) throw FormatError("checkpoint: bad name length");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw FormatError("checkpoint: truncated tensor name");
    const auto rank = get<std::uint32_t>(in, "rank");
    if (rank == 0 || rank > kMaxRank) throw FormatError("checkpoint: tensor '" + name + "' has bad rank");
    ad::Shape shape(rank);
    std::uint64_t total = 1;
    for (auto& d : shape) {
      const auto dim = get<std::uint64_t>(in, "shape");
      if (dim == 0 || dim > (std::uint64_t{1} << 32)) throw FormatError("checkpoint: tensor '" + name + "' has bad shape");
      d = dim;
      total *= dim;
      if (total > (std::uint64_t{1} << 34)) throw FormatError("checkpoint: tensor '" + name + "' is too large");
    }
    std::vector<double> values(total);
    if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(total * sizeof(double)))) {
      throw FormatError("checkpoint: truncated values of tensor '" + name + "'");
    }
    out.emplace_back(std::move(name), ad::Tensor(std::move(shape), std::move(values)));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("checkpoint: trailing bytes after last tensor");
  return out;
}

void save_checkpoint(const std::filesystem::path& path, Parameters& params) {
  std::vector<std::pair<std::string, const ad::Tensor*>> tensors;
  for (const auto& np : params.named()) tensors.emplace_back(np.name, np.tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  write_tensors(out, tensors);
  if (!out.flush()) throw Error("failed writing checkpoint " + path.string());
}

Parameters load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  return from_named_tensors(read_tensors(in));
}

}  // namespace ecpe::net
