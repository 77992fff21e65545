#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "nttnn/tensor.hpp"
#include "nttnn/transforms.hpp"

namespace nttnn::io {

/// Malformed or unreadable NTT3 file. `offset` is the byte position where
/// reading failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

// NTT3 layout, all little-endian:
//   "NTT3" | u32 version = 1 | u64 n1 | u64 n2 | u64 n3 | f64 payload[n1*n2*n3]
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderBytes = 4 + 4 + 3 * 8;

void write_tensor(const std::filesystem::path& path, const Tensor3& t);
Tensor3 read_tensor(const std::filesystem::path& path);

/// Masks are NTT3 tensors of 0.0 / 1.0.
void write_mask(const std::filesystem::path& path, const ObservationMask& mask);
ObservationMask read_mask(const std::filesystem::path& path);

/// Matrices are stored as (rows, cols, 1) tensors.
void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

/// Exactly round(sr * N) entries, uniformly without replacement.
ObservationMask gen_mask(const Dims& dims, double sr, std::uint64_t seed);

struct SynthSpec {
  Dims dims{20, 20, 8};
  std::size_t r = 3;
  std::size_t slice_rank = 2;
  NonlinearFn phi{NonlinearFn::Kind::Tanh};
  double margin = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthData {
  Tensor3 x;            // ground truth, X = Z x_3 T^T
  Tensor3 y;            // low-rank slices, Y = phi(Z)
  Tensor3 z;            // Z = phi^{-1}(Y)
  TransformSpec transform;
};

/// Ground truth that satisfies the model exactly: psi(X) has frontal slices
/// of rank <= slice_rank under the generated T.
SynthData synth_ground_truth(const SynthSpec& spec);

}  // namespace nttnn::io
