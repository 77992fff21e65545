#include "nttnn/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>

#include "nttnn/linalg.hpp"

namespace nttnn::io {

namespace {

constexpr char kMagic[4] = {'N', 'T', 'T', '3'};

template <typename U>
void put_le(std::string& buf, U v) {
  for (std::size_t b = 0; b < sizeof(U); ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

template <typename U>
U get_le(const std::string& buf, std::size_t offset) {
  U v = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b)
    v |= static_cast<U>(static_cast<unsigned char>(buf[offset + b])) << (8 * b);
  return v;
}

// Uniform draw from [0, n) without modulo bias.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t v = rng();
    if (v >= threshold) return v % n;
  }
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const Tensor3& t) {
  std::string buf;
  buf.reserve(kHeaderBytes + 8 * t.size());
  buf.append(kMagic, 4);
  put_le<std::uint32_t>(buf, kFormatVersion);
  put_le<std::uint64_t>(buf, t.dims().n1);
  put_le<std::uint64_t>(buf, t.dims().n2);
  put_le<std::uint64_t>(buf, t.dims().n3);
  for (double v : t.data()) put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(v));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Tensor3 read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < 4) throw FormatError(path.string() + ": truncated magic", buf.size());
  if (!std::equal(kMagic, kMagic + 4, buf.begin())) throw FormatError(path.string() + ": bad magic", 0);
  if (buf.size() < kHeaderBytes) throw FormatError(path.string() + ": truncated header", buf.size());
  const auto version = get_le<std::uint32_t>(buf, 4);
  if (version != kFormatVersion) {
    throw FormatError(path.string() + ": unsupported version " + std::to_string(version), 4);
  }
  const std::uint64_t n1 = get_le<std::uint64_t>(buf, 8);
  const std::uint64_t n2 = get_le<std::uint64_t>(buf, 16);
  const std::uint64_t n3 = get_le<std::uint64_t>(buf, 24);
  if (n1 == 0 || n2 == 0 || n3 == 0) throw FormatError(path.string() + ": zero dimension", 8);

  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max() / 8;
  if (n1 > kMax / n2 || n1 * n2 > kMax / n3) throw FormatError(path.string() + ": dimension overflow", 8);
  const std::uint64_t count = n1 * n2 * n3;
  const std::uint64_t expected = kHeaderBytes + 8 * count;
  if (buf.size() < expected) throw FormatError(path.string() + ": truncated payload", buf.size());
  if (buf.size() > expected) throw FormatError(path.string() + ": trailing bytes after payload", expected);

  std::vector<double> data(count);
  for (std::uint64_t n = 0; n < count; ++n)
    data[n] = std::bit_cast<double>(get_le<std::uint64_t>(buf, kHeaderBytes + 8 * n));
  return Tensor3(Dims{n1, n2, n3}, std::move(data));
}

void write_mask(const std::filesystem::path& path, const ObservationMask& mask) {
  write_tensor(path, mask.to_tensor());
}

ObservationMask read_mask(const std::filesystem::path& path) {
  Tensor3 t = read_tensor(path);
  for (double v : t.data())
    if (v != 0.0 && v != 1.0) throw std::runtime_error(path.string() + ": mask entries must be 0 or 1");
  return ObservationMask::FromTensor(t);
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  Tensor3 t(Dims{static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()), 1});
  Eigen::Map<Matrix>(t.data().data(), m.rows(), m.cols()) = m;
  write_tensor(path, t);
}

Matrix read_matrix(const std::filesystem::path& path) {
  Tensor3 t = read_tensor(path);
  if (t.dims().n3 != 1) throw std::runtime_error(path.string() + ": a matrix file must have n3 = 1");
  return t.slice(0);
}

ObservationMask gen_mask(const Dims& dims, double sr, std::uint64_t seed) {
  if (!(sr > 0.0 && sr <= 1.0)) throw std::invalid_argument("sampling rate must be in (0, 1]");
  const std::size_t total = dims.numel();
  if (total == 0) throw std::invalid_argument("mask dimensions must be positive");
  const auto wanted = static_cast<std::size_t>(std::llround(sr * static_cast<double>(total)));

  // Partial Fisher-Yates: the first `wanted` positions become the observed set.
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t n = 0; n < wanted && n + 1 < total; ++n) {
    const std::size_t pick = n + bounded(rng, total - n);
    std::swap(order[n], order[pick]);
  }
  ObservationMask mask(dims);
  for (std::size_t n = 0; n < wanted; ++n) mask.set(order[n], true);
  return mask;
}

void SynthSpec::validate() const {
  if (dims.n1 == 0 || dims.n2 == 0 || dims.n3 == 0) throw std::invalid_argument("synth: dims must be positive");
  if (r == 0 || r > dims.n3) throw std::invalid_argument("synth: r must be in [1, n3]");
  if (slice_rank == 0 || slice_rank >= std::min(dims.n1, dims.n2)) {
    throw std::invalid_argument("synth: slice rank must be in [1, min(n1, n2))");
  }
  if (!(margin > 0.0 && margin < 1.0)) throw std::invalid_argument("synth: margin must be in (0, 1)");
}

SynthData synth_ground_truth(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> positive(0.5, 1.5);
  const auto n1 = static_cast<Eigen::Index>(spec.dims.n1);
  const auto n2 = static_cast<Eigen::Index>(spec.dims.n2);
  const auto n3 = static_cast<Eigen::Index>(spec.dims.n3);
  const auto r = static_cast<Eigen::Index>(spec.r);
  const auto s = static_cast<Eigen::Index>(spec.slice_rank);

  Matrix g(n3, r);
  for (Eigen::Index c = 0; c < r; ++c)
    for (Eigen::Index i = 0; i < n3; ++i) g(i, c) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n3, r);
  Matrix t = q.transpose();

  const NonlinearFn& phi = spec.phi;
  const double lo = phi.range_lo();
  const double hi = phi.range_hi();
  // Nonnegative ranges get positive factors; symmetric ones get Gaussian factors.
  const bool nonneg = std::isfinite(lo) && lo >= 0.0;
  double target_lo;
  double target_hi;
  if (nonneg) {
    const double half = std::isfinite(hi) ? 0.5 * (hi - lo) : 1.0;
    target_lo = lo + spec.margin * half;
    target_hi = std::isfinite(hi) ? hi - spec.margin * half : 1.0;
  } else {
    const double half = std::isfinite(hi) ? 0.5 * (hi - lo) : 1.0;
    target_hi = (1.0 - spec.margin) * half;
    target_lo = -target_hi;
  }

  SynthData out;
  out.y = Tensor3(Dims{spec.dims.n1, spec.dims.n2, spec.r});
  for (Eigen::Index k = 0; k < r; ++k) {
    Matrix a(n1, s);
    Matrix b(n2, s);
    auto draw = [&](Matrix& m) {
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, c) = nonneg ? positive(rng) : gauss(rng);
    };
    draw(a);
    draw(b);
    Matrix yk = a * b.transpose();
    const double peak = nonneg ? yk.maxCoeff() : yk.cwiseAbs().maxCoeff();
    yk *= target_hi / peak;
    const double slack = 1e-12 * std::abs(target_hi);
    if (yk.minCoeff() < target_lo - slack || yk.maxCoeff() > target_hi + slack || !phi.in_range(yk.minCoeff()) ||
        !phi.in_range(yk.maxCoeff())) {
      throw std::logic_error("synth: generated slice left the admissible range");
    }
    out.y.slice(static_cast<std::size_t>(k)) = yk;
  }
  out.z = apply_phi_inverse(out.y, phi);
  out.x = mode3_product(out.z, t.transpose(), Exec::Serial);
  out.transform = TransformSpec{std::move(t), phi, TransformMode::Learned};
  return out;
}

}  // namespace nttnn::io
