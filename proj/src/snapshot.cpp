#include "undulate/snapshot.hpp"

#include <fmt/format.h>

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

namespace undulate {

namespace {

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    bytes(b, 8);
  }
  template <class F>
  void array(std::size_t n, F&& get) {
    std::vector<unsigned char> buf(8 * n);
    for (std::size_t q = 0; q < n; ++q) {
      const auto bits = std::bit_cast<std::uint64_t>(static_cast<double>(get(q)));
      for (int i = 0; i < 8; ++i) buf[8 * q + i] = static_cast<unsigned char>(bits >> (8 * i));
    }
    bytes(buf.data(), buf.size());
  }
  void finish(const std::string& path) {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + path);
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw std::runtime_error("cannot open " + path);
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), n);
    if (!in_) throw std::runtime_error("truncated snapshot: " + path_);
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  double f64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
  }
  std::vector<double> array(std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) v = f64();
    return out;
  }

 private:
  std::ifstream in_;
  std::string path_;
};

void expect_magic(Reader& r, const char* magic, const std::string& path) {
  char m[4];
  r.bytes(m, 4);
  if (std::memcmp(m, magic, 4) != 0) throw std::runtime_error(path + ": bad snapshot magic");
  const auto version = r.u32();
  if (version != kSnapshotVersion) throw std::runtime_error(path + ": unsupported snapshot version");
}

// Buffered text output; fmt keeps %.17g formatting locale-independent.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : file_(std::fopen(path.c_str(), "wb"), &std::fclose) {
    if (!file_) throw std::runtime_error("cannot open " + path + " for writing");
  }
  void line(const std::string& s) { std::fputs(s.c_str(), file_.get()); }
  template <class... Args>
  void row(fmt::format_string<Args...> f, Args&&... args) {
    buf_.clear();
    fmt::format_to(std::back_inserter(buf_), f, std::forward<Args>(args)...);
    std::fwrite(buf_.data(), 1, buf_.size(), file_.get());
  }

 private:
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> file_;
  fmt::memory_buffer buf_;
};

}  // namespace

void write_snapshot(const std::string& path, const Field3D& s, const Parameters& p) {
  const Grid3D& g = s.grid;
  Writer w(path);
  w.bytes("UNDU", 4);
  w.u32(kSnapshotVersion);
  w.u32(g.nx());
  w.u32(g.ny());
  w.u32(g.nz());
  w.u32(0);
  for (double v : {p.eps, p.tau, p.c, p.g, p.a, p.b}) w.f64(v);
  const std::size_t n = g.size();
  w.array(n, [&](std::size_t q) { return s.psi[q].real(); });
  w.array(n, [&](std::size_t q) { return s.psi[q].imag(); });
  w.array(n, [&](std::size_t q) { return s.n1[q]; });
  w.array(n, [&](std::size_t q) { return s.n2[q]; });
  w.array(n, [&](std::size_t q) { return s.n3[q]; });
  w.finish(path);
}

std::pair<Field3D, Parameters> read_snapshot(const std::string& path) {
  Reader r(path);
  expect_magic(r, "UNDU", path);
  const int nx = static_cast<int>(r.u32());
  const int ny = static_cast<int>(r.u32());
  const int nz = static_cast<int>(r.u32());
  r.u32();
  Parameters p;
  p.eps = r.f64();
  p.tau = r.f64();
  p.c = r.f64();
  p.g = r.f64();
  p.a = r.f64();
  p.b = r.f64();
  p.validate();
  Grid3D g(nx, ny, nz, p.a, p.b);
  Field3D s(g);
  const std::size_t n = g.size();
  const auto re = r.array(n);
  const auto im = r.array(n);
  const auto n1 = r.array(n);
  const auto n2 = r.array(n);
  const auto n3 = r.array(n);
  for (std::size_t q = 0; q < n; ++q) {
    s.psi[q] = cplx(re[q], im[q]);
    s.n1[q] = n1[q];
    s.n2[q] = n2[q];
    s.n3[q] = n3[q];
  }
  return {std::move(s), p};
}

void write_snapshot_2d(const std::string& path, const Field2D& s, const Parameters& p) {
  const Grid2D& g = s.grid;
  Writer w(path);
  w.bytes("UND2", 4);
  w.u32(kSnapshotVersion);
  w.u32(g.n());
  w.u32(g.n());
  w.u32(0);
  w.u32(0);
  for (double v : {p.eps, p.delta.value_or(0.0), 0.0, 0.0, 0.0, 0.0}) w.f64(v);
  const std::size_t n = g.size();
  for (const RealArray* a : {&s.phi, &s.n1, &s.n2, &s.n3})
    w.array(n, [&](std::size_t q) { return (*a)[q]; });
  w.finish(path);
}

std::pair<Field2D, Parameters> read_snapshot_2d(const std::string& path) {
  Reader r(path);
  expect_magic(r, "UND2", path);
  const int n = static_cast<int>(r.u32());
  if (static_cast<int>(r.u32()) != n) throw std::runtime_error(path + ": non-square planar grid");
  r.u32();
  r.u32();
  Parameters p;
  p.eps = r.f64();
  const double delta = r.f64();
  for (int i = 0; i < 4; ++i) r.f64();
  if (delta != 0.0) p.delta = delta;
  p.validate();
  Grid2D g(n);
  Field2D s(g);
  for (RealArray* a : {&s.phi, &s.n1, &s.n2, &s.n3}) {
    const auto v = r.array(g.size());
    std::copy(v.begin(), v.end(), a->begin());
  }
  return {std::move(s), p};
}

void write_slice_csv(const std::string& path, const Field3D& s, SliceAxis axis, int index) {
  const Grid3D& g = s.grid;
  CsvWriter out(path);
  out.line("x,y,z,re_psi,im_psi,n1,n2,n3\n");
  auto emit = [&](int i, int j, int k) {
    const std::size_t q = g.index(i, j, k);
    out.row("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", g.x(i), g.y(j),
            g.z(k), s.psi[q].real(), s.psi[q].imag(), s.n1[q], s.n2[q], s.n3[q]);
  };
  switch (axis) {
    case SliceAxis::Z:
      if (index < 0 || index >= g.nz_total()) throw std::out_of_range("slice index");
      for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) emit(i, j, index);
      break;
    case SliceAxis::Y:
      if (index < 0 || index >= g.ny()) throw std::out_of_range("slice index");
      for (int k = 0; k < g.nz_total(); ++k)
        for (int i = 0; i < g.nx(); ++i) emit(i, index, k);
      break;
    case SliceAxis::X:
      if (index < 0 || index >= g.nx()) throw std::out_of_range("slice index");
      for (int k = 0; k < g.nz_total(); ++k)
        for (int j = 0; j < g.ny(); ++j) emit(index, j, k);
      break;
  }
}

void write_planar_csv(const std::string& path, const Field2D& s) {
  const Grid2D& g = s.grid;
  CsvWriter out(path);
  out.line("x,y,phi,n1,n2,n3\n");
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      const std::size_t q = g.index(i, j);
      out.row("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", g.x(i), g.x(j), s.phi[q],
              s.n1[q], s.n2[q], s.n3[q]);
    }
}

}  // namespace undulate
