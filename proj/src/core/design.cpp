#include "bintopo/core/design.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "bintopo/core/errors.hpp"

namespace bintopo {

GridShape::GridShape(int nx_, int ny_, int nz_) : nx(nx_), ny(ny_), nz(nz_) {
  if (nx < 1 || ny < 1 || nz < 1) {
    throw ShapeMismatch("grid dimensions must be >= 1, got " +
                        bintopo::to_string(*this));
  }
}

std::array<int, 3> GridShape::coords(std::size_t n) const {
  if (n >= size()) {
    throw IndexOutOfRange("agent index " + std::to_string(n) +
                          " out of range for " + bintopo::to_string(*this));
  }
  const auto sx = static_cast<std::size_t>(nx);
  const auto sy = static_cast<std::size_t>(ny);
  return {static_cast<int>(n % sx), static_cast<int>((n / sx) % sy),
          static_cast<int>(n / (sx * sy))};
}

std::string to_string(const GridShape& shape) {
  return std::to_string(shape.nx) + "x" + std::to_string(shape.ny) + "x" +
         std::to_string(shape.nz);
}

Design::Design(GridShape shape) : shape_(shape), bits_(shape.size(), 0) {}

Design::Design(GridShape shape, std::vector<std::uint8_t> bits)
    : shape_(shape), bits_(std::move(bits)) {
  if (bits_.size() != shape_.size()) {
    throw LengthMismatch("design has " + std::to_string(bits_.size()) +
                         " bits but shape " + bintopo::to_string(shape_) +
                         " needs " + std::to_string(shape_.size()));
  }
  for (auto b : bits_) {
    if (b > 1) throw FormatError("design bits must be 0 or 1");
  }
}

Design Design::random(GridShape shape, Rng& rng) {
  Design d(shape);
  for (auto& b : d.bits_) b = rng.bit();
  return d;
}

Design Design::filled(GridShape shape, std::uint8_t value) {
  Design d(shape);
  std::fill(d.bits_.begin(), d.bits_.end(), value ? 1 : 0);
  return d;
}

Design Design::from_string(GridShape shape, const std::string& text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c == '0' || c == '1') {
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    } else {
      throw FormatError(std::string("unexpected design character '") + c + "'");
    }
  }
  return Design(shape, std::move(bits));
}

void Design::set(std::size_t n, std::uint8_t value) {
  if (n >= bits_.size()) {
    throw IndexOutOfRange("design index " + std::to_string(n) + " out of range");
  }
  bits_[n] = value ? 1 : 0;
}

std::size_t Design::count_ones() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

Design Design::complement() const {
  Design out = *this;
  for (auto& b : out.bits_) b ^= 1;
  return out;
}

std::string Design::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) s[i] = bits_[i] ? '1' : '0';
  return s;
}

std::size_t hamming_distance(std::span<const std::uint8_t> a,
                             std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) {
    throw LengthMismatch("hamming distance of vectors with lengths " +
                         std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += (a[i] != b[i]);
  return diff;
}

double hamming_payoff(const Design& d, std::span<const std::uint8_t> target) {
  const auto diff = hamming_distance(d.bits(), target);
  return 1.0 - static_cast<double>(diff) / static_cast<double>(d.size());
}

void write_pbd(std::ostream& out, const Design& d) {
  const auto& s = d.shape();
  out << "PBD " << s.nx << ' ' << s.ny << ' ' << s.nz << '\n';
  std::string line(static_cast<std::size_t>(s.nx), '0');
  for (int z = 0; z < s.nz; ++z) {
    for (int y = 0; y < s.ny; ++y) {
      for (int x = 0; x < s.nx; ++x) line[x] = d.at(x, y, z) ? '1' : '0';
      out << line << '\n';
    }
  }
}

Design read_pbd(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw FormatError("empty PBD stream");
  std::istringstream hs(header);
  std::string magic;
  int nx = 0, ny = 0, nz = 0;
  if (!(hs >> magic >> nx >> ny >> nz) || magic != "PBD") {
    throw FormatError("bad PBD header: '" + header + "'");
  }
  std::string trailing;
  if (hs >> trailing) throw FormatError("bad PBD header: '" + header + "'");
  if (nx < 1 || ny < 1 || nz < 1) throw FormatError("bad PBD dimensions");
  GridShape shape(nx, ny, nz);
  Design d(shape);
  std::string line;
  for (int z = 0; z < nz; ++z) {
    for (int y = 0; y < ny; ++y) {
      if (!std::getline(in, line)) {
        throw FormatError("PBD truncated at z=" + std::to_string(z) +
                          " y=" + std::to_string(y));
      }
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.size() != static_cast<std::size_t>(nx)) {
        throw FormatError("PBD line has " + std::to_string(line.size()) +
                          " characters, expected " + std::to_string(nx));
      }
      for (int x = 0; x < nx; ++x) {
        const char c = line[x];
        if (c != '0' && c != '1') {
          throw FormatError(std::string("bad PBD character '") + c + "'");
        }
        d.set(x, y, z, static_cast<std::uint8_t>(c - '0'));
      }
    }
  }
  return d;
}

void save_pbd(const std::string& path, const Design& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_pbd(out, d);
  if (!out) throw IoError("failed writing '" + path + "'");
}

Design load_pbd(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_pbd(in);
}

}  // namespace bintopo
