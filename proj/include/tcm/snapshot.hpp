#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tcm/field.hpp"

namespace tcm {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// TCMF v1 block: header line "TCMF v1 n=<N> kind=<real|vector>\n" followed by
// row-major float64 little-endian payload (x then y for vectors).

namespace detail {

inline void write_payload(std::ostream& os, const RealField& f) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  } else {
    for (double x : f.values) {
      auto bits = std::bit_cast<std::uint64_t>(x);
      char bytes[8];
      for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
      os.write(bytes, 8);
    }
  }
}

inline void read_payload(std::istream& is, RealField& f) {
  if constexpr (std::endian::native == std::endian::little) {
    is.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  } else {
    for (double& x : f.values) {
      unsigned char bytes[8];
      is.read(reinterpret_cast<char*>(bytes), 8);
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
      x = std::bit_cast<double>(bits);
    }
  }
  if (!is) throw FormatError("TCMF payload truncated");
}

struct BlockHeader {
  int n = 0;
  std::string kind;
};

inline BlockHeader read_header(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("missing TCMF header");
  std::istringstream ss(line);
  std::string magic, version, n_tok, kind_tok;
  ss >> magic >> version >> n_tok >> kind_tok;
  if (magic != "TCMF" || version != "v1" || n_tok.rfind("n=", 0) != 0 || kind_tok.rfind("kind=", 0) != 0) {
    throw FormatError("bad TCMF header: " + line);
  }
  BlockHeader h;
  try {
    h.n = std::stoi(n_tok.substr(2));
  } catch (const std::exception&) {
    throw FormatError("bad grid size in TCMF header: " + line);
  }
  h.kind = kind_tok.substr(5);
  if (h.kind != "real" && h.kind != "vector") throw FormatError("unknown TCMF kind: " + h.kind);
  return h;
}

}  // namespace detail

inline void write_tcmf(std::ostream& os, const RealField& f) {
  os << "TCMF v1 n=" << f.grid.n << " kind=real\n";
  detail::write_payload(os, f);
}

inline void write_tcmf(std::ostream& os, const VectorField& v) {
  os << "TCMF v1 n=" << v.grid().n << " kind=vector\n";
  detail::write_payload(os, v.x);
  detail::write_payload(os, v.y);
}

inline RealField read_tcmf_real(std::istream& is) {
  const auto h = detail::read_header(is);
  if (h.kind != "real") throw FormatError("expected kind=real, got " + h.kind);
  RealField f(GridSpec::make(h.n));
  detail::read_payload(is, f);
  return f;
}

inline VectorField read_tcmf_vector(std::istream& is) {
  const auto h = detail::read_header(is);
  if (h.kind != "vector") throw FormatError("expected kind=vector, got " + h.kind);
  const GridSpec g = GridSpec::make(h.n);
  VectorField v(g);
  detail::read_payload(is, v.x);
  detail::read_payload(is, v.y);
  return v;
}

}  // namespace tcm
