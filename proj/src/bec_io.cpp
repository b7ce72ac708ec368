#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "chisd/bec.hpp"
#include "chisd/util.hpp"

namespace chisd::bec {

  namespace {

    constexpr char kMagic[8] = {'C', 'H', 'I', 'S', 'D', 'W', 'F', '1'};
    constexpr std::uint32_t kTag = 0x01020304u;

    template <typename T>
    void put(std::string& buf, T v) {
      char bytes[sizeof(T)];
      std::memcpy(bytes, &v, sizeof(T));
      buf.append(bytes, sizeof(T));
    }

    template <typename T>
    T get(const std::string& buf, std::size_t& pos, bool swap, const std::filesystem::path& path) {
      if (pos + sizeof(T) > buf.size()) {
        throw IoError("'" + path.string() + "': truncated field file");
      }
      char bytes[sizeof(T)];
      std::memcpy(bytes, buf.data() + pos, sizeof(T));
      pos += sizeof(T);
      if (swap) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
          std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        }
      }
      T v;
      std::memcpy(&v, bytes, sizeof(T));
      return v;
    }

    std::string slurp(const std::filesystem::path& path) {
      std::ifstream in(path, std::ios::binary);
      if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
      }
      return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

  }  // namespace

  void export_density(const Grid2D& grid, const Vector& phi, const std::filesystem::path& path) {
    if (static_cast<std::size_t>(phi.size()) != grid.dim()) {
      throw DimensionError("export_density: field length does not match the grid");
    }
    const std::size_t n = grid.nodes;
    const double top = max_density(grid, phi);
    std::string img = "P5\n" + std::to_string(n) + " " + std::to_string(n) + "\n65535\n";
    img.reserve(img.size() + 2 * n * n);
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t iy = n - 1 - r;
      for (std::size_t ix = 0; ix < n; ++ix) {
        const double rho = std::norm(value(phi, grid.pair(ix, iy)));
        const auto q = static_cast<std::uint16_t>(top > 0.0 ? std::lround(rho / top * 65535.0) : 0);
        img.push_back(static_cast<char>(q >> 8));
        img.push_back(static_cast<char>(q & 0xff));
      }
    }
    write_file_atomic(path, img);

    std::ostringstream meta;
    meta.precision(17);
    meta << "max_density " << top << "\n"
         << "half_width " << grid.half_width << "\n"
         << "nodes " << n << "\n"
         << "spacing " << grid.h() << "\n"
         << "rows top_to_bottom_y\n";
    write_file_atomic(path.string() + ".txt", meta.str());
  }

  std::vector<std::uint16_t> read_pgm16(const std::filesystem::path& path, std::size_t* width, std::size_t* height) {
    const std::string buf = slurp(path);
    std::istringstream in(buf);
    std::string magic;
    std::size_t w = 0;
    std::size_t h = 0;
    unsigned maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (!in || magic != "P5" || maxval != 65535) {
      throw IoError("'" + path.string() + "': not a 16-bit binary PGM");
    }
    const auto start = static_cast<std::size_t>(in.tellg()) + 1;
    if (buf.size() < start + 2 * w * h) {
      throw IoError("'" + path.string() + "': truncated PGM");
    }
    std::vector<std::uint16_t> px(w * h);
    for (std::size_t i = 0; i < w * h; ++i) {
      const auto hi = static_cast<unsigned char>(buf[start + 2 * i]);
      const auto lo = static_cast<unsigned char>(buf[start + 2 * i + 1]);
      px[i] = static_cast<std::uint16_t>((hi << 8) | lo);
    }
    if (width) *width = w;
    if (height) *height = h;
    return px;
  }

  void write_field(const Grid2D& grid, const Vector& phi, const std::filesystem::path& path) {
    if (static_cast<std::size_t>(phi.size()) != grid.dim()) {
      throw DimensionError("write_field: field length does not match the grid");
    }
    std::string buf(kMagic, sizeof kMagic);
    put(buf, kTag);
    put(buf, grid.half_width);
    put(buf, static_cast<std::uint64_t>(grid.nodes));
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
      put(buf, phi[i]);
    }
    write_file_atomic(path, buf);
  }

  FieldFile read_field(const std::filesystem::path& path) {
    const std::string buf = slurp(path);
    if (buf.size() < sizeof kMagic + 4 || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0) {
      throw IoError("'" + path.string() + "': not a field file");
    }
    std::size_t pos = sizeof kMagic;
    const auto tag = get<std::uint32_t>(buf, pos, false, path);
    bool swap = false;
    if (tag != kTag) {
      if (tag != __builtin_bswap32(kTag)) {
        throw IoError("'" + path.string() + "': unknown endianness tag");
      }
      swap = true;
    }
    const auto m = get<double>(buf, pos, swap, path);
    const auto n = get<std::uint64_t>(buf, pos, swap, path);
    if (n < 2 || n > (1u << 16)) {
      throw IoError("'" + path.string() + "': implausible node count " + std::to_string(n));
    }
    FieldFile out{Grid2D(m, static_cast<std::size_t>(n)), Vector()};
    out.phi.resize(static_cast<Eigen::Index>(out.grid.dim()));
    for (Eigen::Index i = 0; i < out.phi.size(); ++i) {
      out.phi[i] = get<double>(buf, pos, swap, path);
    }
    if (pos != buf.size()) {
      throw IoError("'" + path.string() + "': trailing bytes after the payload");
    }
    return out;
  }

}  // namespace chisd::bec
