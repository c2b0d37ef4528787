#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "phi4/core.hpp"

namespace phi4 {

// Layout: "PHI4SNAP" | u32 version | u32 ndims | u64 dims[ndims] | char[8] dtype | u8 little_endian | data
static_assert(std::endian::native == std::endian::little, "snapshot writer assumes a little-endian host");

void write_snapshot(const std::string& path, const std::vector<std::uint64_t>& dims, const std::vector<double>& data) {
    std::uint64_t count = 1;
    for (auto d : dims) count *= d;
    if (count != data.size()) throw ConfigError("snapshot dims do not match data length");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path);
    const char magic[8] = {'P', 'H', 'I', '4', 'S', 'N', 'A', 'P'};
    const std::uint32_t version = 1, nd = static_cast<std::uint32_t>(dims.size());
    const char dtype[8] = {'f', 'l', 'o', 'a', 't', '6', '4', 0};
    const std::uint8_t le = 1;
    out.write(magic, 8);
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&nd), 4);
    out.write(reinterpret_cast<const char*>(dims.data()), 8 * dims.size());
    out.write(dtype, 8);
    out.write(reinterpret_cast<const char*>(&le), 1);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(8 * data.size()));
}

std::vector<double> read_snapshot(const std::string& path, std::vector<std::uint64_t>& dims) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, "PHI4SNAP", 8) != 0) throw ConfigError(path + ": not a snapshot file");
    std::uint32_t version = 0, nd = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&nd), 4);
    if (version != 1 || nd > 8) throw ConfigError(path + ": unsupported snapshot header");
    dims.assign(nd, 0);
    in.read(reinterpret_cast<char*>(dims.data()), 8 * nd);
    char dtype[8];
    std::uint8_t le = 0;
    in.read(dtype, 8);
    in.read(reinterpret_cast<char*>(&le), 1);
    if (std::strncmp(dtype, "float64", 8) != 0 || le != 1) throw ConfigError(path + ": expected little-endian float64");
    std::uint64_t count = 1;
    for (auto d : dims) count *= d;
    std::vector<double> data(count);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(8 * count));
    if (!in) throw ConfigError(path + ": truncated snapshot");
    return data;
}

void write_state_csv(const std::string& path, const LatticeSpec& lat, const FieldState& s) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path);
    out << std::setprecision(17);
    const char* axes[3] = {"x", "y", "z"};
    for (int a = 0; a < lat.dim; ++a) out << axes[a] << ",";
    out << "phi,pi\n";
    for (std::size_t i = 0; i < lat.points(); ++i) {
        auto q = lat.unflatten(i);
        for (int a = 0; a < lat.dim; ++a) out << lat.coord(q[a]) << ",";
        out << s.phi[i] << "," << s.pi[i] << "\n";
    }
}

}  // namespace phi4
