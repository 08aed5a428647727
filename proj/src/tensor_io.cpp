#include "orbitdet/tensor_io.hpp"

#include <cstring>
#include <fstream>

#include "orbitdet/errors.hpp"

namespace orbitdet {

namespace {

constexpr char kMagic[4] = {'T', 'N', 'S', 'R'};

void put_u32_le(std::ostream& os, uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

uint32_t get_u32_le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f32_le(std::ostream& os, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32_le(os, bits);
}

float get_f32_le(std::istream& is) {
    const uint32_t bits = get_u32_le(is);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    return os;
}

struct Header {
    uint8_t dtype = 0;
    Shape shape;
};

Header read_header(std::istream& is, const std::string& path) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("'" + path + "' is not a TNSR file");
    Header h;
    h.dtype = static_cast<uint8_t>(is.get());
    const int ndim = is.get();
    if (ndim < 0 || ndim > 8) throw IoError("'" + path + "' has bad ndim");
    for (int i = 0; i < ndim; ++i) h.shape.dims.push_back(static_cast<int>(get_u32_le(is)));
    if (!is) throw IoError("'" + path + "' is truncated");
    return h;
}

void write_header(std::ostream& os, uint8_t dtype, const Shape& shape) {
    os.write(kMagic, 4);
    os.put(static_cast<char>(dtype));
    os.put(static_cast<char>(shape.rank()));
    for (int d : shape.dims) put_u32_le(os, static_cast<uint32_t>(d));
}

}  // namespace

void save_tensor(const std::string& path, const TensorF32& t) {
    auto os = open_out(path);
    write_header(os, 0, t.shape);
    for (float v : t.data) put_f32_le(os, v);
    if (!os) throw IoError("write failed for '" + path + "'");
}

void save_tensor(const std::string& path, const TensorI8& t) {
    auto os = open_out(path);
    write_header(os, 1, t.shape);
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size()));
    os.put(static_cast<char>(static_cast<int8_t>(t.params.fraction_bits)));
    if (!os) throw IoError("write failed for '" + path + "'");
}

TensorF32 load_tensor_f32(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    const Header h = read_header(is, path);
    if (h.dtype != 0) throw IoError("'" + path + "' holds dtype " + std::to_string(h.dtype) + ", expected f32");
    std::vector<float> data(static_cast<size_t>(h.shape.elems()));
    for (auto& v : data) v = get_f32_le(is);
    if (!is) throw IoError("'" + path + "' is truncated");
    return TensorF32(h.shape, std::move(data));
}

TensorI8 load_tensor_i8(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    const Header h = read_header(is, path);
    if (h.dtype != 1) throw IoError("'" + path + "' holds dtype " + std::to_string(h.dtype) + ", expected i8");
    std::vector<int8_t> data(static_cast<size_t>(h.shape.elems()));
    is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    const int fb = is.get();
    if (!is) throw IoError("'" + path + "' is truncated");
    return TensorI8(h.shape, std::move(data), QuantParams{static_cast<int8_t>(fb)});
}

}  // namespace orbitdet
