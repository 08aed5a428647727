#include "orbitdet/ppm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "orbitdet/errors.hpp"

namespace orbitdet {

namespace {

// Next whitespace-delimited token, skipping '#' comment lines.
int next_int(std::istream& is, const std::string& path) {
    int c = is.get();
    while (is && (std::isspace(c) || c == '#')) {
        if (c == '#')
            while (is && c != '\n') c = is.get();
        c = is.get();
    }
    if (!is || !std::isdigit(c)) throw IoError("'" + path + "': malformed PPM header");
    int v = 0;
    while (is && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        c = is.get();
    }
    is.unget();
    return v;
}

}  // namespace

TensorF32 load_ppm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");
    char m0 = 0, m1 = 0;
    is.get(m0);
    is.get(m1);
    if (m0 != 'P' || m1 != '6') throw IoError("'" + path + "' is not a P6 PPM");
    const int w = next_int(is, path);
    const int h = next_int(is, path);
    const int maxval = next_int(is, path);
    if (w < 1 || h < 1) throw IoError("'" + path + "': bad dimensions");
    if (maxval != 255) throw IoError("'" + path + "': only maxval 255 supported");
    is.get();  // single whitespace after maxval

    std::vector<unsigned char> raw(static_cast<size_t>(w) * h * 3);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!is) throw IoError("'" + path + "' is truncated");

    TensorF32 img(Shape{h, w, 3});
    for (size_t i = 0; i < raw.size(); ++i) img.data[i] = static_cast<float>(raw[i]) / 255.0f;
    return img;
}

void save_ppm(const std::string& path, const TensorF32& image) {
    if (image.shape.rank() != 3 || image.dim(2) != 3)
        throw ShapeError("PPM image must be HxWx3, got " + image.shape.str());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << "P6\n" << image.dim(1) << " " << image.dim(0) << "\n255\n";
    for (float v : image.data) {
        const float c = std::clamp(v, 0.0f, 1.0f);
        os.put(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0f))));
    }
    if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace orbitdet
