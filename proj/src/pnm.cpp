#include "patchopt/pnm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace patchopt {

namespace {

struct Reader {
    std::string data;
    std::size_t pos = 0;

    explicit Reader(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw InputError("cannot open " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        data = ss.str();
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw FormatError(msg, static_cast<long>(pos));
    }

    void skip_space_and_comments() {
        while (pos < data.size()) {
            char c = data[pos];
            if (c == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
    }

    long read_int() {
        skip_space_and_comments();
        if (pos >= data.size() || !std::isdigit(static_cast<unsigned char>(data[pos])))
            fail("expected integer");
        long v = 0;
        while (pos < data.size() &&
               std::isdigit(static_cast<unsigned char>(data[pos]))) {
            v = v * 10 + (data[pos] - '0');
            if (v > 1000000000L) fail("integer too large");
            ++pos;
        }
        return v;
    }
};

}  // namespace

GridImage read_pnm(const std::string& path) {
    Reader r(path);
    if (r.data.size() < 2 || r.data[0] != 'P') r.fail("missing PNM magic");
    char kind = r.data[1];
    if (kind != '1' && kind != '2' && kind != '4' && kind != '5')
        r.fail("unsupported PNM type");
    r.pos = 2;

    GridImage img;
    img.width = static_cast<int>(r.read_int());
    img.height = static_cast<int>(r.read_int());
    if (img.width <= 0 || img.height <= 0) r.fail("bad dimensions");
    long maxval = 1;
    if (kind == '2' || kind == '5') {
        maxval = r.read_int();
        if (maxval <= 0 || maxval > 65535) r.fail("bad maxval");
    }
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    img.samples.resize(n);

    if (kind == '1') {
        for (std::size_t i = 0; i < n; ++i) {
            r.skip_space_and_comments();
            if (r.pos >= r.data.size()) r.fail("truncated P1 payload");
            char c = r.data[r.pos++];
            if (c != '0' && c != '1') r.fail("bad P1 digit");
            img.samples[i] = c == '1' ? 1.0 : 0.0;
        }
    } else if (kind == '2') {
        for (std::size_t i = 0; i < n; ++i) {
            long v = r.read_int();
            if (v > maxval) r.fail("sample exceeds maxval");
            img.samples[i] = static_cast<double>(v) / maxval;
        }
    } else {
        // single whitespace byte separates header from binary payload
        if (r.pos >= r.data.size() ||
            !std::isspace(static_cast<unsigned char>(r.data[r.pos])))
            r.fail("missing payload separator");
        ++r.pos;
        if (kind == '4') {
            const std::size_t row_bytes = (img.width + 7) / 8;
            if (r.data.size() - r.pos < row_bytes * img.height)
                r.fail("truncated P4 payload");
            for (int row = 0; row < img.height; ++row) {
                const unsigned char* bytes = reinterpret_cast<const unsigned char*>(
                    r.data.data() + r.pos + static_cast<std::size_t>(row) * row_bytes);
                for (int c = 0; c < img.width; ++c)
                    img.samples[row * img.width + c] =
                        (bytes[c / 8] >> (7 - c % 8)) & 1 ? 1.0 : 0.0;
            }
            r.pos += row_bytes * img.height;
        } else {
            const int bytes_per = maxval > 255 ? 2 : 1;
            if (r.data.size() - r.pos < n * bytes_per) r.fail("truncated P5 payload");
            for (std::size_t i = 0; i < n; ++i) {
                unsigned long v;
                if (bytes_per == 1) {
                    v = static_cast<unsigned char>(r.data[r.pos + i]);
                } else {
                    v = (static_cast<unsigned char>(r.data[r.pos + 2 * i]) << 8) |
                        static_cast<unsigned char>(r.data[r.pos + 2 * i + 1]);
                }
                if (v > static_cast<unsigned long>(maxval)) {
                    r.pos += bytes_per * i;
                    r.fail("sample exceeds maxval");
                }
                img.samples[i] = static_cast<double>(v) / maxval;
            }
        }
    }
    return img;
}

void write_pgm(const GridImage& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << "P5\n" << image.width << " " << image.height << "\n255\n";
    for (double s : image.samples) {
        double v = std::clamp(s, 0.0, 1.0) * 255.0;
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v))));
    }
}

void write_pbm(const GridImage& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << "P4\n" << image.width << " " << image.height << "\n";
    const int row_bytes = (image.width + 7) / 8;
    for (int r = 0; r < image.height; ++r) {
        std::vector<unsigned char> row(row_bytes, 0);
        for (int c = 0; c < image.width; ++c)
            if (image.at(r, c) >= 0.5) row[c / 8] |= 1 << (7 - c % 8);
        out.write(reinterpret_cast<const char*>(row.data()), row_bytes);
    }
}

}  // namespace patchopt
