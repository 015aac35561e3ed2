#include "svs/io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

namespace svs {

namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) detail::fail(ErrorCode::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const fs::path& path, const std::string& header, const std::vector<unsigned char>& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) detail::fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
    if (!out) detail::fail(ErrorCode::Io, "write failed for " + path.string());
}

// Netpbm-style header tokenizer: whitespace separated, '#' starts a comment.
class HeaderReader {
public:
    explicit HeaderReader(const std::vector<unsigned char>& buf) : buf_(buf) {}

    std::string token() {
        skip_space_and_comments();
        std::string tok;
        while (pos_ < buf_.size() && !std::isspace(buf_[pos_])) tok.push_back(static_cast<char>(buf_[pos_++]));
        if (tok.empty()) detail::fail(ErrorCode::MalformedHeader, "unexpected end of header");
        return tok;
    }

    long integer(long lo, long hi, const char* what) {
        const std::string tok = token();
        for (char ch : tok)
            if (!std::isdigit(static_cast<unsigned char>(ch)))
                detail::fail(ErrorCode::MalformedHeader, std::string("bad ") + what + ": " + tok);
        if (tok.size() > 9) detail::fail(ErrorCode::MalformedHeader, std::string(what) + " too large");
        const long v = std::stol(tok);
        if (v < lo || v > hi) detail::fail(ErrorCode::MalformedHeader, std::string(what) + " out of range");
        return v;
    }

    // Exactly one whitespace byte separates the header from the payload.
    std::size_t payload_offset() {
        if (pos_ >= buf_.size() || !std::isspace(buf_[pos_]))
            detail::fail(ErrorCode::MalformedHeader, "missing whitespace after header");
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < buf_.size()) {
            if (std::isspace(buf_[pos_])) {
                ++pos_;
            } else if (buf_[pos_] == '#') {
                while (pos_ < buf_.size() && buf_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& buf_;
    std::size_t pos_ = 0;
};

std::string read_magic(const std::vector<unsigned char>& buf) {
    if (buf.size() < 2) detail::fail(ErrorCode::MalformedHeader, "file too short for a header");
    return {static_cast<char>(buf[0]), static_cast<char>(buf[1])};
}

struct FloatRaster {
    Index height = 0;
    Index width = 0;
    Plane<double> values;
};

FloatRaster read_pfm(const fs::path& path) {
    const auto buf = read_all(path);
    const std::string magic = read_magic(buf);
    if (magic == "PF") detail::fail(ErrorCode::UnsupportedFormat, "color PFM is not supported");
    if (magic != "Pf") detail::fail(ErrorCode::UnsupportedFormat, "not a grayscale PFM: " + path.string());

    HeaderReader hdr(buf);
    hdr.token();
    const long width = hdr.integer(1, 1L << 24, "width");
    const long height = hdr.integer(1, 1L << 24, "height");
    const std::string scale_tok = hdr.token();
    double scale = 0.0;
    try {
        std::size_t used = 0;
        scale = std::stod(scale_tok, &used);
        if (used != scale_tok.size()) throw std::invalid_argument(scale_tok);
    } catch (const std::exception&) {
        detail::fail(ErrorCode::MalformedHeader, "bad PFM scale: " + scale_tok);
    }
    if (scale == 0.0 || !std::isfinite(scale)) detail::fail(ErrorCode::MalformedHeader, "PFM scale must be non-zero");
    const bool little = scale < 0.0;
    const std::size_t offset = hdr.payload_offset();

    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (buf.size() - offset != count * 4)
        detail::fail(ErrorCode::TruncatedPayload, "PFM payload size mismatch in " + path.string());

    const bool swap = little != (std::endian::native == std::endian::little);
    FloatRaster r{height, width, Plane<double>(height, width)};
    const unsigned char* p = buf.data() + offset;
    for (long row = height - 1; row >= 0; --row) {
        for (long col = 0; col < width; ++col, p += 4) {
            std::uint32_t bits;
            std::memcpy(&bits, p, 4);
            if (swap) bits = __builtin_bswap32(bits);
            r.values(row, col) = static_cast<double>(std::bit_cast<float>(bits));
        }
    }
    return r;
}

template <typename Tag>
MaskedMap<double, Tag> to_masked(FloatRaster r) {
    Mask valid = r.values.isFinite() && (r.values >= 0.0);
    Plane<double> values = valid.select(r.values, 0.0);
    return MaskedMap<double, Tag>(std::move(values), std::move(valid));
}

void write_pfm(const Plane<double>& values, const Mask* valid, const fs::path& path) {
    const Index h = values.rows();
    const Index w = values.cols();
    std::vector<unsigned char> body(static_cast<std::size_t>(h * w) * 4);
    unsigned char* p = body.data();
    const bool swap = std::endian::native != std::endian::little;
    for (Index row = h - 1; row >= 0; --row) {
        for (Index col = 0; col < w; ++col, p += 4) {
            const bool ok = valid == nullptr || (*valid)(row, col);
            const float v = ok ? static_cast<float>(values(row, col)) : -1.0f;
            std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
            if (swap) bits = __builtin_bswap32(bits);
            std::memcpy(p, &bits, 4);
        }
    }
    write_all(path, "Pf\n" + std::to_string(w) + " " + std::to_string(h) + "\n-1\n", body);
}

}  // namespace

ImageGrid<double> load_image(const fs::path& path) {
    const auto buf = read_all(path);
    const std::string magic = read_magic(buf);
    Index channels = 0;
    if (magic == "P5") channels = 1;
    else if (magic == "P6") channels = 3;
    else detail::fail(ErrorCode::UnsupportedFormat, "expected P5 or P6 in " + path.string());

    HeaderReader hdr(buf);
    hdr.token();
    const long width = hdr.integer(1, 1L << 24, "width");
    const long height = hdr.integer(1, 1L << 24, "height");
    const long maxval = hdr.integer(1, 65535, "maxval");
    if (maxval != 255 && maxval != 65535)
        detail::fail(ErrorCode::UnsupportedFormat, "maxval must be 255 or 65535");
    const std::size_t offset = hdr.payload_offset();

    const std::size_t bytes_per_sample = maxval == 255 ? 1 : 2;
    const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                             static_cast<std::size_t>(channels) * bytes_per_sample;
    if (buf.size() - offset < need)
        detail::fail(ErrorCode::TruncatedPayload, "pixel data truncated in " + path.string());

    ImageGrid<double> img(height, width, channels);
    const double inv = 1.0 / static_cast<double>(maxval);
    const unsigned char* p = buf.data() + offset;
    for (Index i = 0; i < height; ++i)
        for (Index j = 0; j < width; ++j)
            for (Index c = 0; c < channels; ++c) {
                unsigned v = *p++;
                if (bytes_per_sample == 2) v = (v << 8) | *p++;
                img(i, j, c) = static_cast<double>(v) * inv;
            }
    return img;
}

void save_image(const ImageGrid<double>& grid, const fs::path& path) {
    detail::require(grid.is_valid(), ErrorCode::InvalidArgument, "image values must be finite and in [0, 1]");
    const Index h = grid.height(), w = grid.width(), ch = grid.channels();
    std::vector<unsigned char> body(static_cast<std::size_t>(h * w * ch));
    std::size_t k = 0;
    for (Index i = 0; i < h; ++i)
        for (Index j = 0; j < w; ++j)
            for (Index c = 0; c < ch; ++c)
                body[k++] = static_cast<unsigned char>(std::lround(grid(i, j, c) * 255.0));
    const std::string header =
        std::string(ch == 1 ? "P5" : "P6") + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    write_all(path, header, body);
}

DisparityMap<double> load_disparity(const fs::path& path) { return to_masked<DisparityTag>(read_pfm(path)); }

DepthMap<double> load_depth(const fs::path& path) { return to_masked<DepthTag>(read_pfm(path)); }

template <typename Tag>
void save_float_map(const MaskedMap<double, Tag>& map, const fs::path& path) {
    write_pfm(map.values, &map.valid, path);
}

template void save_float_map(const DisparityMap<double>&, const fs::path&);
template void save_float_map(const DepthMap<double>&, const fs::path&);

DisparityVolume<double> load_volume(const fs::path& path, Index num_levels) {
    detail::require(num_levels >= 1, ErrorCode::InvalidArgument, "num_levels must be positive");
    const FloatRaster r = read_pfm(path);
    if (r.height % num_levels != 0)
        detail::fail(ErrorCode::ShapeMismatch, "volume height is not a multiple of num_levels");
    if (!r.values.allFinite()) detail::fail(ErrorCode::NonFinite, "volume contains non-finite values");
    const Index h = r.height / num_levels;
    std::vector<Plane<double>> levels;
    levels.reserve(static_cast<std::size_t>(num_levels));
    for (Index d = 0; d < num_levels; ++d) levels.push_back(r.values.middleRows(d * h, h));
    DisparityVolume<double> vol(std::move(levels));
    // float32 storage costs about 1e-7 per level; renormalize before checking the simplex.
    Plane<double> total = Plane<double>::Zero(h, r.width);
    for (Index d = 0; d < num_levels; ++d) total += vol.level(d);
    detail::require(((total - 1.0).abs() <= 1e-4).all(), ErrorCode::InvalidArgument,
                    "volume is not a per-pixel distribution");
    for (Index d = 0; d < num_levels; ++d) vol.level(d) /= total;
    detail::require(vol.is_valid(), ErrorCode::InvalidArgument, "volume is not a per-pixel distribution");
    return vol;
}

void save_volume(const DisparityVolume<double>& volume, const fs::path& path) {
    const Index h = volume.height();
    Plane<double> stacked(h * volume.num_levels(), volume.width());
    for (Index d = 0; d < volume.num_levels(); ++d) stacked.middleRows(d * h, h) = volume.level(d);
    write_pfm(stacked, nullptr, path);
}

}  // namespace svs
