#include "qrefine/codec.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

#include "qrefine/error.hpp"

namespace qrefine {
namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};

bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

void check_min_side(int height, int width, const DecodeOptions& options) {
  if (height < options.min_side || width < options.min_side) {
    throw Error(ErrorKind::kSize, "decoded image " + std::to_string(height) + "x" +
                                      std::to_string(width) + " is below the " +
                                      std::to_string(options.min_side) + "px minimum");
  }
}

ImageBuffer from_rgb8(int height, int width, const std::vector<std::uint8_t>& rgb) {
  std::vector<float> samples(rgb.size());
  std::transform(rgb.begin(), rgb.end(), samples.begin(),
                 [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
  return ImageBuffer(height, width, std::move(samples));
}

// ---- PNG -----------------------------------------------------------------

struct PngReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes.size()) png_error(png, "truncated stream");
  std::memcpy(out, cursor->bytes.data() + cursor->offset, length);
  cursor->offset += length;
}

void png_error_to_longjmp(png_structp png, png_const_charp message) {
  auto* buffer = static_cast<std::string*>(png_get_error_ptr(png));
  if (buffer != nullptr) *buffer = message;
  png_longjmp(png, 1);
}

void png_ignore_warning(png_structp, png_const_charp) {}

// Everything touched between setjmp and a libpng/libjpeg longjmp lives on
// the heap behind a pointer that is never reassigned.
struct PngDecodeState {
  PngReadCursor cursor;
  std::string message;
  std::vector<std::uint8_t> rgb;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  bool bad_layout = false;
};

ImageBuffer decode_png(std::span<const std::uint8_t> bytes, const DecodeOptions& options) {
  const auto state = std::make_unique<PngDecodeState>();
  state->cursor = PngReadCursor{bytes, 0};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state->message,
                                           png_error_to_longjmp, png_ignore_warning);
  if (png == nullptr) throw Error(ErrorKind::kDecode, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorKind::kDecode, "libpng init failed");
  }

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::kDecode, "png: " + state->message);
  }

  png_set_read_fn(png, &state->cursor, png_read_from_span);
  png_read_info(png, info);
  state->width = png_get_image_width(png, info);
  state->height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  // tRNS chunks are ignored rather than expanded; alpha is dropped either way.
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(state->width) * 3) {
    state->bad_layout = true;
  } else {
    state->rgb.resize(static_cast<std::size_t>(state->width) * state->height * 3);
    state->rows.resize(state->height);
    for (png_uint_32 y = 0; y < state->height; ++y) {
      state->rows[y] = state->rgb.data() + static_cast<std::size_t>(y) * state->width * 3;
    }
    png_read_image(png, state->rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (state->bad_layout) throw Error(ErrorKind::kDecode, "png: unsupported pixel layout");

  const int height = static_cast<int>(state->height);
  const int width = static_cast<int>(state->width);
  check_min_side(height, width, options);
  return from_rgb8(height, width, state->rgb);
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

struct PngEncodeState {
  Bytes out;
  std::string message;
  std::vector<png_bytep> rows;
};

Bytes write_png(int height, int width, int channels, std::vector<std::uint8_t>& pixels) {
  const auto state = std::make_unique<PngEncodeState>();
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state->message,
                                            png_error_to_longjmp, png_ignore_warning);
  if (png == nullptr) throw Error(ErrorKind::kIo, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorKind::kIo, "libpng init failed");
  }
  const std::size_t stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  state->rows.resize(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) state->rows[static_cast<std::size_t>(y)] = pixels.data() + y * stride;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::kIo, "png encode: " + state->message);
  }
  png_set_write_fn(png, &state->out, png_write_to_vector, png_flush_noop);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, state->rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return std::move(state->out);
}

// ---- JPEG ----------------------------------------------------------------

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silence(j_common_ptr, int) {}

struct JpegDecodeState {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  std::vector<std::uint8_t> rgb;
  int width = 0;
  int height = 0;
};

ImageBuffer decode_jpeg(std::span<const std::uint8_t> bytes, const DecodeOptions& options) {
  const auto state = std::make_unique<JpegDecodeState>();
  jpeg_decompress_struct& cinfo = state->cinfo;
  cinfo.err = jpeg_std_error(&state->err.base);
  state->err.base.error_exit = jpeg_error_exit;
  state->err.base.emit_message = jpeg_silence;

  if (setjmp(state->err.jump)) {
    jpeg_destroy_decompress(&state->cinfo);
    throw Error(ErrorKind::kDecode, std::string("jpeg: ") + state->err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  state->width = static_cast<int>(cinfo.output_width);
  state->height = static_cast<int>(cinfo.output_height);
  state->rgb.resize(static_cast<std::size_t>(state->width) * state->height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = state->rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * state->width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);

  check_min_side(state->height, state->width, options);
  return from_rgb8(state->height, state->width, state->rgb);
}

}  // namespace

std::uint8_t quantize(float v) noexcept {
  const double scaled = std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0;
  return static_cast<std::uint8_t>(std::lround(scaled));
}

ImageBuffer decode_image(std::span<const std::uint8_t> bytes, DecodeOptions options) {
  if (is_png(bytes)) return decode_png(bytes, options);
  if (is_jpeg(bytes)) return decode_jpeg(bytes, options);
  throw Error(ErrorKind::kDecode, "unrecognized image signature");
}

Bytes encode_png(const ImageBuffer& img) {
  std::vector<std::uint8_t> pixels(img.samples().size());
  std::transform(img.samples().begin(), img.samples().end(), pixels.begin(), quantize);
  return write_png(img.height(), img.width(), 3, pixels);
}

Bytes encode_gray_png(const PixelMap& field) {
  std::vector<std::uint8_t> pixels(field.size());
  std::transform(field.values().begin(), field.values().end(), pixels.begin(), quantize);
  return write_png(field.height(), field.width(), 1, pixels);
}

PixelMap decode_gray(std::span<const std::uint8_t> bytes, DecodeOptions options) {
  const ImageBuffer img = decode_image(bytes, options);
  PixelMap out(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) out.at(y, x) = img.at(y, x, 0);
  }
  return out;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

}  // namespace qrefine
