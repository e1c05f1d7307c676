#include <png.h>

#include <csetjmp>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <memory>

// jpeglib.h expects size_t and FILE to be declared first.
#include <jpeglib.h>

#include "stainnorm/error.hpp"
#include "stainnorm/io.hpp"

namespace stainnorm {
namespace {

using FilePtr = std::unique_ptr<std::FILE, decltype(&std::fclose)>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  return FilePtr(std::fopen(path.c_str(), mode), &std::fclose);
}

enum class Format { Png, Jpeg, Unknown };

Format sniff(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), sizeof sig);
  if (in.gcount() >= 8 && png_sig_cmp(sig, 0, 8) == 0) return Format::Png;
  if (in.gcount() >= 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) return Format::Jpeg;
  return Format::Unknown;
}

RgbImage load_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw StainError(ErrorCode::DecodeError, path.string() + ": " + png.message);
  }
  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&png);
    throw StainError(ErrorCode::UnsupportedFormat, path.string() + ": 16-bit PNG");
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, data.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw StainError(ErrorCode::DecodeError, path.string() + ": " + msg);
  }
  return RgbImage(png.width, png.height, std::move(data));
}

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

RgbImage load_jpeg(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  if (!file) throw StainError(ErrorCode::FileNotFound, path.string());

  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  // Only trivially destructible state lives across the setjmp boundary.
  std::uint8_t* buffer = nullptr;
  JDIMENSION width = 0, height = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    std::free(buffer);
    throw StainError(ErrorCode::DecodeError, path.string() + ": " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = cinfo.output_width;
  height = cinfo.output_height;
  const std::size_t stride = static_cast<std::size_t>(width) * 3;
  buffer = static_cast<std::uint8_t*>(std::malloc(stride * height));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = buffer + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);

  std::vector<std::uint8_t> data(buffer, buffer + stride * height);
  std::free(buffer);
  return RgbImage(width, height, std::move(data));
}

}  // namespace

RgbImage load_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw StainError(ErrorCode::FileNotFound, path.string());
  }
  switch (sniff(path)) {
    case Format::Png: return load_png(path);
    case Format::Jpeg: return load_jpeg(path);
    case Format::Unknown: break;
  }
  throw StainError(ErrorCode::UnsupportedFormat, path.string() + ": not a PNG or JPEG file");
}

void save_image(const RgbImage& image, const std::filesystem::path& path) {
  if (image.empty()) throw StainError(ErrorCode::IoError, "refusing to write an empty image");
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.data().data(), 0, nullptr)) {
    throw StainError(ErrorCode::IoError, path.string() + ": " + png.message);
  }
}

}  // namespace stainnorm
