#include "ra/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ra {

namespace {

// Skips PPM whitespace and '#' comments, then reads one unsigned integer.
int read_ppm_int(std::istream& in) {
  int c = in.peek();
  while (c != EOF) {
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
    c = in.peek();
  }
  int v;
  if (!(in >> v)) throw FormatError("ppm: expected integer in header");
  return v;
}

ImageBuffer decode_ppm_stream(std::istream& in) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '6') throw FormatError("ppm: not a P6 file");
  int w = read_ppm_int(in);
  int h = read_ppm_int(in);
  int maxval = read_ppm_int(in);
  if (w < 1 || h < 1) throw FormatError("ppm: bad dimensions");
  if (maxval != 255) throw FormatError("ppm: maxval must be 255 (8-bit only)");
  in.get();  // single whitespace byte after maxval
  ImageBuffer img(w, h);
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.size()));
  if (static_cast<size_t>(in.gcount()) != img.size())
    throw FormatError("ppm: truncated pixel payload");
  return img;
}

struct PngReadCtx {
  const uint8_t* data;
  size_t size;
  size_t pos;
};

void png_mem_read(png_structp png, png_bytep out, png_size_t n) {
  auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
  if (ctx->pos + n > ctx->size) png_error(png, "read past end");
  std::memcpy(out, ctx->data + ctx->pos, n);
  ctx->pos += n;
}

ImageBuffer decode_png(const std::string& bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw FormatError("png: init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("png: init failed");
  }
  std::vector<std::vector<uint8_t>> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("png: corrupt or unsupported file");
  }
  PngReadCtx ctx{reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size(), 0};
  png_set_read_fn(png, &ctx, png_mem_read);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int depth = png_get_bit_depth(png, info);
  int color = png_get_color_type(png, info);
  if (depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("png: 16-bit samples not supported");
  }
  if (color & PNG_COLOR_MASK_ALPHA) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("png: alpha channels not supported");
  }
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color == PNG_COLOR_TYPE_GRAY) png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  ImageBuffer img(static_cast<int>(w), static_cast<int>(h));
  if (png_get_rowbytes(png, info) != static_cast<size_t>(w) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("png: unexpected row layout");
  }
  std::vector<png_bytep> row_ptrs(h);
  for (png_uint_32 y = 0; y < h; ++y)
    row_ptrs[y] = img.data.data() + static_cast<size_t>(y) * w * 3;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void encode_png(const ImageBuffer& img, const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("save_image: cannot open " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw IoError("save_image: png write failed for " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(img.data.data() +
                                             static_cast<size_t>(y) * img.width * 3));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace

std::string encode_ppm(const ImageBuffer& img) {
  std::ostringstream out;
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.size()));
  return out.str();
}

ImageBuffer decode_ppm(const std::string& bytes) {
  std::istringstream in(bytes);
  return decode_ppm_stream(in);
}

ImageBuffer load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_image: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes);
  static const unsigned char png_magic[4] = {0x89, 'P', 'N', 'G'};
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), png_magic, 4) == 0)
    return decode_png(bytes);
  throw FormatError("load_image: " + path + " is neither P6 PPM nor PNG");
}

void save_image(const ImageBuffer& img, const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".png") {
    encode_png(img, path);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_image: cannot open " + path);
  std::string bytes = encode_ppm(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("save_image: write failed for " + path);
}

}  // namespace ra
