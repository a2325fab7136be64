// Writes a small deterministic PNG for (media file, timestamp). Stands in for
// a real frame grabber in tests and demos:
//   slvideo-synth-frame --media {media} --timestamp {timestamp_ms} --out {out}

#include <png.h>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace {

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool write_png(const std::string& path, int width, int height, const std::vector<std::uint8_t>& rgb) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) return false;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(y) * width * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return std::fclose(fp) == 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic frame generator"};
  std::string media;
  long long timestamp = 0;
  std::string out;
  int size = 16;
  app.add_option("--media", media)->required();
  app.add_option("--timestamp", timestamp)->required();
  app.add_option("--out", out)->required();
  app.add_option("--size", size)->check(CLI::Range(1, 1024));
  CLI11_PARSE(app, argc, argv);

  std::ifstream in(media, std::ios::binary);
  if (!in) {
    std::cerr << "cannot read media " << media << '\n';
    return 1;
  }
  std::ostringstream buf;
  buf << in.rdbuf();

  std::uint64_t state = fnv1a(std::to_string(timestamp), fnv1a(buf.str()));
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(size) * size * 3);
  for (auto& px : rgb) {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    px = static_cast<std::uint8_t>(state >> 56);
  }
  if (!write_png(out, size, size, rgb)) {
    std::cerr << "cannot write " << out << '\n';
    return 1;
  }
  return 0;
}
