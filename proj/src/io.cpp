#include "rfcd/io.hpp"

#include <json.hpp>
#include <png.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <vector>

namespace rfcd {

using nlohmann::json;
namespace fs = std::filesystem;

ImagePaths image_paths(const fs::path& path) {
  fs::path stem = path;
  if (path.extension() == ".json" || path.extension() == ".bin") stem.replace_extension();
  return {fs::path(stem.string() + ".json"), fs::path(stem.string() + ".bin")};
}

void write_image(const MultiBandImage& image, const fs::path& path) {
  const ImagePaths p = image_paths(path);
  if (p.header.has_parent_path()) fs::create_directories(p.header.parent_path());
  json header = {{"width", image.width()},
                 {"height", image.height()},
                 {"bands", image.band_count()},
                 {"dtype", "f32"},
                 {"layout", "band-sequential"}};
  if (image.band_centers) header["band_centers"] = *image.band_centers;
  std::ofstream h(p.header, std::ios::binary);
  if (!h) throw ImageFileError("cannot write " + p.header.string());
  h << header.dump(2) << '\n';

  std::vector<unsigned char> bytes;
  bytes.reserve(static_cast<std::size_t>(4) * image.band_count() * image.pixel_count());
  for (int b = 0; b < image.band_count(); ++b) {
    for (int q = 0; q < image.pixel_count(); ++q) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(image.data()(b, q)));
      for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<unsigned char>((bits >> (8 * k)) & 0xFFu));
    }
  }
  std::ofstream d(p.payload, std::ios::binary);
  if (!d) throw ImageFileError("cannot write " + p.payload.string());
  d.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

MultiBandImage read_image(const fs::path& path) {
  const ImagePaths p = image_paths(path);
  std::ifstream h(p.header, std::ios::binary);
  if (!h) throw MissingSidecarError("missing image header " + p.header.string());
  json header;
  try {
    header = json::parse(h);
  } catch (const json::exception& e) {
    throw HeaderValidationError("unparseable image header " + p.header.string() + ": " + e.what());
  }
  const std::string dtype = header.value("dtype", "");
  if (dtype != "f32") throw UnknownDtypeError("unknown dtype '" + dtype + "' in " + p.header.string());
  if (header.value("layout", "") != "band-sequential") {
    throw HeaderValidationError("unsupported layout in " + p.header.string());
  }
  int width = 0, height = 0, bands = 0;
  try {
    width = header.at("width").get<int>();
    height = header.at("height").get<int>();
    bands = header.at("bands").get<int>();
  } catch (const json::exception& e) {
    throw HeaderValidationError("invalid header " + p.header.string() + ": " + e.what());
  }
  if (width < 1 || height < 1 || bands < 1) {
    throw HeaderValidationError("header " + p.header.string() + " has non-positive width, height or bands");
  }

  std::ifstream d(p.payload, std::ios::binary);
  if (!d) throw MissingPayloadError("missing image payload " + p.payload.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(d)), std::istreambuf_iterator<char>());
  const std::size_t expected = static_cast<std::size_t>(4) * width * height * bands;
  if (bytes.size() != expected) {
    throw LengthMismatchError("payload " + p.payload.string() + " has " + std::to_string(bytes.size()) +
                              " bytes, expected " + std::to_string(expected));
  }
  Matrix data(bands, static_cast<Eigen::Index>(width) * height);
  std::size_t k = 0;
  for (int b = 0; b < bands; ++b) {
    for (Eigen::Index q = 0; q < data.cols(); ++q, k += 4) {
      const std::uint32_t bits = std::uint32_t(bytes[k]) | (std::uint32_t(bytes[k + 1]) << 8) |
                                 (std::uint32_t(bytes[k + 2]) << 16) | (std::uint32_t(bytes[k + 3]) << 24);
      data(b, q) = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  if (!data.allFinite()) throw HeaderValidationError("payload " + p.payload.string() + " contains non-finite values");
  MultiBandImage image(width, height, std::move(data));
  if (header.contains("band_centers")) {
    auto centers = header["band_centers"].get<std::vector<double>>();
    if (static_cast<int>(centers.size()) != bands) {
      throw HeaderValidationError("band_centers length does not match bands in " + p.header.string());
    }
    image.band_centers = std::move(centers);
  }
  return image;
}

RasterFormat parse_raster_format(const std::string& name) {
  if (name == "pgm") return RasterFormat::Pgm;
  if (name == "png") return RasterFormat::Png;
  throw std::invalid_argument("unknown raster format '" + name + "' (expected pgm or png)");
}

namespace {

void write_gray(const std::vector<unsigned char>& pixels, int width, int height, const fs::path& path,
                RasterFormat format) {
  if (static_cast<std::size_t>(width) * height != pixels.size()) throw std::invalid_argument("raster size mismatch");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (format == RasterFormat::Pgm) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
    return;
  }
  FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("png encoding failed for " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < height; ++r) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(r) * width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void export_map(const BinaryMap& map, int width, int height, const fs::path& path, RasterFormat format) {
  std::vector<unsigned char> pixels(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) pixels[i] = map[i] ? 255 : 0;
  write_gray(pixels, width, height, path, format);
}

void export_energy(const Vector& energy, int width, int height, const fs::path& path, RasterFormat format) {
  std::vector<unsigned char> pixels(static_cast<std::size_t>(energy.size()), 0);
  if (energy.size() > 0) {
    const double lo = energy.minCoeff(), hi = energy.maxCoeff();
    if (hi > lo) {
      for (Eigen::Index i = 0; i < energy.size(); ++i) {
        pixels[static_cast<std::size_t>(i)] = static_cast<unsigned char>(std::lround(255.0 * (energy(i) - lo) / (hi - lo)));
      }
    }
  }
  write_gray(pixels, width, height, path, format);
}

}  // namespace rfcd
