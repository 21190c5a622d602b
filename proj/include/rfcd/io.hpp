#pragma once

#include "rfcd/detection.hpp"
#include "rfcd/image.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace rfcd {

// Image files are a JSON sidecar (<stem>.json) plus a little-endian float32 payload
// (<stem>.bin), band-sequential with pixels row-major inside each band.
struct ImageFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingSidecarError : ImageFileError {
  using ImageFileError::ImageFileError;
};
struct MissingPayloadError : ImageFileError {
  using ImageFileError::ImageFileError;
};
struct LengthMismatchError : ImageFileError {
  using ImageFileError::ImageFileError;
};
struct UnknownDtypeError : ImageFileError {
  using ImageFileError::ImageFileError;
};
struct HeaderValidationError : ImageFileError {
  using ImageFileError::ImageFileError;
};

struct ImagePaths {
  std::filesystem::path header;
  std::filesystem::path payload;
};

// Accepts the .json header, the .bin payload, or the bare stem.
ImagePaths image_paths(const std::filesystem::path& path);

// Values are stored as float32; images whose values are float32-representable
// round-trip bit-exactly.
void write_image(const MultiBandImage& image, const std::filesystem::path& path);
MultiBandImage read_image(const std::filesystem::path& path);

enum class RasterFormat { Pgm, Png };
RasterFormat parse_raster_format(const std::string& name);

// Binary maps render as 0/255.
void export_map(const BinaryMap& map, int width, int height, const std::filesystem::path& path, RasterFormat format);
// Energy is min-max scaled to 0..255; a constant image renders as 0.
void export_energy(const Vector& energy, int width, int height, const std::filesystem::path& path,
                   RasterFormat format);

}  // namespace rfcd
