#pragma once

#include <string>

#include "ra/image.hpp"

namespace ra {

// PNG (8-bit RGB or gray) or binary PPM (P6, maxval 255), detected by magic
// bytes. Grayscale is replicated to 3 channels; 16-bit depth and alpha are
// rejected.
ImageBuffer load_image(const std::string& path);

// Format chosen by extension: ".png" writes PNG, anything else binary P6 PPM.
// Round-trips bit-exactly with load_image.
void save_image(const ImageBuffer& img, const std::string& path);

// In-memory P6 codec; the PPM byte layout is the project's golden format.
std::string encode_ppm(const ImageBuffer& img);
ImageBuffer decode_ppm(const std::string& bytes);

}  // namespace ra
