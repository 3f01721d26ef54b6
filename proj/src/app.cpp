#include "ra/app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

namespace fs = std::filesystem;

namespace ra {

void SyntheticShapesParams::validate() const {
  if (count < 1) throw InvalidParams("shapes: count must be >= 1");
  if (image_size < 8) throw InvalidParams("shapes: image_size must be >= 8");
  if (classes < 2 || classes > 4) throw InvalidParams("shapes: classes must be in 2..4");
  if (!(noise_std >= 0.0)) throw InvalidParams("shapes: noise_std must be >= 0");
}

namespace {

// Gaussian draw via Box-Muller on the deterministic stream.
double gaussian(DeterministicRng& rng) {
  const double u1 = rng.uniform(1e-12, 1.0);
  const double u2 = rng.uniform(0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// White shape stencils of side s drawn at top-left (x0, y0). Classes have
// distinct total white mass so a linear model has a position-free cue.
void draw_shape(ImageBuffer& img, int cls, int x0, int y0, int s) {
  auto set = [&](int x, int y) {
    for (int c = 0; c < 3; ++c) img.at(x, y, c) = 255;
  };
  const double r = s / 2.0;
  for (int dy = 0; dy < s; ++dy)
    for (int dx = 0; dx < s; ++dx) {
      bool on = false;
      switch (cls) {
        case 0:  // filled square
          on = true;
          break;
        case 1: {  // filled disk
          const double cx = dx + 0.5 - r, cy = dy + 0.5 - r;
          on = cx * cx + cy * cy <= r * r;
          break;
        }
        case 2:  // cross
          on = std::abs(dx - s / 2) <= 1 || std::abs(dy - s / 2) <= 1;
          break;
        case 3:  // filled lower-left triangle
          on = dx <= dy;
          break;
      }
      if (on) set(x0 + dx, y0 + dy);
    }
}

// Per-class stencil side: the filled square is drawn smaller than the other
// shapes so its white mass sits clearly below the disk's.
int shape_side(int cls, int s) { return cls == 0 ? std::max(3, s - 2) : s; }

}  // namespace

Dataset gen_synthetic_shapes(const SyntheticShapesParams& p) {
  p.validate();
  Dataset d;
  d.num_classes = p.classes;
  DeterministicRng root(p.seed);
  const int s = std::max(5, p.image_size / 2 - 1);
  for (int i = 0; i < p.count; ++i) {
    const int cls = i % p.classes;  // balanced by construction
    DeterministicRng rng = root.split(static_cast<uint64_t>(i));
    ImageBuffer img(p.image_size, p.image_size, 128);
    // Positions keep a small border margin where the image is large enough,
    // so modest translations stay fully contained.
    const int side = shape_side(cls, s);
    const int raw_range = p.image_size - side + 1;
    const int margin = std::min(2, (raw_range - 1) / 2);
    const int range = raw_range - 2 * margin;
    const int x0 = margin + static_cast<int>(rng.choice(range));
    const int y0 = margin + static_cast<int>(rng.choice(range));
    draw_shape(img, cls, x0, y0, side);
    if (p.noise_std > 0.0) {
      for (auto& sample : img.data) {
        const double n = gaussian(rng) * p.noise_std * 255.0;
        sample = quantize(sample + n);
      }
    }
    d.images.push_back(std::move(img));
    d.labels.push_back(cls);
  }
  return d;
}

Dataset read_cifar10_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cifar10: cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  constexpr size_t kRecord = 3073;
  constexpr int kSide = 32;
  if (bytes.empty() || bytes.size() % kRecord != 0)
    throw FormatError("cifar10: file length " + std::to_string(bytes.size()) +
                      " is not a multiple of 3073");
  Dataset d;
  d.num_classes = 10;
  const size_t n = bytes.size() / kRecord;
  for (size_t r = 0; r < n; ++r) {
    const uint8_t* rec = reinterpret_cast<const uint8_t*>(bytes.data()) + r * kRecord;
    const int label = rec[0];
    if (label > 9) throw LabelOutOfRange("cifar10: label byte " + std::to_string(label));
    ImageBuffer img(kSide, kSide);
    for (int y = 0; y < kSide; ++y)
      for (int x = 0; x < kSide; ++x)
        for (int c = 0; c < 3; ++c)
          img.at(x, y, c) = rec[1 + c * 1024 + y * kSide + x];
    d.images.push_back(std::move(img));
    d.labels.push_back(label);
  }
  return d;
}

Dataset read_cifar10_bin(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("data_batch_", 0) == 0 && name.size() > 4 &&
        name.substr(name.size() - 4) == ".bin")
      files.push_back(e.path().string());
  }
  if (files.empty()) throw IoError("cifar10: no data_batch_*.bin in " + dir);
  std::sort(files.begin(), files.end());
  Dataset d;
  d.num_classes = 10;
  for (const auto& f : files) {
    Dataset part = read_cifar10_file(f);
    d.images.insert(d.images.end(), std::make_move_iterator(part.images.begin()),
                    std::make_move_iterator(part.images.end()));
    d.labels.insert(d.labels.end(), part.labels.begin(), part.labels.end());
  }
  return d;
}

}  // namespace ra
