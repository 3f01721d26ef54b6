#pragma once

#include "ra/policy.hpp"

namespace ra {
// Reference scalar implementation of the transform semantics, kept separate
// from the engine: straight per-pixel double loops, its own rounding and
// LUT math. Golden images are produced from this path only; the engine is
// then required to match it bit-exactly.
namespace oracle {

ImageBuffer apply(const ImageBuffer& img, TransformKind kind, Level level,
                  DeterministicRng& rng);

// Mirrors the engine's documented draw order (baselines, schedule, kind
// choices, per-op signs, cutout) but applies every op via oracle::apply.
ImageBuffer augment(const ImageBuffer& img, const RandAugmentConfig& cfg, long step,
                    long total_steps, uint64_t image_index);

// The fixed 8x8 golden seed image (pseudorandom bytes from seed 12345).
ImageBuffer seed_image_8x8();

}  // namespace oracle
}  // namespace ra
