#pragma once

#include <cstdint>
#include <optional>

#include "stadia/cam_geometry.hpp"
#include "stadia/ned.hpp"
#include "stadia/vehicle.hpp"

// Synthetic detector: projects a target into the ego camera and produces
// bounding boxes whose area fraction is consistent with the depth law in
// cam_geometry, so that position_from_detection recovers the true relative
// position. Boxes keep the frame aspect ratio; optional rounding of the box
// edges to whole pixels is the only noise source and is deterministic.

namespace stadia {

struct DetectorModel {
    CameraModel camera;
    double max_range_m = 12.0;  // no detection beyond this slant range
    double p_near = 0.95;       // reported probability at zero range
    double p_far = 0.70;        // reported probability at max range
    bool quantize_px = false;   // round box edges to integer pixels
    // Depth at which the inverse of the depth law switches branch. Depths in
    // (2.0632, 2.4) are not exactly invertible (the forward law jumps over
    // them); the split at 2.2 bounds the resulting round-trip error by 0.35 m.
    double z_split_m = 2.2;
    std::uint64_t rng_seed = 0;  // recorded in reports; quantization is deterministic

    bool valid() const {
        return camera.valid() && max_range_m > 0.0 && p_far > 0.0 &&
               p_far <= p_near && p_near <= 1.0;
    }
};

// Ground-truth target position in the ego camera frame.
struct RelativeTarget {
    double right_m = 0.0;
    double up_m = 0.0;
    double forward_m = 0.0;
};

struct SyntheticDetection {
    BoundingBox box;
    double probability = 0.0;
};

// NED displacement to the target rotated into the ego camera frame (camera
// boresight = body forward, heading about the down axis).
RelativeTarget relative_in_camera(const VehicleState& ego, const NedVector& enemy_position_m);

// Inverse of the depth law: the box area fraction a target at depth z must
// subtend. Empty when z is outside (0, 7.2), which the law cannot produce.
std::optional<double> size_from_depth(double z_m, const DetectorModel& model);

// Full synthesis: frustum and range gating, box centre from the bearing
// angles, box area from the depth, probability linear in slant range.
std::optional<SyntheticDetection> synth_detection(const RelativeTarget& rel,
                                                  const DetectorModel& model);

}  // namespace stadia
