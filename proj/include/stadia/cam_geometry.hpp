#pragma once

#include <optional>

// Bounding-box to metric target positioning.
//
// Camera frame conventions used throughout:
//   - pixel coordinates: origin top-left, x rightward, y downward
//   - normalized centre: [-1, 1] on both axes, y flipped to upward-positive
//   - metric output: right_m (lateral, rightward +), up_m (vertical, upward +),
//     forward_m (depth along the camera axis)
//
// Depth comes from the apparent size of the target (area fraction of the
// frame) through a piecewise-linear law fitted for the UAV class. The law is
// only valid below an area fraction of 0.5; larger boxes give no estimate.

namespace stadia {

// Detector output box in continuous pixel coordinates.
struct BoundingBox {
    double x_min_px = 0.0;
    double y_min_px = 0.0;
    double x_max_px = 0.0;
    double y_max_px = 0.0;

    double width_px() const { return x_max_px - x_min_px; }
    double height_px() const { return y_max_px - y_min_px; }
};

struct CameraModel {
    double frame_width_px = 640.0;
    double frame_height_px = 480.0;
    double half_fov_x_deg = 31.1;
    double half_fov_y_deg = 24.4;

    bool valid() const {
        return frame_width_px > 0.0 && frame_height_px > 0.0 &&
               half_fov_x_deg > 0.0 && half_fov_x_deg < 90.0 &&
               half_fov_y_deg > 0.0 && half_fov_y_deg < 90.0;
    }
};

// Box centre normalized to [-1, 1]^2, vertical axis upward-positive.
struct NormalizedCentre {
    double x = 0.0;  // rightward +
    double y = 0.0;  // upward +
};

// Metric target position in the camera frame plus the quantities it was
// derived from.
struct TargetEstimate {
    double right_m = 0.0;    // lateral offset
    double up_m = 0.0;       // vertical offset
    double forward_m = 0.0;  // depth along the camera axis
    double size = 0.0;       // box area / frame area, in (0, 1]
    NormalizedCentre centre;
    double probability = 0.0;
};

// Box area fraction above which no depth estimate is produced.
inline constexpr double kMaxEstimableSize = 0.5;

// Centre of the box mapped to [-1, 1]^2 with upward-positive y.
// Throws std::invalid_argument for a degenerate or out-of-frame box.
NormalizedCentre normalize_centre(const BoundingBox& box, const CameraModel& cam);

// Box area divided by frame area, in (0, 1].
// Throws std::invalid_argument for a degenerate or out-of-frame box.
double size_ratio(const BoundingBox& box, const CameraModel& cam);

// Piecewise-linear depth law for the UAV class.
//   size <= 0.04        z = -120  * size + 7.2
//   0.04 < size <= 0.4  z = -3.42 * size + 2.2
//   size > 0.4          z = -3.25 * size + 0.5
// The branches are discontinuous at 0.04 (2.4 -> 2.0632) and 0.4
// (0.832 -> -0.8); the last branch is negative over its whole gated domain.
// Throws std::domain_error unless 0 < size < kMaxEstimableSize.
double depth_from_size(double size);

// Full positioning chain. Returns no estimate when the probability is below
// the threshold or the box is too large for the depth law.
std::optional<TargetEstimate> position_from_detection(const BoundingBox& box,
                                                      const CameraModel& cam,
                                                      double probability,
                                                      double threshold);

}  // namespace stadia
