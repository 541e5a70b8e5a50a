#include "stadia/detection_sim.hpp"

#include <algorithm>
#include <cmath>

namespace stadia {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

RelativeTarget relative_in_camera(const VehicleState& ego, const NedVector& enemy_position_m) {
    const NedVector delta = enemy_position_m - ego.position_m;
    const double heading_rad = ego.heading_deg * kPi / 180.0;
    const double cos_h = std::cos(heading_rad);
    const double sin_h = std::sin(heading_rad);

    RelativeTarget rel;
    rel.forward_m = cos_h * delta.n + sin_h * delta.e;
    rel.right_m = -sin_h * delta.n + cos_h * delta.e;
    rel.up_m = -delta.d;
    return rel;
}

std::optional<double> size_from_depth(double z_m, const DetectorModel& model) {
    if (!(z_m > 0.0) || z_m >= 7.2) {
        return std::nullopt;
    }
    if (z_m >= model.z_split_m) {
        return (7.2 - z_m) / 120.0;
    }
    const double s = (2.2 - z_m) / 3.42;
    // Keep the size strictly inside the second branch of the forward law so
    // the round trip lands back on this branch.
    return std::clamp(s, std::nextafter(0.04, 1.0), 0.4);
}

std::optional<SyntheticDetection> synth_detection(const RelativeTarget& rel,
                                                  const DetectorModel& model) {
    if (rel.forward_m <= 0.0) {
        return std::nullopt;
    }
    const double range = std::sqrt(rel.right_m * rel.right_m + rel.up_m * rel.up_m +
                                   rel.forward_m * rel.forward_m);
    if (range > model.max_range_m) {
        return std::nullopt;
    }

    const CameraModel& cam = model.camera;
    const double bearing_x_deg = std::atan(rel.right_m / rel.forward_m) * 180.0 / kPi;
    const double bearing_y_deg = std::atan(rel.up_m / rel.forward_m) * 180.0 / kPi;
    if (std::abs(bearing_x_deg) > cam.half_fov_x_deg ||
        std::abs(bearing_y_deg) > cam.half_fov_y_deg) {
        return std::nullopt;
    }

    const auto size = size_from_depth(rel.forward_m, model);
    if (!size) {
        return std::nullopt;
    }

    const double centre_x_px =
        (cam.frame_width_px / 2.0) * (1.0 + bearing_x_deg / cam.half_fov_x_deg);
    const double centre_y_px =
        (cam.frame_height_px / 2.0) * (1.0 - bearing_y_deg / cam.half_fov_y_deg);
    const double half_w = cam.frame_width_px * std::sqrt(*size) / 2.0;
    const double half_h = cam.frame_height_px * std::sqrt(*size) / 2.0;

    BoundingBox box;
    box.x_min_px = std::max(0.0, centre_x_px - half_w);
    box.x_max_px = std::min(cam.frame_width_px, centre_x_px + half_w);
    box.y_min_px = std::max(0.0, centre_y_px - half_h);
    box.y_max_px = std::min(cam.frame_height_px, centre_y_px + half_h);

    if (model.quantize_px) {
        box.x_min_px = std::round(box.x_min_px);
        box.x_max_px = std::round(box.x_max_px);
        box.y_min_px = std::round(box.y_min_px);
        box.y_max_px = std::round(box.y_max_px);
    }
    if (!(box.x_min_px < box.x_max_px) || !(box.y_min_px < box.y_max_px)) {
        return std::nullopt;  // collapsed by clipping or rounding
    }

    SyntheticDetection det;
    det.box = box;
    det.probability = model.p_near + (model.p_far - model.p_near) * (range / model.max_range_m);
    return det;
}

}  // namespace stadia
