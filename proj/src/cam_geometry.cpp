#include "stadia/cam_geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace stadia {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_valid_box(const BoundingBox& box, const CameraModel& cam) {
    if (!cam.valid()) {
        throw std::invalid_argument("camera model invalid");
    }
    if (!(box.x_min_px < box.x_max_px) || !(box.y_min_px < box.y_max_px)) {
        throw std::invalid_argument("bounding box degenerate");
    }
    if (box.x_min_px < 0.0 || box.y_min_px < 0.0 ||
        box.x_max_px > cam.frame_width_px || box.y_max_px > cam.frame_height_px) {
        throw std::invalid_argument("bounding box outside camera frame");
    }
}

}  // namespace

NormalizedCentre normalize_centre(const BoundingBox& box, const CameraModel& cam) {
    require_valid_box(box, cam);
    const double cx = box.x_min_px + box.width_px() / 2.0;
    const double cy = box.y_min_px + box.height_px() / 2.0;
    NormalizedCentre centre;
    centre.x = (2.0 / cam.frame_width_px) * (cx - cam.frame_width_px / 2.0);
    centre.y = (2.0 / cam.frame_height_px) * (cam.frame_height_px / 2.0 - cy);
    return centre;
}

double size_ratio(const BoundingBox& box, const CameraModel& cam) {
    require_valid_box(box, cam);
    return (box.width_px() * box.height_px()) /
           (cam.frame_width_px * cam.frame_height_px);
}

double depth_from_size(double size) {
    if (!(size > 0.0) || size >= kMaxEstimableSize) {
        throw std::domain_error("size outside the estimable gate (0, 0.5)");
    }
    if (size <= 0.04) {
        return -120.0 * size + 7.2;
    }
    if (size <= 0.4) {
        return -3.42 * size + 2.2;
    }
    return -3.25 * size + 0.5;
}

std::optional<TargetEstimate> position_from_detection(const BoundingBox& box,
                                                      const CameraModel& cam,
                                                      double probability,
                                                      double threshold) {
    if (probability < threshold) {
        return std::nullopt;
    }
    const double size = size_ratio(box, cam);
    if (size >= kMaxEstimableSize) {
        return std::nullopt;
    }

    TargetEstimate est;
    est.centre = normalize_centre(box, cam);
    est.size = size;
    est.probability = probability;
    est.forward_m = depth_from_size(size);
    est.right_m = std::tan(est.centre.x * cam.half_fov_x_deg * kPi / 180.0) * est.forward_m;
    est.up_m = std::tan(est.centre.y * cam.half_fov_y_deg * kPi / 180.0) * est.forward_m;
    return est;
}

}  // namespace stadia
