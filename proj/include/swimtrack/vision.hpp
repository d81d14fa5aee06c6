#pragma once

#include "swimtrack/rng.hpp"
#include "swimtrack/sim.hpp"

namespace swimtrack::vision {

// Pinhole camera looking along body +x. Image coordinates are normalized to
// [-1, 1] with the optical axis at the origin: x right, y up.
struct CameraModel {
  double horizontal_fov = 1.396;  // rad (~80 deg)
  double vertical_fov = 1.117;    // rad (~64 deg)
  double max_range = 8.0;         // m
};

// Spatially dependent detection quality. Detections on the left half of the
// image lose confidence proportionally to how far left they sit.
struct ConfidenceField {
  double base_confidence = 0.75;
  double left_bias_strength = 0.0;  // penalty per unit of negative x_c
  double noise_sigma = 0.0;

  double evaluate(double x_c, double noise) const;
};

struct VisionNoise {
  double center_sigma = 0.0;     // additive, normalized units
  double area_rel_sigma = 0.0;   // multiplicative on area
  double p_drop = 0.0;           // dropout scale; P(miss) = (1 - conf) * p_drop
};

struct BBoxObservation {
  bool detected = false;
  double x_c = 0.0;        // [-1, 1]
  double y_c = 0.0;        // [-1, 1]
  double area = 0.0;       // fraction of image area, (0, 1]
  double aspect = 1.0;     // width / height
  double confidence = 0.0; // [0, 1]
};

// Physical extent of the target used for projection.
struct TargetShape {
  double lateral_radius = 0.35;   // m
  double vertical_radius = 0.45;  // m
};

// Projects the target into the camera, applies measurement noise, evaluates
// the confidence field at the (noisy) detection position, and rolls
// confidence-coupled dropout. Targets outside the frustum or beyond
// max_range come back undetected.
BBoxObservation observe(const sim::RobotState& robot, const sim::TargetState& target,
                        const CameraModel& cam, const ConfidenceField& field,
                        const VisionNoise& noise, const TargetShape& shape, Rng& rng);

}  // namespace swimtrack::vision
