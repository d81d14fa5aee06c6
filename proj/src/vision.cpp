#include "swimtrack/vision.hpp"

#include <algorithm>
#include <cmath>

namespace swimtrack::vision {

double ConfidenceField::evaluate(double x_c, double noise) const {
  const double raw = base_confidence - left_bias_strength * std::max(0.0, -x_c) + noise;
  return std::clamp(raw, 0.0, 1.0);
}

BBoxObservation observe(const sim::RobotState& robot, const sim::TargetState& target,
                        const CameraModel& cam, const ConfidenceField& field,
                        const VisionNoise& noise, const TargetShape& shape, Rng& rng) {
  BBoxObservation obs;

  const Eigen::Vector3d d_world = target.position - robot.position;
  const Eigen::Vector3d d = robot.orientation.conjugate() * d_world;  // body frame
  const double range = d.norm();
  if (d.x() <= 0.0 || range > cam.max_range || range < 1e-6) return obs;

  // Angular offsets from the optical axis, normalized by the half-FOV.
  // Body y points left, so a target at positive body-y appears at negative
  // image x.
  const double az = std::atan2(-d.y(), d.x());
  const double el = std::atan2(d.z(), std::hypot(d.x(), d.y()));
  double x_c = az / (0.5 * cam.horizontal_fov);
  double y_c = el / (0.5 * cam.vertical_fov);
  if (std::abs(x_c) > 1.0 || std::abs(y_c) > 1.0) return obs;

  // Pinhole extent: bbox width/height as fractions of the image, so the
  // area falls off exactly as 1/range^2.
  const double w = shape.lateral_radius / (range * std::tan(0.5 * cam.horizontal_fov));
  const double h = shape.vertical_radius / (range * std::tan(0.5 * cam.vertical_fov));
  double area = std::clamp(w * h, 1e-6, 1.0);
  const double aspect = w / h;

  x_c += rng.normal(0.0, noise.center_sigma);
  y_c += rng.normal(0.0, noise.center_sigma);
  area = std::clamp(area * (1.0 + rng.normal(0.0, noise.area_rel_sigma)), 1e-6, 1.0);

  const double conf_noise = field.noise_sigma > 0.0 ? rng.normal(0.0, field.noise_sigma) : 0.0;
  const double confidence = field.evaluate(x_c, conf_noise);

  if (rng.bernoulli((1.0 - confidence) * noise.p_drop)) return obs;

  obs.detected = true;
  obs.x_c = std::clamp(x_c, -1.0, 1.0);
  obs.y_c = std::clamp(y_c, -1.0, 1.0);
  obs.area = area;
  obs.aspect = aspect;
  obs.confidence = confidence;
  return obs;
}

}  // namespace swimtrack::vision
