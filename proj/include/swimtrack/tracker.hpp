#pragma once

#include <Eigen/Core>

#include "swimtrack/vision.hpp"

namespace swimtrack::tracker {

inline constexpr int kStateDim = 10;
inline constexpr int kMeasDim = 5;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateCov = Eigen::Matrix<double, kStateDim, kStateDim>;
using MeasVec = Eigen::Matrix<double, kMeasDim, 1>;

// Constant-velocity bbox state: [x_c, y_c, area, aspect, conf] followed by
// their velocities in the same order.
struct TrackState {
  StateVec x = StateVec::Zero();
  StateCov P = StateCov::Identity();
  int age_since_update = 0;
};

struct KfModel {
  Eigen::Matrix<double, kStateDim, kStateDim> F;
  Eigen::Matrix<double, kMeasDim, kStateDim> H;
  StateCov Q;
  Eigen::Matrix<double, kMeasDim, kMeasDim> R;

  static KfModel make(double dt, double q_pos = 1e-4, double q_vel = 1e-2,
                      const MeasVec& r_diag = (MeasVec() << 4e-4, 4e-4, 1e-5, 1e-3, 2.5e-3).finished());
};

TrackState kf_predict(const TrackState& track, const KfModel& model);
TrackState kf_update(const TrackState& track, const MeasVec& z, const KfModel& model);

// Axis-aligned IoU of the boxes implied by (center, area, aspect).
double bbox_iou(double x1, double y1, double area1, double aspect1, double x2, double y2,
                double area2, double aspect2);

// Single-target gate: accept iff IoU(predicted box, observed box) >= iou_min.
bool associate(const TrackState& track, const vision::BBoxObservation& obs, double iou_min);

struct TrackerConfig {
  double iou_min = 0.1;
  int max_coast = 12;  // consecutive misses before the track is LOST
  double p0_pos = 0.05;
  double p0_vel = 0.5;
};

// Tracking-by-detection over a single target: predict every step, update on
// gated detections, coast on misses, drop to LOST after max_coast misses.
// While LOST the last state keeps extrapolating (for feature/reward
// bookkeeping) and any fresh detection re-initializes the track.
class SingleTargetTracker {
 public:
  SingleTargetTracker(const KfModel& model, const TrackerConfig& cfg)
      : model_(model), cfg_(cfg) {}

  // One tracker cycle; returns the post-cycle state estimate.
  const TrackState& step(const vision::BBoxObservation& obs);

  bool has_track() const { return initialized_; }
  bool lost() const { return lost_; }
  int misses() const { return consecutive_misses_; }
  const TrackState& state() const { return track_; }

  void reset();

 private:
  void init_from(const vision::BBoxObservation& obs);

  KfModel model_;
  TrackerConfig cfg_;
  TrackState track_;
  bool initialized_ = false;
  bool lost_ = true;  // no track yet
  int consecutive_misses_ = 0;
};

}  // namespace swimtrack::tracker
