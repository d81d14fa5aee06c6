#include "swimtrack/tracker.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace swimtrack::tracker {

namespace {

void symmetrize(StateCov& P) { P = 0.5 * (P + P.transpose()).eval(); }

}  // namespace

KfModel KfModel::make(double dt, double q_pos, double q_vel, const MeasVec& r_diag) {
  KfModel m;
  m.F.setIdentity();
  for (int i = 0; i < kMeasDim; ++i) m.F(i, i + kMeasDim) = dt;
  m.H.setZero();
  for (int i = 0; i < kMeasDim; ++i) m.H(i, i) = 1.0;
  m.Q.setZero();
  for (int i = 0; i < kMeasDim; ++i) {
    m.Q(i, i) = q_pos;
    m.Q(i + kMeasDim, i + kMeasDim) = q_vel;
  }
  m.R = r_diag.asDiagonal();
  return m;
}

TrackState kf_predict(const TrackState& track, const KfModel& model) {
  TrackState out;
  out.x = model.F * track.x;
  out.P = model.F * track.P * model.F.transpose() + model.Q;
  symmetrize(out.P);
  out.age_since_update = track.age_since_update + 1;
  return out;
}

TrackState kf_update(const TrackState& track, const MeasVec& z, const KfModel& model) {
  if (!z.allFinite()) throw std::invalid_argument("kf_update: non-finite measurement");
  const MeasVec innovation = z - model.H * track.x;
  const Eigen::Matrix<double, kMeasDim, kMeasDim> S =
      model.H * track.P * model.H.transpose() + model.R;
  const auto llt = S.llt();
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("kf_update: innovation covariance not positive definite");
  }
  const Eigen::Matrix<double, kStateDim, kMeasDim> K =
      track.P * model.H.transpose() * llt.solve(Eigen::Matrix<double, kMeasDim, kMeasDim>::Identity());

  TrackState out;
  out.x = track.x + K * innovation;
  out.P = (StateCov::Identity() - K * model.H) * track.P;
  symmetrize(out.P);
  out.age_since_update = 0;
  return out;
}

double bbox_iou(double x1, double y1, double area1, double aspect1, double x2, double y2,
                double area2, double aspect2) {
  const auto box = [](double area, double aspect, double& w, double& h) {
    area = std::max(area, 0.0);
    aspect = std::max(aspect, 1e-6);
    w = std::sqrt(area * aspect);
    h = std::sqrt(area / aspect);
  };
  double w1, h1, w2, h2;
  box(area1, aspect1, w1, h1);
  box(area2, aspect2, w2, h2);

  const double ix = std::max(
      0.0, std::min(x1 + 0.5 * w1, x2 + 0.5 * w2) - std::max(x1 - 0.5 * w1, x2 - 0.5 * w2));
  const double iy = std::max(
      0.0, std::min(y1 + 0.5 * h1, y2 + 0.5 * h2) - std::max(y1 - 0.5 * h1, y2 - 0.5 * h2));
  const double inter = ix * iy;
  const double uni = w1 * h1 + w2 * h2 - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

bool associate(const TrackState& track, const vision::BBoxObservation& obs, double iou_min) {
  if (!obs.detected) return false;
  return bbox_iou(track.x[0], track.x[1], track.x[2], track.x[3], obs.x_c, obs.y_c, obs.area,
                  obs.aspect) >= iou_min;
}

void SingleTargetTracker::init_from(const vision::BBoxObservation& obs) {
  track_ = TrackState{};
  track_.x.setZero();
  track_.x[0] = obs.x_c;
  track_.x[1] = obs.y_c;
  track_.x[2] = obs.area;
  track_.x[3] = obs.aspect;
  track_.x[4] = obs.confidence;
  track_.P.setZero();
  for (int i = 0; i < kMeasDim; ++i) {
    track_.P(i, i) = cfg_.p0_pos;
    track_.P(i + kMeasDim, i + kMeasDim) = cfg_.p0_vel;
  }
  initialized_ = true;
  lost_ = false;
  consecutive_misses_ = 0;
}

const TrackState& SingleTargetTracker::step(const vision::BBoxObservation& obs) {
  if (!initialized_) {
    if (obs.detected) init_from(obs);
    return track_;
  }

  track_ = kf_predict(track_, model_);

  if (lost_) {
    // Reacquisition: while LOST any detection restarts the track.
    if (obs.detected) init_from(obs);
    return track_;
  }

  if (associate(track_, obs, cfg_.iou_min)) {
    MeasVec z;
    z << obs.x_c, obs.y_c, obs.area, obs.aspect, obs.confidence;
    track_ = kf_update(track_, z, model_);
    consecutive_misses_ = 0;
  } else {
    ++consecutive_misses_;
    if (consecutive_misses_ >= cfg_.max_coast) lost_ = true;
  }
  return track_;
}

void SingleTargetTracker::reset() {
  track_ = TrackState{};
  initialized_ = false;
  lost_ = true;
  consecutive_misses_ = 0;
}

}  // namespace swimtrack::tracker
