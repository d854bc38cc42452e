// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors
//
// Constant-velocity Kalman filter over bounding-box centers. The state is
// (x, y, vx, vy); box area and aspect ratio are deliberately not modeled
// because they oscillate with swimming strokes. All operations are pure
// functions producing new states.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include <divetrack/core.hpp>

namespace divetrack::kalman {

/// Noise magnitudes for one predict/update cycle, in pixels.
struct NoiseModel {
  double process_position_std = 5.0;    // px/frame
  double process_velocity_std = 0.625;  // px/frame^2
  double measurement_std = 5.0;         // px

  void validate() const {
    if (!(process_position_std > 0.0) || !(process_velocity_std > 0.0) ||
        !(measurement_std > 0.0))
      throw std::invalid_argument("noise standard deviations must be > 0");
  }
};

/// Height-relative noise scales. Noise grows with the tracked box so that the
/// same gate values work across target sizes; the fallback height applies
/// when no box is known yet.
struct NoiseScales {
  double position_ratio = 1.0 / 20.0;
  double velocity_ratio = 1.0 / 160.0;
  double measurement_ratio = 1.0 / 20.0;
  double fallback_height = 100.0;

  NoiseModel for_height(double height) const {
    const double h = (std::isfinite(height) && height > 0.0) ? height : fallback_height;
    return NoiseModel{position_ratio * h, velocity_ratio * h, measurement_ratio * h};
  }
};

/// Gaussian belief over (x, y, vx, vy).
struct MotionState {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();

  double x() const { return mean(0); }
  double y() const { return mean(1); }
  double vx() const { return mean(2); }
  double vy() const { return mean(3); }
};

namespace detail {

inline Eigen::Matrix4d transition() {
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = 1.0;  // x += vx
  f(1, 3) = 1.0;  // y += vy
  return f;
}

inline Eigen::Matrix4d process_noise(const NoiseModel& noise) {
  Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
  const double p2 = noise.process_position_std * noise.process_position_std;
  const double v2 = noise.process_velocity_std * noise.process_velocity_std;
  q.diagonal() << p2, p2, v2, v2;
  return q;
}

// Innovation covariance of the position measurement: S = H P H^T + R.
inline Eigen::Matrix2d innovation_covariance(const MotionState& state,
                                             const NoiseModel& noise) {
  const double r2 = noise.measurement_std * noise.measurement_std;
  Eigen::Matrix2d s = state.covariance.topLeftCorner<2, 2>();
  s(0, 0) += r2;
  s(1, 1) += r2;
  return s;
}

}  // namespace detail

/// New state at a first observation: zero velocity with inflated variance so
/// the track is usable from its first detection.
inline MotionState initiate(double x, double y, const NoiseModel& noise) {
  if (!std::isfinite(x) || !std::isfinite(y))
    throw std::invalid_argument("initiate: non-finite center");
  noise.validate();
  MotionState state;
  state.mean << x, y, 0.0, 0.0;
  const double pos = 2.0 * noise.measurement_std;
  const double vel = 10.0 * noise.measurement_std;
  state.covariance = Eigen::Matrix4d::Zero();
  state.covariance.diagonal() << pos * pos, pos * pos, vel * vel, vel * vel;
  return state;
}

/// Propagates one frame: x += vx, y += vy, covariance grows by Q.
inline MotionState predict(const MotionState& state, const NoiseModel& noise) {
  noise.validate();
  const Eigen::Matrix4d f = detail::transition();
  MotionState out;
  out.mean = f * state.mean;
  out.covariance = f * state.covariance * f.transpose() + detail::process_noise(noise);
  return out;
}

/// Standard correction against a position measurement, Joseph-form covariance
/// update to keep the posterior symmetric PSD.
inline MotionState update(const MotionState& state, double zx, double zy,
                          const NoiseModel& noise) {
  if (!std::isfinite(zx) || !std::isfinite(zy))
    throw std::invalid_argument("update: non-finite measurement");
  noise.validate();
  const Eigen::Matrix2d s = detail::innovation_covariance(state, noise);
  const double det = s.determinant();
  if (!(det > 0.0) || !std::isfinite(det))
    throw std::runtime_error("update: singular innovation covariance");

  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;

  const Eigen::Matrix<double, 4, 2> gain =
      state.covariance * h.transpose() * s.inverse();
  const Eigen::Vector2d innovation(zx - state.mean(0), zy - state.mean(1));

  MotionState out;
  out.mean = state.mean + gain * innovation;
  const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - gain * h;
  const double r2 = noise.measurement_std * noise.measurement_std;
  out.covariance = ikh * state.covariance * ikh.transpose() +
                   gain * (r2 * Eigen::Matrix2d::Identity()) * gain.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

/// Squared Mahalanobis distance of a measurement from the predicted position:
/// d^T S^-1 d with S = H P H^T + R. The state must already be predicted for
/// the frame the measurement belongs to.
inline double squared_mahalanobis(const MotionState& state, double zx, double zy,
                                  const NoiseModel& noise) {
  noise.validate();
  const Eigen::Matrix2d s = detail::innovation_covariance(state, noise);
  const double det = s.determinant();
  if (!(det > 0.0) || !std::isfinite(det))
    throw std::runtime_error("squared_mahalanobis: singular innovation covariance");
  const Eigen::Vector2d d(zx - state.mean(0), zy - state.mean(1));
  return d.dot(s.inverse() * d);
}

}  // namespace divetrack::kalman
