#pragma once

#include <Eigen/Dense>
#include <json.hpp>

namespace mtvloop {

// Pinhole camera with a world→camera rigid pose: x_cam = R·x_world + t.
// Pixel centers sit at integer coordinates.
struct CameraModel {
  double fx = 1, fy = 1, cx = 0, cy = 0;
  int width = 0, height = 0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Matrix3d intrinsics() const;
  Eigen::Vector3d center() const { return -rotation.transpose() * translation; }

  // Throws DataError unless fx,fy > 0, dims > 0 and R is a proper rotation (to 1e-6).
  void validate() const;

  // Same camera observing an image resampled by (sx, sy) along (x, y).
  CameraModel scaled(double sx, double sy, int new_width, int new_height) const;

  bool operator==(const CameraModel&) const = default;
};

nlohmann::json camera_to_json(const CameraModel& cam);
CameraModel camera_from_json(const nlohmann::json& j);

}  // namespace mtvloop
