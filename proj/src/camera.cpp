#include "mtvloop/camera.hpp"

#include <cmath>

#include "mtvloop/error.hpp"

namespace mtvloop {

Eigen::Matrix3d CameraModel::intrinsics() const {
  Eigen::Matrix3d k;
  k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return k;
}

void CameraModel::validate() const {
  MTV_REQUIRE(fx > 0 && fy > 0, "camera: focal lengths must be positive");
  MTV_REQUIRE(width > 0 && height > 0, "camera: image size must be positive");
  MTV_REQUIRE(rotation.allFinite() && translation.allFinite(), "camera: non-finite pose");
  double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  MTV_REQUIRE(ortho < 1e-6, "camera: rotation is not orthonormal");
  MTV_REQUIRE(std::abs(rotation.determinant() - 1.0) < 1e-6, "camera: rotation determinant is not +1");
}

CameraModel CameraModel::scaled(double sx, double sy, int new_width, int new_height) const {
  CameraModel c = *this;
  c.fx = fx * sx;
  c.fy = fy * sy;
  c.cx = (cx + 0.5) * sx - 0.5;
  c.cy = (cy + 0.5) * sy - 0.5;
  c.width = new_width;
  c.height = new_height;
  return c;
}

nlohmann::json camera_to_json(const CameraModel& cam) {
  nlohmann::json m = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    m.push_back({cam.rotation(r, 0), cam.rotation(r, 1), cam.rotation(r, 2), cam.translation(r)});
  }
  return {{"fx", cam.fx},       {"fy", cam.fy},         {"cx", cam.cx},
          {"cy", cam.cy},       {"width", cam.width},   {"height", cam.height},
          {"world_to_camera", m}};
}

CameraModel camera_from_json(const nlohmann::json& j) {
  CameraModel cam;
  try {
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    const auto& m = j.at("world_to_camera");
    MTV_REQUIRE(m.is_array() && m.size() == 3, "camera: world_to_camera must be 3x4");
    for (int r = 0; r < 3; ++r) {
      MTV_REQUIRE(m[r].is_array() && m[r].size() == 4, "camera: world_to_camera must be 3x4");
      for (int c = 0; c < 3; ++c) cam.rotation(r, c) = m[r][c].get<double>();
      cam.translation(r) = m[r][3].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("camera: ") + e.what());
  }
  cam.validate();
  return cam;
}

}  // namespace mtvloop
