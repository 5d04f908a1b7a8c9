#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace tdcr {

inline constexpr int kNumMotors = 9;
inline constexpr int kPoseDim = 6;
inline constexpr int kObsDim = 2 * kNumMotors + kPoseDim;  // 24
inline constexpr int kPoseOffset = 2 * kNumMotors;         // pose channels in a flat observation
inline constexpr double kEpsilonStd = 1e-6;

// Tip pose: position in mm, orientation as fixed-axis XYZ Euler angles in rad.
struct Pose6 {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d phi = Eigen::Vector3d::Zero();

  Eigen::Matrix<double, 6, 1> flat() const;
  static Pose6 from_flat(const Eigen::Matrix<double, 6, 1>& v);
  bool finite() const;
};

// Multi-modal observation: motor lengths (mm), motor velocities (mm/s), tip pose.
struct Observation {
  Eigen::VectorXd l = Eigen::VectorXd::Zero(kNumMotors);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kNumMotors);
  Pose6 pose;

  Eigen::VectorXd flat() const;  // 24-vector (l, v, pose)
  static Observation from_flat(const Eigen::VectorXd& x);
};

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);
Eigen::Vector3d wrap_angles(const Eigen::Vector3d& a);

// Rotation matrix for fixed-axis XYZ Euler angles: R = Rz(phi_z) Ry(phi_y) Rx(phi_x).
Eigen::Matrix3d rotation_from_euler(const Eigen::Vector3d& phi);
// Inverse of rotation_from_euler; components in (-pi, pi].
Eigen::Vector3d euler_from_rotation(const Eigen::Matrix3d& r);

// Position error is the Euclidean distance in mm; orientation error is the
// geodesic angle of the relative rotation in rad. Symmetric in (a, b).
std::pair<double, double> pose_error(const Pose6& a, const Pose6& b);

// Per-channel affine normalization fitted on dataset statistics.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(Eigen::VectorXd mean, Eigen::VectorXd std);

  // Population (1/N) convention; std floored at kEpsilonStd. Columns of
  // `samples` are channels, rows are samples (>= 2 required... a single row
  // is accepted but gives the degenerate std floor).
  static Standardizer fit(const Eigen::MatrixXd& samples);

  Eigen::VectorXd transform(const Eigen::VectorXd& x) const;
  Eigen::VectorXd inverse(const Eigen::VectorXd& z) const;

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& std() const { return std_; }
  int dim() const { return static_cast<int>(mean_.size()); }

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd std_;
};

}  // namespace tdcr
