#include "tdcr/core_math.hpp"

#include <cmath>
#include <sstream>

#include "tdcr/errors.hpp"

namespace tdcr {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::io: return "io";
    case ErrorKind::corrupt_header: return "corrupt_header";
    case ErrorKind::truncated_record: return "truncated_record";
    case ErrorKind::version_mismatch: return "version_mismatch";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::divergence: return "divergence";
  }
  return "unknown";
}

Eigen::Matrix<double, 6, 1> Pose6::flat() const {
  Eigen::Matrix<double, 6, 1> v;
  v << p, phi;
  return v;
}

Pose6 Pose6::from_flat(const Eigen::Matrix<double, 6, 1>& v) {
  Pose6 out;
  out.p = v.head<3>();
  out.phi = v.tail<3>();
  return out;
}

bool Pose6::finite() const {
  return p.allFinite() && phi.allFinite();
}

Eigen::VectorXd Observation::flat() const {
  Eigen::VectorXd x(kObsDim);
  x << l, v, pose.flat();
  return x;
}

Observation Observation::from_flat(const Eigen::VectorXd& x) {
  if (x.size() != kObsDim)
    fail(ErrorKind::invalid_argument,
         "observation vector must have dimension 24, got " + std::to_string(x.size()));
  Observation o;
  o.l = x.segment(0, kNumMotors);
  o.v = x.segment(kNumMotors, kNumMotors);
  o.pose = Pose6::from_flat(x.segment<6>(kPoseOffset));
  return o;
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * M_PI);  // (-pi, pi] up to the -pi edge
  if (w <= -M_PI) w = M_PI;
  return w;
}

Eigen::Vector3d wrap_angles(const Eigen::Vector3d& a) {
  return {wrap_angle(a.x()), wrap_angle(a.y()), wrap_angle(a.z())};
}

Eigen::Matrix3d rotation_from_euler(const Eigen::Vector3d& phi) {
  const Eigen::AngleAxisd rx(phi.x(), Eigen::Vector3d::UnitX());
  const Eigen::AngleAxisd ry(phi.y(), Eigen::Vector3d::UnitY());
  const Eigen::AngleAxisd rz(phi.z(), Eigen::Vector3d::UnitZ());
  return (rz * ry * rx).toRotationMatrix();
}

Eigen::Vector3d euler_from_rotation(const Eigen::Matrix3d& r) {
  Eigen::Vector3d phi;
  const double sy = -r(2, 0);
  if (std::abs(sy) < 1.0 - 1e-12) {
    phi.y() = std::asin(sy);
    phi.x() = std::atan2(r(2, 1), r(2, 2));
    phi.z() = std::atan2(r(1, 0), r(0, 0));
  } else {
    // Gimbal configuration: phi_x and phi_z are coupled; pin phi_x = 0.
    phi.y() = std::copysign(M_PI / 2.0, sy);
    phi.x() = 0.0;
    phi.z() = std::atan2(-r(0, 1), r(1, 1));
  }
  return wrap_angles(phi);
}

std::pair<double, double> pose_error(const Pose6& a, const Pose6& b) {
  if (!a.finite() || !b.finite())
    fail(ErrorKind::numeric, "pose_error requires finite poses");
  const double pos = (a.p - b.p).norm();
  const Eigen::Matrix3d rel =
      rotation_from_euler(a.phi).transpose() * rotation_from_euler(b.phi);
  const double c = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  return {pos, std::acos(c)};
}

Standardizer::Standardizer(Eigen::VectorXd mean, Eigen::VectorXd std)
    : mean_(std::move(mean)), std_(std::move(std)) {
  if (mean_.size() != std_.size())
    fail(ErrorKind::invalid_argument, "standardizer mean/std dimension mismatch");
  std_ = std_.cwiseMax(kEpsilonStd);
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& samples) {
  if (samples.rows() == 0 || samples.cols() == 0)
    fail(ErrorKind::invalid_argument, "cannot fit standardizer on an empty dataset");
  const double n = static_cast<double>(samples.rows());
  Eigen::VectorXd mean = samples.colwise().mean();
  Eigen::VectorXd var =
      (samples.rowwise() - mean.transpose()).array().square().colwise().sum() / n;
  Eigen::VectorXd std = var.cwiseSqrt().cwiseMax(kEpsilonStd);
  return Standardizer(std::move(mean), std::move(std));
}

Eigen::VectorXd Standardizer::transform(const Eigen::VectorXd& x) const {
  if (x.size() != mean_.size()) {
    std::ostringstream msg;
    msg << "standardize dimension mismatch: x has " << x.size()
        << " channels, standardizer has " << mean_.size();
    fail(ErrorKind::invalid_argument, msg.str());
  }
  return (x - mean_).cwiseQuotient(std_);
}

Eigen::VectorXd Standardizer::inverse(const Eigen::VectorXd& z) const {
  if (z.size() != mean_.size())
    fail(ErrorKind::invalid_argument, "unstandardize dimension mismatch");
  return z.cwiseProduct(std_) + mean_;
}

}  // namespace tdcr
