#include "tdcr/dataset.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "tdcr/errors.hpp"

namespace tdcr {

namespace {

constexpr char kMagic[8] = {'T', 'D', 'C', 'R', 'D', 'A', 'T', '\0'};
constexpr uint32_t kFormatVersion = 1;

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool read_pod(std::ifstream& is, T* v) {
  is.read(reinterpret_cast<char*>(v), sizeof(T));
  return is.gcount() == sizeof(T);
}

}  // namespace

Observation Trajectory::observation(int t) const {
  return Observation::from_flat(observations.row(t).transpose());
}

Pose6 Trajectory::pose(int t) const {
  return Pose6::from_flat(observations.row(t).segment<6>(kPoseOffset).transpose());
}

int64_t Dataset::total_steps() const {
  int64_t n = 0;
  for (const auto& t : trajectories) n += t.steps();
  return n;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open for writing: " + path);

  os.write(kMagic, sizeof(kMagic));
  write_pod(os, kFormatVersion);
  write_pod(os, ds.dt);
  write_pod(os, static_cast<uint32_t>(kObsDim));
  write_pod(os, static_cast<uint32_t>(kNumMotors));
  write_pod(os, static_cast<uint64_t>(ds.trajectories.size()));
  for (const auto& traj : ds.trajectories) {
    write_pod(os, traj.session_id);
    write_pod(os, static_cast<uint64_t>(traj.steps()));
    for (int t = 0; t < traj.steps(); ++t) {
      os.write(reinterpret_cast<const char*>(traj.observations.row(t).eval().data()),
               kObsDim * sizeof(double));
      os.write(reinterpret_cast<const char*>(traj.actions.row(t).eval().data()),
               kNumMotors * sizeof(double));
    }
  }
  if (!os) fail(ErrorKind::io, "write failed: " + path);
  os.close();

  nlohmann::json meta;
  meta["format"] = "tdcr-trajectory-container";
  meta["version"] = kFormatVersion;
  meta["dt"] = ds.dt;
  meta["observation_dim"] = kObsDim;
  meta["action_dim"] = kNumMotors;
  meta["trajectories"] = nlohmann::json::array();
  for (const auto& traj : ds.trajectories)
    meta["trajectories"].push_back(
        {{"session_id", traj.session_id}, {"steps", traj.steps()}});
  std::ofstream ms(path + ".meta.json", std::ios::trunc);
  if (!ms) fail(ErrorKind::io, "cannot open for writing: " + path + ".meta.json");
  ms << meta.dump(2) << "\n";
}

Dataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot open: " + path);

  char magic[8];
  is.read(magic, sizeof(magic));
  if (is.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    fail(ErrorKind::corrupt_header, "bad container magic in " + path);

  uint32_t version = 0;
  if (!read_pod(is, &version))
    fail(ErrorKind::corrupt_header, "header truncated in " + path);
  if (version != kFormatVersion)
    fail(ErrorKind::version_mismatch,
         "container version " + std::to_string(version) + " unsupported (expected " +
             std::to_string(kFormatVersion) + ")");

  Dataset ds;
  uint32_t obs_dim = 0, act_dim = 0;
  uint64_t n_traj = 0;
  if (!read_pod(is, &ds.dt) || !read_pod(is, &obs_dim) || !read_pod(is, &act_dim) ||
      !read_pod(is, &n_traj))
    fail(ErrorKind::corrupt_header, "header truncated in " + path);
  if (obs_dim != kObsDim || act_dim != kNumMotors)
    fail(ErrorKind::corrupt_header,
         "unexpected dimensions in header: obs=" + std::to_string(obs_dim) +
             " act=" + std::to_string(act_dim));

  ds.trajectories.resize(n_traj);
  std::vector<double> row(kObsDim + kNumMotors);
  for (uint64_t i = 0; i < n_traj; ++i) {
    Trajectory& traj = ds.trajectories[i];
    uint64_t steps = 0;
    if (!read_pod(is, &traj.session_id) || !read_pod(is, &steps))
      fail(ErrorKind::truncated_record,
           "trajectory " + std::to_string(i) + ": header truncated");
    traj.observations.resize(steps, kObsDim);
    traj.actions.resize(steps, kNumMotors);
    for (uint64_t t = 0; t < steps; ++t) {
      is.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
      if (is.gcount() != static_cast<std::streamsize>(row.size() * sizeof(double)))
        fail(ErrorKind::truncated_record,
             "trajectory " + std::to_string(i) + ": record " + std::to_string(t) +
                 " truncated");
      for (int c = 0; c < kObsDim; ++c) traj.observations(t, c) = row[c];
      for (int c = 0; c < kNumMotors; ++c) traj.actions(t, c) = row[kObsDim + c];
    }
  }
  return ds;
}

void export_trajectory_csv(const Dataset& ds, int trajectory_index,
                           const std::string& path) {
  if (trajectory_index < 0 ||
      trajectory_index >= static_cast<int>(ds.trajectories.size()))
    fail(ErrorKind::invalid_argument,
         "trajectory index " + std::to_string(trajectory_index) + " out of range");
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open for writing: " + path);

  for (int m = 0; m < kNumMotors; ++m) os << "l" << m << ",";
  for (int m = 0; m < kNumMotors; ++m) os << "v" << m << ",";
  os << "px,py,pz,rx,ry,rz";
  for (int m = 0; m < kNumMotors; ++m) os << ",a" << m;
  os << "\n";

  char buf[32];
  const Trajectory& traj = ds.trajectories[trajectory_index];
  for (int t = 0; t < traj.steps(); ++t) {
    for (int c = 0; c < kObsDim; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", traj.observations(t, c));
      os << (c ? "," : "") << buf;
    }
    for (int c = 0; c < kNumMotors; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", traj.actions(t, c));
      os << "," << buf;
    }
    os << "\n";
  }
}

namespace {

int64_t valid_starts(const Trajectory& traj, int n_init, int n_predict,
                     int n_reference) {
  // Decision time t needs warm-up [t - n_init, t), the previous action, and
  // futures up to t + n_predict + n_reference - 1.
  const int64_t lo = std::max(n_init, 1);
  const int64_t hi = traj.steps() - n_predict - n_reference;  // inclusive
  return std::max<int64_t>(0, hi - lo + 1);
}

}  // namespace

int64_t count_valid_starts(const Dataset& ds, int n_init, int n_predict,
                           int n_reference) {
  int64_t total = 0;
  for (const auto& traj : ds.trajectories)
    total += valid_starts(traj, n_init, n_predict, n_reference);
  return total;
}

RolloutBatch make_rollout(const Dataset& ds, int trajectory_index, int start,
                          int n_init, int n_predict, int n_reference) {
  if (n_predict < 1 || n_reference < 1)
    fail(ErrorKind::invalid_argument,
         "rollout horizons must satisfy N_p >= 1 and N_r >= 1");
  if (n_init < 0)
    fail(ErrorKind::invalid_argument, "warm-up length must be >= 0");
  const Trajectory& traj = ds.trajectories.at(trajectory_index);
  const int horizon = n_predict + n_reference - 1;
  if (start < std::max(n_init, 1) || start + horizon > traj.steps() - 1)
    fail(ErrorKind::invalid_argument,
         "rollout start " + std::to_string(start) + " invalid for trajectory of " +
             std::to_string(traj.steps()) + " steps");

  RolloutBatch batch;
  batch.trajectory_index = trajectory_index;
  batch.start = start;
  batch.warmup_obs = traj.observations.middleRows(start - n_init, n_init);
  batch.warmup_actions = traj.actions.middleRows(start - n_init, n_init);
  batch.obs_start = traj.observations.row(start).transpose();
  batch.action_prev = traj.actions.row(start - 1).transpose();
  batch.pose_start = traj.pose(start);
  batch.future_poses.reserve(horizon);
  for (int i = 1; i <= horizon; ++i) batch.future_poses.push_back(traj.pose(start + i));
  batch.future_observations = traj.observations.middleRows(start + 1, horizon);
  return batch;
}

RolloutBatch sample_rollout(const Dataset& ds, int n_init, int n_predict,
                            int n_reference, RandomStream& rng) {
  if (n_predict < 1 || n_reference < 1 || n_init < 0)
    fail(ErrorKind::invalid_argument,
         "sample_rollout: need N_p >= 1, N_r >= 1, N_i >= 0");
  const int64_t total = count_valid_starts(ds, n_init, n_predict, n_reference);
  if (total == 0) {
    int64_t longest = 0;
    for (const auto& traj : ds.trajectories)
      longest = std::max<int64_t>(longest, traj.steps());
    fail(ErrorKind::invalid_argument,
         "no trajectory long enough: need >= " +
             std::to_string(std::max(n_init, 1) + n_predict + n_reference) +
             " steps (N_i=" + std::to_string(n_init) +
             ", N_p=" + std::to_string(n_predict) +
             ", N_r=" + std::to_string(n_reference) + "), longest available is " +
             std::to_string(longest));
  }
  int64_t draw = static_cast<int64_t>(rng.index(static_cast<uint64_t>(total)));
  for (size_t i = 0; i < ds.trajectories.size(); ++i) {
    const int64_t n = valid_starts(ds.trajectories[i], n_init, n_predict, n_reference);
    if (draw < n) {
      const int start = static_cast<int>(std::max(n_init, 1) + draw);
      return make_rollout(ds, static_cast<int>(i), start, n_init, n_predict,
                          n_reference);
    }
    draw -= n;
  }
  fail(ErrorKind::invalid_argument, "sample_rollout: internal draw out of range");
}

}  // namespace tdcr
