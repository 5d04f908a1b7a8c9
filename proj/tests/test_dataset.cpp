#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tdcr/dataset.hpp"
#include "tdcr/errors.hpp"
#include "tdcr/plant.hpp"

using namespace tdcr;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / name).string();
}

Dataset small_dataset(int n_traj, int steps, uint64_t seed) {
  PlantConfig cfg;
  ExcitationConfig exc;
  return collect_dataset(cfg, exc, n_traj, steps, seed);
}

}  // namespace

TEST_CASE("save then load round-trips bit-exactly") {
  Dataset ds = small_dataset(2, 120, 3);
  const std::string path = temp_path("tdcr_roundtrip.bin");
  save_dataset(ds, path);
  Dataset back = load_dataset(path);
  REQUIRE(back.trajectories.size() == ds.trajectories.size());
  CHECK(back.dt == ds.dt);
  for (size_t i = 0; i < ds.trajectories.size(); ++i) {
    CHECK(back.trajectories[i].session_id == ds.trajectories[i].session_id);
    CHECK((back.trajectories[i].observations - ds.trajectories[i].observations).norm() == 0.0);
    CHECK((back.trajectories[i].actions - ds.trajectories[i].actions).norm() == 0.0);
  }
  fs::remove(path);
  fs::remove(path + ".meta.json");
}

TEST_CASE("empty dataset round trip") {
  Dataset ds;
  const std::string path = temp_path("tdcr_empty.bin");
  save_dataset(ds, path);
  Dataset back = load_dataset(path);
  CHECK(back.trajectories.empty());
  fs::remove(path);
  fs::remove(path + ".meta.json");
}

TEST_CASE("distinct error kinds for damaged containers") {
  Dataset ds = small_dataset(1, 50, 1);
  const std::string path = temp_path("tdcr_damage.bin");
  save_dataset(ds, path);

  // truncated final record
  {
    const auto size = fs::file_size(path);
    fs::resize_file(path, size - 16);
    try {
      load_dataset(path);
      FAIL("expected truncation error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::truncated_record);
      const std::string msg = e.what();
      CHECK(msg.find("trajectory 0") != std::string::npos);
      CHECK(msg.find("49") != std::string::npos);  // failing record index
    }
  }
  // corrupt magic
  {
    save_dataset(ds, path);
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XX", 2);
    f.close();
    try {
      load_dataset(path);
      FAIL("expected header error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::corrupt_header);
    }
  }
  // version mismatch
  {
    save_dataset(ds, path);
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);
    const uint32_t bad = 999;
    f.write(reinterpret_cast<const char*>(&bad), sizeof(bad));
    f.close();
    try {
      load_dataset(path);
      FAIL("expected version error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::version_mismatch);
    }
  }
  fs::remove(path);
  fs::remove(path + ".meta.json");
}

TEST_CASE("csv export writes one row per step") {
  Dataset ds = small_dataset(1, 30, 2);
  const std::string path = temp_path("tdcr_export.csv");
  export_trajectory_csv(ds, 0, path);
  std::ifstream is(path);
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 31);  // header + 30 records
  fs::remove(path);
}

TEST_CASE("sample_rollout bounds and minimum length") {
  const int n_i = 5, n_p = 8, n_r = 3;
  Dataset ds = small_dataset(1, n_i + n_p + n_r, 4);
  RandomStream rng(1);
  // exact minimum length: the unique valid decision time is t = n_i
  RolloutBatch batch = sample_rollout(ds, n_i, n_p, n_r, rng);
  CHECK(batch.start == n_i);
  CHECK(batch.warmup_obs.rows() == n_i);
  CHECK(static_cast<int>(batch.future_poses.size()) == n_p + n_r - 1);
  CHECK(batch.start + n_p + n_r <= ds.trajectories[0].steps());

  // any shorter trajectory has no valid batch
  Dataset shorter = small_dataset(1, n_i + n_p + n_r - 1, 4);
  try {
    sample_rollout(shorter, n_i, n_p, n_r, rng);
    FAIL("expected length error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find(std::to_string(n_i + n_p + n_r)) != std::string::npos);
    CHECK(msg.find(std::to_string(shorter.trajectories[0].steps())) != std::string::npos);
  }
}

TEST_CASE("degenerate horizon is rejected") {
  Dataset ds = small_dataset(1, 100, 5);
  RandomStream rng(1);
  CHECK_THROWS_AS(sample_rollout(ds, 5, 0, 3, rng), Error);
}

TEST_CASE("two equal trajectories are sampled evenly") {
  Dataset ds = small_dataset(2, 200, 6);
  RandomStream rng(12);
  int first = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    RolloutBatch b = sample_rollout(ds, 10, 20, 5, rng);
    if (b.trajectory_index == 0) ++first;
  }
  CHECK(std::abs(first / static_cast<double>(draws) - 0.5) < 0.02);
}

TEST_CASE("sampling is deterministic under a fixed seed") {
  Dataset ds = small_dataset(3, 150, 8);
  RandomStream a(77), b(77);
  for (int i = 0; i < 100; ++i) {
    RolloutBatch ba = sample_rollout(ds, 10, 20, 5, a);
    RolloutBatch bb = sample_rollout(ds, 10, 20, 5, b);
    CHECK(ba.trajectory_index == bb.trajectory_index);
    CHECK(ba.start == bb.start);
  }
}

TEST_CASE("rollout batch segments are contiguous and aligned") {
  Dataset ds = small_dataset(1, 120, 9);
  RolloutBatch batch = make_rollout(ds, 0, 30, 10, 20, 5);
  const Trajectory& traj = ds.trajectories[0];
  // warm-up immediately precedes the decision time
  CHECK((batch.warmup_obs.row(9) - traj.observations.row(29)).norm() == 0.0);
  CHECK((batch.obs_start - traj.observations.row(30).transpose()).norm() == 0.0);
  CHECK((batch.action_prev - traj.actions.row(29).transpose()).norm() == 0.0);
  // futures start at t + 1
  CHECK((batch.future_poses[0].flat() -
         traj.pose(31).flat()).norm() == 0.0);
  CHECK((batch.future_observations.row(0) - traj.observations.row(31)).norm() == 0.0);
}
