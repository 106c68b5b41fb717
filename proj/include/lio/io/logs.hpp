// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_IO_LOGS_HPP
#define LIO_IO_LOGS_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lio/errors.hpp"
#include "lio/imu.hpp"
#include "lio/point_cloud.hpp"

namespace lio::io {

/// Software time synchronization for one sensor stream: the host and
/// sensor epochs are latched on the first packet, after which
/// host_t = host_epoch + (sensor_t - sensor_epoch).
class ClockSync {
 public:
  bool initialized() const { return initialized_; }

  void initialize(double host_epoch, double sensor_epoch) {
    if (initialized_) {
      throw ContractViolation("ClockSync: epochs are set exactly once");
    }
    host_epoch_ = host_epoch;
    sensor_epoch_ = sensor_epoch;
    initialized_ = true;
  }

  double to_host(double sensor_t) const {
    if (!initialized_) {
      throw ContractViolation("ClockSync: not initialized");
    }
    return host_epoch_ + (sensor_t - sensor_epoch_);
  }

  /// Identity-latch convenience used by the loaders: the first record's
  /// sensor stamp becomes its own host stamp.
  double to_host_latching(double sensor_t) {
    if (!initialized_) initialize(sensor_t, sensor_t);
    return to_host(sensor_t);
  }

 private:
  double host_epoch_ = 0.0;
  double sensor_epoch_ = 0.0;
  bool initialized_ = false;
};

// Scan logs are little-endian binary. Per sweep:
//   uint32  point count
//   float64 t_start (sensor clock, seconds)
//   count * (float32 x, y, z, t_rel)

namespace detail {

template <typename T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool get(std::istream& is, T& value) {
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  return static_cast<bool>(is);
}

}  // namespace detail

inline void save_scan_log(const std::string& path,
                          std::span<const StampedPointCloud> scans) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open scan log for writing: " + path);
  for (const StampedPointCloud& scan : scans) {
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(scan.size()));
    detail::put<double>(os, scan.t_start);
    for (const Point& p : scan.points) {
      detail::put<float>(os, static_cast<float>(p.position.x()));
      detail::put<float>(os, static_cast<float>(p.position.y()));
      detail::put<float>(os, static_cast<float>(p.position.z()));
      detail::put<float>(os, static_cast<float>(p.t_rel));
    }
  }
  if (!os) throw Error("write failure on scan log: " + path);
}

inline std::vector<StampedPointCloud> load_scan_log(const std::string& path,
                                                    ClockSync* sync = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open scan log: " + path);
  std::vector<StampedPointCloud> out;
  ClockSync local;
  ClockSync& clock = sync != nullptr ? *sync : local;
  for (;;) {
    const std::int64_t record_start = is.tellg();
    std::uint32_t count = 0;
    if (!detail::get(is, count)) {
      if (is.eof()) break;
      throw ParseError("scan log: read failure at byte " +
                       std::to_string(record_start));
    }
    double t_start = 0.0;
    if (!detail::get(is, t_start)) {
      throw ParseError("scan log: truncated header at byte " +
                       std::to_string(record_start));
    }
    StampedPointCloud scan;
    scan.t_start = clock.to_host_latching(t_start);
    scan.frame = Frame::lidar;
    scan.points.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      float x, y, z, t_rel;
      if (!detail::get(is, x) || !detail::get(is, y) || !detail::get(is, z) ||
          !detail::get(is, t_rel)) {
        throw ParseError("scan log: truncated record at byte " +
                         std::to_string(record_start) + " (point " +
                         std::to_string(i) + " of " + std::to_string(count) + ")");
      }
      scan.points.push_back({Vec3(x, y, z), static_cast<double>(t_rel)});
    }
    out.push_back(std::move(scan));
  }
  return out;
}

// IMU logs are CSV with the header line "t,ax,ay,az,gx,gy,gz".

inline void save_imu_log(const std::string& path,
                         std::span<const ImuSample> samples) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open IMU log for writing: " + path);
  os << "t,ax,ay,az,gx,gy,gz\n";
  char line[256];
  for (const ImuSample& s : samples) {
    std::snprintf(line, sizeof(line),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t,
                  s.accel.x(), s.accel.y(), s.accel.z(), s.gyro.x(),
                  s.gyro.y(), s.gyro.z());
    os << line;
  }
  if (!os) throw Error("write failure on IMU log: " + path);
}

inline std::vector<ImuSample> load_imu_log(const std::string& path,
                                           ClockSync* sync = nullptr) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open IMU log: " + path);
  std::vector<ImuSample> out;
  ClockSync local;
  ClockSync& clock = sync != nullptr ? *sync : local;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("t,", 0) == 0) continue;  // header
    double v[7];
    std::istringstream ss(line);
    std::string field;
    for (int k = 0; k < 7; ++k) {
      if (!std::getline(ss, field, ',')) {
        throw ParseError("IMU log line " + std::to_string(line_no) +
                         ": expected 7 fields");
      }
      try {
        std::size_t used = 0;
        v[k] = std::stod(field, &used);
        if (used == 0) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ParseError("IMU log line " + std::to_string(line_no) +
                         ": bad number '" + field + "'");
      }
    }
    ImuSample s{clock.to_host_latching(v[0]), Vec3(v[1], v[2], v[3]),
                Vec3(v[4], v[5], v[6])};
    if (!out.empty() && s.t <= out.back().t) {
      throw ParseError("IMU log line " + std::to_string(line_no) +
                       ": non-increasing timestamp");
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace lio::io

#endif  // LIO_IO_LOGS_HPP
