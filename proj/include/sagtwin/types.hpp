#ifndef SAGTWIN_TYPES_HPP
#define SAGTWIN_TYPES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sagtwin {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline constexpr int kNumMV = 3;  // tonnage, solids %, mill speed
inline constexpr int kNumCV = 2;  // bearing pressure, motor power

/// One timestamped plant sample: manipulated variables, their setpoints,
/// controlled variables, and operational status flags.
struct PlantRecord {
    double timestamp = 0.0;  // seconds since epoch
    Vec3 u = Vec3::Zero();     // tonnage t/h, solids %, speed rpm
    Vec3 u_sp = Vec3::Zero();  // MV setpoints, same units
    Vec2 y = Vec2::Zero();     // bearing pressure kPa, motor power kW
    bool sag_running = true;
    bool expert_online = true;
};

/// Uniformly sampled, gap-free sequence of plant records.
struct SampledSeries {
    std::vector<PlantRecord> records;
    double sample_period = 30.0;  // seconds

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
    const PlantRecord& operator[](std::size_t i) const { return records[i]; }
    PlantRecord& operator[](std::size_t i) { return records[i]; }
};

// ---- error types -----------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SegmentTooShort : Error { using Error::Error; };
struct InsufficientSegments : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct WindowTooShort : Error { using Error::Error; };
struct WindowNotFull : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct TrainingDiverged : Error { using Error::Error; };
struct AllInfeasible : Error { using Error::Error; };
struct RetrainDeferred : Error { using Error::Error; };
struct UnstablePlantConfig : Error { using Error::Error; };

struct IdentificationFailed : Error {
    double final_cost;
    explicit IdentificationFailed(const std::string& msg, double cost)
        : Error(msg), final_cost(cost) {}
};

}  // namespace sagtwin

#endif  // SAGTWIN_TYPES_HPP
