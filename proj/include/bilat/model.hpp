#ifndef BILAT_MODEL_HPP_
#define BILAT_MODEL_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include "bilat/types.hpp"

namespace bilat {

/// Thrown on malformed inputs (bad dimensions, bad files, bad configs).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown on numerical faults during a run (NaN signals, singular inertia).
class DomainFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One modified-DH row (Khalil convention).
///
/// The transform from frame i-1 to frame i is
///   RotX(alpha) * TransX(a) * RotZ(theta_offset + q_i) * TransZ(d)
/// with the joint rotating about the z axis of frame i.
struct DhRow {
  double alpha = 0.0;         ///< twist about x_{i-1} [rad]
  double a = 0.0;             ///< link length along x_{i-1} [m]
  double theta_offset = 0.0;  ///< joint angle offset [rad]
  double d = 0.0;             ///< offset along z_i [m]
};

/// Kinds of per-link dynamic parameters the model is linear in.
///
/// First moments and the inertia tensor are expressed at the link frame
/// origin. Names in model files follow the usual identification scheme:
/// kind letters, optional 'R' marking a regrouped entry, then the joint
/// number, e.g. "MX2", "ZZR1", "IA4", "FV1".
enum class ParamKind {
  Mass,  // M
  MX, MY, MZ,
  XX, XY, XZ, YY, YZ, ZZ,
  IA,  // rotor inertia, additive on the joint-space diagonal
  FV,  // viscous friction
};

struct ParamRef {
  ParamKind kind;
  int joint;  // 1-based
};

/// Parses names like "MYR2" or "FV1". Throws UsageError on bad input.
ParamRef parse_param_name(const std::string& name, int n_joints);
std::string param_kind_letters(ParamKind kind);

/// Named dynamic parameter vector of a chain.
struct ParamVector {
  std::vector<std::string> names;
  Vec values;

  int size() const { return static_cast<int>(names.size()); }
  int index_of(const std::string& name) const;  // -1 when absent
};

/// Per-link standard parameters assembled from a ParamVector. Internal
/// working form for the recursive dynamics routines.
struct LinkParams {
  double mass = 0.0;
  Vec3 first_moment = Vec3::Zero();  // [MX, MY, MZ]
  Mat3 inertia = Mat3::Zero();       // at frame origin
  double rotor_inertia = 0.0;        // IA
  double viscous_friction = 0.0;     // FV
};

/// Kinematic and dynamic description of an N-joint serial manipulator.
struct ChainModel {
  int n_joints = 0;
  std::vector<DhRow> frames;
  Vec3 gravity = Vec3(0.0, 0.0, -9.80665);
  Vec torque_limit;
  ParamVector phi;

  /// Scatters a parameter vector (same ordering as phi.names) into
  /// per-link standard parameters.
  std::vector<LinkParams> assemble_links(const Vec& values) const;
  std::vector<LinkParams> assemble_links() const { return assemble_links(phi.values); }

  /// Diagonal viscous friction matrix from the FV entries.
  Vec friction_diag() const;

  void validate() const;  // throws UsageError on broken invariants
};

/// Model file I/O (JSON: joints, gravity, torque_limit, params).
ChainModel load_chain_model(const std::string& path);
void save_chain_model(const ChainModel& model, const std::string& path);

/// Writes only the named phi entries, for identification output. The
/// fragment is itself a loadable params-only JSON object.
void save_param_fragment(const ParamVector& phi, const std::string& path);

}  // namespace bilat

#endif  // BILAT_MODEL_HPP_
