#include "bilat/model.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace bilat {

// ordered_json keeps the parameter order of the file, so phi indexing is
// stable across a save/load round trip.
using json = nlohmann::ordered_json;

ParamRef parse_param_name(const std::string& name, int n_joints) {
  std::size_t i = 0;
  while (i < name.size() && std::isalpha(static_cast<unsigned char>(name[i]))) ++i;
  std::string letters = name.substr(0, i);
  std::string digits = name.substr(i);
  if (letters.empty() || digits.empty() ||
      digits.find_first_not_of("0123456789") != std::string::npos) {
    throw UsageError("bad parameter name: '" + name + "'");
  }
  // A trailing R marks a regrouped entry; it names the same slot.
  if (letters.size() > 1 && letters.back() == 'R') letters.pop_back();

  ParamKind kind;
  if (letters == "M") kind = ParamKind::Mass;
  else if (letters == "MX") kind = ParamKind::MX;
  else if (letters == "MY") kind = ParamKind::MY;
  else if (letters == "MZ") kind = ParamKind::MZ;
  else if (letters == "XX") kind = ParamKind::XX;
  else if (letters == "XY") kind = ParamKind::XY;
  else if (letters == "XZ") kind = ParamKind::XZ;
  else if (letters == "YY") kind = ParamKind::YY;
  else if (letters == "YZ") kind = ParamKind::YZ;
  else if (letters == "ZZ") kind = ParamKind::ZZ;
  else if (letters == "IA") kind = ParamKind::IA;
  else if (letters == "FV") kind = ParamKind::FV;
  else throw UsageError("unknown parameter kind in '" + name + "'");

  int joint = std::stoi(digits);
  if (joint < 1 || joint > n_joints) {
    throw UsageError("parameter '" + name + "' names joint " + digits + " but chain has " +
                     std::to_string(n_joints) + " joints");
  }
  return ParamRef{kind, joint};
}

std::string param_kind_letters(ParamKind kind) {
  switch (kind) {
    case ParamKind::Mass: return "M";
    case ParamKind::MX: return "MX";
    case ParamKind::MY: return "MY";
    case ParamKind::MZ: return "MZ";
    case ParamKind::XX: return "XX";
    case ParamKind::XY: return "XY";
    case ParamKind::XZ: return "XZ";
    case ParamKind::YY: return "YY";
    case ParamKind::YZ: return "YZ";
    case ParamKind::ZZ: return "ZZ";
    case ParamKind::IA: return "IA";
    case ParamKind::FV: return "FV";
  }
  return "?";
}

int ParamVector::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<LinkParams> ChainModel::assemble_links(const Vec& values) const {
  if (values.size() != phi.size()) {
    throw UsageError("parameter vector length mismatch");
  }
  std::vector<LinkParams> links(n_joints);
  for (int j = 0; j < phi.size(); ++j) {
    ParamRef ref = parse_param_name(phi.names[j], n_joints);
    LinkParams& lp = links[ref.joint - 1];
    double v = values[j];
    switch (ref.kind) {
      case ParamKind::Mass: lp.mass += v; break;
      case ParamKind::MX: lp.first_moment.x() += v; break;
      case ParamKind::MY: lp.first_moment.y() += v; break;
      case ParamKind::MZ: lp.first_moment.z() += v; break;
      case ParamKind::XX: lp.inertia(0, 0) += v; break;
      case ParamKind::XY: lp.inertia(0, 1) += v; lp.inertia(1, 0) += v; break;
      case ParamKind::XZ: lp.inertia(0, 2) += v; lp.inertia(2, 0) += v; break;
      case ParamKind::YY: lp.inertia(1, 1) += v; break;
      case ParamKind::YZ: lp.inertia(1, 2) += v; lp.inertia(2, 1) += v; break;
      case ParamKind::ZZ: lp.inertia(2, 2) += v; break;
      case ParamKind::IA: lp.rotor_inertia += v; break;
      case ParamKind::FV: lp.viscous_friction += v; break;
    }
  }
  return links;
}

Vec ChainModel::friction_diag() const {
  Vec d = Vec::Zero(n_joints);
  for (int j = 0; j < phi.size(); ++j) {
    ParamRef ref = parse_param_name(phi.names[j], n_joints);
    if (ref.kind == ParamKind::FV) d[ref.joint - 1] += phi.values[j];
  }
  return d;
}

void ChainModel::validate() const {
  if (n_joints < 1) throw UsageError("chain needs at least one joint");
  if (static_cast<int>(frames.size()) != n_joints) {
    throw UsageError("frame count does not match n_joints");
  }
  for (const DhRow& row : frames) {
    if (!std::isfinite(row.alpha) || !std::isfinite(row.a) || !std::isfinite(row.theta_offset) ||
        !std::isfinite(row.d)) {
      throw UsageError("non-finite DH entry");
    }
  }
  if (torque_limit.size() != n_joints) throw UsageError("torque_limit length mismatch");
  if ((torque_limit.array() <= 0.0).any()) throw UsageError("torque_limit must be positive");
  if (phi.values.size() != static_cast<Eigen::Index>(phi.names.size())) {
    throw UsageError("phi names/values length mismatch");
  }
  if (!phi.values.allFinite()) throw UsageError("non-finite parameter value");
  for (int j = 0; j < phi.size(); ++j) {
    ParamRef ref = parse_param_name(phi.names[j], n_joints);
    if (ref.kind == ParamKind::FV && phi.values[j] < 0.0) {
      throw UsageError("negative viscous friction: " + phi.names[j]);
    }
  }
  if (!gravity.allFinite()) throw UsageError("non-finite gravity");
}

ChainModel load_chain_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open model file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw UsageError("model file " + path + ": " + e.what());
  }

  ChainModel model;
  try {
    const auto& joints = doc.at("joints");
    model.n_joints = static_cast<int>(joints.size());
    for (const auto& row : joints) {
      DhRow dh;
      dh.alpha = row.at("alpha").get<double>();
      dh.a = row.at("a").get<double>();
      dh.theta_offset = row.value("theta_offset", 0.0);
      dh.d = row.at("d").get<double>();
      model.frames.push_back(dh);
    }
    const auto& grav = doc.at("gravity");
    model.gravity = Vec3(grav.at(0).get<double>(), grav.at(1).get<double>(),
                         grav.at(2).get<double>());
    const auto& lim = doc.at("torque_limit");
    model.torque_limit.resize(model.n_joints);
    for (int i = 0; i < model.n_joints; ++i) model.torque_limit[i] = lim.at(i).get<double>();
    const auto& params = doc.at("params");
    model.phi.values.resize(static_cast<Eigen::Index>(params.size()));
    int k = 0;
    for (const auto& [name, value] : params.items()) {
      model.phi.names.push_back(name);
      model.phi.values[k++] = value.get<double>();
    }
  } catch (const json::exception& e) {
    throw UsageError("model file " + path + ": " + e.what());
  }
  model.validate();
  return model;
}

void save_chain_model(const ChainModel& model, const std::string& path) {
  json doc;
  for (const DhRow& row : model.frames) {
    doc["joints"].push_back({{"alpha", row.alpha},
                             {"a", row.a},
                             {"theta_offset", row.theta_offset},
                             {"d", row.d}});
  }
  doc["gravity"] = {model.gravity.x(), model.gravity.y(), model.gravity.z()};
  for (int i = 0; i < model.n_joints; ++i) doc["torque_limit"].push_back(model.torque_limit[i]);
  json params = json::object();
  for (int j = 0; j < model.phi.size(); ++j) params[model.phi.names[j]] = model.phi.values[j];
  doc["params"] = params;

  std::ofstream out(path);
  if (!out) throw UsageError("cannot write model file: " + path);
  out << doc.dump(2) << "\n";
}

void save_param_fragment(const ParamVector& phi, const std::string& path) {
  json params = json::object();
  for (std::size_t j = 0; j < phi.names.size(); ++j) {
    params[phi.names[j]] = phi.values[static_cast<Eigen::Index>(j)];
  }
  json doc;
  doc["params"] = params;
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write parameter fragment: " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace bilat
