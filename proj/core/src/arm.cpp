// Copyright 2026 The trajopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "trajopt/arm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace trajopt {

namespace {

Eigen::Matrix2Xd blend_jacobian(const ArmParams& params, const Vector& q, int link, double t) {
  Eigen::Matrix2Xd jac = t * point_jacobian(params, q, link);
  if (link > 0) jac += (1.0 - t) * point_jacobian(params, q, link - 1);
  return jac;
}

}  // namespace

void ArmParams::validate() const {
  const auto n = link_lengths.size();
  if (n == 0) throw std::invalid_argument("arm: at least one link required");
  if (masses.size() != n) throw std::invalid_argument("arm: masses must match link count");
  if (static_cast<std::size_t>(initial_q.size()) != n ||
      static_cast<std::size_t>(initial_qdot.size()) != n) {
    throw std::invalid_argument("arm: initial state must match link count");
  }
  for (double m : masses) {
    if (!(m >= 0.0)) throw std::invalid_argument("arm: masses must be nonnegative");
  }
  for (double l : link_lengths) {
    if (!(l > 0.0)) throw std::invalid_argument("arm: link lengths must be positive");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("arm: dt must be positive");
  if (horizon < 1) throw std::invalid_argument("arm: horizon must be positive");
  if (obstacle && !(obstacle->radius >= 0.0)) {
    throw std::invalid_argument("arm: obstacle radius must be nonnegative");
  }
  if (!(contact_epsilon > 0.0)) throw std::invalid_argument("arm: contact epsilon must be positive");
  const ArmCostParams& c = costs;
  for (double w : {c.torque_weight, c.velocity_weight, c.posture_weight, c.terminal_log_weight,
                   c.terminal_log_offset, c.terminal_quadratic_weight}) {
    if (!(w >= 0.0)) throw std::invalid_argument("arm: cost weights must be nonnegative");
  }
}

ArmKinematics arm_kinematics(const ArmParams& params, const Vector& q) {
  const int links = params.links();
  ArmKinematics out{Eigen::Matrix2Xd(2, links), Vector(links)};
  double theta = 0.0;
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  for (int k = 0; k < links; ++k) {
    theta += q[k];
    out.absolute_angles[k] = theta;
    p += params.link_lengths[static_cast<std::size_t>(k)] *
         Eigen::Vector2d(std::cos(theta), std::sin(theta));
    out.points.col(k) = p;
  }
  return out;
}

Eigen::Matrix2Xd point_jacobian(const ArmParams& params, const Vector& q, int link) {
  const int links = params.links();
  const ArmKinematics kin = arm_kinematics(params, q);
  Eigen::Matrix2Xd jac = Eigen::Matrix2Xd::Zero(2, links);
  // Column j collects the perpendicular link directions of links j..link.
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for (int k = link; k >= 0; --k) {
    const double th = kin.absolute_angles[k];
    acc += params.link_lengths[static_cast<std::size_t>(k)] *
           Eigen::Vector2d(-std::sin(th), std::cos(th));
    jac.col(k) = acc;
  }
  return jac;
}

Matrix arm_mass_matrix(const ArmParams& params, const Vector& q) {
  const int links = params.links();
  Matrix mass = Matrix::Zero(links, links);
  for (int i = 0; i < links; ++i) {
    const Eigen::Matrix2Xd jac = point_jacobian(params, q, i);
    mass.noalias() += params.masses[static_cast<std::size_t>(i)] * jac.transpose() * jac;
  }
  return symmetrize(mass);
}

Vector arm_velocity_terms(const ArmParams& params, const Vector& q, const Vector& qdot) {
  const int links = params.links();
  const ArmKinematics kin = arm_kinematics(params, q);
  Vector out = Vector::Zero(links);
  Eigen::Vector2d centripetal = Eigen::Vector2d::Zero();
  double omega = 0.0;
  for (int i = 0; i < links; ++i) {
    omega += qdot[i];
    const double th = kin.absolute_angles[i];
    centripetal -= params.link_lengths[static_cast<std::size_t>(i)] * omega * omega *
                   Eigen::Vector2d(std::cos(th), std::sin(th));
    out.noalias() += params.masses[static_cast<std::size_t>(i)] *
                     point_jacobian(params, q, i).transpose() * centripetal;
  }
  return out;
}

ContactResult contact_force(const ArmParams& params, const Vector& q, const Vector& qdot) {
  const int links = params.links();
  ContactResult out;
  out.jacobian = Eigen::Matrix2Xd::Zero(2, links);
  if (!params.obstacle) return out;

  const Obstacle& obs = *params.obstacle;
  const ArmKinematics kin = arm_kinematics(params, q);
  double best = std::numeric_limits<double>::infinity();
  for (int link = 0; link < links; ++link) {
    const Eigen::Vector2d a = kin.link_start(link);
    const Eigen::Vector2d b = kin.points.col(link);
    const Eigen::Vector2d ab = b - a;
    const double t = std::clamp((obs.center - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    const Eigen::Vector2d x = a + t * ab;
    const double dist = (x - obs.center).norm();
    if (dist < best) {
      best = dist;
      out.link = link;
      out.segment_parameter = t;
      out.contact_point = x;
    }
  }

  const Eigen::Vector2d offset = out.contact_point - obs.center;
  const Eigen::Vector2d direction =
      offset.norm() > 0.0 ? Eigen::Vector2d(offset / offset.norm()) : Eigen::Vector2d::UnitX();
  const double gap = std::max(offset.norm() - obs.radius, params.contact_epsilon);
  out.distance_vector = gap * direction;
  out.jacobian = blend_jacobian(params, q, out.link, out.segment_parameter);

  const double approach = out.distance_vector.dot(out.jacobian * qdot);
  out.active = approach <= 0.0;
  if (out.active) out.force = out.distance_vector / (gap * gap * gap);
  return out;
}

ArmEnv::ArmEnv(ArmParams params) : params_(std::move(params)) { params_.validate(); }

Vector ArmEnv::initial_state() const {
  Vector s(state_dim());
  s << params_.initial_q, params_.initial_qdot;
  return s;
}

Vector ArmEnv::acceleration(const Vector& q, const Vector& qdot, const Vector& torque) const {
  const Matrix mass = arm_mass_matrix(params_, q);
  const ContactResult contact = contact_force(params_, q, qdot);
  const Vector rhs = torque + contact.joint_torque() - arm_velocity_terms(params_, q, qdot);
  Eigen::LLT<Matrix> llt(mass);
  if (llt.info() != Eigen::Success) throw DynamicsBlowUp();
  return llt.solve(rhs);
}

Vector ArmEnv::step(int /*n*/, const Vector& state, const Vector& action) const {
  const int links = params_.links();
  if (state.size() != 2 * links || action.size() != links) {
    throw std::invalid_argument("arm: state/action dimension mismatch");
  }
  const Vector q = state.head(links);
  const Vector qdot = state.tail(links);
  const Vector qddot = acceleration(q, qdot, action);
  Vector next(2 * links);
  next.tail(links) = qdot + qddot * params_.dt;
  next.head(links) = q + next.tail(links) * params_.dt;
  if (!next.allFinite()) throw DynamicsBlowUp();
  return next;
}

double ArmEnv::running_cost(int /*n*/, const Vector& state, const Vector& action) const {
  const int links = params_.links();
  const ArmCostParams& c = params_.costs;
  const double posture = state.segment(1, links - 1).squaredNorm();
  return (c.torque_weight * action.squaredNorm() +
          c.velocity_weight * state.tail(links).squaredNorm() + c.posture_weight * posture) *
         params_.dt;
}

double ArmEnv::terminal_cost(const Vector& state) const {
  const ArmCostParams& c = params_.costs;
  const double d = *goal_distance(state);
  return c.terminal_log_weight * std::log(d + c.terminal_log_offset) +
         c.terminal_quadratic_weight * d * d;
}

std::optional<double> ArmEnv::goal_distance(const Vector& terminal_state) const {
  const ArmKinematics kin = arm_kinematics(params_, terminal_state.head(params_.links()));
  return (kin.end_effector() - params_.costs.goal).norm();
}

double ArmEnv::kinetic_energy(const Vector& state) const {
  const int links = params_.links();
  const Vector qdot = state.tail(links);
  return 0.5 * qdot.dot(arm_mass_matrix(params_, state.head(links)) * qdot);
}

ArmControlAffine::ArmControlAffine(ArmParams params) : env_(std::move(params)) {}

Vector ArmControlAffine::drift(int /*n*/, const Vector& state) const {
  const int links = env_.params().links();
  Vector f(2 * links);
  f.head(links) = state.tail(links);
  f.tail(links) = env_.acceleration(state.head(links), state.tail(links), Vector::Zero(links));
  return f;
}

Matrix ArmControlAffine::input_matrix(int /*n*/, const Vector& state) const {
  const int links = env_.params().links();
  Matrix b = Matrix::Zero(2 * links, links);
  const Matrix mass = arm_mass_matrix(env_.params(), state.head(links));
  Eigen::LLT<Matrix> llt(mass);
  if (llt.info() != Eigen::Success) throw DynamicsBlowUp();
  b.bottomRows(links) = llt.solve(Matrix::Identity(links, links));
  return b;
}

double ArmControlAffine::state_cost(int n, const Vector& state) const {
  return env_.running_cost(n, state, Vector::Zero(env_.action_dim())) / env_.params().dt;
}

double ArmControlAffine::terminal_state_cost(const Vector& state) const {
  return env_.terminal_cost(state) / env_.params().dt;
}

}  // namespace trajopt
