// SPDX-License-Identifier: Apache-2.0

#include "biped_gait/gait_app.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <sstream>

namespace biped {

namespace {

struct Derivative {
  Vec5 dq;
  Vec5 dqdot;
};

Vec4 feed_forward(const PolynomialGait& gait, const RobotParams& robot, double t) {
  const GaitSample x = eval_gait(gait, std::clamp(t, 0.0, gait.duration));
  return inverse_dynamics_split(x.q, x.qdot, x.qddot, robot).torques;
}

Derivative rate(const JointState& s, const Vec4& u, const RobotParams& robot) {
  return {s.qdot, forward_dynamics(s, u, robot)};
}

JointState advance(const JointState& s, const Derivative& d, double h) {
  return {s.q + h * d.dq, s.qdot + h * d.dqdot};
}

JointState rk4(const JointState& s, double t, double dt, const PolynomialGait& gait,
               const RobotParams& robot) {
  const Vec4 u0 = feed_forward(gait, robot, t);
  const Vec4 uh = feed_forward(gait, robot, t + 0.5 * dt);
  const Vec4 u1 = feed_forward(gait, robot, t + dt);
  const Derivative k1 = rate(s, u0, robot);
  const Derivative k2 = rate(advance(s, k1, 0.5 * dt), uh, robot);
  const Derivative k3 = rate(advance(s, k2, 0.5 * dt), uh, robot);
  const Derivative k4 = rate(advance(s, k3, dt), u1, robot);
  return {s.q + dt / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq),
          s.qdot + dt / 6.0 * (k1.dqdot + 2.0 * k2.dqdot + 2.0 * k3.dqdot + k4.dqdot)};
}

nlohmann::ordered_json vec_json(const Vec5& v) {
  auto a = nlohmann::ordered_json::array();
  for (int i = 0; i < kJoints; ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

SimulationOutcome simulate_step(const PolynomialGait& gait, const RobotParams& robot, double dt,
                                int trace_stride) {
  robot.validate();
  if (!(gait.duration > 0.0)) throw GaitError(ErrorCode::kInvalidArgument, "gait duration must be positive");
  if (!(dt > 0.0) || trace_stride < 1) {
    throw GaitError(ErrorCode::kInvalidArgument, "step size and trace stride must be positive");
  }
  SimulationOutcome out;
  const GaitSample start = eval_gait(gait, 0.0);
  out.initial = {start.q, start.qdot};

  JointState s = out.initial;
  double height = forward_kinematics(s.q, robot).swing_foot.y();
  const auto steps = static_cast<long>(std::ceil(2.0 * gait.duration / dt));
  out.trace_time.push_back(0.0);
  out.trace_state.push_back(s);
  for (long n = 0; n < steps; ++n) {
    const double t = n * dt;
    const JointState next = rk4(s, t, dt, gait, robot);
    if (!next.q.allFinite() || !next.qdot.allFinite()) {
      throw GaitError(ErrorCode::kNoImpact, "integration diverged before touchdown");
    }
    const Vec2 foot = forward_kinematics(next.q, robot).swing_foot;
    if (height > 0.0 && foot.y() <= 0.0 && foot.x() > 0.0) {
      const double frac = height / (height - foot.y());
      out.impact_time = t + frac * dt;
      out.pre_impact = {s.q + frac * (next.q - s.q), s.qdot + frac * (next.qdot - s.qdot)};
      const ImpactOutcome hit = impact_velocity_map_unchecked(out.pre_impact.q, out.pre_impact.qdot, robot);
      out.impulse = hit.impulse;
      out.post_impact = relabel_state(out.pre_impact.q, hit.qdot_plus, RelabelMaps::standard());
      out.q_deviation = out.post_impact.q - out.initial.q;
      out.qdot_deviation = out.post_impact.qdot - out.initial.qdot;
      out.max_deviation = std::max(out.q_deviation.cwiseAbs().maxCoeff(),
                                   out.qdot_deviation.cwiseAbs().maxCoeff());
      out.trace_time.push_back(out.impact_time);
      out.trace_state.push_back(out.pre_impact);
      return out;
    }
    s = next;
    height = foot.y();
    if ((n + 1) % trace_stride == 0) {
      out.trace_time.push_back(t + dt);
      out.trace_state.push_back(s);
    }
  }
  throw GaitError(ErrorCode::kNoImpact, "no swing-foot touchdown within twice the step duration");
}

std::string simulation_to_json(const SimulationOutcome& o) {
  nlohmann::ordered_json root;
  root["impact_time"] = o.impact_time;
  root["max_deviation"] = o.max_deviation;
  root["initial"] = {{"q", vec_json(o.initial.q)}, {"qdot", vec_json(o.initial.qdot)}};
  root["pre_impact"] = {{"q", vec_json(o.pre_impact.q)}, {"qdot", vec_json(o.pre_impact.qdot)}};
  root["post_impact"] = {{"q", vec_json(o.post_impact.q)}, {"qdot", vec_json(o.post_impact.qdot)}};
  root["deviation"] = {{"q", vec_json(o.q_deviation)}, {"qdot", vec_json(o.qdot_deviation)}};
  root["impulse"] = {o.impulse.x(), o.impulse.y()};
  return root.dump(2) + "\n";
}

void write_simulation_artifacts(const std::filesystem::path& dir, const SimulationOutcome& outcome) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw GaitError(ErrorCode::kIoError, "cannot create '" + dir.string() + "'");
  std::ostringstream csv;
  csv << "t,q1,q2,q3,q4,q5,dq1,dq2,dq3,dq4,dq5\n" << std::setprecision(12);
  for (std::size_t i = 0; i < outcome.trace_time.size(); ++i) {
    csv << outcome.trace_time[i];
    const JointState& s = outcome.trace_state[i];
    for (int k = 0; k < kJoints; ++k) csv << ',' << s.q[k];
    for (int k = 0; k < kJoints; ++k) csv << ',' << s.qdot[k];
    csv << '\n';
  }
  write_file_atomic(dir / "simulation.csv", csv.str());
  write_file_atomic(dir / "simulate_step.json", simulation_to_json(outcome));
}

}  // namespace biped
