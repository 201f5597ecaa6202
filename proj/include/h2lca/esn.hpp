#pragma once

#include "h2lca/incidence.hpp"
#include "h2lca/system_model.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

namespace h2lca {

/// Net state: q_b holds operand tokens per (operand, buffer) place,
/// q_e holds in-flight firing tokens per capability.
struct Marking {
    Eigen::VectorXd q_b;
    Eigen::VectorXd q_e;
};

/// Elementary net built over a model's reduced incidence structure.
/// Places are the reduced matrix rows; transitions are capabilities.
/// Immutable after construction; safe to share across threads.
class EngineeringSystemNet {
public:
    explicit EngineeringSystemNet(const SystemModel& model);

    const IncidenceMatrix& incidence() const { return m_net; }
    const Eigen::MatrixXd& m_plus() const { return m_pos; }
    const Eigen::MatrixXd& m_minus() const { return m_neg; }
    Eigen::Index places() const { return m_net.values.rows(); }
    Eigen::Index transitions() const { return m_net.values.cols(); }

    /// Place index for (operand, buffer); -1 if that pair carries no flow.
    int place(const std::string& operand, const std::string& buffer) const;
    /// Transition index for a capability id; -1 if unknown.
    int transition(const std::string& capability) const;
    std::string place_label(Eigen::Index i) const;

    Marking zero_marking() const;

private:
    IncidenceMatrix m_net;   // M = M+ - M-, reduced
    Eigen::MatrixXd m_pos;   // M+, same reduced row set
    Eigen::MatrixXd m_neg;   // M-
};

/// One state-transition update:
///   q_b' = q_b + M+ u_plus dt - M- u_minus dt
///   q_e' = q_e + (u_minus - u_plus) dt
Marking step(const EngineeringSystemNet& net, const Marking& q, const Eigen::VectorXd& u_minus,
             const Eigen::VectorXd& u_plus, double dt);

enum class FiringMode {
    /// Distinct u- / u+ per step (Eqs. with in-flight tokens).
    Stepped,
    /// u- == u+ each step; q_b advances by the net matrix, q_e is constant.
    Instantaneous
};

struct FiringSchedule {
    /// Stepped mode uses u_minus[k] and u_plus[k]; instantaneous mode uses
    /// u_plus[k] alone (u_minus must be empty or identical).
    std::vector<Eigen::VectorXd> u_minus;
    std::vector<Eigen::VectorXd> u_plus;
    double dt = 1.0;
};

/// Runs K steps and returns K+1 markings (initial state included).
std::vector<Marking> simulate(const EngineeringSystemNet& net, const Marking& initial,
                              const FiringSchedule& schedule, FiringMode mode);

struct LcaResult {
    Eigen::VectorXd firing;       // x = A^-1 dy
    Eigen::VectorXd delta_e;      // B x
    double condition_estimate = 0.0;
    std::vector<std::string> warnings; // reverse-operation notes, by capability id
};

/// Factors the square product block A once; solve() is then cheap enough
/// for per-hour use over a year. Construction throws NumericalError when
/// the condition estimate exceeds 1e12 (the estimate is in the message).
class SteadyStateSolver {
public:
    explicit SteadyStateSolver(const PartitionedMatrix& p);

    LcaResult solve(const Eigen::VectorXd& delta_y) const;
    double condition_estimate() const { return m_cond; }
    const PartitionedMatrix& partitioned() const { return *m_part; }

    static constexpr double kConditionLimit = 1e12;

private:
    std::shared_ptr<const PartitionedMatrix> m_part;
    Eigen::PartialPivLU<Eigen::MatrixXd> m_lu;
    double m_cond = 0.0;
};

/// Convenience single-shot solve of [dy; de] = [A; B] x.
LcaResult steady_state_lca(const PartitionedMatrix& p, const Eigen::VectorXd& delta_y);

struct ConsistencyResult {
    bool ok = false;
    double max_abs_deviation = 0.0;
};

/// Independent check of a steady-state solution: re-applies [A; B] to the
/// solved firing vector by direct accumulation (no factorization) and
/// compares against [delta_y; delta_e].
ConsistencyResult lca_consistency_check(const PartitionedMatrix& p, const Eigen::VectorXd& delta_y,
                                        double tolerance = 1e-9);

/// Long-format CSV `step,place,value` for a simulated trajectory.
std::string trajectory_to_csv(const EngineeringSystemNet& net, const std::vector<Marking>& traj);

/// JSON mirror of trajectory_to_csv.
std::string trajectory_to_json(const EngineeringSystemNet& net, const std::vector<Marking>& traj);

} // namespace h2lca
