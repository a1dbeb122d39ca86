#include "hamlearn/two_step.hpp"

#include "hamlearn/errors.hpp"

namespace hamlearn {

Eigen::MatrixXd TrajectoryModel::states(const Eigen::VectorXd &times) const {
    const Eigen::Index m = q.components();
    Eigen::MatrixXd out(times.size(), 2 * m);
    out.leftCols(m) = q.eval(times);
    out.rightCols(m) = p.eval(times);
    return out;
}

Eigen::VectorXd stack_derivative_targets(const Eigen::MatrixXd &qdot, const Eigen::MatrixXd &pdot) {
    const Eigen::Index n = qdot.rows();
    const Eigen::Index m = qdot.cols();
    const FunctionalLayout layout{n, m};
    Eigen::VectorXd z(layout.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            z(layout.p_index(i, j)) = qdot(i, j);
            z(layout.q_index(i, j)) = -pdot(i, j);
        }
    }
    return z;
}

TrajectoryModel fit_two_step(const Dataset &data, const KernelSpec &time_kernel, const KernelSpec &state_kernel, const Ridges &ridges) {
    if (data.num_observed() < 1) throw ContractError("the 2-step fit needs at least one observation");
    if (!state_kernel.is_state_kernel()) throw ContractError("the Hamiltonian kernel must be a state kernel");

    const Eigen::VectorXd s = data.observed_times();
    Interpolant q = fit_values(time_kernel, s, data.observed_q(), ridges.trajectory_q);
    Interpolant p = fit_values(time_kernel, s, data.observed_p(), ridges.trajectory_p);

    const Eigen::Index m = data.dof;
    PointSet anchors(data.num_collocation(), 2 * m);
    anchors.leftCols(m) = q.eval(data.t_col);
    anchors.rightCols(m) = p.eval(data.t_col);
    const Eigen::VectorXd z = stack_derivative_targets(q.eval_derivative(data.t_col), p.eval_derivative(data.t_col));

    LearnedHamiltonian hamiltonian = fit_hamiltonian(state_kernel, anchors, z, ridges.hamiltonian_p, ridges.hamiltonian_q);
    return {std::move(q), std::move(p), std::move(hamiltonian)};
}

}  // namespace hamlearn
