#include "hamlearn/dataset.hpp"

namespace hamlearn {

Eigen::VectorXd Dataset::observed_times() const {
    Eigen::VectorXd out(num_observed());
    for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = t_col(observed[static_cast<std::size_t>(k)]);
    return out;
}

Eigen::MatrixXd Dataset::observed_q() const {
    Eigen::MatrixXd out(num_observed(), dof);
    for (Eigen::Index k = 0; k < out.rows(); ++k) out.row(k) = y_col.row(observed[static_cast<std::size_t>(k)]).head(dof);
    return out;
}

Eigen::MatrixXd Dataset::observed_p() const {
    Eigen::MatrixXd out(num_observed(), dof);
    for (Eigen::Index k = 0; k < out.rows(); ++k) out.row(k) = y_col.row(observed[static_cast<std::size_t>(k)]).tail(dof);
    return out;
}

std::vector<Eigen::Index> Dataset::unobserved() const {
    std::vector<Eigen::Index> out;
    std::size_t next = 0;
    for (Eigen::Index i = 0; i < num_collocation(); ++i) {
        if (next < observed.size() && observed[next] == i) {
            ++next;
            continue;
        }
        out.push_back(i);
    }
    return out;
}

}  // namespace hamlearn
