#include "pcac/controller.hpp"

#include "pcac/error.hpp"

namespace pcac {

void PcacConfig::validate() const {
    rls.validate();
    bpre.validate();
    const auto state_dim = static_cast<Eigen::Index>(rls.order) * rls.outputs;
    if (bpre.R1.rows() != state_dim) {
        throw Error(ErrorCode::InvalidArgument, "bpre.R1: must be (order*p) square");
    }
    if (bpre.R2.rows() != rls.inputs) throw Error(ErrorCode::InvalidArgument, "bpre.R2: must be m x m");
    if (control_start < 0) throw Error(ErrorCode::InvalidArgument, "control_start: must be nonnegative");
}

PcacState::PcacState(const PcacConfig& cfg)
    : rls(cfg.rls),
      model(assemble_model(cfg.rls.theta0, cfg.rls.order, cfg.rls.outputs, cfg.rls.inputs)),
      x_m(Vector::Zero(static_cast<Eigen::Index>(cfg.rls.order) * cfg.rls.outputs)),
      u_next(Vector::Zero(cfg.rls.inputs)) {
    try {
        gain = bpre_gain(model.A, model.B, cfg.bpre).K;
    } catch (const Error&) {
        gain = Matrix::Zero(cfg.rls.inputs, model.A.rows());
    }
}

PcacStepResult pcac_step(PcacState& state, const Vector& y, const Vector& u_applied, const PcacConfig& cfg) {
    PcacStepResult out;
    out.u_next = Vector::Zero(cfg.rls.inputs);
    const long k = state.k++;
    if (!cfg.identify_during_open_loop && k < cfg.control_start) {
        state.u_next = out.u_next;
        return out;
    }

    try {
        // x_{m,k} uses y_{k-i}, u_{k-i} for i >= 1, i.e. the history before this update.
        const std::vector<Vector> past_y(state.rls.past_y.begin(), state.rls.past_y.end());
        const std::vector<Vector> past_u(state.rls.past_u.begin(), state.rls.past_u.end());

        const RlsStepInfo info = rls_update(state.rls, cfg.rls, y, u_applied);
        out.beta = info.forgetting.beta;
        if (info.forgetting.degenerate) {
            out.flagged = true;
            out.reason = "DegenerateVariance";
        }

        BocfModel model = assemble_model(state.rls.theta, cfg.rls.order, cfg.rls.outputs, cfg.rls.inputs);
        const Vector x_now = assemble_state(model, y, past_y, past_u);
        Vector x_next = model.A * x_now + model.B * u_applied;
        BpreResult gain = bpre_gain(model.A, model.B, cfg.bpre);

        Vector u = Vector::Zero(cfg.rls.inputs);
        if (k + 1 >= cfg.control_start) u = gain.K * x_next;
        if (!u.allFinite() || !x_next.allFinite()) {
            throw Error(ErrorCode::InvalidArgument, "non-finite control");
        }

        state.model = std::move(model);
        state.gain = std::move(gain.K);
        state.x_m = std::move(x_next);
        out.u_next = u;
    } catch (const Error& e) {
        out.flagged = true;
        out.reason = std::string(to_string(e.code()));
        out.u_next.setZero();
    }
    state.u_next = out.u_next;
    return out;
}

ControllerRealization controller_realization(const BocfModel& model, const Matrix& K) {
    require_dims(K.rows() == model.inputs && K.cols() == model.A.rows(), "controller_realization: K shape");
    ControllerRealization c;
    c.Bc = output_injection(model);
    c.Ac = model.A - c.Bc * model.C + model.B * K;
    c.Cc = K;
    return c;
}

StateSpace closed_loop_realization(const StateSpace& plant, const ControllerRealization& ctrl) {
    require_dims(plant.is_strictly_proper(), "closed_loop_realization: plant must be strictly proper");
    const auto n = plant.states();
    const auto nc = ctrl.Ac.rows();
    const auto m = plant.inputs();
    const auto p = plant.outputs();
    require_dims(ctrl.Ac.cols() == nc && ctrl.Bc.rows() == nc && ctrl.Cc.cols() == nc,
                 "closed_loop_realization: controller shapes");
    require_dims(ctrl.Bc.cols() == p && ctrl.Cc.rows() == m, "closed_loop_realization: controller/plant I/O");

    Matrix A(n + nc, n + nc);
    A << plant.A(), plant.B() * ctrl.Cc, ctrl.Bc * plant.C(), ctrl.Ac;
    Matrix B = Matrix::Zero(n + nc, m);
    B.topRows(n) = plant.B();
    Matrix C = Matrix::Zero(p, n + nc);
    C.leftCols(n) = plant.C();
    return StateSpace::strictly_proper(std::move(A), std::move(B), std::move(C));
}

}  // namespace pcac
