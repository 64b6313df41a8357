#ifndef IPQP_SOLVER_HPP
#define IPQP_SOLVER_HPP

#include <chrono>
#include <functional>

#include "ipqp/equilibration.hpp"
#include "ipqp/ipm.hpp"
#include "ipqp/kkt.hpp"
#include "ipqp/problem.hpp"
#include "ipqp/termination.hpp"

namespace ipqp
{

/// New values for an existing instance. Null members are left as they are.
/// Matrices must keep the sparsity pattern given at setup, and the set of
/// finite bounds in l/u may not change.
struct QpUpdate
{
    const SparseMatrixCsc* P = nullptr;
    const Vec* c = nullptr;
    const SparseMatrixCsc* A = nullptr;
    const Vec* b = nullptr;
    const SparseMatrixCsc* G = nullptr;
    const Vec* h = nullptr;
    const Vec* l = nullptr;
    const Vec* u = nullptr;
};

struct Direction
{
    Vec dx;
    Vec dy;
    Vec dz;
    Vec ds;

    void resize(Index n, Index p, Index m);
};

/// Everything one iteration did, in the scaled space. References point into
/// solver workspaces and are only valid during the callback.
struct IterationTrace
{
    Index iteration = 0;
    const Iterate* before = nullptr;       // iterate the Newton system was built at
    const Iterate* after = nullptr;        // iterate after the corrector step
    const ProximalState* prox = nullptr;   // estimates and penalties used for the residuals
    double delta_used = 0.0;               // regularization present in the factored matrix
    double rho_used = 0.0;
    Index retries = 0;
    const Vec* rx = nullptr;
    const Vec* ry = nullptr;
    const Vec* rz = nullptr;
    const Vec* rs_predictor = nullptr;
    const Vec* rs_corrector = nullptr;
    const Direction* predictor = nullptr;
    const Direction* corrector = nullptr;
    StepInfo predictor_step;
    StepInfo corrector_step;
    TerminationInfo termination; // evaluated on the unscaled `after`
};

using IterationCallback = std::function<void(const IterationTrace&)>;

/// IP-PMM solver instance: setup once, then any number of update/solve calls.
/// Neither update nor solve allocates after setup.
class Solver
{
public:
    Solver() = default;
    Solver(const QpProblem& problem, const Settings& settings) { setup(problem, settings); }

    void setup(const QpProblem& problem, const Settings& settings);

    /// Validates everything before touching the instance; throws
    /// StructuralError (instance unchanged) on a pattern or size mismatch.
    void update(const QpUpdate& values);

    const SolveResult& solve();

    /// Settings may change between solves; only the algorithmic ones take
    /// effect (equilibration parameters apply at the next setup/update).
    Settings& settings() { return m_settings; }
    const Settings& settings() const { return m_settings; }

    void set_callback(IterationCallback callback) { m_callback = std::move(callback); }

    const QpProblem& working_problem() const { return m_working; }
    const QpProblem& scaled_problem() const { return m_scaled; }
    const Equilibration& equilibration() const { return m_ruiz.equilibration(); }
    const KktSystem& kkt() const { return m_kkt; }
    const Iterate& scaled_iterate() const { return m_it; }
    const ProximalState& proximal() const { return m_prox; }
    const SolveResult& result() const { return m_result; }
    bool is_setup() const { return m_is_setup; }

private:
    using clock = std::chrono::steady_clock;

    void equilibrate_and_refresh();
    bool initialize();
    void compute_residuals(const Iterate& it);
    void primal_dual_residuals(const Iterate& it, double& p, double& d);
    bool iterate_finite(const Iterate& it) const;
    bool time_exceeded(clock::time_point start) const;
    void finish(Status status, const Iterate& scaled, clock::time_point start);

    Settings m_settings;
    bool m_is_setup = false;

    QpProblem m_original;            // as given (box bounds kept)
    QpProblem m_working;             // box bounds converted to G rows
    QpProblem m_scaled;              // equilibrated copy of m_working
    std::vector<Index> m_g_orig_pos; // working G position of each original G entry
    Index m_m_orig = 0;
    std::vector<Index> m_box_var;    // variable of each appended box row
    std::vector<double> m_box_sign;  // +1 for an upper bound row, -1 for a lower bound row

    RuizEquilibrator m_ruiz;
    KktSystem m_kkt;
    ResidualEvaluator m_eval;

    Iterate m_it;
    Iterate m_prev;
    Iterate m_best;
    Iterate m_unscaled;
    ProximalState m_prox;
    ProximalState m_prox_prev;
    Direction m_pred;
    Direction m_corr;

    Vec m_px;
    Vec m_aty;
    Vec m_gtz;
    Vec m_ax;
    Vec m_gx;
    Vec m_rx;
    Vec m_ry;
    Vec m_rz;
    Vec m_rs_pred;
    Vec m_rs_corr;
    Vec m_w;

    double m_setup_time = 0.0;
    SolveResult m_result;
    IterationCallback m_callback;
};

} // namespace ipqp

#endif // IPQP_SOLVER_HPP
