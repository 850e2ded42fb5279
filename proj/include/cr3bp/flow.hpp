#pragma once

#include <vector>

#include "cr3bp/section_maps.hpp"

namespace cr3bp {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 1e30;
    double max_time = 200.0;  // flow-time budget for section searches
    enum class Projection { EveryStep, Never } projection = Projection::EveryStep;

    void validate() const {
        if (!(rel_tol > 0.0 && abs_tol > 0.0 && max_time > 0.0 && max_step > 0.0))
            throw ConfigError("IntegratorConfig: tolerances and budgets must be positive");
    }
};

struct TrajectorySample {
    double t = 0.0;       // X_Q flow time
    double t_phys = 0.0;  // accumulated physical time, dt = g ||y|| dtau
    RegState state;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;  // accepted steps, initial point included
    const TrajectorySample& end() const { return samples.back(); }
};

// Integrates the X_Q flow for flow time t_final (either sign), renormalizing
// onto T*S^3 after every accepted step.  Throws StepFailure on step-size
// underflow.
Trajectory integrate(const RegState& r0, double t_final, const SystemSpec& spec,
                     const IntegratorConfig& cfg);

struct UnregTrajectory {
    std::vector<std::pair<double, UnregState>> samples;
    const UnregState& end() const { return samples.back().second; }
};

// Unregularized flow of X_H in physical time.
UnregTrajectory integrate_unreg(const UnregState& s0, double t_final, const SystemSpec& spec,
                                const IntegratorConfig& cfg);

struct ReturnRecord {
    RegState start;
    RegState end;
    double return_time = 0.0;           // X_Q flow time
    double physical_return_time = 0.0;  // same return in the physical clock
    double angle_swept = 0.0;           // lifted angle increase, 2*pi per iterate
    double q_drift = 0.0;               // |Q(end) - Q(start)|
    std::vector<std::pair<double, double>> crossings;  // (flow time, lifted angle)
};

// First-return map to the page through `start`: integrates until the lifted
// angle of the section value has increased by exactly 2*pi*n_iterates, with
// the crossing time refined to 1e-12 in angle.  Throws OnBinding when
// |Theta(start)| < 1e-6 and NoReturn when cfg.max_time is exhausted.
ReturnRecord return_map(const RegState& start, const SystemSpec& spec, const SectionMap& section,
                        const IntegratorConfig& cfg, int n_iterates = 1);

enum class InvolutionKind { r, rho1, rho2 };

// Coordinate involutions of T*S^3:
//   r:    flips (xi3, eta3)
//   rho1: (xi0,-xi1,xi2,xi3; -eta0,eta1,-eta2,-eta3)
//   rho2: (xi0,-xi1,xi2,-xi3; -eta0,eta1,-eta2,eta3)
RegState involution(InvolutionKind kind, const RegState& x);

// Orthonormal tangent frame of the 4-dim page {arg Theta = const} inside
// Sigma_c at x (kernel of the two T*S^3 constraints, dQ and d(arg Theta)).
std::array<TangentReg, 4> page_basis(const RegState& x, const SystemSpec& spec,
                                     const SectionMap& section);

// Projects a nearby ambient point back onto Sigma_c and the page of angle
// `page_angle`: T*S^3 renormalization, eta-scaling onto the Q level, then a
// short flow correction onto the page.
RegState page_retract(const RegState& x, const SystemSpec& spec, const SectionMap& section,
                      const IntegratorConfig& cfg, double page_angle);

// Damped Gauss-Newton on the in-page return displacement, with the on-shell
// and page-angle residuals pinned (the fixed-point set of the angle-2pi map
// is a closed orbit crossing every page; page_angle selects one point of
// it).  Finite-difference Jacobian; converged when ||R(x) - x||_inf < 1e-9.
// Throws NoConvergence after max_iter iterations.
RegState fixed_point_search(double page_angle, const RegState& guess, const SystemSpec& spec,
                            const SectionMap& section, const IntegratorConfig& cfg,
                            int max_iter = 50);

struct PageJacobian {
    std::array<std::array<double, 4>, 4> J{};  // in-page FD Jacobian of the return map
    double symplectic_det = 0.0;               // |det J| corrected by the dalpha^2 densities
    std::array<Complex, 4> eigenvalues{};
};

// Central-difference Jacobian of the return map restricted to the page at x,
// with the symplectic volume ratio and eigenvalues.
PageJacobian return_map_page_jacobian(const RegState& x, const SystemSpec& spec,
                                      const SectionMap& section, const IntegratorConfig& cfg,
                                      double fd_step = 1e-4);

// Ambient symplectic form sum_i deta_i ^ dxi_i evaluated on two tangents.
double symplectic_form(const TangentReg& u, const TangentReg& v);

}  // namespace cr3bp
