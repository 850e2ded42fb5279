#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cr3bp/flow.hpp"
#include "cr3bp/rng.hpp"

namespace cr3bp {

struct SectionValue {
    Complex theta;
    double angle = 0.0;              // arg(theta) in [0, 2 pi)
    double pairing = 0.0;            // Omega(X_Q)
    double normalized_pairing = 0.0; // Omega(X_Q) / (xi3^2 + eta3^2)
};

// Interpolated section evaluation with the angular-form pairing.  At a
// binding point the normalized pairing is reported as a limit from samples
// at radius 1e-4 in the (xi3, eta3) plane.
SectionValue theta_interpolated(const RegState& r, const SystemSpec& spec, const CutoffSpec& cut);

// Angular-form pairing assembled from the closed forms:
//   Omega(X_Q) = (1-xi0)^2 Omega_p^u(X_Q) + rho Omega_g(X_Q) - xi3 eta3 drho(X_Q),
// with the physical part reparametrized from the unregularized rate
// p3^2 + q3^2 F(q) and the geodesic part from the X_Q contraction.
double pairing_assembled(const RegState& r, const SystemSpec& spec, const CutoffSpec& cut);

// Independent check: finite differences of Theta along the integrated flow.
double pairing_flow_fd(const RegState& r, const SystemSpec& spec, const SectionMap& section,
                       const IntegratorConfig& cfg);

// Draws a state on Sigma_c: uniform xi on S^3, uniform tangent eta direction,
// then eta-scaling onto Q = g^2/2; rejects states outside the chart lobe.
// Returns false (and counts a failure) when the draw is rejected.
class SigmaSampler {
public:
    SigmaSampler(const SystemSpec& spec);
    bool draw(Rng& rng, RegState& out) const;
    double lobe_radius() const { return lobe_radius_; }

private:
    const SystemSpec spec_;
    double lobe_radius_;
};

struct ScanReport {
    int n_requested = 0;
    int n_evaluated = 0;
    int n_failed = 0;
    double min_normalized = 0.0;
    double max_normalized = 0.0;
    RegState argmin;
    std::vector<int> histogram;  // 40 bins over [hist_lo, hist_hi]
    double hist_lo = 0.0, hist_hi = 0.0;
    bool pass = false;  // min_normalized > 0
};

// Samples n states on Sigma_c and scans the normalized pairing
// Omega(X_Q)/(xi3^2 + eta3^2); the minimum over samples is the empirical
// quadratic-bound constant.  Throws SamplingFailure when more than 1% of
// draws are rejected.
ScanReport transversality_scan(const SystemSpec& spec, const CutoffSpec& cut, int n_samples,
                               std::uint64_t seed);

// Fixes the cutoff amplitude from a pre-scan: amplitude = C_eps / K with
// C_eps the measured physical-part quadratic constant on {xi0 <= 1-eps} and
// K the measured max of |drho0(X_Q)| at unit amplitude.
CutoffSpec auto_amplitude(const SystemSpec& spec, double delta, double epsilon, int presamples,
                          std::uint64_t seed);

// ---- connected-sum section (energies between H(L1) and H(L2)) ----

enum class Region { Physical, MoonChart, EarthChart };

struct TaggedState {
    Region region = Region::Physical;
    UnregState u;  // global unregularized coordinates (always set)
    RegState r;    // chart coordinates (set for chart regions)
};

// Piecewise section map: the oriented physical value -(p3 + i q3) away from
// both collision loci, the interpolated chart map near each.  Throws
// RegionMismatch when the tag contradicts the coordinates.
SectionValue theta_connected_sum(const TaggedState& s, const SystemSpec& spec,
                                 const CutoffSpec& cut);

// Builds a tagged state from a global unregularized sample (chart assignment
// by distance to the primaries).
TaggedState tag_state(const UnregState& u, const SystemSpec& spec, double chart_radius = 0.3);

struct ConnectedSumReport {
    ScanReport scan;
    double max_overlap_angle_error = 0.0;  // chart-vs-physical angle agreement
    int n_moon = 0, n_earth = 0, n_physical = 0;
};

// Samples the merged lobe for H(L1) < c < H(L2), evaluates the piecewise
// pairing per region, and measures the overlap agreement on chart samples
// with rho = 0.
ConnectedSumReport connected_sum_scan(const SystemSpec& spec, const CutoffSpec& cut,
                                      int n_samples, std::uint64_t seed);

// ---- Lefschetz critical points of (xi, eta) -> xi3 + i eta3 ----

// Multi-start constrained critical-point search on the unit-disk bundle
// {||eta|| <= 1} over S^3.  Returns the distinct points found (expected:
// xi = (0,0,0,+-1), eta = 0).
std::vector<RegState> lefschetz_critical_points(int n_starts, std::uint64_t seed);

// |det| of the complex 6x6 Hessian of xi3 + i eta3 in tangent coordinates at
// a critical point; nonzero means non-degenerate quadratic.
double lefschetz_hessian_det(const RegState& crit);

// CSV/JSON export of a scan (deterministic formatting).
void write_scan_csv(const std::string& path, const std::vector<RegState>& states,
                    const std::vector<double>& pairing, const std::vector<double>& normalized);
void write_scan_json(const std::string& path, const ScanReport& report);

}  // namespace cr3bp
