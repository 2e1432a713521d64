#pragma once
#include "symcap/disk_maps.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace symcap {

/// Strip map on [0,1] x [0,2pi): image (R, Theta lift) of every node.
struct StripMap {
    PolarGrid grid;
    std::vector<double> R;
    std::vector<double> Theta;
    bool monotone = false;  ///< dR/dr > 0 at every node
};

/// Area density F on the strip with A(r,theta) = int_0^r F ds and
/// B(r,theta) = int_0^theta F dtheta'. B is stored as m(r) theta + periodic part.
class AreaDensity {
public:
    static AreaDensity from_grid(PolarGrid grid, std::vector<double> F);
    /// F = s^2 r for the disk of radius s.
    static AreaDensity standard_disk(PolarGrid grid, double radius);
    static AreaDensity from_primitive(PolarGrid grid, const PrimitiveOneForm& form);

    const PolarGrid& grid() const { return grid_; }
    const std::vector<double>& F() const { return F_; }
    const std::vector<double>& A() const { return A_; }

    double F_at(double r, double theta) const;
    /// A at node row i / arbitrary r in column j.
    double A_node(int i, int j) const { return A_[grid_.idx(i, j)]; }
    double A_col(int j, double r, double* dA = nullptr) const;
    double A_at(double r, double theta) const;
    /// B on node row i at any real angle; derivative optional.
    double B_row(int i, double theta, double* dB = nullptr) const;
    double B_at(double r, double theta) const;
    double row_mean(int i) const { return mean_[i]; }
    /// Rows where F vanishes identically (polar edges); angles there come from extrapolation.
    bool degenerate_row(int i) const { return degenerate_[i]; }

private:
    PolarGrid grid_;
    std::vector<double> F_, A_, Bper_, mean_;
    std::vector<bool> degenerate_;
    void finish();
};

/// Generating function on the strip; W(1, .) = 0.
struct GenFunW {
    PolarGrid grid;
    std::vector<double> W;
};

/// Strip lift of a disk map fixing the origin (Theta from the lift datum).
StripMap lift_to_strip(const DiskMapLift& lift);

/// Max over interior nodes of |F(Phi) det DPhi / F - 1|.
double strip_area_defect(const StripMap& phi, const AreaDensity& F);

struct GenFunOptions {
    double area_tol = 1e-4;
    double curl_tol = 1e-4;
};

/// W from a monotone, area-preserving strip map. Also reports the mixed-partial defect.
GenFunW genfun_from_stripmap(const StripMap& phi, const AreaDensity& F, const GenFunOptions& opt = {},
                             double* curl_defect = nullptr);

struct InversionOptions {
    double tol = 1e-12;
    int max_iter = 60;
};

/// Strip map from W; throws HypothesisError naming the failing condition and node.
StripMap stripmap_from_genfun(const GenFunW& W, const AreaDensity& F, const InversionOptions& opt = {});

struct ConditionResult {
    bool pass = true;
    double margin = 0.0;  ///< worst-case slack (negative when failing)
    int i = -1, j = -1;   ///< worst node
};
struct ConditionReport {
    ConditionResult c1, c2, c3, c4;
    /// Fitted boundary forms: W ~ c1 + c2 A near r = 0 and W ~ c3 (A(1) - A) near r = 1.
    double fit_c1 = 0.0, fit_c2 = 0.0, fit_c3 = 0.0;
    double fit_residual_inner = 0.0, fit_residual_outer = 0.0;
    bool all() const { return c1.pass && c2.pass && c3.pass && c4.pass; }
    std::string first_failure() const;
};
/// How the boundary rows must behave: one translation shared by the whole band,
/// or a rotation on each row separately (integrable near-boundary dynamics).
enum class BandMode { translation, per_row_rotation };

struct ConditionOptions {
    int band_rows = 3;
    BandMode band_mode = BandMode::translation;
    double fit_tol = 1e-6;  ///< relative to max |W|
};
ConditionReport check_genfun_conditions(const GenFunW& W, const AreaDensity& F, const ConditionOptions& opt = {});

/// Interior critical points of W and interior fixed points of the strip map.
struct StripPoint {
    double r = 0.0, theta = 0.0;
    double value = 0.0;  ///< W there
};
std::vector<StripPoint> critical_points(const GenFunW& W, double tol = 1e-10);
std::vector<StripPoint> strip_fixed_points(const StripMap& phi, double tol = 1e-10);

/// Largest deviation of the first/last `rows` rows from the band form: R = r and
/// Theta - theta constant (over the band, or along each row).
double band_defect(const StripMap& phi, int rows, BandMode mode = BandMode::translation);

/// Action of the strip map for the primitive A(r,theta) dtheta, integrated from
/// the r = 1 row where it equals int_theta^Theta A(1, .).
std::vector<double> strip_action(const StripMap& phi, const AreaDensity& F);

struct PipelineOptions {
    int n_steps = 64;
    int band_rows = 3;
    BandMode band_mode = BandMode::translation;
    double band_tol = 1e-8;
    double identity_tol = 1e-5;
    bool check_conditions_each_step = true;
};
struct PipelineFixedPoint {
    double r = 0.0, theta = 0.0;
    double W = 0.0;
    double H_mismatch = 0.0;  ///< max over t-nodes of |H_t - W|
};
struct PipelineResult {
    GenFunW W;
    int n_t = 0;                    ///< time nodes t_k = k/(n_t-1)
    std::vector<double> H;          ///< [k][i][j] on the same strip grid
    double min_interior = 0.0;
    double max_identity_error = 0.0;
    std::vector<PipelineFixedPoint> fixed_points;
    ConditionReport conditions;     ///< for W itself
    double inner_rotation = 0.0, outer_rotation = 0.0;
    StripMap time_one;              ///< Phi_1 rebuilt from W
};

/// Builds W_t = t W, recovers Phi_t, extracts H_t with H_t(1, .) = 0 and checks positivity.
PipelineResult positive_hamiltonian_pipeline(const StripMap& phi, const AreaDensity& F,
                                             const PipelineOptions& opt = {});

// ------------------------------------------------------------- planar case

/// Square box [lo, hi]^2 with an n x n node grid.
struct PlanarBox {
    double lo = -1.0, hi = 1.0;
    int n = 65;
    double h() const { return (hi - lo) / (n - 1); }
    double at(int i) const { return lo + i * h(); }
};

/// Planar map sampled on the box nodes: (X, Y) images, row index for x, column for y.
struct PlanarMap {
    PlanarBox box;
    std::vector<double> X, Y;
};

struct PlanarGenFun {
    PlanarBox box;
    std::vector<double> W;  ///< indexed [i over X][j over y]
    double residual = 0.0;  ///< defining-equation residual
};

/// Samples a planar map given as a callable.
PlanarMap sample_planar_map(const PlanarBox& box, const std::function<std::array<double, 2>(double, double)>& f);

/// Time-t map of a planar Hamiltonian H(t, x, y) (omega = dx^dy), RK4.
std::array<double, 2> planar_flow(const std::function<std::array<double, 2>(double, double, double)>& grad_H,
                                  double x, double y, double t0, double t1, int steps);

PlanarGenFun planar_genfun_from_map(const PlanarMap& phi, double c1_limit = 0.2);

/// Map generated by W through X - x = dW/dy(X, y), Y - y = -dW/dX(X, y), resampled on the box.
PlanarMap planar_map_from_genfun(const PlanarGenFun& W, double t = 1.0);

struct PlanarIsotopy {
    int n_t = 0;
    std::vector<double> H;  ///< [k][i][j], time nodes k/(n_t-1), on the box grid in (x, y)
    double min_value = 0.0;
};
PlanarIsotopy planar_isotopy_hamiltonian(const PlanarGenFun& W, int n_steps = 64, double c1_limit = 0.2);

/// Value and gradient of a planar isotopy Hamiltonian by interpolation.
std::array<double, 3> planar_isotopy_eval(const PlanarIsotopy& iso, const PlanarBox& box, double t, double x,
                                          double y);

}  // namespace symcap
