#pragma once
#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace symcap {

/// Polar grid in normalized coordinates: r_i = i/(n_r-1) in [0,1],
/// theta_j = 2 pi j / n_theta. Row-major storage, index i * n_theta + j.
struct PolarGrid {
    int n_r = 0;
    int n_theta = 0;
    double r_at(int i) const { return static_cast<double>(i) / (n_r - 1); }
    double theta_at(int j) const;
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_theta + j; }
    std::size_t size() const { return static_cast<std::size_t>(n_r) * n_theta; }
};

/// Time-dependent Hamiltonian on the closed disk of radius `radius` (area
/// pi radius^2) with omega = dx^dy. X_H = (H_y, -H_x), so H = c(s^2-|z|^2)/2
/// rotates counterclockwise with angular speed c.
class DiskHamiltonian {
public:
    explicit DiskHamiltonian(double radius) : radius_(radius) {}
    virtual ~DiskHamiltonian() = default;
    double radius() const { return radius_; }
    double area() const;
    virtual double value(double t, double x, double y) const = 0;
    virtual std::array<double, 2> gradient(double t, double x, double y) const = 0;
    /// Times in (0,1) where the time dependence has a kink; flows step exactly onto them.
    virtual std::vector<double> breakpoints() const { return {}; }

private:
    double radius_;
};

using HamiltonianPtr = std::shared_ptr<const DiskHamiltonian>;

/// Wraps callables for value and gradient.
HamiltonianPtr make_function_hamiltonian(double radius, std::function<double(double, double, double)> value,
                                         std::function<std::array<double, 2>(double, double, double)> gradient);

/// H = c (s^2 - |z|^2) / 2: rigid rotation by c per unit time.
HamiltonianPtr make_rotation_hamiltonian(double radius, double c);

/// Autonomous twist: angular speed inner_rate for |z| <= r0*s, outer_rate for
/// |z| >= r1*s, C^5 polynomial transition in between. H vanishes on the boundary.
HamiltonianPtr make_twist_hamiltonian(double radius, double inner_rate, double outer_rate, double r0, double r1);

/// One Fourier mode amp * cos(k theta - phase + 2 pi m t) in a perturbation.
struct AngularMode {
    double amp = 0.0;
    int k = 1;
    double phase = 0.0;
    int m = 0;
};
/// bump(|z|/s) * sum of modes; bump = (1 - x^2)^6 with x mapping (r0, r1) onto (-1, 1).
HamiltonianPtr make_annular_perturbation(double radius, double r0, double r1, std::vector<AngularMode> modes);

/// (1 - |z|^2/s^2) * P(t, x, y) with P a random polynomial of total degree <= 3
/// whose coefficients move as a + b cos 2 pi t + c sin 2 pi t. Amplitude scales all coefficients.
HamiltonianPtr make_random_hamiltonian(double radius, std::uint64_t seed, double amplitude);

HamiltonianPtr make_sum_hamiltonian(HamiltonianPtr a, HamiltonianPtr b);

/// Generates psi o phi when `first` generates phi and `second` generates psi:
/// K_t = 2 H_{2t} on [0,1/2], 2 G_{2t-1} on [1/2,1].
HamiltonianPtr make_concatenated_hamiltonian(HamiltonianPtr first, HamiltonianPtr second);

/// K_t = -H_{1-t}, generating the inverse isotopy.
HamiltonianPtr make_reversed_hamiltonian(HamiltonianPtr h);

/// Hamiltonian sampled on t-nodes k/(n_t-1) (or k/n_t when periodic) times a
/// polar grid; tensor-product Lagrange interpolation in all variables.
class GridHamiltonian : public DiskHamiltonian {
public:
    GridHamiltonian(double radius, PolarGrid grid, int n_t, bool periodic_in_t, std::vector<double> values);
    double value(double t, double x, double y) const override;
    std::array<double, 2> gradient(double t, double x, double y) const override;
    const PolarGrid& grid() const { return grid_; }
    int n_t() const { return n_t_; }
    bool periodic_in_t() const { return periodic_; }
    const std::vector<double>& values() const { return values_; }
    /// The t-nodes: the interpolation stencil moves there.
    std::vector<double> breakpoints() const override;
    /// Value and polar partials (d/dr in normalized r, d/dtheta) at time t.
    std::array<double, 3> polar_eval(double t, double r, double theta) const;

private:
    PolarGrid grid_;
    int n_t_;
    bool periodic_;
    std::vector<double> values_;  // [k][i][j]
};

/// Exact perturbation u with its gradient, both in Cartesian disk coordinates.
struct ExactTerm {
    std::function<double(double, double)> u;
    std::function<std::array<double, 2>(double, double)> grad;
};

/// Random smooth u (polynomial of degree <= 3) for primitive-change tests.
ExactTerm make_random_exact_term(double radius, std::uint64_t seed, double amplitude);

/// A primitive of the area form on the unit strip: lambda = h(r, theta) dtheta (+ du).
/// half_r2_dtheta is lambda_0 = (x dy - y dx)/2 on the disk of radius s, that is h = s^2 r^2 / 2;
/// custom_grid carries sampled h and density F = dh/dr (surface-of-section data).
class PrimitiveOneForm {
public:
    enum class Kind { half_r2_dtheta, custom_grid };

    static PrimitiveOneForm standard(double radius);
    static PrimitiveOneForm from_grid(PolarGrid grid, std::vector<double> h, std::vector<double> density);
    PrimitiveOneForm with_exact(ExactTerm u) const;

    Kind kind() const { return kind_; }
    double radius() const { return radius_; }
    const std::optional<ExactTerm>& exact() const { return exact_; }
    bool has_exact() const { return exact_.has_value(); }

    /// Coefficient h of dtheta and the area density F at (r, theta).
    double h(double r, double theta) const;
    double density(double r, double theta) const;
    double u_polar(double r, double theta) const;
    /// lambda(v) at a Cartesian point of the disk (standard kind only).
    double eval(double x, double y, double vx, double vy) const;
    /// Integral over the boundary circle; the action of one full rotation.
    double boundary_integral() const;
    /// Total area of the form.
    double area() const { return boundary_integral(); }

private:
    Kind kind_ = Kind::half_r2_dtheta;
    double radius_ = 1.0;
    PolarGrid grid_{};
    std::vector<double> h_, density_;
    std::optional<ExactTerm> exact_;
};

enum class Provenance { hamiltonian_isotopy, section_data, composition };
std::string provenance_name(Provenance p);

/// Area-preserving disk map sampled on a polar grid with a continuous angle lift.
struct DiskMapLift {
    PolarGrid grid;
    double area = 0.0;
    std::vector<double> R;      ///< normalized image radius
    std::vector<double> Theta;  ///< lifted image angle, Theta(r, theta + 2 pi) = Theta + 2 pi
    Provenance provenance = Provenance::hamiltonian_isotopy;
    int degree_offset = 0;      ///< number of full rotations composed by degree_shift
    HamiltonianPtr hamiltonian; ///< set for hamiltonian_isotopy
    double t_end = 1.0;
    int flow_steps = 256;
    /// section_data: action of the recorded lift (return time minus degree times binding action)
    std::vector<double> recorded_sigma;
    std::optional<PrimitiveOneForm> section_form;

    /// Interpolated image of a normalized polar point: (R, Theta lift).
    /// Rebuilds the periodic angle shift each call; not for inner loops.
    std::array<double, 2> apply(double r, double theta) const;
};

struct FlowOptions {
    int steps = 256;
};

/// Single trajectory of the isotopy from t0 to t1.
struct DiskFlowPoint {
    double x = 0.0, y = 0.0;
    double angle_change = 0.0;  ///< continuous change of arg z along the path
    double action = 0.0;        ///< integral of lambda(dz/dt) + H_t(z) dt (only when lambda is given)
};
DiskFlowPoint flow_point(const DiskHamiltonian& H, double x, double y, double t0, double t1, int steps,
                         const PrimitiveOneForm* lambda = nullptr);

/// Time-t_end map of the isotopy on the grid, with angle lift from the isotopy.
DiskMapLift flow_from_hamiltonian(HamiltonianPtr H, const PolarGrid& grid, double t_end = 1.0,
                                  const FlowOptions& opt = {});

/// Wraps section return data (degree-1 lift) as a disk map on the section's own area form.
struct SectionReturnData;
DiskMapLift lift_from_section(const SectionReturnData& data);
PrimitiveOneForm section_primitive(const SectionReturnData& data);

/// second o first on first's grid, by interpolation. When second moves the
/// origin, the angle branch is ambiguous where first's image lies within about
/// one radial grid step of the center.
DiskMapLift compose(const DiskMapLift& second, const DiskMapLift& first);

struct ActionOptions {
    double residual_tol = 1e-5;
    bool check_residual = true;
};
struct ActionField {
    PolarGrid grid;
    std::vector<double> sigma;
    double residual = 0.0;  ///< sup over interior nodes of |phi^* lambda - lambda - d sigma|
};

/// sigma of the lift for the given primitive; throws ComputationError when the
/// residual check fails.
ActionField action_of_lift(const DiskMapLift& lift, const PrimitiveOneForm& lambda, const ActionOptions& opt = {});

/// Sup-norm residual of phi^* lambda - lambda - d sigma on interior nodes.
double action_residual(const DiskMapLift& lift, const PrimitiveOneForm& lambda, const std::vector<double>& sigma);

/// Integral of sigma * omega over the disk.
double calabi(const DiskMapLift& lift, const PrimitiveOneForm& lambda, const ActionOptions& opt = {});
double integrate_over_disk(const PolarGrid& grid, const std::vector<double>& f, const PrimitiveOneForm& lambda);

/// Composes with k full rotations: Theta += 2 pi k, actions shift by k * boundary_integral.
DiskMapLift degree_shift(const DiskMapLift& lift, int k);

/// Max over interior nodes of |det(D phi) F(phi)/F - 1|.
double area_defect(const DiskMapLift& lift, const PrimitiveOneForm& form);

struct DiskFixedPoint {
    double r = 0.0, theta = 0.0;
    double sigma = 0.0;
    bool elliptic = false;
    double trace = 0.0;
    int winding = 0;  ///< (Theta - theta) / 2 pi at the point; 0 for fixed points of the lift itself
};
struct FixedPointReport {
    std::vector<DiskFixedPoint> points;
    bool foliated = false;  ///< (almost) every node is fixed
};

struct FixedPointOptions {
    double scan_tol = 1e-3;
    double newton_tol = 1e-10;
    double merge_tol = 1e-5;
};
FixedPointReport fixed_points_with_actions(const DiskMapLift& lift, const PrimitiveOneForm& lambda,
                                           const FixedPointOptions& opt = {});

/// Polynomial step: 0 for x <= 0, 1 for x >= 1, C^5 at both ends.
double smooth_step(double x, double* deriv = nullptr);

}  // namespace symcap
