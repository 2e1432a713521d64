#pragma once
#include <array>
#include <functional>
#include <vector>

namespace symcap {

/// 2x2 real matrix, row-major (a b; c d).
using Mat2 = std::array<double, 4>;

inline Mat2 mat2_identity() { return {1.0, 0.0, 0.0, 1.0}; }
inline Mat2 mat2_mul(const Mat2& x, const Mat2& y) {
    return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
            x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
}
inline double mat2_det(const Mat2& m) { return m[0] * m[3] - m[1] * m[2]; }
inline double mat2_trace(const Mat2& m) { return m[0] + m[3]; }
inline Mat2 mat2_inverse(const Mat2& m) {
    const double d = mat2_det(m);
    return {m[3] / d, -m[1] / d, -m[2] / d, m[0] / d};
}
/// Rotation by angle t (counterclockwise), i.e. exp(J0 t).
Mat2 mat2_rotation(double t);

/// Path in Sp(2) sampled at increasing times, starting at the identity.
struct Sp2Arc {
    std::vector<double> times;
    std::vector<Mat2> mats;
};

enum class RotationMethod { eigenvalue_lift, winding_limit };

/// Rotation class of a single symplectic matrix in turns, in (-1/2, 1/2]:
/// 0 or 1/2 for real spectra (by sign), +-theta for e^{+-2 pi i theta}.
double rotation_class(const Mat2& m);

/// Rotation number of the lifted arc, in turns. eigenvalue_lift lifts
/// rotation_class continuously; winding_limit iterates the arc `iterations`
/// times and divides the winding of (1,0) by the iteration count.
double rotation_number_of_arc(const Sp2Arc& arc, RotationMethod method, long iterations = 64);

struct PositivityCheck {
    bool is_positive = false;
    double min_eigenvalue = 0.0;
    double rho = 0.0;
};

/// Recovers S = -J0 Phi' Phi^{-1} by finite differences and reports its
/// smallest symmetric eigenvalue over the samples.
PositivityCheck positive_path_check(const Sp2Arc& arc);

/// Symmetric generator (s11, s12, s22) as a function of t.
using SymGenerator = std::function<std::array<double, 3>(double)>;

/// Solves Phi' = J0 S(t) Phi on [0,1] with RK4, returning samples+1 points.
Sp2Arc arc_from_generator(const SymGenerator& S, int samples, int substeps = 8);

bool arc_is_symplectic(const Sp2Arc& arc, double tol = 1e-6);

}  // namespace symcap
