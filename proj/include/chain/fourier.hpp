#pragma once

#include <Eigen/Core>

#include <complex>

#include "chain/params.hpp"
#include "chain/spectral.hpp"

namespace chain {

// Hermitian-symmetric complex vector stored as N real degrees of freedom:
// [z_0, Re z_1, Im z_1, ..., (z_{N/2} for even N)]. Symmetry z_k = conj(z_{N-k})
// holds by construction of the storage.
class ModeVector {
  public:
    explicit ModeVector(int n);

    // Validates Hermitian symmetry of a full complex vector; throws
    // SymmetryError when it is broken beyond tol (scaled by the vector norm).
    static ModeVector from_complex(const Eigen::VectorXcd& z, double tol = 1e-9);

    int size() const { return n_; }
    double z0() const { return a_[0]; }
    void set_z0(double v) { a_[0] = v; }

    std::complex<double> mode(int k) const;
    // Sets mode k and its conjugate partner. Throws SymmetryError when a
    // nonzero imaginary part is assigned to a real mode (k = 0 or N/2).
    void set_mode(int k, std::complex<double> v);

    Eigen::VectorXcd to_complex() const;

    const Eigen::VectorXd& raw() const { return a_; }
    Eigen::VectorXd& raw() { return a_; }

    ModeVector scaled(double s) const;

  private:
    int n_;
    Eigen::VectorXd a_;
};

// Forward transform x_hat_j = sum_k w^{-jk} x_k, w = exp(i 2 pi / N).
ModeVector to_fourier(const StateVector& x);

// Inverse transform x_k = (1/N) sum_j w^{jk} x_hat_j. The result is real by
// symmetry of the storage; a larger-than-rounding imaginary residue throws.
StateVector from_fourier(const ModeVector& zhat);

// ((1/N) sum_j |x_hat_j|^p)^{1/p}; p = infinity gives max_j |x_hat_j|.
double norm_pF(const ModeVector& zhat, double p);

// Box geometry for the saddle neighborhood: |z_k| <= delta r_k / sqrt|lambda_k|
// with r_0 = 1 and r_k = 4 min(k, N-k)^alpha.
struct NeighborhoodSpec {
    double delta = 0.0;
    double K = 1.0;
    double alpha = 0.125;
    double rho = 0.2;
    Eigen::VectorXd r;

    // delta = sqrt(K eps |ln eps|) capped at 0.1, where the quartic error
    // bound of the quadratic approximation stays small.
    static NeighborhoodSpec approximation_default(int n, double epsilon);
    // Same profile capped at 0.9 (1 - rho) instead, keeping the strip clear
    // of the target balls while letting it widen at desk-scale epsilon.
    static NeighborhoodSpec capacity_default(int n, double epsilon, double rho = 0.2);
    static NeighborhoodSpec custom(int n, double delta, double alpha, double rho);
};

// Quadratic part -z_0^2/2 + (1/2) sum_{k>=1} lambda_k |z_k|^2.
double quadratic_F0(const ModeVector& z, const Spectrum& s);

// Full energy in mode coordinates; equals eval_G(from_fourier(N z)).
double g_tilde(const ModeVector& z, const ChainParams& p);

// g_tilde - quadratic_F0, evaluated as the explicit quartic term (1/4N)||x||_4^4
// so nonnegativity holds exactly.
double remainder_quartic(const ModeVector& z, const ChainParams& p);

// Closed-box membership test (boundary included).
bool in_C_delta(const ModeVector& z, const NeighborhoodSpec& spec, const Spectrum& s);

// Separable corridor model: 1D double well in z_0 plus quadratic transverse
// energy plus the z_0^2-coupled cross term.
double lower_corridor_approx(const ModeVector& z, const Spectrum& s);

// --- numeric constants for the approximation error bounds ---

// Upper bound on zeta(s), s > 1: 200000-term partial sum + integral tail.
double zeta_upper_bound(double s);

// K_q^q = sum_{k>=1} (4 k^alpha / k)^q = 4^q zeta((1-alpha) q).
double mode_sum_Kq_pow_q(double q, double alpha);

// B_p = D_q^p with D_q^q = 1 + (2/a^{q/2}) K_q^q, q conjugate to p; `a` is
// the curvature floor min_k lambda_k / k^2 of the instances under test.
double quartic_norm_bound_Bp(double p, double alpha, double a = 1.0);

// Coefficient of delta^4 in the quadratic-approximation error: B_4/4.
double quadratic_error_coeff(double alpha, double a = 1.0);

// Coefficient of delta^3 in the corridor-approximation error: 4 B_3 + B_4 * delta_cap.
double corridor_error_coeff(double alpha, double delta_cap, double a = 1.0);

}  // namespace chain
