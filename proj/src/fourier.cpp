#include "chain/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "chain/accumulate.hpp"
#include "chain/errors.hpp"
#include "chain/potential.hpp"

namespace chain {

namespace {

using cd = std::complex<double>;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 transform; sign = -1 forward, +1 inverse
// (without the 1/N factor).
void fft_pow2(std::vector<cd>& a, int sign) {
    const int n = static_cast<int>(a.size());
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * M_PI / len;
        const cd wlen(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            cd w(1.0, 0.0);
            for (int j = 0; j < len / 2; ++j) {
                const cd u = a[i + j];
                const cd v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

void dft_direct(std::vector<cd>& a, int sign) {
    const int n = static_cast<int>(a.size());
    std::vector<cd> out(n, cd(0.0, 0.0));
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            const double ang = sign * 2.0 * M_PI * static_cast<double>(j) * k / n;
            out[j] += a[k] * cd(std::cos(ang), std::sin(ang));
        }
    }
    a = std::move(out);
}

void transform(std::vector<cd>& a, int sign) {
    if (is_pow2(static_cast<int>(a.size()))) {
        fft_pow2(a, sign);
    } else {
        dft_direct(a, sign);
    }
}

int pair_count(int n) { return (n - 1) / 2; }

}  // namespace

ModeVector::ModeVector(int n) : n_(n), a_(Eigen::VectorXd::Zero(n)) {
    if (n < 1) throw ConfigError("ModeVector requires n >= 1");
}

std::complex<double> ModeVector::mode(int k) const {
    if (k < 0 || k >= n_) throw ConfigError("mode index out of range");
    if (k == 0) return {a_[0], 0.0};
    const int half = n_ / 2;
    if (n_ % 2 == 0 && k == half) return {a_[n_ - 1], 0.0};
    if (k <= pair_count(n_)) return {a_[2 * k - 1], a_[2 * k]};
    const cd conj_partner = mode(n_ - k);
    return std::conj(conj_partner);
}

void ModeVector::set_mode(int k, std::complex<double> v) {
    if (k < 0 || k >= n_) throw ConfigError("mode index out of range");
    const bool real_slot = (k == 0) || (n_ % 2 == 0 && k == n_ / 2);
    if (real_slot) {
        if (v.imag() != 0.0) throw SymmetryError("real mode assigned an imaginary part");
        if (k == 0) {
            a_[0] = v.real();
        } else {
            a_[n_ - 1] = v.real();
        }
        return;
    }
    if (k > pair_count(n_)) {
        set_mode(n_ - k, std::conj(v));
        return;
    }
    a_[2 * k - 1] = v.real();
    a_[2 * k] = v.imag();
}

ModeVector ModeVector::from_complex(const Eigen::VectorXcd& z, double tol) {
    const int n = static_cast<int>(z.size());
    ModeVector m(n);
    const double scale = std::max(1.0, z.cwiseAbs().maxCoeff());
    if (std::abs(z[0].imag()) > tol * scale) {
        throw SymmetryError("mode 0 must be real");
    }
    m.a_[0] = z[0].real();
    if (n % 2 == 0) {
        if (std::abs(z[n / 2].imag()) > tol * scale) {
            throw SymmetryError("middle mode must be real for even length");
        }
        m.a_[n - 1] = z[n / 2].real();
    }
    for (int k = 1; k <= pair_count(n); ++k) {
        if (std::abs(z[k] - std::conj(z[n - k])) > tol * scale) {
            throw SymmetryError("conjugate mode pair mismatch");
        }
        m.a_[2 * k - 1] = z[k].real();
        m.a_[2 * k] = z[k].imag();
    }
    return m;
}

Eigen::VectorXcd ModeVector::to_complex() const {
    Eigen::VectorXcd z(n_);
    for (int k = 0; k < n_; ++k) z[k] = mode(k);
    return z;
}

ModeVector ModeVector::scaled(double s) const {
    ModeVector out(n_);
    out.a_ = s * a_;
    return out;
}

ModeVector to_fourier(const StateVector& x) {
    const int n = static_cast<int>(x.size());
    std::vector<cd> a(n);
    for (int k = 0; k < n; ++k) a[k] = cd(x[k], 0.0);
    transform(a, -1);
    Eigen::VectorXcd z(n);
    for (int k = 0; k < n; ++k) z[k] = a[k];
    // Input is real, so symmetry holds up to rounding; a loose tol absorbs it.
    return ModeVector::from_complex(z, 1e-9);
}

StateVector from_fourier(const ModeVector& zhat) {
    const int n = zhat.size();
    std::vector<cd> a(n);
    for (int k = 0; k < n; ++k) a[k] = zhat.mode(k);
    transform(a, +1);
    StateVector x(n);
    double max_im = 0.0;
    double max_abs = 1.0;
    for (int k = 0; k < n; ++k) {
        x[k] = a[k].real() / n;
        max_im = std::max(max_im, std::abs(a[k].imag()) / n);
        max_abs = std::max(max_abs, std::abs(x[k]));
    }
    if (max_im > 1e-12 * std::max(1.0, max_abs) * n) {
        throw SymmetryError("inverse transform produced a non-real vector");
    }
    return x;
}

double norm_pF(const ModeVector& zhat, double p) {
    if (!(p >= 1.0)) throw ConfigError("norm_pF requires p >= 1");
    const int n = zhat.size();
    if (std::isinf(p)) {
        double m = 0.0;
        for (int k = 0; k < n; ++k) m = std::max(m, std::abs(zhat.mode(k)));
        return m;
    }
    NeumaierSum s;
    for (int k = 0; k < n; ++k) s.add(std::pow(std::abs(zhat.mode(k)), p));
    return std::pow(s.value() / n, 1.0 / p);
}

namespace {

Eigen::VectorXd build_r(int n, double alpha) {
    Eigen::VectorXd r(n);
    r[0] = 1.0;
    for (int k = 1; k < n; ++k) {
        const int j = std::min(k, n - k);
        r[k] = 4.0 * std::pow(static_cast<double>(j), alpha);
    }
    return r;
}

double delta_profile(double K, double epsilon) {
    return std::sqrt(K * epsilon * std::abs(std::log(epsilon)));
}

}  // namespace

NeighborhoodSpec NeighborhoodSpec::approximation_default(int n, double epsilon) {
    NeighborhoodSpec s;
    s.delta = std::min(delta_profile(s.K, epsilon), 0.1);
    s.r = build_r(n, s.alpha);
    return s;
}

NeighborhoodSpec NeighborhoodSpec::capacity_default(int n, double epsilon, double rho) {
    NeighborhoodSpec s;
    s.rho = rho;
    s.delta = std::min(delta_profile(s.K, epsilon), 0.9 * (1.0 - rho));
    s.r = build_r(n, s.alpha);
    return s;
}

NeighborhoodSpec NeighborhoodSpec::custom(int n, double delta, double alpha, double rho) {
    if (!(delta > 0.0) || !(alpha > 0.0) || !(alpha < 0.25)) {
        throw ConfigError("NeighborhoodSpec requires delta > 0 and alpha in (0, 1/4)");
    }
    NeighborhoodSpec s;
    s.delta = delta;
    s.alpha = alpha;
    s.rho = rho;
    s.r = build_r(n, alpha);
    return s;
}

double quadratic_F0(const ModeVector& z, const Spectrum& s) {
    const int n = z.size();
    if (static_cast<int>(s.lambda.size()) != n) {
        throw DimensionError("spectrum length does not match mode vector");
    }
    NeumaierSum acc;
    for (int k = 0; k < n; ++k) {
        acc.add(s.lambda[k] * std::norm(z.mode(k)));
    }
    return 0.5 * acc.value();
}

double g_tilde(const ModeVector& z, const ChainParams& p) {
    return quadratic_F0(z, spectrum(p)) + remainder_quartic(z, p);
}

double remainder_quartic(const ModeVector& z, const ChainParams& p) {
    if (z.size() != p.n) throw DimensionError("mode vector length does not match instance");
    const StateVector x = from_fourier(z.scaled(static_cast<double>(p.n)));
    return x.array().pow(4).sum() / (4.0 * p.n);
}

bool in_C_delta(const ModeVector& z, const NeighborhoodSpec& spec, const Spectrum& s) {
    const int n = z.size();
    if (static_cast<int>(s.lambda.size()) != n || static_cast<int>(spec.r.size()) != n) {
        throw DimensionError("neighborhood spec length mismatch");
    }
    for (int k = 0; k <= n / 2; ++k) {
        const double lam = (k == 0) ? 1.0 : s.lambda[k];
        if (std::abs(z.mode(k)) > spec.delta * spec.r[k] / std::sqrt(lam)) return false;
    }
    return true;
}

double lower_corridor_approx(const ModeVector& z, const Spectrum& s) {
    const int n = z.size();
    if (static_cast<int>(s.lambda.size()) != n) {
        throw DimensionError("spectrum length does not match mode vector");
    }
    const double z0 = z.z0();
    NeumaierSum quad, mass;
    for (int k = 1; k < n; ++k) {
        const double a2 = std::norm(z.mode(k));
        quad.add(s.lambda[k] * a2);
        mass.add(a2);
    }
    return -0.5 * z0 * z0 + 0.25 * z0 * z0 * z0 * z0 + 0.5 * quad.value() +
           1.5 * z0 * z0 * mass.value();
}

double zeta_upper_bound(double s) {
    if (!(s > 1.0)) throw ConfigError("zeta_upper_bound requires s > 1");
    const long long M = 200000;
    NeumaierSum acc;
    for (long long k = 1; k <= M; ++k) {
        acc.add(std::pow(static_cast<double>(k), -s));
    }
    return acc.value() + std::pow(static_cast<double>(M), 1.0 - s) / (s - 1.0);
}

double mode_sum_Kq_pow_q(double q, double alpha) {
    return std::pow(4.0, q) * zeta_upper_bound((1.0 - alpha) * q);
}

double quartic_norm_bound_Bp(double p, double alpha, double a) {
    const double q = p / (p - 1.0);
    const double Kq_q = mode_sum_Kq_pow_q(q, alpha);
    const double Dq_q = 1.0 + (2.0 / std::pow(a, q / 2.0)) * Kq_q;
    return std::pow(Dq_q, p / q);
}

double quadratic_error_coeff(double alpha, double a) {
    return quartic_norm_bound_Bp(4.0, alpha, a) / 4.0;
}

double corridor_error_coeff(double alpha, double delta_cap, double a) {
    return 4.0 * quartic_norm_bound_Bp(3.0, alpha, a) +
           quartic_norm_bound_Bp(4.0, alpha, a) * delta_cap;
}

}  // namespace chain
