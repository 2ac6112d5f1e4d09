#include "fnet/basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fnet {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

// Associated Legendre P_l^m(x) for m >= 0, Condon-Shortley phase included.
double assoc_legendre(int l, int m, double x) {
    double pmm = 1.0;
    if (m > 0) {
        const double somx2 = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
        double fact = 1.0;
        for (int i = 1; i <= m; ++i) {
            pmm *= -fact * somx2;
            fact += 2.0;
        }
    }
    if (l == m) return pmm;
    double pmmp1 = x * (2.0 * m + 1.0) * pmm;
    if (l == m + 1) return pmmp1;
    double pll = 0.0;
    for (int ll = m + 2; ll <= l; ++ll) {
        pll = (x * (2.0 * ll - 1.0) * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m);
        pmm = pmmp1;
        pmmp1 = pll;
    }
    return pll;
}

double sh_normalization(int l, int m) {
    double ratio = 1.0;  // (l-m)! / (l+m)!
    for (int k = l - m + 1; k <= l + m; ++k) ratio /= k;
    return std::sqrt((2.0 * l + 1.0) / (4.0 * kPi) * ratio);
}

}  // namespace

std::string to_string(BasisKind k) {
    switch (k) {
        case BasisKind::None: return "none";
        case BasisKind::Identity: return "identity";
        case BasisKind::LinearAct: return "linact";
        case BasisKind::Gaussian: return "gaussian";
        case BasisKind::Sine: return "sine";
        case BasisKind::Spherical: return "spherical";
    }
    return "?";
}

std::string to_string(ActivationKind k) {
    switch (k) {
        case ActivationKind::ReLU: return "relu";
        case ActivationKind::Swish: return "swish";
        case ActivationKind::Tanh: return "tanh";
        case ActivationKind::LeakyReLU: return "leaky_relu";
        case ActivationKind::SoftPlus: return "softplus";
        case ActivationKind::ShiftedSoftPlus: return "shifted_softplus";
    }
    return "?";
}

BasisKind basis_kind_from_string(const std::string& s) {
    if (s == "none") return BasisKind::None;
    if (s == "identity") return BasisKind::Identity;
    if (s == "linact" || s == "linear_act") return BasisKind::LinearAct;
    if (s == "gaussian" || s == "gauss") return BasisKind::Gaussian;
    if (s == "sine" || s == "sin") return BasisKind::Sine;
    if (s == "spherical" || s == "sph") return BasisKind::Spherical;
    throw std::invalid_argument("unknown basis kind: " + s);
}

ActivationKind activation_from_string(const std::string& s) {
    if (s == "relu") return ActivationKind::ReLU;
    if (s == "swish") return ActivationKind::Swish;
    if (s == "tanh") return ActivationKind::Tanh;
    if (s == "leaky_relu") return ActivationKind::LeakyReLU;
    if (s == "softplus") return ActivationKind::SoftPlus;
    if (s == "shifted_softplus" || s == "ssp") return ActivationKind::ShiftedSoftPlus;
    throw std::invalid_argument("unknown activation: " + s);
}

void BasisConfig::validate() const {
    if (J < 2) throw std::invalid_argument("BasisConfig: J must be >= 2");
    if (L < 1) throw std::invalid_argument("BasisConfig: L must be >= 1");
    if (S < 1) throw std::invalid_argument("BasisConfig: S must be >= 1");
    if (linact_dim < 1) throw std::invalid_argument("BasisConfig: linact_dim must be >= 1");
}

int basis_output_dim(const BasisConfig& config, int edge_dim) {
    switch (config.kind) {
        case BasisKind::None: return 0;
        case BasisKind::Identity: return edge_dim;
        case BasisKind::LinearAct: return config.linact_dim;
        case BasisKind::Gaussian:
        case BasisKind::Sine: return config.J * edge_dim;
        case BasisKind::Spherical: return config.S * config.L * config.L;
    }
    return 0;
}

void gaussian_basis(double x, int J, double* out) {
    const double inv_sigma = J - 1.0;
    for (int j = 0; j < J; ++j) {
        const double t = (x - j / (J - 1.0)) * inv_sigma;
        out[j] = std::exp(-0.5 * t * t);
    }
}

void sine_basis(double x, int J, double* out) {
    double freq = 1.0;
    for (int j = 0; j < J; ++j) {
        out[j] = std::sin(freq * x);
        freq *= 1.1;
    }
}

double real_spherical_harmonic(int l, int m, double theta, double phi) {
    if (l < 0 || std::abs(m) > l)
        throw std::invalid_argument("real_spherical_harmonic: require 0 <= |m| <= l");
    const int am = std::abs(m);
    const double p = assoc_legendre(l, am, std::cos(theta));
    const double n = sh_normalization(l, am);
    if (m == 0) return n * p;
    const double v = std::sqrt(2.0) * n * p;
    return m > 0 ? v * std::cos(am * phi) : v * std::sin(am * phi);
}

void spherical_harmonics(int L, double theta, double phi, double* out) {
    for (int l = 0; l < L; ++l)
        for (int m = -l; m <= l; ++m) out[l * l + m + l] = real_spherical_harmonic(l, m, theta, phi);
}

double activation(ActivationKind kind, double x) {
    switch (kind) {
        case ActivationKind::ReLU: return x > 0.0 ? x : 0.0;
        case ActivationKind::Swish: return x * sigmoid(x);
        case ActivationKind::Tanh: return std::tanh(x);
        case ActivationKind::LeakyReLU: return x > 0.0 ? x : 0.01 * x;
        case ActivationKind::SoftPlus: return softplus(x);
        case ActivationKind::ShiftedSoftPlus: return softplus(x) - std::log(2.0);
    }
    return 0.0;
}

double activation_grad(ActivationKind kind, double x) {
    switch (kind) {
        case ActivationKind::ReLU: return x > 0.0 ? 1.0 : 0.0;
        case ActivationKind::Swish: {
            const double s = sigmoid(x);
            return s + x * s * (1.0 - s);
        }
        case ActivationKind::Tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case ActivationKind::LeakyReLU: return x > 0.0 ? 1.0 : 0.01;
        case ActivationKind::SoftPlus:
        case ActivationKind::ShiftedSoftPlus: return sigmoid(x);
    }
    return 0.0;
}

double normalize_edge_component(double v, bool is_direction) {
    const double t = is_direction ? (v + 1.0) / 2.0 : (v + 0.5) / 1.5;
    return std::clamp(t, 0.0, 1.0);
}

std::vector<double> basis_apply(const BasisConfig& config, std::span<const double> e,
                                int n_dir, const BasisParams& params, ActivationKind act) {
    const int edge_dim = static_cast<int>(e.size());
    switch (config.kind) {
        case BasisKind::None:
        case BasisKind::Identity:
            return std::vector<double>(e.begin(), e.end());
        case BasisKind::LinearAct: {
            if (!params.W || !params.b)
                throw std::invalid_argument("basis_apply: linact requires W and b");
            std::vector<double> out(config.linact_dim);
            for (int i = 0; i < config.linact_dim; ++i) {
                double acc = params.b[i];
                for (int j = 0; j < edge_dim; ++j) acc += params.W[i * edge_dim + j] * e[j];
                out[i] = activation(act, acc);
            }
            return out;
        }
        case BasisKind::Gaussian:
        case BasisKind::Sine: {
            std::vector<double> out(static_cast<std::size_t>(config.J) * edge_dim);
            for (int d = 0; d < edge_dim; ++d) {
                const double x = normalize_edge_component(e[d], d < n_dir);
                if (config.kind == BasisKind::Gaussian)
                    gaussian_basis(x, config.J, out.data() + static_cast<std::size_t>(d) * config.J);
                else
                    sine_basis(x, config.J, out.data() + static_cast<std::size_t>(d) * config.J);
            }
            return out;
        }
        case BasisKind::Spherical: {
            if (n_dir != 3)
                throw std::invalid_argument("basis_apply: spherical basis needs direction components");
            if (!params.W_rad || !params.b_rad)
                throw std::invalid_argument("basis_apply: spherical requires W_rad and b_rad");
            const int p_count = edge_dim - 3;
            const double nz = std::clamp(e[2], -1.0, 1.0);
            const double theta = std::acos(nz);
            const double phi = std::atan2(e[1], e[0]);
            const int l2 = config.L * config.L;
            std::vector<double> harmonics(l2);
            spherical_harmonics(config.L, theta, phi, harmonics.data());

            std::vector<double> radial_in(static_cast<std::size_t>(p_count) * config.J);
            for (int d = 0; d < p_count; ++d)
                sine_basis(e[3 + d], config.J, radial_in.data() + static_cast<std::size_t>(d) * config.J);

            std::vector<double> radial(config.S);
            const int in_dim = p_count * config.J;
            for (int s = 0; s < config.S; ++s) {
                double acc = params.b_rad[s];
                for (int j = 0; j < in_dim; ++j) acc += params.W_rad[s * in_dim + j] * radial_in[j];
                radial[s] = acc;
            }

            // Outer product, harmonic-major: out[l_idx * S + s].
            std::vector<double> out(static_cast<std::size_t>(l2) * config.S);
            for (int h = 0; h < l2; ++h)
                for (int s = 0; s < config.S; ++s)
                    out[static_cast<std::size_t>(h) * config.S + s] = harmonics[h] * radial[s];
            return out;
        }
    }
    throw std::invalid_argument("basis_apply: unknown basis kind");
}

}  // namespace fnet
