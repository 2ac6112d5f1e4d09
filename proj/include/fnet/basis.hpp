#pragma once

#include <span>
#include <string>
#include <vector>

namespace fnet {

enum class BasisKind { None, Identity, LinearAct, Gaussian, Sine, Spherical };
enum class ActivationKind { ReLU, Swish, Tanh, LeakyReLU, SoftPlus, ShiftedSoftPlus };

std::string to_string(BasisKind k);
std::string to_string(ActivationKind k);
BasisKind basis_kind_from_string(const std::string& s);
ActivationKind activation_from_string(const std::string& s);

struct BasisConfig {
    BasisKind kind = BasisKind::Spherical;
    int J = 50;          // Gaussian/Sine component count
    int L = 3;           // spherical degrees 0..L-1 (L^2 harmonics)
    int S = 4;           // spherical radial channels
    int linact_dim = 350;

    void validate() const;  // J >= 2, L >= 1, S >= 1
};

// Output width for an edge-feature input of `edge_dim` components.
// None bypasses the basis entirely (the raw features are used), so 0 here.
int basis_output_dim(const BasisConfig& config, int edge_dim);

// b_j(x) = exp(-(x - mu_j)^2 / (2 sigma^2)), mu_j = j/(J-1), sigma = 1/(J-1),
// j = 0..J-1; callers pre-normalize x to [0,1].
void gaussian_basis(double x, int J, double* out);

// b_j(x) = sin(1.1^j * x), j = 0..J-1.
void sine_basis(double x, int J, double* out);

// Real spherical harmonics, orthonormal over the unit sphere, with the
// Condon-Shortley phase folded into the associated Legendre functions.
// Throws std::invalid_argument for l < 0 or |m| > l.
double real_spherical_harmonic(int l, int m, double theta, double phi);

// All harmonics of degree 0..L-1 at (theta, phi); out[l*l + m + l].
void spherical_harmonics(int L, double theta, double phi, double* out);

double activation(ActivationKind kind, double x);
double activation_grad(ActivationKind kind, double x);

// Affine map to [0,1] with clamping. Direction components come from [-1,1],
// scaled-distance components from [-0.5,1].
double normalize_edge_component(double v, bool is_direction);

// Optional learnable parts, row-major:
//   LinearAct:  W [linact_dim x E], b [linact_dim]
//   Spherical:  W_rad [S x (E-3)*J], b_rad [S]
struct BasisParams {
    const double* W = nullptr;
    const double* b = nullptr;
    const double* W_rad = nullptr;
    const double* b_rad = nullptr;
};

// Evaluates one edge-feature vector. `n_dir` leading components are
// direction cosines (3 normally, 0 when the direction is dropped); the rest
// are scaled distances. Spherical requires n_dir == 3. None returns a copy
// of the input. `act` is used by LinearAct only.
std::vector<double> basis_apply(const BasisConfig& config, std::span<const double> e,
                                int n_dir, const BasisParams& params, ActivationKind act);

}  // namespace fnet
