#pragma once

#include "deltashell/model.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace deltashell {

enum class SeedStrategy {
    /// kappa_n = n pi lambda / (lambda + 1) - 0.5 i / (1 + lambda), with a
    /// |D| grid scan over the bracket when Newton leaves it.
    deflated,
    /// Fixed-point iteration of kappa = n pi - (i/2) Log(1 - 2 i kappa / lambda),
    /// whose principal branch labels the n-th resonance.
    asymptotic,
};

/// A resonance: zero of D(k) in the fourth quadrant.
struct Pole {
    int index = 0;
    cplx momentum;          // k_n (1/length)
    cplx energy;            // hbar^2 k_n^2 / 2m
    double width = 0.0;     // Gamma_n = -Im(hbar^2 k_n^2 / m)
    double lifetime = 0.0;  // hbar / Gamma_n
    double q_value = 0.0;   // -Re E / (2 Im E)
    double residual = 0.0;  // |D(k_n)|
    bool certified = false; // winding number 1 on an isolating rectangle
    bool poorly_formed = false; // Q < 0.5
};

struct PoleWeight {
    int index = 0;
    double weight = 0.0;
};

struct PoleSearchOptions {
    SeedStrategy seeds = SeedStrategy::asymptotic;
    double residual_tol = 1e-12;
    int max_newton = 60;
    bool certify = true;
};

/// First n_max resonance poles sorted by Re k, polished by Newton and
/// certified one by one with the argument principle.
std::vector<Pole> find_poles(const ModelParams& params, int n_max,
                             const PoleSearchOptions& options = {});

/// Appends poles (same search and certification) until `poles` holds n_max.
void extend_poles(const ModelParams& params, std::vector<Pole>& poles, int n_max,
                  const PoleSearchOptions& options = {});

/// Pole record from a polished reduced momentum kappa = k a.
Pole make_pole(int index, cplx kappa, const ModelParams& params);

/// Number of zeros of D(kappa) (reduced units) inside the rectangle
/// [re_lo, re_hi] x [im_lo, im_hi], counted by the winding of arg D along
/// the boundary. Throws ConvergenceError if the boundary passes through
/// a zero or the winding is not resolved.
int count_zeros(double lambda, double re_lo, double re_hi, double im_lo, double im_hi);

/// Reduced-unit asymptotic location of the n-th pole (seed / tail estimate).
cplx asymptotic_pole(int n, double lambda, int iterations = 8);

/// C(k_n, x) = -2 pi i Res_{k = k_n} f(k, x), with
/// f = phi(k) W(k) sin(kx) / (2 pi). Physical units (psi in 1/sqrt(length)).
cplx residue_amplitude(const Pole& pole, double x, const InitialState& state,
                       const ModelParams& params);

/// Position-independent part of the residue in reduced units:
/// C(kappa_n, xi) = sqrt(2/a) * coefficient * sin(kappa_n xi).
cplx residue_coefficient(cplx kappa, double lambda, int mode);

/// c_n = integral_0^a |C(k_n, x)|^2 dx by the 101-node trapezoid rule.
PoleWeight pole_weight(const Pole& pole, const InitialState& state, const ModelParams& params,
                       int intervals = 100);

double q_value(const Pole& pole);

/// hbar / Gamma_n (physical time).
double lifetime_from_pole(const Pole& pole, const ModelParams& params);

} // namespace deltashell
