//! Output entropies and coherent information: minimum output entropy with
//! the Holevo information it determines, single-copy coherent-information
//! scans with a computed continuity bound, and the two-copy probe experiment
//! showing superadditivity. All entropies are in nats.

use crate::channel::{family_channel, FamilyParams, QuantumChannel};
use crate::linalg::{
    binary_entropy, entropy_of_spectrum, hermitian_eigenvalues, hermitian_trace_norm, outer,
    Complex64, DenseMatrix, DensityMatrix,
};
use crate::tol::DEFAULT as TOL;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinimizerLabel {
    Ket0,
    Ket1,
    Custom,
}

/// Minimum output entropy of a channel together with the Holevo information
/// `ln(out_dim) - h_min` it determines for irreducibly covariant channels.
#[derive(Debug, Clone)]
pub struct MoeResult {
    pub params: Option<FamilyParams>,
    pub h_min: f64,
    pub minimizer_label: MinimizerLabel,
    pub minimizer_state: DensityMatrix,
    pub holevo: f64,
}

/// Diagonal of `Phi_p(|0><0|)`, the output of the highest-weight coherent
/// state.
pub fn cov1l_coherent_output(l: usize, p: f64) -> Vec<f64> {
    let lf = l as f64;
    (0..=l)
        .map(|i| {
            (1.0 - p) * 2.0 * (l - i) as f64 / (lf * (lf + 1.0))
                + p * 2.0 * (i + 1) as f64 / ((lf + 1.0) * (lf + 2.0))
        })
        .collect()
}

/// Diagonal of `Phi_p(|1><1|)`; the coherent output read backwards in the
/// mixture, which makes the family's `lambda <-> 1 - lambda` symmetry exact.
pub fn cov1l_antipodal_output(l: usize, p: f64) -> Vec<f64> {
    let lf = l as f64;
    (0..=l)
        .map(|i| {
            (1.0 - p) * 2.0 * i as f64 / (lf * (lf + 1.0))
                + p * 2.0 * (l - i + 1) as f64 / ((lf + 1.0) * (lf + 2.0))
        })
        .collect()
}

/// Minimum output entropy of the `Cov1L` family, attained at the coherent
/// state `|0><0|` (any point on its orbit works equally).
pub fn moe_cov1l(l: usize, p: f64) -> Result<MoeResult> {
    let params = FamilyParams::Cov1L { l, p };
    params.validate_channel_regime()?;
    let h_min = entropy_of_spectrum(&cov1l_coherent_output(l, p))?;
    Ok(MoeResult {
        params: Some(params),
        h_min,
        minimizer_label: MinimizerLabel::Ket0,
        minimizer_state: DensityMatrix::from_pure(&crate::linalg::ket(2, 0))?,
        holevo: ((l + 1) as f64).ln() - h_min,
    })
}

/// Diagonals of `N_{p,q}(|0><0|)` and `N_{p,q}(|1><1|)`.
pub fn cov22_basis_outputs(p: f64, q: f64) -> ([f64; 3], [f64; 3]) {
    (
        [1.0 - p / 2.0 - 9.0 * q / 10.0, p / 2.0 + 3.0 * q / 10.0, 6.0 * q / 10.0],
        [p / 2.0 + 3.0 * q / 10.0, 1.0 - p - 6.0 * q / 10.0, p / 2.0 + 3.0 * q / 10.0],
    )
}

/// Minimum output entropy of `N_{p,q}`: the minimizer is the coherent state
/// `|0><0|` exactly when `(5p - 3q)(5p + 6q - 5) <= 0`, otherwise the
/// zero-weight state `|1><1|`. Ties are reported as `Ket0`.
pub fn moe_cov22(p: f64, q: f64) -> Result<MoeResult> {
    let params = FamilyParams::Cov22 { p, q };
    params.validate_channel_regime()?;
    let (out0, out1) = cov22_basis_outputs(p, q);
    let h0 = entropy_of_spectrum(&out0)?;
    let h1 = entropy_of_spectrum(&out1)?;
    let rule_prefers_ket0 = (5.0 * p - 3.0 * q) * (5.0 * p + 6.0 * q - 5.0) <= 0.0;
    let label = if (h0 - h1).abs() <= TOL.minimizer_tie || rule_prefers_ket0 {
        MinimizerLabel::Ket0
    } else {
        MinimizerLabel::Ket1
    };
    let (h_min, state_index) = match label {
        MinimizerLabel::Ket0 => (h0, 0),
        _ => (h1, 1),
    };
    Ok(MoeResult {
        params: Some(params),
        h_min,
        minimizer_label: label,
        minimizer_state: DensityMatrix::from_pure(&crate::linalg::ket(3, state_index))?,
        holevo: 3.0f64.ln() - h_min,
    })
}

fn output_entropy(channel: &QuantumChannel, state: &[Complex64]) -> Result<f64> {
    let out = channel.apply(&outer(state, state))?;
    entropy_of_spectrum(&hermitian_eigenvalues(&out)?.values)
}

fn halton(mut index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Derivative-free minimization: walk each coordinate with a shrinking step
/// until the steps fall below 1e-9, which pins the entropy to well under the
/// 1e-10 refinement tolerance for these smooth objectives.
fn coordinate_descent(
    eval: &mut impl FnMut(&[f64]) -> f64,
    mut params: Vec<f64>,
    mut steps: Vec<f64>,
    clamp: &impl Fn(usize, f64) -> f64,
) -> (Vec<f64>, f64) {
    let mut best = eval(&params);
    for _ in 0..400 {
        let mut improved = false;
        for i in 0..params.len() {
            for dir in [1.0, -1.0] {
                let original = params[i];
                params[i] = clamp(i, original + dir * steps[i]);
                let value = eval(&params);
                if value < best {
                    best = value;
                    improved = true;
                } else {
                    params[i] = original;
                }
            }
        }
        if !improved {
            if steps.iter().all(|s| *s < 1e-9) {
                break;
            }
            for s in &mut steps {
                *s *= 0.5;
            }
        }
    }
    (params, best)
}

fn qubit_state(t: &[f64]) -> Vec<Complex64> {
    vec![
        Complex64::new((t[0] / 2.0).cos(), 0.0),
        Complex64::from_polar((t[0] / 2.0).sin(), t[1]),
    ]
}

fn qutrit_state(t: &[f64]) -> Vec<Complex64> {
    let (alpha, beta) = (t[0], t[1]);
    vec![
        Complex64::new(alpha.cos(), 0.0),
        Complex64::from_polar(alpha.sin() * beta.cos(), t[2]),
        Complex64::from_polar(alpha.sin() * beta.sin(), t[3]),
    ]
}

/// Grid-plus-descent search for the minimum output entropy over pure inputs.
/// Deterministic: qubits scan a `(theta, phi)` sphere grid, qutrits a Halton
/// sequence over two amplitude angles and two phases; the best point is then
/// refined by coordinate descent.
pub fn moe_brute_force(channel: &QuantumChannel, grid_density: usize) -> Result<MoeResult> {
    if grid_density < 2 {
        return Err(Error::InvalidParams("grid_density must be at least 2".into()));
    }
    let dim = channel.in_dim();
    let state_of: fn(&[f64]) -> Vec<Complex64> = match dim {
        2 => qubit_state,
        3 => qutrit_state,
        _ => {
            return Err(Error::InvalidParams(format!(
                "brute-force search supports qubit and qutrit inputs, got dim {dim}"
            )))
        }
    };

    let mut failure: Option<Error> = None;
    let mut eval = |t: &[f64]| match output_entropy(channel, &state_of(t)) {
        Ok(h) => h,
        Err(e) => {
            failure.get_or_insert(e);
            f64::INFINITY
        }
    };

    let mut best = f64::INFINITY;
    let mut best_params = Vec::new();
    if dim == 2 {
        for a in 0..grid_density {
            let theta = std::f64::consts::PI * a as f64 / (grid_density - 1) as f64;
            for b in 0..grid_density {
                let phi = std::f64::consts::TAU * b as f64 / grid_density as f64;
                let h = eval(&[theta, phi]);
                if h < best {
                    best = h;
                    best_params = vec![theta, phi];
                }
            }
        }
    } else {
        let half_pi = std::f64::consts::FRAC_PI_2;
        for n in 0..grid_density * grid_density {
            let t = [
                half_pi * halton(n + 1, 2),
                half_pi * halton(n + 1, 3),
                std::f64::consts::TAU * halton(n + 1, 5),
                std::f64::consts::TAU * halton(n + 1, 7),
            ];
            let h = eval(&t);
            if h < best {
                best = h;
                best_params = t.to_vec();
            }
        }
    }

    let steps: Vec<f64> = if dim == 2 {
        vec![std::f64::consts::PI / grid_density as f64; 2]
    } else {
        vec![0.2, 0.2, 0.4, 0.4]
    };
    let clamp = move |i: usize, x: f64| -> f64 {
        let hi = match (dim, i) {
            (2, 0) => std::f64::consts::PI,
            (3, 0) | (3, 1) => std::f64::consts::FRAC_PI_2,
            _ => std::f64::consts::TAU,
        };
        x.clamp(0.0, hi)
    };
    let (params, h_min) = coordinate_descent(&mut eval, best_params, steps, &clamp);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(MoeResult {
        params: None,
        h_min,
        minimizer_label: MinimizerLabel::Custom,
        minimizer_state: DensityMatrix::from_pure(&state_of(&params))?,
        holevo: (channel.out_dim() as f64).ln() - h_min,
    })
}

/// Distance from `p/2 + 3q/10` to the spectrum of `N_{p,q}(|xi><xi|)`.
/// That number is an eigenvalue for every unit vector `xi`, so the returned
/// distance should vanish to working precision.
pub fn fixed_eigenvalue_check(p: f64, q: f64, xi: &[Complex64]) -> Result<f64> {
    if (crate::linalg::norm(xi) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParams("input vector must be normalized".into()));
    }
    let channel = family_channel(&FamilyParams::Cov22 { p, q })?;
    let out = channel.apply(&outer(xi, xi))?;
    let spectrum = hermitian_eigenvalues(&out)?;
    let target = p / 2.0 + 3.0 * q / 10.0;
    Ok(spectrum
        .values
        .iter()
        .map(|v| (v - target).abs())
        .fold(f64::INFINITY, f64::min))
}

/// Result of the single-copy coherent-information scan over diagonal inputs
/// `D_lambda = diag(lambda, 1-lambda)`.
#[derive(Debug, Clone)]
pub struct CoherentInfoResult {
    pub params: FamilyParams,
    pub q1: f64,
    pub argmax_lambda: f64,
    pub grid_resolution: f64,
    /// Entropy-continuity bound on how far the true diagonal-family maximum
    /// can sit above the grid maximum.
    pub fannes_error_bound: f64,
}

/// Precomputed data for evaluating `H(Phi_p(D_lambda)) - H(Phi_p^c(D_lambda))`
/// cheaply at many `lambda`: both outputs are affine in the input, so only
/// two channel applications are ever needed.
pub struct CoherentScanner {
    params: FamilyParams,
    out0: Vec<f64>,
    out1: Vec<f64>,
    env0: DenseMatrix,
    env1: DenseMatrix,
    trace_norm_out: f64,
    trace_norm_env: f64,
}

impl CoherentScanner {
    pub fn new(l: usize, p: f64) -> Result<Self> {
        let params = FamilyParams::Cov1L { l, p };
        let channel = family_channel(&params)?;
        let comp = channel.complementary();
        let e00 = DenseMatrix::matrix_unit(2, 0, 0);
        let e11 = DenseMatrix::matrix_unit(2, 1, 1);
        let out0 = cov1l_coherent_output(l, p);
        let out1 = cov1l_antipodal_output(l, p);
        // The closed forms above must be the channel's own outputs.
        for (i, (&a, &b)) in out0.iter().zip(&out1).enumerate() {
            let direct0 = channel.apply(&e00)?.get(i, i).re;
            let direct1 = channel.apply(&e11)?.get(i, i).re;
            debug_assert!((a - direct0).abs() < 1e-13 && (b - direct1).abs() < 1e-13);
            let _ = (a, b, direct0, direct1);
        }
        let env0 = comp.apply(&e00)?;
        let env1 = comp.apply(&e11)?;
        let trace_norm_out: f64 = out0.iter().zip(&out1).map(|(a, b)| (a - b).abs()).sum();
        let trace_norm_env = hermitian_trace_norm(&env0.sub(&env1))?;
        Ok(CoherentScanner { params, out0, out1, env0, env1, trace_norm_out, trace_norm_env })
    }

    pub fn params(&self) -> FamilyParams {
        self.params
    }

    /// `(H_out, H_env)` at `D_lambda`.
    pub fn point(&self, lambda: f64) -> Result<(f64, f64)> {
        let mix: Vec<f64> = self
            .out0
            .iter()
            .zip(&self.out1)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        let h_out = entropy_of_spectrum(&mix)?;
        let env = DenseMatrix {
            rows: self.env0.rows,
            cols: self.env0.cols,
            data: self
                .env0
                .data
                .iter()
                .zip(&self.env1.data)
                .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                .collect(),
        };
        let h_env = entropy_of_spectrum(&hermitian_eigenvalues(&env)?.values)?;
        Ok((h_out, h_env))
    }

    pub fn objective(&self, lambda: f64) -> Result<f64> {
        self.point(lambda).map(|(h_out, h_env)| h_out - h_env)
    }

    /// Fannes-Audenaert continuity bound on the objective's variation within
    /// half a grid step. Trace distance between neighbouring outputs grows
    /// linearly in `lambda`, with slope given by the fixed trace norms.
    pub fn fannes_bound(&self, grid_points: usize) -> f64 {
        let half_step = 0.5 / (grid_points - 1) as f64;
        let term = |trace_norm: f64, dim: usize| {
            let t = (half_step * trace_norm / 2.0).min(1.0);
            let ln_term = if dim > 1 { t * ((dim - 1) as f64).ln() } else { 0.0 };
            ln_term + binary_entropy(t)
        };
        let (_, l_out) = self.params.irrep_labels();
        term(self.trace_norm_out, l_out + 1) + term(self.trace_norm_env, self.env0.rows)
    }
}

/// Scan the diagonal-input coherent information of `Phi_p` on a uniform
/// `lambda` grid. By covariance the diagonal family already attains the full
/// single-copy maximum; the scan reports the grid maximum and a computed
/// continuity bound covering off-grid points.
pub fn coherent_info_single(l: usize, p: f64, grid_points: usize) -> Result<CoherentInfoResult> {
    if grid_points < 2 {
        return Err(Error::InvalidParams("need at least two grid points".into()));
    }
    let scanner = CoherentScanner::new(l, p)?;
    let mut q1 = f64::NEG_INFINITY;
    let mut argmax = 0.0;
    for j in 0..grid_points {
        let lambda = j as f64 / (grid_points - 1) as f64;
        let value = scanner.objective(lambda)?;
        if value > q1 {
            q1 = value;
            argmax = lambda;
        }
    }
    Ok(CoherentInfoResult {
        params: scanner.params(),
        q1,
        argmax_lambda: argmax,
        grid_resolution: 1.0 / (grid_points - 1) as f64,
        fannes_error_bound: scanner.fannes_bound(grid_points),
    })
}

/// `H(Phi(rho)) - H(Phi^c(rho))`, a lower bound on the coherent information
/// by definition.
pub fn coherent_info_lower_bound(channel: &QuantumChannel, rho: &DensityMatrix) -> Result<f64> {
    let h_out = entropy_of_spectrum(&hermitian_eigenvalues(&channel.apply(rho.matrix())?)?.values)?;
    let h_env = entropy_of_spectrum(
        &hermitian_eigenvalues(&channel.complementary().apply(rho.matrix())?)?.values,
    )?;
    Ok(h_out - h_env)
}

/// Two-copy experiment report: the single-copy scan upper bound next to the
/// two-copy lower bound from the correlated probe
/// `rho = (|00><00| + |11><11|)/2`, optionally improved over the full
/// product-diagonal input family.
#[derive(Debug, Clone)]
pub struct SuperactivationReport {
    pub l: usize,
    pub p: f64,
    pub scan: CoherentInfoResult,
    /// `scan.q1 + fannes`: an upper bound on the single-copy coherent
    /// information.
    pub q1_upper_via_scan: f64,
    pub fannes_bound: f64,
    pub probe_h_out: f64,
    pub probe_h_env: f64,
    /// Half the probe's two-copy coherent information.
    pub two_copy_half_bound_probe: f64,
    /// Best half-bound after coordinate ascent over diagonal product-basis
    /// inputs, started at the probe.
    pub two_copy_half_bound: f64,
    /// `two_copy_half_bound - q1_upper_via_scan`; strictly positive means
    /// superadditivity of coherent information.
    pub gap: f64,
}

pub fn superactivation_experiment(l: usize, p: f64, grid_points: usize) -> Result<SuperactivationReport> {
    let scan = coherent_info_single(l, p, grid_points)?;
    let fannes_bound = scan.fannes_error_bound;
    let q1_upper_via_scan = scan.q1 + fannes_bound;

    let single = family_channel(&FamilyParams::Cov1L { l, p })?;
    let two = single.tensor(&single);
    let comp = two.complementary();
    let dim = two.in_dim();

    let diag_input = |weights: &[f64]| -> DenseMatrix {
        DenseMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                Complex64::new(weights[r], 0.0)
            } else {
                crate::linalg::ZERO
            }
        })
    };
    let mut failure: Option<Error> = None;
    let mut entropies = |weights: &[f64]| -> (f64, f64) {
        let rho = diag_input(weights);
        let result = (|| {
            let h_out =
                entropy_of_spectrum(&hermitian_eigenvalues(&two.apply(&rho)?)?.values)?;
            let h_env =
                entropy_of_spectrum(&hermitian_eigenvalues(&comp.apply(&rho)?)?.values)?;
            Ok::<_, Error>((h_out, h_env))
        })();
        match result {
            Ok(pair) => pair,
            Err(e) => {
                failure.get_or_insert(e);
                (f64::NEG_INFINITY, 0.0)
            }
        }
    };

    let mut probe = vec![0.0; dim];
    probe[0] = 0.5;
    probe[dim - 1] = 0.5;
    let (probe_h_out, probe_h_env) = entropies(&probe);

    // Ascend over the simplex of diagonal inputs; parameters are unnormalized
    // nonnegative weights.
    let mut eval = |t: &[f64]| -> f64 {
        let total: f64 = t.iter().sum();
        if total < 1e-9 {
            return f64::INFINITY;
        }
        let weights: Vec<f64> = t.iter().map(|w| w / total).collect();
        let (h_out, h_env) = entropies(&weights);
        h_env - h_out
    };
    let (_, negated) =
        coordinate_descent(&mut eval, probe.clone(), vec![0.1; dim], &|_, x| x.clamp(0.0, 1.0));
    if let Some(e) = failure {
        return Err(e);
    }

    let two_copy_half_bound_probe = (probe_h_out - probe_h_env) / 2.0;
    let two_copy_half_bound = (-negated / 2.0).max(two_copy_half_bound_probe);
    Ok(SuperactivationReport {
        l,
        p,
        scan,
        q1_upper_via_scan,
        fannes_bound,
        probe_h_out,
        probe_h_env,
        two_copy_half_bound_probe,
        two_copy_half_bound,
        gap: two_copy_half_bound - q1_upper_via_scan,
    })
}
