//! PPT membership, closed-form partial-transpose spectra, and constructive
//! EBT certification through twirl averaging.
//!
//! For each family the partial transpose of the Choi matrix has a small fixed
//! set of eigenvalues, affine in the mixture parameters, so PPT membership
//! reduces to closed-form inequalities:
//!
//! * `Cov1L`, `CovL1`:  `1/(l+1) <= p <= 1`,
//! * `Cov22`:           `0 <= p <= 1/2` and `2/3 <= p + q <= 1`.
//!
//! Within these regions PPT coincides with entanglement breaking. The
//! certificate is constructive: the channel is decomposed over the region's
//! extreme points, and each extreme point's normalized Choi matrix is
//! exhibited as a Haar average of product states.

use rand::Rng;

use crate::channel::{cg_channel, family_channel, FamilyParams};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, DenseMatrix, Spectrum};
use crate::su2::{admissible, haar_su2, wigner_pi, CgTable};
use crate::tol::DEFAULT as TOL;
use crate::{Error, Result};

/// Outcome of a PPT test: closed-form membership next to the numerically
/// computed partial-transpose spectrum.
#[derive(Debug, Clone)]
pub struct RegionReport {
    pub params: FamilyParams,
    pub closed_form_member: bool,
    pub eigen_evidence: Spectrum,
    /// Smallest eigenvalue of the partially transposed Choi matrix.
    pub margin: f64,
}

/// Closed-form partial-transpose spectrum as `(eigenvalue, multiplicity)`
/// pairs, in descending eigenvalue order.
pub fn pt_spectrum_closed_form(params: &FamilyParams) -> Result<Vec<(f64, usize)>> {
    params.validate_channel_regime()?;
    let mut pairs = match *params {
        FamilyParams::Cov1L { l, p } => cov1l_pt_pairs(l, p, 1.0),
        // The Choi matrix of the adjoint family is a reshuffle of the
        // original's, scaled by (l+1)/2; partial transposition commutes with
        // the reshuffle, so the spectrum just picks up the scale.
        FamilyParams::CovL1 { l, p } => cov1l_pt_pairs(l, p, (l + 1) as f64 / 2.0),
        FamilyParams::Cov22 { p, q } => vec![
            (1.0 - 2.0 * p, 1),
            (1.0 - p / 2.0 - 9.0 * q / 10.0, 5),
            ((3.0 * p + 3.0 * q - 2.0) / 2.0, 3),
        ],
    };
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(pairs)
}

fn cov1l_pt_pairs(l: usize, p: f64, scale: f64) -> Vec<(f64, usize)> {
    let lf = l as f64;
    let plus = (1.0 - p) * 2.0 / (lf + 1.0) + p * 2.0 / ((lf + 1.0) * (lf + 2.0));
    let minus = (1.0 - p) * (-2.0 / (lf * (lf + 1.0))) + p * 2.0 / (lf + 1.0);
    vec![(scale * plus, l + 2), (scale * minus, l)]
}

fn closed_form_min(params: &FamilyParams) -> Result<f64> {
    Ok(pt_spectrum_closed_form(params)?
        .into_iter()
        .fold(f64::INFINITY, |acc, (v, _)| acc.min(v)))
}

/// PPT test: membership is decided by the closed-form spectrum, evidence by
/// full numerical diagonalization of the partially transposed Choi matrix.
pub fn ppt_report(params: &FamilyParams) -> Result<RegionReport> {
    let member = closed_form_min(params)? >= -TOL.psd_floor;
    let channel = family_channel(params)?;
    let pt = channel.choi().partial_transpose_output();
    let spectrum = hermitian_eigenvalues(&pt)?;
    let margin = spectrum.min();
    Ok(RegionReport { params: *params, closed_form_member: member, eigen_evidence: spectrum, margin })
}

/// Checks the closed-form eigenvector families of the partial transpose:
/// returns the largest residual `||PT(C) v - lambda v||_2` over all of them.
pub fn ppt_eigenvector_check(params: &FamilyParams) -> Result<f64> {
    params.validate_channel_regime()?;
    let channel = family_channel(params)?;
    let pt = channel.choi().partial_transpose_output();
    let pairs = eigenvector_catalog(params)?;
    let mut worst = 0.0f64;
    for (value, vector) in pairs {
        let image = crate::linalg::matvec(&pt, &vector);
        let residual: f64 = image
            .iter()
            .zip(&vector)
            .map(|(got, v)| (got - value * v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(residual);
    }
    Ok(worst)
}

/// The eigenvalue/eigenvector pairs behind the closed-form spectra, with the
/// input leg of the Choi matrix as the major index.
fn eigenvector_catalog(params: &FamilyParams) -> Result<Vec<(f64, Vec<crate::linalg::Complex64>)>> {
    let basis = |da: usize, db: usize, entries: &[(usize, usize, f64)]| {
        let mut v = vec![crate::linalg::ZERO; da * db];
        for &(i, a, c) in entries {
            v[i * db + a] = crate::linalg::Complex64::new(c, 0.0);
        }
        v
    };
    match *params {
        FamilyParams::Cov1L { l, p } => {
            let [(plus, _), (minus, _)] = cov1l_pt_pairs(l, p, 1.0)[..] else { unreachable!() };
            let d = l + 1;
            let n = ((l + 1) as f64).sqrt().recip();
            let mut pairs = vec![
                (plus, basis(2, d, &[(0, 0, 1.0)])),
                (plus, basis(2, d, &[(1, l, 1.0)])),
            ];
            for s in 0..l {
                let a = ((l - s) as f64).sqrt() * n;
                let b = ((s + 1) as f64).sqrt() * n;
                pairs.push((plus, basis(2, d, &[(0, s + 1, a), (1, s, b)])));
                pairs.push((minus, basis(2, d, &[(0, s + 1, b), (1, s, -a)])));
            }
            Ok(pairs)
        }
        FamilyParams::Cov22 { p, q } => {
            let single = 1.0 - 2.0 * p;
            let sym = 1.0 - p / 2.0 - 9.0 * q / 10.0;
            let asym = (3.0 * p + 3.0 * q - 2.0) / 2.0;
            let r2 = 0.5f64.sqrt();
            let r3 = 3.0f64.sqrt().recip();
            let r6 = 6.0f64.sqrt().recip();
            Ok(vec![
                (single, basis(3, 3, &[(0, 2, r3), (1, 1, -r3), (2, 0, r3)])),
                (sym, basis(3, 3, &[(0, 0, 1.0)])),
                (sym, basis(3, 3, &[(2, 2, 1.0)])),
                (sym, basis(3, 3, &[(0, 1, r2), (1, 0, r2)])),
                (sym, basis(3, 3, &[(1, 2, r2), (2, 1, r2)])),
                (sym, basis(3, 3, &[(0, 2, r6), (1, 1, 2.0 * r6), (2, 0, r6)])),
                (asym, basis(3, 3, &[(0, 1, r2), (1, 0, -r2)])),
                (asym, basis(3, 3, &[(1, 2, r2), (2, 1, -r2)])),
                (asym, basis(3, 3, &[(0, 2, r2), (2, 0, -r2)])),
            ])
        }
        FamilyParams::CovL1 { .. } => Err(Error::InvalidParams(
            "eigenvector catalog covers Cov1L and Cov22; CovL1 shares Cov1L's spectrum up to scale".into(),
        )),
    }
}

/// A Monte Carlo certificate that the Haar average of conjugated product
/// states reproduces the normalized Choi matrix of a channel mixture.
///
/// The average is over `conj(pi_m(U)) |i1><i1| pi_m(U)^t (x) pi_l(U) |i2><i2| pi_l(U)^dagger`
/// with `i1`, `i2` the literal basis indices of the sampled states. On the
/// conjugated leg the intertwiner `R_m` reflects indices, so the mixture
/// weight of `Phi^{m->l}_k` is `sum_i |C^{m,l,k}_{m-i1, i2, i}|^2`.
#[derive(Debug, Clone)]
pub struct TwirlCertificate {
    pub m: usize,
    pub l: usize,
    pub i1: usize,
    pub i2: usize,
    pub sample_count: usize,
    /// Mixture weights `(k, w_k)` over the admissible environment labels.
    pub weights: Vec<(usize, f64)>,
    pub empirical_choi: DenseMatrix,
    pub target_choi: DenseMatrix,
    pub frobenius_gap: f64,
}

/// The channel mixture the twirl certifies, `Psi = sum_k w_k Phi^{m->l}_k`.
pub fn twirl_target_weights(m: usize, l: usize, i1: usize, i2: usize) -> Result<Vec<(usize, f64)>> {
    if i1 > m || i2 > l {
        return Err(Error::InvalidParams(format!("state indices ({i1},{i2}) out of range for ({m},{l})")));
    }
    let mut weights = Vec::new();
    for k in l.abs_diff(m)..=(l + m) {
        if !admissible(m, l, k) {
            continue;
        }
        let table = CgTable::new(m, l, k)?;
        let w: f64 = (0..=k).map(|i| table.coeff(m - i1, i2, i).powi(2)).sum();
        weights.push((k, w));
    }
    let total: f64 = weights.iter().map(|&(_, w)| w).sum();
    debug_assert!((total - 1.0).abs() < 1e-12, "CG completeness violated: {total}");
    Ok(weights)
}

/// Monte Carlo twirl average against its closed-form target
/// `(1/(m+1)) C_Psi`. Every sample is a product state, so the empirical
/// average is separable by construction; a small `frobenius_gap` certifies
/// that the target is (close to) separable as well.
pub fn twirl_average(
    m: usize,
    l: usize,
    i1: usize,
    i2: usize,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<TwirlCertificate> {
    if samples == 0 {
        return Err(Error::InvalidParams("need at least one sample".into()));
    }
    let weights = twirl_target_weights(m, l, i1, i2)?;

    let dim = (m + 1) * (l + 1);
    let mut acc = DenseMatrix::zeros(dim, dim);
    for _ in 0..samples {
        let u = haar_su2(rng);
        let pm = wigner_pi(m, &u);
        let pl = wigner_pi(l, &u);
        let v: Vec<_> = (0..=m).map(|r| pm.get(r, i1).conj()).collect();
        let w: Vec<_> = (0..=l).map(|r| pl.get(r, i2)).collect();
        let product = crate::linalg::kron_vec(&v, &w);
        acc = acc.add(&crate::linalg::outer(&product, &product));
    }
    let empirical = acc.scale_re(1.0 / samples as f64);

    let mut target = DenseMatrix::zeros(dim, dim);
    for &(k, w) in &weights {
        if w == 0.0 {
            continue;
        }
        let choi = cg_channel(m, l, k)?.choi().mat;
        target = target.add(&choi.scale_re(w / (m + 1) as f64));
    }
    let frobenius_gap = empirical.sub(&target).frobenius_norm();
    Ok(TwirlCertificate {
        m,
        l,
        i1,
        i2,
        sample_count: samples,
        weights,
        empirical_choi: empirical,
        target_choi: target,
        frobenius_gap,
    })
}

/// One extreme point of the PPT region together with its weight in the
/// convex decomposition and the twirl exhibiting its Choi matrix as a Haar
/// average of product states.
#[derive(Debug, Clone)]
pub struct ExtremePoint {
    pub weight: f64,
    pub params: FamilyParams,
    pub twirl: TwirlCertificate,
}

#[derive(Debug, Clone)]
pub enum EbtCertificate {
    /// Inside the PPT region: EBT by convex combination of certified extreme
    /// points. `decomposition_defect` is the Frobenius distance between the
    /// channel's Choi matrix and the weighted sum over extreme points.
    Member {
        report: RegionReport,
        decomposition: Vec<ExtremePoint>,
        decomposition_defect: f64,
    },
    /// Outside: the negative partial-transpose eigenvalue refutes EBT.
    NonMember { report: RegionReport },
}

impl EbtCertificate {
    pub fn report(&self) -> &RegionReport {
        match self {
            EbtCertificate::Member { report, .. } | EbtCertificate::NonMember { report } => report,
        }
    }
}

/// Certify or refute entanglement breaking.
pub fn ebt_certify(
    params: &FamilyParams,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<EbtCertificate> {
    let report = ppt_report(params)?;
    if !report.closed_form_member {
        return Ok(EbtCertificate::NonMember { report });
    }

    // (weight, extreme params, twirl state (m, l, i1, i2)) per extreme point.
    let mut pieces: Vec<(f64, FamilyParams, (usize, usize, usize, usize))> = Vec::new();
    match *params {
        FamilyParams::Cov1L { l, p } => {
            let p0 = 1.0 / (l + 1) as f64;
            let t = ((1.0 - p) / (1.0 - p0)).clamp(0.0, 1.0);
            pieces.push((t, FamilyParams::Cov1L { l, p: p0 }, (1, l, 0, 0)));
            pieces.push((1.0 - t, FamilyParams::Cov1L { l, p: 1.0 }, (1, l, 1, 0)));
        }
        FamilyParams::CovL1 { l, p } => {
            let p0 = 1.0 / (l + 1) as f64;
            let t = ((1.0 - p) / (1.0 - p0)).clamp(0.0, 1.0);
            pieces.push((t, FamilyParams::CovL1 { l, p: p0 }, (l, 1, l, 1)));
            pieces.push((1.0 - t, FamilyParams::CovL1 { l, p: 1.0 }, (l, 1, l, 0)));
        }
        FamilyParams::Cov22 { p, q } => {
            for (weight, vertex) in cov22_vertex_weights(p, q) {
                let (vp, vq) = vertex;
                let state = cov22_vertex_state(vertex);
                pieces.push((weight, FamilyParams::Cov22 { p: vp, q: vq }, (2, 2, state.0, state.1)));
            }
        }
    }

    let channel_choi = family_channel(params)?.choi().mat;
    let mut reconstructed = DenseMatrix::zeros(channel_choi.rows, channel_choi.cols);
    let mut decomposition = Vec::new();
    for (weight, extreme, (m, l, i1, i2)) in pieces {
        let extreme_choi = family_channel(&extreme)?.choi().mat;
        reconstructed = reconstructed.add(&extreme_choi.scale_re(weight));
        let twirl = twirl_average(m, l, i1, i2, samples, rng)?;
        // The twirl target must be exactly this extreme point's normalized
        // Choi matrix, otherwise the certificate proves the wrong statement.
        let identification = twirl
            .target_choi
            .sub(&extreme_choi.scale_re(1.0 / (m + 1) as f64))
            .max_abs_entry();
        if identification > TOL.closed_form {
            return Err(Error::InvalidParams(format!(
                "twirl target does not match extreme point {extreme:?} (defect {identification:.3e})"
            )));
        }
        decomposition.push(ExtremePoint { weight, params: extreme, twirl });
    }
    let decomposition_defect = reconstructed.sub(&channel_choi).frobenius_norm();
    Ok(EbtCertificate::Member { report, decomposition, decomposition_defect })
}

/// Convex weights of `(p,q)` over the four PPT-region vertices,
/// triangulating the quadrilateral along the `(0,2/3)`-`(1/2,1/2)` diagonal.
fn cov22_vertex_weights(p: f64, q: f64) -> Vec<(f64, (f64, f64))> {
    let v_top = (0.0, 1.0);
    let v_right = (0.5, 0.5);
    let v_left = (0.0, 2.0 / 3.0);
    let v_bottom = (0.5, 1.0 / 6.0);
    for triangle in [[v_left, v_top, v_right], [v_left, v_right, v_bottom]] {
        if let Some(bary) = barycentric(p, q, &triangle) {
            return triangle
                .iter()
                .zip(bary)
                .filter(|&(_, w)| w > 0.0)
                .map(|(&v, w)| (w, v))
                .collect();
        }
    }
    unreachable!("point ({p},{q}) lies in the PPT region, hence in one of the two triangles");
}

fn barycentric(p: f64, q: f64, t: &[(f64, f64); 3]) -> Option<[f64; 3]> {
    let det = (t[1].0 - t[0].0) * (t[2].1 - t[0].1) - (t[2].0 - t[0].0) * (t[1].1 - t[0].1);
    let w1 = ((p - t[0].0) * (t[2].1 - t[0].1) - (t[2].0 - t[0].0) * (q - t[0].1)) / det;
    let w2 = ((t[1].0 - t[0].0) * (q - t[0].1) - (p - t[0].0) * (t[1].1 - t[0].1)) / det;
    let w0 = 1.0 - w1 - w2;
    let eps = 1e-12;
    if w0 >= -eps && w1 >= -eps && w2 >= -eps {
        Some([w0.max(0.0), w1.max(0.0), w2.max(0.0)])
    } else {
        None
    }
}

/// Twirl state `(i1, i2)` whose averaged product states build the vertex's
/// Choi matrix.
fn cov22_vertex_state(vertex: (f64, f64)) -> (usize, usize) {
    match vertex {
        (p, q) if p == 0.0 && q == 1.0 => (0, 2),
        (p, q) if p == 0.5 && q == 0.5 => (0, 1),
        (p, _) if p == 0.0 => (1, 1),
        _ => (0, 0),
    }
}

/// Numerically diagonalizes the partial transpose and reports both the full
/// spectrum and the residual against the closed form, used by region sweeps.
pub fn pt_spectrum_agreement(params: &FamilyParams) -> Result<f64> {
    let closed = pt_spectrum_closed_form(params)?;
    let channel = family_channel(params)?;
    let pt = channel.choi().partial_transpose_output();
    let numeric = hermitian_eigenvalues(&pt)?;
    let mut expanded: Vec<f64> = Vec::with_capacity(numeric.values.len());
    for (value, mult) in closed {
        expanded.extend(std::iter::repeat(value).take(mult));
    }
    if expanded.len() != numeric.values.len() {
        return Err(Error::DimensionMismatch { expected: expanded.len(), got: numeric.values.len() });
    }
    expanded.sort_by(|a, b| b.total_cmp(a));
    Ok(expanded
        .iter()
        .zip(&numeric.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Separability sanity of a twirl average: every sample is a product state,
/// so the partial transpose of the empirical matrix is positive
/// semidefinite no matter how few samples were taken.
pub fn twirl_pt_floor(cert: &TwirlCertificate) -> Result<f64> {
    let pt = cert.empirical_choi.partial_transpose(cert.m + 1, cert.l + 1, false);
    let (spectrum, _) = hermitian_eigen(&pt)?;
    Ok(spectrum.min())
}
