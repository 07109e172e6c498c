//! Non-degradability witnesses read off the complementary channels, and the
//! positivity and decomposability certificates for the covariant families
//! continued beyond the channel simplex.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::channel::{cg_channel, family_channel, FamilyParams, QuantumChannel};
use crate::linalg::{hermitian_eigenvalues, ket, outer, Complex64, DenseMatrix};
use crate::ppt::RegionReport;
use crate::su2::{haar_state, r_matrix};
use crate::tol::DEFAULT as TOL;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    Cov1lEntry,
    Covl1Entry,
    Cov22M,
    Cov22N,
    TieCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conclusion {
    NotDegradable,
    DegradableKnown,
    Inconclusive,
}

/// A single diagonal entry (or norm, in the tie cases) whose sign contradicts
/// the existence of a degrading map. `witness_value` is recomputed from the
/// constructed complementary channel; `closed_form_value` is the proof's
/// prediction for the same quantity.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub params: FamilyParams,
    pub witness_kind: WitnessKind,
    pub witness_value: f64,
    pub closed_form_value: f64,
    pub conclusion: Conclusion,
}

impl WitnessReport {
    pub fn difference(&self) -> f64 {
        (self.witness_value - self.closed_form_value).abs()
    }
}

fn complementary_basis_outputs(channel: &QuantumChannel) -> Result<Vec<DenseMatrix>> {
    let comp = channel.complementary();
    (0..channel.in_dim())
        .map(|i| comp.apply(&DenseMatrix::matrix_unit(channel.in_dim(), i, i)))
        .collect()
}

/// The degrading-map obstruction for `Phi_p`. For `p` away from the
/// depolarizing value the proof feeds a positive diagonal combination through
/// the hypothetical degrading map and lands on a matrix whose last diagonal
/// entry is negative; at the depolarizing value the two environment outputs
/// would have to coincide and their Frobenius distance is the witness, lower
/// bounded by the corner entry `2p/(l+2)`.
pub fn degradability_witness_cov1l(l: usize, p: f64) -> Result<WitnessReport> {
    if l == 0 {
        return Err(Error::InvalidParams("l must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParams(format!("p = {p} outside [0, 1]")));
    }
    let params = FamilyParams::Cov1L { l, p };
    if p == 0.0 {
        return Ok(WitnessReport {
            params,
            witness_kind: WitnessKind::Cov1lEntry,
            witness_value: 0.0,
            closed_form_value: 0.0,
            conclusion: Conclusion::DegradableKnown,
        });
    }

    let envs = complementary_basis_outputs(&family_channel(&params)?)?;
    let (a, b) = (&envs[0], &envs[1]);
    let lf = l as f64;
    let corner = 2 * l + 1;
    let d = (lf + 2.0) - 2.0 * (lf + 1.0) * p;

    if d.abs() <= TOL.witness {
        let witness_value = a.sub(b).frobenius_norm();
        let closed_form_value = 2.0 * p / (lf + 2.0);
        return Ok(WitnessReport {
            params,
            witness_kind: WitnessKind::TieCase,
            witness_value,
            closed_form_value,
            conclusion: if witness_value > TOL.witness {
                Conclusion::NotDegradable
            } else {
                Conclusion::Inconclusive
            },
        });
    }

    // Combination coefficients 1 + (a_i - a_{l-i})/(a_0 - a_l), or their
    // reflection when a_0 < a_l; both must be nonnegative.
    let diag = crate::capacity::cov1l_coherent_output(l, p);
    let denom = if d > 0.0 { diag[0] - diag[l] } else { diag[l] - diag[0] };
    for i in 0..=l {
        let c = 1.0 + (diag[i] - diag[l - i]) / denom * if d > 0.0 { 1.0 } else { -1.0 };
        if c < -1e-12 {
            return Err(Error::InvalidParams(format!(
                "combination coefficient {c} at position {i} is negative"
            )));
        }
    }

    let mu = (lf + 1.0) * p / (lf + 2.0);
    let (weight_a, weight_b) = if d > 0.0 {
        (2.0 - 2.0 * mu, -2.0 * mu)
    } else {
        (-2.0 * mu, 2.0 - 2.0 * mu)
    };
    let prefactor = (lf + 1.0) * (lf + 2.0) / (2.0 * d);
    let implied = a.scale_re(prefactor * weight_a).add(&b.scale_re(prefactor * weight_b));
    let witness_value = implied.get(corner, corner).re;
    // The corner entry of `Phi^c(|0><0|)` vanishes, so only the second term
    // contributes: prefactor * weight_b * 2p/(l+2), negative in both branches.
    let closed_form_value = prefactor * weight_b * 2.0 * p / (lf + 2.0);
    Ok(WitnessReport {
        params,
        witness_kind: WitnessKind::Cov1lEntry,
        witness_value,
        closed_form_value,
        conclusion: if witness_value < -TOL.witness {
            Conclusion::NotDegradable
        } else {
            Conclusion::Inconclusive
        },
    })
}

/// The degrading-map obstruction for `Psi_p`: evaluate the complementary
/// channel on `X = (1-mu)|0><0| - mu|l><l|` with `mu = p(l+1)/(l+2)`. When
/// `1 - 2mu > 0` the `(l, l)` entry is `-mu^2`; when negative, the
/// `(2l+1, 2l+1)` entry is `+mu(1-mu)`; at `mu = 1/2` the two environment
/// outputs would have to coincide.
pub fn degradability_witness_covl1(l: usize, p: f64) -> Result<WitnessReport> {
    if l == 0 {
        return Err(Error::InvalidParams("l must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParams(format!("p = {p} outside [0, 1]")));
    }
    let params = FamilyParams::CovL1 { l, p };
    if p == 0.0 {
        return Ok(WitnessReport {
            params,
            witness_kind: WitnessKind::Covl1Entry,
            witness_value: 0.0,
            closed_form_value: 0.0,
            conclusion: Conclusion::DegradableKnown,
        });
    }

    let envs = complementary_basis_outputs(&family_channel(&params)?)?;
    let (e0, el) = (&envs[0], &envs[l]);
    let lf = l as f64;
    let mu = p * (lf + 1.0) / (lf + 2.0);
    let s = 1.0 - 2.0 * mu;

    if s.abs() <= TOL.witness {
        let witness_value = e0.sub(el).frobenius_norm();
        return Ok(WitnessReport {
            params,
            witness_kind: WitnessKind::TieCase,
            witness_value,
            closed_form_value: mu,
            conclusion: if witness_value > TOL.witness {
                Conclusion::NotDegradable
            } else {
                Conclusion::Inconclusive
            },
        });
    }

    let implied = e0.scale_re(1.0 - mu).add(&el.scale_re(-mu));
    let (witness_value, closed_form_value, violated) = if s > 0.0 {
        let value = implied.get(l, l).re;
        (value, -mu * mu, value < -TOL.witness)
    } else {
        let value = implied.get(2 * l + 1, 2 * l + 1).re;
        (value, mu * (1.0 - mu), value > TOL.witness)
    };
    Ok(WitnessReport {
        params,
        witness_kind: WitnessKind::Covl1Entry,
        witness_value,
        closed_form_value,
        conclusion: if violated { Conclusion::NotDegradable } else { Conclusion::Inconclusive },
    })
}

/// The degrading-map obstruction for `N_{p,q}`, via the proof's matrices
/// `M = N^c(|1><1|) - (p/2 + 3q/10) N^c(Id)` and its counterpart `N`. The
/// displayed entries `<4|M|4>` and `<8|N|8>` vanish on the `q = 0` edge, where
/// the `<2|.|2>` entry of the same matrix stays strictly negative and is used
/// instead.
pub fn degradability_witness_cov22(p: f64, q: f64) -> Result<WitnessReport> {
    let params = FamilyParams::Cov22 { p, q };
    if p < 0.0 || q < 0.0 || p + q > 1.0 {
        return Err(Error::InvalidParams(format!("(p, q) = ({p}, {q}) outside the simplex")));
    }
    if (p == 0.0 && q == 0.0) || (p == 1.0 && q == 0.0) {
        return Ok(WitnessReport {
            params,
            witness_kind: WitnessKind::Cov22M,
            witness_value: 0.0,
            closed_form_value: 0.0,
            conclusion: Conclusion::DegradableKnown,
        });
    }

    let envs = complementary_basis_outputs(&family_channel(&params)?)?;
    let s = 1.0 - 1.5 * p - 0.9 * q;

    if s.abs() <= TOL.witness {
        let id_third = envs[0].add(&envs[1]).add(&envs[2]).scale_re(1.0 / 3.0);
        let witness_value = id_third.sub(&envs[1]).frobenius_norm();
        return Ok(WitnessReport {
            params,
            witness_kind: WitnessKind::TieCase,
            witness_value,
            closed_form_value: p / 3.0,
            conclusion: if witness_value > TOL.witness {
                Conclusion::NotDegradable
            } else {
                Conclusion::Inconclusive
            },
        });
    }

    let (kind, matrix, entry, closed_form_value) = if s > 0.0 {
        let c = p / 2.0 + 3.0 * q / 10.0;
        let m = envs[1].scale_re(1.0 - c).add(&envs[0].add(&envs[2]).scale_re(-c));
        let displayed = -(6.0 * q / 10.0) * c;
        if displayed.abs() > TOL.witness {
            (WitnessKind::Cov22M, m, 4, displayed)
        } else {
            (WitnessKind::Cov22M, m, 2, -p * c)
        }
    } else {
        let c = 1.0 - p - 6.0 * q / 10.0;
        let n = envs[1].scale_re(p + 6.0 * q / 10.0).add(&envs[0].add(&envs[2]).scale_re(-c));
        let displayed = -(6.0 * q / 10.0) * c;
        if displayed.abs() > TOL.witness {
            (WitnessKind::Cov22N, n, 8, displayed)
        } else {
            (WitnessKind::Cov22N, n, 2, -p * c)
        }
    };
    let witness_value = matrix.get(entry, entry).re;
    Ok(WitnessReport {
        params,
        witness_kind: kind,
        witness_value,
        closed_form_value,
        conclusion: if witness_value < -TOL.witness {
            Conclusion::NotDegradable
        } else {
            Conclusion::Inconclusive
        },
    })
}

/// An affine combination of the extreme Clebsch-Gordan channels with real
/// coefficients summing to one. Outside the simplex this is no longer
/// completely positive and has no Kraus form, but it is still linear,
/// Hermiticity-preserving, trace-preserving and covariant.
pub struct LinearCovariantMap {
    params: FamilyParams,
    pieces: Vec<(f64, QuantumChannel)>,
}

impl LinearCovariantMap {
    pub fn new(params: &FamilyParams) -> Result<Self> {
        let pieces = match *params {
            FamilyParams::Cov1L { l, p } => vec![
                (1.0 - p, cg_channel(1, l, l - 1)?),
                (p, cg_channel(1, l, l + 1)?),
            ],
            FamilyParams::CovL1 { l, p } => vec![
                (1.0 - p, cg_channel(l, 1, l - 1)?),
                (p, cg_channel(l, 1, l + 1)?),
            ],
            FamilyParams::Cov22 { p, q } => vec![
                (1.0 - p - q, cg_channel(2, 2, 0)?),
                (p, cg_channel(2, 2, 2)?),
                (q, cg_channel(2, 2, 4)?),
            ],
        };
        Ok(LinearCovariantMap { params: *params, pieces })
    }

    pub fn params(&self) -> FamilyParams {
        self.params
    }

    pub fn in_dim(&self) -> usize {
        self.pieces[0].1.in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.pieces[0].1.out_dim()
    }

    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let mut out = DenseMatrix::zeros(self.out_dim(), self.out_dim());
        for (weight, channel) in &self.pieces {
            out = out.add(&channel.apply(x)?.scale_re(*weight));
        }
        Ok(out)
    }
}

/// `<0|Phi_p(|0><0|)|0>` and `<0|Phi_p(|1><1|)|0>` evaluated through the
/// affine map; closed forms `(2/(l+1))(1 - p(l+1)/(l+2))` and `2p/(l+2)`.
pub fn cov1l_positivity_entries(l: usize, p: f64) -> Result<(f64, f64)> {
    let map = LinearCovariantMap::new(&FamilyParams::Cov1L { l, p })?;
    let from0 = map.apply(&DenseMatrix::matrix_unit(2, 0, 0))?;
    let from1 = map.apply(&DenseMatrix::matrix_unit(2, 1, 1))?;
    Ok((from0.get(0, 0).re, from1.get(0, 0).re))
}

fn positivity_scan(
    map: &LinearCovariantMap,
    samples: usize,
    seed: u64,
) -> Result<(crate::linalg::Spectrum, f64)> {
    let dim = map.in_dim();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst: Option<(crate::linalg::Spectrum, f64)> = None;
    let mut consider = |state: &[Complex64]| -> Result<()> {
        let spectrum = hermitian_eigenvalues(&map.apply(&outer(state, state))?)?;
        let low = spectrum.min();
        if worst.as_ref().is_none_or(|(_, m)| low < *m) {
            worst = Some((spectrum, low));
        }
        Ok(())
    };
    for i in 0..dim {
        consider(&ket(dim, i))?;
    }
    for _ in 0..samples {
        consider(&haar_state(dim, &mut rng))?;
    }
    let (spectrum, margin) = worst.expect("scan covered at least the basis states");
    Ok((spectrum, margin))
}

/// Positivity of the affine family `(1-p) Phi_{l-1} + p Phi_{l+1}` for real
/// `p`: positive exactly on `0 <= p <= (l+2)/(l+1)`. The margin is the
/// smallest output eigenvalue found over basis states plus a Haar sample.
pub fn positivity_region_cov1l(l: usize, p: f64, samples: usize, seed: u64) -> Result<RegionReport> {
    let params = FamilyParams::Cov1L { l, p };
    let closed_form_member = (0.0..=(l as f64 + 2.0) / (l as f64 + 1.0)).contains(&p);
    let (eigen_evidence, margin) =
        positivity_scan(&LinearCovariantMap::new(&params)?, samples, seed)?;
    Ok(RegionReport { params, closed_form_member, eigen_evidence, margin })
}

/// Positivity of the affine family `(1-p-q) id + p Phi_2 + q Phi_4` for real
/// `(p, q)`: positive exactly on `{q >= 0, 0 <= 5p+3q <= 5, 5p+9q <= 10}`.
pub fn positivity_region_cov22(p: f64, q: f64, samples: usize, seed: u64) -> Result<RegionReport> {
    let params = FamilyParams::Cov22 { p, q };
    let closed_form_member =
        q >= 0.0 && 5.0 * p + 3.0 * q >= 0.0 && 5.0 * p + 3.0 * q <= 5.0 && 5.0 * p + 9.0 * q <= 10.0;
    let (eigen_evidence, margin) =
        positivity_scan(&LinearCovariantMap::new(&params)?, samples, seed)?;
    Ok(RegionReport { params, closed_form_member, eigen_evidence, margin })
}

fn conjugate_transpose_by(r: &DenseMatrix, x: &DenseMatrix) -> DenseMatrix {
    r.matmul(&x.transpose()).matmul(&r.dagger())
}

fn max_unit_defect(
    dim: usize,
    map: impl Fn(&DenseMatrix) -> Result<DenseMatrix>,
    reference: impl Fn(&DenseMatrix) -> Result<DenseMatrix>,
) -> Result<f64> {
    let mut defect: f64 = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            let unit = DenseMatrix::matrix_unit(dim, a, b);
            let diff = map(&unit)?.sub(&reference(&unit)?);
            defect = defect.max(diff.max_abs_entry());
        }
    }
    Ok(defect)
}

/// Entrywise defect of the boundary identity
/// `Phi_{(l+2)/(l+1)}(rho) = R_l (Phi_{l-1}(rho))^t R_l^*` over all four
/// matrix units, certifying decomposability at the positivity boundary.
pub fn cov1l_boundary_decomposition_defect(l: usize) -> Result<f64> {
    let p = (l as f64 + 2.0) / (l as f64 + 1.0);
    let map = LinearCovariantMap::new(&FamilyParams::Cov1L { l, p })?;
    let lower = cg_channel(1, l, l - 1)?;
    let r = r_matrix(l);
    max_unit_defect(
        2,
        |x| map.apply(x),
        |x| Ok(conjugate_transpose_by(&r, &lower.apply(x)?)),
    )
}

/// Entrywise defects of the two vertex identities of the positivity polygon:
/// at `(p, q) = (-1, 5/3)` the map is `rho -> R_2 rho^t R_2^*`, and at
/// `(1/2, 5/6)` it is `rho -> (Tr(rho) Id - rho)/2 = R_2 (Phi_2(rho))^t R_2^*`
/// (the larger of the two deviations is reported for the second vertex).
pub fn cov22_vertex_decomposition_defects() -> Result<(f64, f64)> {
    let r = r_matrix(2);
    let transpose_vertex = LinearCovariantMap::new(&FamilyParams::Cov22 { p: -1.0, q: 5.0 / 3.0 })?;
    let first = max_unit_defect(
        3,
        |x| transpose_vertex.apply(x),
        |x| Ok(conjugate_transpose_by(&r, x)),
    )?;

    let reduction_vertex = LinearCovariantMap::new(&FamilyParams::Cov22 { p: 0.5, q: 5.0 / 6.0 })?;
    let middle = cg_channel(2, 2, 2)?;
    let against_reduction = max_unit_defect(
        3,
        |x| reduction_vertex.apply(x),
        |x| {
            let id = DenseMatrix::identity(3).scale(Complex64::new(x.trace().re, x.trace().im));
            Ok(id.sub(x).scale_re(0.5))
        },
    )?;
    let against_conjugation = max_unit_defect(
        3,
        |x| reduction_vertex.apply(x),
        |x| Ok(conjugate_transpose_by(&r, &middle.apply(x)?)),
    )?;
    Ok((first, against_reduction.max(against_conjugation)))
}

/// Parameter points 0.05 beyond each positivity facet, where the Monte Carlo
/// scan must find an output eigenvalue below -1e-4.
pub fn cov1l_outside_facet_points(l: usize) -> [f64; 2] {
    [-0.05, (l as f64 + 2.0) / (l as f64 + 1.0) + 0.05]
}

/// Midpoint of each facet of the positivity polygon pushed 0.05 along the
/// outward normal.
pub fn cov22_outside_facet_points() -> [(f64, f64); 4] {
    let push = |mid: (f64, f64), normal: (f64, f64)| {
        let len = (normal.0 * normal.0 + normal.1 * normal.1).sqrt();
        (mid.0 + 0.05 * normal.0 / len, mid.1 + 0.05 * normal.1 / len)
    };
    [
        push((0.0, 0.0), (0.0, -1.0)),
        push((-0.5, 5.0 / 6.0), (-5.0, -3.0)),
        push((0.75, 5.0 / 12.0), (5.0, 3.0)),
        push((-0.25, 1.25), (5.0, 9.0)),
    ]
}
