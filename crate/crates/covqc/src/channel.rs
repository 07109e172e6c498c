//! Quantum channels in Kraus form and the three covariant families.
//!
//! A Clebsch-Gordan channel `Phi^{k->l}_m` sends `B(H_k)` to `B(H_l)` through
//! the Stinespring isometry `H_k -> H_l (x) H_m` built from CG coefficients,
//! with `H_m` the traced-out environment. The families studied here are
//!
//! * `Cov1L`:  `Phi_p = (1-p) Phi^{1->l}_{l-1} + p Phi^{1->l}_{l+1}`,
//! * `CovL1`:  `Psi_p = (1-p) Phi^{l->1}_{l-1} + p Phi^{l->1}_{l+1}`,
//! * `Cov22`:  `N_{p,q} = (1-p-q) Phi^{2->2}_0 + p Phi^{2->2}_2 + q Phi^{2->2}_4`.
//!
//! Kraus lists of mixtures are the square-root-weighted concatenations of the
//! endpoint lists, in that order. This ordering is part of the public
//! contract: environment indices in the degradability witnesses refer to it.

use serde::{Deserialize, Serialize};

use crate::linalg::{Complex64, DenseMatrix};
use crate::su2::CgTable;
use crate::tol::DEFAULT as TOL;
use crate::{Error, Result};

/// A completely positive map `X -> sum_i K_i X K_i^dagger` with no
/// normalization requirement on the Kraus operators.
#[derive(Debug, Clone)]
pub struct KrausMap {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<DenseMatrix>,
}

impl KrausMap {
    pub fn new(kraus: Vec<DenseMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParams("empty Kraus list".into()))?;
        let (out_dim, in_dim) = (first.rows, first.cols);
        for k in &kraus {
            if k.rows != out_dim || k.cols != in_dim {
                return Err(Error::DimensionMismatch { expected: out_dim * in_dim, got: k.rows * k.cols });
            }
        }
        Ok(KrausMap { in_dim, out_dim, kraus })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[DenseMatrix] {
        &self.kraus
    }

    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.rows != self.in_dim || x.cols != self.in_dim {
            return Err(Error::DimensionMismatch { expected: self.in_dim, got: x.rows });
        }
        let mut out = DenseMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out = out.add(&k.matmul(x).matmul(&k.dagger()));
        }
        Ok(out)
    }

    /// `max_abs_entry` of `sum K^dagger K - Id`, zero exactly when the map is
    /// trace-preserving.
    pub fn completeness_defect(&self) -> f64 {
        let mut acc = DenseMatrix::zeros(self.in_dim, self.in_dim);
        for k in &self.kraus {
            acc = acc.add(&k.dagger().matmul(k));
        }
        acc.sub(&DenseMatrix::identity(self.in_dim)).max_abs_entry()
    }

    /// The adjoint map with respect to the Hilbert-Schmidt pairing; its Kraus
    /// operators are the daggers. Unital when `self` is trace-preserving, but
    /// generally not trace-preserving itself.
    pub fn adjoint(&self) -> KrausMap {
        KrausMap {
            in_dim: self.out_dim,
            out_dim: self.in_dim,
            kraus: self.kraus.iter().map(DenseMatrix::dagger).collect(),
        }
    }
}

/// A trace-preserving [`KrausMap`], validated at construction.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    map: KrausMap,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<DenseMatrix>) -> Result<Self> {
        let map = KrausMap::new(kraus)?;
        let defect = map.completeness_defect();
        if defect > TOL.trace_preserving {
            return Err(Error::NotTracePreserving { defect });
        }
        Ok(QuantumChannel { map })
    }

    pub fn in_dim(&self) -> usize {
        self.map.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.map.out_dim
    }

    /// Dimension of the environment in the Stinespring dilation defined by
    /// this Kraus list, i.e. the number of Kraus operators.
    pub fn env_dim(&self) -> usize {
        self.map.kraus.len()
    }

    pub fn kraus(&self) -> &[DenseMatrix] {
        &self.map.kraus
    }

    pub fn as_map(&self) -> &KrausMap {
        &self.map
    }

    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.map.apply(x)
    }

    pub fn adjoint(&self) -> KrausMap {
        self.map.adjoint()
    }

    /// The Choi matrix `C = sum_{ij} |i><j| (x) Phi(|i><j|)` on
    /// `H_in (x) H_out`, unnormalized (trace equals `in_dim`).
    pub fn choi(&self) -> ChoiMatrix {
        let (da, db) = (self.in_dim(), self.out_dim());
        let mut mat = DenseMatrix::zeros(da * db, da * db);
        for k in &self.map.kraus {
            // C = sum_k w w^dagger with w[i*db + a] = K[a, i].
            let w: Vec<Complex64> =
                (0..da * db).map(|r| k.get(r % db, r / db)).collect();
            mat = mat.add(&crate::linalg::outer(&w, &w));
        }
        ChoiMatrix { in_dim: da, out_dim: db, mat }
    }

    /// The complementary channel `Phi^c(X) = [Tr(K_i X K_j^dagger)]_{ij}`,
    /// mapping inputs to the environment defined by this Kraus list.
    pub fn complementary(&self) -> QuantumChannel {
        let (da, db) = (self.in_dim(), self.out_dim());
        let ne = self.env_dim();
        let kraus = (0..db)
            .map(|b| {
                DenseMatrix::from_fn(ne, da, |i, a| self.map.kraus[i].get(b, a))
            })
            .collect();
        QuantumChannel::new(kraus).expect("complementary channel inherits trace preservation")
    }

    /// Tensor product channel with Kraus operators `K_i (x) M_j`, pairs
    /// enumerated with the left factor's index major.
    pub fn tensor(&self, other: &QuantumChannel) -> QuantumChannel {
        let mut kraus = Vec::with_capacity(self.env_dim() * other.env_dim());
        for k in &self.map.kraus {
            for m in &other.map.kraus {
                kraus.push(k.kron(m));
            }
        }
        QuantumChannel::new(kraus).expect("tensor product of channels is a channel")
    }
}

/// Choi matrix of a channel together with its leg dimensions. The input leg
/// is the major index: entry `((i,a),(j,b))` sits at row `i*out_dim + a`.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    pub in_dim: usize,
    pub out_dim: usize,
    pub mat: DenseMatrix,
}

impl ChoiMatrix {
    /// Partial transpose on the output leg, the operator tested by the PPT
    /// criterion.
    pub fn partial_transpose_output(&self) -> DenseMatrix {
        self.mat.partial_transpose(self.in_dim, self.out_dim, false)
    }
}

/// The Clebsch-Gordan channel `Phi^{k->l}_m` with environment `H_m`.
///
/// Kraus operators are slices of the coupling isometry: `K_j[b, a]` is the
/// `|b, j>` component of column `a`, for `j = 0..m`.
pub fn cg_channel(k: usize, l: usize, m: usize) -> Result<QuantumChannel> {
    let table = CgTable::new(l, m, k)?;
    let v = table.isometry();
    let kraus = (0..=m)
        .map(|j| DenseMatrix::from_fn(l + 1, k + 1, |b, a| v.get(b * (m + 1) + j, a)))
        .collect();
    QuantumChannel::new(kraus)
}

/// Parameters of one of the three covariant families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FamilyParams {
    Cov1L { l: usize, p: f64 },
    CovL1 { l: usize, p: f64 },
    Cov22 { p: f64, q: f64 },
}

impl FamilyParams {
    pub fn family_name(&self) -> &'static str {
        match self {
            FamilyParams::Cov1L { .. } => "Cov1L",
            FamilyParams::CovL1 { .. } => "CovL1",
            FamilyParams::Cov22 { .. } => "Cov22",
        }
    }

    /// Irrep labels (input, output) of the representation pair the family is
    /// covariant with respect to.
    pub fn irrep_labels(&self) -> (usize, usize) {
        match *self {
            FamilyParams::Cov1L { l, .. } => (1, l),
            FamilyParams::CovL1 { l, .. } => (l, 1),
            FamilyParams::Cov22 { .. } => (2, 2),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.irrep_labels().0 + 1
    }

    pub fn out_dim(&self) -> usize {
        self.irrep_labels().1 + 1
    }

    /// Errs unless the parameters describe a channel (mixture weights in the
    /// simplex). Linear maps outside the simplex are handled by
    /// [`crate::witnesses::LinearCovariantMap`], never by a Kraus list.
    pub fn validate_channel_regime(&self) -> Result<()> {
        const SLACK: f64 = 1e-12;
        match *self {
            FamilyParams::Cov1L { l, p } | FamilyParams::CovL1 { l, p } => {
                if l == 0 {
                    return Err(Error::InvalidParams("family requires l >= 1".into()));
                }
                if !(-SLACK..=1.0 + SLACK).contains(&p) {
                    return Err(Error::InvalidParams(format!(
                        "p = {p} outside [0,1]; outside the simplex only a LinearCovariantMap exists"
                    )));
                }
            }
            FamilyParams::Cov22 { p, q } => {
                if !(-SLACK..=1.0 + SLACK).contains(&p)
                    || !(-SLACK..=1.0 + SLACK).contains(&q)
                    || p + q > 1.0 + SLACK
                {
                    return Err(Error::InvalidParams(format!(
                        "(p,q) = ({p},{q}) outside the simplex; use a LinearCovariantMap instead"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn scaled(kraus: &[DenseMatrix], weight: f64) -> Vec<DenseMatrix> {
    let s = weight.max(0.0).sqrt();
    kraus.iter().map(|k| k.scale_re(s)).collect()
}

/// Construct the channel for parameters inside the simplex. The Kraus list is
/// the weighted concatenation over the family's extreme points, preserving
/// each extreme point's own Kraus order.
pub fn family_channel(params: &FamilyParams) -> Result<QuantumChannel> {
    params.validate_channel_regime()?;
    match *params {
        FamilyParams::Cov1L { l, p } => {
            let lower = cg_channel(1, l, l - 1)?;
            let upper = cg_channel(1, l, l + 1)?;
            let mut kraus = scaled(lower.kraus(), 1.0 - p);
            kraus.extend(scaled(upper.kraus(), p));
            QuantumChannel::new(kraus)
        }
        FamilyParams::CovL1 { l, p } => {
            let forward = family_channel(&FamilyParams::Cov1L { l, p })?;
            let scale = ((l + 1) as f64 / 2.0).sqrt();
            let kraus = forward.kraus().iter().map(|k| k.dagger().scale_re(scale)).collect();
            QuantumChannel::new(kraus)
        }
        FamilyParams::Cov22 { p, q } => {
            let mut kraus = scaled(cg_channel(2, 2, 0)?.kraus(), 1.0 - p - q);
            kraus.extend(scaled(cg_channel(2, 2, 2)?.kraus(), p));
            kraus.extend(scaled(cg_channel(2, 2, 4)?.kraus(), q));
            QuantumChannel::new(kraus)
        }
    }
}

/// Largest deviation from covariance over all matrix-unit probes:
/// `max_X || Phi(pi_k(U) X pi_k(U)^dagger) - pi_l(U) Phi(X) pi_l(U)^dagger ||_F`.
pub fn covariance_residual(map: &KrausMap, k: usize, l: usize, u: &crate::su2::Su2Element) -> Result<f64> {
    if map.in_dim() != k + 1 || map.out_dim() != l + 1 {
        return Err(Error::DimensionMismatch { expected: k + 1, got: map.in_dim() });
    }
    let pk = crate::su2::wigner_pi(k, u);
    let pl = crate::su2::wigner_pi(l, u);
    let mut worst = 0.0f64;
    for a in 0..=k {
        for b in 0..=k {
            let x = DenseMatrix::matrix_unit(k + 1, a, b);
            let rotated_in = map.apply(&pk.matmul(&x).matmul(&pk.dagger()))?;
            let rotated_out = pl.matmul(&map.apply(&x)?).matmul(&pl.dagger());
            worst = worst.max(rotated_in.sub(&rotated_out).frobenius_norm());
        }
    }
    Ok(worst)
}

/// JSON-serializable dump of a family channel: parameters plus the Kraus
/// list, each operator as row-major `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelDump {
    pub family: String,
    pub l: usize,
    pub p: f64,
    pub q: Option<f64>,
    pub kraus: Vec<Vec<[f64; 2]>>,
}

impl ChannelDump {
    pub fn new(params: &FamilyParams) -> Result<Self> {
        let channel = family_channel(params)?;
        let (l, p, q) = match *params {
            FamilyParams::Cov1L { l, p } | FamilyParams::CovL1 { l, p } => (l, p, None),
            FamilyParams::Cov22 { p, q } => (2, p, Some(q)),
        };
        let kraus = channel
            .kraus()
            .iter()
            .map(|k| k.data.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        Ok(ChannelDump { family: params.family_name().to_string(), l, p, q, kraus })
    }

    pub fn params(&self) -> Result<FamilyParams> {
        match (self.family.as_str(), self.q) {
            ("Cov1L", None) => Ok(FamilyParams::Cov1L { l: self.l, p: self.p }),
            ("CovL1", None) => Ok(FamilyParams::CovL1 { l: self.l, p: self.p }),
            ("Cov22", Some(q)) => Ok(FamilyParams::Cov22 { p: self.p, q }),
            _ => Err(Error::InvalidParams(format!("unrecognized family dump: {}", self.family))),
        }
    }

    pub fn reconstruct(&self) -> Result<QuantumChannel> {
        let params = self.params()?;
        let (rows, cols) = (params.out_dim(), params.in_dim());
        let kraus = self
            .kraus
            .iter()
            .map(|flat| {
                if flat.len() != rows * cols {
                    return Err(Error::DimensionMismatch { expected: rows * cols, got: flat.len() });
                }
                let mut m = DenseMatrix::zeros(rows, cols);
                for (idx, &[re, im]) in flat.iter().enumerate() {
                    m.data[idx] = Complex64::new(re, im);
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        QuantumChannel::new(kraus)
    }
}

/// Closed-form actions of the extreme channels, used to cross-check the
/// Clebsch-Gordan constructions entrywise.
pub(crate) mod reference {
    use crate::linalg::{DenseMatrix, ZERO};

    /// Action of `Phi^{1->l}_{l-1}` on a 2x2 input.
    pub(crate) fn lower_action(l: usize, x: &DenseMatrix) -> DenseMatrix {
        let c = 2.0 / (l as f64 * (l + 1) as f64);
        DenseMatrix::from_fn(l + 1, l + 1, |i, j| {
            if i == j {
                c * ((l - i) as f64 * x.get(0, 0) + i as f64 * x.get(1, 1))
            } else if j == i + 1 {
                c * ((l - i) as f64 * (i + 1) as f64).sqrt() * x.get(0, 1)
            } else if i == j + 1 {
                c * ((l - j) as f64 * (j + 1) as f64).sqrt() * x.get(1, 0)
            } else {
                ZERO
            }
        })
    }

    /// Action of `Phi^{1->l}_{l+1}` on a 2x2 input.
    pub(crate) fn upper_action(l: usize, x: &DenseMatrix) -> DenseMatrix {
        let c = 2.0 / ((l + 1) as f64 * (l + 2) as f64);
        DenseMatrix::from_fn(l + 1, l + 1, |i, j| {
            if i == j {
                c * ((i + 1) as f64 * x.get(0, 0) + (l - i + 1) as f64 * x.get(1, 1))
            } else if j == i + 1 {
                -c * ((l - i) as f64 * (i + 1) as f64).sqrt() * x.get(0, 1)
            } else if i == j + 1 {
                -c * ((l - j) as f64 * (j + 1) as f64).sqrt() * x.get(1, 0)
            } else {
                ZERO
            }
        })
    }

    /// The three displayed qutrit extreme-point actions, `m` in {0, 2, 4}.
    pub(crate) fn cov22_action(m: usize, a: &DenseMatrix) -> DenseMatrix {
        let g = |i: usize, j: usize| a.get(i, j);
        match m {
            0 => a.clone(),
            2 => DenseMatrix::from_fn(3, 3, |r, c| match (r, c) {
                (0, 0) => g(0, 0) + g(1, 1),
                (0, 1) => g(1, 2),
                (0, 2) => -g(0, 2),
                (1, 0) => g(2, 1),
                (1, 1) => g(0, 0) + g(2, 2),
                (1, 2) => g(0, 1),
                (2, 0) => -g(2, 0),
                (2, 1) => g(1, 0),
                _ => g(1, 1) + g(2, 2),
            })
            .scale_re(0.5),
            4 => DenseMatrix::from_fn(3, 3, |r, c| match (r, c) {
                (0, 0) => g(0, 0) + 3.0 * g(1, 1) + 6.0 * g(2, 2),
                (0, 1) => -2.0 * g(0, 1) - 3.0 * g(1, 2),
                (0, 2) => g(0, 2),
                (1, 0) => -2.0 * g(1, 0) - 3.0 * g(2, 1),
                (1, 1) => 3.0 * g(0, 0) + 4.0 * g(1, 1) + 3.0 * g(2, 2),
                (1, 2) => -3.0 * g(0, 1) - 2.0 * g(1, 2),
                (2, 0) => g(2, 0),
                (2, 1) => -3.0 * g(1, 0) - 2.0 * g(2, 1),
                _ => 6.0 * g(0, 0) + 3.0 * g(1, 1) + g(2, 2),
            })
            .scale_re(0.1),
            _ => unreachable!("only the extreme labels 0, 2, 4 have displayed forms"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, hermitian_eigenvalues, ket, outer, DensityMatrix};
    use crate::su2::{self, haar_su2, haar_state, r_matrix};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn unit(dim: usize, a: usize, b: usize) -> DenseMatrix {
        DenseMatrix::matrix_unit(dim, a, b)
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    /// Asserts `got = sign * want` for a single global sign, entrywise.
    fn assert_equal_up_to_sign(got: &DenseMatrix, want: &DenseMatrix, tol: f64, ctx: &str) {
        let direct = got.sub(want).max_abs_entry();
        let flipped = got.add(want).max_abs_entry();
        assert!(
            direct < tol || flipped < tol,
            "{ctx}: neither sign matches (defects {direct:.3e}, {flipped:.3e})"
        );
    }

    /// The tabulated Kraus list of `Phi^{1->l}_{l-1}`, 0-based index `i-1`.
    fn tabulated_kraus_lower(l: usize) -> Vec<DenseMatrix> {
        let norm = (2.0 / (l as f64 * (l + 1) as f64)).sqrt();
        (1..=l)
            .map(|i| {
                let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
                let mut k = DenseMatrix::zeros(l + 1, 2);
                k.set(l - i, 0, re(norm * sign * (i as f64).sqrt()));
                k.set(l - i + 1, 1, re(norm * sign * ((l - i + 1) as f64).sqrt()));
                k
            })
            .collect()
    }

    /// The tabulated Kraus list of `Phi^{1->l}_{l+1}`, 0-based index `i-1`.
    fn tabulated_kraus_upper(l: usize) -> Vec<DenseMatrix> {
        let norm = (2.0 / ((l + 1) as f64 * (l + 2) as f64)).sqrt();
        (1..=l + 2)
            .map(|i| {
                let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
                let mut k = DenseMatrix::zeros(l + 1, 2);
                if i <= l + 1 {
                    k.set(l + 1 - i, 0, re(norm * sign * ((l + 2 - i) as f64).sqrt()));
                }
                if i >= 2 {
                    k.set(l + 2 - i, 1, re(-norm * sign * ((i - 1) as f64).sqrt()));
                }
                k
            })
            .collect()
    }

    #[test]
    fn lower_block_matches_the_tabulated_kraus_up_to_block_sign() {
        for l in 1..=6 {
            let channel = cg_channel(1, l, l - 1).unwrap();
            let tabulated = tabulated_kraus_lower(l);
            assert_eq!(channel.env_dim(), l);
            // One global sign per environment block, shared by all its Kraus
            // operators, so compare the stacked isometries.
            let stack = |list: &[DenseMatrix]| {
                DenseMatrix::from_fn(list.len() * (l + 1), 2, |r, c| {
                    list[r / (l + 1)].get(r % (l + 1), c)
                })
            };
            assert_equal_up_to_sign(&stack(channel.kraus()), &stack(&tabulated), 1e-12, &format!("l={l}"));
        }
    }

    #[test]
    fn upper_block_matches_the_tabulated_kraus_up_to_block_sign() {
        for l in 1..=6 {
            let channel = cg_channel(1, l, l + 1).unwrap();
            let tabulated = tabulated_kraus_upper(l);
            assert_eq!(channel.env_dim(), l + 2);
            let stack = |list: &[DenseMatrix]| {
                DenseMatrix::from_fn(list.len() * (l + 1), 2, |r, c| {
                    list[r / (l + 1)].get(r % (l + 1), c)
                })
            };
            assert_equal_up_to_sign(&stack(channel.kraus()), &stack(&tabulated), 1e-12, &format!("l={l}"));
        }
    }

    /// The nine tabulated Kraus operators of the `Cov22` extreme points.
    fn tabulated_kraus_cov22() -> [Vec<DenseMatrix>; 3] {
        let s2 = 0.5f64.sqrt();
        let s10 = 10.0f64.sqrt();
        let mut k2 = DenseMatrix::zeros(3, 3);
        k2.set(1, 0, re(s2));
        k2.set(2, 1, re(s2));
        let mut k3 = DenseMatrix::zeros(3, 3);
        k3.set(0, 0, re(-s2));
        k3.set(2, 2, re(s2));
        let k4 = k2.dagger().scale_re(-1.0);
        let mut k5 = DenseMatrix::zeros(3, 3);
        k5.set(2, 0, re(6.0f64.sqrt() / s10));
        let mut k6 = DenseMatrix::zeros(3, 3);
        k6.set(1, 0, re(-3.0f64.sqrt() / s10));
        k6.set(2, 1, re(3.0f64.sqrt() / s10));
        let mut k7 = DenseMatrix::zeros(3, 3);
        k7.set(0, 0, re(1.0 / s10));
        k7.set(1, 1, re(-2.0 / s10));
        k7.set(2, 2, re(1.0 / s10));
        let k8 = k6.dagger().scale_re(-1.0);
        let k9 = k5.dagger();
        [vec![DenseMatrix::identity(3)], vec![k2, k3, k4], vec![k5, k6, k7, k8, k9]]
    }

    #[test]
    fn qutrit_blocks_match_the_tabulated_kraus_up_to_block_sign() {
        let tabulated = tabulated_kraus_cov22();
        for (idx, m) in [0usize, 2, 4].into_iter().enumerate() {
            let channel = cg_channel(2, 2, m).unwrap();
            assert_eq!(channel.env_dim(), m + 1);
            let stack = |list: &[DenseMatrix]| {
                DenseMatrix::from_fn(list.len() * 3, 3, |r, c| list[r / 3].get(r % 3, c))
            };
            assert_equal_up_to_sign(
                &stack(channel.kraus()),
                &stack(&tabulated[idx]),
                1e-12,
                &format!("m={m}"),
            );
        }
    }

    use super::reference::{cov22_action, lower_action, upper_action};

    #[test]
    fn qubit_to_spin_l_actions_match_closed_forms() {
        for l in 1..=6 {
            let lower = cg_channel(1, l, l - 1).unwrap();
            let upper = cg_channel(1, l, l + 1).unwrap();
            for a in 0..2 {
                for b in 0..2 {
                    let x = unit(2, a, b);
                    let dl = lower.apply(&x).unwrap().sub(&lower_action(l, &x)).max_abs_entry();
                    let du = upper.apply(&x).unwrap().sub(&upper_action(l, &x)).max_abs_entry();
                    assert!(dl < 1e-12, "lower l={l} unit ({a},{b}): {dl:.3e}");
                    assert!(du < 1e-12, "upper l={l} unit ({a},{b}): {du:.3e}");
                }
            }
        }
    }

    #[test]
    fn qutrit_extreme_point_actions_match_closed_forms() {
        for m in [0, 2, 4] {
            let channel = cg_channel(2, 2, m).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    let x = unit(3, a, b);
                    let d = channel.apply(&x).unwrap().sub(&cov22_action(m, &x)).max_abs_entry();
                    assert!(d < 1e-12, "m={m} unit ({a},{b}): {d:.3e}");
                }
            }
        }
    }

    #[test]
    fn reference_outputs_on_basis_states() {
        let phi = cg_channel(1, 2, 1).unwrap().apply(&unit(2, 0, 0)).unwrap();
        for (i, want) in [2.0 / 3.0, 1.0 / 3.0, 0.0].into_iter().enumerate() {
            assert!((phi.get(i, i).re - want).abs() < 1e-14);
        }
        let phi = cg_channel(1, 2, 3).unwrap().apply(&unit(2, 0, 0)).unwrap();
        for (i, want) in [1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0].into_iter().enumerate() {
            assert!((phi.get(i, i).re - want).abs() < 1e-14);
        }
        let phi = cg_channel(2, 2, 2).unwrap().apply(&unit(3, 0, 0)).unwrap();
        for (i, want) in [0.5, 0.5, 0.0].into_iter().enumerate() {
            assert!((phi.get(i, i).re - want).abs() < 1e-14);
        }
        let (p, q) = (0.3, 0.25);
        let n = family_channel(&FamilyParams::Cov22 { p, q }).unwrap();
        let out = n.apply(&unit(3, 1, 1)).unwrap();
        let want = [p / 2.0 + 3.0 * q / 10.0, 1.0 - p - 6.0 * q / 10.0, p / 2.0 + 3.0 * q / 10.0];
        for (i, w) in want.into_iter().enumerate() {
            assert!((out.get(i, i).re - w).abs() < 1e-14);
        }
        assert!(out.sub(&out.dagger()).max_abs_entry() < 1e-15);
    }

    #[test]
    fn family_mixture_weights_and_endpoints() {
        let l = 3;
        let endpoint = family_channel(&FamilyParams::Cov1L { l, p: 0.0 }).unwrap();
        assert_eq!(endpoint.env_dim(), 2 * l + 2);
        let pure_lower = cg_channel(1, l, l - 1).unwrap();
        let x = unit(2, 0, 1);
        let d = endpoint.apply(&x).unwrap().sub(&pure_lower.apply(&x).unwrap()).max_abs_entry();
        assert!(d < 1e-15);

        let p = 0.37;
        let mixed = family_channel(&FamilyParams::Cov1L { l, p }).unwrap();
        let upper = cg_channel(1, l, l + 1).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let x = unit(2, a, b);
                let want = pure_lower
                    .apply(&x)
                    .unwrap()
                    .scale_re(1.0 - p)
                    .add(&upper.apply(&x).unwrap().scale_re(p));
                assert!(mixed.apply(&x).unwrap().sub(&want).max_abs_entry() < 1e-14);
            }
        }
    }

    #[test]
    fn covl1_matches_scaled_adjoints_and_reference_action() {
        for l in 1..=4 {
            let scale = (l + 1) as f64 / 2.0;
            for (m, p) in [(l - 1, 0.0), (l + 1, 1.0)] {
                let from_family = family_channel(&FamilyParams::CovL1 { l, p }).unwrap();
                let direct = cg_channel(l, 1, m).unwrap();
                let adjoint = cg_channel(1, l, m).unwrap().adjoint();
                for a in 0..=l {
                    for b in 0..=l {
                        let x = unit(l + 1, a, b);
                        let via_family = from_family.apply(&x).unwrap();
                        let via_adjoint = adjoint.apply(&x).unwrap().scale_re(scale);
                        let via_direct = direct.apply(&x).unwrap();
                        assert!(via_family.sub(&via_adjoint).max_abs_entry() < 1e-13);
                        assert!(via_family.sub(&via_direct).max_abs_entry() < 1e-12);
                    }
                }
            }
        }

        let (l, p) = (2usize, 0.4);
        let psi = family_channel(&FamilyParams::CovL1 { l, p }).unwrap();
        let mu = p * (l + 1) as f64 / (l + 2) as f64;
        let out = psi.apply(&unit(l + 1, 0, 0)).unwrap();
        assert!((out.get(0, 0).re - (1.0 - mu)).abs() < 1e-14);
        assert!((out.get(1, 1).re - mu).abs() < 1e-14);
        assert!(out.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn adjoint_satisfies_trace_duality_and_involution() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let channels = [
            cg_channel(1, 3, 2).unwrap(),
            family_channel(&FamilyParams::Cov22 { p: 0.2, q: 0.35 }).unwrap(),
        ];
        for channel in &channels {
            let adj = channel.adjoint();
            let (da, db) = (channel.in_dim(), channel.out_dim());
            for _ in 0..20 {
                let x = outer(&haar_state(da, &mut rng), &haar_state(da, &mut rng));
                let y = outer(&haar_state(db, &mut rng), &haar_state(db, &mut rng));
                let lhs = channel.apply(&x).unwrap().matmul(&y).trace();
                let rhs = x.matmul(&adj.apply(&y).unwrap()).trace();
                assert!((lhs - rhs).norm() < 1e-10);

                let twice = adj.adjoint().apply(&x).unwrap();
                assert!(twice.sub(&channel.apply(&x).unwrap()).max_abs_entry() < 1e-12);
            }
            // The adjoint of a channel is unital, not trace-preserving.
            let unital_defect = adj
                .apply(&DenseMatrix::identity(db))
                .unwrap()
                .sub(&DenseMatrix::identity(da))
                .max_abs_entry();
            assert!(unital_defect < 1e-12);
        }
    }

    #[test]
    fn complementary_of_unitary_channel_is_scalar_trace() {
        let id = QuantumChannel::new(vec![DenseMatrix::identity(3)]).unwrap();
        let comp = id.complementary();
        assert_eq!(comp.out_dim(), 1);
        let mut x = unit(3, 0, 0).scale_re(0.25);
        x = x.add(&unit(3, 2, 2).scale_re(0.5));
        x = x.add(&unit(3, 1, 2).scale_re(0.1));
        let out = comp.apply(&x).unwrap();
        assert!((out.get(0, 0) - x.trace()).norm() < 1e-15);
    }

    #[test]
    fn complementary_environment_entries_track_the_upper_weight() {
        for l in 2..=4 {
            for p in [0.15, 0.5, 0.85] {
                let channel = family_channel(&FamilyParams::Cov1L { l, p }).unwrap();
                let comp = channel.complementary();
                assert_eq!(comp.out_dim(), 2 * l + 2);
                let from_zero = comp.apply(&unit(2, 0, 0)).unwrap();
                let from_one = comp.apply(&unit(2, 1, 1)).unwrap();
                let corner = 2 * l + 1;
                assert!(from_zero.get(corner, corner).norm() < 1e-14);
                let want = 2.0 * p / (l + 2) as f64;
                assert!((from_one.get(corner, corner).re - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn complementary_twice_preserves_output_spectra() {
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let channel = family_channel(&FamilyParams::Cov1L { l: 2, p: 0.3 }).unwrap();
        let double = channel.complementary().complementary();
        for _ in 0..10 {
            let rho = outer(&haar_state(2, &mut rng), &haar_state(2, &mut rng));
            let rho = rho.matmul(&rho.dagger());
            let rho = rho.scale(re(1.0) / rho.trace());
            let h1 = linalg::entropy_of_spectrum(
                &hermitian_eigenvalues(&channel.apply(&rho).unwrap()).unwrap().values,
            )
            .unwrap();
            let h2 = linalg::entropy_of_spectrum(
                &hermitian_eigenvalues(&double.apply(&rho).unwrap()).unwrap().values,
            )
            .unwrap();
            assert!((h1 - h2).abs() < 1e-9);
        }
    }

    #[test]
    fn choi_reference_matrices() {
        let id = QuantumChannel::new(vec![DenseMatrix::identity(2)]).unwrap();
        let mut want = DenseMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                want = want.add(&unit(2, i, j).kron(&unit(2, i, j)));
            }
        }
        assert!(id.choi().mat.sub(&want).max_abs_entry() < 1e-15);

        for l in 1..=3 {
            let p_dep = (l + 2) as f64 / (2 * (l + 1)) as f64;
            let choi = family_channel(&FamilyParams::Cov1L { l, p: p_dep }).unwrap().choi();
            let dim = 2 * (l + 1);
            let want = DenseMatrix::identity(dim).scale_re(1.0 / (l + 1) as f64);
            assert!(choi.mat.sub(&want).max_abs_entry() < 1e-13, "depolarizing point l={l}");
        }
    }

    #[test]
    fn choi_jamiolkowski_reconstructs_the_action() {
        let channel = cg_channel(1, 1, 2).unwrap();
        let choi = channel.choi();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..10 {
            let x = outer(&haar_state(2, &mut rng), &haar_state(2, &mut rng));
            let contracted = x
                .transpose()
                .kron(&DenseMatrix::identity(2))
                .matmul(&choi.mat)
                .trace_out_first(2, 2);
            assert!(contracted.sub(&channel.apply(&x).unwrap()).max_abs_entry() < 1e-13);
        }
    }

    #[test]
    fn choi_invariants_and_affinity() {
        let channel = family_channel(&FamilyParams::Cov22 { p: 0.25, q: 0.4 }).unwrap();
        let choi = channel.choi();
        assert!(choi.mat.hermiticity_defect() < 1e-13);
        assert!((choi.mat.trace().re - 3.0).abs() < 1e-10);
        let reduced = choi.mat.trace_out_second(3, 3);
        assert!(reduced.sub(&DenseMatrix::identity(3)).max_abs_entry() < 1e-10);
        let eigs = hermitian_eigenvalues(&choi.mat).unwrap();
        assert!(eigs.min() > -1e-10);

        let choi_at = |p: f64, q: f64| family_channel(&FamilyParams::Cov22 { p, q }).unwrap().choi().mat;
        let mid = choi_at(0.25, 0.4);
        let avg = choi_at(0.1, 0.55).add(&choi_at(0.4, 0.25)).scale_re(0.5);
        assert!(mid.sub(&avg).max_abs_entry() < 1e-12);

        let choi_1l = |p: f64| family_channel(&FamilyParams::Cov1L { l: 2, p }).unwrap().choi().mat;
        let mid = choi_1l(0.4);
        let avg = choi_1l(0.2).add(&choi_1l(0.6)).scale_re(0.5);
        assert!(mid.sub(&avg).max_abs_entry() < 1e-12);
    }

    #[test]
    fn constructed_channels_are_covariant() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let cases = [
            FamilyParams::Cov1L { l: 2, p: 0.3 },
            FamilyParams::Cov1L { l: 5, p: 0.9 },
            FamilyParams::CovL1 { l: 3, p: 0.5 },
            FamilyParams::Cov22 { p: 0.2, q: 0.5 },
        ];
        for params in &cases {
            let channel = family_channel(params).unwrap();
            let (k, l) = params.irrep_labels();
            for _ in 0..20 {
                let u = haar_su2(&mut rng);
                let residual = covariance_residual(channel.as_map(), k, l, &u).unwrap();
                assert!(residual < 1e-9, "{params:?}: residual {residual:.3e}");
            }
            let u = su2::Su2Element::identity();
            assert!(covariance_residual(channel.as_map(), k, l, &u).unwrap() < 1e-15);
        }
    }

    #[test]
    fn tampered_kraus_breaks_covariance() {
        let channel = family_channel(&FamilyParams::Cov1L { l: 2, p: 0.3 }).unwrap();
        let mut kraus: Vec<DenseMatrix> = channel.kraus().to_vec();
        let bumped = kraus[0].get(0, 0) + re(1e-3);
        kraus[0].set(0, 0, bumped);
        let broken = KrausMap::new(kraus).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let u = haar_su2(&mut rng);
            worst = worst.max(covariance_residual(&broken, 1, 2, &u).unwrap());
        }
        assert!(worst > 1e-5, "perturbation went undetected: {worst:.3e}");
    }

    #[test]
    fn werner_holevo_conjugates_appear_in_the_family() {
        let r2 = r_matrix(2);
        let sym = family_channel(&FamilyParams::Cov22 { p: 0.0, q: 5.0 / 6.0 }).unwrap();
        let asym = family_channel(&FamilyParams::Cov22 { p: 1.0, q: 0.0 }).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let x = unit(3, a, b);
                let w_sym = DenseMatrix::identity(3)
                    .scale(x.trace())
                    .add(&x.transpose())
                    .scale_re(0.25);
                let want = r2.matmul(&w_sym).matmul(&r2.dagger());
                assert!(sym.apply(&x).unwrap().sub(&want).max_abs_entry() < 1e-12);

                let w_asym = DenseMatrix::identity(3)
                    .scale(x.trace())
                    .sub(&x.transpose())
                    .scale_re(0.5);
                let want = r2.matmul(&w_asym).matmul(&r2.dagger());
                assert!(asym.apply(&x).unwrap().sub(&want).max_abs_entry() < 1e-12);
            }
        }
    }

    #[test]
    fn tensor_channel_acts_as_product_on_product_inputs() {
        let phi = family_channel(&FamilyParams::Cov1L { l: 2, p: 0.1 }).unwrap();
        let two = phi.tensor(&phi);
        assert_eq!(two.in_dim(), 4);
        assert_eq!(two.out_dim(), 9);
        assert_eq!(two.env_dim(), 36);
        let x = unit(2, 0, 1);
        let y = unit(2, 1, 1);
        let want = phi.apply(&x).unwrap().kron(&phi.apply(&y).unwrap());
        let got = two.apply(&x.kron(&y)).unwrap();
        assert!(got.sub(&want).max_abs_entry() < 1e-13);

        // Complementary of a product is the product of complementaries.
        let comp_two = two.complementary();
        let comp_one = phi.complementary();
        let got = comp_two.apply(&x.kron(&y)).unwrap();
        let want = comp_one.apply(&x).unwrap().kron(&comp_one.apply(&y).unwrap());
        assert!(got.sub(&want).max_abs_entry() < 1e-13);
    }

    #[test]
    fn parameter_validation_rejects_out_of_simplex_points() {
        assert!(family_channel(&FamilyParams::Cov1L { l: 2, p: -0.1 }).is_err());
        assert!(family_channel(&FamilyParams::Cov1L { l: 2, p: 1.1 }).is_err());
        assert!(family_channel(&FamilyParams::Cov1L { l: 0, p: 0.5 }).is_err());
        assert!(family_channel(&FamilyParams::Cov22 { p: 0.6, q: 0.6 }).is_err());
        assert!(family_channel(&FamilyParams::Cov22 { p: -0.2, q: 0.1 }).is_err());
        assert!(matches!(cg_channel(1, 2, 2), Err(Error::InadmissibleTriple { .. })));

        let channel = family_channel(&FamilyParams::Cov1L { l: 2, p: 0.5 }).unwrap();
        assert!(matches!(
            channel.apply(&DenseMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dump_round_trips_through_json() {
        for params in [
            FamilyParams::Cov1L { l: 3, p: 0.125 },
            FamilyParams::CovL1 { l: 2, p: 0.7 },
            FamilyParams::Cov22 { p: 0.3, q: 0.45 },
        ] {
            let dump = ChannelDump::new(&params).unwrap();
            let text = serde_json::to_string(&dump).unwrap();
            let parsed: ChannelDump = serde_json::from_str(&text).unwrap();
            assert_eq!(parsed.params().unwrap(), params);
            let original = family_channel(&params).unwrap();
            let rebuilt = parsed.reconstruct().unwrap();
            assert_eq!(original.env_dim(), rebuilt.env_dim());
            for (a, b) in original.kraus().iter().zip(rebuilt.kraus()) {
                assert_eq!(a.data, b.data, "serialization must be lossless");
            }
        }
    }

    proptest! {
        #[test]
        fn family_channels_are_trace_preserving(p in 0.0f64..1.0, q in 0.0f64..1.0, l in 1usize..5) {
            let q = q * (1.0 - p);
            for params in [
                FamilyParams::Cov1L { l, p },
                FamilyParams::CovL1 { l, p },
                FamilyParams::Cov22 { p, q },
            ] {
                let channel = family_channel(&params).unwrap();
                prop_assert!(channel.as_map().completeness_defect() <= 1e-12);
            }
        }

        #[test]
        fn apply_preserves_trace_and_hermiticity(p in 0.0f64..1.0, seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let channel = family_channel(&FamilyParams::Cov1L { l: 3, p }).unwrap();
            let rho = DensityMatrix::from_pure(&haar_state(2, &mut rng)).unwrap();
            let out = channel.apply(rho.matrix()).unwrap();
            prop_assert!((out.trace().re - 1.0).abs() < 1e-12);
            prop_assert!(out.trace().im.abs() < 1e-12);
            prop_assert!(out.hermiticity_defect() < 1e-12);
            let eigs = hermitian_eigenvalues(&out).unwrap();
            prop_assert!(eigs.min() > -1e-10);
        }

        #[test]
        fn choi_of_channel_is_positive(p in 0.0f64..1.0, q in 0.0f64..1.0) {
            let q = q * (1.0 - p);
            let choi = family_channel(&FamilyParams::Cov22 { p, q }).unwrap().choi();
            let eigs = hermitian_eigenvalues(&choi.mat).unwrap();
            prop_assert!(eigs.min() > -1e-10);
            prop_assert!((eigs.sum() - 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn kraus_map_basics() {
        assert!(KrausMap::new(vec![]).is_err());
        let mismatched = vec![DenseMatrix::zeros(2, 2), DenseMatrix::zeros(3, 2)];
        assert!(KrausMap::new(mismatched).is_err());
        let half = KrausMap::new(vec![DenseMatrix::identity(2).scale_re(0.5)]).unwrap();
        assert!(half.completeness_defect() > 0.7);
        assert!(QuantumChannel::new(vec![DenseMatrix::identity(2).scale_re(0.5)]).is_err());
        let ket0 = ket(2, 0);
        let out = half.apply(&outer(&ket0, &ket0)).unwrap();
        assert!((out.get(0, 0).re - 0.25).abs() < 1e-15);
    }
}
