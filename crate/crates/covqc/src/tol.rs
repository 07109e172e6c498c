//! Central tolerance configuration.
//!
//! Every numerical comparison in the crate reads its tolerance from here so
//! that the acceptance harness can reason about (and deliberately override)
//! them in one place. The values are deliberate choices, not guesses:
//! constructions are exact up to rounding, so validation thresholds sit a few
//! orders of magnitude above f64 epsilon, while statistical checks get
//! tolerances derived from their sample counts.

/// Tolerances used by constructions, validators and the acceptance checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max absolute entry of `A - A^dagger` for a matrix to count as Hermitian.
    pub hermiticity: f64,
    /// Allowed deviation of a density-matrix trace from 1.
    pub unit_trace: f64,
    /// Eigenvalues in `[-psd_floor, 0)` are clamped to 0; anything below
    /// `-psd_floor` is a genuine positivity violation.
    pub psd_floor: f64,
    /// Jacobi stops once the off-diagonal Frobenius mass drops below
    /// `jacobi_rel * ||A||_F`.
    pub jacobi_rel: f64,
    /// `||A - V diag(w) V^dagger||_F <= eig_reconstruction * max(1, ||A||_F)`.
    pub eig_reconstruction: f64,
    /// Trace-preservation defect allowed when constructing a channel.
    pub trace_preserving: f64,
    /// Entrywise tolerance for channel actions against closed forms.
    pub action: f64,
    /// Covariance residual allowed for the constructed channels.
    pub covariance: f64,
    /// Numerical spectra vs closed-form spectra (PPT tests, witnesses).
    pub closed_form: f64,
    /// Frobenius gap accepted for the 1e5-sample Haar twirl average.
    pub twirl_gap: f64,
    /// Brute-force minimum output entropy vs the closed-form minimum.
    pub moe_brute_force: f64,
    /// Agreement with the recorded three-digit output entropies at the
    /// qutrit reference point (0.5, 0.5).
    pub moe_reference: f64,
    /// Termination threshold (in entropy) of the local descent refinement.
    pub descent: f64,
    /// Two candidate minimizers closer than this count as a tie.
    pub minimizer_tie: f64,
    /// Entrywise tolerance for the decomposability identities.
    pub decomposability: f64,
    /// A witness entry must pass this magnitude before we conclude anything.
    pub witness: f64,
    /// Agreement of the two-copy probe entropies with their recorded values.
    pub two_copy_entropy: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermiticity: 1e-12,
        unit_trace: 1e-12,
        psd_floor: 1e-10,
        jacobi_rel: 1e-14,
        eig_reconstruction: 1e-10,
        trace_preserving: 1e-12,
        action: 1e-12,
        covariance: 1e-9,
        closed_form: 1e-10,
        twirl_gap: 0.03,
        moe_brute_force: 1e-6,
        moe_reference: 5e-3,
        descent: 1e-10,
        minimizer_tie: 1e-9,
        decomposability: 1e-12,
        witness: 1e-10,
        two_copy_entropy: 5e-4,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::DEFAULT
    }
}

/// The crate-wide default tolerance record.
pub const DEFAULT: Tolerances = Tolerances::DEFAULT;
