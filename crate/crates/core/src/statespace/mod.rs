//! Continuous and discrete LTI state-space models.
//!
//! Time is in hours and frequency in radians per hour throughout. The
//! transfer function matrix `G(s) = C (sI − A)⁻¹ B + D` is evaluated on the
//! imaginary axis for continuous models and on the unit circle
//! (`z = e^{jω·ts}`) for discrete ones.

mod file;
mod grid;

pub use file::{ModelDocument, ModelKind, ModelMetadata, OperatingPointRecord};
pub use grid::{FrequencyGrid, GridScale};

use crate::numerics::{
    complex_solve, eigenvalues, expm, Complex64, ComplexMatrix, NumericsError, RealMatrix,
};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateSpaceError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("duplicate {kind} label {label:?}")]
    DuplicateLabel { kind: &'static str, label: String },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("resolvent is numerically singular at omega = {omega} rad/h")]
    Singular { omega: f64 },
    #[error("omega = {omega} rad/h exceeds the Nyquist limit {nyquist} rad/h")]
    AboveNyquist { omega: f64, nyquist: f64 },
    #[error("sampling rate undefined: the state matrix has an all-zero spectrum")]
    UndefinedRate,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("model file: {0}")]
    Format(String),
}

/// Channel names for states, inputs and outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelLabels {
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl ChannelLabels {
    /// `x1.., u1.., y1..`.
    pub fn generic(n: usize, m: usize, p: usize) -> Self {
        let gen = |prefix: &str, k: usize| (1..=k).map(|i| format!("{prefix}{i}")).collect();
        Self {
            states: gen("x", n),
            inputs: gen("u", m),
            outputs: gen("y", p),
        }
    }

    fn validate(&self, n: usize, m: usize, p: usize) -> Result<(), StateSpaceError> {
        for (kind, list, want) in [
            ("state", &self.states, n),
            ("input", &self.inputs, m),
            ("output", &self.outputs, p),
        ] {
            if list.len() != want {
                return Err(StateSpaceError::Dimension(format!(
                    "{} {kind} labels for {want} {kind}s",
                    list.len()
                )));
            }
            let mut seen = HashSet::new();
            for l in list {
                if !seen.insert(l.as_str()) {
                    return Err(StateSpaceError::DuplicateLabel {
                        kind,
                        label: l.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Unit annotation carried by every model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub time: String,
    pub frequency: String,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            time: "h".into(),
            frequency: "rad/h".into(),
        }
    }
}

/// The `(A, B, C, D)` quadruple shared by both model kinds.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadruple {
    pub a: RealMatrix,
    pub b: RealMatrix,
    pub c: RealMatrix,
    pub d: RealMatrix,
}

impl Quadruple {
    pub fn new(
        a: RealMatrix,
        b: RealMatrix,
        c: RealMatrix,
        d: RealMatrix,
    ) -> Result<Self, StateSpaceError> {
        if !a.is_square() {
            return Err(StateSpaceError::Dimension(format!(
                "A must be square, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        if b.rows() != n {
            return Err(StateSpaceError::Dimension(format!(
                "B has {} rows, expected {n}",
                b.rows()
            )));
        }
        if c.cols() != n {
            return Err(StateSpaceError::Dimension(format!(
                "C has {} columns, expected {n}",
                c.cols()
            )));
        }
        if d.shape() != (c.rows(), b.cols()) {
            return Err(StateSpaceError::Dimension(format!(
                "D is {}x{}, expected {}x{}",
                d.rows(),
                d.cols(),
                c.rows(),
                b.cols()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn n_states(&self) -> usize {
        self.a.rows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.cols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.rows()
    }

    /// `C (sI − A)⁻¹ B + D` at an arbitrary complex point.
    pub fn transfer_at(&self, s: Complex64) -> Result<ComplexMatrix, NumericsError> {
        let n = self.n_states();
        let mut resolvent = self.a.scaled(-1.0).to_complex();
        for i in 0..n {
            resolvent[(i, i)] += s;
        }
        let x = complex_solve(&resolvent, &self.b.to_complex())?;
        self.c.to_complex().matmul(&x)?.add(&self.d.to_complex())
    }
}

/// Continuous-time LTI model `ẋ = A x + B u`, `y = C x + D u`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousLinearModel {
    pub sys: Quadruple,
    pub labels: ChannelLabels,
    pub units: Units,
}

/// Discrete-time LTI model `x⁺ = A x + B u`, `y = C x + D u` with period `ts` hours.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteLinearModel {
    pub sys: Quadruple,
    pub ts: f64,
    pub labels: ChannelLabels,
    pub units: Units,
}

impl ContinuousLinearModel {
    pub fn new(
        a: RealMatrix,
        b: RealMatrix,
        c: RealMatrix,
        d: RealMatrix,
    ) -> Result<Self, StateSpaceError> {
        let sys = Quadruple::new(a, b, c, d)?;
        let labels = ChannelLabels::generic(sys.n_states(), sys.n_inputs(), sys.n_outputs());
        Ok(Self {
            sys,
            labels,
            units: Units::default(),
        })
    }

    pub fn with_labels(mut self, labels: ChannelLabels) -> Result<Self, StateSpaceError> {
        labels.validate(
            self.sys.n_states(),
            self.sys.n_inputs(),
            self.sys.n_outputs(),
        )?;
        self.labels = labels;
        Ok(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>, NumericsError> {
        eigenvalues(&self.sys.a)
    }

    /// `G(jω)` for `ω ≥ 0`.
    pub fn frequency_response(&self, omega: f64) -> Result<ComplexMatrix, StateSpaceError> {
        if !omega.is_finite() || omega < 0.0 {
            return Err(StateSpaceError::Parameter(format!(
                "omega must be finite and nonnegative, got {omega}"
            )));
        }
        self.sys
            .transfer_at(Complex64::new(0.0, omega))
            .map_err(|e| singular_at(e, omega))
    }
}

impl DiscreteLinearModel {
    pub fn new(
        a: RealMatrix,
        b: RealMatrix,
        c: RealMatrix,
        d: RealMatrix,
        ts: f64,
    ) -> Result<Self, StateSpaceError> {
        validate_period(ts)?;
        let sys = Quadruple::new(a, b, c, d)?;
        let labels = ChannelLabels::generic(sys.n_states(), sys.n_inputs(), sys.n_outputs());
        Ok(Self {
            sys,
            ts,
            labels,
            units: Units::default(),
        })
    }

    pub fn with_labels(mut self, labels: ChannelLabels) -> Result<Self, StateSpaceError> {
        labels.validate(
            self.sys.n_states(),
            self.sys.n_inputs(),
            self.sys.n_outputs(),
        )?;
        self.labels = labels;
        Ok(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>, NumericsError> {
        eigenvalues(&self.sys.a)
    }

    /// Nyquist frequency `π / ts` in rad/h.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.ts
    }

    /// `G(e^{jω·ts})` for `0 ≤ ω ≤ π/ts`.
    pub fn frequency_response(&self, omega: f64) -> Result<ComplexMatrix, StateSpaceError> {
        if !omega.is_finite() || omega < 0.0 {
            return Err(StateSpaceError::Parameter(format!(
                "omega must be finite and nonnegative, got {omega}"
            )));
        }
        let nyquist = self.nyquist();
        if omega > nyquist * (1.0 + 1e-12) {
            return Err(StateSpaceError::AboveNyquist { omega, nyquist });
        }
        let z = Complex64::from_polar(1.0, omega * self.ts);
        self.sys.transfer_at(z).map_err(|e| singular_at(e, omega))
    }
}

fn singular_at(e: NumericsError, omega: f64) -> StateSpaceError {
    match e {
        NumericsError::Singular { .. } => StateSpaceError::Singular { omega },
        other => StateSpaceError::Numerics(other),
    }
}

pub(crate) fn validate_period(ts: f64) -> Result<(), StateSpaceError> {
    if !(ts.is_finite() && ts > 0.0) {
        return Err(StateSpaceError::Parameter(format!(
            "sampling period must be positive and finite, got {ts}"
        )));
    }
    Ok(())
}

/// Either kind of model; the unit the diagnostics operate on.
#[derive(Clone, Debug, PartialEq)]
pub enum LinearModel {
    Continuous(ContinuousLinearModel),
    Discrete(DiscreteLinearModel),
}

impl LinearModel {
    pub fn sys(&self) -> &Quadruple {
        match self {
            LinearModel::Continuous(m) => &m.sys,
            LinearModel::Discrete(m) => &m.sys,
        }
    }

    pub fn labels(&self) -> &ChannelLabels {
        match self {
            LinearModel::Continuous(m) => &m.labels,
            LinearModel::Discrete(m) => &m.labels,
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            LinearModel::Continuous(_) => ModelKind::Continuous,
            LinearModel::Discrete(_) => ModelKind::Discrete,
        }
    }

    pub fn ts(&self) -> Option<f64> {
        match self {
            LinearModel::Continuous(_) => None,
            LinearModel::Discrete(m) => Some(m.ts),
        }
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>, NumericsError> {
        eigenvalues(&self.sys().a)
    }

    pub fn frequency_response(&self, omega: f64) -> Result<ComplexMatrix, StateSpaceError> {
        match self {
            LinearModel::Continuous(m) => m.frequency_response(omega),
            LinearModel::Discrete(m) => m.frequency_response(omega),
        }
    }
}

impl From<ContinuousLinearModel> for LinearModel {
    fn from(m: ContinuousLinearModel) -> Self {
        LinearModel::Continuous(m)
    }
}

impl From<DiscreteLinearModel> for LinearModel {
    fn from(m: DiscreteLinearModel) -> Self {
        LinearModel::Discrete(m)
    }
}

/// Zero-order-hold discretization.
///
/// `A_d = e^{A·ts}` and `B_d = ∫₀^{ts} e^{Aτ} dτ · B`, both read off the
/// exponential of the augmented matrix `[[A, B], [0, 0]]·ts`.
pub fn c2d_zoh(
    ct: &ContinuousLinearModel,
    ts: f64,
) -> Result<DiscreteLinearModel, StateSpaceError> {
    validate_period(ts)?;
    let n = ct.sys.n_states();
    let m = ct.sys.n_inputs();
    let mut aug = RealMatrix::zeros(n + m, n + m);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = ct.sys.a[(i, j)] * ts;
        }
        for j in 0..m {
            aug[(i, n + j)] = ct.sys.b[(i, j)] * ts;
        }
    }
    let e = expm(&aug)?;
    let mut ad = RealMatrix::zeros(n, n);
    let mut bd = RealMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..n {
            ad[(i, j)] = e[(i, j)];
        }
        for j in 0..m {
            bd[(i, j)] = e[(i, n + j)];
        }
    }
    Ok(DiscreteLinearModel {
        sys: Quadruple::new(ad, bd, ct.sys.c.clone(), ct.sys.d.clone())?,
        ts,
        labels: ct.labels.clone(),
        units: ct.units.clone(),
    })
}

/// Sampling period suggested by the Nyquist rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingSuggestion {
    /// Fastest mode `max |λ|` in 1/h.
    pub max_modulus: f64,
    /// `1 / (2 · max |λ|)` in hours.
    pub raw: f64,
    /// `raw` rounded down to one significant figure.
    pub rounded: f64,
}

/// Sampling at twice the fastest eigenvalue magnitude of `A`.
pub fn suggest_sampling_time(
    ct: &ContinuousLinearModel,
) -> Result<SamplingSuggestion, StateSpaceError> {
    let eig = ct.eigenvalues()?;
    let max_modulus = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let n = ct.sys.n_states() as f64;
    if max_modulus == 0.0 || max_modulus <= n * f64::EPSILON * ct.sys.a.norm1() {
        return Err(StateSpaceError::UndefinedRate);
    }
    Ok(sampling_from_modulus(max_modulus))
}

/// The Nyquist rule applied to a known fastest eigenvalue magnitude.
pub fn sampling_from_modulus(max_modulus: f64) -> SamplingSuggestion {
    let raw = 1.0 / (2.0 * max_modulus);
    SamplingSuggestion {
        max_modulus,
        raw,
        rounded: round_down_one_significant(raw),
    }
}

fn round_down_one_significant(x: f64) -> f64 {
    let exp = x.log10().floor() as i32;
    let scaled = if exp >= 0 {
        x / 10f64.powi(exp)
    } else {
        x * 10f64.powi(-exp)
    };
    // guard against 4.999…9 from the decimal shift
    let mut digit = (scaled * (1.0 + 4.0 * f64::EPSILON)).floor();
    let mut exp = exp;
    if digit >= 10.0 {
        digit = 1.0;
        exp += 1;
    }
    if exp >= 0 {
        digit * 10f64.powi(exp)
    } else {
        digit / 10f64.powi(-exp)
    }
}
