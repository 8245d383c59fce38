//! Problem parameters, radial potentials and hypothesis surrogates.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::gauss_legendre;
use crate::radial::RadialGrid;
use crate::real::Real;

/// Exponents, coupling and mass of `-Δu + Vu + λu = |u|^{q-2}u + β|u|^{p-2}u`, `∫u² = α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ProblemParams<T> {
    #[serde(rename = "N")]
    pub n: usize,
    pub p: T,
    pub q: T,
    pub beta: T,
    pub alpha: T,
}

/// The strict inequalities an admissible tuple must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Inequality {
    DimensionAtLeastThree,
    PAboveTwo,
    PBelowMassCritical,
    QAboveMassCritical,
    QBelowSobolevCritical,
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Inequality::DimensionAtLeastThree => "N >= 3",
            Inequality::PAboveTwo => "2 < p",
            Inequality::PBelowMassCritical => "p < 2 + 4/N",
            Inequality::QAboveMassCritical => "2 + 4/N < q",
            Inequality::QBelowSobolevCritical => "q < 2N/(N-2)",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("exponent order violated: {0} does not hold")]
    ExponentOrderViolation(Inequality),
    #[error("mass alpha must be positive")]
    NonpositiveMass,
    #[error("parameter {0} is not finite")]
    NonfiniteParameter(&'static str),
    #[error("N/2-norm of the potential is infinite: {0}")]
    TailNotIntegrable(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
}

/// Parameters that passed [`validate_params`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct ValidatedParams<T>(ProblemParams<T>);

impl<T: Real> ValidatedParams<T> {
    pub fn get(&self) -> &ProblemParams<T> {
        &self.0
    }
    pub fn n(&self) -> usize {
        self.0.n
    }
    pub fn dim(&self) -> T {
        T::of(self.0.n)
    }
    pub fn p(&self) -> T {
        self.0.p
    }
    pub fn q(&self) -> T {
        self.0.q
    }
    pub fn beta(&self) -> T {
        self.0.beta
    }
    pub fn alpha(&self) -> T {
        self.0.alpha
    }

    /// Same exponents and coupling, different mass.
    pub fn with_alpha(&self, alpha: T) -> Result<Self, ModelError> {
        validate_params(ProblemParams { alpha, ..self.0 })
    }

    /// Same exponents and mass, different coupling.
    pub fn with_beta(&self, beta: T) -> Result<Self, ModelError> {
        validate_params(ProblemParams { beta, ..self.0 })
    }

    /// N(p-2)/2, below 2.
    pub fn gamma_p(&self) -> T {
        self.dim() * (self.p() - T::lit(2.0)) / T::lit(2.0)
    }

    /// N(q-2)/2, above 2.
    pub fn gamma_q(&self) -> T {
        self.dim() * (self.q() - T::lit(2.0)) / T::lit(2.0)
    }
}

/// Accepts exactly the tuples with N ≥ 3, 2 < p < 2+4/N < q < 2N/(N-2), α > 0.
pub fn validate_params<T: Real>(params: ProblemParams<T>) -> Result<ValidatedParams<T>, ModelError> {
    let ProblemParams { n, p, q, beta, alpha } = params;
    for (name, v) in [("p", p), ("q", q), ("beta", beta), ("alpha", alpha)] {
        if !v.is_finite() {
            return Err(ModelError::NonfiniteParameter(name));
        }
    }
    if n < 3 {
        return Err(ModelError::ExponentOrderViolation(Inequality::DimensionAtLeastThree));
    }
    let nn = T::of(n);
    let two = T::lit(2.0);
    let mass_crit = two + T::lit(4.0) / nn;
    let sobolev = two * nn / (nn - two);
    let checks = [
        (two < p, Inequality::PAboveTwo),
        (p < mass_crit, Inequality::PBelowMassCritical),
        (mass_crit < q, Inequality::QAboveMassCritical),
        (q < sobolev, Inequality::QBelowSobolevCritical),
    ];
    for (ok, which) in checks {
        if !ok {
            return Err(ModelError::ExponentOrderViolation(which));
        }
    }
    if alpha <= T::zero() {
        return Err(ModelError::NonpositiveMass);
    }
    Ok(ValidatedParams(params))
}

/// Config-file form of a potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum PotentialSpec<T> {
    Zero,
    PowerDecay { c: T, tau: T },
    Custom { radii: Vec<T>, values: Vec<T> },
}

/// Monotone cubic (Fritsch–Butland) interpolant of tabulated V.
#[derive(Clone, Debug, PartialEq)]
pub struct Tabulated<T> {
    radii: Vec<T>,
    values: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> Tabulated<T> {
    pub fn new(radii: Vec<T>, values: Vec<T>) -> Result<Self, ModelError> {
        if radii.len() != values.len() || radii.len() < 2 {
            return Err(ModelError::InvalidPotential(
                "custom potential needs at least two (radius, value) pairs of equal length".into(),
            ));
        }
        if radii[0] < T::zero() || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::InvalidPotential("radii must be nonnegative and strictly increasing".into()));
        }
        if radii.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidPotential("non-finite table entry".into()));
        }
        let slopes = pchip_slopes(&radii, &values);
        Ok(Self { radii, values, slopes })
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    fn locate(&self, s: T) -> Option<usize> {
        let n = self.radii.len();
        if s <= self.radii[0] || s >= self.radii[n - 1] {
            return None;
        }
        let k = self.radii.partition_point(|r| *r <= s);
        Some(k - 1)
    }

    pub fn value(&self, s: T) -> T {
        let n = self.radii.len();
        match self.locate(s) {
            None if s <= self.radii[0] => self.values[0],
            None => self.values[n - 1],
            Some(k) => {
                let (h, t) = self.local(k, s);
                let (h00, h10, h01, h11) = hermite_basis(t);
                h00 * self.values[k] + h10 * h * self.slopes[k] + h01 * self.values[k + 1] + h11 * h * self.slopes[k + 1]
            }
        }
    }

    pub fn derivative(&self, s: T) -> T {
        match self.locate(s) {
            None => T::zero(),
            Some(k) => {
                let (h, t) = self.local(k, s);
                let six = T::lit(6.0);
                let one = T::one();
                let d00 = six * t * t - six * t;
                let d10 = T::lit(3.0) * t * t - T::lit(4.0) * t + one;
                let d01 = -d00;
                let d11 = T::lit(3.0) * t * t - T::lit(2.0) * t;
                (d00 * self.values[k] + d01 * self.values[k + 1]) / h + d10 * self.slopes[k] + d11 * self.slopes[k + 1]
            }
        }
    }

    fn local(&self, k: usize, s: T) -> (T, T) {
        let h = self.radii[k + 1] - self.radii[k];
        (h, (s - self.radii[k]) / h)
    }
}

fn hermite_basis<T: Real>(t: T) -> (T, T, T, T) {
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let t2 = t * t;
    let t3 = t2 * t;
    (two * t3 - three * t2 + one, t3 - two * t2 + t, -two * t3 + three * t2, t3 - t2)
}

fn pchip_slopes<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    let n = x.len();
    let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<T> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut d = vec![T::zero(); n];
    if n == 2 {
        d[0] = del[0];
        d[1] = del[0];
        return d;
    }
    let two = T::lit(2.0);
    for k in 1..n - 1 {
        if del[k - 1] * del[k] > T::zero() {
            let w1 = two * h[k] + h[k - 1];
            let w2 = h[k] + two * h[k - 1];
            d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
    }
    d[0] = pchip_end(h[0], h[1], del[0], del[1]);
    d[n - 1] = pchip_end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    d
}

fn pchip_end<T: Real>(h0: T, h1: T, del0: T, del1: T) -> T {
    let two = T::lit(2.0);
    let d = ((two * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        T::zero()
    } else if del0.signum() != del1.signum() && d.abs() > T::lit(3.0) * del0.abs() {
        T::lit(3.0) * del0
    } else {
        d
    }
}

/// Radial potential V(|x|).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialSpec<T>", into = "PotentialSpec<T>", bound = "T: Real")]
pub enum RadialPotential<T> {
    Zero,
    /// V(s) = -c/(1+s^τ).
    PowerDecay { c: T, tau: T },
    Custom(Tabulated<T>),
}

impl<T: Real> TryFrom<PotentialSpec<T>> for RadialPotential<T> {
    type Error = ModelError;
    fn try_from(spec: PotentialSpec<T>) -> Result<Self, ModelError> {
        match spec {
            PotentialSpec::Zero => Ok(Self::Zero),
            PotentialSpec::PowerDecay { c, tau } => Self::power_decay(c, tau),
            PotentialSpec::Custom { radii, values } => Ok(Self::Custom(Tabulated::new(radii, values)?)),
        }
    }
}

impl<T: Real> From<RadialPotential<T>> for PotentialSpec<T> {
    fn from(v: RadialPotential<T>) -> Self {
        match v {
            RadialPotential::Zero => PotentialSpec::Zero,
            RadialPotential::PowerDecay { c, tau } => PotentialSpec::PowerDecay { c, tau },
            RadialPotential::Custom(t) => PotentialSpec::Custom { radii: t.radii, values: t.values },
        }
    }
}

impl<T: Real> RadialPotential<T> {
    pub fn power_decay(c: T, tau: T) -> Result<Self, ModelError> {
        if !(c > T::zero() && c.is_finite()) {
            return Err(ModelError::InvalidPotential("power_decay needs c > 0".into()));
        }
        if !(tau > T::zero() && tau.is_finite()) {
            return Err(ModelError::InvalidPotential("power_decay needs tau > 0".into()));
        }
        Ok(Self::PowerDecay { c, tau })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    pub fn value(&self, s: T) -> T {
        match self {
            Self::Zero => T::zero(),
            Self::PowerDecay { c, tau } => -*c / (T::one() + s.powf(*tau)),
            Self::Custom(t) => t.value(s),
        }
    }

    /// V'(s).
    pub fn derivative(&self, s: T) -> T {
        match self {
            Self::Zero => T::zero(),
            Self::PowerDecay { c, tau } => {
                if s <= T::zero() {
                    return T::zero();
                }
                let st = s.powf(*tau);
                let d = T::one() + st;
                *c * *tau * st / (s * d * d)
            }
            Self::Custom(t) => t.derivative(s),
        }
    }

    /// Ṽ(s) = s V'(s), the radial form of x·∇V.
    pub fn vtilde(&self, s: T) -> T {
        match self {
            Self::Zero => T::zero(),
            Self::PowerDecay { c, tau } => {
                let st = s.powf(*tau);
                let d = T::one() + st;
                *c * *tau * st / (d * d)
            }
            Self::Custom(t) => s * t.derivative(s),
        }
    }

    /// Radii where the profile has extrema or kinks worth sampling for sup-norms.
    fn special_points(&self) -> Vec<T> {
        match self {
            Self::Zero => vec![],
            Self::PowerDecay { .. } => vec![T::zero(), T::one()],
            Self::Custom(t) => t.radii.clone(),
        }
    }
}

/// The five potential norms every threshold uses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PotentialNorms<T> {
    /// ‖V₋‖_{N/2}
    pub v_minus: T,
    /// ‖V‖_{N/2}
    pub v_full: T,
    /// ‖Ṽ₊‖_{N/2}
    pub vtilde_plus: T,
    /// ‖V‖_∞
    pub v_sup: T,
    /// ‖Ṽ‖_∞
    pub vtilde_sup: T,
}

impl<T: Real> PotentialNorms<T> {
    pub fn zero() -> Self {
        let z = T::zero();
        Self { v_minus: z, v_full: z, vtilde_plus: z, v_sup: z, vtilde_sup: z }
    }
}

/// N/2-norms by composite Gauss–Legendre over the grid cells, plus the closed-form tail bound for
/// `PowerDecay` beyond the grid radius; sup-norms over grid nodes and the profile's special points.
pub fn potential_norms<T: Real>(
    v: &RadialPotential<T>,
    n: usize,
    grid: &RadialGrid<T>,
) -> Result<PotentialNorms<T>, ModelError> {
    if v.is_zero() {
        return Ok(PotentialNorms::zero());
    }
    let nn = T::of(n);
    let half_n = nn / T::lit(2.0);
    let big_r = grid.radius();
    let sigma = grid.sigma();
    let mut tail_v = T::zero();
    let mut tail_vt = T::zero();
    match v {
        RadialPotential::PowerDecay { c, tau } => {
            let decay = *tau * half_n;
            if decay <= nn {
                return Err(ModelError::TailNotIntegrable(format!(
                    "tau*N/2 = {} <= N = {}",
                    decay.as_f64(),
                    n
                )));
            }
            // ∫_R^∞ (c s^{-τ})^{N/2} σ s^{N-1} ds
            let geo = sigma * big_r.powf(nn - decay) / (decay - nn);
            tail_v = c.powf(half_n) * geo;
            tail_vt = (*c * *tau).powf(half_n) * geo;
        }
        RadialPotential::Custom(t) => {
            let last = *t.values().last().expect("nonempty table");
            if last != T::zero() {
                return Err(ModelError::TailNotIntegrable(
                    "custom potential must vanish at its last tabulated radius".into(),
                ));
            }
        }
        RadialPotential::Zero => {}
    }
    let rule = gauss_legendre::<T>(6);
    let integrate = |f: &dyn Fn(T) -> T| grid.integrate_fn(f, &rule);
    let v_minus_i = integrate(&|s| (-v.value(s)).max(T::zero()).powf(half_n));
    let v_full_i = integrate(&|s| v.value(s).abs().powf(half_n));
    let vt_plus_i = integrate(&|s| v.vtilde(s).max(T::zero()).powf(half_n));
    let expo = T::lit(2.0) / nn;
    let minus_tail = if v.value(big_r) < T::zero() { tail_v } else { T::zero() };
    let mut v_sup = T::zero();
    let mut vt_sup = T::zero();
    for s in grid.nodes().iter().copied().chain(v.special_points()) {
        v_sup = v_sup.max(v.value(s).abs());
        vt_sup = vt_sup.max(v.vtilde(s).abs());
    }
    Ok(PotentialNorms {
        v_minus: (v_minus_i + minus_tail).powf(expo),
        v_full: (v_full_i + tail_v).powf(expo),
        vtilde_plus: (vt_plus_i + tail_vt).powf(expo),
        v_sup,
        vtilde_sup: vt_sup,
    })
}

/// Norms on a default grid large enough for the tail bound to be negligible.
pub fn potential_norms_default<T: Real>(v: &RadialPotential<T>, n: usize) -> Result<PotentialNorms<T>, ModelError> {
    let mut radius = T::lit(64.0);
    if let RadialPotential::Custom(t) = v {
        radius = radius.max(*t.radii().last().expect("nonempty table"));
    }
    let grid = RadialGrid::new(radius, 8192, n).map_err(|e| ModelError::InvalidPotential(e.to_string()))?;
    potential_norms(v, n, &grid)
}

/// Sampled check of the potential hypotheses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HypothesisReport<T> {
    pub v0_holds: bool,
    /// S - ‖V₋‖_{N/2}
    pub v0_margin: T,
    /// 2S - ‖Ṽ₊‖_{N/2}
    pub vtilde_plus_margin: T,
    /// Sufficient-condition check only: s V'(s) ≥ c₀ s^{-τ₀} at every sampled radius.
    pub v1_sufficient_holds: bool,
    /// Largest local decay exponent of Ṽ between consecutive samples (τ₀ candidate).
    pub v1_tau0: Option<T>,
    /// min_k Ṽ(s_k) s_k^{τ₀} over the samples (c₀ candidate).
    pub v1_c0: Option<T>,
    /// V > 0 somewhere on the sampled radii; allowed but flagged.
    pub v_positive_somewhere: bool,
    pub samples: Vec<T>,
}

/// Radii 2^k, k = -4..=20, where the sufficient decay condition is sampled.
pub fn hypothesis_sample_radii<T: Real>() -> Vec<T> {
    (-4..=20).map(|k| T::lit(2f64.powi(k))).collect()
}

pub fn check_hypotheses<T: Real>(v: &RadialPotential<T>, sobolev: T, norms: &PotentialNorms<T>) -> HypothesisReport<T> {
    let samples = hypothesis_sample_radii::<T>();
    let vt: Vec<T> = samples.iter().map(|s| v.vtilde(*s)).collect();
    let all_positive = vt.iter().all(|x| *x > T::zero() && x.is_finite());
    let (mut tau0, mut c0) = (None, None);
    if all_positive {
        let mut tau = T::zero();
        for k in 0..samples.len() - 1 {
            let local = -(vt[k + 1] / vt[k]).ln() / (samples[k + 1] / samples[k]).ln();
            tau = tau.max(local);
        }
        let c = samples
            .iter()
            .zip(&vt)
            .map(|(s, x)| *x * s.powf(tau))
            .fold(T::infinity(), T::min);
        tau0 = Some(tau);
        c0 = Some(c);
    }
    let v1 = all_positive && c0.is_some_and(|c| c > T::zero() && c.is_finite());
    let positive = samples.iter().any(|s| v.value(*s) > T::zero())
        || v.special_points().iter().any(|s| v.value(*s) > T::zero());
    HypothesisReport {
        v0_holds: norms.v_minus < sobolev,
        v0_margin: sobolev - norms.v_minus,
        vtilde_plus_margin: T::lit(2.0) * sobolev - norms.vtilde_plus,
        v1_sufficient_holds: v1,
        v1_tau0: tau0,
        v1_c0: c0,
        v_positive_somewhere: positive,
        samples,
    }
}
