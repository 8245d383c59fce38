//! Closed-form thresholds, geometry functions, critical radii, energy sandwiches and the a priori
//! H¹ bound, with Ω specialized to the unit ball.

mod geometry;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::ConstantsTable;
use crate::model::{PotentialNorms, ValidatedParams};
use crate::real::{unit_ball_volume, Real};

pub use geometry::{bisect, dyadic_bracket, golden_max, Geometry};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThresholdError {
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("no bracket for {what}; dyadic sign pattern {pattern}")]
    BracketNotFound { what: String, pattern: String },
    #[error("constants table has no Gagliardo-Nirenberg constant for s = {0}")]
    MissingConstant(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    BetaNonpositiveMP,
    BetaPositiveLocalMin,
    BetaPositiveMP,
}

/// Everything the closed forms consume.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdInputs<T> {
    pub params: ValidatedParams<T>,
    pub norms: PotentialNorms<T>,
    /// Aubin–Talenti constant S.
    pub sobolev: T,
    pub c_p: T,
    pub c_q: T,
    /// θ₁ of the unit ball.
    pub theta: T,
    /// |B₁|.
    pub omega: T,
}

impl<T: Real> ThresholdInputs<T> {
    pub fn new(params: ValidatedParams<T>, norms: PotentialNorms<T>, table: &ConstantsTable<T>) -> Result<Self, ThresholdError> {
        let c_p = table.gn(params.p()).ok_or(ThresholdError::MissingConstant(params.p().as_f64()))?;
        let c_q = table.gn(params.q()).ok_or(ThresholdError::MissingConstant(params.q().as_f64()))?;
        Ok(Self {
            params,
            norms,
            sobolev: table.s(),
            c_p,
            c_q,
            theta: table.theta1(),
            omega: unit_ball_volume(params.n()),
        })
    }

    pub fn with_params(&self, params: ValidatedParams<T>) -> Self {
        Self { params, ..self.clone() }
    }

    /// 1 - ‖V₋‖_{N/2} S^{-1}.
    pub fn kappa_minus(&self) -> T {
        T::one() - self.norms.v_minus / self.sobolev
    }

    /// 1 + ‖V‖_{N/2} S^{-1}.
    pub fn kappa_plus(&self) -> T {
        T::one() + self.norms.v_full / self.sobolev
    }

    /// 4 - N(p-2).
    pub fn d(&self) -> T {
        T::lit(4.0) - self.params.dim() * (self.params.p() - T::lit(2.0))
    }

    /// N(q-2) - 4.
    pub fn e(&self) -> T {
        self.params.dim() * (self.params.q() - T::lit(2.0)) - T::lit(4.0)
    }

    /// (q-2)(N(q-2)-4) / ((p-2)(4-N(p-2))).
    pub fn a_pq(&self) -> T {
        let two = T::lit(2.0);
        (self.params.q() - two) * self.e() / ((self.params.p() - two) * self.d())
    }

    /// A = (C_q/q)(A_{p,q} + 1).
    pub fn a_aggregate(&self) -> T {
        self.c_q / self.params.q() * (self.a_pq() + T::one())
    }

    fn require_kappa(&self) -> Result<(), ThresholdError> {
        if self.kappa_minus() > T::zero() {
            Ok(())
        } else {
            Err(ThresholdError::HypothesisViolated(format!(
                "||V_-||_(N/2) = {} is not below S = {}",
                self.norms.v_minus, self.sobolev
            )))
        }
    }

    fn require_beta_positive(&self, what: &str) -> Result<(), ThresholdError> {
        if self.params.beta() > T::zero() {
            Ok(())
        } else {
            Err(ThresholdError::RegimeMismatch(format!("{what} needs beta > 0, got {}", self.params.beta())))
        }
    }
}

/// Local-minimum mass threshold α_V.
pub fn alpha_v<T: Real>(inp: &ThresholdInputs<T>) -> Result<T, ThresholdError> {
    inp.require_beta_positive("alpha_V")?;
    inp.require_kappa()?;
    let pr = &inp.params;
    let (n, p, q, beta) = (pr.dim(), pr.p(), pr.q(), pr.beta());
    let two = T::lit(2.0);
    let (d, e) = (inp.d(), inp.e());
    let b1 = inp.kappa_minus() / (two * n * (q - p));
    let b2 = q * d / inp.c_q;
    let b3 = p * e / (beta * inp.c_p);
    Ok(b1.powf(n / two) * b2.powf(d / (two * (q - p))) * b3.powf(e / (two * (q - p))))
}

/// Mountain-pass mass threshold ã_V.
pub fn alpha_tilde_v<T: Real>(inp: &ThresholdInputs<T>) -> Result<T, ThresholdError> {
    inp.require_beta_positive("alpha_tilde_V")?;
    inp.require_kappa()?;
    let pr = &inp.params;
    let (n, p, q, beta) = (pr.dim(), pr.p(), pr.q(), pr.beta());
    let two = T::lit(2.0);
    let a_pq = inp.a_pq();
    let b1 = two * inp.kappa_minus() / (n * (q - two));
    let b2 = inp.c_q / q * a_pq + inp.c_q / q;
    let b3 = p * inp.c_q / (beta * q * inp.c_p) * a_pq;
    Ok(b1.powf(n / two) * b2.powf(-n / two) * b3.powf(inp.e() / (two * (q - p))))
}

/// Maximizer of φ: (q(4-N(p-2))κ₋/(2N(q-p)C_q))^{2/(N(q-2)-4)} α^{(N(q-2)-2q)/(2(N(q-2)-4))}.
pub fn t_bar<T: Real>(inp: &ThresholdInputs<T>) -> T {
    let pr = &inp.params;
    let (n, p, q, alpha) = (pr.dim(), pr.p(), pr.q(), pr.alpha());
    let two = T::lit(2.0);
    let e = inp.e();
    let base = q * inp.d() * inp.kappa_minus() / (two * n * (q - p) * inp.c_q);
    base.powf(two / e) * alpha.powf((n * (q - two) - two * q) / (two * e))
}

/// βC_p α^{(2p-N(p-2))/4}/p, the level φ(t̄) must exceed.
pub fn phi_level<T: Real>(inp: &ThresholdInputs<T>) -> T {
    let pr = &inp.params;
    let (n, p, beta, alpha) = (pr.dim(), pr.p(), pr.beta(), pr.alpha());
    beta * inp.c_p / p * alpha.powf((T::lit(2.0) * p - n * (p - T::lit(2.0))) / T::lit(4.0))
}

/// Maximizer of g: (2κ₋/(N(q-2)A))^{4/(N(q-2)-4)} α^{(N(q-2)-2q)/(N(q-2)-4)}.
pub fn t_g<T: Real>(inp: &ThresholdInputs<T>) -> T {
    let pr = &inp.params;
    let (n, q, alpha) = (pr.dim(), pr.q(), pr.alpha());
    let two = T::lit(2.0);
    let e = inp.e();
    (two * inp.kappa_minus() / (n * (q - two) * inp.a_aggregate())).powf(T::lit(4.0) / e)
        * alpha.powf((n * (q - two) - two * q) / e)
}

/// Inflection point of f_lower: f'' ≤ 0 iff t ≥ t₂.
pub fn t2<T: Real>(inp: &ThresholdInputs<T>) -> T {
    let pr = &inp.params;
    let (n, p, q, beta, alpha) = (pr.dim(), pr.p(), pr.q(), pr.beta(), pr.alpha());
    let two = T::lit(2.0);
    let base = beta * q * inp.c_p * (p - two) * inp.d() / (p * inp.c_q * (q - two) * inp.e());
    base.powf(T::lit(4.0) / (n * (q - p))) * alpha.powf((n - two) / n)
}

/// Positive root of h_mp_pos: (κ₊qθα^{(2-q)/2}|Ω|^{(q-2)/2})^{2/(N(q-2)-4)}.
pub fn t0_mp_pos<T: Real>(inp: &ThresholdInputs<T>) -> T {
    let pr = &inp.params;
    let (q, alpha) = (pr.q(), pr.alpha());
    let two = T::lit(2.0);
    (inp.kappa_plus() * q * inp.theta * alpha.powf((two - q) / two) * inp.omega.powf((q - two) / two))
        .powf(two / inp.e())
}

/// Maximizer of h_mp_pos: (4qκ₊θ/(N(q-2)) α^{(2-q)/2}|Ω|^{(q-2)/2})^{2/(N(q-2)-4)}.
pub fn t_alpha_mp_pos<T: Real>(inp: &ThresholdInputs<T>) -> T {
    let pr = &inp.params;
    let (n, q, alpha) = (pr.dim(), pr.q(), pr.alpha());
    let two = T::lit(2.0);
    (T::lit(4.0) * q * inp.kappa_plus() * inp.theta / (n * (q - two))
        * alpha.powf((two - q) / two)
        * inp.omega.powf((q - two) / two))
    .powf(two / inp.e())
}

/// Gradient-norm level separating the β ≤ 0 endpoints:
/// (2q/(N(q-2)C_q) κ₋ α^{(q(N-2)-2N)/4})^{4/(N(q-2)-4)}.
pub fn t_tilde<T: Real>(inp: &ThresholdInputs<T>) -> T {
    let pr = &inp.params;
    let (n, q, alpha) = (pr.dim(), pr.q(), pr.alpha());
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    (two * q / (n * (q - two) * inp.c_q) * inp.kappa_minus() * alpha.powf((q * (n - two) - two * n) / four))
        .powf(four / inp.e())
}

/// β ≤ 0 mountain-pass lower bound:
/// (N(q-2)-4)κ₋/(2N(q-2)) · (2qκ₋/(N(q-2)C_q α^{(2q-N(q-2))/4}))^{4/(N(q-2)-4)}.
pub fn mp_lower_neg<T: Real>(inp: &ThresholdInputs<T>) -> T {
    let pr = &inp.params;
    let (n, q, alpha) = (pr.dim(), pr.q(), pr.alpha());
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let e = inp.e();
    let km = inp.kappa_minus();
    e * km / (two * n * (q - two))
        * (two * q * km / (n * (q - two) * inp.c_q * alpha.powf((two * q - n * (q - two)) / four))).powf(four / e)
}

/// β > 0 mountain-pass lower bound, evaluated with S^{-1} in κ₋:
/// (N(q-2)-4)/4 · (2κ₋/(N(q-2)))^{N(q-2)/(N(q-2)-4)} A^{4/(4-N(q-2))} α^{(N(q-2)-2q)/(N(q-2)-4)}.
pub fn mp_lower_pos<T: Real>(inp: &ThresholdInputs<T>) -> T {
    let pr = &inp.params;
    let (n, q, alpha) = (pr.dim(), pr.q(), pr.alpha());
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let e = inp.e();
    let nq = n * (q - two);
    e / four
        * (two * inp.kappa_minus() / nq).powf(nq / e)
        * inp.a_aggregate().powf(four / (four - nq))
        * alpha.powf((nq - two * q) / e)
}

/// β > 0 mountain-pass upper bound:
/// (N(q-2)-4)/2 · (θκ₊/(N(q-2)))^{N(q-2)/(N(q-2)-4)} (4q)^{4/(N(q-2)-4)} |Ω|^{2(q-2)/(N(q-2)-4)}
/// α^{(N(q-2)-2q)/(N(q-2)-4)}.
pub fn mp_upper_pos<T: Real>(inp: &ThresholdInputs<T>) -> T {
    let pr = &inp.params;
    let (n, q, alpha) = (pr.dim(), pr.q(), pr.alpha());
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let e = inp.e();
    let nq = n * (q - two);
    e / two
        * (inp.theta * inp.kappa_plus() / nq).powf(nq / e)
        * (four * q).powf(four / e)
        * inp.omega.powf(two * (q - two) / e)
        * alpha.powf((nq - two * q) / e)
}

/// Second argument of the local-minimum r_α in the form
/// ((2β/p) α^{(p-2)/2} (θκ₊)^{-1} |Ω|^{(2-p)/2})^{2/(N(p-2)-4)},
/// the radius beyond which the dilated eigenfunction has E_r ≤ 0.
pub fn r_alpha_local_decay<T: Real>(inp: &ThresholdInputs<T>) -> T {
    let pr = &inp.params;
    let (n, p, beta, alpha) = (pr.dim(), pr.p(), pr.beta(), pr.alpha());
    let two = T::lit(2.0);
    let base = two * beta / p * alpha.powf((p - two) / two) / (inp.theta * inp.kappa_plus())
        * inp.omega.powf((two - p) / two);
    base.powf(two / (n * (p - two) - T::lit(4.0)))
}

/// The same argument as typeset with the reciprocal base
/// (pθκ₊/(2β) α^{(2-p)/2} |Ω|^{(p-2)/2})^{2/(N(p-2)-4)}; equals 1/[`r_alpha_local_decay`].
pub fn r_alpha_local_reciprocal_form<T: Real>(inp: &ThresholdInputs<T>) -> T {
    let pr = &inp.params;
    let (n, p, beta, alpha) = (pr.dim(), pr.p(), pr.beta(), pr.alpha());
    let two = T::lit(2.0);
    let base = p * inp.theta * inp.kappa_plus() / (two * beta) * alpha.powf((two - p) / two)
        * inp.omega.powf((p - two) / two);
    base.powf(two / (n * (p - two) - T::lit(4.0)))
}

/// 4N/(N(q-2)-4) · ((q-2)/2 · T_level + α(‖Ṽ‖_∞/(2N) + (q-2)/4 · ‖V‖_∞)).
pub fn h1_apriori<T: Real>(inp: &ThresholdInputs<T>, t_level: T) -> T {
    let pr = &inp.params;
    let (n, q, alpha) = (pr.dim(), pr.q(), pr.alpha());
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    four * n / inp.e()
        * ((q - two) / two * t_level
            + alpha * (inp.norms.vtilde_sup / (two * n) + (q - two) / four * inp.norms.v_sup))
}

/// Root-found and closed-form abscissae of the active regime.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CriticalPoints<T> {
    /// max h_mp_neg, an energy value (β ≤ 0).
    #[serde(rename = "T_alpha_level")]
    pub t_alpha_level: Option<T>,
    /// argmax h_loc, a gradient-norm scale (β > 0 local minimum).
    #[serde(rename = "T_alpha_radius")]
    pub t_alpha_radius: Option<T>,
    #[serde(rename = "R1")]
    pub r1: Option<T>,
    #[serde(rename = "R2")]
    pub r2: Option<T>,
    pub t0: Option<T>,
    pub t1: Option<T>,
    pub t_bar: Option<T>,
    pub t_g: Option<T>,
    pub t2: Option<T>,
    /// argmax of the mountain-pass upper-bound function.
    pub t_alpha: Option<T>,
    pub t_tilde: Option<T>,
}

fn missing(what: &str) -> ThresholdError {
    ThresholdError::BracketNotFound { what: what.into(), pattern: String::new() }
}

/// Positive root of a function that is positive on (0, root) and negative after.
fn positive_root<T: Real>(f: impl Fn(T) -> T + Copy, what: &str) -> Result<T, ThresholdError> {
    let mut start = T::one();
    if f(start) <= T::zero() {
        let (lo, _) = dyadic_bracket(f, start, false, what)?;
        start = lo;
    }
    let (lo, hi) = dyadic_bracket(f, start, true, what)?;
    Ok(bisect(f, lo, hi))
}

/// First t in [0, t_max] where `f` reaches `level`, with f increasing there.
fn first_crossing<T: Real>(f: impl Fn(T) -> T, level: T, t_max: T, what: &str) -> Result<T, ThresholdError> {
    if f(t_max) <= level {
        return Err(ThresholdError::BracketNotFound {
            what: what.into(),
            pattern: format!("max {} does not exceed level {}", f(t_max), level),
        });
    }
    Ok(bisect(|t| f(t) - level, T::zero(), t_max))
}

pub fn critical_points<T: Real>(inp: &ThresholdInputs<T>, regime: Regime) -> Result<CriticalPoints<T>, ThresholdError> {
    inp.require_kappa()?;
    check_regime(inp, regime)?;
    let geo = Geometry::new(inp);
    let mut cp = CriticalPoints::default();
    match regime {
        Regime::BetaPositiveLocalMin => {
            let tb = t_bar(inp);
            let h = |t: T| geo.h_loc(t);
            if h(tb) <= T::zero() {
                return Err(ThresholdError::BracketNotFound {
                    what: "h_loc(t_bar) > 0".into(),
                    pattern: format!("h_loc(t_bar) = {}", h(tb)),
                });
            }
            let (a, b) = dyadic_bracket(h, tb, false, "R1")?;
            let r1 = bisect(h, a, b);
            let (a, b) = dyadic_bracket(h, tb, true, "R2")?;
            let r2 = bisect(h, a, b);
            let (tr, _) = golden_max(h, r1, r2);
            cp.t_bar = Some(tb);
            cp.r1 = Some(r1);
            cp.r2 = Some(r2);
            cp.t_alpha_radius = Some(tr);
        }
        Regime::BetaNonpositiveMP => {
            let h = |t: T| geo.h_mp_neg(t);
            let t0 = positive_root(h, "t0")?;
            let (arg, level) = golden_max(h, T::zero(), t0);
            let t1 = first_crossing(h, mp_lower_neg(inp), arg, "t1")?;
            cp.t0 = Some(t0);
            cp.t_alpha_level = Some(level);
            cp.t1 = Some(t1);
            cp.t_alpha = Some(arg);
            cp.t_tilde = Some(t_tilde(inp));
        }
        Regime::BetaPositiveMP => {
            let h = |t: T| geo.h_mp_pos(t);
            let ta = t_alpha_mp_pos(inp);
            let t1 = first_crossing(h, mp_lower_pos(inp), ta, "t1")?;
            cp.t0 = Some(t0_mp_pos(inp));
            cp.t_alpha = Some(ta);
            cp.t1 = Some(t1);
            cp.t_g = Some(t_g(inp));
            cp.t2 = Some(t2(inp));
        }
    }
    Ok(cp)
}

/// Domain scale beyond which the regime's construction applies, and the radius r_start whose
/// reciprocal is the dilation of the path start u⁰ (mountain-pass regimes).
pub fn r_alpha<T: Real>(inp: &ThresholdInputs<T>, regime: Regime, cp: &CriticalPoints<T>) -> Result<(T, Option<T>), ThresholdError> {
    let theta_alpha = inp.theta * inp.params.alpha();
    let two = T::lit(2.0);
    match regime {
        Regime::BetaPositiveLocalMin => {
            let tr = cp.t_alpha_radius.ok_or_else(|| missing("T_alpha_radius"))?;
            Ok(((theta_alpha.sqrt() / tr).max(r_alpha_local_decay(inp)), None))
        }
        Regime::BetaNonpositiveMP | Regime::BetaPositiveMP => {
            let t0 = cp.t0.ok_or_else(|| missing("t0"))?;
            let t1 = cp.t1.ok_or_else(|| missing("t1"))?;
            let sep = if regime == Regime::BetaNonpositiveMP { cp.t_tilde } else { cp.t_g }
                .ok_or_else(|| missing("separation level"))?;
            let start = (T::one() / t1).max((two * theta_alpha / sep).sqrt());
            Ok(((T::one() / t0).max(start), Some(start)))
        }
    }
}

/// (lower, upper) bounds of the mountain-pass level.
pub fn energy_sandwich<T: Real>(inp: &ThresholdInputs<T>, regime: Regime, cp: &CriticalPoints<T>) -> Result<(T, T), ThresholdError> {
    match regime {
        Regime::BetaNonpositiveMP => Ok((mp_lower_neg(inp), cp.t_alpha_level.ok_or_else(|| missing("T_alpha_level"))?)),
        Regime::BetaPositiveMP => Ok((mp_lower_pos(inp), mp_upper_pos(inp))),
        Regime::BetaPositiveLocalMin => Err(ThresholdError::RegimeMismatch(
            "energy sandwich is defined for mountain-pass regimes only".into(),
        )),
    }
}

fn check_regime<T: Real>(inp: &ThresholdInputs<T>, regime: Regime) -> Result<(), ThresholdError> {
    let alpha = inp.params.alpha();
    match regime {
        Regime::BetaNonpositiveMP => {
            if inp.params.beta() > T::zero() {
                return Err(ThresholdError::RegimeMismatch(format!(
                    "beta <= 0 mountain-pass regime, got beta = {}",
                    inp.params.beta()
                )));
            }
        }
        Regime::BetaPositiveLocalMin => {
            let av = alpha_v(inp).map_err(|e| match e {
                ThresholdError::RegimeMismatch(_) => {
                    ThresholdError::RegimeMismatch("the local-minimum branch exists only for beta > 0".into())
                }
                other => other,
            })?;
            if alpha >= av {
                return Err(ThresholdError::RegimeMismatch(format!(
                    "local-minimum branch needs 0 < alpha < alpha_V = {av}, got alpha = {alpha}"
                )));
            }
        }
        Regime::BetaPositiveMP => {
            let at = alpha_tilde_v(inp)?;
            if alpha >= at {
                return Err(ThresholdError::RegimeMismatch(format!(
                    "beta > 0 mountain-pass branch needs 0 < alpha < alpha_tilde_V = {at}, got alpha = {alpha}"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ThresholdReport<T> {
    pub regime: Regime,
    #[serde(rename = "alpha_V")]
    pub alpha_v: Option<T>,
    #[serde(rename = "alpha_tilde_V")]
    pub alpha_tilde_v: Option<T>,
    #[serde(rename = "A_pq")]
    pub a_pq: T,
    /// (C_q/q)(A_{p,q} + 1).
    #[serde(rename = "A")]
    pub a_aggregate: T,
    pub mp_lower: Option<T>,
    pub mp_upper: Option<T>,
    #[serde(flatten)]
    pub points: CriticalPoints<T>,
    pub r_alpha: T,
    /// u⁰ = v_{1/r_start} in the mountain-pass regimes.
    pub r_start: Option<T>,
    pub h1_apriori: Option<T>,
    pub kappa_minus: T,
    pub kappa_plus: T,
}

/// All thresholds of the regime; refuses parameter sets outside it.
pub fn threshold_report<T: Real>(inp: &ThresholdInputs<T>, regime: Regime) -> Result<ThresholdReport<T>, ThresholdError> {
    let points = critical_points(inp, regime)?;
    let (r_alpha, r_start) = r_alpha(inp, regime, &points)?;
    let positive = inp.params.beta() > T::zero();
    let (mp_lower, mp_upper) = match energy_sandwich(inp, regime, &points) {
        Ok((l, u)) => (Some(l), Some(u)),
        Err(_) => (None, None),
    };
    let h1 = match (regime, points.t_alpha_level) {
        (Regime::BetaNonpositiveMP, Some(level)) => Some(h1_apriori(inp, level)),
        _ => None,
    };
    Ok(ThresholdReport {
        regime,
        alpha_v: if positive { Some(alpha_v(inp)?) } else { None },
        alpha_tilde_v: if positive { Some(alpha_tilde_v(inp)?) } else { None },
        a_pq: inp.a_pq(),
        a_aggregate: inp.a_aggregate(),
        mp_lower,
        mp_upper,
        points,
        r_alpha,
        r_start,
        h1_apriori: h1,
        kappa_minus: inp.kappa_minus(),
        kappa_plus: inp.kappa_plus(),
    })
}
