use serde::{Deserialize, Serialize};

use super::{Constant, ConstantsError, Provenance, Tolerances};
use crate::quad::{composite, gauss_legendre};
use crate::real::{sphere_area, Real};

const R_MAX: f64 = 60.0;
const SPLIT_TOL: f64 = 1e-7;
const TAIL_LENGTH: f64 = 40.0;
const BASE_STEP: f64 = 1.0 / 512.0;

/// Radial ground state Q of -ΔQ + Q = Q^{s-1}: RK4 trajectory on [0, r_cut] and a K-Bessel tail
/// Q(r) ∝ r^{-ν}K_ν(r), ν = N/2 - 1, beyond it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GroundState<T> {
    pub n: usize,
    pub s: T,
    /// Shooting parameter Q(0).
    pub q0: T,
    pub step: T,
    pub r_cut: T,
    values: Vec<T>,
    slopes: Vec<T>,
    /// ∫Q², ∫|∇Q|², ∫Q^s over R^N.
    pub mass: T,
    pub kinetic: T,
    pub pow: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Fate {
    /// Q crossed zero.
    Over,
    /// Q' turned positive while Q > 0.
    Under,
    Undecided,
}

fn rhs<T: Real>(n: usize, s: T, r: T, q: T, p: T) -> T {
    let f = q - q.abs().powf(s - T::lit(2.0)) * q;
    if r == T::zero() {
        f / T::of(n)
    } else {
        f - T::of(n - 1) / r * p
    }
}

/// Integrates from Q(0) = a, Q'(0) = 0. Stops at the first decisive event.
fn shoot<T: Real>(n: usize, s: T, a: T, h: T, keep: bool) -> (Fate, Vec<T>, Vec<T>) {
    let steps = (T::lit(R_MAX) / h).to_usize().expect("finite step count");
    let half = T::lit(0.5);
    let six = T::lit(6.0);
    let two = T::lit(2.0);
    let (mut q, mut p) = (a, T::zero());
    let mut qs = Vec::new();
    let mut ps = Vec::new();
    if keep {
        qs.push(q);
        ps.push(p);
    }
    for i in 0..steps {
        let r = T::of(i) * h;
        let k1q = p;
        let k1p = rhs(n, s, r, q, p);
        let k2q = p + half * h * k1p;
        let k2p = rhs(n, s, r + half * h, q + half * h * k1q, k2q);
        let k3q = p + half * h * k2p;
        let k3p = rhs(n, s, r + half * h, q + half * h * k2q, k3q);
        let k4q = p + h * k3p;
        let k4p = rhs(n, s, r + h, q + h * k3q, k4q);
        q = q + h / six * (k1q + two * k2q + two * k3q + k4q);
        p = p + h / six * (k1p + two * k2p + two * k3p + k4p);
        if keep {
            qs.push(q);
            ps.push(p);
        }
        if q < T::zero() {
            return (Fate::Over, qs, ps);
        }
        if p > T::zero() {
            return (Fate::Under, qs, ps);
        }
    }
    (Fate::Undecided, qs, ps)
}

/// e^{-(r-r0)} r^{-1/2} Σ_k a_k(ν) r^{-k}: K_ν up to a constant factor, by its asymptotic series.
fn bessel_k_shape<T: Real>(nu: T, r: T, r0: T) -> T {
    let mu = T::lit(4.0) * nu * nu;
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..30 {
        let odd = T::of(2 * k - 1);
        let next = term * (mu - odd * odd) / (T::lit(8.0) * T::of(k) * r);
        if next.abs() >= term.abs() || next == T::zero() {
            break;
        }
        term = next;
        sum = sum + term;
    }
    (r0 - r).exp() / r.sqrt() * sum
}

fn simpson<T: Real>(f: &[T], h: T) -> T {
    let m = f.len() - 1;
    debug_assert!(m.is_multiple_of(2));
    let mut acc = f[0] + f[m];
    for (i, v) in f.iter().enumerate().take(m).skip(1) {
        acc = acc + if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) } * *v;
    }
    acc * h / T::lit(3.0)
}

/// Computes Q by bisection on Q(0) with step h, until the bracket is below `width` (relative).
pub fn ground_state<T: Real>(n: usize, s: T, h: T, width: T) -> Result<GroundState<T>, ConstantsError> {
    let nn = T::of(n);
    let two = T::lit(2.0);
    if n < 3 || !(s > two && s < two * nn / (nn - two)) {
        return Err(ConstantsError::InvalidInput(format!("need N >= 3 and 2 < s < 2N/(N-2), got N={n}, s={s}")));
    }
    let mut lo = T::lit(1.01);
    if shoot(n, s, lo, h, false).0 != Fate::Under {
        return Err(ConstantsError::ShootingBracketLost(format!("Q(0) = {lo} does not undershoot")));
    }
    let mut hi = two;
    while shoot(n, s, hi, h, false).0 != Fate::Over {
        lo = hi;
        hi = hi * two;
        if hi > T::lit(1e9) {
            return Err(ConstantsError::ShootingBracketLost("no overshooting Q(0) below 1e9".into()));
        }
    }
    for _ in 0..200 {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(n, s, mid, h, false).0 {
            Fate::Over => hi = mid,
            Fate::Under => lo = mid,
            Fate::Undecided => {
                return Err(ConstantsError::ShootingBracketLost(format!("undecided trajectory at Q(0) = {mid}")))
            }
        }
    }
    if hi - lo > width * lo {
        return Err(ConstantsError::ShootingBracketLost(format!("bracket [{lo}, {hi}] wider than {width}")));
    }
    let (_, q_lo, p_lo) = shoot(n, s, lo, h, true);
    let (_, q_hi, _) = shoot(n, s, hi, h, true);
    let len = q_lo.len().min(q_hi.len());
    let split = (0..len)
        .find(|&i| (q_lo[i] - q_hi[i]).abs() > T::lit(SPLIT_TOL) * q_lo[i].abs())
        .unwrap_or(len - 1);
    // last even index inside the trusted stretch, for Simpson
    let cut = (split.saturating_sub(2)) & !1;
    if cut < 4 {
        return Err(ConstantsError::ShootingBracketLost("trajectories split at the origin".into()));
    }
    let decay = q_lo[cut] / q_lo[0];
    if decay > T::lit(1e-4) {
        return Err(ConstantsError::GroundStateNotDecayed(decay.as_f64()));
    }
    let values = q_lo[..=cut].to_vec();
    let slopes = p_lo[..=cut].to_vec();
    let r_cut = T::of(cut) * h;
    let sigma: T = sphere_area(n);
    let jac = |i: usize| (T::of(i) * h).powi(n as i32 - 1);
    let f_mass: Vec<T> = (0..=cut).map(|i| jac(i) * values[i] * values[i]).collect();
    let f_kin: Vec<T> = (0..=cut).map(|i| jac(i) * slopes[i] * slopes[i]).collect();
    let f_pow: Vec<T> = (0..=cut).map(|i| jac(i) * values[i].abs().powf(s)).collect();

    let mut gs = GroundState {
        n,
        s,
        q0: lo,
        step: h,
        r_cut,
        values,
        slopes,
        mass: T::zero(),
        kinetic: T::zero(),
        pow: T::zero(),
    };
    let rule = gauss_legendre::<T>(8);
    let end = r_cut + T::lit(TAIL_LENGTH);
    let panels = 80;
    let tail_mass = composite(|r| r.powi(n as i32 - 1) * gs.tail(r).0.powi(2), r_cut, end, panels, &rule);
    let tail_kin = composite(|r| r.powi(n as i32 - 1) * gs.tail(r).1.powi(2), r_cut, end, panels, &rule);
    let tail_pow = composite(|r| r.powi(n as i32 - 1) * gs.tail(r).0.powf(s), r_cut, end, panels, &rule);
    gs.mass = sigma * (simpson(&f_mass, h) + tail_mass);
    gs.kinetic = sigma * (simpson(&f_kin, h) + tail_kin);
    gs.pow = sigma * (simpson(&f_pow, h) + tail_pow);
    Ok(gs)
}

impl<T: Real> GroundState<T> {
    fn nu(&self) -> T {
        T::of(self.n) / T::lit(2.0) - T::one()
    }

    /// (Q, Q') on the Bessel tail, r ≥ r_cut.
    fn tail(&self, r: T) -> (T, T) {
        let nu = self.nu();
        let qc = *self.values.last().expect("nonempty");
        let base = bessel_k_shape(nu, self.r_cut, self.r_cut);
        let scale = (r / self.r_cut).powf(-nu);
        let q = qc * scale * bessel_k_shape(nu, r, self.r_cut) / base;
        let dq = -qc * scale * bessel_k_shape(nu + T::one(), r, self.r_cut) / base;
        (q, dq)
    }

    /// Q(r) by cubic Hermite interpolation of the trajectory, then the tail.
    pub fn eval(&self, r: T) -> T {
        let r = r.abs();
        if r >= self.r_cut {
            return self.tail(r).0;
        }
        let x = r / self.step;
        let i = x.floor().to_usize().unwrap_or(0).min(self.values.len() - 2);
        let t = x - T::of(i);
        let h = self.step;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let one = T::one();
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let t2 = t * t;
        let t3 = t2 * t;
        (two * t3 - three * t2 + one) * y0 + (t3 - two * t2 + t) * d0 + (-two * t3 + three * t2) * y1 + (t3 - t2) * d1
    }

    /// ‖Q‖_s^s / (‖Q‖₂^{(2s-N(s-2))/2} ‖∇Q‖₂^{N(s-2)/2}).
    pub fn quotient(&self) -> T {
        let nn = T::of(self.n);
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        let s = self.s;
        self.pow / (self.mass.powf((two * s - nn * (s - two)) / four) * self.kinetic.powf(nn * (s - two) / four))
    }
}

/// Best constant C_{N,s} as the Weinstein quotient of the ground state; the error estimate is the
/// change between step h and h/2.
pub fn gn_best_constant<T: Real>(n: usize, s: T, tol: &Tolerances<T>) -> Result<Constant<T>, ConstantsError> {
    let coarse = ground_state(n, s, T::lit(BASE_STEP), tol.shooting)?;
    let fine = ground_state(n, s, T::lit(BASE_STEP / 2.0), tol.shooting)?;
    let (c0, c1) = (coarse.quotient(), fine.quotient());
    let err = (c1 - c0).abs();
    Ok(Constant {
        value: c1,
        provenance: Provenance {
            method: format!("Weinstein quotient of the shooting ground state, Q(0) = {}", fine.q0),
            resolution: format!("RK4 step {} on [0, {}] plus Bessel tail", BASE_STEP / 2.0, fine.r_cut),
            error_estimate: err,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nehari_and_pohozaev_hold_for_q() {
        // ∫|∇Q|² + ∫Q² = ∫Q^s and (N-2)/2 ∫|∇Q|² + N/2 ∫Q² = N/s ∫Q^s
        for (n, s) in [(3usize, 3.0f64), (3, 5.0), (4, 3.5)] {
            let q = ground_state::<f64>(n, s, 1.0 / 512.0, 1e-10).unwrap();
            let nn = n as f64;
            let neh = (q.kinetic + q.mass - q.pow) / q.pow;
            let poh = ((nn - 2.0) / 2.0 * q.kinetic + nn / 2.0 * q.mass - nn / s * q.pow) / q.pow;
            assert!(neh.abs() < 1e-8, "N={n} s={s} nehari {neh}");
            assert!(poh.abs() < 1e-8, "N={n} s={s} pohozaev {poh}");
        }
    }

    #[test]
    fn cubic_ground_state_height() {
        // Q(0) for N=3, s=4 (the cubic Townes profile of -ΔQ + Q = Q³) is 4.3374...
        let q = ground_state::<f64>(3, 4.0, 1.0 / 128.0, 1e-10).unwrap();
        assert!((q.q0 - 4.3374).abs() < 1e-3, "Q(0) = {}", q.q0);
    }

    #[test]
    fn tail_is_continuous() {
        let q = ground_state::<f64>(3, 3.0, 1.0 / 64.0, 1e-10).unwrap();
        let below = q.eval(q.r_cut - 1e-9);
        let above = q.eval(q.r_cut + 1e-9);
        assert!((below / above - 1.0).abs() < 1e-6);
    }
}
