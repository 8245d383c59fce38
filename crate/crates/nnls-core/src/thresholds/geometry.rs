use super::{ThresholdError, ThresholdInputs};
use crate::real::Real;

/// Evaluators of the scalar geometry functions. Each is the printed closed form, nothing else.
#[derive(Clone, Copy, Debug)]
pub struct Geometry<'a, T> {
    inp: &'a ThresholdInputs<T>,
}

impl<'a, T: Real> Geometry<'a, T> {
    pub fn new(inp: &'a ThresholdInputs<T>) -> Self {
        Self { inp }
    }

    fn exps(&self) -> (T, T, T, T, T) {
        let i = self.inp;
        (i.params.dim(), i.params.p(), i.params.q(), i.params.beta(), i.params.alpha())
    }

    /// β ≤ 0 upper-bound function of the dilation variable t:
    /// ½κ₊t²θα - (βC_p/p)α^{p/2}θ^{N(p-2)/4}t^{N(p-2)/2} - (1/(2q))α^{q/2}|Ω|^{(2-q)/2}t^{N(q-2)/2}.
    pub fn h_mp_neg(&self, t: T) -> T {
        let (n, p, q, beta, alpha) = self.exps();
        let i = self.inp;
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        T::lit(0.5) * i.kappa_plus() * t * t * i.theta * alpha
            - beta * i.c_p / p * alpha.powf(p / two) * i.theta.powf(n * (p - two) / four) * t.powf(n * (p - two) / two)
            - alpha.powf(q / two) * i.omega.powf((two - q) / two) * t.powf(n * (q - two) / two) / (two * q)
    }

    /// β > 0 local-minimum function of the gradient norm t:
    /// ½κ₋t² - (βC_p/p)α^{(2p-N(p-2))/4}t^{N(p-2)/2} - (C_q/q)α^{(2q-N(q-2))/4}t^{N(q-2)/2}.
    pub fn h_loc(&self, t: T) -> T {
        let (n, p, q, beta, alpha) = self.exps();
        let i = self.inp;
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        T::lit(0.5) * i.kappa_minus() * t * t
            - beta * i.c_p / p * alpha.powf((two * p - n * (p - two)) / four) * t.powf(n * (p - two) / two)
            - i.c_q / q * alpha.powf((two * q - n * (q - two)) / four) * t.powf(n * (q - two) / two)
    }

    /// ½κ₋t^{(4-N(p-2))/2} - (C_q/q)α^{(2q-N(q-2))/4}t^{N(q-p)/2}.
    pub fn phi(&self, t: T) -> T {
        let (n, p, q, _, alpha) = self.exps();
        let i = self.inp;
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        T::lit(0.5) * i.kappa_minus() * t.powf((four - n * (p - two)) / two)
            - i.c_q / q * alpha.powf((two * q - n * (q - two)) / four) * t.powf(n * (q - p) / two)
    }

    /// β > 0 mountain-pass lower function of t = ‖∇u‖²:
    /// ½κ₋t - (βC_p/p)α^{(2p-N(p-2))/4}t^{N(p-2)/4} - (C_q/q)α^{(2q-N(q-2))/4}t^{N(q-2)/4}.
    pub fn f_lower(&self, t: T) -> T {
        let (n, p, q, beta, alpha) = self.exps();
        let i = self.inp;
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        T::lit(0.5) * i.kappa_minus() * t
            - beta * i.c_p / p * alpha.powf((two * p - n * (p - two)) / four) * t.powf(n * (p - two) / four)
            - i.c_q / q * alpha.powf((two * q - n * (q - two)) / four) * t.powf(n * (q - two) / four)
    }

    /// ½κ₋t - Aα^{(2q-N(q-2))/4}t^{N(q-2)/4}, with A = (C_q/q)(A_{p,q} + 1).
    pub fn g(&self, t: T) -> T {
        let (n, _, q, _, alpha) = self.exps();
        let i = self.inp;
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        T::lit(0.5) * i.kappa_minus() * t
            - i.a_aggregate() * alpha.powf((two * q - n * (q - two)) / four) * t.powf(n * (q - two) / four)
    }

    /// β > 0 mountain-pass upper-bound function of the dilation variable t:
    /// ½κ₊t²θα - (1/(2q))α^{q/2}|Ω|^{(2-q)/2}t^{N(q-2)/2}.
    pub fn h_mp_pos(&self, t: T) -> T {
        let (n, _, q, _, alpha) = self.exps();
        let i = self.inp;
        let two = T::lit(2.0);
        T::lit(0.5) * i.kappa_plus() * t * t * i.theta * alpha
            - alpha.powf(q / two) * i.omega.powf((two - q) / two) * t.powf(n * (q - two) / two) / (two * q)
    }
}

const BISECT_ABS: f64 = 1e-12;
const DYADIC_RANGE: i32 = 200;

/// Bisection on a sign change of f over [lo, hi], to absolute width 1e-12 or floating resolution.
pub fn bisect<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    let flo = f(lo);
    let two = T::lit(2.0);
    for _ in 0..400 {
        let mid = (lo + hi) / two;
        if hi - lo <= T::lit(BISECT_ABS) || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / two
}

fn pattern<T: Real>(f: &impl Fn(T) -> T, from: T, up: bool) -> String {
    let two = T::lit(2.0);
    let mut t = from;
    let mut s = String::new();
    for _ in 0..24 {
        s.push(if f(t) > T::zero() { '+' } else { '-' });
        t = if up { t * two } else { t / two };
    }
    s
}

/// Walks t = start·2^{±k} until f changes sign relative to f(start); returns the bracketing pair
/// ordered as (smaller t, larger t).
pub fn dyadic_bracket<T: Real>(f: impl Fn(T) -> T, start: T, up: bool, what: &str) -> Result<(T, T), ThresholdError> {
    let two = T::lit(2.0);
    let s0 = f(start) > T::zero();
    let mut prev = start;
    for _ in 0..DYADIC_RANGE {
        let next = if up { prev * two } else { prev / two };
        if !(next.is_finite() && next > T::zero()) {
            break;
        }
        if (f(next) > T::zero()) != s0 {
            return Ok(if up { (prev, next) } else { (next, prev) });
        }
        prev = next;
    }
    Err(ThresholdError::BracketNotFound { what: what.to_string(), pattern: pattern(&f, start, up) })
}

/// Golden-section maximization of a unimodal f on [a, b]; returns (argmax, max).
pub fn golden_max<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..300 {
        if (b - a).abs() <= T::epsilon() * (a.abs() + b.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
