//! 320-bit re-evaluation of the threshold closed forms and random admissible tuples.

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, RoundingMode};
use nnls_core::model::{validate_params, PotentialNorms, ProblemParams};
use nnls_core::real::unit_ball_volume;
use nnls_core::thresholds::{
    alpha_tilde_v, alpha_v, h1_apriori, mp_lower_neg, mp_lower_pos, mp_upper_pos, phi_level,
    r_alpha_local_reciprocal_form, t0_mp_pos, t_alpha_mp_pos, t_bar, t_g, t_tilde, t2, ThresholdInputs,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const PREC: usize = 320;
pub const RM: RoundingMode = RoundingMode::ToEven;

/// 320-bit re-evaluation of the printed closed forms, written from the displays directly.
pub struct Oracle {
    cc: RefCell<Consts>,
}

impl Oracle {
    pub fn new() -> Self {
        Self { cc: RefCell::new(Consts::new().expect("astro-float constants")) }
    }
    pub fn c(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, PREC)
    }
    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, PREC, RM)
    }
    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, PREC, RM)
    }
    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, PREC, RM)
    }
    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, PREC, RM)
    }
    pub fn pow(&self, a: &BigFloat, e: &BigFloat) -> BigFloat {
        a.pow(e, PREC, RM, &mut self.cc.borrow_mut())
    }
    pub fn prod(&self, xs: &[BigFloat]) -> BigFloat {
        xs.iter().skip(1).fold(xs[0].clone(), |a, x| self.mul(&a, x))
    }
    pub fn to_f64(&self, x: &BigFloat) -> f64 {
        format!("{x}").parse().expect("decimal")
    }
    /// |x - y| / |y| with x an f64 result.
    pub fn rel(&self, x: f64, y: &BigFloat) -> f64 {
        let d = self.div(&self.sub(&self.c(x), y), y);
        self.to_f64(&d).abs()
    }
}

/// The tuple in big-float form with the recurring combinations.
pub struct Big {
    pub n: BigFloat,
    pub p: BigFloat,
    pub q: BigFloat,
    pub beta: BigFloat,
    pub alpha: BigFloat,
    pub cp: BigFloat,
    pub cq: BigFloat,
    pub theta: BigFloat,
    pub omega: BigFloat,
    /// 1 - ‖V₋‖ S^{-1}
    pub km: BigFloat,
    /// 1 + ‖V‖ S^{-1}
    pub kp: BigFloat,
    pub vt_sup: BigFloat,
    pub v_sup: BigFloat,
}

pub fn big(o: &Oracle, inp: &ThresholdInputs<f64>) -> Big {
    let s = o.c(inp.sobolev);
    let one = o.c(1.0);
    Big {
        n: o.c(inp.params.dim()),
        p: o.c(inp.params.p()),
        q: o.c(inp.params.q()),
        beta: o.c(inp.params.beta()),
        alpha: o.c(inp.params.alpha()),
        cp: o.c(inp.c_p),
        cq: o.c(inp.c_q),
        theta: o.c(inp.theta),
        omega: o.c(inp.omega),
        km: o.sub(&one, &o.div(&o.c(inp.norms.v_minus), &s)),
        kp: o.add(&one, &o.div(&o.c(inp.norms.v_full), &s)),
        vt_sup: o.c(inp.norms.vtilde_sup),
        v_sup: o.c(inp.norms.v_sup),
    }
}

/// Closed forms as printed; each entry is (name, value).
pub fn oracle_values(o: &Oracle, b: &Big) -> Vec<(&'static str, BigFloat)> {
    let k = |x: f64| o.c(x);
    let (n, p, q) = (&b.n, &b.p, &b.q);
    let two = k(2.0);
    let four = k(4.0);
    let pm2 = o.sub(p, &two);
    let qm2 = o.sub(q, &two);
    let qmp = o.sub(q, p);
    // 4 - N(p-2), N(q-2) - 4, N(q-2)
    let d = o.sub(&four, &o.mul(n, &pm2));
    let nq = o.mul(n, &qm2);
    let e = o.sub(&nq, &four);
    let mut out = Vec::new();

    let apq = o.div(&o.mul(&qm2, &e), &o.mul(&pm2, &d));
    out.push(("A_pq", apq.clone()));
    let big_a = o.add(&o.div(&o.prod(&[b.cq.clone(), qm2.clone(), e.clone()]), &o.prod(&[q.clone(), pm2.clone(), d.clone()])), &o.div(&b.cq, q));
    out.push(("A", big_a.clone()));

    if b.beta.is_positive() {
        let b1 = o.div(&b.km, &o.prod(&[two.clone(), n.clone(), qmp.clone()]));
        let b2 = o.div(&o.mul(q, &d), &b.cq);
        let b3 = o.div(&o.mul(p, &e), &o.mul(&b.beta, &b.cp));
        let two_qmp = o.mul(&two, &qmp);
        let av = o.prod(&[o.pow(&b1, &o.div(n, &two)), o.pow(&b2, &o.div(&d, &two_qmp)), o.pow(&b3, &o.div(&e, &two_qmp))]);
        out.push(("alpha_V", av));

        let c1 = o.div(&o.mul(&two, &b.km), &nq);
        let cq_q = o.div(&b.cq, q);
        let c2 = o.add(&o.mul(&cq_q, &apq), &cq_q);
        let c3 = o.mul(&o.div(&o.mul(p, &b.cq), &o.prod(&[b.beta.clone(), q.clone(), b.cp.clone()])), &apq);
        let half_n = o.div(n, &two);
        let at = o.prod(&[o.pow(&c1, &half_n), o.pow(&c2, &half_n.neg()), o.pow(&c3, &o.div(&e, &two_qmp))]);
        out.push(("alpha_tilde_V", at));

        let tb = o.mul(
            &o.pow(&o.div(&o.prod(&[q.clone(), d.clone(), b.km.clone()]), &o.prod(&[two.clone(), n.clone(), qmp.clone(), b.cq.clone()])), &o.div(&two, &e)),
            &o.pow(&b.alpha, &o.div(&o.sub(&nq, &o.mul(&two, q)), &o.mul(&two, &e))),
        );
        out.push(("t_bar", tb));

        let lvl = o.mul(&o.div(&o.mul(&b.beta, &b.cp), p), &o.pow(&b.alpha, &o.div(&o.sub(&o.mul(&two, p), &o.mul(n, &pm2)), &four)));
        out.push(("phi_level", lvl));

        let t2b = o.div(&o.prod(&[b.beta.clone(), q.clone(), b.cp.clone(), pm2.clone(), d.clone()]), &o.prod(&[p.clone(), b.cq.clone(), qm2.clone(), e.clone()]));
        let t2v = o.mul(&o.pow(&t2b, &o.div(&four, &o.mul(n, &qmp))), &o.pow(&b.alpha, &o.div(&o.sub(n, &two), n)));
        out.push(("t2", t2v));

        let alpha_exp = o.div(&o.sub(&nq, &o.mul(&two, q)), &e);
        let tg = o.mul(&o.pow(&o.div(&o.mul(&two, &b.km), &o.mul(&nq, &big_a)), &o.div(&four, &e)), &o.pow(&b.alpha, &alpha_exp));
        out.push(("t_g", tg));

        let lower = o.prod(&[
            o.div(&e, &four),
            o.pow(&o.div(&o.mul(&two, &b.km), &nq), &o.div(&nq, &e)),
            o.pow(&big_a, &o.div(&four, &o.sub(&four, &nq))),
            o.pow(&b.alpha, &alpha_exp),
        ]);
        out.push(("mp_lower_pos", lower));

        let upper = o.prod(&[
            o.div(&e, &two),
            o.pow(&o.div(&o.mul(&b.theta, &b.kp), &nq), &o.div(&nq, &e)),
            o.pow(&o.mul(&four, q), &o.div(&four, &e)),
            o.pow(&b.omega, &o.div(&o.mul(&two, &qm2), &e)),
            o.pow(&b.alpha, &alpha_exp),
        ]);
        out.push(("mp_upper_pos", upper));

        let a_q = o.pow(&b.alpha, &o.div(&o.sub(&two, q), &two));
        let om_q = o.pow(&b.omega, &o.div(&qm2, &two));
        let t0 = o.pow(&o.prod(&[b.kp.clone(), q.clone(), b.theta.clone(), a_q.clone(), om_q.clone()]), &o.div(&two, &e));
        out.push(("t0_mp_pos", t0));
        let ta = o.pow(
            &o.prod(&[o.div(&o.prod(&[four.clone(), q.clone(), b.kp.clone(), b.theta.clone()]), &nq), a_q, om_q]),
            &o.div(&two, &e),
        );
        out.push(("t_alpha_mp_pos", ta));

        // second argument of the local-minimum r_α as typeset
        let rb = o.prod(&[
            o.div(&o.prod(&[p.clone(), b.theta.clone(), b.kp.clone()]), &o.mul(&two, &b.beta)),
            o.pow(&b.alpha, &o.div(&o.sub(&two, p), &two)),
            o.pow(&b.omega, &o.div(&pm2, &two)),
        ]);
        out.push(("r_alpha_reciprocal_form", o.pow(&rb, &o.div(&two, &o.sub(&o.mul(n, &pm2), &four)))));
    }

    let tt = o.pow(
        &o.prod(&[
            o.div(&o.mul(&two, q), &o.mul(&nq, &b.cq)),
            b.km.clone(),
            o.pow(&b.alpha, &o.div(&o.sub(&o.mul(q, &o.sub(n, &two)), &o.mul(&two, n)), &four)),
        ]),
        &o.div(&four, &e),
    );
    out.push(("t_tilde", tt));

    let inner = o.div(
        &o.mul(&o.mul(&two, q), &b.km),
        &o.prod(&[nq.clone(), b.cq.clone(), o.pow(&b.alpha, &o.div(&o.sub(&o.mul(&two, q), &nq), &four))]),
    );
    let lower_neg = o.mul(&o.div(&o.mul(&e, &b.km), &o.mul(&two, &nq)), &o.pow(&inner, &o.div(&four, &e)));
    out.push(("mp_lower_neg", lower_neg));

    // a priori bound at a fixed level 1.7
    let level = k(1.7);
    let h1 = o.mul(
        &o.div(&o.mul(&four, n), &e),
        &o.add(
            &o.mul(&o.div(&qm2, &two), &level),
            &o.mul(&b.alpha, &o.add(&o.div(&b.vt_sup, &o.mul(&two, n)), &o.mul(&o.div(&qm2, &four), &b.v_sup))),
        ),
    );
    out.push(("h1_apriori", h1));
    out
}

pub fn implementation_values(inp: &ThresholdInputs<f64>) -> Vec<(&'static str, f64)> {
    let mut out = vec![("A_pq", inp.a_pq()), ("A", inp.a_aggregate())];
    if inp.params.beta() > 0.0 {
        out.push(("alpha_V", alpha_v(inp).unwrap()));
        out.push(("alpha_tilde_V", alpha_tilde_v(inp).unwrap()));
        out.push(("t_bar", t_bar(inp)));
        out.push(("phi_level", phi_level(inp)));
        out.push(("t2", t2(inp)));
        out.push(("t_g", t_g(inp)));
        out.push(("mp_lower_pos", mp_lower_pos(inp)));
        out.push(("mp_upper_pos", mp_upper_pos(inp)));
        out.push(("t0_mp_pos", t0_mp_pos(inp)));
        out.push(("t_alpha_mp_pos", t_alpha_mp_pos(inp)));
        out.push(("r_alpha_reciprocal_form", r_alpha_local_reciprocal_form(inp)));
    }
    out.push(("t_tilde", t_tilde(inp)));
    out.push(("mp_lower_neg", mp_lower_neg(inp)));
    out.push(("h1_apriori", h1_apriori(inp, 1.7)));
    out
}

pub fn random_inputs(rng: &mut ChaCha8Rng) -> ThresholdInputs<f64> {
    let n: usize = rng.gen_range(3..=5);
    let nn = n as f64;
    let crit_low = 2.0 + 4.0 / nn;
    let crit_high = 2.0 * nn / (nn - 2.0);
    let p = rng.gen_range(2.1..crit_low - 0.1);
    let q = rng.gen_range(crit_low + 0.1..crit_high - 0.1);
    let beta = if rng.gen_bool(0.7) { rng.gen_range(0.1..3.0) } else { -rng.gen_range(0.1..3.0) };
    let alpha = 10f64.powf(rng.gen_range(-3.0..1.0));
    let params = validate_params(ProblemParams { n, p, q, beta, alpha }).unwrap();
    let sobolev = rng.gen_range(3.0..12.0);
    let norms = PotentialNorms {
        v_minus: rng.gen_range(0.0..0.5) * sobolev,
        v_full: rng.gen_range(0.0..2.0),
        vtilde_plus: rng.gen_range(0.0..2.0),
        v_sup: rng.gen_range(0.0..1.0),
        vtilde_sup: rng.gen_range(0.0..1.0),
    };
    ThresholdInputs {
        params,
        norms,
        sobolev,
        c_p: rng.gen_range(0.05..0.5),
        c_q: rng.gen_range(0.005..0.2),
        theta: rng.gen_range(9.0..30.0),
        omega: unit_ball_volume(n),
    }
}
