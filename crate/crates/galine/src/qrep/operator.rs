//! Normal-ordered polynomials in the velocity symbols `qᵢ` and derivatives
//! `Dᵢ = ∂/∂qᵢ`, with complex time-polynomial coefficients.
//!
//! Terms are stored as `c(t) q^α D^β` with every `q` left of every `D`.
//! Products are reordered with `D^b q^c = Σₖ C(b,k) c!/(c−k)! q^{c−k} D^{b−k}`
//! per component, which is the exhaustive application of `[Dᵢ, qⱼ] = δᵢⱼ`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::timealg::{int, Scalar, TimePoly};

const AXES: [&str; 3] = ["x", "y", "z"];

/// `re(t) + i·im(t)`.
#[derive(Clone, PartialEq, Debug)]
pub struct CPoly {
    pub re: TimePoly,
    pub im: TimePoly,
}

impl CPoly {
    pub fn new(re: TimePoly, im: TimePoly) -> Self {
        CPoly { re, im }
    }

    pub fn real(re: TimePoly) -> Self {
        let im = TimePoly::zero(re.max_degree());
        CPoly { re, im }
    }

    pub fn imag(im: TimePoly) -> Self {
        let re = TimePoly::zero(im.max_degree());
        CPoly { re, im }
    }

    pub fn constant(re: Scalar, im: Scalar, max_degree: usize) -> Self {
        CPoly { re: TimePoly::constant(re, max_degree), im: TimePoly::constant(im, max_degree) }
    }

    pub fn zero(max_degree: usize) -> Self {
        Self::real(TimePoly::zero(max_degree))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        CPoly { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &Self) -> Self {
        CPoly { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    /// Product; the budget stays at the larger factor budget unless the
    /// result needs more.
    pub fn mul(&self, o: &Self) -> Self {
        let re = &self.re * &o.re - &self.im * &o.im;
        let im = &self.re * &o.im + &self.im * &o.re;
        let need = re.degree().max(im.degree()).unwrap_or(0);
        let budget = self.budget().max(o.budget()).max(need);
        let fit = |p: TimePoly| p.with_budget(budget).expect("budget covers the degree");
        CPoly { re: fit(re), im: fit(im) }
    }

    pub fn scale(&self, k: &Scalar) -> Self {
        CPoly { re: self.re.scale(k), im: self.im.scale(k) }
    }

    pub fn times_i(&self) -> Self {
        CPoly { re: -&self.im, im: self.re.clone() }
    }

    pub fn neg(&self) -> Self {
        CPoly { re: -&self.re, im: -&self.im }
    }

    pub fn derivative(&self) -> Self {
        CPoly { re: self.re.derivative(), im: self.im.derivative() }
    }

    pub fn eval_f64(&self, t: f64) -> Complex64 {
        Complex64::new(self.re.eval_f64(t), self.im.eval_f64(t))
    }

    fn budget(&self) -> usize {
        self.re.max_degree().max(self.im.max_degree())
    }
}

impl fmt::Display for CPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "({})", self.re),
            (true, false) => write!(f, "i({})", self.im),
            (false, false) => write!(f, "({} + i({}))", self.re, self.im),
        }
    }
}

/// `q^α D^β` with per-axis exponents.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default, Serialize)]
pub struct Monomial {
    pub q: [u32; 3],
    pub d: [u32; 3],
}

impl Monomial {
    pub const ONE: Monomial = Monomial { q: [0; 3], d: [0; 3] };

    pub fn q(axis: usize) -> Self {
        let mut m = Self::ONE;
        m.q[axis] = 1;
        m
    }

    pub fn d(axis: usize) -> Self {
        let mut m = Self::ONE;
        m.d[axis] = 1;
        m
    }

    pub fn is_one(&self) -> bool {
        *self == Self::ONE
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (sym, exps) in [("q", &self.q), ("D", &self.d)] {
            for (axis, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => parts.push(format!("{sym}_{}", AXES[axis])),
                    _ => parts.push(format!("{sym}_{}^{e}", AXES[axis])),
                }
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("·"))
        }
    }
}

fn falling(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64)
}

fn choose(n: u32, k: u32) -> i64 {
    falling(n, k) / falling(k, k)
}

/// Normal-ordered operator. Equality ignores the degree budget.
#[derive(Clone, Debug)]
pub struct CanonicalOperator {
    terms: BTreeMap<Monomial, CPoly>,
    max_degree: usize,
}

impl PartialEq for CanonicalOperator {
    fn eq(&self, o: &Self) -> bool {
        self.terms == o.terms
    }
}

#[derive(Serialize)]
struct TermDump {
    q: [u32; 3],
    d: [u32; 3],
    re: Vec<String>,
    im: Vec<String>,
}

impl CanonicalOperator {
    pub fn zero(max_degree: usize) -> Self {
        CanonicalOperator { terms: BTreeMap::new(), max_degree }
    }

    pub fn term(m: Monomial, c: CPoly) -> Self {
        let mut op = Self::zero(c.budget());
        op.push(m, c);
        op
    }

    pub fn identity(max_degree: usize) -> Self {
        Self::term(Monomial::ONE, CPoly::constant(int(1), int(0), max_degree))
    }

    pub fn scalar(c: CPoly) -> Self {
        Self::term(Monomial::ONE, c)
    }

    /// Multiplication by `qᵢ`.
    pub fn q(axis: usize, max_degree: usize) -> Self {
        Self::term(Monomial::q(axis), CPoly::constant(int(1), int(0), max_degree))
    }

    /// `∂/∂qᵢ`.
    pub fn d(axis: usize, max_degree: usize) -> Self {
        Self::term(Monomial::d(axis), CPoly::constant(int(1), int(0), max_degree))
    }

    fn push(&mut self, m: Monomial, c: CPoly) {
        self.max_degree = self.max_degree.max(c.budget());
        let entry = self.terms.entry(m).or_insert_with(|| CPoly::zero(0));
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CPoly)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&CPoly> {
        self.terms.get(m)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient if the operator is a multiple of the identity.
    pub fn as_scalar(&self) -> Option<CPoly> {
        match self.terms.len() {
            0 => Some(CPoly::zero(self.max_degree)),
            1 => self.terms.get(&Monomial::ONE).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.push(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&CPoly::constant(int(-1), int(0), 0))
    }

    /// Left multiplication by a time-dependent complex number.
    pub fn scale(&self, c: &CPoly) -> Self {
        let mut out = Self::zero(self.max_degree);
        for (m, k) in &self.terms {
            out.push(*m, c.mul(k));
        }
        out
    }

    pub fn scale_real(&self, k: &Scalar) -> Self {
        self.scale(&CPoly::constant(k.clone(), int(0), 0))
    }

    pub fn times_i(&self) -> Self {
        self.scale(&CPoly::constant(int(0), int(1), 0))
    }

    /// Normal-ordered product `self · o`.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.max_degree.max(o.max_degree));
        for (ml, cl) in &self.terms {
            for (mr, cr) in &o.terms {
                let c = cl.mul(cr);
                // reorder D^{ml.d} q^{mr.q} axis by axis
                let mut partial: Vec<(Monomial, i64)> =
                    vec![(Monomial { q: [ml.q[0], ml.q[1], ml.q[2]], d: [mr.d[0], mr.d[1], mr.d[2]] }, 1)];
                for axis in 0..3 {
                    let (b, qc) = (ml.d[axis], mr.q[axis]);
                    let mut next = Vec::new();
                    for (m, w) in &partial {
                        for k in 0..=b.min(qc) {
                            let mut m2 = *m;
                            m2.q[axis] += qc - k;
                            m2.d[axis] += b - k;
                            next.push((m2, w * choose(b, k) * falling(qc, k)));
                        }
                    }
                    partial = next;
                }
                for (m, w) in partial {
                    out.push(m, c.scale(&int(w)));
                }
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::identity(self.max_degree), |acc, _| acc.mul(self))
    }

    /// `∂A/∂t`: differentiate every coefficient.
    pub fn time_derivative(&self) -> Self {
        let mut out = Self::zero(self.max_degree);
        for (m, c) in &self.terms {
            out.push(*m, c.derivative());
        }
        out
    }

    /// Replaces `qᵢ` by `qᵢ + sᵢ(t)`.
    pub fn shift_q(&self, s: &[TimePoly; 3]) -> Self {
        let mut out = Self::zero(self.max_degree);
        for (m, c) in &self.terms {
            let mut partial: Vec<(Monomial, CPoly)> = vec![(Monomial { q: [0; 3], d: m.d }, c.clone())];
            for axis in 0..3 {
                let e = m.q[axis];
                let mut next = Vec::new();
                for (mm, cc) in &partial {
                    let mut pw = TimePoly::constant(int(1), s[axis].max_degree());
                    let mut powers = vec![pw.clone()];
                    for _ in 0..e {
                        pw = &pw * &s[axis];
                        powers.push(pw.clone());
                    }
                    for j in 0..=e {
                        let mut m2 = *mm;
                        m2.q[axis] = j;
                        let w = int(choose(e, j));
                        let factor = CPoly::real(powers[(e - j) as usize].scale(&w));
                        next.push((m2, cc.mul(&factor)));
                    }
                }
                partial = next;
            }
            for (mm, cc) in partial {
                out.push(mm, cc);
            }
        }
        out
    }

    /// Drops every term containing a y or z symbol: the part acting on the
    /// x factor of a product state.
    pub fn x_part(&self) -> Self {
        let mut out = Self::zero(self.max_degree);
        for (m, c) in &self.terms {
            if m.q[1] + m.q[2] + m.d[1] + m.d[2] == 0 {
                out.push(*m, c.clone());
            }
        }
        out
    }

    /// `(monomial, coefficient at t)` pairs for numeric application.
    pub fn coefficients_at(&self, t: f64) -> Vec<(Monomial, Complex64)> {
        self.terms.iter().map(|(m, c)| (*m, c.eval_f64(t))).collect()
    }

    /// Regression-friendly dump: one entry per term with Taylor coefficients.
    pub fn to_json(&self) -> serde_json::Value {
        let fmt = |p: &TimePoly| p.coeffs().iter().map(crate::timealg::format_scalar).collect();
        let dump: Vec<TermDump> =
            self.terms.iter().map(|(m, c)| TermDump { q: m.q, d: m.d, re: fmt(&c.re), im: fmt(&c.im) }).collect();
        serde_json::to_value(dump).unwrap_or_default()
    }
}

impl fmt::Display for CanonicalOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.terms.iter().map(|(m, c)| if m.is_one() { c.to_string() } else { format!("{c}·{m}") }).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `AB − BA`.
pub fn commutator(a: &CanonicalOperator, b: &CanonicalOperator) -> CanonicalOperator {
    a.mul(b).sub(&b.mul(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timealg::rat;
    use proptest::prelude::*;

    const N: usize = 8;

    fn q(i: usize) -> CanonicalOperator {
        CanonicalOperator::q(i, N)
    }

    fn d(i: usize) -> CanonicalOperator {
        CanonicalOperator::d(i, N)
    }

    fn one() -> CanonicalOperator {
        CanonicalOperator::identity(N)
    }

    #[test]
    fn canonical_commutation() {
        for i in 0..3 {
            for j in 0..3 {
                let c = commutator(&d(i), &q(j));
                if i == j {
                    assert_eq!(c, one());
                } else {
                    assert!(c.is_zero());
                }
            }
        }
    }

    #[test]
    fn reorders_d_past_q_squared() {
        // D q² = q² D + 2q
        let lhs = d(0).mul(&q(0).mul(&q(0)));
        let rhs = q(0).mul(&q(0)).mul(&d(0)).add(&q(0).scale_real(&int(2)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn d_squared_q_squared() {
        // D²q² = q²D² + 4qD + 2
        let lhs = d(0).pow(2).mul(&q(0).pow(2));
        let rhs =
            q(0).pow(2).mul(&d(0).pow(2)).add(&q(0).mul(&d(0)).scale_real(&int(4))).add(&one().scale_real(&int(2)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn shift_q_expands_binomially() {
        // (q + t)² D = q²D + 2t qD + t² D
        let t = TimePoly::power(1, int(1), N).unwrap();
        let s = [t.clone(), TimePoly::zero(N), TimePoly::zero(N)];
        let op = q(0).pow(2).mul(&d(0)).shift_q(&s);
        let want = q(0)
            .pow(2)
            .mul(&d(0))
            .add(&q(0).mul(&d(0)).scale(&CPoly::real(t.scale(&int(2)))))
            .add(&d(0).scale(&CPoly::real(&t * &t)));
        assert_eq!(op, want);
    }

    #[test]
    fn display_and_dump() {
        let op = q(0).scale_real(&rat(1, 2)).add(&d(1).times_i());
        assert_eq!(op.to_string(), "i(1)·D_y + (1/2)·q_x");
        let dump = op.to_json();
        assert_eq!(dump.as_array().unwrap().len(), 2);
        assert_eq!(dump[1]["re"][0], "1/2");
    }

    fn random_op(seed: u64) -> CanonicalOperator {
        let mut s = crate::sample::Sampler::new(seed);
        let mut op = CanonicalOperator::zero(N);
        for _ in 0..3 {
            let mut m = Monomial::ONE;
            let axis = s.index(3);
            m.q[axis] = s.index(3) as u32;
            m.d[s.index(3)] = s.index(3) as u32;
            let c = CPoly::new(s.poly(2, N), s.poly(1, N));
            op = op.add(&CanonicalOperator::term(m, c));
        }
        op
    }

    proptest! {
        #[test]
        fn product_is_associative(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            let (x, y, z) = (random_op(a), random_op(b), random_op(c));
            prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        }

        #[test]
        fn jacobi_identity(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            let (x, y, z) = (random_op(a), random_op(b), random_op(c));
            let j = commutator(&x, &commutator(&y, &z))
                .add(&commutator(&y, &commutator(&z, &x)))
                .add(&commutator(&z, &commutator(&x, &y)));
            prop_assert!(j.is_zero());
        }

        #[test]
        fn product_distributes(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            let (x, y, z) = (random_op(a), random_op(b), random_op(c));
            prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        }
    }
}
