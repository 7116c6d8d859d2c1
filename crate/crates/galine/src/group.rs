//! The rotation-free Galilean line group.
//!
//! Elements are pairs `(a(t), b)` of a time-dependent translation and a time
//! translation. `compose(g2, g1)` is the product `g2 g1` in which `g1` acts
//! first:
//!
//! ```text
//! (a₂, b₂)(a₁, b₁) = (Λ_{b₁} a₂ + a₁, b₁ + b₂)
//! ```

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::timealg::{format_scalar, parse_scalar, Scalar, TimeAlgError, TimePoly, Vec3Poly, DEFAULT_DEGREE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("degree budgets differ: {left} vs {right}")]
    BudgetMismatch { left: usize, right: usize },
    #[error("rotating elements are not supported")]
    Rotation,
    #[error(transparent)]
    TimeAlg(#[from] TimeAlgError),
}

#[derive(Clone, PartialEq, Debug)]
pub struct GroupElement {
    a: Vec3Poly,
    b: Scalar,
}

impl GroupElement {
    pub fn new(a: Vec3Poly, b: Scalar) -> Self {
        GroupElement { a, b }
    }

    /// Accepts a rotation matrix only if it is the identity.
    pub fn with_rotation(rotation: &[[Scalar; 3]; 3], a: Vec3Poly, b: Scalar) -> Result<Self, GroupError> {
        for (i, row) in rotation.iter().enumerate() {
            for (j, r) in row.iter().enumerate() {
                let expect = if i == j { Scalar::one() } else { Scalar::zero() };
                if *r != expect {
                    return Err(GroupError::Rotation);
                }
            }
        }
        Ok(Self::new(a, b))
    }

    pub fn identity(max_degree: usize) -> Self {
        Self::new(Vec3Poly::zero(max_degree), Scalar::zero())
    }

    pub fn translation(a: Vec3Poly) -> Self {
        Self::new(a, Scalar::zero())
    }

    pub fn time_translation(b: Scalar, max_degree: usize) -> Self {
        Self::new(Vec3Poly::zero(max_degree), b)
    }

    pub fn a(&self) -> &Vec3Poly {
        &self.a
    }

    pub fn b(&self) -> &Scalar {
        &self.b
    }

    pub fn max_degree(&self) -> usize {
        self.a.max_degree()
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// True iff every component of `a` has degree at most one.
    pub fn is_galilei(&self) -> bool {
        self.a.degree().is_none_or(|d| d <= 1)
    }

    /// Splits `g` into `(τ, α)` with `g = compose(τ, α)`, where `τ = (0, b)`
    /// and `α = (a, 0)`.
    pub fn factor(&self) -> (GroupElement, GroupElement) {
        (GroupElement::time_translation(self.b.clone(), self.max_degree()), GroupElement::translation(self.a.clone()))
    }

    pub fn to_f64_parts(&self) -> (Vec3Poly<f64>, f64) {
        (self.a.to_f64(), crate::timealg::Coeff::to_f64(&self.b))
    }
}

/// `g2 g1`: apply `g1`, then `g2`.
pub fn compose(g2: &GroupElement, g1: &GroupElement) -> Result<GroupElement, GroupError> {
    let (l, r) = (g2.max_degree(), g1.max_degree());
    if l != r {
        return Err(GroupError::BudgetMismatch { left: l, right: r });
    }
    Ok(GroupElement::new(g2.a.shift(&g1.b).add(&g1.a), &g1.b + &g2.b))
}

/// `(a, b)⁻¹ = (−Λ_{−b} a, −b)`.
pub fn inverse(g: &GroupElement) -> GroupElement {
    let nb = -g.b.clone();
    GroupElement::new(g.a.shift(&nb).neg(), nb)
}

pub fn is_galilei(g: &GroupElement) -> bool {
    g.is_galilei()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementRepr {
    a: [Vec<String>; 3],
    b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rotation: Option<[[String; 3]; 3]>,
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let comp = |p: &TimePoly| p.coeffs().iter().map(format_scalar).collect::<Vec<_>>();
        ElementRepr {
            a: [comp(&self.a.x), comp(&self.a.y), comp(&self.a.z)],
            b: format_scalar(&self.b),
            rotation: None,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = ElementRepr::deserialize(d)?;
        let parse = |v: &[String]| -> Result<Vec<Scalar>, TimeAlgError> { v.iter().map(|c| parse_scalar(c)).collect() };
        let longest = repr.a.iter().map(|c| c.len()).max().unwrap_or(0);
        let budget = DEFAULT_DEGREE.max(longest.saturating_sub(1));
        let mut comps = Vec::with_capacity(3);
        for c in &repr.a {
            comps.push(TimePoly::new(parse(c).map_err(D::Error::custom)?, budget).map_err(D::Error::custom)?);
        }
        let z = comps.pop().unwrap();
        let y = comps.pop().unwrap();
        let x = comps.pop().unwrap();
        let a = Vec3Poly::new(x, y, z);
        let b = parse_scalar(&repr.b).map_err(D::Error::custom)?;
        match repr.rotation {
            None => Ok(GroupElement::new(a, b)),
            Some(rows) => {
                let mut m: [[Scalar; 3]; 3] = Default::default();
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] = parse_scalar(&rows[i][j]).map_err(D::Error::custom)?;
                    }
                }
                GroupElement::with_rotation(&m, a, b).map_err(D::Error::custom)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Sampler;
    use crate::timealg::{int, rat};
    use proptest::prelude::*;

    fn px(powers: &[i64]) -> Vec3Poly {
        Vec3Poly::along_x(TimePoly::from_powers(powers.iter().map(|&p| int(p)).collect(), DEFAULT_DEGREE).unwrap())
    }

    #[test]
    fn identity_is_neutral() {
        let g = GroupElement::new(px(&[1, 2, 3]), rat(5, 2));
        let e = GroupElement::identity(DEFAULT_DEGREE);
        assert_eq!(compose(&e, &g).unwrap(), g);
        assert_eq!(compose(&g, &e).unwrap(), g);
    }

    #[test]
    fn worked_composition() {
        // (t², 0)(t, 1) = (t² + 3t + 1, 1)
        let g2 = GroupElement::new(px(&[0, 0, 1]), int(0));
        let g1 = GroupElement::new(px(&[0, 1]), int(1));
        assert_eq!(compose(&g2, &g1).unwrap(), GroupElement::new(px(&[1, 3, 1]), int(1)));
    }

    #[test]
    fn galilei_velocities_add() {
        let g2 = GroupElement::new(px(&[2, 3]), int(4));
        let g1 = GroupElement::new(px(&[-1, 5]), rat(1, 2));
        let g = compose(&g2, &g1).unwrap();
        assert!(g.is_galilei());
        assert_eq!(g.a().x.coeff(1), int(8));
    }

    #[test]
    fn inverse_examples() {
        let e = GroupElement::identity(DEFAULT_DEGREE);
        assert_eq!(inverse(&e), e);
        let g = GroupElement::new(px(&[0, 0, 1]), int(1));
        let gi = inverse(&g);
        assert_eq!(gi, GroupElement::new(px(&[-1, 2, -1]), int(-1)));
        assert!(compose(&g, &gi).unwrap().is_identity());
        let tau = GroupElement::time_translation(rat(3, 7), DEFAULT_DEGREE);
        assert_eq!(inverse(&tau), GroupElement::time_translation(rat(-3, 7), DEFAULT_DEGREE));
    }

    #[test]
    fn galilei_predicate() {
        assert!(GroupElement::new(px(&[2, -1]), int(3)).is_galilei());
        let accel = TimePoly::power(2, rat(1, 2), DEFAULT_DEGREE).unwrap();
        assert!(!GroupElement::translation(Vec3Poly::along_x(accel)).is_galilei());
        assert!(GroupElement::identity(DEFAULT_DEGREE).is_galilei());
    }

    #[test]
    fn budget_mismatch_is_an_error() {
        let g = GroupElement::identity(3);
        let h = GroupElement::identity(4);
        assert_eq!(compose(&g, &h), Err(GroupError::BudgetMismatch { left: 3, right: 4 }));
    }

    #[test]
    fn rotation_rejected() {
        let mut r: [[Scalar; 3]; 3] = Default::default();
        r[0][1] = int(-1);
        r[1][0] = int(1);
        r[2][2] = int(1);
        let res = GroupElement::with_rotation(&r, Vec3Poly::zero(2), int(0));
        assert_eq!(res, Err(GroupError::Rotation));
        for (i, row) in r.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = if i == j { int(1) } else { int(0) };
            }
        }
        assert!(GroupElement::with_rotation(&r, Vec3Poly::zero(2), int(0)).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let g = GroupElement::new(px(&[1, 0, 3]), rat(-2, 3));
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(text, r#"{"a":[["1","0","6"],[],[]],"b":"-2/3"}"#);
        let back: GroupElement = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"a":[[],[],[]],"b":"0","rotation":[["0","1","0"],["1","0","0"],["0","0","1"]]}"#;
        assert!(serde_json::from_str::<GroupElement>(bad).is_err());
        assert!(serde_json::from_str::<GroupElement>(r#"{"a":[[],[],[]],"b":"0","c":1}"#).is_err());
    }

    proptest! {
        #[test]
        fn group_axioms(seed in any::<u64>()) {
            let mut s = Sampler::new(seed);
            let g1 = s.element(4, DEFAULT_DEGREE);
            let g2 = s.element(4, DEFAULT_DEGREE);
            let g3 = s.element(4, DEFAULT_DEGREE);
            let left = compose(&g3, &compose(&g2, &g1).unwrap()).unwrap();
            let right = compose(&compose(&g3, &g2).unwrap(), &g1).unwrap();
            prop_assert_eq!(left, right);
            prop_assert!(compose(&g1, &inverse(&g1)).unwrap().is_identity());
            prop_assert!(compose(&inverse(&g1), &g1).unwrap().is_identity());
        }

        #[test]
        fn galilei_subgroup_closed(seed in any::<u64>()) {
            let mut s = Sampler::new(seed);
            let g1 = s.galilei(DEFAULT_DEGREE);
            let g2 = s.galilei(DEFAULT_DEGREE);
            prop_assert!(compose(&g2, &g1).unwrap().is_galilei());
            prop_assert!(inverse(&g1).is_galilei());
        }

        #[test]
        fn factorization_round_trips(seed in any::<u64>()) {
            let mut s = Sampler::new(seed);
            let g = s.element(6, DEFAULT_DEGREE);
            let (tau, alpha) = g.factor();
            prop_assert!(tau.a().is_zero());
            prop_assert!(alpha.b().is_zero());
            prop_assert_eq!(compose(&tau, &alpha).unwrap(), g);
        }
    }
}
