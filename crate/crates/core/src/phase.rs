//! Symbolic spider phases.
//!
//! A phase is `pi * c + sum_s k_s * s`, where `c` and `k_s` are rationals and
//! `s` ranges over trainable parameters and data-input symbols. The constant
//! part is kept reduced modulo 2 (i.e. modulo a full turn).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Symbol values keyed by symbol. Trainable values are angles in radians;
/// input values are data points in `[0, 1]`.
pub type Binding = BTreeMap<SymbolId, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    Trainable,
    Input,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId {
    pub kind: SymbolKind,
    pub index: u32,
}

impl SymbolId {
    pub fn trainable(index: u32) -> Self {
        SymbolId { kind: SymbolKind::Trainable, index }
    }

    pub fn input(index: u32) -> Self {
        SymbolId { kind: SymbolKind::Input, index }
    }

    pub fn is_input(&self) -> bool {
        self.kind == SymbolKind::Input
    }

    /// Radians contributed per unit coefficient and unit bound value.
    ///
    /// Inputs are encoded as `pi * x`, so `x = 0` is the identity and `x = 1`
    /// a half turn.
    pub fn angle_scale(&self) -> f64 {
        match self.kind {
            SymbolKind::Trainable => 1.0,
            SymbolKind::Input => PI,
        }
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SymbolKind::Trainable => write!(f, "t{}", self.index),
            SymbolKind::Input => write!(f, "x{}", self.index),
        }
    }
}

impl FromStr for SymbolId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid symbol `{s}`"));
        let (kind, rest) = match s.as_bytes().first() {
            Some(b't') => (SymbolKind::Trainable, &s[1..]),
            Some(b'x') => (SymbolKind::Input, &s[1..]),
            _ => return Err(bad()),
        };
        let index = rest.parse::<u32>().map_err(|_| bad())?;
        Ok(SymbolId { kind, index })
    }
}

impl Serialize for SymbolId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SymbolId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PhaseExpr {
    constant: Rational64,
    terms: BTreeMap<SymbolId, Rational64>,
}

fn reduce_mod_two(r: Rational64) -> Rational64 {
    let two = Rational64::from_integer(2);
    let q = (r / two).floor();
    r - q * two
}

impl PhaseExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The constant phase `pi * r`.
    pub fn pi_times(r: Rational64) -> Self {
        PhaseExpr { constant: reduce_mod_two(r), terms: BTreeMap::new() }
    }

    /// The constant phase `pi * numer / denom`.
    pub fn pi_frac(numer: i64, denom: i64) -> Self {
        Self::pi_times(Rational64::new(numer, denom))
    }

    pub fn symbol(id: SymbolId) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(id, Rational64::from_integer(1));
        PhaseExpr { constant: Rational64::zero(), terms }
    }

    /// Builds an expression from parts, normalizing both.
    pub fn from_parts(
        constant: Rational64,
        terms: impl IntoIterator<Item = (SymbolId, Rational64)>,
    ) -> Self {
        let mut out = PhaseExpr::pi_times(constant);
        for (id, k) in terms {
            out.add_term(id, k);
        }
        out
    }

    /// Multiple of pi, in `[0, 2)`.
    pub fn constant(&self) -> Rational64 {
        self.constant
    }

    pub fn terms(&self) -> &BTreeMap<SymbolId, Rational64> {
        &self.terms
    }

    pub fn symbols(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.terms.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_input(&self) -> bool {
        self.terms.keys().any(SymbolId::is_input)
    }

    fn add_term(&mut self, id: SymbolId, k: Rational64) {
        if k.is_zero() {
            return;
        }
        let entry = self.terms.entry(id).or_insert_with(Rational64::zero);
        *entry += k;
        if entry.is_zero() {
            self.terms.remove(&id);
        }
    }

    /// Evaluates the phase in radians.
    pub fn eval(&self, binding: &Binding) -> Result<f64> {
        let mut angle = PI * rational_to_f64(self.constant);
        for (id, k) in &self.terms {
            let value = binding.get(id).ok_or(Error::UnboundSymbol(*id))?;
            angle += rational_to_f64(*k) * id.angle_scale() * value;
        }
        Ok(angle)
    }

    /// Renders as `pi*p/q + (p/q)*t0 + (p/q)*x0`; the zero phase renders as `0`.
    pub fn to_qasm(&self) -> String {
        let mut parts = Vec::new();
        if !self.constant.is_zero() {
            parts.push(format!("pi*{}/{}", self.constant.numer(), self.constant.denom()));
        }
        for (id, k) in &self.terms {
            parts.push(format!("({}/{})*{}", k.numer(), k.denom(), id));
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }

    /// Parses the format produced by [`PhaseExpr::to_qasm`]. A bare number is
    /// read as a multiple of pi only when prefixed by `pi*`.
    pub fn parse_qasm(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid angle expression `{s}`"));
        let mut out = PhaseExpr::zero();
        for part in s.split('+').map(str::trim) {
            if part == "0" {
                continue;
            }
            if part == "pi" {
                out += PhaseExpr::pi_frac(1, 1);
            } else if let Some(rest) = part.strip_prefix("pi*") {
                out += PhaseExpr::pi_times(parse_rational(rest).ok_or_else(bad)?);
            } else if let Some(rest) = part.strip_prefix('(') {
                let (coeff, sym) = rest.split_once(")*").ok_or_else(bad)?;
                let k = parse_rational(coeff).ok_or_else(bad)?;
                let id: SymbolId = sym.trim().parse()?;
                out.add_term(id, k);
            } else {
                return Err(bad());
            }
        }
        Ok(out)
    }
}

pub(crate) fn rational_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub(crate) fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n = n.trim().parse::<i64>().ok()?;
            let d = d.trim().parse::<i64>().ok()?;
            if d == 0 {
                None
            } else {
                Some(Rational64::new(n, d))
            }
        }
        None => s.parse::<i64>().ok().map(Rational64::from_integer),
    }
}

fn format_rational(r: Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

impl Add for PhaseExpr {
    type Output = PhaseExpr;

    fn add(mut self, rhs: PhaseExpr) -> PhaseExpr {
        self += rhs;
        self
    }
}

impl Add<&PhaseExpr> for &PhaseExpr {
    type Output = PhaseExpr;

    fn add(self, rhs: &PhaseExpr) -> PhaseExpr {
        let mut out = self.clone();
        out += rhs.clone();
        out
    }
}

impl AddAssign for PhaseExpr {
    fn add_assign(&mut self, rhs: PhaseExpr) {
        self.constant = reduce_mod_two(self.constant + rhs.constant);
        for (id, k) in rhs.terms {
            self.add_term(id, k);
        }
    }
}

impl Neg for PhaseExpr {
    type Output = PhaseExpr;

    fn neg(self) -> PhaseExpr {
        PhaseExpr::from_parts(-self.constant, self.terms.into_iter().map(|(id, k)| (id, -k)))
    }
}

impl Sub for PhaseExpr {
    type Output = PhaseExpr;

    fn sub(self, rhs: PhaseExpr) -> PhaseExpr {
        self + (-rhs)
    }
}

impl Mul<Rational64> for PhaseExpr {
    type Output = PhaseExpr;

    fn mul(self, k: Rational64) -> PhaseExpr {
        PhaseExpr::from_parts(
            self.constant * k,
            self.terms.into_iter().map(|(id, c)| (id, c * k)),
        )
    }
}

impl fmt::Display for PhaseExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_qasm())
    }
}

#[derive(Serialize, Deserialize)]
struct PhaseRepr {
    #[serde(rename = "const")]
    constant: String,
    #[serde(default)]
    terms: BTreeMap<SymbolId, String>,
}

impl Serialize for PhaseExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PhaseRepr {
            constant: format_rational(self.constant),
            terms: self.terms.iter().map(|(id, k)| (*id, format_rational(*k))).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PhaseExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PhaseRepr::deserialize(d)?;
        let constant = parse_rational(&repr.constant)
            .ok_or_else(|| D::Error::custom(format!("bad rational `{}`", repr.constant)))?;
        let mut terms = Vec::with_capacity(repr.terms.len());
        for (id, k) in repr.terms {
            let k = parse_rational(&k)
                .ok_or_else(|| D::Error::custom(format!("bad rational `{k}`")))?;
            terms.push((id, k));
        }
        Ok(PhaseExpr::from_parts(constant, terms))
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use num_traits::Signed;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn constants_wrap_into_one_turn() {
        assert_eq!(PhaseExpr::pi_frac(5, 2).constant(), r(1, 2));
        assert_eq!(PhaseExpr::pi_frac(-1, 2).constant(), r(3, 2));
        assert!(PhaseExpr::pi_frac(4, 1).is_zero());
    }

    #[test]
    fn cancelling_terms_are_dropped() {
        let t = PhaseExpr::symbol(SymbolId::trainable(0));
        let sum = t.clone() + (-t);
        assert!(sum.terms().is_empty());
        assert!(sum.is_zero());
    }

    #[test]
    fn eval_scales_inputs_by_pi() {
        let e = PhaseExpr::from_parts(
            r(1, 2),
            [(SymbolId::trainable(0), r(2, 1)), (SymbolId::input(0), r(1, 1))],
        );
        let mut b = Binding::new();
        b.insert(SymbolId::trainable(0), 0.25);
        b.insert(SymbolId::input(0), 0.5);
        let want = PI / 2.0 + 0.5 + PI * 0.5;
        assert!((e.eval(&b).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn eval_reports_unbound_symbols() {
        let e = PhaseExpr::symbol(SymbolId::input(3));
        match e.eval(&Binding::new()) {
            Err(Error::UnboundSymbol(id)) => assert_eq!(id, SymbolId::input(3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn qasm_text_round_trips() {
        let e = PhaseExpr::from_parts(
            r(3, 4),
            [(SymbolId::trainable(2), r(-1, 2)), (SymbolId::input(0), r(1, 1))],
        );
        assert_eq!(e.to_qasm(), "pi*3/4 + (-1/2)*t2 + (1/1)*x0");
        assert_eq!(PhaseExpr::parse_qasm(&e.to_qasm()).unwrap(), e);
        assert_eq!(PhaseExpr::parse_qasm("0").unwrap(), PhaseExpr::zero());
        assert!(PhaseExpr::parse_qasm("pi*1/0").is_err());
    }

    #[test]
    fn json_shape() {
        let e = PhaseExpr::from_parts(r(1, 2), [(SymbolId::input(1), r(1, 3))]);
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(v, serde_json::json!({"const": "1/2", "terms": {"x1": "1/3"}}));
        let back: PhaseExpr = serde_json::from_value(v).unwrap();
        assert_eq!(back, e);
    }

    fn arb_phase() -> impl Strategy<Value = PhaseExpr> {
        let term = (0u32..3, any::<bool>(), -6i64..6, 1i64..5);
        (-20i64..20, 1i64..9, proptest::collection::vec(term, 0..4)).prop_map(|(n, d, ts)| {
            PhaseExpr::from_parts(
                r(n, d),
                ts.into_iter().map(|(i, input, kn, kd)| {
                    let id = if input { SymbolId::input(i) } else { SymbolId::trainable(i) };
                    (id, r(kn, kd))
                }),
            )
        })
    }

    proptest! {
        #[test]
        fn addition_is_associative_and_normalized(a in arb_phase(), b in arb_phase(), c in arb_phase()) {
            let left = (a.clone() + b.clone()) + c.clone();
            let right = a.clone() + (b.clone() + c);
            prop_assert_eq!(&left, &right);
            prop_assert!(!left.constant().is_negative() && left.constant() < Rational64::from_integer(2));
            prop_assert!(left.terms().values().all(|k| !k.is_zero()));
            prop_assert_eq!(a.clone() + PhaseExpr::zero(), a.clone());
            prop_assert_eq!(a.clone() + b.clone(), b + a);
        }
    }
}
