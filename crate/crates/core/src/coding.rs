//! Gödel numbering shared by every other module.
//!
//! All numbers are arbitrary precision: codes of facts about elements of
//! derived structures grow doubly exponentially in the nesting depth, and the
//! nested constructions in [`crate::transforms`] routinely leave `u128`.
//!
//! Layout:
//! * `pair(a, b) = (a + b)(a + b + 1)/2 + b` (Cantor).
//! * tuples: `enc([]) = 0`, `enc([x] ++ rest) = pair(x, enc(rest)) + 1`.
//! * facts: `pair(tag, payload)`, tag 0/1 = positive/negative equality with
//!   payload `pair(x, y)`, tag 2/3 = positive/negative relation with payload
//!   `pair(rel, enc(args))`.
//! * joins: `3n` asks the left diagram, `3n + 1` the graph of the map (as
//!   pair codes), `3n + 2` the right diagram.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Natural numbers as used by every code in the crate.
pub type Nat = BigUint;

pub fn nat(n: u64) -> Nat {
    Nat::from(n)
}

pub fn pair(a: &Nat, b: &Nat) -> Nat {
    let s = a + b;
    let t = (&s * (&s + 1u32)) >> 1;
    t + b
}

pub fn unpair(n: &Nat) -> (Nat, Nat) {
    // w = floor((sqrt(8n + 1) - 1) / 2)
    let disc: Nat = (n << 3) + 1u32;
    let mut w: Nat = (disc.sqrt() - 1u32) >> 1;
    // integer sqrt is exact, but keep the invariant t <= n < t + w + 1 explicit
    while triangle(&w) > *n {
        w -= 1u32;
    }
    while triangle(&(&w + 1u32)) <= *n {
        w += 1u32;
    }
    let b = n - triangle(&w);
    let a = &w - &b;
    (a, b)
}

fn triangle(w: &Nat) -> Nat {
    (w * (w + 1u32)) >> 1
}

pub fn pair_u64(a: u64, b: u64) -> Nat {
    pair(&nat(a), &nat(b))
}

/// Code of a finite sequence of naturals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TupleCode(pub Nat);

pub fn enc_tuple(t: &[Nat]) -> TupleCode {
    let mut acc = Nat::zero();
    for x in t.iter().rev() {
        acc = pair(x, &acc) + 1u32;
    }
    TupleCode(acc)
}

pub fn enc_tuple_u64(t: &[u64]) -> TupleCode {
    let v: Vec<Nat> = t.iter().map(|&x| nat(x)).collect();
    enc_tuple(&v)
}

pub fn dec_tuple(c: &TupleCode) -> Vec<Nat> {
    let mut out = Vec::new();
    let mut cur = c.0.clone();
    while !cur.is_zero() {
        let (x, rest) = unpair(&(cur - 1u32));
        out.push(x);
        cur = rest;
    }
    out
}

/// Length of the sequence coded by `c`, without materialising it.
pub fn tuple_len(c: &TupleCode) -> usize {
    let mut n = 0;
    let mut cur = c.0.clone();
    while !cur.is_zero() {
        cur = unpair(&(cur - 1u32)).1;
        n += 1;
    }
    n
}

/// Bijection ω → ω^k for a fixed `k`, by iterated unpairing.
///
/// Used to enumerate fixed-length tuples in a fair order where the list
/// coding would grow too fast.
pub fn dec_fixed(n: &Nat, k: usize) -> Vec<Nat> {
    match k {
        0 => Vec::new(),
        1 => vec![n.clone()],
        _ => {
            let (head, rest) = unpair(n);
            let mut out = vec![head];
            out.extend(dec_fixed(&rest, k - 1));
            out
        }
    }
}

pub fn enc_fixed(t: &[Nat]) -> Nat {
    match t.len() {
        0 => Nat::zero(),
        1 => t[0].clone(),
        _ => pair(&t[0], &enc_fixed(&t[1..])),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactKind {
    PosEq,
    NegEq,
    PosRel,
    NegRel,
}

impl FactKind {
    pub fn tag(self) -> u32 {
        match self {
            FactKind::PosEq => 0,
            FactKind::NegEq => 1,
            FactKind::PosRel => 2,
            FactKind::NegRel => 3,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        Some(match tag {
            0 => FactKind::PosEq,
            1 => FactKind::NegEq,
            2 => FactKind::PosRel,
            3 => FactKind::NegRel,
            _ => return None,
        })
    }

    pub fn is_positive(self) -> bool {
        matches!(self, FactKind::PosEq | FactKind::PosRel)
    }

    pub fn is_equality(self) -> bool {
        matches!(self, FactKind::PosEq | FactKind::NegEq)
    }

    pub fn negated(self) -> Self {
        match self {
            FactKind::PosEq => FactKind::NegEq,
            FactKind::NegEq => FactKind::PosEq,
            FactKind::PosRel => FactKind::NegRel,
            FactKind::NegRel => FactKind::PosRel,
        }
    }
}

/// A decoded atomic sentence or its negation.
///
/// `rel` is `None` exactly for equality facts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub kind: FactKind,
    pub rel: Option<u64>,
    pub args: Vec<Nat>,
}

impl Fact {
    pub fn eq(positive: bool, x: Nat, y: Nat) -> Fact {
        let kind = if positive { FactKind::PosEq } else { FactKind::NegEq };
        Fact { kind, rel: None, args: vec![x, y] }
    }

    pub fn rel(positive: bool, rel: u64, args: Vec<Nat>) -> Fact {
        let kind = if positive { FactKind::PosRel } else { FactKind::NegRel };
        Fact { kind, rel: Some(rel), args }
    }

    /// `x = x`, the fact witnessing that `x` is an element.
    pub fn element(x: Nat) -> Fact {
        Fact::eq(true, x.clone(), x)
    }

    pub fn negation(&self) -> Fact {
        Fact { kind: self.kind.negated(), rel: self.rel, args: self.args.clone() }
    }

    /// Same fact with every argument passed through `f`.
    pub fn map_args<F: FnMut(&Nat) -> Nat>(&self, f: F) -> Fact {
        Fact { kind: self.kind, rel: self.rel, args: self.args.iter().map(f).collect() }
    }

    pub fn try_map_args<E, F: FnMut(&Nat) -> std::result::Result<Nat, E>>(
        &self,
        f: F,
    ) -> std::result::Result<Fact, E> {
        let args = self.args.iter().map(f).collect::<std::result::Result<Vec<_>, E>>()?;
        Ok(Fact { kind: self.kind, rel: self.rel, args })
    }

    pub fn code(&self) -> FactCode {
        // shape is enforced by the constructors and by `encode_fact`
        let payload = match self.rel {
            None => pair(&self.args[0], &self.args[1]),
            Some(r) => pair(&nat(r), &enc_tuple(&self.args).0),
        };
        FactCode(pair(&Nat::from(self.kind.tag()), &payload))
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.kind.is_positive() { "" } else { "¬" };
        let args: Vec<String> = self.args.iter().map(|a| a.to_string()).collect();
        match self.rel {
            None => write!(f, "{sign}Eq({})", args.join(",")),
            Some(r) => write!(f, "{sign}R{r}({})", args.join(",")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactCode(pub Nat);

impl fmt::Display for FactCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn encode_fact(kind: FactKind, rel: Option<u64>, args: &[Nat]) -> Result<FactCode> {
    match (kind.is_equality(), rel) {
        (true, None) if args.len() == 2 => {}
        (true, _) => {
            return Err(Error::MalformedFact(format!(
                "equality needs exactly two arguments and no relation index, got {} args",
                args.len()
            )))
        }
        (false, None) => {
            return Err(Error::MalformedFact("relation fact without relation index".into()))
        }
        (false, Some(_)) => {}
    }
    Ok(Fact { kind, rel, args: args.to_vec() }.code())
}

pub fn decode_fact(code: &FactCode) -> Result<Fact> {
    let (tag, payload) = unpair(&code.0);
    let kind = tag
        .to_u32()
        .and_then(FactKind::from_tag)
        .ok_or_else(|| Error::MalformedFact(format!("code {} has tag {tag}", code.0)))?;
    if kind.is_equality() {
        let (x, y) = unpair(&payload);
        Ok(Fact { kind, rel: None, args: vec![x, y] })
    } else {
        let (r, t) = unpair(&payload);
        let rel = r
            .to_u64()
            .ok_or_else(|| Error::MalformedFact(format!("relation index {r} out of range")))?;
        Ok(Fact { kind, rel: Some(rel), args: dec_tuple(&TupleCode(t)) })
    }
}

/// A query against `A ⊕ f ⊕ B`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum JoinCode {
    /// Membership of a fact code in the first diagram.
    Left(Nat),
    /// Membership of `pair(x, y)` in the graph of the map.
    Map(Nat),
    /// Membership of a fact code in the second diagram.
    Right(Nat),
}

impl JoinCode {
    pub fn code(&self) -> Nat {
        match self {
            JoinCode::Left(n) => n * 3u32,
            JoinCode::Map(n) => n * 3u32 + 1u32,
            JoinCode::Right(n) => n * 3u32 + 2u32,
        }
    }

    pub fn decode(code: &Nat) -> JoinCode {
        let three = Nat::from(3u32);
        let n = code / &three;
        match (code % &three).to_u32() {
            Some(0) => JoinCode::Left(n),
            Some(1) => JoinCode::Map(n),
            _ => JoinCode::Right(n),
        }
    }
}

pub fn is_one(n: &Nat) -> bool {
    n.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_values() {
        assert_eq!(pair_u64(0, 0), nat(0));
        assert_eq!(pair_u64(1, 2), nat(8));
        assert_eq!(pair_u64(2, 1), nat(7));
        assert_eq!(unpair(&nat(0)), (nat(0), nat(0)));
        assert_eq!(unpair(&nat(8)), (nat(1), nat(2)));
        assert_eq!(unpair(&nat(7)), (nat(2), nat(1)));
    }

    #[test]
    fn tuple_values() {
        assert_eq!(enc_tuple(&[]).0, nat(0));
        assert_eq!(enc_tuple_u64(&[0]).0, nat(1));
        assert_eq!(enc_tuple_u64(&[0, 0]).0, nat(3));
        assert_eq!(dec_tuple(&TupleCode(nat(0))), Vec::<Nat>::new());
        assert_eq!(dec_tuple(&TupleCode(nat(1))), vec![nat(0)]);
        assert_eq!(dec_tuple(&TupleCode(nat(3))), vec![nat(0), nat(0)]);
        assert_eq!(tuple_len(&TupleCode(nat(3))), 2);
    }

    #[test]
    fn fact_values() {
        let z = encode_fact(FactKind::PosEq, None, &[nat(0), nat(0)]).unwrap();
        assert_eq!(z.0, nat(0));
        let neg = encode_fact(FactKind::NegEq, None, &[nat(0), nat(0)]).unwrap();
        assert_eq!(decode_fact(&neg).unwrap(), Fact::eq(false, nat(0), nat(0)));
        let r = encode_fact(FactKind::PosRel, Some(0), &[nat(0), nat(2)]).unwrap();
        let by_hand = pair(&nat(2), &pair(&nat(0), &enc_tuple_u64(&[0, 2]).0));
        assert_eq!(r.0, by_hand);
    }

    #[test]
    fn malformed_shapes() {
        assert!(encode_fact(FactKind::PosEq, None, &[nat(1)]).is_err());
        assert!(encode_fact(FactKind::PosRel, None, &[nat(1)]).is_err());
        assert!(encode_fact(FactKind::NegEq, Some(0), &[nat(1), nat(1)]).is_err());
        // tag 4
        assert!(decode_fact(&FactCode(pair_u64(4, 0))).is_err());
    }

    #[test]
    fn join_residues() {
        for n in 0..3000u64 {
            let c = nat(n);
            let j = JoinCode::decode(&c);
            assert_eq!(j.code(), c);
            let r = n % 3;
            match j {
                JoinCode::Left(_) => assert_eq!(r, 0),
                JoinCode::Map(_) => assert_eq!(r, 1),
                JoinCode::Right(_) => assert_eq!(r, 2),
            }
        }
    }

    #[test]
    fn fixed_width_is_bijective_on_prefix() {
        for n in 0..500u64 {
            let t = dec_fixed(&nat(n), 3);
            assert_eq!(enc_fixed(&t), nat(n));
        }
    }

    #[test]
    fn large_unpair_is_exact() {
        let a = Nat::from(10u32).pow(300) + 17u32;
        let b = Nat::from(7u32).pow(250);
        assert_eq!(unpair(&pair(&a, &b)), (a, b));
    }
}
