//! Model orders, coefficient slots and the zero-pin mask.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the four lag polynomials of a multiplicative seasonal ARIMA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Factor {
    Ar,
    Ma,
    SeasonalAr,
    SeasonalMa,
}

impl Factor {
    pub const ALL: [Factor; 4] = [Factor::Ar, Factor::Ma, Factor::SeasonalAr, Factor::SeasonalMa];

    pub fn prefix(self) -> &'static str {
        match self {
            Factor::Ar => "ar",
            Factor::Ma => "ma",
            Factor::SeasonalAr => "sar",
            Factor::SeasonalMa => "sma",
        }
    }

    pub fn is_autoregressive(self) -> bool {
        matches!(self, Factor::Ar | Factor::SeasonalAr)
    }
}

/// A named coefficient such as `ma1` or `sar3` (index is 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Slot {
    pub factor: Factor,
    pub index: usize,
}

impl Slot {
    pub fn new(factor: Factor, index: usize) -> Self {
        Self { factor, index }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.factor.prefix(), self.index)
    }
}

impl FromStr for Slot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
        let (name, digits) = s.split_at(split);
        let factor = match name {
            "ar" => Factor::Ar,
            "ma" => Factor::Ma,
            "sar" => Factor::SeasonalAr,
            "sma" => Factor::SeasonalMa,
            _ => {
                return Err(Error::Parse {
                    position: 0,
                    message: format!("unknown coefficient name '{s}'"),
                })
            }
        };
        let index: usize = digits.parse().map_err(|_| Error::Parse {
            position: split,
            message: format!("missing coefficient index in '{s}'"),
        })?;
        if index == 0 {
            return Err(Error::Parse {
                position: split,
                message: "coefficient indices start at 1".into(),
            });
        }
        Ok(Slot { factor, index })
    }
}

impl TryFrom<String> for Slot {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Slot> for String {
    fn from(s: Slot) -> String {
        s.to_string()
    }
}

/// Orders `(p,d,q)×(P,D,Q)_s` plus the set of coefficients pinned to zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct SarimaSpec {
    p: usize,
    d: usize,
    q: usize,
    seasonal_p: usize,
    seasonal_d: usize,
    seasonal_q: usize,
    period: usize,
    mask: BTreeSet<Slot>,
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    order: [usize; 3],
    seasonal_order: [usize; 3],
    period: usize,
    mask: Vec<Slot>,
}

impl TryFrom<SpecRepr> for SarimaSpec {
    type Error = Error;
    fn try_from(r: SpecRepr) -> Result<Self> {
        SarimaSpec::new(r.order, r.seasonal_order, r.period)?.with_mask(r.mask)
    }
}

impl From<SarimaSpec> for SpecRepr {
    fn from(s: SarimaSpec) -> SpecRepr {
        SpecRepr {
            order: [s.p, s.d, s.q],
            seasonal_order: [s.seasonal_p, s.seasonal_d, s.seasonal_q],
            period: s.period,
            mask: s.mask.into_iter().collect(),
        }
    }
}

impl SarimaSpec {
    /// `order = [p, d, q]`, `seasonal = [P, D, Q]`.
    pub fn new(order: [usize; 3], seasonal: [usize; 3], period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::Validation("seasonal period must be at least 1".into()));
        }
        Ok(Self {
            p: order[0],
            d: order[1],
            q: order[2],
            seasonal_p: seasonal[0],
            seasonal_d: seasonal[1],
            seasonal_q: seasonal[2],
            period,
            mask: BTreeSet::new(),
        })
    }

    /// Pins the given slots to zero. Every slot must exist in the model.
    pub fn with_mask<I: IntoIterator<Item = Slot>>(mut self, slots: I) -> Result<Self> {
        for slot in slots {
            let order = self.order(slot.factor);
            if slot.index == 0 || slot.index > order {
                return Err(Error::Validation(format!(
                    "cannot pin {slot}: {} order is {order}",
                    slot.factor.prefix()
                )));
            }
            self.mask.insert(slot);
        }
        Ok(self)
    }

    pub fn order(&self, factor: Factor) -> usize {
        match factor {
            Factor::Ar => self.p,
            Factor::Ma => self.q,
            Factor::SeasonalAr => self.seasonal_p,
            Factor::SeasonalMa => self.seasonal_q,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seasonal_d(&self) -> usize {
        self.seasonal_d
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn mask(&self) -> &BTreeSet<Slot> {
        &self.mask
    }

    pub fn is_masked(&self, slot: Slot) -> bool {
        self.mask.contains(&slot)
    }

    /// Lag multiplier of a factor: 1 for nonseasonal, `s` for seasonal.
    pub fn lag_step(&self, factor: Factor) -> usize {
        match factor {
            Factor::Ar | Factor::Ma => 1,
            Factor::SeasonalAr | Factor::SeasonalMa => self.period,
        }
    }

    /// Degree of the expanded AR polynomial, `p + s·P`.
    pub fn ar_degree(&self) -> usize {
        self.p + self.period * self.seasonal_p
    }

    /// Degree of the expanded MA polynomial, `q + s·Q`.
    pub fn ma_degree(&self) -> usize {
        self.q + self.period * self.seasonal_q
    }

    /// Observations lost to differencing, `d + D·s`.
    pub fn consumed(&self) -> usize {
        self.d + self.seasonal_d * self.period
    }

    /// Every slot of the model in canonical order (ar, ma, sar, sma).
    pub fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        Factor::ALL
            .into_iter()
            .flat_map(move |f| (1..=self.order(f)).map(move |i| Slot::new(f, i)))
    }

    /// Slots that are estimated, in canonical order.
    pub fn free_slots(&self) -> Vec<Slot> {
        self.slots().filter(|s| !self.mask.contains(s)).collect()
    }

    /// `p + q + P + Q − |mask|`.
    pub fn free_count(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q - self.mask.len()
    }
}

impl fmt::Display for SarimaSpec {
    /// Renders `(p,d,q)x(P,D,Q)s[slot=0,...]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{})x({},{},{}){}",
            self.p, self.d, self.q, self.seasonal_p, self.seasonal_d, self.seasonal_q, self.period
        )?;
        if !self.mask.is_empty() {
            let pins: Vec<String> = self.mask.iter().map(|s| format!("{s}=0")).collect();
            write!(f, "[{}]", pins.join(","))?;
        }
        Ok(())
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next().filter(|c| c.is_whitespace()) {
            self.pos += c.len_utf8();
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.text[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected '{c}'")))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected a non-negative integer"));
        }
        let value = rest[..len].parse().map_err(|_| self.err("integer too large"))?;
        self.pos += len;
        Ok(value)
    }

    fn triple(&mut self) -> Result<[usize; 3]> {
        self.expect('(')?;
        let a = self.number()?;
        self.expect(',')?;
        let b = self.number()?;
        self.expect(',')?;
        let c = self.number()?;
        self.expect(')')?;
        Ok([a, b, c])
    }

    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest.find(|c: char| !c.is_ascii_alphanumeric()).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }
}

impl FromStr for SarimaSpec {
    type Err = Error;

    /// Parses `(p,d,q)x(P,D,Q)s` with optional zero pins `[sar3=0,ma2=0]`.
    fn from_str(text: &str) -> Result<Self> {
        let mut cur = Cursor { text, pos: 0 };
        let order = cur.triple()?;
        cur.skip_ws();
        if !(cur.eat('x') || cur.eat('X') || cur.eat('×')) {
            return Err(cur.err("expected 'x' between nonseasonal and seasonal orders"));
        }
        let seasonal = cur.triple()?;
        let period = cur.number()?;
        let mut pins = Vec::new();
        if cur.eat('[') {
            loop {
                let at = cur.pos;
                let name = cur.word();
                let slot: Slot = name.parse().map_err(|_| Error::Parse {
                    position: at,
                    message: format!("invalid coefficient name '{name}'"),
                })?;
                cur.expect('=')?;
                let value_at = cur.pos;
                if cur.number()? != 0 {
                    return Err(Error::Parse {
                        position: value_at,
                        message: "coefficients can only be pinned to 0".into(),
                    });
                }
                pins.push(slot);
                if cur.eat(']') {
                    break;
                }
                cur.expect(',')?;
            }
        }
        cur.skip_ws();
        if cur.pos != text.len() {
            return Err(cur.err("unexpected trailing characters"));
        }
        SarimaSpec::new(order, seasonal, period)?.with_mask(pins)
    }
}

/// Values for every slot of a spec; masked slots hold exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    ar: Vec<f64>,
    ma: Vec<f64>,
    sar: Vec<f64>,
    sma: Vec<f64>,
    mask: BTreeSet<Slot>,
}

impl CoefficientSet {
    pub fn zeros(spec: &SarimaSpec) -> Self {
        Self {
            ar: vec![0.0; spec.p],
            ma: vec![0.0; spec.q],
            sar: vec![0.0; spec.seasonal_p],
            sma: vec![0.0; spec.seasonal_q],
            mask: spec.mask.clone(),
        }
    }

    /// Builds a set from the free coefficients in [`SarimaSpec::free_slots`] order.
    pub fn from_free(spec: &SarimaSpec, free: &[f64]) -> Result<Self> {
        let slots = spec.free_slots();
        if slots.len() != free.len() {
            return Err(Error::Validation(format!(
                "expected {} free coefficients, got {}",
                slots.len(),
                free.len()
            )));
        }
        let mut set = Self::zeros(spec);
        for (slot, &v) in slots.iter().zip(free) {
            set.set(*slot, v)?;
        }
        Ok(set)
    }

    /// Builds a set from `(slot, value)` pairs; unnamed slots are zero.
    pub fn from_named<I: IntoIterator<Item = (Slot, f64)>>(spec: &SarimaSpec, values: I) -> Result<Self> {
        let mut set = Self::zeros(spec);
        for (slot, v) in values {
            set.set(slot, v)?;
        }
        Ok(set)
    }

    /// Sets a free coefficient. Masked or nonexistent slots are rejected.
    pub fn set(&mut self, slot: Slot, value: f64) -> Result<()> {
        if self.mask.contains(&slot) {
            return Err(Error::Validation(format!("{slot} is pinned to zero")));
        }
        if !value.is_finite() {
            return Err(Error::Validation(format!("{slot} must be finite")));
        }
        let target = self.factor_mut(slot.factor);
        match slot.index.checked_sub(1).and_then(|i| target.get_mut(i)) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(Error::Validation(format!("{slot} does not exist in this model"))),
        }
    }

    pub fn get(&self, slot: Slot) -> f64 {
        slot.index
            .checked_sub(1)
            .and_then(|i| self.factor(slot.factor).get(i).copied())
            .unwrap_or(0.0)
    }

    /// Coefficients of one factor, lag order 1..=order.
    pub fn factor(&self, factor: Factor) -> &[f64] {
        match factor {
            Factor::Ar => &self.ar,
            Factor::Ma => &self.ma,
            Factor::SeasonalAr => &self.sar,
            Factor::SeasonalMa => &self.sma,
        }
    }

    fn factor_mut(&mut self, factor: Factor) -> &mut Vec<f64> {
        match factor {
            Factor::Ar => &mut self.ar,
            Factor::Ma => &mut self.ma,
            Factor::SeasonalAr => &mut self.sar,
            Factor::SeasonalMa => &mut self.sma,
        }
    }

    /// Free coefficient values in [`SarimaSpec::free_slots`] order.
    pub fn free_values(&self, spec: &SarimaSpec) -> Vec<f64> {
        spec.free_slots().into_iter().map(|s| self.get(s)).collect()
    }

    pub(crate) fn matches(&self, spec: &SarimaSpec) -> bool {
        Factor::ALL.iter().all(|&f| self.factor(f).len() == spec.order(f)) && self.mask == spec.mask
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_sparse_seasonal_spec() {
        let spec: SarimaSpec = "(0,1,1)x(4,1,0)12[sar3=0]".parse().unwrap();
        assert_eq!(spec.order(Factor::Ma), 1);
        assert_eq!(spec.order(Factor::SeasonalAr), 4);
        assert_eq!((spec.d(), spec.seasonal_d(), spec.period()), (1, 1, 12));
        assert!(spec.is_masked(Slot::new(Factor::SeasonalAr, 3)));
        assert_eq!(spec.free_count(), 4);
        let names: Vec<String> = spec.free_slots().iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["ma1", "sar1", "sar2", "sar4"]);
        assert_eq!(spec.to_string(), "(0,1,1)x(4,1,0)12[sar3=0]");
    }

    #[test]
    fn parses_white_noise_spec() {
        let spec: SarimaSpec = "(0,0,0)x(0,0,0)1".parse().unwrap();
        assert_eq!(spec.free_count(), 0);
        assert_eq!(spec.ar_degree() + spec.ma_degree() + spec.consumed(), 0);
    }

    #[test]
    fn tolerates_whitespace() {
        let spec: SarimaSpec = " (0, 1, 1) x (4, 1, 0) 12 [ sar3=0 , sar2 = 0 ] ".parse().unwrap();
        assert_eq!(spec.to_string(), "(0,1,1)x(4,1,0)12[sar2=0,sar3=0]");
    }

    #[test]
    fn rejects_mask_beyond_order() {
        let err = "(0,1,1)x(4,1,0)12[sar5=0]".parse::<SarimaSpec>().unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err:?}");
    }

    #[test]
    fn malformed_text_reports_position() {
        match "(0,1,1)y(4,1,0)12".parse::<SarimaSpec>() {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 7),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!("(0,1)x(4,1,0)12".parse::<SarimaSpec>(), Err(Error::Parse { .. })));
        assert!(matches!("(0,1,1)x(4,1,0)".parse::<SarimaSpec>(), Err(Error::Parse { .. })));
        assert!(matches!("(0,1,1)x(4,1,0)12[sar3=1]".parse::<SarimaSpec>(), Err(Error::Parse { .. })));
        assert!(matches!("(0,1,1)x(4,1,0)12[foo1=0]".parse::<SarimaSpec>(), Err(Error::Parse { .. })));
        assert!(matches!("(0,1,1)x(4,1,0)0".parse::<SarimaSpec>(), Err(Error::Validation(_))));
    }

    #[test]
    fn masked_slots_cannot_be_set() {
        let spec: SarimaSpec = "(0,1,1)x(4,1,0)12[sar3=0]".parse().unwrap();
        let mut c = CoefficientSet::zeros(&spec);
        assert!(c.set(Slot::new(Factor::SeasonalAr, 3), 0.2).is_err());
        assert!(c.set(Slot::new(Factor::SeasonalAr, 5), 0.2).is_err());
        c.set(Slot::new(Factor::SeasonalAr, 4), -0.3).unwrap();
        assert_eq!(c.factor(Factor::SeasonalAr), &[0.0, 0.0, 0.0, -0.3]);
        let free = CoefficientSet::from_free(&spec, &[-0.7, -0.65, -0.37, -0.29]).unwrap();
        assert_eq!(free.get(Slot::new(Factor::SeasonalAr, 3)), 0.0);
        assert_eq!(free.free_values(&spec), vec![-0.7, -0.65, -0.37, -0.29]);
    }

    fn arb_spec() -> impl Strategy<Value = SarimaSpec> {
        (0usize..4, 0usize..3, 0usize..4, 0usize..5, 0usize..2, 0usize..3, 1usize..25, any::<u64>())
            .prop_map(|(p, d, q, sp, sd, sq, s, bits)| {
                let spec = SarimaSpec::new([p, d, q], [sp, sd, sq], s).unwrap();
                let pins: Vec<Slot> = spec
                    .slots()
                    .enumerate()
                    .filter(|(i, _)| bits >> (i % 64) & 1 == 1)
                    .map(|(_, s)| s)
                    .collect();
                spec.with_mask(pins).unwrap()
            })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(spec in arb_spec()) {
            let text = spec.to_string();
            let back: SarimaSpec = text.parse().unwrap();
            prop_assert_eq!(back, spec);
        }
    }
}
