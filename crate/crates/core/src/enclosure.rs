use std::fmt;

use serde::{Deserialize, Serialize};

/// How an enclosure was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Closed-form or direct spectral evaluation; zero width up to rounding.
    Exact,
    /// Monte-Carlo bound; one side only is guaranteed.
    Oracle,
    /// Angular grid with a certificate on the discretization error.
    Grid,
}

/// A real interval `[lo, hi]` guaranteed to contain the value it encloses.
///
/// Arithmetic on enclosures is ordinary interval arithmetic; the method tag
/// of a composite is the weakest tag of its inputs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
    pub method: Method,
}

impl Enclosure {
    pub fn new(lo: f64, hi: f64, method: Method) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan(), "inverted enclosure [{lo}, {hi}]");
        Self { lo, hi, method }
    }

    pub fn exact(v: f64) -> Self {
        Self::new(v, v, Method::Exact)
    }

    pub fn gap(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    fn join(self, other: Self) -> Method {
        self.method.max(other.method)
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.lo + o.lo, self.hi + o.hi, self.join(o))
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.lo - o.hi, self.hi - o.lo, self.join(o))
    }

    pub fn mul(self, o: Self) -> Self {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::new(lo, hi, self.join(o))
    }

    pub fn scale(self, k: f64) -> Self {
        if k >= 0.0 {
            Self::new(self.lo * k, self.hi * k, self.method)
        } else {
            Self::new(self.hi * k, self.lo * k, self.method)
        }
    }

    pub fn square(self) -> Self {
        if self.lo >= 0.0 {
            Self::new(self.lo * self.lo, self.hi * self.hi, self.method)
        } else if self.hi <= 0.0 {
            Self::new(self.hi * self.hi, self.lo * self.lo, self.method)
        } else {
            Self::new(0.0, (self.lo * self.lo).max(self.hi * self.hi), self.method)
        }
    }

    /// Square root of the nonnegative part.
    pub fn sqrt(self) -> Self {
        Self::new(self.lo.max(0.0).sqrt(), self.hi.max(0.0).sqrt(), self.method)
    }

    pub fn abs(self) -> Self {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            Self::new(-self.hi, -self.lo, self.method)
        } else {
            Self::new(0.0, (-self.lo).max(self.hi), self.method)
        }
    }

    pub fn max(self, o: Self) -> Self {
        Self::new(self.lo.max(o.lo), self.hi.max(o.hi), self.join(o))
    }

    pub fn min(self, o: Self) -> Self {
        Self::new(self.lo.min(o.lo), self.hi.min(o.hi), self.join(o))
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn interval() -> impl Strategy<Value = Enclosure> {
        (-10.0f64..10.0, 0.0f64..5.0).prop_map(|(lo, w)| Enclosure::new(lo, lo + w, Method::Grid))
    }

    fn pick(e: Enclosure, t: f64) -> f64 {
        e.lo + t * (e.hi - e.lo)
    }

    proptest! {
        #[test]
        fn operations_contain_pointwise_results(
            a in interval(), b in interval(), s in 0.0f64..1.0, t in 0.0f64..1.0, k in -3.0f64..3.0
        ) {
            let (x, y) = (pick(a, s), pick(b, t));
            let slop = 1e-12;
            let inside = |e: Enclosure, v: f64| e.lo - slop <= v && v <= e.hi + slop;
            prop_assert!(inside(a.add(b), x + y));
            prop_assert!(inside(a.sub(b), x - y));
            prop_assert!(inside(a.mul(b), x * y));
            prop_assert!(inside(a.scale(k), k * x));
            prop_assert!(inside(a.square(), x * x));
            prop_assert!(inside(a.abs(), x.abs()));
            prop_assert!(inside(a.max(b), x.max(y)));
            prop_assert!(inside(a.min(b), x.min(y)));
            prop_assert!(inside(a.sqrt(), x.max(0.0).sqrt()));
        }
    }

    #[test]
    fn method_tag_is_weakest_input() {
        let e = Enclosure::exact(1.0);
        let g = Enclosure::new(0.0, 1.0, Method::Grid);
        assert_eq!(e.add(e).method, Method::Exact);
        assert_eq!(e.mul(g).method, Method::Grid);
    }
}
