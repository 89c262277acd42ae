// SPDX-License-Identifier: Apache-2.0

//! Three-valued logic. `X` is an unknown value; a gate output is known
//! whenever a controlling input is known or all inputs are known.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize, PartialOrd, Ord, Default)]
pub enum Tri {
    Zero,
    One,
    #[default]
    X,
}

impl Tri {
    pub fn from_bool(b: bool) -> Tri {
        if b {
            Tri::One
        } else {
            Tri::Zero
        }
    }

    pub fn is_known(self) -> bool {
        self != Tri::X
    }

    pub fn to_bool(self) -> Option<bool> {
        match self {
            Tri::Zero => Some(false),
            Tri::One => Some(true),
            Tri::X => None,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Tri {
        match self {
            Tri::Zero => Tri::One,
            Tri::One => Tri::Zero,
            Tri::X => Tri::X,
        }
    }

    pub fn and(self, o: Tri) -> Tri {
        match (self, o) {
            (Tri::Zero, _) | (_, Tri::Zero) => Tri::Zero,
            (Tri::One, Tri::One) => Tri::One,
            _ => Tri::X,
        }
    }

    pub fn or(self, o: Tri) -> Tri {
        match (self, o) {
            (Tri::One, _) | (_, Tri::One) => Tri::One,
            (Tri::Zero, Tri::Zero) => Tri::Zero,
            _ => Tri::X,
        }
    }

    pub fn xor(self, o: Tri) -> Tri {
        match (self.to_bool(), o.to_bool()) {
            (Some(a), Some(b)) => Tri::from_bool(a ^ b),
            _ => Tri::X,
        }
    }

    /// `sel ? b : a`. With an unknown select the output is known only when
    /// both data inputs agree.
    pub fn mux(sel: Tri, a: Tri, b: Tri) -> Tri {
        match sel {
            Tri::Zero => a,
            Tri::One => b,
            Tri::X => {
                if a == b && a.is_known() {
                    a
                } else {
                    Tri::X
                }
            }
        }
    }

    /// True when `self` is `other` or a refinement of an `X` in `other`.
    pub fn refines(self, other: Tri) -> bool {
        other == Tri::X || self == other
    }
}

impl From<bool> for Tri {
    fn from(b: bool) -> Tri {
        Tri::from_bool(b)
    }
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tri::Zero => "0",
            Tri::One => "1",
            Tri::X => "x",
        })
    }
}

/// Packs up to 64 known bits (LSB first) into an integer; `None` if any is X.
pub fn pack_bits(bits: &[Tri]) -> Option<u64> {
    let mut v = 0u64;
    for (i, b) in bits.iter().enumerate() {
        if b.to_bool()? {
            v |= 1 << i;
        }
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Tri::*;

    const ALL: [Tri; 3] = [Zero, One, X];

    #[test]
    fn controlling_values() {
        assert_eq!(Zero.and(X), Zero);
        assert_eq!(X.and(One), X);
        assert_eq!(One.or(X), One);
        assert_eq!(X.or(Zero), X);
        assert_eq!(X.not(), X);
        assert_eq!(X.xor(Zero), X);
        assert_eq!(Tri::mux(X, One, One), One);
        assert_eq!(Tri::mux(X, One, Zero), X);
        assert_eq!(Tri::mux(One, Zero, X), X);
        assert_eq!(Tri::mux(Zero, Zero, X), Zero);
    }

    #[test]
    fn refinement_is_monotone() {
        // refining any input never changes a known output
        for a in ALL {
            for b in ALL {
                for ra in ALL.into_iter().filter(|r| r.refines(a)) {
                    for rb in ALL.into_iter().filter(|r| r.refines(b)) {
                        assert!(ra.and(rb).refines(a.and(b)));
                        assert!(ra.or(rb).refines(a.or(b)));
                        assert!(ra.xor(rb).refines(a.xor(b)));
                        for s in ALL {
                            for rs in ALL.into_iter().filter(|r| r.refines(s)) {
                                assert!(Tri::mux(rs, ra, rb).refines(Tri::mux(s, a, b)));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn packing() {
        assert_eq!(pack_bits(&[One, Zero, One]), Some(5));
        assert_eq!(pack_bits(&[One, X]), None);
        assert_eq!(pack_bits(&[]), Some(0));
    }
}
