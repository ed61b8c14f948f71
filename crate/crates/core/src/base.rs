//! The DNA alphabet and the fixed bit-pair/base mapping.
//!
//! Every transmitted base carries one bit from each component code: the
//! first code's bit is the high bit of the pair, the second code's bit the
//! low bit.  `(0,0) -> A`, `(0,1) -> C`, `(1,0) -> T`, `(1,1) -> G`.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Base {
    A = 0b00,
    C = 0b01,
    T = 0b10,
    G = 0b11,
}

impl Base {
    pub const ALL: [Base; 4] = [Base::A, Base::C, Base::T, Base::G];

    #[inline]
    pub fn from_bits(first: bool, second: bool) -> Base {
        Base::from_index(((first as usize) << 1) | second as usize)
    }

    #[inline]
    pub fn from_index(i: usize) -> Base {
        Base::ALL[i]
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// The component-code bit this base carries on the given side.
    #[inline]
    pub fn bit(self, side: CodeSide) -> bool {
        match side {
            CodeSide::First => (self as u8) & 0b10 != 0,
            CodeSide::Second => (self as u8) & 0b01 != 0,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Base::A => 'A',
            Base::C => 'C',
            Base::T => 'T',
            Base::G => 'G',
        }
    }

    pub fn from_char(c: char) -> Option<Base> {
        match c {
            'A' | 'a' => Some(Base::A),
            'C' | 'c' => Some(Base::C),
            'T' | 't' => Some(Base::T),
            'G' | 'g' => Some(Base::G),
            _ => None,
        }
    }
}

impl std::fmt::Display for Base {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// Which of the two component codes a bit belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodeSide {
    First,
    Second,
}

impl CodeSide {
    pub const BOTH: [CodeSide; 2] = [CodeSide::First, CodeSide::Second];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            CodeSide::First => 0,
            CodeSide::Second => 1,
        }
    }

    #[inline]
    pub fn other(self) -> CodeSide {
        match self {
            CodeSide::First => CodeSide::Second,
            CodeSide::Second => CodeSide::First,
        }
    }

    pub fn from_index(i: usize) -> CodeSide {
        match i {
            0 => CodeSide::First,
            1 => CodeSide::Second,
            _ => panic!("code side index out of range: {i}"),
        }
    }
}

/// A probability tuple over the four bases, ordered A, C, T, G.
pub type BaseDist = [f64; 4];

pub const UNIFORM_DIST: BaseDist = [0.25; 4];

pub fn point_mass(b: Base) -> BaseDist {
    let mut d = [0.0; 4];
    d[b.index()] = 1.0;
    d
}

/// Normalize a tuple in place; returns false (leaving a uniform tuple) when
/// the total mass is zero or non-finite.
pub fn normalize(dist: &mut BaseDist) -> bool {
    let sum: f64 = dist.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        for p in dist.iter_mut() {
            *p /= sum;
        }
        true
    } else {
        *dist = UNIFORM_DIST;
        false
    }
}
