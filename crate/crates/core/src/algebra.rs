//! Collective-spin ladder structure of the fully symmetric (r = N/2) sector.
//!
//! Spin numbers are half-integers and are stored doubled ([`Half`]) so that
//! basis construction and indexing never compare floats.
//!
//! Qubit ordering convention used throughout the crate: in a computational
//! basis index, qubit `q` of `N` sits at bit `N - 1 - q` and a set bit means
//! spin up (σ_z = +1/2).

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Exact half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Half(i32);

impl Half {
    pub const ZERO: Half = Half(0);

    pub const fn from_doubled(doubled: i32) -> Self {
        Half(doubled)
    }

    pub const fn from_int(value: i32) -> Self {
        Half(2 * value)
    }

    /// Accepts `x` only when `2x` is an integer (to within 1e-9).
    pub fn from_f64(x: f64) -> Result<Self> {
        let doubled = (2.0 * x).round();
        if !x.is_finite() || (2.0 * x - doubled).abs() > 1e-9 {
            return Err(Error::domain(format!("{x} is not a half-integer")));
        }
        Ok(Half(doubled as i32))
    }

    pub const fn doubled(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub const fn abs(self) -> Self {
        Half(self.0.abs())
    }

    /// Whether `self - other` is an integer.
    pub const fn same_parity(self, other: Half) -> bool {
        (self.0 - other.0) % 2 == 0
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Parses `"3/2"`, `"-1/2"`, `"2"` or a decimal such as `"1.5"`.
impl FromStr for Half {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: i32 = num
                .trim()
                .parse()
                .map_err(|_| Error::domain(format!("bad half-integer '{s}'")))?;
            return match den.trim() {
                "2" => Ok(Half(num)),
                "1" => Ok(Half(2 * num)),
                _ => Err(Error::domain(format!("'{s}' is not a half-integer"))),
            };
        }
        let x: f64 = s
            .parse()
            .map_err(|_| Error::domain(format!("bad half-integer '{s}'")))?;
        Half::from_f64(x)
    }
}

impl Add for Half {
    type Output = Half;
    fn add(self, rhs: Half) -> Half {
        Half(self.0 + rhs.0)
    }
}

impl Sub for Half {
    type Output = Half;
    fn sub(self, rhs: Half) -> Half {
        Half(self.0 - rhs.0)
    }
}

impl Neg for Half {
    type Output = Half;
    fn neg(self) -> Half {
        Half(-self.0)
    }
}

impl From<i32> for Half {
    fn from(v: i32) -> Self {
        Half::from_int(v)
    }
}

/// Total spin `r` and projection `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpinQuantum {
    pub r: Half,
    pub m: Half,
}

impl SpinQuantum {
    pub fn new(r: Half, m: Half) -> Result<Self> {
        if r < Half::ZERO {
            return Err(Error::domain(format!("total spin r = {r} is negative")));
        }
        if m.abs() > r {
            return Err(Error::domain(format!("|m| = {} exceeds r = {r}", m.abs())));
        }
        if !r.same_parity(m) {
            return Err(Error::domain(format!("r = {r} and m = {m} differ by a half-integer")));
        }
        Ok(SpinQuantum { r, m })
    }
}

/// `(r - m)(r + m + 1)` in exact integer arithmetic.
pub fn alpha_squared(r: Half, m: Half) -> Result<i64> {
    SpinQuantum::new(r, m)?;
    // Both factors are even when doubled because r and m share parity.
    let a = i64::from(r.doubled() - m.doubled());
    let b = i64::from(r.doubled() + m.doubled() + 2);
    Ok((a / 2) * (b / 2))
}

/// Off-diagonal ladder element `α_{r,m} = √((r−m)(r+m+1))` (the S₊ matrix element ⟨r,m+1|S₊|r,m⟩).
pub fn alpha(r: Half, m: Half) -> Result<f64> {
    Ok((alpha_squared(r, m)? as f64).sqrt())
}

/// One product state `|n⟩ ⊗ |r, m⟩` of a cluster.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClusterState {
    pub n: usize,
    pub m: Half,
}

/// The degenerate manifold of fixed excitation number `u = n + m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterBasis {
    pub u: Half,
    pub r: Half,
    /// Ordered by ascending photon number.
    pub states: Vec<ClusterState>,
}

impl ClusterBasis {
    pub fn dim(&self) -> usize {
        self.states.len()
    }
}

/// Builds the basis `[(n, u − n) for n = 0..=u+r]`.
///
/// Only `−r ≤ u ≤ r` is supported; above `r` the photon count no longer
/// ranges down to zero together with the full spin ladder.
pub fn cluster_basis(u: Half, r: Half) -> Result<ClusterBasis> {
    if r < Half::ZERO {
        return Err(Error::domain(format!("total spin r = {r} is negative")));
    }
    if !u.same_parity(r) {
        return Err(Error::domain(format!(
            "excitation number u = {u} is incompatible with r = {r} (u - r must be an integer)"
        )));
    }
    if u < -r {
        return Err(Error::domain(format!(
            "u = {u} lies below the ground state -r = {}",
            -r
        )));
    }
    if u > r {
        return Err(Error::Unsupported(format!("cluster u = {u} > r = {r}")));
    }
    let top = ((u + r).doubled() / 2) as usize;
    let states = (0..=top)
        .map(|n| ClusterState {
            n,
            m: u - Half::from_int(n as i32),
        })
        .collect();
    Ok(ClusterBasis { u, r, states })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Symmetric Dicke state `|r = N/2, m⟩` expanded on the `2^N` computational basis.
pub fn dicke_amplitudes(r: Half, m: Half, n_qubits: usize) -> Result<Vec<Complex64>> {
    if r.doubled() < 0 || r.doubled() as usize != n_qubits {
        return Err(Error::Unsupported(format!(
            "only the symmetric sector r = N/2 is modeled (got r = {r}, N = {n_qubits})"
        )));
    }
    SpinQuantum::new(r, m)?;
    if n_qubits >= usize::BITS as usize {
        return Err(Error::domain(format!("{n_qubits} qubits do not fit a state vector")));
    }
    let ups = ((r + m).doubled() / 2) as u32;
    let amp = 1.0 / binomial(n_qubits, ups as usize).sqrt();
    Ok((0..1usize << n_qubits)
        .map(|s| {
            if s.count_ones() == ups {
                Complex64::new(amp, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect())
}
