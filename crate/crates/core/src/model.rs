//! Shared value types: unit system, complex vectors, tolerances and seeding.
//!
//! Everything in here is a small `Copy` value; nothing holds interior state,
//! so the types can be shared freely between ensemble workers.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// Physical constants of a run. Natural units (`hbar = mass = omega = 1`) are
/// the default and every reference value in the test suite assumes them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub hbar: f64,
    pub mass: f64,
    /// Only read by oscillator constructors.
    pub omega: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::natural()
    }
}

impl UnitSystem {
    pub const fn natural() -> Self {
        UnitSystem { hbar: 1.0, mass: 1.0, omega: 1.0 }
    }

    pub fn new(hbar: f64, mass: f64, omega: f64) -> Result<Self> {
        let units = UnitSystem { hbar, mass, omega };
        units.validate()?;
        Ok(units)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("hbar", self.hbar), ("mass", self.mass), ("omega", self.omega)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Oscillator length `sqrt(hbar / (m omega))`.
    pub fn oscillator_length(&self) -> f64 {
        (self.hbar / (self.mass * self.omega)).sqrt()
    }

    /// The dimensionless combination `m omega x^2 / hbar`.
    pub fn reduced_square(&self, x: C64) -> C64 {
        x * x * (self.mass * self.omega / self.hbar)
    }
}

/// A vector of one to three complex components.
///
/// Products between vectors are bilinear (no conjugation), matching the way
/// `p . p` and `p . dr` appear in the energy and phase formulas. Use
/// [`ComplexVector::norm`] for the Hermitian length.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexVector {
    comps: [C64; 3],
    dim: u8,
}

impl ComplexVector {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=3).contains(&dim), "dimension must be 1, 2 or 3");
        ComplexVector { comps: [C64::new(0.0, 0.0); 3], dim: dim as u8 }
    }

    pub fn from_slice(values: &[C64]) -> Self {
        let mut v = Self::zeros(values.len());
        v.comps[..values.len()].copy_from_slice(values);
        v
    }

    pub fn from_real(values: &[f64]) -> Self {
        let mut v = Self::zeros(values.len());
        for (c, &x) in v.comps.iter_mut().zip(values) {
            *c = C64::new(x, 0.0);
        }
        v
    }

    pub fn scalar(value: C64) -> Self {
        Self::from_slice(&[value])
    }

    pub fn real_scalar(value: f64) -> Self {
        Self::scalar(C64::new(value, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.comps[..self.dim()]
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        let d = self.dim();
        &mut self.comps[..d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &C64> {
        self.as_slice().iter()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut out = *self;
        out.as_mut_slice().iter_mut().for_each(|c| *c = f(*c));
        out
    }

    /// Bilinear product `sum_k a_k b_k`.
    pub fn dot(&self, other: &Self) -> C64 {
        self.check_dim(other);
        self.iter().zip(other.iter()).map(|(a, b)| a * b).sum()
    }

    /// Bilinear square `sum_k a_k^2`.
    pub fn square(&self) -> C64 {
        self.dot(self)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Hermitian length.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest imaginary part in magnitude.
    pub fn max_imag(&self) -> f64 {
        self.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.max_imag() <= tol
    }

    pub fn re(&self) -> Vec<f64> {
        self.iter().map(|c| c.re).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn check_dim(&self, other: &Self) {
        debug_assert_eq!(self.dim, other.dim, "mixed-dimension vector arithmetic");
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

/// Serialized as a list of `[re, im]` pairs.
impl Serialize for ComplexVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let comps = Vec::<C64>::deserialize(d)?;
        if !(1..=3).contains(&comps.len()) {
            return Err(serde::de::Error::invalid_length(comps.len(), &"1 to 3 components"));
        }
        Ok(ComplexVector::from_slice(&comps))
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;
    fn index(&self, k: usize) -> &C64 {
        &self.as_slice()[k]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, k: usize) -> &mut C64 {
        &mut self.as_mut_slice()[k]
    }
}

impl Add for ComplexVector {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for ComplexVector {
    fn add_assign(&mut self, rhs: Self) {
        self.check_dim(&rhs);
        for (a, b) in self.as_mut_slice().iter_mut().zip(rhs.iter()) {
            *a += b;
        }
    }
}

impl Sub for ComplexVector {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl SubAssign for ComplexVector {
    fn sub_assign(&mut self, rhs: Self) {
        self.check_dim(&rhs);
        for (a, b) in self.as_mut_slice().iter_mut().zip(rhs.iter()) {
            *a -= b;
        }
    }
}

impl Neg for ComplexVector {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|c| -c)
    }
}

impl Mul<C64> for ComplexVector {
    type Output = Self;
    fn mul(self, rhs: C64) -> Self {
        self.map(|c| c * rhs)
    }
}

impl Mul<f64> for ComplexVector {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.map(|c| c * rhs)
    }
}

/// Absolute/relative tolerances plus the exclusion radius around field poles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Minimum distance kept from any known singularity.
    pub node_guard: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy { abs_tol: 1e-12, rel_tol: 1e-9, node_guard: 1e-6 }
    }
}

impl TolerancePolicy {
    pub fn new(abs_tol: f64, rel_tol: f64, node_guard: f64) -> Result<Self> {
        let tol = TolerancePolicy { abs_tol, rel_tol, node_guard };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0 && self.abs_tol + self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter("need abs_tol, rel_tol >= 0 with a positive sum".into()));
        }
        if !(self.node_guard > 0.0) {
            return Err(Error::InvalidParameter("node_guard must be > 0".into()));
        }
        Ok(())
    }

    /// `|a - b| <= abs_tol + rel_tol * max(|a|, |b|)`.
    pub fn close(&self, a: C64, b: C64) -> bool {
        (a - b).norm() <= self.abs_tol + self.rel_tol * a.norm().max(b.norm())
    }
}

/// Substream derivation rule. Only one rule exists today; the tag is kept in
/// serialized configs so results stay reproducible if another is added.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamRule {
    #[default]
    Splitmix64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    #[serde(default)]
    pub rule: StreamRule,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        SeedSpec { master_seed, rule: StreamRule::Splitmix64 }
    }

    pub fn stream(&self, index: u64) -> u64 {
        match self.rule {
            StreamRule::Splitmix64 => mix_seed(self.master_seed, index),
        }
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Derives the seed of substream `index` from `master`.
///
/// This is one SplitMix64 output: the state `master + (index + 1) * GOLDEN_GAMMA`
/// (wrapping) is passed through the SplitMix64 finalizer with constants
/// `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`. The state map is injective in
/// `index` because the gamma is odd, and the finalizer is a bijection, so for a
/// fixed master distinct indices always give distinct seeds. Integer-only, hence
/// identical on every platform.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
