use serde::{Deserialize, Serialize};

use crate::scalar::{dist2, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessMode {
    /// Any witness inside the lune prunes the edge.
    #[default]
    Strict,
    /// A witness must also be strictly closer to both endpoints than they
    /// are to each other.
    Relaxed,
}

/// Membership test for the closed β-lune of a segment `uv`.
///
/// The lune is the intersection of the two balls of radius `β‖u−v‖/2`
/// centred at `u + β/2·(v−u)` and `v + β/2·(u−v)`; for β = 1 both centres
/// are the midpoint. A point sitting exactly on an endpoint is never a
/// witness. Buffers are reused across calls to [`LuneTest::set`].
#[derive(Debug, Clone, Default)]
pub struct LuneTest<T> {
    u: Vec<T>,
    v: Vec<T>,
    c1: Vec<T>,
    c2: Vec<T>,
    mid: Vec<T>,
    r2: T,
    len2: T,
    mode: WitnessMode,
}

impl<T: Scalar> LuneTest<T> {
    pub fn new() -> Self {
        LuneTest {
            u: Vec::new(),
            v: Vec::new(),
            c1: Vec::new(),
            c2: Vec::new(),
            mid: Vec::new(),
            r2: T::zero(),
            len2: T::zero(),
            mode: WitnessMode::Strict,
        }
    }

    pub fn set(&mut self, u: &[T], v: &[T], beta: T, mode: WitnessMode) {
        let half = beta * T::of(0.5);
        let point_half = T::of(0.5);
        self.u.clear();
        self.u.extend_from_slice(u);
        self.v.clear();
        self.v.extend_from_slice(v);
        self.c1.clear();
        self.c2.clear();
        self.mid.clear();
        for (a, b) in u.iter().zip(v) {
            self.c1.push(*a + half * (*b - *a));
            self.c2.push(*b + half * (*a - *b));
            self.mid.push(point_half * (*a + *b));
        }
        self.len2 = dist2(u, v);
        self.r2 = half * half * self.len2;
        self.mode = mode;
    }

    pub fn contains(&self, w: &[T]) -> bool {
        if w == self.u.as_slice() || w == self.v.as_slice() {
            return false;
        }
        if dist2(w, &self.c1) > self.r2 || dist2(w, &self.c2) > self.r2 {
            return false;
        }
        match self.mode {
            WitnessMode::Strict => true,
            WitnessMode::Relaxed => dist2(&self.u, w) < self.len2 && dist2(&self.v, w) < self.len2,
        }
    }

    /// Midpoint of the segment.
    pub fn midpoint(&self) -> &[T] {
        &self.mid
    }

    /// Squared radius of a ball around the midpoint that contains the lune,
    /// padded against rounding.
    pub fn bounding_radius2(&self, beta: T) -> T {
        let two = T::of(2.0);
        let exact = self.len2 * T::of(0.25) * (two * beta - T::one());
        exact * (T::one() + T::epsilon() * T::of(64.0)) + T::min_positive_value()
    }
}

/// True iff no witness lies in the closed β-lune of `uv` (strict mode).
pub fn empty_region_keep<T: Scalar>(u: &[T], v: &[T], witnesses: &[&[T]], beta: T) -> bool {
    empty_region_keep_with(u, v, witnesses, beta, WitnessMode::Strict)
}

pub fn empty_region_keep_with<T: Scalar>(
    u: &[T],
    v: &[T],
    witnesses: &[&[T]],
    beta: T,
    mode: WitnessMode,
) -> bool {
    let mut lune = LuneTest::new();
    lune.set(u, v, beta, mode);
    !witnesses.iter().any(|w| lune.contains(w))
}
