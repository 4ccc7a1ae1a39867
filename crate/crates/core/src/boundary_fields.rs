//! Random Fourier series on the circle and the half-circle.
//!
//! A circle field is `c + Σ_{n≥1} (x_n cos nθ − y_n sin nθ)/√n`, i.e. Fourier
//! coefficients `φ_n = (x_n + i y_n)/(2√n)`.  A half-circle field is the even
//! series `c + Σ_{n≥1} √2 x_n cos(nθ)/√n`.  Under the Gaussian reference
//! measures every mode coordinate is an independent standard normal.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{idx, lit, to_f64, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleField<T> {
    pub c: T,
    pub modes: Vec<(T, T)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfCircleField<T> {
    pub c: T,
    pub modes: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryField<T> {
    Circle(CircleField<T>),
    Half(HalfCircleField<T>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Circle,
    HalfCircle,
}

/// `includes_zero_mode` selects `dc ⊗ P` instead of the probability measure `P`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldMeasure {
    pub kind: FieldKind,
    pub includes_zero_mode: bool,
}

/// Proper law used in place of Lebesgue `dc` when a zero mode must be drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ZeroModeLaw {
    Fixed(f64),
    Normal { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl ZeroModeLaw {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match *self {
            ZeroModeLaw::Fixed(c) => Ok(c),
            ZeroModeLaw::Normal { mean, sd } => Normal::new(mean, sd).map(|d| d.sample(rng)).map_err(|_| {
                Error::InvalidParameter { name: "sd", value: sd, expected: "a finite nonnegative standard deviation" }
            }),
            ZeroModeLaw::Uniform { lo, hi } => {
                if !(lo < hi) {
                    return Err(Error::InvalidParameter { name: "hi", value: hi, expected: "hi > lo" });
                }
                Ok(Uniform::new(lo, hi).sample(rng))
            }
        }
    }
}

/// Iterates `(cos nθ, sin nθ)` for `n = 1, 2, ...` by angle addition.
struct Harmonics<T> {
    c1: T,
    s1: T,
    c: T,
    s: T,
}

impl<T: Scalar> Harmonics<T> {
    fn new(theta: T) -> Self {
        let (s1, c1) = theta.sin_cos();
        Self { c1, s1, c: T::one(), s: T::zero() }
    }
}

impl<T: Scalar> Iterator for Harmonics<T> {
    type Item = (T, T);
    fn next(&mut self) -> Option<(T, T)> {
        let c = self.c * self.c1 - self.s * self.s1;
        let s = self.s * self.c1 + self.c * self.s1;
        self.c = c;
        self.s = s;
        Some((c, s))
    }
}

impl<T: Scalar> CircleField<T> {
    pub fn new(c: T, modes: Vec<(T, T)>) -> Self {
        Self { c, modes }
    }

    pub fn zero(n_cut: usize) -> Self {
        Self::new(T::zero(), vec![(T::zero(), T::zero()); n_cut])
    }

    pub fn n_cut(&self) -> usize {
        self.modes.len()
    }

    /// Coordinates of mode `n` (1-based), zero beyond the cutoff.
    pub fn mode(&self, n: usize) -> (T, T) {
        self.modes.get(n.wrapping_sub(1)).copied().unwrap_or((T::zero(), T::zero()))
    }

    /// Fourier coefficient `φ_n` as `(re, im)` for `n ≥ 1`.
    pub fn coefficient(&self, n: usize) -> (T, T) {
        let (x, y) = self.mode(n);
        let d = lit::<T>(2.0) * idx::<T>(n).sqrt();
        (x / d, y / d)
    }

    pub fn padded(&self, n_cut: usize) -> Self {
        let mut modes = self.modes.clone();
        modes.resize(n_cut.max(self.n_cut()), (T::zero(), T::zero()));
        Self::new(self.c, modes)
    }

    pub fn evaluate(&self, theta: T) -> T {
        let mut acc = self.c;
        for ((n, (x, y)), (cn, sn)) in self.modes.iter().enumerate().zip(Harmonics::new(theta)) {
            acc = acc + (*x * cn - *y * sn) / idx::<T>(n + 1).sqrt();
        }
        acc
    }

    /// Field with the zero mode removed.
    pub fn centered(&self) -> Self {
        Self::new(T::zero(), self.modes.clone())
    }
}

impl<T: Scalar> HalfCircleField<T> {
    pub fn new(c: T, modes: Vec<T>) -> Self {
        Self { c, modes }
    }

    pub fn zero(n_cut: usize) -> Self {
        Self::new(T::zero(), vec![T::zero(); n_cut])
    }

    pub fn n_cut(&self) -> usize {
        self.modes.len()
    }

    pub fn mode(&self, n: usize) -> T {
        self.modes.get(n.wrapping_sub(1)).copied().unwrap_or(T::zero())
    }

    pub fn padded(&self, n_cut: usize) -> Self {
        let mut modes = self.modes.clone();
        modes.resize(n_cut.max(self.n_cut()), T::zero());
        Self::new(self.c, modes)
    }

    pub fn evaluate(&self, theta: T) -> T {
        let sqrt2 = lit::<T>(2.0).sqrt();
        let mut acc = self.c;
        for ((n, x), (cn, _)) in self.modes.iter().enumerate().zip(Harmonics::new(theta)) {
            acc = acc + sqrt2 * *x * cn / idx::<T>(n + 1).sqrt();
        }
        acc
    }

    /// The same function viewed as a circle field: `x^ℓ = √2 x^h`, `y^ℓ = 0`.
    pub fn to_circle(&self) -> CircleField<T> {
        let sqrt2 = lit::<T>(2.0).sqrt();
        CircleField::new(self.c, self.modes.iter().map(|x| (sqrt2 * *x, T::zero())).collect())
    }

    /// Reflection `θ ↦ π − θ`, i.e. `x_n ↦ (−1)^n x_n`.
    pub fn reflected(&self) -> Self {
        let modes = self.modes.iter().enumerate().map(|(i, x)| if (i + 1) % 2 == 1 { -*x } else { *x }).collect();
        Self::new(self.c, modes)
    }
}

impl<T: Scalar> BoundaryField<T> {
    pub fn kind(&self) -> FieldKind {
        match self {
            BoundaryField::Circle(_) => FieldKind::Circle,
            BoundaryField::Half(_) => FieldKind::HalfCircle,
        }
    }

    pub fn n_cut(&self) -> usize {
        match self {
            BoundaryField::Circle(f) => f.n_cut(),
            BoundaryField::Half(f) => f.n_cut(),
        }
    }

    pub fn evaluate(&self, theta: T) -> T {
        match self {
            BoundaryField::Circle(f) => f.evaluate(theta),
            BoundaryField::Half(f) => f.evaluate(theta),
        }
    }

    pub fn to_json(&self, seed: Option<u64>) -> Result<String> {
        let (kind, c, modes) = match self {
            BoundaryField::Circle(f) => (
                FieldKind::Circle,
                f.c,
                serde_json::to_value(f.modes.iter().map(|(x, y)| [to_f64(*x), to_f64(*y)]).collect::<Vec<_>>())?,
            ),
            BoundaryField::Half(f) => (
                FieldKind::HalfCircle,
                f.c,
                serde_json::to_value(f.modes.iter().map(|x| to_f64(*x)).collect::<Vec<_>>())?,
            ),
        };
        let record = FieldRecord { kind, c: to_f64(c), modes, n_cut: self.n_cut(), seed };
        Ok(serde_json::to_string(&record)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let record: FieldRecord = serde_json::from_str(s)?;
        let c = lit::<T>(record.c);
        let field = match record.kind {
            FieldKind::Circle => {
                let modes: Vec<[f64; 2]> = serde_json::from_value(record.modes)?;
                BoundaryField::Circle(CircleField::new(c, modes.iter().map(|[x, y]| (lit(*x), lit(*y))).collect()))
            }
            FieldKind::HalfCircle => {
                let modes: Vec<f64> = serde_json::from_value(record.modes)?;
                BoundaryField::Half(HalfCircleField::new(c, modes.iter().map(|x| lit(*x)).collect()))
            }
        };
        if field.n_cut() != record.n_cut {
            return Err(Error::ShapeMismatch(format!(
                "n_cut {} does not match {} stored modes",
                record.n_cut,
                field.n_cut()
            )));
        }
        Ok(field)
    }
}

#[derive(Serialize, Deserialize)]
struct FieldRecord {
    kind: FieldKind,
    c: f64,
    modes: serde_json::Value,
    n_cut: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

/// Draws a field from `measure`.  With a zero mode, `zero_mode` supplies the law of `c`.
pub fn sample<T, R>(
    measure: FieldMeasure,
    n_cut: usize,
    zero_mode: Option<ZeroModeLaw>,
    rng: &mut R,
) -> Result<BoundaryField<T>>
where
    T: Scalar,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    if n_cut == 0 {
        return Err(Error::InvalidCutoff(n_cut));
    }
    let c = if measure.includes_zero_mode {
        let law = zero_mode.ok_or(Error::MissingZeroModeLaw)?;
        lit::<T>(law.draw(rng)?)
    } else {
        T::zero()
    };
    Ok(match measure.kind {
        FieldKind::Circle => {
            let mut f = sample_circle(n_cut, rng);
            f.c = c;
            BoundaryField::Circle(f)
        }
        FieldKind::HalfCircle => {
            let mut f = sample_half(n_cut, rng);
            f.c = c;
            BoundaryField::Half(f)
        }
    })
}

/// Zero-mode-free circle field under `P_T`.
pub fn sample_circle<T, R>(n_cut: usize, rng: &mut R) -> CircleField<T>
where
    T: Scalar,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let modes = (0..n_cut).map(|_| (StandardNormal.sample(rng), StandardNormal.sample(rng))).collect();
    CircleField::new(T::zero(), modes)
}

/// Zero-mode-free half-circle field under `P_{T+}`.
pub fn sample_half<T, R>(n_cut: usize, rng: &mut R) -> HalfCircleField<T>
where
    T: Scalar,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    HalfCircleField::new(T::zero(), (0..n_cut).map(|_| StandardNormal.sample(rng)).collect())
}

fn chord<T: Scalar>(a: T) -> T {
    lit::<T>(2.0) * (a / lit::<T>(2.0)).sin().abs()
}

/// Chord lengths below this are treated as coincident points.
fn coincidence_tol<T: Scalar>(theta: T, theta_p: T) -> T {
    lit::<T>(16.0) * T::epsilon() * T::one().max(theta.abs()).max(theta_p.abs())
}

/// `−log|e^{iθ} − e^{iθ'}|`.
pub fn covariance_circle<T: Scalar>(theta: T, theta_p: T) -> Result<T> {
    let d = chord(theta - theta_p);
    if d <= coincidence_tol(theta, theta_p) {
        return Err(Error::Divergent(format!("circle covariance at coincident points {} and {}", theta, theta_p)));
    }
    Ok(-d.ln())
}

/// `−log(|e^{iθ} − e^{iθ'}| |e^{iθ} − e^{−iθ'}|)`.
pub fn covariance_half<T: Scalar>(theta: T, theta_p: T) -> Result<T> {
    let d1 = chord(theta - theta_p);
    let d2 = chord(theta + theta_p);
    let tol = coincidence_tol(theta, theta_p);
    if d1 <= tol || d2 <= tol {
        return Err(Error::Divergent(format!("half-circle covariance at singular pair {} and {}", theta, theta_p)));
    }
    Ok(-(d1.ln() + d2.ln()))
}

/// `Σ_{n≤N} cos(n(θ−θ'))/n`, the covariance of the field truncated at `N`.
pub fn covariance_circle_truncated<T: Scalar>(theta: T, theta_p: T, n_cut: usize) -> T {
    Harmonics::new(theta - theta_p)
        .take(n_cut)
        .enumerate()
        .fold(T::zero(), |acc, (i, (c, _))| acc + c / idx::<T>(i + 1))
}

/// `Σ_{n≤N} (2/n) cos(nθ) cos(nθ')`.
pub fn covariance_half_truncated<T: Scalar>(theta: T, theta_p: T, n_cut: usize) -> T {
    Harmonics::new(theta)
        .zip(Harmonics::new(theta_p))
        .take(n_cut)
        .enumerate()
        .fold(T::zero(), |acc, (i, ((a, _), (b, _)))| acc + lit::<T>(2.0) * a * b / idx::<T>(i + 1))
}

/// `(1/2π)∫ φψ dθ` from mode coordinates.
pub fn pairing_circle<T: Scalar>(a: &CircleField<T>, b: &CircleField<T>) -> T {
    let n = a.n_cut().max(b.n_cut());
    (1..=n).fold(a.c * b.c, |acc, k| {
        let (x, y) = a.mode(k);
        let (xp, yp) = b.mode(k);
        acc + (x * xp + y * yp) / (lit::<T>(2.0) * idx::<T>(k))
    })
}

/// `(1/π)∫_0^π φψ dθ` from mode coordinates.
pub fn pairing_half<T: Scalar>(a: &HalfCircleField<T>, b: &HalfCircleField<T>) -> T {
    let n = a.n_cut().max(b.n_cut());
    (1..=n).fold(a.c * b.c, |acc, k| acc + a.mode(k) * b.mode(k) / idx::<T>(k))
}

/// Data on `b_ℓ` circles and `b_h` half-circles.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundaryData<T> {
    pub circles: Vec<CircleField<T>>,
    pub halves: Vec<HalfCircleField<T>>,
}

/// Total pairing `Σ (·,·)_{2,ℓ} + ½ Σ (·,·)_{2,h}`.
pub fn pairing_2<T: Scalar>(a: &BoundaryData<T>, b: &BoundaryData<T>) -> Result<T> {
    if a.circles.len() != b.circles.len() || a.halves.len() != b.halves.len() {
        return Err(Error::ShapeMismatch(format!(
            "({}, {}) boundary components against ({}, {})",
            a.circles.len(),
            a.halves.len(),
            b.circles.len(),
            b.halves.len()
        )));
    }
    let circ = a.circles.iter().zip(&b.circles).fold(T::zero(), |acc, (f, g)| acc + pairing_circle(f, g));
    let half = a.halves.iter().zip(&b.halves).fold(T::zero(), |acc, (f, g)| acc + pairing_half(f, g));
    Ok(circ + half / lit::<T>(2.0))
}

/// Rotation: `evaluate(rotate(f, ϑ), θ) = evaluate(f, θ + ϑ)`.
pub fn rotate<T: Scalar>(f: &CircleField<T>, vartheta: T) -> CircleField<T> {
    let modes = f
        .modes
        .iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let (s, c) = (idx::<T>(i + 1) * vartheta).sin_cos();
            (*x * c - *y * s, *x * s + *y * c)
        })
        .collect();
    CircleField::new(f.c, modes)
}

/// `c² + Σ_{n≠0} |φ_n|² (|n|+1)^{2s}` over the represented modes.
pub fn sobolev_norm<T: Scalar>(f: &BoundaryField<T>, s: T) -> T {
    let two = lit::<T>(2.0);
    match f {
        BoundaryField::Circle(f) => f.modes.iter().enumerate().fold(f.c * f.c, |acc, (i, (x, y))| {
            let n = idx::<T>(i + 1);
            acc + (*x * *x + *y * *y) / (two * n) * (n + T::one()).powf(two * s)
        }),
        BoundaryField::Half(f) => f.modes.iter().enumerate().fold(f.c * f.c, |acc, (i, x)| {
            let n = idx::<T>(i + 1);
            acc + *x * *x / n * (n + T::one()).powf(two * s)
        }),
    }
}
