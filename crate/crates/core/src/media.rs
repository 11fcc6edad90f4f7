//! Periodic media: the diffusion matrix field `A(x)`, the nonlinearity
//! `f(x, u)` and the period cell they share.
//!
//! Every coefficient is a closed-form trigonometric series in `x` (and a
//! polynomial in `u` for the reaction), so values and `∂_u f` are exact and
//! periodicity holds by construction.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Samples per period used to certify the ellipticity constant.
pub const ALPHA1_SAMPLES: usize = 256;
/// Samples per period used by [`check_assumption_a3`].
pub const A3_SAMPLES: usize = 512;

/// Rectangular period cell `[0, L_1) x ... x [0, L_d)` with `d` in {1, 2}.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    periods: Vec<f64>,
}

impl Cell {
    pub fn new(periods: Vec<f64>) -> Result<Self> {
        if periods.is_empty() || periods.len() > 2 {
            return Err(Error::InvalidMedium(format!(
                "dimension must be 1 or 2, got {}",
                periods.len()
            )));
        }
        if let Some(p) = periods.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidMedium(format!("period {p} is not positive")));
        }
        Ok(Self { periods })
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            periods: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn volume(&self) -> f64 {
        self.periods.iter().product()
    }

    pub fn scaled(&self, l: f64) -> Self {
        Self {
            periods: self.periods.iter().map(|p| p * l).collect(),
        }
    }

    /// Uniform sample points, `n` per period along every axis.
    pub fn sample_points(&self, n: usize) -> Vec<[f64; 2]> {
        let h: Vec<f64> = self.periods.iter().map(|p| p / n as f64).collect();
        match self.dim() {
            1 => (0..n).map(|i| [i as f64 * h[0], 0.0]).collect(),
            _ => (0..n * n)
                .map(|k| [(k % n) as f64 * h[0], (k / n) as f64 * h[1]])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// One factor `cos(2π k x_axis / L_axis)` or `sin(...)` of a trigonometric term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrigFactor {
    pub trig: Trig,
    pub axis: usize,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigTerm {
    pub amp: f64,
    pub factors: Vec<TrigFactor>,
}

/// Finite sum of products of trigonometric factors, periodic on the cell.
///
/// Text form: comma separated terms, each `amp` optionally followed by
/// `*cos<axis>(<k>)` / `*sin<axis>(<k>)` factors with 1-based axes, e.g.
/// `0.35, 0.2*cos1(1)*cos2(1)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigSeries {
    pub terms: Vec<TrigTerm>,
}

impl TrigSeries {
    pub fn constant(value: f64) -> Self {
        Self {
            terms: vec![TrigTerm {
                amp: value,
                factors: Vec::new(),
            }],
        }
    }

    /// `mean + amp * trig(2π k x_axis / L)`.
    pub fn harmonic(mean: f64, amp: f64, trig: Trig, axis: usize, k: u32) -> Self {
        Self {
            terms: vec![
                TrigTerm {
                    amp: mean,
                    factors: Vec::new(),
                },
                TrigTerm {
                    amp,
                    factors: vec![TrigFactor { trig, axis, k }],
                },
            ],
        }
    }

    pub fn eval(&self, x: &[f64], periods: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.factors.iter().fold(t.amp, |acc, f| {
                    let theta = 2.0 * PI * f.k as f64 * x[f.axis] / periods[f.axis];
                    acc * match f.trig {
                        Trig::Cos => theta.cos(),
                        Trig::Sin => theta.sin(),
                    }
                })
            })
            .sum()
    }

    /// Cell average, exact: only the constant terms and `cos(0)` products survive.
    pub fn mean(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| {
                t.factors
                    .iter()
                    .all(|f| f.k == 0 && f.trig == Trig::Cos)
            })
            .map(|t| t.amp)
            .sum()
    }

    pub fn is_constant(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.amp == 0.0 || t.factors.iter().all(|f| f.k == 0 && f.trig == Trig::Cos))
    }

    pub fn max_axis(&self) -> Option<usize> {
        self.terms
            .iter()
            .flat_map(|t| t.factors.iter().map(|f| f.axis))
            .max()
    }

    /// Reverses the orientation of `axis` (`x_axis -> -x_axis`).
    pub fn reflected(&self, axis: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let flips = t
                    .factors
                    .iter()
                    .filter(|f| f.axis == axis && f.trig == Trig::Sin)
                    .count();
                TrigTerm {
                    amp: if flips % 2 == 1 { -t.amp } else { t.amp },
                    factors: t.factors.clone(),
                }
            })
            .collect();
        Self { terms }
    }
}

impl fmt::Display for TrigSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", t.amp)?;
            for fac in &t.factors {
                let name = match fac.trig {
                    Trig::Cos => "cos",
                    Trig::Sin => "sin",
                };
                write!(f, "*{}{}({})", name, fac.axis + 1, fac.k)?;
            }
        }
        Ok(())
    }
}

impl FromStr for TrigSeries {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidMedium(format!("trigonometric series `{s}`: {msg}"));
        let mut terms = Vec::new();
        for raw in s.split(',') {
            let raw = raw.trim();
            if raw.is_empty() {
                return Err(bad("empty term".into()));
            }
            let mut parts = raw.split('*').map(str::trim);
            let amp: f64 = parts
                .next()
                .unwrap_or_default()
                .parse()
                .map_err(|_| bad(format!("`{raw}` does not start with a number")))?;
            let mut factors = Vec::new();
            for p in parts {
                let (trig, rest) = if let Some(r) = p.strip_prefix("cos") {
                    (Trig::Cos, r)
                } else if let Some(r) = p.strip_prefix("sin") {
                    (Trig::Sin, r)
                } else {
                    return Err(bad(format!("unknown factor `{p}`")));
                };
                let open = rest.find('(').ok_or_else(|| bad(format!("missing `(` in `{p}`")))?;
                let axis: usize = rest[..open]
                    .parse()
                    .map_err(|_| bad(format!("bad axis in `{p}`")))?;
                let inner = rest[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| bad(format!("missing `)` in `{p}`")))?;
                let k: u32 = inner
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("bad wave number in `{p}`")))?;
                if !(1..=2).contains(&axis) {
                    return Err(bad(format!("axis {axis} out of range")));
                }
                factors.push(TrigFactor {
                    trig,
                    axis: axis - 1,
                    k,
                });
            }
            terms.push(TrigTerm { amp, factors });
        }
        Ok(Self { terms })
    }
}

/// A scalar periodic coefficient: a trigonometric series or its reciprocal.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    pub series: TrigSeries,
    pub reciprocal: bool,
}

impl PeriodicField {
    pub fn constant(value: f64) -> Self {
        Self::from(TrigSeries::constant(value))
    }

    pub fn reciprocal_of(series: TrigSeries) -> Self {
        Self {
            series,
            reciprocal: true,
        }
    }

    pub fn eval(&self, x: &[f64], periods: &[f64]) -> f64 {
        let v = self.series.eval(x, periods);
        if self.reciprocal {
            1.0 / v
        } else {
            v
        }
    }

    pub fn is_constant(&self) -> bool {
        self.series.is_constant()
    }

    pub fn reflected(&self, axis: usize) -> Self {
        Self {
            series: self.series.reflected(axis),
            reciprocal: self.reciprocal,
        }
    }
}

impl From<TrigSeries> for PeriodicField {
    fn from(series: TrigSeries) -> Self {
        Self {
            series,
            reciprocal: false,
        }
    }
}

impl fmt::Display for PeriodicField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reciprocal {
            write!(f, "1/({})", self.series)
        } else {
            write!(f, "{}", self.series)
        }
    }
}

/// Symmetric matrix of size 1 or 2; `yy` and `xy` are zero in one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl Sym2 {
    pub fn min_eigenvalue(&self, dim: usize) -> f64 {
        if dim == 1 {
            return self.xx;
        }
        let mean = 0.5 * (self.xx + self.yy);
        let rad = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        mean - rad
    }

    pub fn max_eigenvalue(&self, dim: usize) -> f64 {
        if dim == 1 {
            return self.xx;
        }
        let mean = 0.5 * (self.xx + self.yy);
        let rad = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        mean + rad
    }

    /// `A v` for a vector of length `dim`.
    pub fn apply(&self, v: &[f64]) -> [f64; 2] {
        if v.len() == 1 {
            [self.xx * v[0], 0.0]
        } else {
            [self.xx * v[0] + self.xy * v[1], self.xy * v[0] + self.yy * v[1]]
        }
    }

    /// `v · A w`.
    pub fn quad(&self, v: &[f64], w: &[f64]) -> f64 {
        let aw = self.apply(w);
        v.iter().zip(aw.iter()).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiffusionSpec {
    /// Constant symmetric matrix.
    Constant(Sym2),
    /// `A(x) = a(x_axis) I`.
    Laminate { axis: usize, profile: PeriodicField },
    /// Entry-wise fields; `a12` is shared by both off-diagonal slots.
    Trigonometric {
        a11: PeriodicField,
        a22: PeriodicField,
        a12: PeriodicField,
    },
}

impl DiffusionSpec {
    pub fn identity() -> Self {
        DiffusionSpec::Constant(Sym2 {
            xx: 1.0,
            yy: 1.0,
            xy: 0.0,
        })
    }

    fn eval(&self, x: &[f64], periods: &[f64]) -> Sym2 {
        match self {
            DiffusionSpec::Constant(m) => *m,
            DiffusionSpec::Laminate { profile, .. } => {
                let a = profile.eval(x, periods);
                Sym2 {
                    xx: a,
                    yy: a,
                    xy: 0.0,
                }
            }
            DiffusionSpec::Trigonometric { a11, a22, a12 } => Sym2 {
                xx: a11.eval(x, periods),
                yy: a22.eval(x, periods),
                xy: a12.eval(x, periods),
            },
        }
    }

    fn is_constant(&self) -> bool {
        match self {
            DiffusionSpec::Constant(_) => true,
            DiffusionSpec::Laminate { profile, .. } => profile.is_constant(),
            DiffusionSpec::Trigonometric { a11, a22, a12 } => {
                a11.is_constant() && a22.is_constant() && a12.is_constant()
            }
        }
    }

    fn reflected(&self, axis: usize) -> Self {
        match self {
            DiffusionSpec::Constant(m) => DiffusionSpec::Constant(Sym2 { xy: -m.xy, ..*m }),
            DiffusionSpec::Laminate { axis: a, profile } => DiffusionSpec::Laminate {
                axis: *a,
                profile: profile.reflected(axis),
            },
            DiffusionSpec::Trigonometric { a11, a22, a12 } => {
                // the off-diagonal entry changes sign under a reflection;
                // negating the series also negates its reciprocal
                let mut a12 = a12.reflected(axis);
                for t in &mut a12.series.terms {
                    t.amp = -t.amp;
                }
                DiffusionSpec::Trigonometric {
                    a11: a11.reflected(axis),
                    a22: a22.reflected(axis),
                    a12,
                }
            }
        }
    }
}

/// Polynomial-in-`u` nonlinearities vanishing at `u = 0` and `u = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum ReactionSpec {
    /// `u (u - a(x)) (1 - u)`.
    Cubic { a: PeriodicField },
    /// `u (u - 1/8)(u - 1/4)(u - 3/8)(1 - u)`, independent of `x`.
    Quintic,
    /// `u (1 - u) Σ_k c_k(x) u^k`.
    Polynomial { coeffs: Vec<PeriodicField> },
}

impl ReactionSpec {
    pub fn cubic(a: f64) -> Self {
        ReactionSpec::Cubic {
            a: PeriodicField::constant(a),
        }
    }

    fn eval(&self, x: &[f64], periods: &[f64], u: f64) -> f64 {
        match self {
            ReactionSpec::Cubic { a } => {
                let a = a.eval(x, periods);
                u * (u - a) * (1.0 - u)
            }
            ReactionSpec::Quintic => {
                u * (u - 0.125) * (u - 0.25) * (u - 0.375) * (1.0 - u)
            }
            ReactionSpec::Polynomial { coeffs } => {
                let p = coeffs
                    .iter()
                    .rev()
                    .fold(0.0, |acc, c| acc * u + c.eval(x, periods));
                u * (1.0 - u) * p
            }
        }
    }

    fn eval_du(&self, x: &[f64], periods: &[f64], u: f64) -> f64 {
        match self {
            ReactionSpec::Cubic { a } => {
                let a = a.eval(x, periods);
                -3.0 * u * u + 2.0 * (1.0 + a) * u - a
            }
            ReactionSpec::Quintic => {
                let roots = [0.0, 0.125, 0.25, 0.375, 1.0];
                let sign = -1.0;
                // product rule over the linear factors of -(u-0)(u-1/8)(u-1/4)(u-3/8)(u-1)
                let mut total = 0.0;
                for skip in 0..roots.len() {
                    let prod: f64 = roots
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != skip)
                        .map(|(_, r)| u - r)
                        .product();
                    total += prod;
                }
                sign * total
            }
            ReactionSpec::Polynomial { coeffs } => {
                let (p, dp) = coeffs.iter().rev().fold((0.0, 0.0), |(p, dp), c| {
                    (p * u + c.eval(x, periods), dp * u + p)
                });
                (1.0 - 2.0 * u) * p + u * (1.0 - u) * dp
            }
        }
    }

    fn is_homogeneous(&self) -> bool {
        match self {
            ReactionSpec::Cubic { a } => a.is_constant(),
            ReactionSpec::Quintic => true,
            ReactionSpec::Polynomial { coeffs } => coeffs.iter().all(|c| c.is_constant()),
        }
    }

    fn reflected(&self, axis: usize) -> Self {
        match self {
            ReactionSpec::Cubic { a } => ReactionSpec::Cubic {
                a: a.reflected(axis),
            },
            ReactionSpec::Quintic => ReactionSpec::Quintic,
            ReactionSpec::Polynomial { coeffs } => ReactionSpec::Polynomial {
                coeffs: coeffs.iter().map(|c| c.reflected(axis)).collect(),
            },
        }
    }
}

/// Unvalidated description of a medium.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumConfig {
    pub cell: Cell,
    pub diffusion: DiffusionSpec,
    pub reaction: ReactionSpec,
}

/// Validated periodic medium, immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Medium {
    cell: Cell,
    diffusion: DiffusionSpec,
    reaction: ReactionSpec,
    alpha1: f64,
}

/// Validates a configuration and certifies uniform ellipticity on a
/// [`ALPHA1_SAMPLES`]-per-period grid.
pub fn build_medium(config: &MediumConfig) -> Result<Medium> {
    let dim = config.cell.dim();
    let check_axis = |series: &TrigSeries, what: &str| -> Result<()> {
        match series.max_axis() {
            Some(a) if a >= dim => Err(Error::InvalidMedium(format!(
                "{what} references axis {} in a {dim}-d medium",
                a + 1
            ))),
            _ => Ok(()),
        }
    };
    match &config.diffusion {
        DiffusionSpec::Constant(m) => {
            if !(m.xx.is_finite() && m.yy.is_finite() && m.xy.is_finite()) {
                return Err(Error::InvalidMedium("non-finite diffusion matrix".into()));
            }
        }
        DiffusionSpec::Laminate { axis, profile } => {
            if *axis >= dim {
                return Err(Error::InvalidMedium(format!(
                    "laminate axis {} out of range for d = {dim}",
                    axis + 1
                )));
            }
            check_axis(&profile.series, "laminate profile")?;
            if let Some(a) = profile.series.max_axis() {
                if a != *axis {
                    return Err(Error::InvalidMedium(
                        "laminate profile must depend on the laminate axis only".into(),
                    ));
                }
            }
        }
        DiffusionSpec::Trigonometric { a11, a22, a12 } => {
            check_axis(&a11.series, "a11")?;
            check_axis(&a22.series, "a22")?;
            check_axis(&a12.series, "a12")?;
        }
    }
    match &config.reaction {
        ReactionSpec::Cubic { a } => check_axis(&a.series, "reaction a(x)")?,
        ReactionSpec::Quintic => {}
        ReactionSpec::Polynomial { coeffs } => {
            if coeffs.is_empty() {
                return Err(Error::InvalidMedium("polynomial reaction needs coefficients".into()));
            }
            for c in coeffs {
                check_axis(&c.series, "reaction coefficient")?;
            }
        }
    }

    let periods = config.cell.periods();
    let mut alpha1 = f64::INFINITY;
    for x in config.cell.sample_points(ALPHA1_SAMPLES) {
        let a = config.diffusion.eval(&x, periods);
        let m = a.min_eigenvalue(dim);
        if !m.is_finite() {
            return Err(Error::InvalidMedium(format!(
                "diffusion matrix is not finite at x = {:?}",
                &x[..dim]
            )));
        }
        alpha1 = alpha1.min(m);
    }
    if alpha1 <= 0.0 {
        return Err(Error::InvalidMedium(format!(
            "diffusion is not uniformly elliptic (alpha1 = {alpha1:.6})"
        )));
    }
    Ok(Medium {
        cell: config.cell.clone(),
        diffusion: config.diffusion.clone(),
        reaction: config.reaction.clone(),
        alpha1,
    })
}

impl Medium {
    /// Homogeneous medium with constant diffusion `a I` and cubic reaction.
    pub fn homogeneous_cubic(dim: usize, diffusivity: f64, a: f64) -> Result<Self> {
        build_medium(&MediumConfig {
            cell: Cell::unit(dim),
            diffusion: DiffusionSpec::Constant(Sym2 {
                xx: diffusivity,
                yy: diffusivity,
                xy: 0.0,
            }),
            reaction: ReactionSpec::cubic(a),
        })
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    pub fn dim(&self) -> usize {
        self.cell.dim()
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn diffusion_spec(&self) -> &DiffusionSpec {
        &self.diffusion
    }

    pub fn reaction_spec(&self) -> &ReactionSpec {
        &self.reaction
    }

    /// `A(x)`; `x` has at least `dim` entries.
    pub fn diffusion(&self, x: &[f64]) -> Sym2 {
        let mut a = self.diffusion.eval(x, self.cell.periods());
        if self.dim() == 1 {
            a.yy = 0.0;
            a.xy = 0.0;
        }
        a
    }

    pub fn reaction(&self, x: &[f64], u: f64) -> f64 {
        self.reaction.eval(x, self.cell.periods(), u)
    }

    pub fn reaction_du(&self, x: &[f64], u: f64) -> f64 {
        self.reaction.eval_du(x, self.cell.periods(), u)
    }

    pub fn has_constant_diffusion(&self) -> bool {
        self.diffusion.is_constant()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.diffusion.is_constant() && self.reaction.is_homogeneous()
    }

    /// The medium `x -> (A(x/l), f(x/l, .))`, periodic on the cell scaled by `l`.
    pub fn scaled(&self, l: f64) -> Self {
        Self {
            cell: self.cell.scaled(l),
            ..self.clone()
        }
    }

    /// The medium seen in the reflected coordinate `x_axis -> -x_axis`.
    pub fn reflected(&self, axis: usize) -> Self {
        Self {
            cell: self.cell.clone(),
            diffusion: self.diffusion.reflected(axis),
            reaction: self.reaction.reflected(axis),
            alpha1: self.alpha1,
        }
    }

    /// Largest eigenvalue of `A(x)` over an `n`-per-period sample grid.
    pub fn diffusion_max(&self, n: usize) -> f64 {
        self.cell
            .sample_points(n)
            .iter()
            .map(|x| self.diffusion(x).max_eigenvalue(self.dim()))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Crude KPP-type growth rate `max(f/u, -f/(1-u))` over `(0,1)` and the cell.
    pub fn growth_bound(&self, n: usize) -> f64 {
        let nu = 200;
        let mut best: f64 = 0.0;
        for x in self.cell.sample_points(n) {
            for k in 1..nu {
                let u = k as f64 / nu as f64;
                let f = self.reaction(&x, u);
                best = best.max(f / u).max(-f / (1.0 - u));
            }
            best = best.max(self.reaction_du(&x, 0.0)).max(self.reaction_du(&x, 1.0));
        }
        best
    }

    /// `f(x, ·)` frozen at each of `points`.
    pub fn reaction_table(&self, points: impl IntoIterator<Item = [f64; 2]>) -> ReactionTable {
        let periods = self.cell.periods();
        let mut coeffs = Vec::new();
        let mut degree = 0;
        for x in points {
            let local: Vec<f64> = match &self.reaction {
                ReactionSpec::Cubic { a } => vec![-a.eval(&x, periods), 1.0],
                ReactionSpec::Quintic => vec![-0.01171875, 0.171875, -0.75, 1.0],
                ReactionSpec::Polynomial { coeffs } => {
                    coeffs.iter().map(|c| c.eval(&x, periods)).collect()
                }
            };
            degree = local.len();
            coeffs.extend(local);
        }
        ReactionTable { coeffs, stride: degree.max(1) }
    }

    /// `max |∂_u f(x, u)|` over `x` in the cell and `u` in `[lo, hi]`.
    pub fn max_abs_reaction_du(&self, n: usize, lo: f64, hi: f64) -> f64 {
        let nu = 200;
        let mut best: f64 = 0.0;
        for x in self.cell.sample_points(n) {
            for k in 0..=nu {
                let u = lo + (hi - lo) * k as f64 / nu as f64;
                best = best.max(self.reaction_du(&x, u).abs());
            }
        }
        best
    }
}

/// `f(x_k, u) = u (1 - u) Σ_j c_{kj} u^j` at a fixed list of nodes `x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionTable {
    coeffs: Vec<f64>,
    stride: usize,
}

impl ReactionTable {
    pub fn len(&self) -> usize {
        self.coeffs.len() / self.stride
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn poly(&self, k: usize, u: f64) -> (f64, f64) {
        self.coeffs[k * self.stride..(k + 1) * self.stride]
            .iter()
            .rev()
            .fold((0.0, 0.0), |(p, dp), c| (p * u + c, dp * u + p))
    }

    pub fn eval(&self, k: usize, u: f64) -> f64 {
        u * (1.0 - u) * self.poly(k, u).0
    }

    pub fn eval_du(&self, k: usize, u: f64) -> f64 {
        let (p, dp) = self.poly(k, u);
        (1.0 - 2.0 * u) * p + u * (1.0 - u) * dp
    }
}

/// Outcome of the uniform stability check on the states 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct A3Report {
    pub holds: bool,
    pub gamma0: f64,
    /// `max_x ∂_u f(x, 0)`.
    pub max_du_at_zero: f64,
    /// `max_x ∂_u f(x, 1)`.
    pub max_du_at_one: f64,
}

/// True iff `∂_u f(x,0) <= -gamma0` and `∂_u f(x,1) <= -gamma0` on a
/// [`A3_SAMPLES`]-per-period grid.
pub fn check_assumption_a3(m: &Medium, gamma0: f64) -> A3Report {
    let mut max0 = f64::NEG_INFINITY;
    let mut max1 = f64::NEG_INFINITY;
    for x in m.cell.sample_points(A3_SAMPLES) {
        max0 = max0.max(m.reaction_du(&x, 0.0));
        max1 = max1.max(m.reaction_du(&x, 1.0));
    }
    A3Report {
        holds: max0 <= -gamma0 && max1 <= -gamma0,
        gamma0,
        max_du_at_zero: max0,
        max_du_at_one: max1,
    }
}
