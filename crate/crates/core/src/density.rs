//! Continuous densities over one-dimensional supports and region-uniform
//! densities over plane regions.
//!
//! A [`Density`] is validated once, at construction, and is immutable
//! afterwards. Evaluation outside the support returns `0`, which is the
//! usual extension of a density by zero.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::probe;
use crate::quadrature::{self, QuadOptions};

/// Scalar map used for analytic densities, CDFs and region cross-sections.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Tolerance for the normalization of piecewise-constant densities. Cell
/// sums are exact up to floating-point rounding of the breakpoints.
pub const PIECEWISE_MASS_TOL: f64 = 1e-12;

/// Tolerance for the normalization of analytic and region-uniform densities.
pub const ANALYTIC_MASS_TOL: f64 = 1e-9;

/// A point of the ambient space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Line(f64),
    Plane(f64, f64),
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::Line(x)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x1, x2): (f64, f64)) -> Self {
        Point::Plane(x1, x2)
    }
}

/// Orientation of a half-line support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `[origin, +inf)`
    Up,
    /// `(-inf, origin]`
    Down,
}

/// Lebesgue measure of a support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LebesgueMeasure {
    Finite(f64),
    Infinite,
}

/// Planar region `{(x1, x2) : x1 in [lo, hi], 0 <= x2 <= height(x1)}`.
///
/// `hi` may be `+inf`; the height function bounds the region from above and
/// is what makes its area computable with one-dimensional quadrature.
#[derive(Clone)]
pub struct PlaneRegion {
    lo: f64,
    hi: f64,
    height: ScalarFn,
    area: f64,
}

impl PlaneRegion {
    /// Builds the region and integrates its cross-section to obtain the area.
    pub fn new(lo: f64, hi: f64, height: ScalarFn) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi || lo.is_infinite() {
            return Err(Error::InvalidSupport(format!(
                "plane region base [{lo}, {hi}] must have finite lower end and lo < hi"
            )));
        }
        let h = height.clone();
        let res = quadrature::integrate_range(
            &|x| h(x).max(0.0),
            lo,
            hi,
            &[],
            &QuadOptions::default(),
        )?;
        if !(res.value.is_finite() && res.value > 0.0) {
            return Err(Error::InvalidSupport(format!(
                "plane region area must be finite and positive, got {}",
                res.value
            )));
        }
        Ok(Self {
            lo,
            hi,
            height,
            area: res.value,
        })
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn contains(&self, x1: f64, x2: f64) -> bool {
        x1 >= self.lo && x1 <= self.hi && x2 >= 0.0 && x2 <= (self.height)(x1)
    }

    pub fn base(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn height(&self, x1: f64) -> f64 {
        (self.height)(x1)
    }
}

impl fmt::Debug for PlaneRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlaneRegion")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("area", &self.area)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum SupportKind {
    Interval { lo: f64, hi: f64 },
    HalfLine { origin: f64, direction: Direction },
    Line,
    Plane(PlaneRegion),
}

/// Domain of a density.
#[derive(Debug, Clone)]
pub struct SupportSpec {
    kind: SupportKind,
    declared_measure: Option<LebesgueMeasure>,
}

impl SupportSpec {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidSupport(format!(
                "bounded interval requires finite a < b, got [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            kind: SupportKind::Interval { lo, hi },
            declared_measure: None,
        })
    }

    pub fn half_line(origin: f64, direction: Direction) -> Result<Self> {
        if !origin.is_finite() {
            return Err(Error::InvalidSupport(format!(
                "half-line origin must be finite, got {origin}"
            )));
        }
        Ok(Self {
            kind: SupportKind::HalfLine { origin, direction },
            declared_measure: None,
        })
    }

    pub fn line() -> Self {
        Self {
            kind: SupportKind::Line,
            declared_measure: None,
        }
    }

    pub fn plane(region: PlaneRegion) -> Self {
        Self {
            kind: SupportKind::Plane(region),
            declared_measure: None,
        }
    }

    /// Attaches a declared Lebesgue measure, checked against the support.
    pub fn with_declared_measure(mut self, m: LebesgueMeasure) -> Result<Self> {
        match (&self.kind, m) {
            (_, LebesgueMeasure::Finite(v)) if !(v.is_finite() && v >= 0.0) => {
                return Err(Error::InvalidSupport(format!(
                    "declared measure must be a nonnegative real, got {v}"
                )));
            }
            (SupportKind::Interval { lo, hi }, LebesgueMeasure::Finite(v)) => {
                if ((hi - lo) - v).abs() > 1e-12 {
                    return Err(Error::InvalidSupport(format!(
                        "declared measure {v} differs from interval length {}",
                        hi - lo
                    )));
                }
            }
            (SupportKind::Interval { .. }, LebesgueMeasure::Infinite) => {
                return Err(Error::InvalidSupport(
                    "bounded interval cannot have infinite measure".into(),
                ));
            }
            (SupportKind::HalfLine { .. } | SupportKind::Line, LebesgueMeasure::Finite(_)) => {
                return Err(Error::InvalidSupport(
                    "unbounded one-dimensional support has infinite measure".into(),
                ));
            }
            _ => {}
        }
        self.declared_measure = Some(m);
        Ok(self)
    }

    pub fn kind(&self) -> &SupportKind {
        &self.kind
    }

    pub fn declared_measure(&self) -> Option<LebesgueMeasure> {
        self.declared_measure
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            SupportKind::Plane(_) => 2,
            _ => 1,
        }
    }

    /// Lower and upper ends of a one-dimensional support (possibly infinite).
    pub fn bounds(&self) -> Result<(f64, f64)> {
        match &self.kind {
            SupportKind::Interval { lo, hi } => Ok((*lo, *hi)),
            SupportKind::HalfLine {
                origin,
                direction: Direction::Up,
            } => Ok((*origin, f64::INFINITY)),
            SupportKind::HalfLine {
                origin,
                direction: Direction::Down,
            } => Ok((f64::NEG_INFINITY, *origin)),
            SupportKind::Line => Ok((f64::NEG_INFINITY, f64::INFINITY)),
            SupportKind::Plane(_) => Err(Error::UnsupportedDimension),
        }
    }

    pub fn lebesgue_measure(&self) -> LebesgueMeasure {
        match &self.kind {
            SupportKind::Interval { lo, hi } => LebesgueMeasure::Finite(hi - lo),
            SupportKind::HalfLine { .. } | SupportKind::Line => LebesgueMeasure::Infinite,
            SupportKind::Plane(r) => LebesgueMeasure::Finite(r.area()),
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        match (&self.kind, x) {
            (SupportKind::Plane(r), Point::Plane(x1, x2)) => r.contains(x1, x2),
            (SupportKind::Plane(_), Point::Line(_)) => false,
            (_, Point::Plane(..)) => false,
            (_, Point::Line(x)) => {
                let (lo, hi) = self.bounds().expect("one-dimensional");
                x >= lo && x <= hi
            }
        }
    }

    /// Smallest one-dimensional support containing both arguments.
    pub fn hull(&self, other: &SupportSpec) -> Result<SupportSpec> {
        let (a0, b0) = self.bounds()?;
        let (a1, b1) = other.bounds()?;
        Ok(support_from_bounds(a0.min(a1), b0.max(b1)))
    }
}

pub(crate) fn support_from_bounds(lo: f64, hi: f64) -> SupportSpec {
    let kind = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => SupportKind::Interval { lo, hi },
        (true, false) => SupportKind::HalfLine {
            origin: lo,
            direction: Direction::Up,
        },
        (false, true) => SupportKind::HalfLine {
            origin: hi,
            direction: Direction::Down,
        },
        (false, false) => SupportKind::Line,
    };
    SupportSpec {
        kind,
        declared_measure: None,
    }
}

/// Function that is constant on each cell `[breakpoints[i], breakpoints[i+1])`
/// and zero outside `[breakpoints[0], breakpoints[last]]`.
///
/// Cell widths are stored next to the breakpoints. Callers that know the
/// widths exactly (for instance `1/n^3`) can supply them, so cell masses do
/// not inherit the cancellation error of `right - left`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    widths: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::validate(&breakpoints, &values)?;
        let widths = breakpoints.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self {
            breakpoints,
            widths,
            values,
        })
    }

    /// Like [`StepFunction::new`] with explicit cell widths. Each width must
    /// agree with the breakpoint difference up to a few ulps of the endpoints.
    pub fn with_widths(breakpoints: Vec<f64>, widths: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::validate(&breakpoints, &values)?;
        if widths.len() != values.len() {
            return Err(Error::InvalidDensity(format!(
                "{} cells need {} widths, got {}",
                values.len(),
                values.len(),
                widths.len()
            )));
        }
        for (i, (w, &width)) in breakpoints.windows(2).zip(&widths).enumerate() {
            let slack = 8.0 * f64::EPSILON * w[0].abs().max(w[1].abs());
            if width.is_nan() || width <= 0.0 || ((w[1] - w[0]) - width).abs() > slack {
                return Err(Error::InvalidDensity(format!(
                    "width {width} of cell {i} does not match [{}, {}]",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self {
            breakpoints,
            widths,
            values,
        })
    }

    fn validate(breakpoints: &[f64], values: &[f64]) -> Result<()> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidDensity(
                "at least two breakpoints are required".into(),
            ));
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidDensity(format!(
                "{} breakpoints need {} cell values, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                values.len()
            )));
        }
        if let Some(x) = breakpoints.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidDensity(format!("breakpoint {x} is not finite")));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDensity(format!(
                "breakpoints must be strictly increasing ({} >= {})",
                w[0], w[1]
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidDensity(format!("cell value {v} is not finite")));
        }
        Ok(())
    }

    /// Same cells with each value replaced by `f(value)`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidDensity(format!("mapped cell value {v} is not finite")));
        }
        Ok(Self {
            breakpoints: self.breakpoints.clone(),
            widths: self.widths.clone(),
            values,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lo(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn hi(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Cells as `(left, right, width, value)`.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.widths)
            .zip(&self.values)
            .map(|((b, &w), &v)| (b[0], b[1], w, v))
    }

    /// Index of the cell containing `x`; cells are half-open except the last.
    pub fn cell_index(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo() && x <= self.hi()) {
            return None;
        }
        let i = self.breakpoints.partition_point(|&b| b <= x);
        Some(i.saturating_sub(1).min(self.values.len() - 1))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.cell_index(x).map_or(0.0, |i| self.values[i])
    }

    /// Exact integral over `[a, b]` (clipped to the cells).
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let mut acc = KahanSum::default();
        for (l, r, w, v) in self.cells() {
            if v == 0.0 {
                continue;
            }
            if a <= l && b >= r {
                acc.add(v * w);
            } else {
                let lo = l.max(a);
                let hi = r.min(b);
                if hi > lo {
                    acc.add(v * (hi - lo));
                }
            }
        }
        acc.total()
    }
}

/// Common refinement of two step functions: `(left, right, width, a, b)`.
///
/// A merged cell that coincides with a cell of either operand takes that
/// operand's stored width.
pub fn merged_cells(a: &StepFunction, b: &StepFunction) -> Vec<(f64, f64, f64, f64, f64)> {
    let cuts = merge_breakpoints(&[a.breakpoints(), b.breakpoints()]);
    let exact_width = |s: &StepFunction, l: f64, r: f64| -> Option<f64> {
        let i = s.breakpoints.partition_point(|&x| x < l);
        (i + 1 < s.breakpoints.len() && s.breakpoints[i] == l && s.breakpoints[i + 1] == r)
            .then(|| s.widths[i])
    };
    cuts.windows(2)
        .map(|w| {
            let (l, r) = (w[0], w[1]);
            let width = exact_width(a, l, r)
                .or_else(|| exact_width(b, l, r))
                .unwrap_or(r - l);
            let mid = l + 0.5 * (r - l);
            (l, r, width, a.eval(mid), b.eval(mid))
        })
        .collect()
}

/// Neumaier compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Merged, deduplicated breakpoints of several step functions.
pub(crate) fn merge_breakpoints(sets: &[&[f64]]) -> Vec<f64> {
    let mut all: Vec<f64> = sets.iter().flat_map(|s| s.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

#[derive(Clone)]
pub struct AnalyticDensity {
    eval: ScalarFn,
    cdf: Option<ScalarFn>,
    closed_form_entropy: Option<f64>,
    log_density_bound: Option<f64>,
    knots: Vec<f64>,
}

impl AnalyticDensity {
    pub fn closed_form_entropy(&self) -> Option<f64> {
        self.closed_form_entropy
    }

    /// Declared bound on `|log2 density|` over the support.
    pub fn log_density_bound(&self) -> Option<f64> {
        self.log_density_bound
    }

    /// Points where the density may be discontinuous or kinked.
    pub fn has_cdf(&self) -> bool {
        self.cdf.is_some()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }
}

impl fmt::Debug for AnalyticDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticDensity")
            .field("closed_form_entropy", &self.closed_form_entropy)
            .field("log_density_bound", &self.log_density_bound)
            .field("has_cdf", &self.cdf.is_some())
            .field("knots", &self.knots)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Representation {
    PiecewiseConstant {
        step: StepFunction,
        cumulative: Vec<f64>,
    },
    Analytic(AnalyticDensity),
    RegionUniform {
        level: f64,
        closed_form_entropy: Option<f64>,
    },
}

/// Probability density with respect to Lebesgue measure.
#[derive(Debug, Clone)]
pub struct Density {
    support: SupportSpec,
    repr: Representation,
    strictly_positive: bool,
}

impl Density {
    /// Piecewise-constant density on `[breakpoints[0], breakpoints[last]]`.
    pub fn piecewise_constant(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::from_step(StepFunction::new(breakpoints, values)?)
    }

    /// Piecewise-constant density with exactly known cell widths.
    pub fn piecewise_constant_with_widths(
        breakpoints: Vec<f64>,
        widths: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        Self::from_step(StepFunction::with_widths(breakpoints, widths, values)?)
    }

    fn from_step(step: StepFunction) -> Result<Self> {
        if let Some(v) = step.values().iter().find(|&&v| v < 0.0) {
            return Err(Error::InvalidDensity(format!("cell value {v} is negative")));
        }
        let mut cumulative = Vec::with_capacity(step.breakpoints().len());
        let mut acc = KahanSum::default();
        cumulative.push(0.0);
        for (_, _, w, v) in step.cells() {
            acc.add(v * w);
            cumulative.push(acc.total());
        }
        let total = *cumulative.last().unwrap();
        if (total - 1.0).abs() > PIECEWISE_MASS_TOL {
            return Err(Error::InvalidDensity(format!(
                "cell masses sum to {total}, expected 1"
            )));
        }
        let support = SupportSpec::interval(step.lo(), step.hi())?;
        let strictly_positive = step.values().iter().all(|&v| v > 0.0);
        Ok(Self {
            support,
            repr: Representation::PiecewiseConstant { step, cumulative },
            strictly_positive,
        })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidSupport(format!(
                "bounded interval requires finite a < b, got [{lo}, {hi}]"
            )));
        }
        Self::piecewise_constant(vec![lo, hi], vec![1.0 / (hi - lo)])
    }

    pub fn analytic(support: SupportSpec, eval: ScalarFn) -> AnalyticBuilder {
        AnalyticBuilder {
            support,
            eval,
            cdf: None,
            closed_form_entropy: None,
            log_density_bound: None,
            knots: Vec::new(),
            strictly_positive: false,
            tol: ANALYTIC_MASS_TOL,
        }
    }

    /// Constant density `level` over a plane region; `level * area` must be 1.
    pub fn region_uniform(region: PlaneRegion, level: f64) -> Result<Self> {
        if !(level.is_finite() && level > 0.0) {
            return Err(Error::InvalidDensity(format!(
                "region level must be positive, got {level}"
            )));
        }
        let mass = level * region.area();
        if (mass - 1.0).abs() > ANALYTIC_MASS_TOL {
            return Err(Error::InvalidDensity(format!(
                "level {level} over area {} has mass {mass}",
                region.area()
            )));
        }
        Ok(Self {
            support: SupportSpec::plane(region),
            repr: Representation::RegionUniform {
                level,
                closed_form_entropy: None,
            },
            strictly_positive: true,
        })
    }

    /// Attaches a closed-form entropy (bits) to a region-uniform density.
    pub fn with_region_entropy(mut self, h: f64) -> Self {
        if let Representation::RegionUniform {
            closed_form_entropy,
            ..
        } = &mut self.repr
        {
            *closed_form_entropy = Some(h);
        }
        self
    }

    pub fn support(&self) -> &SupportSpec {
        &self.support
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.strictly_positive
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    pub fn as_step(&self) -> Option<&StepFunction> {
        match &self.repr {
            Representation::PiecewiseConstant { step, .. } => Some(step),
            _ => None,
        }
    }

    pub fn as_analytic(&self) -> Option<&AnalyticDensity> {
        match &self.repr {
            Representation::Analytic(a) => Some(a),
            _ => None,
        }
    }

    /// Breakpoints or knots that quadrature should align with.
    pub fn knots(&self) -> Vec<f64> {
        match &self.repr {
            Representation::PiecewiseConstant { step, .. } => step.breakpoints().to_vec(),
            Representation::Analytic(a) => {
                let mut k = a.knots.clone();
                if let Ok((lo, hi)) = self.support.bounds() {
                    k.extend([lo, hi].into_iter().filter(|x| x.is_finite()));
                }
                k.sort_by(f64::total_cmp);
                k.dedup();
                k
            }
            Representation::RegionUniform { .. } => Vec::new(),
        }
    }

    /// Density value at `x`; zero outside the support or the ambient space.
    pub fn evaluate(&self, x: impl Into<Point>) -> f64 {
        let x = x.into();
        match (&self.repr, x) {
            (Representation::PiecewiseConstant { step, .. }, Point::Line(t)) => step.eval(t),
            (Representation::Analytic(a), Point::Line(t)) => {
                if self.support.contains(x) {
                    (a.eval)(t).max(0.0)
                } else {
                    0.0
                }
            }
            (Representation::RegionUniform { level, .. }, Point::Plane(..)) if self.support.contains(x) => *level,
            _ => 0.0,
        }
    }

    /// One-dimensional evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.evaluate(Point::Line(x))
    }

    /// Distribution function `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.support.bounds()?;
        if x.is_nan() {
            return Err(Error::Argument("cdf argument is NaN".into()));
        }
        if x <= lo {
            return Ok(0.0);
        }
        if x >= hi {
            return Ok(1.0);
        }
        match &self.repr {
            Representation::PiecewiseConstant { step, cumulative } => {
                let i = step.cell_index(x).expect("inside support");
                let v = cumulative[i] + step.values()[i] * (x - step.breakpoints()[i]);
                Ok(v.clamp(0.0, 1.0))
            }
            Representation::Analytic(a) => {
                if let Some(cdf) = &a.cdf {
                    return Ok(cdf(x).clamp(0.0, 1.0));
                }
                let knots: Vec<f64> = a.knots.iter().copied().filter(|&k| k < x).collect();
                let f = a.eval.clone();
                let res = quadrature::integrate_range(
                    &|t| f(t).max(0.0),
                    lo,
                    x,
                    &knots,
                    &QuadOptions::default(),
                )?;
                Ok(res.value.clamp(0.0, 1.0))
            }
            Representation::RegionUniform { .. } => Err(Error::UnsupportedDimension),
        }
    }

    /// Probability of `[a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> Result<f64> {
        if a.is_nan() || b.is_nan() || a > b {
            return Err(Error::Argument(format!("mass requires a <= b, got [{a}, {b}]")));
        }
        if let Representation::PiecewiseConstant { step, .. } = &self.repr {
            let (lo, hi) = (step.lo(), step.hi());
            if a <= lo && b >= hi {
                return Ok(1.0);
            }
            return Ok(step.integral(a, b).max(0.0));
        }
        Ok((self.cdf(b)? - self.cdf(a)?).max(0.0))
    }
}

pub struct AnalyticBuilder {
    support: SupportSpec,
    eval: ScalarFn,
    cdf: Option<ScalarFn>,
    closed_form_entropy: Option<f64>,
    log_density_bound: Option<f64>,
    knots: Vec<f64>,
    strictly_positive: bool,
    tol: f64,
}

impl AnalyticBuilder {
    pub fn cdf(mut self, cdf: ScalarFn) -> Self {
        self.cdf = Some(cdf);
        self
    }

    pub fn closed_form_entropy(mut self, h: f64) -> Self {
        self.closed_form_entropy = Some(h);
        self
    }

    pub fn log_density_bound(mut self, b: f64) -> Self {
        self.log_density_bound = Some(b);
        self
    }

    pub fn knots(mut self, knots: Vec<f64>) -> Self {
        self.knots = knots;
        self
    }

    pub fn strictly_positive(mut self, flag: bool) -> Self {
        self.strictly_positive = flag;
        self
    }

    /// Normalization tolerance used during validation.
    pub fn mass_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn build(self) -> Result<Density> {
        let (lo, hi) = self.support.bounds()?;
        let mut knots: Vec<f64> = self
            .knots
            .into_iter()
            .filter(|k| k.is_finite() && *k > lo && *k < hi)
            .collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();

        let probes = probe::probe_points(&self.support, &knots, 1024, 0)?;
        let values: Vec<f64> = probes.iter().map(|&x| (self.eval)(x)).collect();
        // zero runs reaching an infinite end are underflow, not a vanishing density
        let mut first = 0;
        let mut last = probes.len();
        if lo == f64::NEG_INFINITY {
            while first < last && values[first] == 0.0 {
                first += 1;
            }
        }
        if hi == f64::INFINITY {
            while last > first && values[last - 1] == 0.0 {
                last -= 1;
            }
        }
        for (k, (&x, &v)) in probes.iter().zip(&values).enumerate() {
            if v.is_nan() || v < 0.0 {
                return Err(Error::InvalidDensity(format!(
                    "density evaluates to {v} at x = {x}"
                )));
            }
            if self.strictly_positive && v <= 0.0 && x > lo && x < hi && (first..last).contains(&k) {
                return Err(Error::InvalidDensity(format!(
                    "density flagged strictly positive vanishes at x = {x}"
                )));
            }
        }
        if let Some(cdf) = &self.cdf {
            // a closed-form CDF certifies normalization at the support ends
            let (f_lo, f_hi) = (cdf(lo), cdf(hi));
            if f_lo.abs() > self.tol || (f_hi - 1.0).abs() > self.tol {
                return Err(Error::InvalidDensity(format!(
                    "closed-form cdf runs from {f_lo} to {f_hi}, expected 0 to 1"
                )));
            }
            return Ok(Density {
                support: self.support,
                repr: Representation::Analytic(AnalyticDensity {
                    eval: self.eval,
                    cdf: self.cdf,
                    closed_form_entropy: self.closed_form_entropy,
                    log_density_bound: self.log_density_bound,
                    knots,
                }),
                strictly_positive: self.strictly_positive,
            });
        }
        let f = self.eval.clone();
        let mass = quadrature::integrate_range(
            &|t| f(t).max(0.0),
            lo,
            hi,
            &knots,
            &QuadOptions::with_tol(self.tol * 0.1),
        )?;
        if (mass.value - 1.0).abs() > self.tol {
            return Err(Error::InvalidDensity(format!(
                "density integrates to {}, expected 1",
                mass.value
            )));
        }
        Ok(Density {
            support: self.support,
            repr: Representation::Analytic(AnalyticDensity {
                eval: self.eval,
                cdf: self.cdf,
                closed_form_entropy: self.closed_form_entropy,
                log_density_bound: self.log_density_bound,
                knots,
            }),
            strictly_positive: self.strictly_positive,
        })
    }
}

/// Radon-Nikodym ratio `numerator / denominator` with floor `0` on the zero
/// set of the denominator.
#[derive(Debug, Clone)]
pub struct RatioFunction<'a> {
    numerator: &'a Density,
    denominator: &'a Density,
}

impl<'a> RatioFunction<'a> {
    pub const FLOOR: f64 = 0.0;

    pub fn new(numerator: &'a Density, denominator: &'a Density) -> Self {
        Self {
            numerator,
            denominator,
        }
    }

    pub fn eval(&self, x: impl Into<Point> + Copy) -> f64 {
        let den = self.denominator.evaluate(x);
        if den > 0.0 {
            self.numerator.evaluate(x) / den
        } else {
            Self::FLOOR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spikes(n: usize) -> Density {
        crate::scenarios::build_counterexample(n as u64).unwrap()
    }

    #[test]
    fn rejects_malformed_piecewise() {
        assert!(Density::piecewise_constant(vec![0.0, 0.5, 0.4], vec![1.0, 1.0]).is_err());
        assert!(Density::piecewise_constant(vec![0.0, 1.0], vec![-1.0]).is_err());
        assert!(Density::piecewise_constant(vec![0.0, 1.0], vec![0.9]).is_err());
        assert!(Density::piecewise_constant(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(Density::piecewise_constant(vec![0.0], vec![]).is_err());
    }

    #[test]
    fn support_invariants() {
        assert!(SupportSpec::interval(1.0, 1.0).is_err());
        let s = SupportSpec::interval(0.0, 2.0).unwrap();
        assert!(s
            .clone()
            .with_declared_measure(LebesgueMeasure::Finite(2.0))
            .is_ok());
        assert!(s.with_declared_measure(LebesgueMeasure::Finite(1.5)).is_err());
        let h = SupportSpec::half_line(0.0, Direction::Up).unwrap();
        assert!(h.with_declared_measure(LebesgueMeasure::Finite(1.0)).is_err());
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(spikes(2).eval(0.1), 4.0);
        let u = Density::uniform(0.0, 1.0).unwrap();
        assert_eq!(u.eval(0.5), 1.0);
        assert_eq!(u.eval(-0.1), 0.0);
        assert_eq!(u.eval(1.1), 0.0);
        assert_eq!(u.evaluate((0.5, 0.5)), 0.0);
    }

    #[test]
    fn cdf_examples() {
        let u = Density::uniform(0.0, 1.0).unwrap();
        assert_eq!(u.cdf(0.25).unwrap(), 0.25);
        assert_eq!(u.cdf(-3.0).unwrap(), 0.0);
        assert_eq!(u.cdf(f64::INFINITY).unwrap(), 1.0);
        assert_eq!(u.cdf(f64::NEG_INFINITY).unwrap(), 0.0);
        // first spike of p_2 is [0, 1/8] at height 4
        assert_eq!(spikes(2).cdf(0.125).unwrap(), 0.5);
    }

    #[test]
    fn mass_examples() {
        let p2 = spikes(2);
        assert_eq!(p2.mass(0.0, 1.0).unwrap(), 1.0);
        let u = Density::uniform(0.0, 1.0).unwrap();
        assert!((u.mass(0.2, 0.7).unwrap() - 0.5).abs() < 1e-15);
        let p3 = spikes(3);
        let m = p3.mass(1.0 / 3.0, 1.0 / 3.0 + 1.0 / 27.0).unwrap();
        assert!((m - 1.0 / 3.0).abs() < 1e-15, "{m}");
        assert!(u.mass(0.7, 0.2).is_err());
    }

    #[test]
    fn analytic_cdf_by_quadrature() {
        let s = SupportSpec::half_line(0.0, Direction::Up).unwrap();
        let d = Density::analytic(s, Arc::new(|x: f64| (-x).exp()))
            .strictly_positive(true)
            .build()
            .unwrap();
        let c = d.cdf(1.0).unwrap();
        assert!((c - (1.0 - (-1.0f64).exp())).abs() < 1e-9);
        assert!((d.mass(1.0, 2.0).unwrap() - ((-1.0f64).exp() - (-2.0f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn analytic_rejects_unnormalized() {
        let s = SupportSpec::interval(0.0, 1.0).unwrap();
        assert!(Density::analytic(s.clone(), Arc::new(|_| 2.0)).build().is_err());
        assert!(Density::analytic(s, Arc::new(|x| x - 0.5)).build().is_err());
    }

    #[test]
    fn cdf_of_plane_density_is_unsupported() {
        let d = crate::scenarios::build_nnfs_region(2.0).unwrap();
        assert_eq!(d.cdf(0.0), Err(Error::UnsupportedDimension));
        assert_eq!(d.evaluate((0.1, 0.1)), 2.0);
        assert_eq!(d.evaluate((0.1, 0.9)), 0.0);
    }

    #[test]
    fn ratio_uses_zero_floor() {
        let p = spikes(2);
        let u = Density::uniform(0.0, 0.5).unwrap();
        let r = RatioFunction::new(&p, &u);
        assert_eq!(r.eval(0.1), 4.0 / 2.0);
        assert_eq!(r.eval(0.55), 0.0);
    }
}
