//! Scenario description: the habitat Ω, the degraded region B, diffusion,
//! the logistic growth profile and the degradation rates to study.
//!
//! Scenarios are TOML documents:
//!
//! ```toml
//! dim = 1
//! omega = [-10.0, 10.0]          # 2D: [[x_lo, x_hi], [y_lo, y_hi]]
//! b = [[-6.0, 6.0]]              # 2D: [[[x_lo, x_hi], [y_lo, y_hi]], ...]
//! d = 10.0
//! m_default = 1.0
//! c = [1.0, 10.0, "inf"]         # or c = "inf"
//!
//! [[m_patches]]                  # later patches override earlier ones
//! box = [-9.0, -8.0]
//! value = 2.0
//! ```
//!
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed or open real interval `[lo, hi]`, depending on context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Axis-aligned box, one interval per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    pub axes: Vec<Interval>,
}

impl AxisBox {
    pub fn new(axes: Vec<Interval>) -> Self {
        AxisBox { axes }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        AxisBox {
            axes: vec![Interval::new(lo, hi)],
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(Interval::len).product()
    }

    /// Open-box membership.
    pub fn contains_open(&self, x: &[f64]) -> bool {
        self.axes
            .iter()
            .zip(x)
            .all(|(iv, &xi)| xi > iv.lo && xi < iv.hi)
    }

    /// Closed-box membership.
    pub fn contains_closed(&self, x: &[f64]) -> bool {
        self.axes
            .iter()
            .zip(x)
            .all(|(iv, &xi)| xi >= iv.lo && xi <= iv.hi)
    }

    fn closures_intersect(&self, other: &AxisBox) -> bool {
        self.axes
            .iter()
            .zip(&other.axes)
            .all(|(a, b)| a.lo <= b.hi && b.lo <= a.hi)
    }

    fn strictly_inside(&self, outer: &AxisBox) -> bool {
        self.axes
            .iter()
            .zip(&outer.axes)
            .all(|(a, o)| a.lo > o.lo && a.hi < o.hi)
    }
}

/// Degradation rate `c`: either a finite nonnegative rate or the destruction limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Finite(f64),
    Infinite,
}

impl Rate {
    pub fn finite(self) -> Option<f64> {
        match self {
            Rate::Finite(c) => Some(c),
            Rate::Infinite => None,
        }
    }
}

impl std::str::FromStr for Rate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(Rate::Infinite);
        }
        s.parse::<f64>()
            .map(Rate::Finite)
            .map_err(|_| Error::Parse(format!("unknown rate {s:?}, expected a number or \"inf\"")))
    }
}

impl std::fmt::Display for Rate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rate::Finite(c) => write!(f, "{c}"),
            Rate::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthPatch {
    pub region: AxisBox,
    pub value: f64,
}

/// Heterogeneous logistic growth `f(x, u) = u (m(x) - u)` with piecewise-constant `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthProfile {
    pub default: f64,
    pub patches: Vec<GrowthPatch>,
}

impl GrowthProfile {
    pub fn uniform(value: f64) -> Self {
        GrowthProfile {
            default: value,
            patches: Vec::new(),
        }
    }

    /// `m(x)`; the last patch whose closed box contains `x` wins.
    pub fn m_at(&self, x: &[f64]) -> f64 {
        self.patches
            .iter()
            .rev()
            .find(|p| p.region.contains_closed(x))
            .map_or(self.default, |p| p.value)
    }

    pub fn reaction(&self, x: &[f64], u: f64) -> f64 {
        u * (self.m_at(x) - u)
    }

    /// `f_u(x, 0)`, which equals `m(x)` for the logistic form.
    pub fn linear_growth(&self, x: &[f64]) -> f64 {
        self.m_at(x)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        GrowthProfile {
            default: self.default * alpha,
            patches: self
                .patches
                .iter()
                .map(|p| GrowthPatch {
                    region: p.region.clone(),
                    value: p.value * alpha,
                })
                .collect(),
        }
    }
}

/// Validated continuous problem description.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    dim: usize,
    omega: AxisBox,
    b_region: Vec<AxisBox>,
    diffusion: f64,
    growth: GrowthProfile,
    c_values: Vec<Rate>,
}

impl Landscape {
    pub fn new(
        omega: AxisBox,
        b_region: Vec<AxisBox>,
        diffusion: f64,
        growth: GrowthProfile,
        c_values: Vec<Rate>,
    ) -> Result<Self> {
        let l = Landscape {
            dim: omega.dim(),
            omega,
            b_region,
            diffusion,
            growth,
            c_values,
        };
        l.validate()?;
        Ok(l)
    }

    /// 1D convenience constructor with constant growth.
    pub fn interval(
        omega: (f64, f64),
        b_region: &[(f64, f64)],
        diffusion: f64,
        m: f64,
    ) -> Result<Self> {
        Landscape::new(
            AxisBox::interval(omega.0, omega.1),
            b_region
                .iter()
                .map(|&(lo, hi)| AxisBox::interval(lo, hi))
                .collect(),
            diffusion,
            GrowthProfile::uniform(m),
            Vec::new(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega(&self) -> &AxisBox {
        &self.omega
    }

    pub fn b_region(&self) -> &[AxisBox] {
        &self.b_region
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    pub fn growth(&self) -> &GrowthProfile {
        &self.growth
    }

    pub fn c_values(&self) -> &[Rate] {
        &self.c_values
    }

    pub fn with_diffusion(&self, d: f64) -> Result<Self> {
        let mut l = self.clone();
        l.diffusion = d;
        l.validate()?;
        Ok(l)
    }

    pub fn with_b_region(&self, b_region: Vec<AxisBox>) -> Result<Self> {
        let mut l = self.clone();
        l.b_region = b_region;
        l.validate()?;
        Ok(l)
    }

    pub fn with_growth(&self, growth: GrowthProfile) -> Result<Self> {
        let mut l = self.clone();
        l.growth = growth;
        l.validate()?;
        Ok(l)
    }

    pub fn with_c_values(&self, c_values: Vec<Rate>) -> Result<Self> {
        let mut l = self.clone();
        l.c_values = c_values;
        l.validate()?;
        Ok(l)
    }

    fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::Geometry(format!(
                "dim must be 1 or 2, got {}",
                self.dim
            )));
        }
        for (k, iv) in self.omega.axes.iter().enumerate() {
            if !(iv.lo.is_finite() && iv.hi.is_finite()) || iv.hi <= iv.lo {
                return Err(Error::Geometry(format!(
                    "empty domain: omega axis {k} is [{}, {}]",
                    iv.lo, iv.hi
                )));
            }
        }
        if !(self.diffusion.is_finite() && self.diffusion > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "diffusion d must be positive, got {}",
                self.diffusion
            )));
        }
        for c in &self.c_values {
            if let Rate::Finite(v) = c {
                if !(v.is_finite() && *v >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "degradation rate must be nonnegative, got {v}"
                    )));
                }
            }
        }
        for (k, b) in self.b_region.iter().enumerate() {
            if b.dim() != self.dim {
                return Err(Error::Geometry(format!(
                    "B component {k} has wrong dimension"
                )));
            }
            if b.axes
                .iter()
                .any(|iv| !(iv.lo.is_finite() && iv.hi.is_finite()) || iv.hi <= iv.lo)
            {
                return Err(Error::Geometry(format!("B component {k} is empty")));
            }
            if !b.strictly_inside(&self.omega) {
                return Err(Error::Geometry(format!(
                    "B component {k} is not compactly contained in omega"
                )));
            }
            for (j, other) in self.b_region.iter().enumerate().take(k) {
                if b.closures_intersect(other) {
                    return Err(Error::Geometry(format!(
                        "B components {j} and {k} are not separated"
                    )));
                }
            }
        }
        if !self.growth.default.is_finite() {
            return Err(Error::InvalidParameter("m_default must be finite".into()));
        }
        for (k, p) in self.growth.patches.iter().enumerate() {
            if p.region.dim() != self.dim {
                return Err(Error::Geometry(format!(
                    "growth patch {k} has wrong dimension"
                )));
            }
            if p.region.axes.iter().any(|iv| iv.hi <= iv.lo) || !p.value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "growth patch {k} is degenerate"
                )));
            }
        }
        if self.positive_growth_measure() <= 0.0 {
            return Err(Error::InvalidParameter(
                "m must be positive on a set of positive measure outside B".into(),
            ));
        }
        Ok(())
    }

    /// Exact decomposition of Ω into cells on which `m` and the B indicator are constant.
    /// Yields `(cell center, cell volume)`.
    fn cells(&self) -> Vec<(Vec<f64>, f64)> {
        let breaks: Vec<Vec<f64>> = (0..self.dim)
            .map(|k| {
                let om = self.omega.axes[k];
                let mut pts = vec![om.lo, om.hi];
                let boxes = self
                    .b_region
                    .iter()
                    .chain(self.growth.patches.iter().map(|p| &p.region));
                for b in boxes {
                    pts.push(b.axes[k].lo.clamp(om.lo, om.hi));
                    pts.push(b.axes[k].hi.clamp(om.lo, om.hi));
                }
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                pts
            })
            .collect();
        let mut cells = vec![(Vec::new(), 1.0)];
        for axis in &breaks {
            let mut next = Vec::with_capacity(cells.len() * axis.len());
            for (center, vol) in &cells {
                for w in axis.windows(2) {
                    let mut c: Vec<f64> = center.clone();
                    c.push(0.5 * (w[0] + w[1]));
                    next.push((c, vol * (w[1] - w[0])));
                }
            }
            cells = next;
        }
        cells
    }

    fn in_b(&self, x: &[f64]) -> bool {
        self.b_region.iter().any(|b| b.contains_open(x))
    }

    fn positive_growth_measure(&self) -> f64 {
        self.cells()
            .iter()
            .filter(|(x, _)| !self.in_b(x) && self.growth.m_at(x) > 0.0)
            .map(|(_, v)| v)
            .sum()
    }

    pub fn omega_measure(&self) -> f64 {
        self.omega.volume()
    }

    pub fn b_measure(&self) -> f64 {
        self.b_region.iter().map(AxisBox::volume).sum()
    }

    /// `|B| / |Ω|`.
    pub fn habitat_fraction_removed(&self) -> f64 {
        self.b_measure() / self.omega_measure()
    }

    /// `∫_{Ω∖B} m`, exact for piecewise-constant growth.
    pub fn habitat_growth_integral(&self) -> f64 {
        self.cells()
            .iter()
            .filter(|(x, _)| !self.in_b(x))
            .map(|(x, v)| v * self.growth.m_at(x))
            .sum()
    }

    /// `(1/|B|) ∫_{Ω∖B} m`: the rate above which the degradation weight has
    /// negative mean, and a strict lower bound for any extinction threshold.
    pub fn c_star(&self) -> Result<f64> {
        let b = self.b_measure();
        if b <= 0.0 {
            return Err(Error::Precondition(
                "c_star requires a nonempty degraded region".into(),
            ));
        }
        Ok(self.habitat_growth_integral() / b)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: ScenarioDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        doc.into_landscape()
    }

    pub fn to_toml_string(&self) -> String {
        let doc = ScenarioDoc::from_landscape(self);
        toml::to_string(&doc).expect("scenario document always serializes")
    }
}

/// Parse and validate a scenario document.
pub fn build_landscape(config_text: &str) -> Result<Landscape> {
    Landscape::from_toml_str(config_text)
}

pub fn habitat_fraction_removed(l: &Landscape) -> f64 {
    l.habitat_fraction_removed()
}

pub fn c_star(l: &Landscape) -> Result<f64> {
    l.c_star()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum BoxSpec {
    Interval([f64; 2]),
    Axes(Vec<[f64; 2]>),
}

impl BoxSpec {
    fn to_box(&self) -> AxisBox {
        match self {
            BoxSpec::Interval([lo, hi]) => AxisBox::interval(*lo, *hi),
            BoxSpec::Axes(axes) => AxisBox::new(
                axes.iter()
                    .map(|[lo, hi]| Interval::new(*lo, *hi))
                    .collect(),
            ),
        }
    }

    fn from_box(b: &AxisBox) -> Self {
        if b.dim() == 1 {
            BoxSpec::Interval([b.axes[0].lo, b.axes[0].hi])
        } else {
            BoxSpec::Axes(b.axes.iter().map(|iv| [iv.lo, iv.hi]).collect())
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RateSpec {
    Number(f64),
    Word(String),
}

impl RateSpec {
    fn to_rate(&self) -> Result<Rate> {
        match self {
            RateSpec::Number(v) => Ok(Rate::Finite(*v)),
            RateSpec::Word(w) if w == "inf" => Ok(Rate::Infinite),
            RateSpec::Word(w) => Err(Error::Parse(format!(
                "unknown rate {w:?}, expected a number or \"inf\""
            ))),
        }
    }

    fn from_rate(r: Rate) -> Self {
        match r {
            Rate::Finite(v) => RateSpec::Number(v),
            Rate::Infinite => RateSpec::Word("inf".into()),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RatesSpec {
    One(RateSpec),
    Many(Vec<RateSpec>),
}

impl Default for RatesSpec {
    fn default() -> Self {
        RatesSpec::Many(Vec::new())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatchSpec {
    #[serde(rename = "box")]
    region: BoxSpec,
    value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    dim: usize,
    omega: BoxSpec,
    #[serde(default)]
    b: Vec<BoxSpec>,
    d: f64,
    m_default: f64,
    #[serde(default)]
    c: RatesSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    m_patches: Vec<PatchSpec>,
}

impl ScenarioDoc {
    fn into_landscape(self) -> Result<Landscape> {
        let omega = self.omega.to_box();
        if omega.dim() != self.dim {
            return Err(Error::Parse(format!(
                "omega has {} axes but dim = {}",
                omega.dim(),
                self.dim
            )));
        }
        let c_values = match &self.c {
            RatesSpec::One(r) => vec![r.to_rate()?],
            RatesSpec::Many(rs) => rs.iter().map(RateSpec::to_rate).collect::<Result<_>>()?,
        };
        let growth = GrowthProfile {
            default: self.m_default,
            patches: self
                .m_patches
                .iter()
                .map(|p| GrowthPatch {
                    region: p.region.to_box(),
                    value: p.value,
                })
                .collect(),
        };
        let l = Landscape {
            dim: self.dim,
            omega,
            b_region: self.b.iter().map(BoxSpec::to_box).collect(),
            diffusion: self.d,
            growth,
            c_values,
        };
        l.validate()?;
        Ok(l)
    }

    fn from_landscape(l: &Landscape) -> Self {
        let c = match l.c_values.as_slice() {
            [Rate::Infinite] => RatesSpec::One(RateSpec::from_rate(Rate::Infinite)),
            rs => RatesSpec::Many(rs.iter().copied().map(RateSpec::from_rate).collect()),
        };
        ScenarioDoc {
            dim: l.dim,
            omega: BoxSpec::from_box(&l.omega),
            b: l.b_region.iter().map(BoxSpec::from_box).collect(),
            d: l.diffusion,
            m_default: l.growth.default,
            c,
            m_patches: l
                .growth
                .patches
                .iter()
                .map(|p| PatchSpec {
                    region: BoxSpec::from_box(&p.region),
                    value: p.value,
                })
                .collect(),
        }
    }
}
